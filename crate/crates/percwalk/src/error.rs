use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("position {position} outside window radius {window_radius}")]
    PositionOutsideWindow { position: i32, window_radius: usize },

    #[error("coin state not normalized: |up|^2 + |down|^2 = {norm_sq}")]
    UnnormalizedCoin { norm_sq: f64 },

    #[error("amplitude has a non-finite component")]
    NonFiniteAmplitude,

    #[error("window radii differ: {left} vs {right}")]
    WindowMismatch { left: usize, right: usize },

    #[error("state support touches the window edge")]
    SupportAtEdge,

    #[error("percolation parameter {p} outside [0, 1]")]
    InvalidPercolationParameter { p: f64 },

    #[error("average segment length diverges at p = 1")]
    DivergentSegmentLength,

    #[error("a walk needs at least one step")]
    ZeroSteps,

    #[error("{steps}-step sequence does not fit window radius {window_radius}")]
    WindowTooSmall { steps: usize, window_radius: usize },

    #[error("fermionic symmetrization of proportional states is undefined")]
    DegenerateFermion,

    #[error("input factor is not localized at a single position")]
    NotLocalized,

    #[error("need at least {required} realizations, got {got}")]
    TooFewRealizations { required: usize, got: usize },

    #[error("empty p grid")]
    EmptyGrid,

    #[error("polynomial fit of degree {degree} needs more than {points} points")]
    UnderdeterminedFit { points: usize, degree: usize },

    #[error("singular normal equations in polynomial fit")]
    SingularFit,

    #[error("event kind does not match the walker input")]
    EventInputMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
