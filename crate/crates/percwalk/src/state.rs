//! Single-walker state vectors: complex amplitudes over (position, coin) on a
//! bounded lattice window.
//!
//! A walk of `N` steps from an origin-localized input never leaves `[-N, N]`,
//! so states are stored densely over a fixed window of `2N + 1` positions with
//! two coin components each. No boundary wrapping or clamping exists anywhere;
//! support reaching the window edge is an error.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex amplitude of a basis component.
pub type Amplitude = Complex64;

/// Tolerance for internal normalization checks.
pub const NORM_TOL_INTERNAL: f64 = 1e-12;
/// Tolerance applied to user-supplied input coins.
pub const NORM_TOL_INPUT: f64 = 1e-9;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A two-level coin state with `up` and `down` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin {
    pub up: Amplitude,
    pub down: Amplitude,
}

impl Coin {
    /// The basis state |up⟩.
    pub const UP: Coin = Coin {
        up: Complex64::new(1.0, 0.0),
        down: Complex64::new(0.0, 0.0),
    };

    /// The basis state |down⟩.
    pub const DOWN: Coin = Coin {
        up: Complex64::new(0.0, 0.0),
        down: Complex64::new(1.0, 0.0),
    };

    /// (|up⟩ + i|down⟩)/√2, the symmetric-spreading coin.
    pub const PHI_PLUS: Coin = Coin {
        up: Complex64::new(FRAC_1_SQRT_2, 0.0),
        down: Complex64::new(0.0, FRAC_1_SQRT_2),
    };

    /// (|up⟩ − i|down⟩)/√2, the conjugate of [`Coin::PHI_PLUS`].
    pub const PHI_MINUS: Coin = Coin {
        up: Complex64::new(FRAC_1_SQRT_2, 0.0),
        down: Complex64::new(0.0, -FRAC_1_SQRT_2),
    };

    pub fn new(up: Amplitude, down: Amplitude) -> Coin {
        Coin { up, down }
    }

    pub fn norm_sq(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Coin) -> Amplitude {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn conjugated(&self) -> Coin {
        Coin {
            up: self.up.conj(),
            down: self.down.conj(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.up.re.is_finite()
            && self.up.im.is_finite()
            && self.down.re.is_finite()
            && self.down.im.is_finite()
    }

    /// Validates a user-supplied input coin: finite components, unit norm
    /// within [`NORM_TOL_INPUT`].
    pub fn validate_input(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFiniteAmplitude);
        }
        let norm_sq = self.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_TOL_INPUT {
            return Err(Error::UnnormalizedCoin { norm_sq });
        }
        Ok(())
    }
}

/// Declarative, serializable description of a single coin state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinSpec {
    Up,
    Down,
    PhiPlus,
    PhiMinus,
    Custom { up: (f64, f64), down: (f64, f64) },
}

impl CoinSpec {
    pub fn coin(&self) -> Coin {
        match self {
            CoinSpec::Up => Coin::UP,
            CoinSpec::Down => Coin::DOWN,
            CoinSpec::PhiPlus => Coin::PHI_PLUS,
            CoinSpec::PhiMinus => Coin::PHI_MINUS,
            CoinSpec::Custom { up, down } => {
                Coin::new(Complex64::new(up.0, up.1), Complex64::new(down.0, down.1))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CoinSpec::Up => "single_up".to_string(),
            CoinSpec::Down => "single_down".to_string(),
            CoinSpec::PhiPlus => "single_phi+".to_string(),
            CoinSpec::PhiMinus => "single_phi-".to_string(),
            CoinSpec::Custom { .. } => "single_custom".to_string(),
        }
    }
}

/// State vector of one walker over positions `-window_radius ..= window_radius`,
/// two coin components per position.
///
/// Layout is position-major, coin-minor: `amps[2 * (pos + r) + c]` with
/// `c = 0` for up and `c = 1` for down.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    window_radius: usize,
    amps: Vec<Amplitude>,
}

impl WalkerState {
    /// A state with every amplitude zero. Building block for kernels; not a
    /// valid physical state until filled.
    pub fn zero(window_radius: usize) -> WalkerState {
        WalkerState {
            window_radius,
            amps: vec![Amplitude::new(0.0, 0.0); 2 * (2 * window_radius + 1)],
        }
    }

    /// State localized at `position` with coin `coin`.
    pub fn localized(position: i32, coin: &Coin, window_radius: usize) -> Result<WalkerState> {
        coin.validate_input()?;
        if position.unsigned_abs() as usize > window_radius {
            return Err(Error::PositionOutsideWindow {
                position,
                window_radius,
            });
        }
        let mut state = WalkerState::zero(window_radius);
        let idx = state.index(position, 0);
        state.amps[idx] = coin.up;
        state.amps[idx + 1] = coin.down;
        Ok(state)
    }

    pub fn window_radius(&self) -> usize {
        self.window_radius
    }

    /// Number of lattice positions in the window, `2r + 1`.
    pub fn num_positions(&self) -> usize {
        2 * self.window_radius + 1
    }

    /// Positions covered by the window, `-r ..= r`.
    pub fn positions(&self) -> impl Iterator<Item = i32> {
        let r = self.window_radius as i32;
        -r..=r
    }

    #[inline]
    pub(crate) fn index(&self, position: i32, coin: usize) -> usize {
        debug_assert!(position.unsigned_abs() as usize <= self.window_radius);
        2 * ((position + self.window_radius as i32) as usize) + coin
    }

    /// Coin amplitudes (up, down) at a position.
    pub fn coin_at(&self, position: i32) -> Coin {
        let idx = self.index(position, 0);
        Coin {
            up: self.amps[idx],
            down: self.amps[idx + 1],
        }
    }

    pub(crate) fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Amplitude] {
        &mut self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &WalkerState) -> Result<Amplitude> {
        if self.window_radius != other.window_radius {
            return Err(Error::WindowMismatch {
                left: self.window_radius,
                right: other.window_radius,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Elementwise complex conjugate.
    pub fn conjugated(&self) -> WalkerState {
        WalkerState {
            window_radius: self.window_radius,
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Smallest and largest position carrying a nonzero amplitude, or `None`
    /// for the zero state. Zeros are exact: the step kernels only permute and
    /// linearly combine amplitudes, so untouched components stay 0.0.
    pub fn support_bounds(&self) -> Option<(i32, i32)> {
        let r = self.window_radius as i32;
        let mut lo = None;
        let mut hi = None;
        for pos in -r..=r {
            let c = self.coin_at(pos);
            if c.up != Amplitude::new(0.0, 0.0) || c.down != Amplitude::new(0.0, 0.0) {
                if lo.is_none() {
                    lo = Some(pos);
                }
                hi = Some(pos);
            }
        }
        lo.zip(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn localized_basis_state() {
        let s = WalkerState::localized(0, &Coin::UP, 15).unwrap();
        assert_eq!(s.coin_at(0).up, Amplitude::new(1.0, 0.0));
        assert_eq!(s.coin_at(0).down, Amplitude::new(0.0, 0.0));
        assert!((s.norm_sq() - 1.0).abs() < NORM_TOL_INTERNAL);
        assert_eq!(
            s.coin_at(3),
            Coin::new(Amplitude::new(0.0, 0.0), Amplitude::new(0.0, 0.0))
        );
    }

    #[test]
    fn localized_phi_plus_amplitudes() {
        let s = WalkerState::localized(0, &Coin::PHI_PLUS, 15).unwrap();
        let c = s.coin_at(0);
        assert!((c.up - Amplitude::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((c.down - Amplitude::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn localized_outside_window_rejected() {
        assert!(matches!(
            WalkerState::localized(16, &Coin::UP, 15),
            Err(Error::PositionOutsideWindow { .. })
        ));
    }

    #[test]
    fn unnormalized_coin_rejected() {
        let coin = Coin::new(Amplitude::new(1.0, 0.0), Amplitude::new(0.5, 0.0));
        assert!(matches!(
            WalkerState::localized(0, &coin, 4),
            Err(Error::UnnormalizedCoin { .. })
        ));
    }

    #[test]
    fn inner_product_orthogonal_basis() {
        let a = WalkerState::localized(0, &Coin::UP, 4).unwrap();
        let b = WalkerState::localized(0, &Coin::DOWN, 4).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), Amplitude::new(0.0, 0.0));
    }

    #[test]
    fn inner_product_phi_states_orthogonal() {
        let a = WalkerState::localized(0, &Coin::PHI_PLUS, 4).unwrap();
        let b = WalkerState::localized(0, &Coin::PHI_MINUS, 4).unwrap();
        assert!(a.inner_product(&b).unwrap().norm() < NORM_TOL_INTERNAL);
    }

    #[test]
    fn inner_product_self_is_norm() {
        let s = WalkerState::localized(2, &Coin::PHI_PLUS, 4).unwrap();
        let ip = s.inner_product(&s).unwrap();
        assert!((ip.re - 1.0).abs() < NORM_TOL_INTERNAL);
        assert!(ip.im.abs() < NORM_TOL_INTERNAL);
    }

    #[test]
    fn inner_product_window_mismatch() {
        let a = WalkerState::localized(0, &Coin::UP, 4).unwrap();
        let b = WalkerState::localized(0, &Coin::UP, 5).unwrap();
        assert!(matches!(
            a.inner_product(&b),
            Err(Error::WindowMismatch { .. })
        ));
    }

    #[test]
    fn conjugation_swaps_phi_states() {
        let plus = WalkerState::localized(0, &Coin::PHI_PLUS, 4).unwrap();
        let minus = WalkerState::localized(0, &Coin::PHI_MINUS, 4).unwrap();
        assert_eq!(plus.conjugated(), minus);
    }

    #[test]
    fn double_conjugation_is_identity() {
        let s = WalkerState::localized(1, &Coin::PHI_PLUS, 4).unwrap();
        assert_eq!(s.conjugated().conjugated(), s);
    }

    #[test]
    fn real_state_conjugation_fixed() {
        let s = WalkerState::localized(0, &Coin::UP, 4).unwrap();
        assert_eq!(s.conjugated(), s);
    }

    #[test]
    fn support_bounds_of_localized() {
        let s = WalkerState::localized(-2, &Coin::UP, 4).unwrap();
        assert_eq!(s.support_bounds(), Some((-2, -2)));
        assert_eq!(WalkerState::zero(4).support_bounds(), None);
    }
}
