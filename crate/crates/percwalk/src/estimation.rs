//! Estimation of the percolation parameter from event frequencies.
//!
//! An event probability curve is swept over a p grid (the per-realization
//! values are exact quantum probabilities given the lattice, so the only
//! Monte Carlo noise is over lattice realizations), fitted with a least
//! squares polynomial, differentiated analytically, and turned into the lower
//! bound on the number of experimental runs needed to reach a target
//! precision. Comparing the bound across input strategies yields per-strategy
//! optimality windows.

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution;
use crate::lattice::{LatticeSequence, Regime};
use crate::montecarlo;
use crate::observables;
use crate::state::{CoinSpec, WalkerState};
use crate::twowalker::{self, InputSpec};

/// Detection event whose frequency estimates p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Both walkers detected at the origin.
    BothAtOrigin,
    /// The single walker detected at the origin.
    SingleAtOrigin,
    /// Both walkers detected at the same site.
    BothSameSite,
}

/// The walkers used to produce the event.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventInput {
    Pair(InputSpec),
    Single(CoinSpec),
}

/// Fully specified estimation event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSpec {
    pub kind: EventKind,
    pub input: EventInput,
    pub steps: usize,
    pub regime: Regime,
}

impl EventSpec {
    /// Rejects kind/input mismatches and collects non-fatal warnings
    /// (an even step count ruins origin-based estimation: the perfect-lattice
    /// endpoint of the curve is no longer pinned to zero).
    pub fn validate(&self) -> Result<Vec<String>> {
        match (&self.kind, &self.input) {
            (EventKind::SingleAtOrigin, EventInput::Single(_)) => {}
            (EventKind::BothAtOrigin | EventKind::BothSameSite, EventInput::Pair(_)) => {}
            _ => return Err(Error::EventInputMismatch),
        }
        if self.steps == 0 {
            return Err(Error::ZeroSteps);
        }
        let mut warnings = Vec::new();
        let origin_based = matches!(
            self.kind,
            EventKind::BothAtOrigin | EventKind::SingleAtOrigin
        );
        if origin_based && self.steps.is_multiple_of(2) {
            warnings.push(format!(
                "origin-based estimation with an even step count ({}); use an odd one",
                self.steps
            ));
        }
        Ok(warnings)
    }

    pub fn label(&self) -> String {
        match &self.input {
            EventInput::Pair(spec) => spec.label(),
            EventInput::Single(coin) => coin.label(),
        }
    }

    /// Builds the walker states once; realizations only evolve them.
    fn prepare(&self) -> Result<PreparedEvent> {
        self.validate()?;
        match &self.input {
            EventInput::Single(coin) => Ok(PreparedEvent::Single(WalkerState::localized(
                0,
                &coin.coin(),
                self.steps,
            )?)),
            EventInput::Pair(spec) => Ok(PreparedEvent::Pair(self.kind, spec.build(self.steps)?)),
        }
    }

    /// Exact event probability conditioned on one lattice realization.
    pub fn probability(&self, seq: &LatticeSequence) -> Result<f64> {
        self.prepare()?.probability(seq)
    }
}

enum PreparedEvent {
    Single(WalkerState),
    Pair(EventKind, twowalker::TwoWalkerInput),
}

impl PreparedEvent {
    fn probability(&self, seq: &LatticeSequence) -> Result<f64> {
        match self {
            PreparedEvent::Single(state) => {
                let out = evolution::evolve(state, seq)?;
                Ok(evolution::position_distribution(&out).prob(0))
            }
            PreparedEvent::Pair(kind, input) => {
                let joint = twowalker::joint_distribution(input, seq)?;
                match kind {
                    EventKind::BothAtOrigin => Ok(observables::origin_probability(&joint)),
                    EventKind::BothSameSite => Ok(observables::meeting_probability(&joint)),
                    EventKind::SingleAtOrigin => Err(Error::EventInputMismatch),
                }
            }
        }
    }
}

/// Simulated event-probability curve with standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityCurve {
    pub label: String,
    pub p_grid: Vec<f64>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub averages: usize,
}

/// Sweeps the event probability over the grid: per grid point, the mean over
/// `averages` lattice realizations of the exact per-realization probability.
pub fn event_probability_sweep(
    event: &EventSpec,
    p_grid: &[f64],
    averages: usize,
    master_seed: u64,
) -> Result<ProbabilityCurve> {
    event.validate()?;
    if p_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &p in p_grid {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidPercolationParameter { p });
        }
    }
    if averages < 2 {
        return Err(Error::TooFewRealizations {
            required: 2,
            got: averages,
        });
    }
    let prepared = event.prepare()?;
    // Surface evolution errors before entering worker closures.
    prepared.probability(&LatticeSequence::sample(
        event.regime,
        p_grid[0],
        event.steps,
        master_seed,
        0,
    )?)?;

    let mut means = Vec::with_capacity(p_grid.len());
    let mut stderrs = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let samples: Vec<f64> = (0..averages as u64)
            .into_par_iter()
            .map(|index| {
                let seq = LatticeSequence::sample(event.regime, p, event.steps, master_seed, index)
                    .expect("grid validated");
                prepared.probability(&seq).expect("event validated")
            })
            .collect();
        let (mean, stderr) = montecarlo::mean_and_stderr(&samples);
        means.push(mean);
        stderrs.push(stderr);
    }
    Ok(ProbabilityCurve {
        label: event.label(),
        p_grid: p_grid.to_vec(),
        means,
        stderrs,
        averages,
    })
}

/// Least squares polynomial on a domain rescaled to [-1, 1] for conditioning.
#[derive(Debug, Clone, Serialize)]
pub struct Polynomial {
    /// Coefficients over the rescaled variable `t`, constant term first.
    coeffs: Vec<f64>,
    x_lo: f64,
    x_hi: f64,
}

impl Polynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x_lo, self.x_hi)
    }

    fn rescale(&self, x: f64) -> f64 {
        (2.0 * x - self.x_lo - self.x_hi) / (self.x_hi - self.x_lo)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = self.rescale(x);
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// d/dx, with the chain-rule factor of the domain rescaling.
    pub fn derivative(&self, x: f64) -> f64 {
        let t = self.rescale(x);
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * t + k as f64 * c;
        }
        acc * 2.0 / (self.x_hi - self.x_lo)
    }

    pub fn max_residual(&self, xs: &[f64], ys: &[f64]) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| (self.eval(x) - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Least squares fit of `ys` on `xs` by a polynomial of the given degree,
/// solved via the normal equations on the rescaled domain.
pub fn polynomial_fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Polynomial> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() <= degree {
        return Err(Error::UnderdeterminedFit {
            points: xs.len(),
            degree,
        });
    }
    let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(x_hi - x_lo).is_finite() || x_hi - x_lo <= 0.0 {
        return Err(Error::SingularFit);
    }
    let n = degree + 1;
    let ts: Vec<f64> = xs
        .iter()
        .map(|&x| (2.0 * x - x_lo - x_hi) / (x_hi - x_lo))
        .collect();

    // Normal equations G c = b with G[j][k] = sum t^(j+k), b[j] = sum t^j y.
    let mut moments = vec![0.0; 2 * degree + 1];
    let mut rhs = vec![0.0; n];
    for (&t, &y) in ts.iter().zip(ys) {
        let mut power = 1.0;
        for (j, m) in moments.iter_mut().enumerate() {
            *m += power;
            if j < n {
                rhs[j] += power * y;
            }
            power *= t;
        }
    }
    let mut matrix = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            matrix[j * n + k] = moments[j + k];
        }
    }
    let coeffs = solve_linear(&mut matrix, &mut rhs, n)?;
    Ok(Polynomial { coeffs, x_lo, x_hi })
}

/// Gaussian elimination with partial pivoting on an n x n system.
fn solve_linear(matrix: &mut [f64], rhs: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = matrix[col * n + col].abs();
        for row in col + 1..n {
            let candidate = matrix[row * n + col].abs();
            if candidate > best {
                best = candidate;
                pivot = row;
            }
        }
        if best < 1e-300 {
            return Err(Error::SingularFit);
        }
        if pivot != col {
            for k in 0..n {
                matrix.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = matrix[row * n + col] / matrix[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                matrix[row * n + k] -= factor * matrix[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut solution = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc -= matrix[col * n + k] * solution[k];
        }
        solution[col] = acc / matrix[col * n + col];
    }
    Ok(solution)
}

/// Variance of the n-run frequency estimator, `P_E (1 - P_E) / n`.
pub fn estimator_variance(p_e: f64, n: u64) -> f64 {
    assert!((0.0..=1.0).contains(&p_e), "P_E must lie in [0, 1]");
    assert!(n >= 1, "need at least one run");
    p_e * (1.0 - p_e) / n as f64
}

/// Event probabilities closer than this to 0 or 1, or curve slopes smaller
/// than this, mark the run-count bound as unreliable: the Gaussian error
/// propagation behind it no longer applies there.
pub const RELIABILITY_EDGE: f64 = 1e-3;

/// Lower bound on experimental runs, with a reliability flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NMinEstimate {
    /// `P_E (1 - P_E) / (eps^2 (dP_E/dp)^2)`; `f64::INFINITY` when the curve
    /// is flat but informative mass remains.
    pub value: f64,
    pub reliable: bool,
}

impl Serialize for NMinEstimate {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("NMinEstimate", 3)?;
        s.serialize_field("value", &self.value.is_finite().then_some(self.value))?;
        s.serialize_field("unbounded", &!self.value.is_finite())?;
        s.serialize_field("reliable", &self.reliable)?;
        s.end()
    }
}

/// Smallest number of runs that bounds the estimation error of p by
/// `epsilon`, via linear error propagation through the event-probability
/// curve.
pub fn n_min(p_e: f64, dp_dp: f64, epsilon: f64) -> NMinEstimate {
    assert!(epsilon > 0.0, "precision target must be positive");
    assert!((0.0..=1.0).contains(&p_e), "P_E must lie in [0, 1]");
    let numerator = p_e * (1.0 - p_e);
    let reliable = (RELIABILITY_EDGE..=1.0 - RELIABILITY_EDGE).contains(&p_e)
        && dp_dp.abs() >= RELIABILITY_EDGE;
    if numerator == 0.0 {
        return NMinEstimate {
            value: 0.0,
            reliable: false,
        };
    }
    if dp_dp == 0.0 {
        return NMinEstimate {
            value: f64::INFINITY,
            reliable: false,
        };
    }
    NMinEstimate {
        value: numerator / (epsilon * epsilon * dp_dp * dp_dp),
        reliable,
    }
}

/// Run-count bound analysis for one input strategy.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyReport {
    pub label: String,
    pub event: EventSpec,
    pub curve: ProbabilityCurve,
    pub fit: Polynomial,
    /// Largest |fit - simulated mean| over the grid.
    pub fit_max_residual: f64,
    /// Fitted-curve derivative at the grid points.
    pub derivative: Vec<f64>,
    /// Run-count bounds at the grid points; numerators use the simulated
    /// probabilities directly (the plug-in estimate), denominators the fitted
    /// derivative.
    pub n_min: Vec<NMinEstimate>,
}

/// Range of grid points on which one strategy needs the fewest runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityWindow {
    pub label: String,
    pub p_lo: f64,
    pub p_hi: f64,
    pub first_index: usize,
    pub last_index: usize,
}

/// Per grid point, the strategy with the smallest run-count bound; adjacent
/// points with the same winner merge into windows with endpoints at grid
/// resolution. Ties go to the earlier strategy in the input order.
pub fn optimality_windows(reports: &[StrategyReport], p_grid: &[f64]) -> Vec<OptimalityWindow> {
    let mut windows: Vec<OptimalityWindow> = Vec::new();
    for (idx, &p) in p_grid.iter().enumerate() {
        let mut winner = 0usize;
        let mut best = f64::INFINITY;
        for (s, report) in reports.iter().enumerate() {
            let value = report.n_min[idx].value;
            if value < best {
                best = value;
                winner = s;
            }
        }
        let label = reports[winner].label.clone();
        match windows.last_mut() {
            Some(last) if last.label == label && last.last_index + 1 == idx => {
                last.p_hi = p;
                last.last_index = idx;
            }
            _ => windows.push(OptimalityWindow {
                label,
                p_lo: p,
                p_hi: p,
                first_index: idx,
                last_index: idx,
            }),
        }
    }
    windows
}

/// Whole estimation pipeline over a set of strategies on a common grid.
#[derive(Debug, Clone)]
pub struct EstimationRequest {
    pub p_grid: Vec<f64>,
    pub averages: usize,
    pub master_seed: u64,
    pub epsilon: f64,
    pub fit_degree: usize,
    pub events: Vec<EventSpec>,
}

/// Full estimation output: per-strategy curves, fits, bounds, and windows.
#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub p_grid: Vec<f64>,
    pub averages: usize,
    pub master_seed: u64,
    pub epsilon: f64,
    pub fit_degree: usize,
    /// The numerator `P(1-P)` of each bound is the plug-in estimate from the
    /// simulated curve; it is biased at finite `averages` and consistent as
    /// `averages` grows.
    pub numerator_estimator: &'static str,
    pub warnings: Vec<String>,
    pub strategies: Vec<StrategyReport>,
    pub windows: Vec<OptimalityWindow>,
}

/// Runs sweeps, fits, and window extraction for every requested strategy.
pub fn run_estimation(request: &EstimationRequest) -> Result<EstimationReport> {
    if request.events.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut warnings = Vec::new();
    let mut strategies = Vec::with_capacity(request.events.len());
    for event in &request.events {
        for warning in event.validate()? {
            warnings.push(format!("{}: {warning}", event.label()));
        }
        let curve = event_probability_sweep(
            event,
            &request.p_grid,
            request.averages,
            request.master_seed,
        )?;
        let fit = polynomial_fit(&curve.p_grid, &curve.means, request.fit_degree)?;
        let fit_max_residual = fit.max_residual(&curve.p_grid, &curve.means);
        let derivative: Vec<f64> = curve.p_grid.iter().map(|&p| fit.derivative(p)).collect();
        let n_min_values: Vec<NMinEstimate> = curve
            .means
            .iter()
            .zip(&derivative)
            .map(|(&pe, &slope)| n_min(pe.clamp(0.0, 1.0), slope, request.epsilon))
            .collect();
        strategies.push(StrategyReport {
            label: event.label(),
            event: event.clone(),
            curve,
            fit,
            fit_max_residual,
            derivative,
            n_min: n_min_values,
        });
    }
    let windows = optimality_windows(&strategies, &request.p_grid);
    Ok(EstimationReport {
        p_grid: request.p_grid.clone(),
        averages: request.averages,
        master_seed: request.master_seed,
        epsilon: request.epsilon,
        fit_degree: request.fit_degree,
        numerator_estimator: "plug_in_simulated_event_probability",
        warnings,
        strategies,
        windows,
    })
}

/// The four strategies compared throughout: boson, fermion, and classical
/// pairs observed at the origin, and the single symmetric-coin walker.
pub fn standard_strategies(steps: usize, regime: Regime) -> Vec<EventSpec> {
    use crate::twowalker::CanonicalInput;
    vec![
        EventSpec {
            kind: EventKind::BothAtOrigin,
            input: EventInput::Pair(InputSpec::Canonical(CanonicalInput::PhiPlus)),
            steps,
            regime,
        },
        EventSpec {
            kind: EventKind::BothAtOrigin,
            input: EventInput::Pair(InputSpec::Canonical(CanonicalInput::PsiMinus)),
            steps,
            regime,
        },
        EventSpec {
            kind: EventKind::BothAtOrigin,
            input: EventInput::Pair(InputSpec::Canonical(CanonicalInput::PsiS)),
            steps,
            regime,
        },
        EventSpec {
            kind: EventKind::SingleAtOrigin,
            input: EventInput::Single(CoinSpec::PhiPlus),
            steps,
            regime,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twowalker::CanonicalInput;

    #[test]
    fn estimator_variance_values() {
        assert_eq!(estimator_variance(0.5, 100), 0.0025);
        assert_eq!(estimator_variance(0.0, 50), 0.0);
        assert!((estimator_variance(0.9, 1000) - 9e-5).abs() < 1e-18);
    }

    #[test]
    fn n_min_values() {
        let v = n_min(0.5, 1.0, 0.01);
        assert_eq!(v.value, 2500.0);
        assert!(v.reliable);
        let zero = n_min(0.0, 0.3, 0.01);
        assert_eq!(zero.value, 0.0);
        assert!(!zero.reliable);
        let flat = n_min(0.5, 0.0, 0.01);
        assert!(flat.value.is_infinite());
        assert!(!flat.reliable);
    }

    #[test]
    fn n_min_epsilon_scaling() {
        let full = n_min(0.4, 0.8, 0.01).value;
        let half = n_min(0.4, 0.8, 0.005).value;
        assert!((half / full - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_exact_quadratic() {
        let xs: Vec<f64> = (0..12).map(|k| k as f64 / 11.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
        let poly = polynomial_fit(&xs, &ys, 2).unwrap();
        assert!(poly.max_residual(&xs, &ys) <= 1e-10);
        // Derivative of the parabola at x: -3 + x.
        for &x in &xs {
            assert!((poly.derivative(x) - (-3.0 + x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn fit_constant_data() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let ys = vec![0.7; 10];
        let poly = polynomial_fit(&xs, &ys, 5).unwrap();
        assert!(poly.max_residual(&xs, &ys) <= 1e-10);
        assert!(poly.derivative(4.5).abs() <= 1e-9);
    }

    #[test]
    fn fit_underdetermined_rejected() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 2.0, 3.0];
        assert!(matches!(
            polynomial_fit(&xs, &ys, 3),
            Err(Error::UnderdeterminedFit { .. })
        ));
    }

    #[test]
    fn event_sweep_trapped_walkers() {
        let event = EventSpec {
            kind: EventKind::BothAtOrigin,
            input: EventInput::Pair(InputSpec::Canonical(CanonicalInput::PhiPlus)),
            steps: 5,
            regime: Regime::Statical,
        };
        let curve = event_probability_sweep(&event, &[0.0], 16, 3).unwrap();
        assert!((curve.means[0] - 1.0).abs() <= 1e-12);
        assert_eq!(curve.stderrs[0], 0.0);
    }

    #[test]
    fn event_sweep_perfect_lattice_odd_steps_zero() {
        for event in standard_strategies(7, Regime::Statical) {
            let curve = event_probability_sweep(&event, &[1.0], 8, 3).unwrap();
            assert!(
                curve.means[0].abs() <= 1e-14,
                "{}: {}",
                event.label(),
                curve.means[0]
            );
        }
    }

    #[test]
    fn event_kind_mismatch_rejected() {
        let event = EventSpec {
            kind: EventKind::SingleAtOrigin,
            input: EventInput::Pair(InputSpec::Canonical(CanonicalInput::PsiS)),
            steps: 5,
            regime: Regime::Statical,
        };
        assert!(matches!(event.validate(), Err(Error::EventInputMismatch)));
    }

    #[test]
    fn even_steps_warns_for_origin_events() {
        let event = EventSpec {
            kind: EventKind::BothAtOrigin,
            input: EventInput::Pair(InputSpec::Canonical(CanonicalInput::PsiS)),
            steps: 6,
            regime: Regime::Statical,
        };
        let warnings = event.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        let meeting = EventSpec {
            kind: EventKind::BothSameSite,
            input: EventInput::Pair(InputSpec::Canonical(CanonicalInput::PsiS)),
            steps: 6,
            regime: Regime::Statical,
        };
        assert!(meeting.validate().unwrap().is_empty());
    }

    #[test]
    fn windows_partition_the_grid() {
        let grid: Vec<f64> = (0..21).map(|k| k as f64 / 20.0).collect();
        let request = EstimationRequest {
            p_grid: grid.clone(),
            averages: 200,
            master_seed: 5,
            epsilon: 0.01,
            fit_degree: 5,
            events: standard_strategies(5, Regime::Statical),
        };
        let report = run_estimation(&request).unwrap();
        assert_eq!(report.windows.first().unwrap().first_index, 0);
        assert_eq!(report.windows.last().unwrap().last_index, grid.len() - 1);
        let covered: usize = report
            .windows
            .iter()
            .map(|w| w.last_index - w.first_index + 1)
            .sum();
        assert_eq!(covered, grid.len());
    }
}
