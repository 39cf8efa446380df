//! Slower statistical checks: the ballistic-to-diffusive crossover around
//! half the mean segment length, stability of estimation windows under a
//! larger ensemble, and the averaged-spread equalities.

use percwalk::estimation::{self, EstimationRequest};
use percwalk::evolution;
use percwalk::lattice::{LatticeSequence, Regime};
use percwalk::montecarlo::{self, EnsembleSpec};
use percwalk::observables::{self, Quantity};
use percwalk::state::{Coin, WalkerState};
use percwalk::twowalker::{CanonicalInput, InputSpec};

fn mean_sigma(p: f64, steps: usize, averages: u64, seed: u64) -> f64 {
    let state = WalkerState::localized(0, &Coin::PHI_PLUS, steps).unwrap();
    let mut total = 0.0;
    for a in 0..averages {
        let seq = LatticeSequence::sample(Regime::Dynamical, p, steps, seed, a).unwrap();
        let out = evolution::evolve(&state, &seq).unwrap();
        total += observables::spread_single(&evolution::position_distribution(&out), 0);
    }
    (total / averages as f64).sqrt()
}

fn perfect_sigma(steps: usize) -> f64 {
    let state = WalkerState::localized(0, &Coin::PHI_PLUS, steps).unwrap();
    let out = evolution::evolve(&state, &LatticeSequence::perfect(steps)).unwrap();
    observables::spread_single(&evolution::position_distribution(&out), 0).sqrt()
}

/// At p = 0.96 the mean segment length is 24, so percolation becomes relevant
/// after roughly 12 steps: an 8-step walk still spreads almost ballistically
/// while a 64-step walk falls clearly behind the coherent one.
#[test]
fn crossover_engages_after_half_segment_length() {
    let early = mean_sigma(0.96, 8, 300, 123) / perfect_sigma(8);
    let late = mean_sigma(0.96, 64, 300, 123) / perfect_sigma(64);
    assert!(
        early >= 0.85,
        "8-step spread ratio {early:.3} already suppressed before the crossover"
    );
    assert!(
        late <= 0.75,
        "64-step spread ratio {late:.3} not yet diffusive after the crossover"
    );
}

/// Ensemble-averaged two-walker spreads agree across the three canonical
/// inputs: the per-realization equality survives the average untouched.
#[test]
fn averaged_spreads_agree_across_inputs() {
    let grid = [0.3, 0.6, 0.9];
    let mut curves = Vec::new();
    for name in [
        CanonicalInput::PhiPlus,
        CanonicalInput::PsiMinus,
        CanonicalInput::PsiS,
    ] {
        curves.push(
            observables::sweep(
                Quantity::Spread,
                &InputSpec::Canonical(name),
                Regime::Statical,
                &grid,
                10,
                300,
                77,
            )
            .unwrap(),
        );
    }
    for (k, &p) in grid.iter().enumerate() {
        for other in &curves[1..] {
            assert!(
                (curves[0].means[k] - other.means[k]).abs() <= 1e-10,
                "averaged spreads differ at p = {}: {} vs {}",
                p,
                curves[0].means[k],
                other.means[k]
            );
        }
    }
}

/// Statical percolation confines each run to a short segment around the
/// origin, concentrating the averaged joint near the diagonal; dynamical
/// percolation diffuses it over the plane.
#[test]
fn statical_concentrates_near_diagonal() {
    let band_mass = |regime: Regime| {
        let averaged = montecarlo::run_ensemble(&EnsembleSpec {
            averages: 800,
            steps: 15,
            regime,
            p: 0.9,
            input: InputSpec::Canonical(CanonicalInput::PsiS),
            master_seed: 5,
            retain_marginals: false,
        })
        .unwrap();
        let mut band = 0.0;
        for i in averaged.mean.positions() {
            for j in averaged.mean.positions() {
                if (i - j).abs() <= 2 {
                    band += averaged.mean.prob(i, j);
                }
            }
        }
        band
    };
    let statical = band_mass(Regime::Statical);
    let dynamical = band_mass(Regime::Dynamical);
    assert!(
        statical > dynamical,
        "near-diagonal mass: statical {statical:.4} <= dynamical {dynamical:.4}"
    );
}

/// A degree-5 fit of the simulated statical origin-probability curve tracks
/// the data to within its Monte Carlo noise.
#[test]
fn fit_residual_within_curve_noise() {
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.025).collect();
    let report = estimation::run_estimation(&EstimationRequest {
        p_grid: grid,
        averages: 5000,
        master_seed: 99,
        epsilon: 0.01,
        fit_degree: 5,
        events: vec![estimation::standard_strategies(7, Regime::Statical)[2].clone()],
    })
    .unwrap();
    let strategy = &report.strategies[0];
    let mut stderrs = strategy.curve.stderrs.clone();
    stderrs.sort_by(f64::total_cmp);
    let median = stderrs[stderrs.len() / 2];
    assert!(
        strategy.fit_max_residual <= 3.0 * median,
        "fit residual {} above 3x median stderr {median}",
        strategy.fit_max_residual
    );
}

/// Doubling the ensemble size moves optimality-window endpoints by at most
/// one grid step once the curves have converged.
#[test]
fn estimation_windows_stable_under_doubling() {
    let grid: Vec<f64> = (0..21).map(|k| k as f64 / 20.0).collect();
    let run = |averages: usize| {
        estimation::run_estimation(&EstimationRequest {
            p_grid: grid.clone(),
            averages,
            master_seed: 55,
            epsilon: 0.01,
            fit_degree: 5,
            events: estimation::standard_strategies(5, Regime::Statical),
        })
        .unwrap()
    };
    let coarse = run(2500);
    let fine = run(5000);
    let boson_window = |report: &estimation::EstimationReport| {
        report
            .windows
            .iter()
            .filter(|w| w.label == "phi_plus")
            .max_by_key(|w| w.last_index - w.first_index)
            .map(|w| (w.first_index, w.last_index))
            .expect("boson window present")
    };
    let (lo_a, hi_a) = boson_window(&coarse);
    let (lo_b, hi_b) = boson_window(&fine);
    assert!(
        lo_a.abs_diff(lo_b) <= 1 && hi_a.abs_diff(hi_b) <= 1,
        "window moved more than one grid step: ({lo_a}, {hi_a}) vs ({lo_b}, {hi_b})"
    );
}
