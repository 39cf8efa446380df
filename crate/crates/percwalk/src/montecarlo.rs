//! Ensemble orchestration: seed derivation, parallel execution over
//! realizations, and deterministic reduction.
//!
//! Realizations are keyed by index and all randomness comes from the lattice
//! module's counter-based derivation, so this layer never draws random
//! numbers. Reduction is chunked with a fixed fan-in: realization indices are
//! grouped into constant-size blocks, each block folds sequentially in index
//! order, and block partials are combined in block order. The grouping
//! depends only on the realization count, never on scheduling, so results are
//! bit-identical for any number of workers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{self, PositionDistribution};
use crate::lattice::{LatticeSequence, Regime};
use crate::state::Coin;
use crate::twowalker::{self, InputSpec, JointDistribution, PlaneGrid};

/// Fixed reduction block size; an implementation constant.
const REDUCTION_BLOCK: usize = 32;

/// Sums `count` equal-length vectors produced by `eval`, deterministically.
pub(crate) fn deterministic_vector_sum<F>(count: usize, len: usize, eval: F) -> Vec<f64>
where
    F: Fn(u64) -> Vec<f64> + Sync,
{
    let blocks = count.div_ceil(REDUCTION_BLOCK);
    let partials: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * REDUCTION_BLOCK;
            let hi = (lo + REDUCTION_BLOCK).min(count);
            let mut acc = vec![0.0; len];
            for index in lo..hi {
                let values = eval(index as u64);
                debug_assert_eq!(values.len(), len);
                for (a, v) in acc.iter_mut().zip(&values) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; len];
    for partial in partials {
        for (t, v) in total.iter_mut().zip(&partial) {
            *t += v;
        }
    }
    total
}

/// Sample mean and standard error of the mean,
/// `sigma = sqrt(sum (q - mean)^2 / (A - 1)) / sqrt(A)`.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let a = samples.len();
    assert!(a >= 2, "standard error needs at least two samples");
    if samples.iter().all(|&q| q == samples[0]) {
        // Identical samples have zero variance; skip the accumulation, whose
        // rounding would otherwise report a spurious ~1e-16 spread.
        return (samples[0], 0.0);
    }
    let mean = samples.iter().sum::<f64>() / a as f64;
    let sum_sq: f64 = samples.iter().map(|q| (q - mean) * (q - mean)).sum();
    let stderr = (sum_sq / (a - 1) as f64).sqrt() / (a as f64).sqrt();
    (mean, stderr)
}

/// Defines an ensemble of two-walker realizations.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub averages: usize,
    pub steps: usize,
    pub regime: Regime,
    pub p: f64,
    pub input: InputSpec,
    pub master_seed: u64,
    /// Keep per-realization single-walker marginals for fluctuation analysis
    /// (O(A * N) extra memory instead of O(A * N^2)).
    pub retain_marginals: bool,
}

/// Ensemble-averaged joint distribution.
#[derive(Debug, Clone)]
pub struct AveragedJoint {
    pub mean: JointDistribution,
    pub averages: usize,
    pub marginals: Option<Vec<(PositionDistribution, PositionDistribution)>>,
}

/// Runs the ensemble: the arithmetic mean of per-realization joint
/// distributions, all realizations on independently sampled lattices of the
/// spec's regime.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<AveragedJoint> {
    if spec.averages == 0 {
        return Err(Error::TooFewRealizations {
            required: 1,
            got: 0,
        });
    }
    let input = spec.input.build(spec.steps)?;
    // Validate parameters once up front so worker closures cannot fail.
    LatticeSequence::sample(spec.regime, spec.p, spec.steps, spec.master_seed, 0)?;

    let side = 2 * spec.steps + 1;
    let realize = |index: u64| -> Vec<f64> {
        let seq = LatticeSequence::sample(spec.regime, spec.p, spec.steps, spec.master_seed, index)
            .expect("parameters validated above");
        let (a, b) = input.evolve_factors(&seq).expect("window sized to steps");
        let joint = twowalker::joint_from_evolved(input.kind(), &a, &b, input.overlap())
            .expect("windows match");
        joint.grid().values().to_vec()
    };
    let mut sum = deterministic_vector_sum(spec.averages, side * side, realize);
    for v in &mut sum {
        *v /= spec.averages as f64;
    }
    let mean = JointDistribution::from_grid(PlaneGrid::from_values(spec.steps, sum));

    let marginals = if spec.retain_marginals {
        let pairs: Vec<(PositionDistribution, PositionDistribution)> = (0..spec.averages as u64)
            .into_par_iter()
            .map(|index| {
                let seq = LatticeSequence::sample(
                    spec.regime,
                    spec.p,
                    spec.steps,
                    spec.master_seed,
                    index,
                )
                .expect("parameters validated above");
                let (a, b) = input.evolve_factors(&seq).expect("window sized to steps");
                (
                    evolution::position_distribution(&a),
                    evolution::position_distribution(&b),
                )
            })
            .collect();
        Some(pairs)
    } else {
        None
    };

    Ok(AveragedJoint {
        mean,
        averages: spec.averages,
        marginals,
    })
}

/// Ensemble-averaged single-walker distribution for an origin-localized coin.
pub fn run_single_ensemble(
    coin: &Coin,
    steps: usize,
    regime: Regime,
    p: f64,
    averages: usize,
    master_seed: u64,
) -> Result<PositionDistribution> {
    if averages == 0 {
        return Err(Error::TooFewRealizations {
            required: 1,
            got: 0,
        });
    }
    let state = crate::state::WalkerState::localized(0, coin, steps)?;
    LatticeSequence::sample(regime, p, steps, master_seed, 0)?;
    let side = 2 * steps + 1;
    let mut sum = deterministic_vector_sum(averages, side, |index| {
        let seq = LatticeSequence::sample(regime, p, steps, master_seed, index)
            .expect("parameters validated above");
        let out = evolution::evolve(&state, &seq).expect("window sized to steps");
        evolution::position_distribution(&out).probs().to_vec()
    });
    for v in &mut sum {
        *v /= averages as f64;
    }
    Ok(PositionDistribution::from_probs(steps, sum))
}
