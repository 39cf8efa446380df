//! Scalar observables of the walk output (average inter-walker distance,
//! meeting probability, both-at-origin probability, spreads) and their Monte
//! Carlo sweeps over the percolation parameter.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{self, PositionDistribution};
use crate::lattice::{LatticeSequence, Regime};
use crate::montecarlo;
use crate::state::Coin;
use crate::twowalker::{self, InputSpec, JointDistribution, TwoWalkerInput};

/// Scalar quantity measured on one joint output distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// Average distance |j - i| between the detected positions.
    #[serde(rename = "D")]
    Distance,
    /// Total probability of detecting both walkers at the same site.
    #[serde(rename = "M")]
    Meeting,
    /// Probability of detecting both walkers at the origin.
    #[serde(rename = "C")]
    Origin,
    /// Two-walker spread, the symmetrized second moment about the origin.
    #[serde(rename = "V")]
    Spread,
}

impl Quantity {
    pub fn label(&self) -> &'static str {
        match self {
            Quantity::Distance => "D",
            Quantity::Meeting => "M",
            Quantity::Origin => "C",
            Quantity::Spread => "V",
        }
    }
}

/// One per-realization observable value.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableSample {
    pub quantity: Quantity,
    pub value: f64,
    pub realization_index: u64,
    pub p: f64,
    pub regime: Regime,
    pub input: String,
}

/// Monte Carlo sweep of one observable over a percolation-parameter grid.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableCurve {
    pub quantity: Quantity,
    pub p_grid: Vec<f64>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub averages: usize,
    pub steps: usize,
    pub regime: Regime,
    pub input: String,
    pub master_seed: u64,
}

/// Mean inter-walker distance `sum |j - i| P2(i, j)`.
pub fn avg_distance(dist: &JointDistribution) -> f64 {
    let mut total = 0.0;
    for i in dist.positions() {
        for j in dist.positions() {
            total += (j - i).abs() as f64 * dist.prob(i, j);
        }
    }
    total
}

/// Probability of both walkers at the same site, `sum_j P2(j, j)`.
pub fn meeting_probability(dist: &JointDistribution) -> f64 {
    dist.positions().map(|j| dist.prob(j, j)).sum()
}

/// Probability of both walkers back at the origin, `P2(0, 0)`.
pub fn origin_probability(dist: &JointDistribution) -> f64 {
    dist.prob(0, 0)
}

/// Single-walker spread `sum (i - origin)^2 P1(i)`.
pub fn spread_single(dist: &PositionDistribution, origin: i32) -> f64 {
    dist.positions()
        .map(|i| {
            let d = (i - origin) as f64;
            d * d * dist.prob(i)
        })
        .sum()
}

/// Two-walker spread about the origin, `(1/2) sum (i^2 + j^2) P2(i, j)`.
///
/// The factor 1/2 puts it on the same scale as the single-walker spread.
pub fn spread_two(dist: &JointDistribution) -> f64 {
    let mut total = 0.0;
    for i in dist.positions() {
        for j in dist.positions() {
            total += ((i * i + j * j) as f64) * dist.prob(i, j);
        }
    }
    total / 2.0
}

/// Evaluates one quantity on a joint distribution.
pub fn quantity_value(quantity: Quantity, dist: &JointDistribution) -> f64 {
    match quantity {
        Quantity::Distance => avg_distance(dist),
        Quantity::Meeting => meeting_probability(dist),
        Quantity::Origin => origin_probability(dist),
        Quantity::Spread => spread_two(dist),
    }
}

/// Eigenvalues and eigenvectors of the effective single-walker coin operator
/// of a two-walker input.
#[derive(Debug, Clone)]
pub struct ReducedCoinDecomposition {
    /// Sorted descending; sum to 1.
    pub eigenvalues: [f64; 2],
    /// Orthonormal coin states matching `eigenvalues`.
    pub eigenvectors: [Coin; 2],
}

/// Extracts the coin of an origin-localized factor.
fn origin_coin(state: &crate::state::WalkerState) -> Result<Coin> {
    match state.support_bounds() {
        Some((0, 0)) => Ok(state.coin_at(0)),
        _ => Err(Error::NotLocalized),
    }
}

/// Coin operator whose marginal reproduces the exchange-symmetric position
/// marginal of the two-walker output: the partial trace over the second
/// walker for symmetrized inputs, the equal mixture of the two coins for the
/// classical separable input.
fn reduced_coin_operator(input: &TwoWalkerInput) -> Result<[[Complex64; 2]; 2]> {
    let c1 = origin_coin(input.psi1())?;
    let c2 = origin_coin(input.psi2())?;
    let proj = |a: &Coin, b: &Coin| -> [[Complex64; 2]; 2] {
        // |a><b| in the (up, down) basis.
        [
            [a.up * b.up.conj(), a.up * b.down.conj()],
            [a.down * b.up.conj(), a.down * b.down.conj()],
        ]
    };
    let p11 = proj(&c1, &c1);
    let p22 = proj(&c2, &c2);
    let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
    match input.kind() {
        twowalker::InputKind::Classical => {
            for r in 0..2 {
                for c in 0..2 {
                    rho[r][c] = (p11[r][c] + p22[r][c]) / 2.0;
                }
            }
        }
        twowalker::InputKind::Boson | twowalker::InputKind::Fermion => {
            let sign = if input.kind() == twowalker::InputKind::Boson {
                1.0
            } else {
                -1.0
            };
            let ov = c1.inner(&c2);
            let norm = input.sym_normalization_sq().expect("symmetrized input");
            let p12 = proj(&c1, &c2);
            let p21 = proj(&c2, &c1);
            for r in 0..2 {
                for c in 0..2 {
                    rho[r][c] =
                        (p11[r][c] + p22[r][c] + sign * (ov * p12[r][c] + ov.conj() * p21[r][c]))
                            / norm;
                }
            }
        }
    }
    Ok(rho)
}

/// Closed-form eigendecomposition of the 2x2 Hermitian reduced coin operator.
///
/// Fermion inputs always give eigenvalues (1/2, 1/2); so do boson and
/// classical inputs built from orthogonal coins. In the degenerate case any
/// orthonormal basis is an eigenbasis and the standard basis is returned;
/// downstream identities do not depend on the choice.
pub fn reduced_coin_decomposition(input: &TwoWalkerInput) -> Result<ReducedCoinDecomposition> {
    let rho = reduced_coin_operator(input)?;
    let a = rho[0][0].re;
    let d = rho[1][1].re;
    let b = rho[0][1];
    let half_trace = (a + d) / 2.0;
    let s = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    let lambda1 = half_trace + s;
    let lambda2 = half_trace - s;
    let eigenvectors = if s <= 1e-14 {
        [Coin::UP, Coin::DOWN]
    } else {
        // Candidate eigenvector columns for lambda1; pick the better
        // conditioned one.
        let v_a = (b, Complex64::new(lambda1 - a, 0.0));
        let v_b = (Complex64::new(lambda1 - d, 0.0), b.conj());
        let norm_a = (v_a.0.norm_sqr() + v_a.1.norm_sqr()).sqrt();
        let norm_b = (v_b.0.norm_sqr() + v_b.1.norm_sqr()).sqrt();
        let (up, down, norm) = if norm_a >= norm_b {
            (v_a.0, v_a.1, norm_a)
        } else {
            (v_b.0, v_b.1, norm_b)
        };
        let first = Coin::new(up / norm, down / norm);
        // Exact orthogonal complement; for a Hermitian 2x2 operator this is
        // the second eigenvector.
        let second = Coin::new(-first.down.conj(), first.up.conj());
        [first, second]
    };
    Ok(ReducedCoinDecomposition {
        eigenvalues: [lambda1, lambda2],
        eigenvectors,
    })
}

/// Both sides of the marginal-sum spread identity on one lattice sequence.
#[derive(Debug, Clone)]
pub struct SpreadIdentityReport {
    /// Two-walker spread from the joint distribution.
    pub joint_spread: f64,
    /// Eigenvalue-weighted mix of single-walker spreads of the reduced-coin
    /// eigenvectors, each evolved on the same sequence.
    pub eigen_mix: f64,
    pub eigenvalues: [f64; 2],
    pub abs_error: f64,
}

/// Verifies that the two-walker spread equals the eigenvalue-weighted sum of
/// single-walker spreads of the reduced-coin eigenvectors, on one sequence.
pub fn marginal_spread_identity_check(
    input: &TwoWalkerInput,
    seq: &LatticeSequence,
) -> Result<SpreadIdentityReport> {
    let joint = twowalker::joint_distribution(input, seq)?;
    let joint_spread = spread_two(&joint);
    let decomp = reduced_coin_decomposition(input)?;
    let mut eigen_mix = 0.0;
    for k in 0..2 {
        let state = crate::state::WalkerState::localized(
            0,
            &decomp.eigenvectors[k],
            input.window_radius(),
        )?;
        let evolved = evolution::evolve(&state, seq)?;
        eigen_mix +=
            decomp.eigenvalues[k] * spread_single(&evolution::position_distribution(&evolved), 0);
    }
    Ok(SpreadIdentityReport {
        joint_spread,
        eigen_mix,
        eigenvalues: decomp.eigenvalues,
        abs_error: (joint_spread - eigen_mix).abs(),
    })
}

fn validate_grid(p_grid: &[f64]) -> Result<()> {
    if p_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &p in p_grid {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidPercolationParameter { p });
        }
    }
    Ok(())
}

/// Default sweep grid: 41 equally spaced points covering [0, 1].
pub fn default_p_grid() -> Vec<f64> {
    (0..41).map(|k| k as f64 / 40.0).collect()
}

/// Per-realization observable records at one percolation parameter, in
/// realization order. The mean and standard error of their values reproduce
/// one point of [`sweep`].
pub fn samples(
    quantity: Quantity,
    input: &InputSpec,
    regime: Regime,
    p: f64,
    steps: usize,
    averages: usize,
    master_seed: u64,
) -> Result<Vec<ObservableSample>> {
    validate_grid(&[p])?;
    if averages == 0 {
        return Err(Error::TooFewRealizations {
            required: 1,
            got: 0,
        });
    }
    let built = input.build(steps)?;
    let label = input.label();
    Ok((0..averages as u64)
        .into_par_iter()
        .map(|index| {
            let seq = LatticeSequence::sample(regime, p, steps, master_seed, index)
                .expect("parameters validated");
            let (a, b) = built.evolve_factors(&seq).expect("window sized to steps");
            let joint = twowalker::joint_from_evolved(built.kind(), &a, &b, built.overlap())
                .expect("windows match");
            ObservableSample {
                quantity,
                value: quantity_value(quantity, &joint),
                realization_index: index,
                p,
                regime,
                input: label.clone(),
            }
        })
        .collect())
}

/// Sweeps several quantities of one input in a single pass over realizations.
///
/// Deterministic for a fixed `master_seed` and independent of the worker
/// count: per-realization samples are collected in realization order and
/// reduced sequentially.
pub fn sweep_multi(
    quantities: &[Quantity],
    input: &InputSpec,
    regime: Regime,
    p_grid: &[f64],
    steps: usize,
    averages: usize,
    master_seed: u64,
) -> Result<Vec<ObservableCurve>> {
    validate_grid(p_grid)?;
    if averages < 2 {
        return Err(Error::TooFewRealizations {
            required: 2,
            got: averages,
        });
    }
    let built = input.build(steps)?;
    let n_q = quantities.len();
    let mut means = vec![Vec::with_capacity(p_grid.len()); n_q];
    let mut stderrs = vec![Vec::with_capacity(p_grid.len()); n_q];
    for &p in p_grid {
        let samples: Vec<Vec<f64>> = (0..averages as u64)
            .into_par_iter()
            .map(|index| {
                let seq = LatticeSequence::sample(regime, p, steps, master_seed, index)
                    .expect("grid validated");
                let (a, b) = built.evolve_factors(&seq).expect("window sized to steps");
                let joint = twowalker::joint_from_evolved(built.kind(), &a, &b, built.overlap())
                    .expect("windows match");
                quantities
                    .iter()
                    .map(|&q| quantity_value(q, &joint))
                    .collect()
            })
            .collect();
        for (qi, _) in quantities.iter().enumerate() {
            let column: Vec<f64> = samples.iter().map(|row| row[qi]).collect();
            let (mean, stderr) = montecarlo::mean_and_stderr(&column);
            means[qi].push(mean);
            stderrs[qi].push(stderr);
        }
    }
    Ok(quantities
        .iter()
        .enumerate()
        .map(|(qi, &quantity)| ObservableCurve {
            quantity,
            p_grid: p_grid.to_vec(),
            means: std::mem::take(&mut means[qi]),
            stderrs: std::mem::take(&mut stderrs[qi]),
            averages,
            steps,
            regime,
            input: input.label(),
            master_seed,
        })
        .collect())
}

/// Sweeps one quantity over the grid; see [`sweep_multi`].
pub fn sweep(
    quantity: Quantity,
    input: &InputSpec,
    regime: Regime,
    p_grid: &[f64],
    steps: usize,
    averages: usize,
    master_seed: u64,
) -> Result<ObservableCurve> {
    Ok(sweep_multi(
        &[quantity],
        input,
        regime,
        p_grid,
        steps,
        averages,
        master_seed,
    )?
    .pop()
    .expect("one quantity in, one curve out"))
}
