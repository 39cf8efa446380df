//! Two non-interacting walkers on one shared lattice: boson/fermion
//! symmetrized and classically-indistinguishable inputs, exchange-symmetric
//! joint distributions, and the bunching decompositions.
//!
//! Two-walker states are never materialized as a dense tensor. The shared
//! step operator preserves the (at most two-term) sum of single-walker
//! products, so a joint distribution is assembled from the two evolved
//! factors:
//!
//! `P2(i,j) = [Pa(i) Pb(j) + Pb(i) Pa(j) ± 2 Re(m_i conj(m_j))] / norm`
//!
//! where `m_i` is the coin-traced overlap of the evolved factors at site `i`
//! and `norm = 2 (1 ± |<psi1|psi2>|^2)`. The classical case drops the
//! interference term and uses `norm = 2`. Off-diagonal physical probability
//! is `2 * P2(i,j)`; the stored matrix is normalized over the whole plane.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{self, PositionDistribution};
use crate::lattice::LatticeSequence;
use crate::state::{Amplitude, Coin, WalkerState, NORM_TOL_INPUT};

/// Exchange statistics of the two-walker input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Boson,
    Fermion,
    Classical,
}

/// The three canonical origin-localized inputs built from the symmetric
/// spreading coins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalInput {
    /// Boson pair; coin part equals (|up,up> + |down,down>)/sqrt2.
    PhiPlus,
    /// Fermion pair; coin part equals (|up,down> - |down,up>)/sqrt2.
    PsiMinus,
    /// Classically indistinguishable separable pair.
    PsiS,
}

impl CanonicalInput {
    pub fn label(&self) -> &'static str {
        match self {
            CanonicalInput::PhiPlus => "phi_plus",
            CanonicalInput::PsiMinus => "psi_minus",
            CanonicalInput::PsiS => "psi_s",
        }
    }

    pub fn kind(&self) -> InputKind {
        match self {
            CanonicalInput::PhiPlus => InputKind::Boson,
            CanonicalInput::PsiMinus => InputKind::Fermion,
            CanonicalInput::PsiS => InputKind::Classical,
        }
    }
}

/// Two-walker input held as its two single-walker factors.
#[derive(Debug, Clone)]
pub struct TwoWalkerInput {
    kind: InputKind,
    psi1: WalkerState,
    psi2: WalkerState,
    overlap: Amplitude,
}

impl TwoWalkerInput {
    /// Combines two normalized single-walker states. Fermionic symmetrization
    /// of proportional states is rejected: the normalization constant
    /// vanishes there.
    pub fn new(kind: InputKind, psi1: WalkerState, psi2: WalkerState) -> Result<TwoWalkerInput> {
        if psi1.window_radius() != psi2.window_radius() {
            return Err(Error::WindowMismatch {
                left: psi1.window_radius(),
                right: psi2.window_radius(),
            });
        }
        for psi in [&psi1, &psi2] {
            let norm_sq = psi.norm_sq();
            if (norm_sq - 1.0).abs() > NORM_TOL_INPUT {
                return Err(Error::UnnormalizedCoin { norm_sq });
            }
        }
        let overlap = psi1.inner_product(&psi2)?;
        if kind == InputKind::Fermion && 1.0 - overlap.norm_sqr() < 1e-12 {
            return Err(Error::DegenerateFermion);
        }
        Ok(TwoWalkerInput {
            kind,
            psi1,
            psi2,
            overlap,
        })
    }

    /// One of the canonical origin-localized inputs on a window of the given
    /// radius.
    pub fn canonical(name: CanonicalInput, window_radius: usize) -> TwoWalkerInput {
        let psi1 = WalkerState::localized(0, &Coin::PHI_PLUS, window_radius)
            .expect("origin fits any window");
        let psi2 = WalkerState::localized(0, &Coin::PHI_MINUS, window_radius)
            .expect("origin fits any window");
        TwoWalkerInput::new(name.kind(), psi1, psi2)
            .expect("canonical factors are orthogonal and normalized")
    }

    /// Origin-localized input from two coin states.
    pub fn from_coins(
        kind: InputKind,
        c1: &Coin,
        c2: &Coin,
        window_radius: usize,
    ) -> Result<TwoWalkerInput> {
        let psi1 = WalkerState::localized(0, c1, window_radius)?;
        let psi2 = WalkerState::localized(0, c2, window_radius)?;
        TwoWalkerInput::new(kind, psi1, psi2)
    }

    pub fn kind(&self) -> InputKind {
        self.kind
    }

    pub fn psi1(&self) -> &WalkerState {
        &self.psi1
    }

    pub fn psi2(&self) -> &WalkerState {
        &self.psi2
    }

    /// Cached `<psi1|psi2>`.
    pub fn overlap(&self) -> Amplitude {
        self.overlap
    }

    /// Squared symmetrization constant `2 (1 ± |<psi1|psi2>|^2)` for boson and
    /// fermion inputs; `None` for the classical separable case.
    pub fn sym_normalization_sq(&self) -> Option<f64> {
        let ov_sq = self.overlap.norm_sqr();
        match self.kind {
            InputKind::Boson => Some(2.0 * (1.0 + ov_sq)),
            InputKind::Fermion => Some(2.0 * (1.0 - ov_sq)),
            InputKind::Classical => None,
        }
    }

    /// Window radius shared by both factors.
    pub fn window_radius(&self) -> usize {
        self.psi1.window_radius()
    }

    /// Evolves both factors on the same lattice sequence, once each.
    pub fn evolve_factors(&self, seq: &LatticeSequence) -> Result<(WalkerState, WalkerState)> {
        let a = evolution::evolve(&self.psi1, seq)?;
        let b = evolution::evolve(&self.psi2, seq)?;
        Ok((a, b))
    }
}

/// Declarative description of a two-walker input, used by sweeps and the CLI.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    Canonical(CanonicalInput),
    Custom {
        kind: InputKind,
        coin1: (f64, f64, f64, f64),
        coin2: (f64, f64, f64, f64),
    },
}

impl InputSpec {
    pub fn build(&self, window_radius: usize) -> Result<TwoWalkerInput> {
        match self {
            InputSpec::Canonical(name) => Ok(TwoWalkerInput::canonical(*name, window_radius)),
            InputSpec::Custom { kind, coin1, coin2 } => {
                let c1 = Coin::new(
                    Complex64::new(coin1.0, coin1.1),
                    Complex64::new(coin1.2, coin1.3),
                );
                let c2 = Coin::new(
                    Complex64::new(coin2.0, coin2.1),
                    Complex64::new(coin2.2, coin2.3),
                );
                TwoWalkerInput::from_coins(*kind, &c1, &c2, window_radius)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InputSpec::Canonical(name) => name.label().to_string(),
            InputSpec::Custom { kind, .. } => match kind {
                InputKind::Boson => "custom_boson".to_string(),
                InputKind::Fermion => "custom_fermion".to_string(),
                InputKind::Classical => "custom_classical".to_string(),
            },
        }
    }
}

/// A real-valued grid over the `(i, j)` plane; entries may be negative
/// (difference and fluctuation grids).
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneGrid {
    window_radius: usize,
    values: Vec<f64>,
}

impl PlaneGrid {
    pub fn zeros(window_radius: usize) -> PlaneGrid {
        let side = 2 * window_radius + 1;
        PlaneGrid {
            window_radius,
            values: vec![0.0; side * side],
        }
    }

    pub fn from_values(window_radius: usize, values: Vec<f64>) -> PlaneGrid {
        let side = 2 * window_radius + 1;
        assert_eq!(values.len(), side * side);
        PlaneGrid {
            window_radius,
            values,
        }
    }

    pub fn window_radius(&self) -> usize {
        self.window_radius
    }

    pub fn side(&self) -> usize {
        2 * self.window_radius + 1
    }

    #[inline]
    fn idx(&self, i: i32, j: i32) -> usize {
        let r = self.window_radius as i32;
        debug_assert!(i.abs() <= r && j.abs() <= r);
        ((i + r) as usize) * self.side() + (j + r) as usize
    }

    pub fn get(&self, i: i32, j: i32) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn set(&mut self, i: i32, j: i32, value: f64) {
        let idx = self.idx(i, j);
        self.values[idx] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn positions(&self) -> impl Iterator<Item = i32> {
        let r = self.window_radius as i32;
        -r..=r
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Elementwise `self - other`.
    pub fn difference(&self, other: &PlaneGrid) -> PlaneGrid {
        assert_eq!(self.window_radius, other.window_radius);
        PlaneGrid {
            window_radius: self.window_radius,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &PlaneGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Exchange-symmetric joint probability over the `(i, j)` plane, normalized
/// to total mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    grid: PlaneGrid,
}

impl JointDistribution {
    /// Wraps a raw grid, clamping rounding residue in [-1e-14, 0) to zero.
    /// More negative entries panic.
    pub fn from_grid(mut grid: PlaneGrid) -> JointDistribution {
        for v in &mut grid.values {
            if *v < 0.0 {
                assert!(*v >= -1e-14, "joint probability {v} below clamp threshold");
                *v = 0.0;
            }
        }
        JointDistribution { grid }
    }

    pub fn window_radius(&self) -> usize {
        self.grid.window_radius
    }

    pub fn prob(&self, i: i32, j: i32) -> f64 {
        self.grid.get(i, j)
    }

    pub fn grid(&self) -> &PlaneGrid {
        &self.grid
    }

    pub fn positions(&self) -> impl Iterator<Item = i32> {
        self.grid.positions()
    }

    pub fn total(&self) -> f64 {
        self.grid.total()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.positions().map(|j| self.prob(j, j)).collect()
    }

    /// Marginal sum over the second index.
    pub fn marginal(&self) -> Vec<f64> {
        self.positions()
            .map(|i| self.positions().map(|j| self.prob(i, j)).sum())
            .collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in self.positions() {
            for j in self.positions() {
                worst = worst.max((self.prob(i, j) - self.prob(j, i)).abs());
            }
        }
        worst
    }
}

/// Site-wise coin-traced overlap `m_i = sum_c conj(b_{i,c}) a_{i,c}` of two
/// evolved factors.
fn site_overlaps(a: &WalkerState, b: &WalkerState) -> Vec<Amplitude> {
    a.amps()
        .chunks_exact(2)
        .zip(b.amps().chunks_exact(2))
        .map(|(pa, pb)| pb[0].conj() * pa[0] + pb[1].conj() * pa[1])
        .collect()
}

/// Joint distribution from already-evolved factors. `overlap` is the input
/// overlap `<psi1|psi2>`, which shared unitary evolution preserves.
pub fn joint_from_evolved(
    kind: InputKind,
    a: &WalkerState,
    b: &WalkerState,
    overlap: Amplitude,
) -> Result<JointDistribution> {
    if a.window_radius() != b.window_radius() {
        return Err(Error::WindowMismatch {
            left: a.window_radius(),
            right: b.window_radius(),
        });
    }
    let r = a.window_radius();
    let side = 2 * r + 1;
    let pa = evolution::position_distribution(a);
    let pb = evolution::position_distribution(b);
    let pa = pa.probs();
    let pb = pb.probs();
    let mut values = vec![0.0; side * side];
    match kind {
        InputKind::Classical => {
            for i in 0..side {
                for j in 0..side {
                    values[i * side + j] = (pa[i] * pb[j] + pb[i] * pa[j]) / 2.0;
                }
            }
        }
        InputKind::Boson | InputKind::Fermion => {
            let sign = if kind == InputKind::Boson { 1.0 } else { -1.0 };
            let norm = 2.0 * (1.0 + sign * overlap.norm_sqr());
            if norm < 1e-12 {
                return Err(Error::DegenerateFermion);
            }
            let m = site_overlaps(a, b);
            for i in 0..side {
                for j in 0..side {
                    // Re(m_i conj(m_j)) written symmetrically in i and j so the
                    // matrix is exchange-symmetric bit for bit.
                    let cross = m[i].re * m[j].re + m[i].im * m[j].im;
                    values[i * side + j] =
                        (pa[i] * pb[j] + pb[i] * pa[j] + sign * 2.0 * cross) / norm;
                }
            }
        }
    }
    Ok(JointDistribution::from_grid(PlaneGrid::from_values(
        r, values,
    )))
}

/// Evolves the input's factors on `seq` and measures the exchange-symmetric
/// joint distribution.
pub fn joint_distribution(
    input: &TwoWalkerInput,
    seq: &LatticeSequence,
) -> Result<JointDistribution> {
    let (a, b) = input.evolve_factors(seq)?;
    joint_from_evolved(input.kind(), &a, &b, input.overlap())
}

/// Per-site split of the same-site detection probability into its classical
/// part and the inter-particle interference part.
#[derive(Debug, Clone)]
pub struct DiagonalDecomposition {
    pub window_radius: usize,
    /// |<psi1|psi2>|^2 of the inputs.
    pub overlap_abs_sq: f64,
    /// Classical same-site probability `Pa(j) Pb(j)`, unscaled.
    pub classical: Vec<f64>,
    /// Interference term `|m_j|^2`, unscaled; nonnegative by construction.
    pub interference: Vec<f64>,
    /// Boson diagonal `(classical + interference) / (1 + |ov|^2)`.
    pub boson: Vec<f64>,
    /// Fermion diagonal `(classical - interference) / (1 - |ov|^2)`,
    /// `None` when the factors are proportional.
    pub fermion: Option<Vec<f64>>,
}

/// Decomposes the diagonal of the symmetrized joint distributions for the
/// factor pair `(psi1, psi2)` evolved on `seq`.
pub fn diagonal_decomposition(
    psi1: &WalkerState,
    psi2: &WalkerState,
    seq: &LatticeSequence,
) -> Result<DiagonalDecomposition> {
    let overlap = psi1.inner_product(psi2)?;
    let ov_sq = overlap.norm_sqr();
    let a = evolution::evolve(psi1, seq)?;
    let b = evolution::evolve(psi2, seq)?;
    let pa = evolution::position_distribution(&a);
    let pb = evolution::position_distribution(&b);
    let m = site_overlaps(&a, &b);
    let side = 2 * a.window_radius() + 1;
    let mut classical = Vec::with_capacity(side);
    let mut interference = Vec::with_capacity(side);
    let mut boson = Vec::with_capacity(side);
    let mut fermion = Vec::with_capacity(side);
    let degenerate = 1.0 - ov_sq < 1e-12;
    debug_assert_eq!(m.len(), side);
    for ((&site_a, &site_b), overlap_site) in pa.probs().iter().zip(pb.probs()).zip(&m) {
        let cl = site_a * site_b;
        let cross = overlap_site.norm_sqr();
        classical.push(cl);
        interference.push(cross);
        boson.push((cl + cross) / (1.0 + ov_sq));
        if !degenerate {
            fermion.push((cl - cross) / (1.0 - ov_sq));
        }
    }
    Ok(DiagonalDecomposition {
        window_radius: a.window_radius(),
        overlap_abs_sq: ov_sq,
        classical,
        interference,
        boson,
        fermion: if degenerate { None } else { Some(fermion) },
    })
}

/// Split of an ensemble-averaged classical joint distribution into the
/// product of mean marginals and the mean of residual cross-products.
#[derive(Debug, Clone)]
pub struct FluctuationDecomposition {
    pub window_radius: usize,
    /// Symmetrized product of the two mean single-walker distributions.
    pub product_term: PlaneGrid,
    /// Symmetrized mean of per-realization residual products; this is what
    /// statistical averaging alone adds to the diagonal.
    pub fluctuation_term: PlaneGrid,
    /// Directly averaged per-realization classical joints.
    pub direct_average: PlaneGrid,
    /// Largest |sum over realizations of a residual| across sites; zero up to
    /// rounding by construction.
    pub max_residual_sum: f64,
}

impl FluctuationDecomposition {
    /// Largest deviation of `product + fluctuation` from the direct average.
    pub fn reconstruction_error(&self) -> f64 {
        let side = self.product_term.side();
        let mut worst: f64 = 0.0;
        for idx in 0..side * side {
            let rebuilt = self.product_term.values()[idx] + self.fluctuation_term.values()[idx];
            worst = worst.max((rebuilt - self.direct_average.values()[idx]).abs());
        }
        worst
    }
}

/// Decomposes the average of per-realization classical joints built from the
/// paired single-walker distributions `samples1[a]`, `samples2[a]`.
pub fn fluctuation_identity(
    samples1: &[PositionDistribution],
    samples2: &[PositionDistribution],
) -> Result<FluctuationDecomposition> {
    let a_count = samples1.len();
    if a_count < 2 {
        return Err(Error::TooFewRealizations {
            required: 2,
            got: a_count,
        });
    }
    if samples2.len() != a_count {
        return Err(Error::TooFewRealizations {
            required: a_count,
            got: samples2.len(),
        });
    }
    let r = samples1[0].window_radius();
    let side = 2 * r + 1;
    for s in samples1.iter().chain(samples2.iter()) {
        if s.window_radius() != r {
            return Err(Error::WindowMismatch {
                left: s.window_radius(),
                right: r,
            });
        }
    }

    let mean_of = |samples: &[PositionDistribution]| -> Vec<f64> {
        let mut mean = vec![0.0; side];
        for s in samples {
            for (m, p) in mean.iter_mut().zip(s.probs()) {
                *m += p;
            }
        }
        for m in &mut mean {
            *m /= a_count as f64;
        }
        mean
    };
    let mean1 = mean_of(samples1);
    let mean2 = mean_of(samples2);

    let mut product = vec![0.0; side * side];
    for i in 0..side {
        for j in 0..side {
            product[i * side + j] = (mean1[i] * mean2[j] + mean1[j] * mean2[i]) / 2.0;
        }
    }

    let mut fluct = vec![0.0; side * side];
    let mut direct = vec![0.0; side * side];
    let mut residual_sum1 = vec![0.0; side];
    let mut residual_sum2 = vec![0.0; side];
    for (s1, s2) in samples1.iter().zip(samples2) {
        let p1 = s1.probs();
        let p2 = s2.probs();
        for i in 0..side {
            residual_sum1[i] += p1[i] - mean1[i];
            residual_sum2[i] += p2[i] - mean2[i];
            for j in 0..side {
                let d1i = p1[i] - mean1[i];
                let d2j = p2[j] - mean2[j];
                let d1j = p1[j] - mean1[j];
                let d2i = p2[i] - mean2[i];
                fluct[i * side + j] += (d1i * d2j + d1j * d2i) / 2.0;
                direct[i * side + j] += (p1[i] * p2[j] + p1[j] * p2[i]) / 2.0;
            }
        }
    }
    for v in fluct.iter_mut().chain(direct.iter_mut()) {
        *v /= a_count as f64;
    }
    let max_residual_sum = residual_sum1
        .iter()
        .chain(&residual_sum2)
        .map(|v| v.abs())
        .fold(0.0, f64::max);

    Ok(FluctuationDecomposition {
        window_radius: r,
        product_term: PlaneGrid::from_values(r, product),
        fluctuation_term: PlaneGrid::from_values(r, fluct),
        direct_average: PlaneGrid::from_values(r, direct),
        max_residual_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Regime;

    #[test]
    fn canonical_psi_minus_overlap_and_norm() {
        let input = TwoWalkerInput::canonical(CanonicalInput::PsiMinus, 4);
        assert!(input.overlap().norm() < 1e-12);
        let norm_sq = input.sym_normalization_sq().unwrap();
        assert!((norm_sq.sqrt() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fermion_of_identical_states_rejected() {
        let psi = WalkerState::localized(0, &Coin::PHI_PLUS, 3).unwrap();
        assert!(matches!(
            TwoWalkerInput::new(InputKind::Fermion, psi.clone(), psi),
            Err(Error::DegenerateFermion)
        ));
    }

    #[test]
    fn classical_joint_factorizes_for_conjugate_pair() {
        // The separable pair of conjugate coins gives P2(i,j) = P1(i) P1(j)
        // with a single shared marginal, for each individual realization.
        let seq = LatticeSequence::sample(Regime::Dynamical, 0.65, 10, 5, 1).unwrap();
        let input = TwoWalkerInput::canonical(CanonicalInput::PsiS, 10);
        let joint = joint_distribution(&input, &seq).unwrap();
        let (a, _) = input.evolve_factors(&seq).unwrap();
        let p1 = evolution::position_distribution(&a);
        for i in joint.positions() {
            for j in joint.positions() {
                assert!((joint.prob(i, j) - p1.prob(i) * p1.prob(j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn joint_total_mass_is_one() {
        let seq = LatticeSequence::sample(Regime::Statical, 0.5, 9, 17, 0).unwrap();
        for name in [
            CanonicalInput::PhiPlus,
            CanonicalInput::PsiMinus,
            CanonicalInput::PsiS,
        ] {
            let input = TwoWalkerInput::canonical(name, 9);
            let joint = joint_distribution(&input, &seq).unwrap();
            assert!(
                (joint.total() - 1.0).abs() <= 1e-12,
                "total {} for {:?}",
                joint.total(),
                name
            );
        }
    }

    #[test]
    fn joint_exactly_symmetric() {
        let seq = LatticeSequence::sample(Regime::Dynamical, 0.7, 8, 23, 2).unwrap();
        for name in [
            CanonicalInput::PhiPlus,
            CanonicalInput::PsiMinus,
            CanonicalInput::PsiS,
        ] {
            let input = TwoWalkerInput::canonical(name, 8);
            let joint = joint_distribution(&input, &seq).unwrap();
            assert_eq!(joint.max_asymmetry(), 0.0);
        }
    }

    #[test]
    fn diagonal_ordering_per_realization() {
        let seq = LatticeSequence::sample(Regime::Dynamical, 0.8, 9, 31, 5).unwrap();
        let boson =
            joint_distribution(&TwoWalkerInput::canonical(CanonicalInput::PhiPlus, 9), &seq)
                .unwrap();
        let fermion = joint_distribution(
            &TwoWalkerInput::canonical(CanonicalInput::PsiMinus, 9),
            &seq,
        )
        .unwrap();
        let classical =
            joint_distribution(&TwoWalkerInput::canonical(CanonicalInput::PsiS, 9), &seq).unwrap();
        for j in boson.positions() {
            assert!(fermion.prob(j, j) <= classical.prob(j, j) + 1e-12);
            assert!(classical.prob(j, j) <= boson.prob(j, j) + 1e-12);
        }
    }

    #[test]
    fn diagonal_decomposition_reconstructs_joints() {
        let seq = LatticeSequence::sample(Regime::Statical, 0.55, 8, 3, 7).unwrap();
        let input = TwoWalkerInput::canonical(CanonicalInput::PhiPlus, 8);
        let decomp = diagonal_decomposition(input.psi1(), input.psi2(), &seq).unwrap();
        let boson =
            joint_distribution(&TwoWalkerInput::canonical(CanonicalInput::PhiPlus, 8), &seq)
                .unwrap();
        let fermion = joint_distribution(
            &TwoWalkerInput::canonical(CanonicalInput::PsiMinus, 8),
            &seq,
        )
        .unwrap();
        let fermion_diag = decomp.fermion.as_ref().unwrap();
        for (idx, j) in boson.positions().enumerate() {
            assert!((decomp.boson[idx] - boson.prob(j, j)).abs() <= 1e-12);
            assert!((fermion_diag[idx] - fermion.prob(j, j)).abs() <= 1e-12);
            assert!(decomp.interference[idx] >= 0.0);
        }
    }

    #[test]
    fn diagonal_decomposition_degenerate_fermion() {
        let seq = LatticeSequence::perfect(4);
        let psi = WalkerState::localized(0, &Coin::PHI_PLUS, 4).unwrap();
        let decomp = diagonal_decomposition(&psi, &psi, &seq).unwrap();
        assert!(decomp.fermion.is_none());
        assert!((decomp.overlap_abs_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fluctuation_identity_reconstructs_exactly() {
        let input = TwoWalkerInput::canonical(CanonicalInput::PsiS, 8);
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for a in 0..40 {
            let seq = LatticeSequence::sample(Regime::Dynamical, 0.6, 8, 11, a).unwrap();
            let (ea, eb) = input.evolve_factors(&seq).unwrap();
            s1.push(evolution::position_distribution(&ea));
            s2.push(evolution::position_distribution(&eb));
        }
        let decomp = fluctuation_identity(&s1, &s2).unwrap();
        assert!(decomp.reconstruction_error() <= 1e-12);
        assert!(decomp.max_residual_sum <= 1e-12);
    }

    #[test]
    fn fluctuation_term_nonnegative_on_diagonal_for_conjugate_pair() {
        // psi2 = conj(psi1) gives identical per-realization distributions, so
        // each diagonal contribution is a square.
        let input = TwoWalkerInput::canonical(CanonicalInput::PsiS, 6);
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for a in 0..30 {
            let seq = LatticeSequence::sample(Regime::Dynamical, 0.5, 6, 77, a).unwrap();
            let (ea, eb) = input.evolve_factors(&seq).unwrap();
            s1.push(evolution::position_distribution(&ea));
            s2.push(evolution::position_distribution(&eb));
        }
        let decomp = fluctuation_identity(&s1, &s2).unwrap();
        for j in decomp.fluctuation_term.positions() {
            assert!(decomp.fluctuation_term.get(j, j) >= -1e-15);
        }
    }

    #[test]
    fn fluctuation_identity_zero_variance_on_perfect_lattice() {
        let input = TwoWalkerInput::canonical(CanonicalInput::PsiS, 5);
        let seq = LatticeSequence::perfect(5);
        let (a, b) = input.evolve_factors(&seq).unwrap();
        let s1 = vec![evolution::position_distribution(&a); 2];
        let s2 = vec![evolution::position_distribution(&b); 2];
        let decomp = fluctuation_identity(&s1, &s2).unwrap();
        for v in decomp.fluctuation_term.values() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn fluctuation_identity_needs_two_realizations() {
        let input = TwoWalkerInput::canonical(CanonicalInput::PsiS, 4);
        let seq = LatticeSequence::perfect(4);
        let (a, b) = input.evolve_factors(&seq).unwrap();
        let s1 = vec![evolution::position_distribution(&a)];
        let s2 = vec![evolution::position_distribution(&b)];
        assert!(matches!(
            fluctuation_identity(&s1, &s2),
            Err(Error::TooFewRealizations { .. })
        ));
    }
}
