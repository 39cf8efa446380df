//! Brute-force reference paths used to cross-check the optimized kernels:
//! an explicit dense step matrix for one walker and a full-tensor evolution
//! for two walkers.
//!
//! Nothing here shares code with the production kernels. The step matrix is
//! assembled from the shift rules directly, evolution is plain matrix-vector
//! arithmetic, and the two-walker state is carried as a dense
//! `dim x dim` tensor updated as `M psi M^T` per step.

use num_complex::Complex64;

use crate::error::Result;
use crate::lattice::{BondConfig, LatticeSequence};
use crate::state::WalkerState;
use crate::twowalker::{InputKind, JointDistribution, PlaneGrid, TwoWalkerInput};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> ComplexMatrix {
        ComplexMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(Complex64::new(0.0, 0.0), |acc, (m, v)| acc + m * v)
            })
            .collect()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Largest deviation of `M† M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let product = self.adjoint().matmul(self);
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((product.data[i * n + j] - expected).norm());
            }
        }
        worst
    }
}

/// Basis index of `(position, coin)` on a window of radius `r`:
/// position-major, coin-minor.
fn basis_index(r: i32, position: i32, coin: usize) -> usize {
    2 * ((position + r) as usize) + coin
}

/// The explicit one-step matrix `S(config) (1 ⊗ H)` on the config's window.
///
/// The shift part is written down as a permutation from the bond rules:
/// up at `i` goes to `(i+1, up)` if bond `(i, i+1)` is present, else to
/// `(i, down)`; down at `i` goes to `(i-1, down)` if bond `(i-1, i)` is
/// present, else to `(i, up)`. Bonds beyond the window do not exist.
pub fn dense_step_matrix(config: &BondConfig) -> ComplexMatrix {
    let r = config.window_radius() as i32;
    let dim = 2 * (2 * config.window_radius() + 1);
    let mut matrix = ComplexMatrix::zeros(dim);
    let h = [
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    ];
    for i in -r..=r {
        let target_up = if config.bond_present(i) {
            basis_index(r, i + 1, 0)
        } else {
            basis_index(r, i, 1)
        };
        let target_down = if config.bond_present(i - 1) {
            basis_index(r, i - 1, 1)
        } else {
            basis_index(r, i, 0)
        };
        for (coin_in, (h_up, h_down)) in h[0].iter().zip(&h[1]).enumerate() {
            let col = basis_index(r, i, coin_in);
            matrix.set(target_up, col, Complex64::new(*h_up, 0.0));
            matrix.set(target_down, col, Complex64::new(*h_down, 0.0));
        }
    }
    matrix
}

/// N-step evolution as a chain of dense matrix-vector products.
pub fn dense_evolve(state: &WalkerState, seq: &LatticeSequence) -> WalkerState {
    let mut amps: Vec<Complex64> = state.amps().to_vec();
    let mut cached: Option<ComplexMatrix> = None;
    for step in 0..seq.steps() {
        let config = seq.config_at(step);
        if cached.is_none() || seq.configs().len() > 1 {
            cached = Some(dense_step_matrix(config));
        }
        amps = cached.as_ref().unwrap().matvec(&amps);
    }
    let mut out = WalkerState::zero(state.window_radius());
    out.amps_mut().copy_from_slice(&amps);
    out
}

/// Largest amplitude difference between two states on the same window.
pub fn max_amplitude_diff(a: &WalkerState, b: &WalkerState) -> f64 {
    a.amps()
        .iter()
        .zip(b.amps())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Dense two-walker joint distribution: carries the full tensor state
/// `psi[(i,c),(j,d)]` and updates it with the dense step matrix on both
/// slots, then measures with the exchange-symmetrized position projectors.
pub fn tensor_joint_distribution(
    input: &TwoWalkerInput,
    seq: &LatticeSequence,
) -> Result<JointDistribution> {
    let r = input.window_radius();
    let dim = 2 * (2 * r + 1);
    let psi1 = input.psi1().amps();
    let psi2 = input.psi2().amps();

    // Initial tensor.
    let mut tensor = vec![Complex64::new(0.0, 0.0); dim * dim];
    match input.kind() {
        InputKind::Classical => {
            for row in 0..dim {
                for col in 0..dim {
                    tensor[row * dim + col] = psi1[row] * psi2[col];
                }
            }
        }
        InputKind::Boson | InputKind::Fermion => {
            let sign = if input.kind() == InputKind::Boson {
                1.0
            } else {
                -1.0
            };
            let norm = input
                .sym_normalization_sq()
                .expect("symmetrized input")
                .sqrt();
            for row in 0..dim {
                for col in 0..dim {
                    tensor[row * dim + col] =
                        (psi1[row] * psi2[col] + sign * psi2[row] * psi1[col]) / norm;
                }
            }
        }
    }

    // Step the tensor: psi <- M psi M^T, one matrix per step.
    for step in 0..seq.steps() {
        let m = dense_step_matrix(seq.config_at(step));
        let mut left = vec![Complex64::new(0.0, 0.0); dim * dim];
        for row in 0..dim {
            for k in 0..dim {
                let coeff = m.get(row, k);
                if coeff == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for col in 0..dim {
                    left[row * dim + col] += coeff * tensor[k * dim + col];
                }
            }
        }
        let mut next = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            for k in 0..dim {
                let coeff = m.get(col, k);
                if coeff == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for row in 0..dim {
                    next[row * dim + col] += left[row * dim + k] * coeff;
                }
            }
        }
        tensor = next;
    }

    // Measure positions with the symmetrized projectors.
    let side = 2 * r + 1;
    let mut raw = vec![0.0; side * side];
    for i in 0..side {
        for j in 0..side {
            let mut p = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    p += tensor[(2 * i + c) * dim + (2 * j + d)].norm_sqr();
                }
            }
            raw[i * side + j] = p;
        }
    }
    let mut values = vec![0.0; side * side];
    for i in 0..side {
        for j in 0..side {
            values[i * side + j] = (raw[i * side + j] + raw[j * side + i]) / 2.0;
        }
    }
    Ok(JointDistribution::from_grid(PlaneGrid::from_values(
        r, values,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution;
    use crate::lattice::Regime;
    use crate::state::Coin;
    use crate::twowalker::{self, CanonicalInput};

    #[test]
    fn perfect_step_matrix_structure() {
        // Two nonzeros of modulus 1/sqrt2 per column.
        let m = dense_step_matrix(&BondConfig::all_present(3));
        for col in 0..m.dim() {
            let mut nonzeros = 0;
            for row in 0..m.dim() {
                let v = m.get(row, col).norm();
                if v > 0.0 {
                    nonzeros += 1;
                    assert!((v - FRAC_1_SQRT_2).abs() < 1e-15);
                }
            }
            assert_eq!(nonzeros, 2, "column {col}");
        }
    }

    #[test]
    fn step_matrix_unitary_for_random_configs() {
        for a in 0..20 {
            let seq = LatticeSequence::sample(Regime::Statical, 0.5, 4, 13, a).unwrap();
            let m = dense_step_matrix(seq.config_at(0));
            assert!(m.unitarity_defect() <= 1e-12);
        }
    }

    #[test]
    fn dense_evolve_matches_kernel() {
        for a in 0..25 {
            let seq = LatticeSequence::sample(Regime::Dynamical, 0.6, 8, 5, a).unwrap();
            let state = WalkerState::localized(0, &Coin::PHI_PLUS, 8).unwrap();
            let fast = evolution::evolve(&state, &seq).unwrap();
            let slow = dense_evolve(&state, &seq);
            assert!(max_amplitude_diff(&fast, &slow) <= 1e-12);
        }
    }

    #[test]
    fn tensor_joint_matches_product_form() {
        for name in [
            CanonicalInput::PhiPlus,
            CanonicalInput::PsiMinus,
            CanonicalInput::PsiS,
        ] {
            for a in 0..5 {
                let seq = LatticeSequence::sample(Regime::Dynamical, 0.7, 6, 29, a).unwrap();
                let input = TwoWalkerInput::canonical(name, 6);
                let fast = twowalker::joint_distribution(&input, &seq).unwrap();
                let slow = tensor_joint_distribution(&input, &seq).unwrap();
                assert!(
                    fast.grid().max_abs_diff(slow.grid()) <= 1e-12,
                    "{name:?} realization {a}"
                );
            }
        }
    }
}
