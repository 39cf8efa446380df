//! One quantum-walk step (coin toss, then percolation-aware shift) and
//! N-step evolution.
//!
//! The shift is a pure index permutation, never a matrix product. Per
//! position `i` it routes amplitudes by bond presence:
//!
//! * up at `i`:   bond `(i, i+1)` present → `(i+1, up)`, else stays `(i, down)`
//! * down at `i`: bond `(i-1, i)` present → `(i-1, down)`, else stays `(i, up)`
//!
//! With both neighbouring bonds missing the two components swap in place, so
//! the walker is trapped. Every amplitude lands in exactly one slot and the
//! step is a permutation of the coin-tossed state: the norm is preserved
//! exactly, not just to rounding.

use crate::error::{Error, Result};
use crate::lattice::{BondConfig, LatticeSequence};
use crate::state::{Amplitude, WalkerState};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Probabilities over the positions of one walker's window.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistribution {
    window_radius: usize,
    probs: Vec<f64>,
}

impl PositionDistribution {
    /// Wraps a raw probability array indexed by `pos + r`. Rounding residue
    /// down to -1e-14 is clamped to zero; anything more negative is a bug in
    /// the caller and panics.
    pub fn from_probs(window_radius: usize, mut probs: Vec<f64>) -> PositionDistribution {
        assert_eq!(probs.len(), 2 * window_radius + 1);
        for p in &mut probs {
            if *p < 0.0 {
                assert!(*p >= -1e-14, "probability {p} below clamp threshold");
                *p = 0.0;
            }
        }
        PositionDistribution {
            window_radius,
            probs,
        }
    }

    pub fn window_radius(&self) -> usize {
        self.window_radius
    }

    pub fn prob(&self, position: i32) -> f64 {
        self.probs[(position + self.window_radius as i32) as usize]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn positions(&self) -> impl Iterator<Item = i32> {
        let r = self.window_radius as i32;
        -r..=r
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Applies the balanced coin toss at every position:
/// `(up, down) -> ((up+down)/sqrt2, (up-down)/sqrt2)`.
pub fn apply_coin(state: &WalkerState) -> WalkerState {
    let mut out = state.clone();
    apply_coin_in_place(&mut out);
    out
}

pub(crate) fn apply_coin_in_place(state: &mut WalkerState) {
    for pair in state.amps_mut().chunks_exact_mut(2) {
        let up = pair[0];
        let down = pair[1];
        pair[0] = (up + down) * FRAC_1_SQRT_2;
        pair[1] = (up - down) * FRAC_1_SQRT_2;
    }
}

/// Applies the percolation-aware shift for one bond configuration.
///
/// The state support must sit strictly inside both the state window and the
/// config window, so that every bond whose presence matters has an index in
/// range.
pub fn apply_shift(state: &WalkerState, config: &BondConfig) -> Result<WalkerState> {
    let mut out = WalkerState::zero(state.window_radius());
    apply_shift_into(state, config, &mut out)?;
    Ok(out)
}

pub(crate) fn apply_shift_into(
    state: &WalkerState,
    config: &BondConfig,
    out: &mut WalkerState,
) -> Result<()> {
    debug_assert_eq!(out.window_radius(), state.window_radius());
    let rs = state.window_radius() as i32;
    if let Some((lo, hi)) = state.support_bounds() {
        let rc = config.window_radius() as i32;
        if lo <= -rs || hi >= rs || lo <= -rc || hi >= rc {
            return Err(Error::SupportAtEdge);
        }
    }
    let zero = Amplitude::new(0.0, 0.0);
    for a in out.amps_mut() {
        *a = zero;
    }
    for i in -rs..=rs {
        let idx = state.index(i, 0);
        let up = state.amps()[idx];
        let down = state.amps()[idx + 1];
        if up != zero {
            if config.bond_present(i) {
                let t = out.index(i + 1, 0);
                out.amps_mut()[t] = up;
            } else {
                let t = out.index(i, 1);
                out.amps_mut()[t] = up;
            }
        }
        if down != zero {
            if config.bond_present(i - 1) {
                let t = out.index(i - 1, 1);
                out.amps_mut()[t] = down;
            } else {
                let t = out.index(i, 0);
                out.amps_mut()[t] = down;
            }
        }
    }
    Ok(())
}

/// Applies `seq.steps()` walk steps, coin then shift, using the bond
/// configuration in force at each step.
pub fn evolve(state: &WalkerState, seq: &LatticeSequence) -> Result<WalkerState> {
    if seq.steps() > state.window_radius() {
        return Err(Error::WindowTooSmall {
            steps: seq.steps(),
            window_radius: state.window_radius(),
        });
    }
    let mut current = state.clone();
    let mut scratch = WalkerState::zero(state.window_radius());
    for step in 0..seq.steps() {
        apply_coin_in_place(&mut current);
        apply_shift_into(&current, seq.config_at(step), &mut scratch)?;
        std::mem::swap(&mut current, &mut scratch);
    }
    Ok(current)
}

/// Position distribution `P(i) = |amp(i, up)|^2 + |amp(i, down)|^2`.
pub fn position_distribution(state: &WalkerState) -> PositionDistribution {
    let probs = state
        .amps()
        .chunks_exact(2)
        .map(|pair| pair[0].norm_sqr() + pair[1].norm_sqr())
        .collect();
    PositionDistribution::from_probs(state.window_radius(), probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Regime;
    use crate::state::Coin;

    fn localized_up(r: usize) -> WalkerState {
        WalkerState::localized(0, &Coin::UP, r).unwrap()
    }

    #[test]
    fn coin_on_up_basis() {
        let s = apply_coin(&localized_up(3));
        let c = s.coin_at(0);
        assert!((c.up.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c.down.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coin_on_phi_plus() {
        // Direct 2x2 multiplication gives ((1+i)/2, (1-i)/2).
        let s = apply_coin(&WalkerState::localized(0, &Coin::PHI_PLUS, 3).unwrap());
        let c = s.coin_at(0);
        assert!((c.up - Amplitude::new(0.5, 0.5)).norm() < 1e-15);
        assert!((c.down - Amplitude::new(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn coin_is_involution() {
        let s = WalkerState::localized(1, &Coin::PHI_PLUS, 3).unwrap();
        let twice = apply_coin(&apply_coin(&s));
        for pos in s.positions() {
            assert!((twice.coin_at(pos).up - s.coin_at(pos).up).norm() < 1e-15);
            assert!((twice.coin_at(pos).down - s.coin_at(pos).down).norm() < 1e-15);
        }
    }

    #[test]
    fn shift_moves_up_right() {
        let s = localized_up(3);
        let out = apply_shift(&s, &BondConfig::all_present(3)).unwrap();
        assert_eq!(out.coin_at(1).up, Amplitude::new(1.0, 0.0));
        assert_eq!(out.support_bounds(), Some((1, 1)));
    }

    #[test]
    fn shift_missing_forward_bond_reflects() {
        // Bond (0,1) missing: up at 0 stays at 0 and flips to down.
        let mut bonds = vec![true; 6];
        bonds[3] = false; // i = 0 with r = 3
        let cfg = BondConfig::from_bonds(3, bonds).unwrap();
        let out = apply_shift(&localized_up(3), &cfg).unwrap();
        assert_eq!(out.coin_at(0).down, Amplitude::new(1.0, 0.0));
        assert_eq!(out.coin_at(0).up, Amplitude::new(0.0, 0.0));
    }

    #[test]
    fn shift_both_bonds_missing_swaps_components() {
        let mut bonds = vec![true; 6];
        bonds[2] = false; // bond (-1, 0)
        bonds[3] = false; // bond (0, 1)
        let cfg = BondConfig::from_bonds(3, bonds).unwrap();
        let alpha = Amplitude::new(0.6, 0.0);
        let beta = Amplitude::new(0.0, 0.8);
        let mut s = WalkerState::zero(3);
        let i = s.index(0, 0);
        s.amps_mut()[i] = alpha;
        s.amps_mut()[i + 1] = beta;
        let out = apply_shift(&s, &cfg).unwrap();
        assert_eq!(out.coin_at(0).up, beta);
        assert_eq!(out.coin_at(0).down, alpha);
    }

    #[test]
    fn shift_rejects_support_at_edge() {
        let s = WalkerState::localized(3, &Coin::UP, 3).unwrap();
        assert!(matches!(
            apply_shift(&s, &BondConfig::all_present(3)),
            Err(Error::SupportAtEdge)
        ));
    }

    #[test]
    fn one_step_perfect_from_up() {
        // Hand application: |0,up> -> (|1,up> + |-1,down>)/sqrt2.
        let seq = LatticeSequence::perfect(1);
        let out = evolve(&localized_up(1), &seq).unwrap();
        assert!((out.coin_at(1).up.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.coin_at(-1).down.re - FRAC_1_SQRT_2).abs() < 1e-15);
        let dist = position_distribution(&out);
        assert!((dist.prob(1) - 0.5).abs() < 1e-15);
        assert!((dist.prob(-1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn p_zero_traps_walker() {
        let seq = LatticeSequence::sample(Regime::Dynamical, 0.0, 15, 0, 0).unwrap();
        let out = evolve(
            &WalkerState::localized(0, &Coin::PHI_PLUS, 15).unwrap(),
            &seq,
        )
        .unwrap();
        assert_eq!(out.support_bounds(), Some((0, 0)));
        assert!((position_distribution(&out).prob(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn light_cone_is_exact() {
        let seq = LatticeSequence::sample(Regime::Dynamical, 0.7, 8, 3, 1).unwrap();
        let mut state = WalkerState::localized(0, &Coin::PHI_PLUS, 8).unwrap();
        for step in 0..8 {
            apply_coin_in_place(&mut state);
            state = apply_shift(&state, seq.config_at(step)).unwrap();
            let (lo, hi) = state.support_bounds().unwrap();
            let k = step as i32 + 1;
            assert!(
                lo >= -k && hi <= k,
                "support escaped light cone at step {step}"
            );
        }
    }

    #[test]
    fn norm_preserved_over_random_sequence() {
        let seq = LatticeSequence::sample(Regime::Dynamical, 0.4, 25, 9, 4).unwrap();
        let out = evolve(
            &WalkerState::localized(0, &Coin::PHI_PLUS, 25).unwrap(),
            &seq,
        )
        .unwrap();
        assert!((out.norm_sq() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn window_too_small_rejected() {
        let seq = LatticeSequence::perfect(5);
        let s = WalkerState::localized(0, &Coin::UP, 4).unwrap();
        assert!(matches!(
            evolve(&s, &seq),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn conjugate_state_same_distribution() {
        // All evolution coefficients are real, so conjugation commutes with
        // the walk and leaves the output distribution bit-identical.
        let seq = LatticeSequence::sample(Regime::Dynamical, 0.6, 12, 21, 2).unwrap();
        let psi = WalkerState::localized(0, &Coin::PHI_PLUS, 12).unwrap();
        let out = evolve(&psi, &seq).unwrap();
        let out_conj = evolve(&psi.conjugated(), &seq).unwrap();
        assert_eq!(
            position_distribution(&out).probs(),
            position_distribution(&out_conj).probs()
        );
    }

    #[test]
    fn distribution_sums_to_one() {
        let seq = LatticeSequence::sample(Regime::Statical, 0.5, 20, 77, 0).unwrap();
        let out = evolve(
            &WalkerState::localized(0, &Coin::PHI_PLUS, 20).unwrap(),
            &seq,
        )
        .unwrap();
        assert!((position_distribution(&out).total() - 1.0).abs() <= 1e-12);
    }
}
