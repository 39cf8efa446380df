//! Property tests over randomized inputs: unitarity and the light cone under
//! arbitrary bond patterns, joint-distribution invariants for arbitrary coin
//! pairs, diagonal ordering for orthogonal pairs, fit recovery, and the
//! config dump round trip.

use num_complex::Complex64;
use proptest::prelude::*;

use percwalk::estimation;
use percwalk::evolution;
use percwalk::lattice::{BondConfig, LatticeSequence, Regime};
use percwalk::observables;
use percwalk::state::{Coin, WalkerState};
use percwalk::twowalker::{self, InputKind, TwoWalkerInput};

fn coin_strategy() -> impl Strategy<Value = Coin> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map(
        "coin norm too small",
        |(a, b, c, d)| {
            let raw = Coin::new(Complex64::new(a, b), Complex64::new(c, d));
            let norm = raw.norm_sq().sqrt();
            (norm > 0.05).then(|| Coin::new(raw.up / norm, raw.down / norm))
        },
    )
}

/// A dynamical sequence with completely arbitrary bond patterns (not Bernoulli).
fn sequence_strategy() -> impl Strategy<Value = LatticeSequence> {
    (1usize..10).prop_flat_map(|steps| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), 2 * steps), steps)
            .prop_map(move |patterns| {
                let configs = patterns
                    .into_iter()
                    .map(|bonds| BondConfig::from_bonds(steps, bonds).unwrap())
                    .collect();
                LatticeSequence::from_configs(Regime::Dynamical, 0.5, steps, configs).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evolution_is_unitary_and_causal(coin in coin_strategy(), seq in sequence_strategy()) {
        let steps = seq.steps();
        let state = WalkerState::localized(0, &coin, steps).unwrap();
        let out = evolution::evolve(&state, &seq).unwrap();
        prop_assert!((out.norm_sq() - 1.0).abs() <= 1e-12);
        if let Some((lo, hi)) = out.support_bounds() {
            prop_assert!(lo >= -(steps as i32) && hi <= steps as i32);
        }
        let dist = evolution::position_distribution(&out);
        prop_assert!((dist.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn joint_distribution_invariants(
        c1 in coin_strategy(),
        c2 in coin_strategy(),
        seq in sequence_strategy(),
        kind_index in 0usize..3,
    ) {
        let kind = [InputKind::Boson, InputKind::Fermion, InputKind::Classical][kind_index];
        let steps = seq.steps();
        let input = match TwoWalkerInput::from_coins(kind, &c1, &c2, steps) {
            Ok(input) => input,
            Err(_) => return Ok(()), // fermion pair effectively proportional
        };
        let joint = twowalker::joint_distribution(&input, &seq).unwrap();
        prop_assert!((joint.total() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(joint.max_asymmetry(), 0.0);
        prop_assert!(joint.grid().values().iter().all(|&v| v >= 0.0));
        // The origin cell is one of the diagonal cells.
        let meeting = observables::meeting_probability(&joint);
        let origin = observables::origin_probability(&joint);
        prop_assert!(origin <= meeting + 1e-15);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&meeting));
    }

    #[test]
    fn diagonal_ordering_for_orthogonal_pairs(
        c1 in coin_strategy(),
        seq in sequence_strategy(),
    ) {
        let c2 = Coin::new(-c1.down.conj(), c1.up.conj());
        let steps = seq.steps();
        let boson = twowalker::joint_distribution(
            &TwoWalkerInput::from_coins(InputKind::Boson, &c1, &c2, steps).unwrap(),
            &seq,
        )
        .unwrap();
        let fermion = twowalker::joint_distribution(
            &TwoWalkerInput::from_coins(InputKind::Fermion, &c1, &c2, steps).unwrap(),
            &seq,
        )
        .unwrap();
        let classical = twowalker::joint_distribution(
            &TwoWalkerInput::from_coins(InputKind::Classical, &c1, &c2, steps).unwrap(),
            &seq,
        )
        .unwrap();
        for j in boson.positions() {
            prop_assert!(fermion.prob(j, j) <= classical.prob(j, j) + 1e-12);
            prop_assert!(classical.prob(j, j) <= boson.prob(j, j) + 1e-12);
        }
    }

    #[test]
    fn symmetrization_normalization_positive(
        c1 in coin_strategy(),
        c2 in coin_strategy(),
    ) {
        if let Ok(boson) = TwoWalkerInput::from_coins(InputKind::Boson, &c1, &c2, 2) {
            prop_assert!(boson.sym_normalization_sq().unwrap() > 0.0);
        }
        if let Ok(fermion) = TwoWalkerInput::from_coins(InputKind::Fermion, &c1, &c2, 2) {
            prop_assert!(fermion.sym_normalization_sq().unwrap() > 0.0);
        }
    }

    #[test]
    fn polynomial_fit_recovers_polynomials(
        coeffs in proptest::collection::vec(-5.0f64..5.0, 1..6),
        point_count in 8usize..30,
    ) {
        let degree = coeffs.len() - 1;
        let xs: Vec<f64> = (0..point_count)
            .map(|k| k as f64 / (point_count - 1) as f64)
            .collect();
        let eval = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let ys: Vec<f64> = xs.iter().map(|&x| eval(x)).collect();
        let fit = estimation::polynomial_fit(&xs, &ys, degree).unwrap();
        let scale = 1.0 + ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        prop_assert!(fit.max_residual(&xs, &ys) <= 1e-9 * scale);
        // Derivative against a central difference at an interior point.
        let x0 = 0.43;
        let h = 1e-6;
        let numeric = (eval(x0 + h) - eval(x0 - h)) / (2.0 * h);
        prop_assert!((fit.derivative(x0) - numeric).abs() <= 1e-4 * scale);
    }

    #[test]
    fn bond_dump_round_trip(bonds in proptest::collection::vec(any::<bool>(), 1..20)) {
        let bonds: Vec<bool> = bonds.into_iter().chain(std::iter::once(false)).collect();
        let bonds = if bonds.len().is_multiple_of(2) { bonds } else { bonds[..bonds.len() - 1].to_vec() };
        let radius = bonds.len() / 2;
        let config = BondConfig::from_bonds(radius, bonds).unwrap();
        let parsed = BondConfig::parse_line(&config.dump_line()).unwrap();
        prop_assert_eq!(parsed, config);
    }
}
