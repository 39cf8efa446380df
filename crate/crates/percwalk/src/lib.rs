//! Discrete-time quantum walks of one and two non-interacting walkers on a
//! 1D lattice with randomly missing bonds.
//!
//! Each walk step tosses a balanced coin on the internal two-level degree of
//! freedom and then shifts the walker along the line, with the shift rerouted
//! wherever a bond is absent. Bonds are present independently with a
//! percolation parameter `p`, redrawn per realization (statical regime) or
//! per step (dynamical regime), and observables are averaged over many
//! realizations. Walker pairs can be combined with bosonic, fermionic, or
//! classically-indistinguishable statistics and measured with
//! exchange-symmetric projectors.
//!
//! All randomness derives from a counter-based hash of
//! `(master seed, realization, step, bond)`, so every result is a pure
//! function of its arguments and ensembles parallelize with bit-identical
//! output for any worker count.
//!
//! Evolve one walker and inspect its distribution:
//!
//! ```
//! use percwalk::evolution;
//! use percwalk::lattice::{LatticeSequence, Regime};
//! use percwalk::state::{Coin, WalkerState};
//!
//! let steps = 15;
//! let seq = LatticeSequence::sample(Regime::Dynamical, 0.75, steps, 42, 0)?;
//! let input = WalkerState::localized(0, &Coin::PHI_PLUS, steps)?;
//! let output = evolution::evolve(&input, &seq)?;
//! let dist = evolution::position_distribution(&output);
//! assert!((dist.total() - 1.0).abs() < 1e-12);
//! # Ok::<(), percwalk::Error>(())
//! ```
//!
//! Compare bunching of a boson pair against the classical reference on the
//! same lattice:
//!
//! ```
//! use percwalk::lattice::{LatticeSequence, Regime};
//! use percwalk::twowalker::{self, CanonicalInput, TwoWalkerInput};
//!
//! let seq = LatticeSequence::sample(Regime::Statical, 0.8, 15, 7, 0)?;
//! let boson = TwoWalkerInput::canonical(CanonicalInput::PhiPlus, 15);
//! let classical = TwoWalkerInput::canonical(CanonicalInput::PsiS, 15);
//! let p_boson = twowalker::joint_distribution(&boson, &seq)?;
//! let p_classical = twowalker::joint_distribution(&classical, &seq)?;
//! for j in p_boson.positions() {
//!     assert!(p_boson.prob(j, j) + 1e-12 >= p_classical.prob(j, j));
//! }
//! # Ok::<(), percwalk::Error>(())
//! ```
//!
//! Module map: [`state`] holds single-walker state vectors, [`lattice`]
//! samples bond configurations, [`evolution`] applies the step kernel,
//! [`twowalker`] builds pair inputs and joint distributions, [`observables`]
//! and [`estimation`] compute derived quantities and the
//! percolation-parameter estimation pipeline, [`montecarlo`] orchestrates
//! ensembles, and [`oracle`] provides independent brute-force reference
//! implementations for verification.

pub mod error;
pub mod estimation;
pub mod evolution;
pub mod lattice;
pub mod montecarlo;
pub mod observables;
pub mod oracle;
pub mod state;
pub mod twowalker;

pub use error::{Error, Result};
