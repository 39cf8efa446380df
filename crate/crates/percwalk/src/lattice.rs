//! Percolation bond configurations and per-regime lattice sequences.
//!
//! Every bond decision is a pure function of
//! `(master_seed, realization_index, step_index, bond_index)` pushed through a
//! splitmix64-style counter-based mixer. There is no stream state, so any
//! number of realizations can be sampled in parallel, in any order, with
//! bit-identical results. The mixer is an implementation constant of this
//! crate: other implementations only need to agree statistically.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// How often the lattice changes relative to the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// No missing bonds, ever.
    #[serde(rename = "perfect")]
    Perfect,
    /// One bond configuration per walk realization.
    #[serde(rename = "static")]
    Statical,
    /// A fresh bond configuration at every step.
    #[serde(rename = "dynamic")]
    Dynamical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Perfect => write!(f, "perfect"),
            Regime::Statical => write!(f, "static"),
            Regime::Dynamical => write!(f, "dynamic"),
        }
    }
}

/// Presence of the `2r` bonds `(i, i+1)` for `i = -r .. r-1` on a window of
/// radius `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondConfig {
    window_radius: usize,
    present: Vec<bool>,
}

impl BondConfig {
    pub fn all_present(window_radius: usize) -> BondConfig {
        BondConfig {
            window_radius,
            present: vec![true; 2 * window_radius],
        }
    }

    pub fn all_absent(window_radius: usize) -> BondConfig {
        BondConfig {
            window_radius,
            present: vec![false; 2 * window_radius],
        }
    }

    /// Builds a config from explicit bond flags ordered `i = -r .. r-1`.
    pub fn from_bonds(window_radius: usize, present: Vec<bool>) -> Result<BondConfig> {
        if present.len() != 2 * window_radius {
            return Err(Error::WindowMismatch {
                left: present.len(),
                right: 2 * window_radius,
            });
        }
        Ok(BondConfig {
            window_radius,
            present,
        })
    }

    pub fn window_radius(&self) -> usize {
        self.window_radius
    }

    /// Whether bond `(i, i+1)` is present. Bonds outside the window do not
    /// exist and report absent; the step kernel never needs them for states
    /// whose support lies strictly inside the window.
    #[inline]
    pub fn bond_present(&self, i: i32) -> bool {
        let r = self.window_radius as i32;
        if i < -r || i >= r {
            return false;
        }
        self.present[(i + r) as usize]
    }

    pub fn bonds(&self) -> &[bool] {
        &self.present
    }

    pub fn count_present(&self) -> usize {
        self.present.iter().filter(|&&b| b).count()
    }

    /// One character per bond, '1' present / '0' absent, ordered `i = -r .. r-1`.
    pub fn dump_line(&self) -> String {
        self.present
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn parse_line(line: &str) -> Result<BondConfig> {
        let present: Vec<bool> = line.chars().map(|c| c == '1').collect();
        if !present.len().is_multiple_of(2) {
            return Err(Error::WindowMismatch {
                left: present.len(),
                right: present.len() + 1,
            });
        }
        let window_radius = present.len() / 2;
        Ok(BondConfig {
            window_radius,
            present,
        })
    }
}

/// Identifies one realization within a reproducible ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeedTag {
    pub master_seed: u64,
    pub realization_index: u64,
}

/// The bond configurations an `N`-step walk sees: a single config (perfect or
/// statical) or one per step (dynamical).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSequence {
    steps: usize,
    regime: Regime,
    percolation_p: f64,
    configs: Vec<BondConfig>,
    seed_tag: SeedTag,
}

impl LatticeSequence {
    /// Samples a lattice sequence for the given regime. Each bond is present
    /// independently with probability `p`; the result is a deterministic
    /// function of `(master_seed, realization_index, step_index, bond_index)`.
    pub fn sample(
        regime: Regime,
        p: f64,
        steps: usize,
        master_seed: u64,
        realization_index: u64,
    ) -> Result<LatticeSequence> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidPercolationParameter { p });
        }
        if steps == 0 {
            return Err(Error::ZeroSteps);
        }
        let window_radius = steps;
        let seed_tag = SeedTag {
            master_seed,
            realization_index,
        };
        let configs = match regime {
            Regime::Perfect => vec![BondConfig::all_present(window_radius)],
            Regime::Statical => vec![sample_config(
                window_radius,
                p,
                master_seed,
                realization_index,
                0,
            )],
            Regime::Dynamical => (0..steps)
                .map(|step| {
                    sample_config(
                        window_radius,
                        p,
                        master_seed,
                        realization_index,
                        step as u64,
                    )
                })
                .collect(),
        };
        Ok(LatticeSequence {
            steps,
            regime,
            percolation_p: p,
            configs,
            seed_tag,
        })
    }

    /// An all-bonds-present sequence, the no-percolation limit.
    pub fn perfect(steps: usize) -> LatticeSequence {
        LatticeSequence::sample(Regime::Perfect, 1.0, steps, 0, 0)
            .expect("perfect sequence parameters are always valid")
    }

    /// Builds a sequence from explicit configs (one, reused every step, or one
    /// per step). For tests and regression fixtures.
    pub fn from_configs(
        regime: Regime,
        p: f64,
        steps: usize,
        configs: Vec<BondConfig>,
    ) -> Result<LatticeSequence> {
        if steps == 0 {
            return Err(Error::ZeroSteps);
        }
        let expected = if regime == Regime::Dynamical {
            steps
        } else {
            1
        };
        if configs.len() != expected {
            return Err(Error::WindowMismatch {
                left: configs.len(),
                right: expected,
            });
        }
        Ok(LatticeSequence {
            steps,
            regime,
            percolation_p: p,
            configs,
            seed_tag: SeedTag {
                master_seed: 0,
                realization_index: 0,
            },
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn percolation_p(&self) -> f64 {
        self.percolation_p
    }

    pub fn seed_tag(&self) -> SeedTag {
        self.seed_tag
    }

    pub fn window_radius(&self) -> usize {
        self.configs[0].window_radius()
    }

    /// The bond configuration in force at 0-based step `step`.
    pub fn config_at(&self, step: usize) -> &BondConfig {
        debug_assert!(step < self.steps);
        if self.configs.len() == 1 {
            &self.configs[0]
        } else {
            &self.configs[step]
        }
    }

    pub fn configs(&self) -> &[BondConfig] {
        &self.configs
    }

    /// Multi-line dump, one `dump_line` per step.
    pub fn dump(&self) -> String {
        (0..self.steps)
            .map(|s| self.config_at(s).dump_line())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Average length `p/(1-p)` of a connected segment of the percolated line.
pub fn avg_segment_length(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidPercolationParameter { p });
    }
    if p == 1.0 {
        return Err(Error::DivergentSegmentLength);
    }
    Ok(p / (1.0 - p))
}

fn sample_config(
    window_radius: usize,
    p: f64,
    master_seed: u64,
    realization_index: u64,
    step_index: u64,
) -> BondConfig {
    let r = window_radius as i32;
    let present = (-r..r)
        .map(|i| bond_uniform(master_seed, realization_index, step_index, i) < p)
        .collect();
    BondConfig {
        window_radius,
        present,
    }
}

/// Uniform variate in [0, 1) for one bond decision.
#[inline]
fn bond_uniform(master_seed: u64, realization_index: u64, step_index: u64, bond_index: i32) -> f64 {
    let h = mix_key(
        master_seed,
        realization_index,
        step_index,
        bond_index as i64 as u64,
    );
    // Top 53 bits to a double in [0, 1); p = 1 is then always present.
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// splitmix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn mix_key(master_seed: u64, realization_index: u64, step_index: u64, bond_index: u64) -> u64 {
    let mut h = master_seed ^ 0x9e37_79b9_7f4a_7c15;
    h = mix64(h ^ realization_index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    h = mix64(h ^ step_index.wrapping_mul(0xc2b2_ae3d_27d4_eb4f));
    h = mix64(h ^ bond_index.wrapping_mul(0x1656_67b1_9e37_79f9));
    mix64(h)
}
