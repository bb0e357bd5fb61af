//! Finite-shot simulation of one measurement context.
//!
//! Shot `k` of a run with seed `s` draws its uniform variate from word
//! position `2k` of the ChaCha8 stream keyed by `s`, so any split of the shot
//! range into chunks merges to the same counts.

use crate::observables::{self, ObservablesError};
use crate::qstate::{self, ObservableOp, QStateError, StateVector};
use crate::Tolerance;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error(transparent)]
    Observables(#[from] ObservablesError),
    #[error("context observables `{a}` and `{b}` do not commute (commutator norm {norm:e})")]
    NonCommuting { a: String, b: String, norm: f64 },
    #[error(transparent)]
    State(#[from] QStateError),
    #[error("no shots to compare")]
    NoShots,
}

/// A context (Alice's projector, Bob's projector) and the run length.
#[derive(Debug, Clone)]
pub struct RunConfig {
    alice: ObservableOp,
    bob: ObservableOp,
    pub shots: u64,
    pub seed: u64,
    pub tolerance: Tolerance,
}

impl RunConfig {
    pub fn new(
        alice: ObservableOp,
        bob: ObservableOp,
        shots: u64,
        seed: u64,
        tolerance: Tolerance,
    ) -> Result<Self, SamplerError> {
        let norm = qstate::commutator_norm(&alice, &bob)?;
        if norm > tolerance.0 {
            return Err(SamplerError::NonCommuting {
                a: alice.name().to_string(),
                b: bob.name().to_string(),
                norm,
            });
        }
        Ok(RunConfig {
            alice,
            bob,
            shots,
            seed,
            tolerance,
        })
    }

    pub fn alice(&self) -> &ObservableOp {
        &self.alice
    }

    pub fn bob(&self) -> &ObservableOp {
        &self.bob
    }
}

/// Outcome counts indexed `[alice][bob]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountTable {
    pub counts: [[u64; 2]; 2],
    pub shots: u64,
}

impl CountTable {
    pub fn merge(&self, other: &CountTable) -> CountTable {
        let mut counts = self.counts;
        for a in 0..2 {
            for b in 0..2 {
                counts[a][b] += other.counts[a][b];
            }
        }
        CountTable {
            counts,
            shots: self.shots + other.shots,
        }
    }

    pub fn frequency(&self, a: usize, b: usize) -> f64 {
        self.counts[a][b] as f64 / self.shots as f64
    }
}

/// Exact outcome distribution of the context with every probability below
/// the tolerance set to exactly zero.
pub fn sampling_distribution(state: &StateVector, cfg: &RunConfig) -> Result<[[f64; 2]; 2], SamplerError> {
    let mut probs = observables::joint_distribution(&cfg.alice, &cfg.bob, state, cfg.tolerance)?;
    for p in probs.iter_mut().flatten() {
        if *p < cfg.tolerance.0 {
            *p = 0.0;
        }
    }
    Ok(probs)
}

fn draw(dist: &[[f64; 2]; 2], total: f64, u: f64) -> (usize, usize) {
    let target = u * total;
    let mut cum = 0.0;
    let mut last = (0, 0);
    for (k, p) in dist.iter().flatten().enumerate() {
        if *p == 0.0 {
            continue;
        }
        cum += p;
        last = (k >> 1, k & 1);
        if target < cum {
            return last;
        }
    }
    // rounding at the top end: fall back to the last possible outcome
    last
}

/// Samples shots `range` of the run described by `cfg`.
pub fn sample_range(state: &StateVector, cfg: &RunConfig, range: Range<u64>) -> Result<CountTable, SamplerError> {
    let dist = sampling_distribution(state, cfg)?;
    let total: f64 = dist.iter().flatten().sum();
    let mut table = CountTable::default();
    if range.is_empty() {
        return Ok(table);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_word_pos(2 * range.start as u128);
    for _ in range {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let (a, b) = draw(&dist, total, u);
        table.counts[a][b] += 1;
        table.shots += 1;
    }
    Ok(table)
}

/// Samples all `cfg.shots` shots.
pub fn sample(state: &StateVector, cfg: &RunConfig) -> Result<CountTable, SamplerError> {
    sample_range(state, cfg, 0..cfg.shots)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDeviation {
    pub outcome: [u8; 2],
    pub count: u64,
    pub expected: f64,
    pub observed: f64,
    pub deviation: f64,
    pub std_error: f64,
    /// `None` when the binomial standard error vanishes but the count
    /// disagrees with the exact value.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub shots: u64,
    pub cells: Vec<CellDeviation>,
    pub max_abs_z: f64,
    /// A cell of exact probability 0 (or 1) was contradicted by the counts.
    pub impossible_event_violation: bool,
}

/// Per-cell deviation of the empirical frequencies from `exact`, with
/// binomial standard errors √(p(1−p)/N).
pub fn compare_frequencies(counts: &CountTable, exact: &[[f64; 2]; 2]) -> Result<DeviationReport, SamplerError> {
    if counts.shots == 0 {
        return Err(SamplerError::NoShots);
    }
    let n = counts.shots as f64;
    let mut cells = Vec::with_capacity(4);
    let mut violation = false;
    for a in 0..2 {
        for b in 0..2 {
            let p = exact[a][b];
            let observed = counts.frequency(a, b);
            let deviation = observed - p;
            let std_error = (p * (1.0 - p) / n).max(0.0).sqrt();
            let z = if std_error > 0.0 {
                Some(deviation / std_error)
            } else if deviation == 0.0 {
                Some(0.0)
            } else {
                violation = true;
                None
            };
            cells.push(CellDeviation {
                outcome: [a as u8, b as u8],
                count: counts.counts[a][b],
                expected: p,
                observed,
                deviation,
                std_error,
                z,
            });
        }
    }
    let max_abs_z = cells.iter().filter_map(|c| c.z).map(f64::abs).fold(0.0, f64::max);
    Ok(DeviationReport {
        shots: counts.shots,
        cells,
        max_abs_z,
        impossible_event_violation: violation,
    })
}
