//! Bias sweeps over a grid of quoin values.
//!
//! One sweep row records the Bell-outcome counts of `shots` joint
//! measurements at a single bias, together with the fair-coin and frown-coin
//! estimates derived from those same counts and the per-output quoin cost
//! statistics of each derivation.

use serde::Serialize;

use crate::analysis::{estimate_bias_from_counts, BiasEstimate};
use crate::noise::{sample_misassigned, ReadoutConfusion};
use crate::quantum::{map_bits_to_bell, sample_bell, BellOutcome, QuoinBias, QuantumError};
use crate::rng::RngStream;

/// Aggregate quoin cost of deriving one coin stream from a shot sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostStats {
    pub quoins_consumed: u64,
    pub outputs: u64,
    pub mean_quoins_per_output: f64,
    pub median_quoins_per_output: f64,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub shots: u64,
    /// Counts in outcome order `(Φ+, Φ-, Ψ+, Ψ-)`.
    pub counts: [u64; 4],
    pub fair: BiasEstimate,
    pub fair_cost: CostStats,
    /// Absent when no shot landed in the conditional event.
    pub frown: Option<BiasEstimate>,
    pub frown_cost: Option<CostStats>,
}

/// A full sweep, rows ordered by ascending `p`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub shots: u64,
    pub seed: u64,
    pub noise: Option<ReadoutConfusion>,
    pub rows: Vec<SweepRow>,
}

/// Evenly spaced grid of `steps` points over `[start, end]`.
pub fn even_grid(start: f64, end: f64, steps: u32) -> Result<Vec<f64>, QuantumError> {
    QuoinBias::new(start)?;
    QuoinBias::new(end)?;
    if steps == 0 || (steps == 1 && start != end) || end < start {
        return Err(QuantumError::InvalidBias { value: end });
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let denom = f64::from(steps - 1);
    Ok((0..steps)
        .map(|i| {
            // Affine combination rather than start + span·t: it reproduces
            // both endpoints exactly and hits exact midpoints on symmetric
            // grids (e.g. 0.5 on 0.05..0.95 x 19), which the protocols rely
            // on for their structural zeros.
            let t = f64::from(i) / denom;
            start * (1.0 - t) + end * t
        })
        .collect())
}

/// Run a sweep: `shots` Bell samples at every grid point.
///
/// Grid point `i` draws from the substream `(seed, i)`, so row contents do
/// not depend on execution order. When `noise` is supplied every sampled bit
/// pair passes through the misassignment channel before outcome mapping.
pub fn run_bell_sweep(
    grid: &[f64],
    shots: u64,
    seed: u64,
    noise: Option<&ReadoutConfusion>,
) -> Result<SweepResult, QuantumError> {
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &p) in grid.iter().enumerate() {
        let bias = QuoinBias::new(p)?;
        let mut rng = RngStream::new(seed, i as u64);
        rows.push(sweep_row(bias, shots, noise, &mut rng));
    }
    Ok(SweepResult {
        shots,
        seed,
        noise: noise.copied(),
        rows,
    })
}

fn sweep_row(
    p: QuoinBias,
    shots: u64,
    noise: Option<&ReadoutConfusion>,
    rng: &mut RngStream,
) -> SweepRow {
    let mut counts = [0u64; 4];
    let mut frown_heads = 0u64;
    // Shot indices (1-based) of conditional-event acceptances, for the
    // per-output cost distribution of the frown derivation.
    let mut accept_gaps: Vec<u64> = Vec::new();
    let mut last_accept = 0u64;

    for shot in 1..=shots {
        let mut outcome = sample_bell(p, rng);
        if let Some(c) = noise {
            let read = sample_misassigned(outcome.to_bits(), c, rng);
            outcome = map_bits_to_bell(read.0, read.1);
        }
        counts[outcome.index()] += 1;
        match outcome {
            BellOutcome::PsiPlus => {
                frown_heads += 1;
                accept_gaps.push(shot - last_accept);
                last_accept = shot;
            }
            BellOutcome::PhiMinus => {
                accept_gaps.push(shot - last_accept);
                last_accept = shot;
            }
            _ => {}
        }
    }

    let fair_heads = counts[BellOutcome::PhiPlus.index()] + counts[BellOutcome::PsiMinus.index()];
    let fair = estimate_bias_from_counts(fair_heads, shots).expect("shots >= 1");
    let fair_cost = CostStats {
        quoins_consumed: 2 * shots,
        outputs: shots,
        mean_quoins_per_output: 2.0,
        median_quoins_per_output: 2.0,
    };

    let frown_trials = accept_gaps.len() as u64;
    let (frown, frown_cost) = if frown_trials > 0 {
        let estimate = estimate_bias_from_counts(frown_heads, frown_trials).expect("nonzero");
        let mut gap_quoins: Vec<u64> = accept_gaps.iter().map(|g| 2 * g).collect();
        gap_quoins.sort_unstable();
        let cost = CostStats {
            quoins_consumed: 2 * shots,
            outputs: frown_trials,
            mean_quoins_per_output: 2.0 * shots as f64 / frown_trials as f64,
            median_quoins_per_output: median_of_sorted(&gap_quoins),
        };
        (Some(estimate), Some(cost))
    } else {
        (None, None)
    };

    SweepRow {
        p: p.value(),
        shots,
        counts,
        fair,
        fair_cost,
        frown,
        frown_cost,
    }
}

/// Median of an ascending-sorted sequence, averaging the middle pair.
pub fn median_of_sorted(sorted: &[u64]) -> f64 {
    assert!(!sorted.is_empty());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] as f64 + sorted[mid] as f64) / 2.0
    }
}
