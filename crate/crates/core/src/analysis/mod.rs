//! Estimators, goodness-of-fit checks, closed-form target functions, cost
//! laws, and the brute-force series oracle the test suites use as ground
//! truth.

pub mod sweep;

use serde::Serialize;
use thiserror::Error;

use crate::quantum::{BellOutcome, OutcomeDistribution};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("at least one trial is required")]
    EmptySample,
    #[error("catalan({n}) overflows the exact integer range")]
    CatalanOverflow { n: u32 },
    #[error("probability argument must lie in [0, 1], got {value}")]
    InvalidProbability { value: f64 },
    #[error("cost law diverges at p = {value}")]
    DivergentCost { value: f64 },
}

/// 97.5% standard-normal quantile, giving 95% two-sided coverage.
const Z_95: f64 = 1.959_963_984_540_054;

/// Point estimate and 95% Wilson score interval for a coin stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Interval construction, recorded in serialized output.
    pub method: &'static str,
}

impl BiasEstimate {
    pub const METHOD: &'static str = "wilson-score-95";
}

/// Estimate the bias of a bit stream (1 = heads).
pub fn estimate_bias(bits: &[u8]) -> Result<BiasEstimate, AnalysisError> {
    assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
    let successes = bits.iter().filter(|&&b| b == 1).count() as u64;
    estimate_bias_from_counts(successes, bits.len() as u64)
}

/// Estimate the bias from success/trial counts.
pub fn estimate_bias_from_counts(successes: u64, trials: u64) -> Result<BiasEstimate, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::EmptySample);
    }
    assert!(successes <= trials);
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = p_hat + z2 / (2.0 * n);
    let radius = Z_95 * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    // The score bounds are 0 and 1 exactly at the degenerate counts; compute
    // them as such so floating-point noise cannot break the bracketing
    // invariant ci_low <= p_hat <= ci_high.
    let ci_low = if successes == 0 {
        0.0
    } else {
        ((center - radius) / denom).clamp(0.0, p_hat)
    };
    let ci_high = if successes == trials {
        1.0
    } else {
        ((center + radius) / denom).clamp(p_hat, 1.0)
    };
    Ok(BiasEstimate {
        successes,
        trials,
        p_hat,
        ci_low,
        ci_high,
        method: BiasEstimate::METHOD,
    })
}

/// Pearson chi-square verdict against a fixed critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: u32,
    pub critical_value: f64,
    pub pass: bool,
}

/// 99% chi-square quantiles for 1–3 degrees of freedom.
const CHI2_CRIT_99: [f64; 3] = [
    6.634_896_601_021_214,
    9.210_340_371_976_184,
    11.344_866_730_144_373,
];

/// Pearson goodness-of-fit of observed counts against an expected Bell
/// distribution, at fixed significance α = 0.01.
///
/// Cells with zero expected probability are excluded from the statistic but
/// force failure when occupied.
pub fn chi_square_gof(
    counts: &[u64; 4],
    expected: &OutcomeDistribution,
) -> Result<GofReport, AnalysisError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(AnalysisError::EmptySample);
    }
    let total = total as f64;

    let mut statistic = 0.0;
    let mut live_cells = 0u32;
    let mut impossible_occupied = false;
    for outcome in BellOutcome::ALL {
        let want = expected.prob(outcome) * total;
        let got = counts[outcome.index()] as f64;
        if want > 0.0 {
            live_cells += 1;
            let diff = got - want;
            statistic += diff * diff / want;
        } else if got > 0.0 {
            impossible_occupied = true;
        }
    }

    let dof = live_cells.saturating_sub(1);
    let critical_value = if dof == 0 {
        0.0
    } else {
        CHI2_CRIT_99[(dof - 1) as usize]
    };
    let pass = !impossible_occupied
        && if dof == 0 {
            statistic == 0.0
        } else {
            statistic < critical_value
        };
    Ok(GofReport {
        statistic: if impossible_occupied { f64::INFINITY } else { statistic },
        dof,
        critical_value,
        pass,
    })
}

/// `f⌢(p) = 4p(1-p)`, the conditional heads probability of the
/// frown protocol.
pub fn f_frown(p: f64) -> f64 {
    4.0 * p * (1.0 - p)
}

/// `f∧(p) = 2·min(p, 1-p)`, the doubling function.
pub fn f_wedge(p: f64) -> f64 {
    2.0 * p.min(1.0 - p)
}

/// Expected coins per fair coin under von Neumann extraction,
/// `1/(p(1-p))`; diverges at the endpoints.
pub fn von_neumann_cost(p: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::InvalidProbability { value: p });
    }
    if p == 0.0 || p == 1.0 {
        return Err(AnalysisError::DivergentCost { value: p });
    }
    Ok(1.0 / (p * (1.0 - p)))
}

/// Exact `n`-th Catalan number `(2n choose n)/(n+1)`.
///
/// Computed by the integer recurrence `C_{n+1} = C_n·2(2n+1)/(n+2)`; exact
/// up to n = 65, beyond which the checked intermediate product overflows
/// `u128` and an error is returned.
pub fn catalan(n: u32) -> Result<u128, AnalysisError> {
    let mut value: u128 = 1;
    for k in 0..n as u128 {
        value = value
            .checked_mul(2 * (2 * k + 1))
            .ok_or(AnalysisError::CatalanOverflow { n })?
            / (k + 2);
    }
    Ok(value)
}

/// Probability that the fair-coin walk first reaches a strict heads excess
/// at step `2n+1`, i.e. `C_n / 2^(2n+1)`.
pub fn walk_stopping_probability(n: u32) -> f64 {
    // Multiplicative form keeps this finite for large n where both the
    // Catalan number and the power of two overflow on their own.
    let mut value = 0.5;
    for k in 0..n as u64 {
        value *= (2 * k + 1) as f64 / (2 * (k + 2)) as f64;
    }
    value
}

/// Truncated-series estimate of the √q construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtSeriesEstimate {
    /// `1 - Σ_{n=0}^{n_max} C_n/2^(2n+1) · (1-q)^(n+1)`.
    pub bias: f64,
    /// Bound on the omitted tail of the series.
    pub tail_bound: f64,
    /// How the tail bound is computed, recorded in serialized output.
    pub tail_bound_method: &'static str,
}

impl SqrtSeriesEstimate {
    pub const TAIL_BOUND_METHOD: &'static str =
        "exact remainder of the closed form: (1 - sqrt(q)) - partial_sum";
}

/// Sum the walk series for the √q coin up to `n_max`.
///
/// As `n_max → ∞` the bias converges to `√q` from above, and
/// `|bias - √q| ≤ tail_bound` at every truncation depth.
pub fn sqrt_series_oracle(q: f64, n_max: u32) -> Result<SqrtSeriesEstimate, AnalysisError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(AnalysisError::InvalidProbability { value: q });
    }
    let y = 1.0 - q;
    // term_n = C_n/2^(2n+1)·y^(n+1); term_{n+1}/term_n = y·(2n+1)/(2(n+2)).
    let mut term = y / 2.0;
    let mut partial = 0.0;
    for n in 0..=u64::from(n_max) {
        partial += term;
        term *= y * (2 * n + 1) as f64 / (2 * (n + 2)) as f64;
    }
    let tail_bound = ((1.0 - q.sqrt()) - partial).max(0.0);
    Ok(SqrtSeriesEstimate {
        bias: 1.0 - partial,
        tail_bound,
        tail_bound_method: SqrtSeriesEstimate::TAIL_BOUND_METHOD,
    })
}
