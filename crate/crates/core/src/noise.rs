//! Readout-misassignment channel.
//!
//! Measurement records are corrupted by independent per-qubit assignment
//! errors: a true `0` on the first qubit is read correctly with probability
//! `a0`, a true `1` with probability `a1`, and likewise `b0`/`b1` for the
//! second qubit. The induced two-qubit confusion matrix `M` is
//! column-stochastic and acts on probability vectors as `p' = M·p`.
//!
//! Noise is applied at the measurement-record level only — bits flip after
//! sampling, amplitudes are never touched. Decoherence and gate errors are
//! out of scope.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::NORM_TOL;
use crate::rng::RngStream;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("confusion parameter {name} must lie in [0, 1], got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("probability vector entries must lie in [0, 1] and sum to 1 (sum = {sum})")]
    InvalidDistribution { sum: f64 },
    #[error("doubling ceiling undefined: 2·P'(01) = {value} exceeds 1")]
    CeilingUndefined { value: f64 },
}

/// Per-qubit correct-assignment probabilities.
///
/// `a0 = P(read 0 | true 0)` and `a1 = P(read 1 | true 1)` on the first
/// label bit; `b0`, `b1` the same on the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutConfusion {
    a0: f64,
    a1: f64,
    b0: f64,
    b1: f64,
}

impl ReadoutConfusion {
    /// Default parameters corresponding to a ~1e-2 readout error rate.
    pub const DEFAULT: ReadoutConfusion = ReadoutConfusion {
        a0: 0.995,
        a1: 0.985,
        b0: 0.995,
        b1: 0.985,
    };

    /// Perfect readout: the confusion matrix is the identity.
    pub const IDENTITY: ReadoutConfusion = ReadoutConfusion {
        a0: 1.0,
        a1: 1.0,
        b0: 1.0,
        b1: 1.0,
    };

    pub fn new(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<Self, NoiseError> {
        for (name, value) in [("a0", a0), ("a1", a1), ("b0", b0), ("b1", b1)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::InvalidParameter { name, value });
            }
        }
        Ok(Self { a0, a1, b0, b1 })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

/// Probability vector over computational outcomes `(00, 01, 10, 11)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbVector4 {
    entries: [f64; 4],
}

impl ProbVector4 {
    pub fn new(entries: [f64; 4]) -> Result<Self, NoiseError> {
        let sum: f64 = entries.iter().sum();
        if entries.iter().any(|p| !(0.0..=1.0 + NORM_TOL).contains(p))
            || (sum - 1.0).abs() > NORM_TOL
        {
            return Err(NoiseError::InvalidDistribution { sum });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> [f64; 4] {
        self.entries
    }
}

/// `P(read r | true t)` for one qubit with correct-assignment
/// probabilities `c0`, `c1`.
fn assignment_prob(read: usize, truth: usize, c0: f64, c1: f64) -> f64 {
    match (truth, read) {
        (0, 0) => c0,
        (0, 1) => 1.0 - c0,
        (1, 1) => c1,
        (1, 0) => 1.0 - c1,
        _ => unreachable!(),
    }
}

/// The two-qubit confusion matrix, entry `(row = read r1r2, col = true t1t2)`
/// equal to `P(read r1 | true t1)·P(read r2 | true t2)`.
///
/// Built from the per-qubit conditionals, never hard-coded; every column
/// sums to 1.
pub fn confusion_matrix(c: &ReadoutConfusion) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (row, entries) in m.iter_mut().enumerate() {
        let (r1, r2) = (row >> 1, row & 1);
        for (col, entry) in entries.iter_mut().enumerate() {
            let (t1, t2) = (col >> 1, col & 1);
            *entry = assignment_prob(r1, t1, c.a0, c.a1) * assignment_prob(r2, t2, c.b0, c.b1);
        }
    }
    m
}

/// The observed distribution `M·dist` under readout misassignment.
pub fn apply_confusion(dist: &ProbVector4, c: &ReadoutConfusion) -> ProbVector4 {
    let m = confusion_matrix(c);
    let p = dist.entries();
    let mut out = [0.0; 4];
    for (row, entry) in out.iter_mut().enumerate() {
        *entry = (0..4).map(|col| m[row][col] * p[col]).sum();
    }
    ProbVector4 { entries: out }
}

/// Flip each bit of a measured pair independently with its misassignment
/// probability. The marginal law of the output is `apply_confusion` of the
/// input point mass.
pub fn sample_misassigned(
    outcome: (u8, u8),
    c: &ReadoutConfusion,
    rng: &mut RngStream,
) -> (u8, u8) {
    let (t1, t2) = outcome;
    debug_assert!(t1 <= 1 && t2 <= 1);
    // Both draws always happen so stream consumption is input-independent.
    let flip1 = rng.bernoulli(if t1 == 0 { 1.0 - c.a0 } else { 1.0 - c.a1 });
    let flip2 = rng.bernoulli(if t2 == 0 { 1.0 - c.b0 } else { 1.0 - c.b1 });
    (t1 ^ u8::from(flip1), t2 ^ u8::from(flip2))
}

/// The ideal readout distribution of the measurement circuit at `p = 1/2`.
pub fn ideal_half_distribution() -> ProbVector4 {
    ProbVector4 {
        entries: [0.5, 0.0, 0.5, 0.0],
    }
}

/// Maximum doubling-function value reachable under readout noise.
///
/// Computes `P' = M·(1/2, 0, 1/2, 0)`, reads `P'(01)` as `(1-2p_eff)²/2`,
/// and returns `1 - √(2·P'(01))`.
pub fn doubling_ceiling(c: &ReadoutConfusion) -> Result<f64, NoiseError> {
    let observed = apply_confusion(&ideal_half_distribution(), c);
    ceiling_from_p01(observed.entries()[1])
}

/// The ceiling implied by a raw observed `P'(01)` value.
pub fn ceiling_from_p01(p01: f64) -> Result<f64, NoiseError> {
    let value = 2.0 * p01;
    if value > 1.0 {
        return Err(NoiseError::CeilingUndefined { value });
    }
    Ok(1.0 - value.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_parameters_give_identity_matrix() {
        let m = confusion_matrix(&ReadoutConfusion::IDENTITY);
        for (row, entries) in m.iter().enumerate() {
            for (col, &entry) in entries.iter().enumerate() {
                assert_eq!(entry, if row == col { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn total_misassignment_is_antidiagonal() {
        let c = ReadoutConfusion::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let m = confusion_matrix(&c);
        for (row, entries) in m.iter().enumerate() {
            for (col, &entry) in entries.iter().enumerate() {
                assert_eq!(entry, if row == 3 - col { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn top_left_entry_is_product_of_fidelities() {
        let m = confusion_matrix(&ReadoutConfusion::DEFAULT);
        assert!((m[0][0] - 0.990025).abs() < 1e-15);
    }

    #[test]
    fn apply_confusion_identity_and_basis_vector() {
        let dist = ProbVector4::new([0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(
            apply_confusion(&dist, &ReadoutConfusion::IDENTITY).entries(),
            dist.entries()
        );

        let c = ReadoutConfusion::new(0.9, 0.8, 0.7, 0.6).unwrap();
        let m = confusion_matrix(&c);
        let point = ProbVector4::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = apply_confusion(&point, &c).entries();
        for row in 0..4 {
            assert!((out[row] - m[row][0]).abs() < 1e-15);
        }
    }

    #[test]
    fn observed_p01_at_half_matches_row_product() {
        // Row 01 of M dotted with (1/2, 0, 1/2, 0) is (1-b0)(a0 + 1-a1)/2,
        // which is 0.002525 at the default parameters.
        let c = ReadoutConfusion::DEFAULT;
        let observed = apply_confusion(&ideal_half_distribution(), &c);
        let expected = (1.0 - c.b0()) * (c.a0() + 1.0 - c.a1()) / 2.0;
        assert!((observed.entries()[1] - expected).abs() < 1e-15);
        assert!((observed.entries()[1] - 0.002525).abs() < 1e-12);
    }

    #[test]
    fn misassignment_sampling_edges() {
        let mut rng = RngStream::new(21, 0);
        for _ in 0..200 {
            assert_eq!(
                sample_misassigned((0, 1), &ReadoutConfusion::IDENTITY, &mut rng),
                (0, 1)
            );
        }
        // a0 = 1 keeps the first bit, b0 = 0 always flips the second.
        let c = ReadoutConfusion::new(1.0, 1.0, 0.0, 1.0).unwrap();
        for _ in 0..200 {
            assert_eq!(sample_misassigned((0, 0), &c, &mut rng), (0, 1));
        }
    }

    #[test]
    fn misassignment_sampling_matches_channel() {
        // From (0,0) with default parameters, reading (0,1) has probability
        // a0·(1-b0) = 0.004975; 5σ binomial band over 1e5 draws.
        let n = 100_000u64;
        let c = ReadoutConfusion::DEFAULT;
        let mut rng = RngStream::new(23, 0);
        let hits = (0..n)
            .filter(|_| sample_misassigned((0, 0), &c, &mut rng) == (0, 1))
            .count() as f64;
        let want = 0.995 * 0.005;
        let sigma = (want * (1.0 - want) / n as f64).sqrt();
        assert!((hits / n as f64 - want).abs() <= 5.0 * sigma);
    }

    #[test]
    fn sampling_marginals_match_channel_for_every_point_mass() {
        // Asymmetric parameters so all sixteen (input, output) cells carry
        // distinct probabilities.
        let n = 100_000u64;
        let c = ReadoutConfusion::new(0.9, 0.8, 0.7, 0.6).unwrap();
        let mut rng = RngStream::new(29, 0);
        for truth in 0..4usize {
            let mut point = [0.0; 4];
            point[truth] = 1.0;
            let expected = apply_confusion(&ProbVector4::new(point).unwrap(), &c).entries();

            let input = ((truth >> 1) as u8, (truth & 1) as u8);
            let mut counts = [0u64; 4];
            for _ in 0..n {
                let (r1, r2) = sample_misassigned(input, &c, &mut rng);
                counts[((r1 << 1) | r2) as usize] += 1;
            }
            for (cell, &want) in expected.iter().enumerate() {
                let got = counts[cell] as f64 / n as f64;
                let sigma = (want * (1.0 - want) / n as f64).sqrt();
                assert!(
                    (got - want).abs() <= 5.0 * sigma,
                    "input {input:?}, cell {cell}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn ceiling_reference_points() {
        assert_eq!(doubling_ceiling(&ReadoutConfusion::IDENTITY).unwrap(), 1.0);

        // Quoted reference pair: P'(01) = 0.0075 gives a ceiling of 0.8775
        // (exact value 1 - √0.015).
        let from_reference = ceiling_from_p01(0.0075).unwrap();
        assert!((from_reference - (1.0 - 0.015f64.sqrt())).abs() < 1e-15);
        assert!((from_reference - 0.8775).abs() < 5e-5);

        // Uniform confusion sends everything to (1/4, ..) so the ceiling is
        // 1 - √(1/2).
        let uniform = ReadoutConfusion::new(0.5, 0.5, 0.5, 0.5).unwrap();
        let ceiling = doubling_ceiling(&uniform).unwrap();
        assert!((ceiling - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn default_ceiling_matches_printed_matrix_oracle() {
        // Independent route: the printed form of M, entered literally, times
        // (1/2, 0, 1/2, 0).
        let (a0, a1, b0, b1) = (0.995, 0.985, 0.995, 0.985);
        let (na0, na1, nb0, nb1) = (1.0 - a0, 1.0 - a1, 1.0 - b0, 1.0 - b1);
        let printed: [[f64; 4]; 4] = [
            [a0 * b0, a0 * nb1, na1 * b0, na1 * nb1],
            [a0 * nb0, a0 * b1, na1 * nb0, na1 * b1],
            [na0 * b0, na0 * nb1, a1 * b0, a1 * nb1],
            [na0 * nb0, na0 * b1, a1 * nb0, a1 * b1],
        ];
        let ideal = [0.5, 0.0, 0.5, 0.0];
        let p01: f64 = (0..4).map(|col| printed[1][col] * ideal[col]).sum();
        let expected = 1.0 - (2.0 * p01).sqrt();

        let got = doubling_ceiling(&ReadoutConfusion::DEFAULT).unwrap();
        assert!((got - expected).abs() < 1e-15);

        // The module's matrix equals the printed matrix entry for entry.
        let m = confusion_matrix(&ReadoutConfusion::DEFAULT);
        for row in 0..4 {
            for col in 0..4 {
                assert!((m[row][col] - printed[row][col]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ceiling_errors_on_nonsense_parameters() {
        // b0 = 0, a0 = 1, a1 = 0 sends P'(01) to 1.
        let c = ReadoutConfusion::new(1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            doubling_ceiling(&c),
            Err(NoiseError::CeilingUndefined { .. })
        ));
    }

    #[test]
    fn ceiling_is_monotone_in_misassignment() {
        // Growing 1-b0 (or 1-a1) with the other parameters fixed strictly
        // lowers the ceiling.
        let mut previous = f64::INFINITY;
        for k in 0..6 {
            let b0 = 1.0 - 0.01 * k as f64;
            let c = ReadoutConfusion::new(0.995, 0.985, b0, 0.985).unwrap();
            let ceiling = doubling_ceiling(&c).unwrap();
            assert!(ceiling < previous);
            previous = ceiling;
        }
        let mut previous = f64::INFINITY;
        for k in 0..6 {
            let a1 = 1.0 - 0.01 * k as f64;
            let c = ReadoutConfusion::new(0.995, a1, 0.995, 0.985).unwrap();
            let ceiling = doubling_ceiling(&c).unwrap();
            assert!(ceiling < previous);
            previous = ceiling;
        }
    }

    proptest! {
        #[test]
        fn columns_sum_to_one(
            a0 in 0.0f64..=1.0, a1 in 0.0f64..=1.0,
            b0 in 0.0f64..=1.0, b1 in 0.0f64..=1.0,
        ) {
            let c = ReadoutConfusion::new(a0, a1, b0, b1).unwrap();
            let m = confusion_matrix(&c);
            for col in 0..4 {
                let sum: f64 = m.iter().map(|row| row[col]).sum();
                prop_assert!((sum - 1.0).abs() <= NORM_TOL);
            }
        }

        #[test]
        fn channel_is_linear(
            a0 in 0.0f64..=1.0, a1 in 0.0f64..=1.0,
            b0 in 0.0f64..=1.0, b1 in 0.0f64..=1.0,
            w in 0.0f64..=1.0, alpha in 0.0f64..=1.0,
        ) {
            let c = ReadoutConfusion::new(a0, a1, b0, b1).unwrap();
            let p = ProbVector4::new([w / 2.0, 0.5 - w / 2.0, 0.25, 0.25]).unwrap();
            let q = ProbVector4::new([0.25, 0.25, w / 2.0, 0.5 - w / 2.0]).unwrap();
            let mix_entries: Vec<f64> = p
                .entries()
                .iter()
                .zip(q.entries())
                .map(|(pi, qi)| alpha * pi + (1.0 - alpha) * qi)
                .collect();
            let mix = ProbVector4::new([
                mix_entries[0], mix_entries[1], mix_entries[2], mix_entries[3],
            ]).unwrap();

            let lhs = apply_confusion(&mix, &c).entries();
            let fp = apply_confusion(&p, &c).entries();
            let fq = apply_confusion(&q, &c).entries();
            for i in 0..4 {
                let rhs = alpha * fp[i] + (1.0 - alpha) * fq[i];
                prop_assert!((lhs[i] - rhs).abs() <= NORM_TOL);
            }
        }

        #[test]
        fn channel_output_is_distribution(
            a0 in 0.0f64..=1.0, a1 in 0.0f64..=1.0,
            b0 in 0.0f64..=1.0, b1 in 0.0f64..=1.0,
            x in 0.0f64..=1.0, y in 0.0f64..=1.0,
        ) {
            let c = ReadoutConfusion::new(a0, a1, b0, b1).unwrap();
            let input = ProbVector4::new([
                x * y, x * (1.0 - y), (1.0 - x) * y, (1.0 - x) * (1.0 - y),
            ]).unwrap();
            let out = apply_confusion(&input, &c);
            prop_assert!(ProbVector4::new(out.entries()).is_ok());
        }
    }
}
