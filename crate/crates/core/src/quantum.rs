//! Exact two-qubit state-vector simulation of quoin preparation and
//! Bell-basis measurement.
//!
//! A quoin of bias `p` is the single-qubit state `√(1-p)|0⟩ + √p|1⟩`
//! (|0⟩ = tails, |1⟩ = heads). Measuring a pair of identical quoins in the
//! Bell basis yields outcome probabilities
//!
//! ```text
//! P(Φ+) = 1/2     P(Φ-) = (1-2p)²/2     P(Ψ+) = 2p(1-p)     P(Ψ-) = 0
//! ```
//!
//! which every factory protocol in this crate consumes. The measurement is
//! realized as a circuit — CNOT with the first qubit as control, then a
//! Hadamard on the first qubit, then a computational-basis readout — and the
//! readout maps to Bell labels as `00→Φ+, 01→Φ-, 10→Ψ+, 11→Ψ-`.
//!
//! Two-qubit basis labels are written `b1 b2` where `b2`, the low-order bit,
//! is the first (control) qubit, matching the hardware bit order that the
//! outcome mapping above assumes.
//!
//! Only the gates the protocols need exist here: `Ry(θ)`, Hadamard, CNOT and
//! Z measurement. Amplitudes are stored as complex pairs even though every
//! state in the protocols is real, so gate composition stays generic.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::rng::RngStream;

/// Tolerance for all closed-form identities on amplitudes and probabilities.
pub const NORM_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("bias must lie in [0, 1], got {value}")]
    InvalidBias { value: f64 },
    #[error("state norm² deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotADistribution { sum: f64 },
}

/// Heads probability of a quoin, restricted to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct QuoinBias(f64);

impl QuoinBias {
    pub fn new(p: f64) -> Result<Self, QuantumError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(QuantumError::InvalidBias { value: p });
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Preparation angle `θ = 2·asin(√p)`: `Ry(θ)|0⟩` is the `p`-quoin.
    pub fn theta(self) -> f64 {
        2.0 * self.0.sqrt().asin()
    }
}

/// Single-qubit state `amp0|0⟩ + amp1|1⟩`, unit norm within [`NORM_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneQubitState {
    amp0: Complex64,
    amp1: Complex64,
}

impl OneQubitState {
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self, QuantumError> {
        let state = Self { amp0, amp1 };
        let deviation = (state.norm_sq() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(QuantumError::NotNormalized { deviation });
        }
        Ok(state)
    }

    pub fn zero() -> Self {
        Self {
            amp0: Complex64::new(1.0, 0.0),
            amp1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    pub fn norm_sq(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    /// Probability of reading `1` in a Z measurement.
    pub fn prob_one(&self) -> f64 {
        self.amp1.norm_sqr()
    }
}

/// The four Bell-basis outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    /// Position in basis-label order `(00, 01, 10, 11)`.
    pub fn index(self) -> usize {
        match self {
            BellOutcome::PhiPlus => 0,
            BellOutcome::PhiMinus => 1,
            BellOutcome::PsiPlus => 2,
            BellOutcome::PsiMinus => 3,
        }
    }

    /// The computational bit pair `(b1, b2)` this outcome is read out as.
    pub fn to_bits(self) -> (u8, u8) {
        let i = self.index();
        ((i >> 1) as u8, (i & 1) as u8)
    }

    pub fn label(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi_plus",
            BellOutcome::PhiMinus => "phi_minus",
            BellOutcome::PsiPlus => "psi_plus",
            BellOutcome::PsiMinus => "psi_minus",
        }
    }
}

/// Computational-to-Bell outcome mapping of the measurement circuit:
/// `00→Φ+, 01→Φ-, 10→Ψ+, 11→Ψ-`.
pub fn map_bits_to_bell(b1: u8, b2: u8) -> BellOutcome {
    assert!(b1 <= 1 && b2 <= 1, "bits must be 0 or 1");
    BellOutcome::ALL[((b1 << 1) | b2) as usize]
}

/// Probability vector over the four Bell outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    probs: [f64; 4],
}

impl OutcomeDistribution {
    pub fn new(probs: [f64; 4]) -> Result<Self, QuantumError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(0.0..=1.0 + NORM_TOL).contains(p)) || (sum - 1.0).abs() > NORM_TOL
        {
            return Err(QuantumError::NotADistribution { sum });
        }
        Ok(Self { probs })
    }

    pub fn prob(&self, outcome: BellOutcome) -> f64 {
        self.probs[outcome.index()]
    }

    /// Probabilities in outcome order `(Φ+, Φ-, Ψ+, Ψ-)`.
    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    /// Draw one outcome. Zero-probability outcomes are never produced, even
    /// under floating-point leakage in the cumulative sum.
    pub fn sample(&self, rng: &mut RngStream) -> BellOutcome {
        let u = rng.next_f64();
        let mut acc = 0.0;
        let mut last_positive = BellOutcome::PhiPlus;
        for outcome in BellOutcome::ALL {
            let p = self.probs[outcome.index()];
            if p > 0.0 {
                acc += p;
                last_positive = outcome;
                if u < acc {
                    return outcome;
                }
            }
        }
        last_positive
    }
}

/// Two-qubit state over basis labels `(00, 01, 10, 11)`; the low-order bit
/// of the label index is the first qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amps: [Complex64; 4]) -> Result<Self, QuantumError> {
        let state = Self { amps };
        let deviation = (state.norm_sq() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(QuantumError::NotNormalized { deviation });
        }
        Ok(state)
    }

    /// Product state with `first` on the low-order (first) qubit.
    pub fn product(first: &OneQubitState, second: &OneQubitState) -> Self {
        let f = [first.amp0(), first.amp1()];
        let s = [second.amp0(), second.amp1()];
        let mut amps = [Complex64::new(0.0, 0.0); 4];
        for (i, amp) in amps.iter_mut().enumerate() {
            *amp = s[i >> 1] * f[i & 1];
        }
        Self { amps }
    }

    pub fn amps(&self) -> [Complex64; 4] {
        self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Computational-basis probabilities in label order `(00, 01, 10, 11)`.
    pub fn probabilities(&self) -> [f64; 4] {
        let mut probs = [0.0; 4];
        for (p, a) in probs.iter_mut().zip(self.amps.iter()) {
            *p = a.norm_sqr();
        }
        probs
    }

    /// Hadamard on the qubit whose label bit is `1 << wire` (wire 0 = first
    /// qubit).
    pub fn apply_hadamard(&self, wire: usize) -> Self {
        assert!(wire < 2, "wire must be 0 or 1");
        let mask = 1usize << wire;
        let mut amps = self.amps;
        for i in 0..4 {
            if i & mask == 0 {
                let j = i | mask;
                let (lo, hi) = (amps[i], amps[j]);
                amps[i] = (lo + hi) * FRAC_1_SQRT_2;
                amps[j] = (lo - hi) * FRAC_1_SQRT_2;
            }
        }
        Self { amps }
    }

    /// CNOT flipping `target`'s label bit when `control`'s label bit is 1.
    pub fn apply_cnot(&self, control: usize, target: usize) -> Self {
        assert!(control < 2 && target < 2 && control != target);
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        let mut amps = self.amps;
        for i in 0..4 {
            if i & cmask != 0 && i & tmask == 0 {
                amps.swap(i, i | tmask);
            }
        }
        Self { amps }
    }
}

/// The quoin state `√(1-p)|0⟩ + √p|1⟩`.
pub fn prepare_quoin(p: QuoinBias) -> OneQubitState {
    OneQubitState {
        amp0: Complex64::new((1.0 - p.value()).sqrt(), 0.0),
        amp1: Complex64::new(p.value().sqrt(), 0.0),
    }
}

/// Rotation about the y axis by `theta` radians.
pub fn apply_ry(state: &OneQubitState, theta: f64) -> OneQubitState {
    let (sin, cos) = (theta / 2.0).sin_cos();
    OneQubitState {
        amp0: state.amp0 * cos - state.amp1 * sin,
        amp1: state.amp0 * sin + state.amp1 * cos,
    }
}

/// Z-basis measurement: returns the bit and the collapsed basis state.
pub fn measure_z(state: &OneQubitState, rng: &mut RngStream) -> (u8, OneQubitState) {
    let one = rng.bernoulli(state.prob_one());
    if one {
        (
            1,
            OneQubitState {
                amp0: Complex64::new(0.0, 0.0),
                amp1: Complex64::new(1.0, 0.0),
            },
        )
    } else {
        (0, OneQubitState::zero())
    }
}

/// The full measurement circuit on a quoin pair: prepare `|p⟩⊗|p⟩`, apply
/// CNOT (first qubit control), then Hadamard on the first qubit.
///
/// The returned state's computational-basis probabilities equal the
/// Bell-basis probabilities of the quoin pair under the outcome mapping.
pub fn bell_circuit(p: QuoinBias) -> TwoQubitState {
    let quoin = prepare_quoin(p);
    TwoQubitState::product(&quoin, &quoin)
        .apply_cnot(0, 1)
        .apply_hadamard(0)
}

/// Closed-form Bell-outcome distribution of a quoin pair.
pub fn bell_distribution(p: QuoinBias) -> OutcomeDistribution {
    let p = p.value();
    let d = 1.0 - 2.0 * p;
    OutcomeDistribution {
        probs: [0.5, d * d / 2.0, 2.0 * p * (1.0 - p), 0.0],
    }
}

/// Draw one Bell outcome for a quoin pair of bias `p`.
///
/// Each call consumes two quoins; the caller's ledger records that.
pub fn sample_bell(p: QuoinBias, rng: &mut RngStream) -> BellOutcome {
    bell_distribution(p).sample(rng)
}
