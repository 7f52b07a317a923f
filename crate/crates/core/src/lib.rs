//! Deterministic, seedable simulation of classical and quantum Bernoulli
//! factories built on Bell-basis measurements of quoin pairs.
//!
//! A Bernoulli factory turns flips of a coin with unknown bias `p` into one
//! flip of an `f(p)`-coin without ever estimating `p`. Encoding the bias in
//! qubit amplitudes (a quoin) and jointly measuring two copies in the Bell
//! basis yields, from the same measurement record, an exact fair coin at two
//! quoins per output, the classically inconstructible `4p(1-p)` at four, and
//! — via a Catalan-walk square root — the doubling function `2·min(p, 1-p)`.
//!
//! The crate is organized around that pipeline:
//!
//! - [`quantum`]: exact two-qubit state vectors, the measurement circuit and
//!   its closed-form outcome law, seeded sampling.
//! - [`noise`]: per-qubit readout misassignment, the induced confusion
//!   matrix, and the ceiling it imposes on the doubling function.
//! - [`factories`]: the coin-producing protocols with exact cost ledgers.
//! - [`analysis`]: estimators, goodness-of-fit, closed-form targets and the
//!   series oracle used as test-time ground truth, plus bias sweeps.
//!
//! Everything stochastic draws from an explicit [`rng::RngStream`], so any
//! result is bit-for-bit reproducible from its `(seed, stream)` coordinates.

pub mod analysis;
pub mod factories;
pub mod noise;
pub mod quantum;
pub mod rng;

pub use analysis::sweep::{run_bell_sweep, SweepResult, SweepRow};
pub use analysis::{estimate_bias, BiasEstimate, GofReport};
pub use factories::{
    run_factory, CoinRecord, FactoryConfig, FactoryRun, ProtocolKind, RunSpec, StreamMode,
    TossLedger,
};
pub use noise::{doubling_ceiling, ReadoutConfusion};
pub use quantum::{BellOutcome, OutcomeDistribution, QuoinBias, TwoQubitState};
pub use rng::RngStream;
