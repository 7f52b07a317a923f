//! Coin-producing protocols with exact cost accounting.
//!
//! Classical von Neumann extraction, the single-qubit and Bell-measurement
//! fair coins, the conditional coins `4p(1-p)` and `(1-2p)²`, the
//! Catalan-walk √q construction, and the doubling pipeline composed from
//! them. Every protocol threads a [`TossLedger`] so quoin and coin
//! consumption is counted once, at the site where it happens.

mod source;

pub use source::{
    fair_bit, squared_diff_bit, BellFairSource, BellSampler, BiasedCoin, CoinRole, CoinSource,
    ConditionalCoinSource, PairedSource, RecordedStream, SharedBellSource, TwoSources,
};

use serde::Serialize;
use thiserror::Error;

use crate::noise::ReadoutConfusion;
use crate::quantum::{apply_ry, measure_z, prepare_quoin, BellOutcome, QuoinBias};
use crate::rng::RngStream;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FactoryError {
    #[error(
        "fair-coin walk hit the {max_steps}-step cap without stopping \
         (per-walk probability <= {tail_bound:.3e})"
    )]
    WalkCapExceeded { max_steps: u64, tail_bound: f64 },
    #[error("rejection loop exceeded {max_attempts} attempts without an acceptance")]
    RejectionCapExceeded { max_attempts: u64 },
    #[error("recorded stream exhausted after {yielded} bits")]
    SourceExhausted { yielded: u64 },
    #[error("batch requires n >= 1")]
    EmptyBatch,
    #[error("bias must lie in [0, 1], got {0}")]
    InvalidBias(f64),
}

/// Exact counters of consumption and production within one execution.
///
/// All counters are monotone nondecreasing over a run; a [`CoinRecord`]
/// snapshots their cumulative values at production time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TossLedger {
    pub quoins_consumed: u64,
    pub fair_coins_consumed: u64,
    pub input_coins_consumed: u64,
    pub outputs_produced: u64,
}

impl TossLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn charge(&mut self, role: CoinRole, count: u64) {
        match role {
            CoinRole::Input => self.input_coins_consumed += count,
            CoinRole::Fair => self.fair_coins_consumed += count,
        }
    }

    /// Counter-wise difference from an earlier snapshot of the same run.
    pub fn delta_since(&self, earlier: &TossLedger) -> TossLedger {
        TossLedger {
            quoins_consumed: self.quoins_consumed - earlier.quoins_consumed,
            fair_coins_consumed: self.fair_coins_consumed - earlier.fair_coins_consumed,
            input_coins_consumed: self.input_coins_consumed - earlier.input_coins_consumed,
            outputs_produced: self.outputs_produced - earlier.outputs_produced,
        }
    }
}

/// Termination caps for the probability-one but unbounded loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactoryConfig {
    /// Cap on the √q fair-coin walk length.
    pub max_walk_steps: u64,
    /// Cap on consecutive rejections in conditional loops, on von Neumann
    /// pair attempts, and on per-output walk retries in batch runs.
    pub max_rejections: u64,
}

impl FactoryConfig {
    pub fn new(max_walk_steps: u64, max_rejections: u64) -> Self {
        assert!(max_walk_steps >= 1 && max_rejections >= 1, "caps must be >= 1");
        Self {
            max_walk_steps,
            max_rejections,
        }
    }
}

impl Default for FactoryConfig {
    fn default() -> Self {
        Self {
            max_walk_steps: 1_000_000,
            max_rejections: 1_000_000,
        }
    }
}

/// One produced coin plus the cumulative ledger at production time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoinRecord {
    /// 1 = heads, 0 = tails.
    pub bit: u8,
    pub ledger: TossLedger,
}

/// Upper bound on the probability that the symmetric walk is still running
/// after `steps` flips: `C(2m, m)/4^m <= 1/sqrt(π·m)` at `m = steps/2`.
pub fn walk_tail_bound(steps: u64) -> f64 {
    (2.0 / (std::f64::consts::PI * steps as f64)).sqrt().min(1.0)
}

/// Von Neumann extraction: toss the source twice, output the second toss of
/// the first unequal pair.
///
/// Errors after `max_rejections` matching pairs, which signals a bias at or
/// near 0 or 1, or a degenerate source.
pub fn von_neumann(
    source: &mut dyn CoinSource,
    config: &FactoryConfig,
    rng: &mut RngStream,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    for _ in 0..config.max_rejections {
        let first = source.pull(rng, ledger)?;
        let second = source.pull(rng, ledger)?;
        if first != second {
            ledger.outputs_produced += 1;
            return Ok(CoinRecord {
                bit: second,
                ledger: *ledger,
            });
        }
    }
    Err(FactoryError::RejectionCapExceeded {
        max_attempts: config.max_rejections,
    })
}

/// Single-qubit fair coin: measure the quoin along z, rotate the collapsed
/// state by `Y(π/2)`, measure again and output the second result.
///
/// Works for every `p` including 0 and 1; costs exactly two measurements,
/// booked as two quoins.
pub fn single_qubit_fair_coin(
    p: QuoinBias,
    rng: &mut RngStream,
    ledger: &mut TossLedger,
) -> CoinRecord {
    let quoin = prepare_quoin(p);
    let (_, collapsed) = measure_z(&quoin, rng);
    let rotated = apply_ry(&collapsed, std::f64::consts::FRAC_PI_2);
    let (bit, _) = measure_z(&rotated, rng);
    ledger.quoins_consumed += 2;
    ledger.outputs_produced += 1;
    CoinRecord {
        bit,
        ledger: *ledger,
    }
}

/// Bell-measurement fair coin: heads iff the outcome is `Φ+` or `Ψ-`.
/// Exactly two quoins per output, bias exactly 1/2, for every `p`.
pub fn bell_fair_coin(p: QuoinBias, rng: &mut RngStream, ledger: &mut TossLedger) -> CoinRecord {
    fair_coin_with(&BellSampler::ideal(p), rng, ledger)
}

/// [`bell_fair_coin`] over an arbitrary (possibly noisy) sampler.
pub fn fair_coin_with(
    sampler: &BellSampler,
    rng: &mut RngStream,
    ledger: &mut TossLedger,
) -> CoinRecord {
    let bit = fair_bit(sampler.sample(rng, ledger));
    ledger.outputs_produced += 1;
    CoinRecord {
        bit,
        ledger: *ledger,
    }
}

/// The `4p(1-p)` coin: draw Bell outcomes until one lands in `{Φ-, Ψ+}`,
/// output heads on `Ψ+`. Four quoins per output on average, at every `p`.
pub fn frown_coin(
    p: QuoinBias,
    rng: &mut RngStream,
    config: &FactoryConfig,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    frown_coin_with(&BellSampler::ideal(p), rng, config, ledger)
}

/// [`frown_coin`] over an arbitrary sampler.
pub fn frown_coin_with(
    sampler: &BellSampler,
    rng: &mut RngStream,
    config: &FactoryConfig,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    let accepted = conditional_outcome(sampler, rng, config, ledger)?;
    let bit = u8::from(accepted == BellOutcome::PsiPlus);
    ledger.outputs_produced += 1;
    Ok(CoinRecord {
        bit,
        ledger: *ledger,
    })
}

/// The `(1-2p)²` coin: same rejection loop as the frown coin, heads on `Φ-`.
pub fn squared_diff_coin(
    p: QuoinBias,
    rng: &mut RngStream,
    config: &FactoryConfig,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    squared_diff_coin_with(&BellSampler::ideal(p), rng, config, ledger)
}

/// [`squared_diff_coin`] over an arbitrary sampler.
pub fn squared_diff_coin_with(
    sampler: &BellSampler,
    rng: &mut RngStream,
    config: &FactoryConfig,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    let accepted = conditional_outcome(sampler, rng, config, ledger)?;
    let bit = u8::from(accepted == BellOutcome::PhiMinus);
    ledger.outputs_produced += 1;
    Ok(CoinRecord {
        bit,
        ledger: *ledger,
    })
}

fn conditional_outcome(
    sampler: &BellSampler,
    rng: &mut RngStream,
    config: &FactoryConfig,
    ledger: &mut TossLedger,
) -> Result<BellOutcome, FactoryError> {
    for _ in 0..config.max_rejections {
        let outcome = sampler.sample(rng, ledger);
        if squared_diff_bit(outcome).is_some() {
            return Ok(outcome);
        }
    }
    Err(FactoryError::RejectionCapExceeded {
        max_attempts: config.max_rejections,
    })
}

/// The √q construction: flip fair coins until heads first strictly exceed
/// tails (at step `2n+1` with probability `C_n/2^(2n+1)`), then flip the
/// q-coin `n+1` times; tails iff all of those are tails. `P(heads) = √q`.
pub fn sqrt_coin(
    q_source: &mut dyn CoinSource,
    fair_source: &mut dyn CoinSource,
    config: &FactoryConfig,
    rng: &mut RngStream,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    let mut pair = TwoSources {
        fair: fair_source,
        q: q_source,
    };
    let bit = sqrt_engine(&mut pair, config, rng, ledger)?;
    ledger.outputs_produced += 1;
    Ok(CoinRecord {
        bit,
        ledger: *ledger,
    })
}

/// How the doubling pipeline feeds its √q stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum StreamMode {
    /// Fair coins and conditional coins come from separate Bell-shot
    /// streams; the √q correctness argument is exact.
    #[default]
    Independent,
    /// Fair bit and conditional event are read off the same shots, as the
    /// hardware data path allows. Statistically coupled; see
    /// [`SharedBellSource`].
    Shared,
}

/// Bernoulli doubling `f(p) = 2·min(p, 1-p)`: take the √ of the `(1-2p)²`
/// coin via the walk construction, then invert the output bit.
///
/// All randomness comes from Bell measurements of quoin pairs; the ledger
/// aggregates quoins across the whole pipeline.
pub fn doubling_coin(
    p: QuoinBias,
    rng: &mut RngStream,
    config: &FactoryConfig,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    doubling_coin_with(
        &BellSampler::ideal(p),
        rng,
        config,
        StreamMode::Independent,
        ledger,
    )
}

/// [`doubling_coin`] over an arbitrary sampler and stream mode.
pub fn doubling_coin_with(
    sampler: &BellSampler,
    rng: &mut RngStream,
    config: &FactoryConfig,
    mode: StreamMode,
    ledger: &mut TossLedger,
) -> Result<CoinRecord, FactoryError> {
    let sqrt_bit = match mode {
        StreamMode::Independent => {
            let mut pair = IndependentBellPair { sampler, config };
            sqrt_engine(&mut pair, config, rng, ledger)?
        }
        StreamMode::Shared => {
            let mut shared = SharedBellSource::new(sampler.clone(), config);
            sqrt_engine(&mut shared, config, rng, ledger)?
        }
    };
    ledger.outputs_produced += 1;
    Ok(CoinRecord {
        bit: 1 - sqrt_bit,
        ledger: *ledger,
    })
}

/// Fresh Bell shots for each role, drawn from the one stream threaded
/// through the protocol.
struct IndependentBellPair<'a> {
    sampler: &'a BellSampler,
    config: &'a FactoryConfig,
}

impl PairedSource for IndependentBellPair<'_> {
    fn pull_fair(
        &mut self,
        rng: &mut RngStream,
        ledger: &mut TossLedger,
    ) -> Result<u8, FactoryError> {
        ledger.fair_coins_consumed += 1;
        Ok(fair_bit(self.sampler.sample(rng, ledger)))
    }

    fn pull_q(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError> {
        for _ in 0..self.config.max_rejections {
            if let Some(bit) = squared_diff_bit(self.sampler.sample(rng, ledger)) {
                ledger.input_coins_consumed += 1;
                return Ok(bit);
            }
        }
        Err(FactoryError::RejectionCapExceeded {
            max_attempts: self.config.max_rejections,
        })
    }
}

/// Walk-then-flip core of the √q construction. Returns the output bit
/// without booking an output.
fn sqrt_engine<P: PairedSource>(
    sources: &mut P,
    config: &FactoryConfig,
    rng: &mut RngStream,
    ledger: &mut TossLedger,
) -> Result<u8, FactoryError> {
    let mut excess: i64 = 0;
    let mut steps: u64 = 0;
    loop {
        if steps >= config.max_walk_steps {
            return Err(FactoryError::WalkCapExceeded {
                max_steps: config.max_walk_steps,
                tail_bound: walk_tail_bound(steps),
            });
        }
        let bit = sources.pull_fair(rng, ledger)?;
        steps += 1;
        excess += if bit == 1 { 1 } else { -1 };
        if excess > 0 {
            break;
        }
    }
    // Stop at step 2n+1 means n+1 q-coin flips, all of them drawn: the
    // protocol's cost model does not short-circuit on an early heads.
    let n = (steps - 1) / 2;
    let mut any_heads = false;
    for _ in 0..=n {
        if sources.pull_q(rng, ledger)? == 1 {
            any_heads = true;
        }
    }
    Ok(u8::from(any_heads))
}

/// Protocol selector for batch runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProtocolKind {
    VonNeumann,
    SingleQubitFair,
    BellFair,
    Frown,
    SquaredDiff,
    Doubling,
}

/// Parameters of one batch run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunSpec {
    pub kind: ProtocolKind,
    /// Quoin bias for the quantum protocols, source bias for von Neumann.
    pub p: f64,
    pub n: u64,
    pub seed: u64,
    /// Stream ordinal under `seed`; grid drivers give each point its own.
    pub stream: u64,
    pub config: FactoryConfig,
    /// Applied to every Bell sample of the Bell-backed kinds; the classical
    /// and single-qubit kinds have no bit-pair record to corrupt.
    pub noise: Option<ReadoutConfusion>,
    pub mode: StreamMode,
}

impl RunSpec {
    pub fn new(kind: ProtocolKind, p: f64, n: u64, seed: u64) -> Self {
        Self {
            kind,
            p,
            n,
            seed,
            stream: 0,
            config: FactoryConfig::default(),
            noise: None,
            mode: StreamMode::Independent,
        }
    }
}

/// Walk-cap events absorbed by a batch run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    /// Number of abandoned walks.
    pub events: u64,
    pub max_steps: u64,
    /// Upper bound on a single walk hitting the cap.
    pub per_event_probability: f64,
}

/// Outcome of a batch run. `records` is partial when `error` is set.
#[derive(Debug, Clone)]
pub struct FactoryRun {
    pub records: Vec<CoinRecord>,
    pub ledger: TossLedger,
    pub truncation: Option<TruncationReport>,
    pub error: Option<FactoryError>,
}

impl FactoryRun {
    pub fn bits(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.bit).collect()
    }

    pub fn heads(&self) -> u64 {
        self.records.iter().filter(|r| r.bit == 1).count() as u64
    }
}

/// Produce `n` coins of the selected protocol, deterministically in `seed`.
///
/// The infinite-mean walk makes occasional cap hits a statistical certainty
/// in large doubling batches, so a walk that hits its cap is booked as a
/// truncation event (its consumption stays in the ledger) and the output is
/// retried, up to `max_rejections` retries per output. All other protocol
/// errors abort the batch, returning the records produced so far together
/// with the error.
pub fn run_factory(spec: &RunSpec) -> Result<FactoryRun, FactoryError> {
    if spec.n == 0 {
        return Err(FactoryError::EmptyBatch);
    }
    let bias = QuoinBias::new(spec.p).map_err(|_| FactoryError::InvalidBias(spec.p))?;

    let mut rng = RngStream::new(spec.seed, spec.stream);
    let mut ledger = TossLedger::new();
    let mut records = Vec::with_capacity(spec.n as usize);
    let mut truncation_events = 0u64;
    let mut error = None;

    let sampler = BellSampler::with_noise(bias, spec.noise);
    let mut von_neumann_source = BiasedCoin::new(spec.p);

    'outputs: for _ in 0..spec.n {
        let mut retries = 0u64;
        let record = loop {
            let produced = match spec.kind {
                ProtocolKind::VonNeumann => von_neumann(
                    &mut von_neumann_source,
                    &spec.config,
                    &mut rng,
                    &mut ledger,
                ),
                ProtocolKind::SingleQubitFair => {
                    Ok(single_qubit_fair_coin(bias, &mut rng, &mut ledger))
                }
                ProtocolKind::BellFair => Ok(fair_coin_with(&sampler, &mut rng, &mut ledger)),
                ProtocolKind::Frown => {
                    frown_coin_with(&sampler, &mut rng, &spec.config, &mut ledger)
                }
                ProtocolKind::SquaredDiff => {
                    squared_diff_coin_with(&sampler, &mut rng, &spec.config, &mut ledger)
                }
                ProtocolKind::Doubling => doubling_coin_with(
                    &sampler,
                    &mut rng,
                    &spec.config,
                    spec.mode,
                    &mut ledger,
                ),
            };
            match produced {
                Ok(record) => break record,
                Err(FactoryError::WalkCapExceeded { .. }) if retries < spec.config.max_rejections => {
                    truncation_events += 1;
                    retries += 1;
                }
                Err(e) => {
                    error = Some(e);
                    break 'outputs;
                }
            }
        };
        records.push(record);
    }

    let truncation = (truncation_events > 0).then(|| TruncationReport {
        events: truncation_events,
        max_steps: spec.config.max_walk_steps,
        per_event_probability: walk_tail_bound(spec.config.max_walk_steps),
    });
    Ok(FactoryRun {
        records,
        ledger,
        truncation,
        error,
    })
}
