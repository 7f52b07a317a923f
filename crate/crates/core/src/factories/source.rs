//! Pull-based coin suppliers.
//!
//! Every source records its own consumption in the ledger threaded through
//! the execution: classical sources bump a coin counter (fair or input,
//! depending on the role they were built for), Bell-backed sources bump the
//! quoin counter by two per joint measurement plus the coin counter of the
//! coin they deliver.

use std::collections::VecDeque;

use crate::factories::{FactoryConfig, FactoryError, TossLedger};
use crate::noise::{sample_misassigned, ReadoutConfusion};
use crate::quantum::{map_bits_to_bell, sample_bell, BellOutcome, QuoinBias};
use crate::rng::RngStream;

/// Which ledger counter a classical source's pulls are charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinRole {
    /// Input coins of some bias, e.g. the p-coins fed to von Neumann
    /// extraction or the q-coins fed to the √q construction.
    Input,
    /// Fair coins driving the √q walk.
    Fair,
}

/// A supplier of bits with declared per-pull cost accounting.
pub trait CoinSource {
    fn pull(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError>;
}

/// Simulated classical coin of fixed bias.
#[derive(Debug, Clone)]
pub struct BiasedCoin {
    p: f64,
    role: CoinRole,
}

impl BiasedCoin {
    /// An input coin with heads probability `p`.
    pub fn new(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "bias must lie in [0, 1]");
        Self {
            p,
            role: CoinRole::Input,
        }
    }

    /// A fair coin charged to the fair-coin counter.
    pub fn fair() -> Self {
        Self {
            p: 0.5,
            role: CoinRole::Fair,
        }
    }

    pub fn with_role(p: f64, role: CoinRole) -> Self {
        let mut coin = Self::new(p);
        coin.role = role;
        coin
    }
}

impl CoinSource for BiasedCoin {
    fn pull(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError> {
        ledger.charge(self.role, 1);
        Ok(u8::from(rng.bernoulli(self.p)))
    }
}

/// Replayable recorded bit stream; errors when exhausted.
#[derive(Debug, Clone)]
pub struct RecordedStream {
    bits: Vec<u8>,
    position: usize,
    role: CoinRole,
}

impl RecordedStream {
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Self {
            bits,
            position: 0,
            role: CoinRole::Input,
        }
    }

    pub fn with_role(bits: Vec<u8>, role: CoinRole) -> Self {
        let mut stream = Self::new(bits);
        stream.role = role;
        stream
    }

    /// Rewind to the first bit for replay.
    pub fn reset(&mut self) {
        self.position = 0;
    }
}

impl CoinSource for RecordedStream {
    fn pull(&mut self, _rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError> {
        let bit = *self
            .bits
            .get(self.position)
            .ok_or(FactoryError::SourceExhausted {
                yielded: self.position as u64,
            })?;
        self.position += 1;
        ledger.charge(self.role, 1);
        Ok(bit)
    }
}

/// Bell-measurement primitive shared by the quantum protocols: one joint
/// measurement of a quoin pair, optionally corrupted by readout noise.
#[derive(Debug, Clone)]
pub struct BellSampler {
    p: QuoinBias,
    noise: Option<ReadoutConfusion>,
}

impl BellSampler {
    pub fn ideal(p: QuoinBias) -> Self {
        Self { p, noise: None }
    }

    pub fn with_noise(p: QuoinBias, noise: Option<ReadoutConfusion>) -> Self {
        Self { p, noise }
    }

    pub fn bias(&self) -> QuoinBias {
        self.p
    }

    /// One joint measurement. Consumes two quoins; misassignment, when
    /// configured, flips the recorded bit pair before outcome mapping.
    pub fn sample(&self, rng: &mut RngStream, ledger: &mut TossLedger) -> BellOutcome {
        ledger.quoins_consumed += 2;
        let outcome = sample_bell(self.p, rng);
        match &self.noise {
            None => outcome,
            Some(c) => {
                let (r1, r2) = sample_misassigned(outcome.to_bits(), c, rng);
                map_bits_to_bell(r1, r2)
            }
        }
    }
}

/// Heads iff the outcome lies in the fair-coin event `{Φ+, Ψ-}`.
pub fn fair_bit(outcome: BellOutcome) -> u8 {
    match outcome {
        BellOutcome::PhiPlus | BellOutcome::PsiMinus => 1,
        BellOutcome::PhiMinus | BellOutcome::PsiPlus => 0,
    }
}

/// The conditional-coin bit of an accepted outcome: heads iff `Φ-`, tails
/// iff `Ψ+`, `None` outside the conditioning event.
pub fn squared_diff_bit(outcome: BellOutcome) -> Option<u8> {
    match outcome {
        BellOutcome::PhiMinus => Some(1),
        BellOutcome::PsiPlus => Some(0),
        _ => None,
    }
}

/// Bell-measurement-backed fair coin: one shot per bit, two quoins per shot.
#[derive(Debug, Clone)]
pub struct BellFairSource {
    sampler: BellSampler,
}

impl BellFairSource {
    pub fn new(sampler: BellSampler) -> Self {
        Self { sampler }
    }
}

impl CoinSource for BellFairSource {
    fn pull(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError> {
        ledger.fair_coins_consumed += 1;
        Ok(fair_bit(self.sampler.sample(rng, ledger)))
    }
}

/// Bell-measurement-backed conditional coin: rejection-samples shots until
/// one lands in `{Φ-, Ψ+}` and reports heads on `Φ-`, so the delivered bias
/// is `(1-2p)²` with an average cost of four quoins.
#[derive(Debug, Clone)]
pub struct ConditionalCoinSource {
    sampler: BellSampler,
    max_rejections: u64,
}

impl ConditionalCoinSource {
    pub fn new(sampler: BellSampler, config: &FactoryConfig) -> Self {
        Self {
            sampler,
            max_rejections: config.max_rejections,
        }
    }
}

impl CoinSource for ConditionalCoinSource {
    fn pull(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError> {
        for _ in 0..self.max_rejections {
            if let Some(bit) = squared_diff_bit(self.sampler.sample(rng, ledger)) {
                ledger.input_coins_consumed += 1;
                return Ok(bit);
            }
        }
        Err(FactoryError::RejectionCapExceeded {
            max_attempts: self.max_rejections,
        })
    }
}

/// A fair-coin supply and a q-coin supply consumed by one √q construction.
pub trait PairedSource {
    fn pull_fair(&mut self, rng: &mut RngStream, ledger: &mut TossLedger)
        -> Result<u8, FactoryError>;
    fn pull_q(&mut self, rng: &mut RngStream, ledger: &mut TossLedger)
        -> Result<u8, FactoryError>;
}

/// Two independent sources, one per role.
pub struct TwoSources<'a> {
    pub fair: &'a mut dyn CoinSource,
    pub q: &'a mut dyn CoinSource,
}

impl PairedSource for TwoSources<'_> {
    fn pull_fair(
        &mut self,
        rng: &mut RngStream,
        ledger: &mut TossLedger,
    ) -> Result<u8, FactoryError> {
        self.fair.pull(rng, ledger)
    }

    fn pull_q(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError> {
        self.q.pull(rng, ledger)
    }
}

/// Both roles served by a single stream of Bell shots: each shot yields a
/// fair bit and, when it lands in the conditioning event, a conditional bit,
/// and both products are queued for later pulls so no shot is wasted.
///
/// This mirrors reusing the hardware measurement record for both purposes,
/// and is statistically coupled: the fair bits buffered while scanning for a
/// conditional acceptance are exactly the rejected `{Φ+, Ψ-}` shots, so they
/// are not independent of the conditional stream. The independent-stream
/// mode is the one with an exact correctness argument.
pub struct SharedBellSource {
    sampler: BellSampler,
    max_rejections: u64,
    fair_queue: VecDeque<u8>,
    q_queue: VecDeque<u8>,
}

impl SharedBellSource {
    pub fn new(sampler: BellSampler, config: &FactoryConfig) -> Self {
        Self {
            sampler,
            max_rejections: config.max_rejections,
            fair_queue: VecDeque::new(),
            q_queue: VecDeque::new(),
        }
    }

    fn draw_shot(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) {
        let outcome = self.sampler.sample(rng, ledger);
        self.fair_queue.push_back(fair_bit(outcome));
        if let Some(bit) = squared_diff_bit(outcome) {
            self.q_queue.push_back(bit);
        }
    }
}

impl PairedSource for SharedBellSource {
    fn pull_fair(
        &mut self,
        rng: &mut RngStream,
        ledger: &mut TossLedger,
    ) -> Result<u8, FactoryError> {
        if self.fair_queue.is_empty() {
            self.draw_shot(rng, ledger);
        }
        ledger.fair_coins_consumed += 1;
        Ok(self.fair_queue.pop_front().expect("shot yields a fair bit"))
    }

    fn pull_q(&mut self, rng: &mut RngStream, ledger: &mut TossLedger) -> Result<u8, FactoryError> {
        let mut attempts = 0u64;
        while self.q_queue.is_empty() {
            if attempts >= self.max_rejections {
                return Err(FactoryError::RejectionCapExceeded {
                    max_attempts: self.max_rejections,
                });
            }
            self.draw_shot(rng, ledger);
            attempts += 1;
        }
        ledger.input_coins_consumed += 1;
        Ok(self.q_queue.pop_front().expect("nonempty"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorded_stream_replays_and_exhausts() {
        let mut rng = RngStream::new(0, 0);
        let mut ledger = TossLedger::default();
        let mut stream = RecordedStream::new(vec![1, 0, 1]);
        assert_eq!(stream.pull(&mut rng, &mut ledger).unwrap(), 1);
        assert_eq!(stream.pull(&mut rng, &mut ledger).unwrap(), 0);
        assert_eq!(stream.pull(&mut rng, &mut ledger).unwrap(), 1);
        assert!(matches!(
            stream.pull(&mut rng, &mut ledger),
            Err(FactoryError::SourceExhausted { yielded: 3 })
        ));
        stream.reset();
        assert_eq!(stream.pull(&mut rng, &mut ledger).unwrap(), 1);
        assert_eq!(ledger.input_coins_consumed, 4);
    }

    #[test]
    fn biased_coin_charges_declared_role() {
        let mut rng = RngStream::new(1, 0);
        let mut ledger = TossLedger::default();
        BiasedCoin::new(0.3).pull(&mut rng, &mut ledger).unwrap();
        assert_eq!(ledger.input_coins_consumed, 1);
        assert_eq!(ledger.fair_coins_consumed, 0);
        BiasedCoin::fair().pull(&mut rng, &mut ledger).unwrap();
        assert_eq!(ledger.fair_coins_consumed, 1);
    }

    #[test]
    fn bell_fair_source_costs_two_quoins_per_bit() {
        let sampler = BellSampler::ideal(QuoinBias::new(0.3).unwrap());
        let mut source = BellFairSource::new(sampler);
        let mut rng = RngStream::new(2, 0);
        let mut ledger = TossLedger::default();
        for _ in 0..100 {
            source.pull(&mut rng, &mut ledger).unwrap();
        }
        assert_eq!(ledger.quoins_consumed, 200);
        assert_eq!(ledger.fair_coins_consumed, 100);
    }

    #[test]
    fn conditional_source_rejects_until_acceptance() {
        let sampler = BellSampler::ideal(QuoinBias::new(0.5).unwrap());
        let mut source = ConditionalCoinSource::new(sampler, &FactoryConfig::default());
        let mut rng = RngStream::new(3, 0);
        let mut ledger = TossLedger::default();
        // At p = 1/2 the conditional event is Ψ+ only, so the bit is always 0.
        for _ in 0..200 {
            assert_eq!(source.pull(&mut rng, &mut ledger).unwrap(), 0);
        }
        assert_eq!(ledger.input_coins_consumed, 200);
        assert!(ledger.quoins_consumed >= 400);
    }

    #[test]
    fn shared_source_reuses_rejected_shots() {
        let sampler = BellSampler::ideal(QuoinBias::new(0.3).unwrap());
        let mut source = SharedBellSource::new(sampler, &FactoryConfig::default());
        let mut rng = RngStream::new(4, 0);
        let mut ledger = TossLedger::default();
        source.pull_q(&mut rng, &mut ledger).unwrap();
        let quoins_after_q = ledger.quoins_consumed;
        // Every shot drawn during the scan also queued a fair bit.
        let buffered = quoins_after_q / 2;
        for _ in 0..buffered {
            source.pull_fair(&mut rng, &mut ledger).unwrap();
        }
        assert_eq!(ledger.quoins_consumed, quoins_after_q);
    }
}
