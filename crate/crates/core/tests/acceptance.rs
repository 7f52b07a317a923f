//! Acceptance suite: one test per verification criterion, each printing a
//! pass line with its headline numbers (run with `--nocapture` to see them).
//!
//! Criterion 9 (manifest-driven reproducibility of the command-line tool)
//! lives in the CLI crate's acceptance suite.

use std::time::Instant;

use quoin_core::analysis::sweep::{even_grid, run_bell_sweep, median_of_sorted};
use quoin_core::analysis::{
    f_frown, f_wedge, sqrt_series_oracle, von_neumann_cost, walk_stopping_probability,
};
use quoin_core::factories::{
    sqrt_coin, BiasedCoin, FactoryConfig, FactoryError, ProtocolKind, RunSpec, TossLedger,
};
use quoin_core::noise::{apply_confusion, doubling_ceiling, ideal_half_distribution};
use quoin_core::quantum::{bell_circuit, bell_distribution, QuoinBias};
use quoin_core::{run_factory, ReadoutConfusion, RngStream};

const SEED: u64 = 20260808;

fn pass(criterion: u32, name: &str, started: Instant, budget_s: f64, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded its {budget_s}s budget: {elapsed:.2}s"
    );
    println!("acceptance {criterion} ({name}): PASS [{elapsed:.2}s] — {detail}");
}

fn five_sigma(p: f64, n: u64) -> f64 {
    5.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn criterion_1_closed_form_equivalence() {
    let started = Instant::now();
    let grid = even_grid(0.0, 1.0, 101).unwrap();
    let mut worst = 0.0f64;
    for &p in &grid {
        let bias = QuoinBias::new(p).unwrap();
        let circuit = bell_circuit(bias).probabilities();
        let closed = bell_distribution(bias).probs();
        for (got, want) in circuit.iter().zip(closed) {
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst <= 1e-12, "worst deviation {worst:.3e}");
    pass(
        1,
        "closed-form equivalence",
        started,
        1.0,
        &format!("101 grid points, worst per-entry deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_2_fair_coin_exactness() {
    let started = Instant::now();
    let n = 200_000u64;
    let band = 5.0 * 0.5 / (n as f64).sqrt();
    let mut worst = 0.0f64;
    for (i, &p) in even_grid(0.0, 1.0, 11).unwrap().iter().enumerate() {
        for (k, kind) in [ProtocolKind::BellFair, ProtocolKind::SingleQubitFair]
            .into_iter()
            .enumerate()
        {
            let seed = SEED + 200 + (2 * i + k) as u64;
            let run = run_factory(&RunSpec::new(kind, p, n, seed)).unwrap();
            assert!(run.error.is_none());
            let p_hat = run.heads() as f64 / n as f64;
            assert!(
                (p_hat - 0.5).abs() <= band,
                "{kind:?} at p = {p}: p_hat = {p_hat}"
            );
            worst = worst.max((p_hat - 0.5).abs());
            assert_eq!(run.ledger.quoins_consumed, 2 * n, "{kind:?} cost at p = {p}");
        }
    }
    pass(
        2,
        "fair-coin exactness",
        started,
        30.0,
        &format!("11 biases x 2 protocols, worst |p_hat - 1/2| = {worst:.4} (band {band:.4}), cost exactly 2"),
    );
}

#[test]
fn criterion_3_frown_bias_and_cost() {
    let started = Instant::now();
    let n = 100_000u64;
    let mut worst_bias_sigmas = 0.0f64;
    let mut worst_cost_rel = 0.0f64;
    for (i, &p) in even_grid(0.05, 0.95, 19).unwrap().iter().enumerate() {
        let run = run_factory(&RunSpec::new(ProtocolKind::Frown, p, n, SEED + 300 + i as u64))
            .unwrap();
        assert!(run.error.is_none());
        let want = f_frown(p);
        let p_hat = run.heads() as f64 / n as f64;
        let band = five_sigma(want, n);
        assert!(
            (p_hat - want).abs() <= band,
            "bias at p = {p}: {p_hat} vs {want}"
        );
        if band > 0.0 {
            worst_bias_sigmas = worst_bias_sigmas.max(5.0 * (p_hat - want).abs() / band);
        }

        let mean_cost = run.ledger.quoins_consumed as f64 / n as f64;
        let rel = (mean_cost - 4.0).abs() / 4.0;
        assert!(rel <= 0.05, "mean cost at p = {p}: {mean_cost}");
        worst_cost_rel = worst_cost_rel.max(rel);
    }
    pass(
        3,
        "frown bias and cost",
        started,
        60.0,
        &format!(
            "19 biases, worst bias deviation {worst_bias_sigmas:.2}σ, worst mean-cost error {:.2}%",
            100.0 * worst_cost_rel
        ),
    );
}

#[test]
fn criterion_4_von_neumann_cost_law() {
    let started = Instant::now();
    let n = 100_000u64;
    let mut details = Vec::new();
    for (i, p) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let run = run_factory(&RunSpec::new(
            ProtocolKind::VonNeumann,
            p,
            n,
            SEED + 400 + i as u64,
        ))
        .unwrap();
        assert!(run.error.is_none());
        let want = von_neumann_cost(p).unwrap();
        let mean = run.ledger.input_coins_consumed as f64 / n as f64;
        assert!(
            (mean - want).abs() <= 0.05 * want,
            "mean coins at p = {p}: {mean} vs {want}"
        );
        details.push(format!("p={p}: {mean:.3} (law {want})"));
    }
    pass(4, "von Neumann cost law", started, 30.0, &details.join(", "));
}

#[test]
fn criterion_5_sqrt_oracle_equivalence() {
    let started = Instant::now();
    let n = 100_000u64;
    let config = FactoryConfig::default();
    let mut details = Vec::new();

    for (i, q) in [0.04, 0.25, 0.49, 0.81].into_iter().enumerate() {
        let mut rng = RngStream::new(SEED + 500 + i as u64, 0);
        let mut heads = 0u64;
        let mut truncated = 0u64;
        let mut walk_counts = [0u64; 7];
        let mut produced = 0u64;
        while produced < n {
            let mut ledger = TossLedger::new();
            let mut q_source = BiasedCoin::new(q);
            let mut fair_source = BiasedCoin::fair();
            match sqrt_coin(&mut q_source, &mut fair_source, &config, &mut rng, &mut ledger) {
                Ok(record) => {
                    produced += 1;
                    heads += u64::from(record.bit);
                    // Walk stopped at step 2k+1; bucket k <= 6.
                    let k = (record.ledger.fair_coins_consumed - 1) / 2;
                    if k < 7 {
                        walk_counts[k as usize] += 1;
                    }
                }
                Err(FactoryError::WalkCapExceeded { .. }) => truncated += 1,
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }

        // Empirical bias within the oracle's analytic truncation tail plus
        // five binomial standard deviations.
        let oracle = sqrt_series_oracle(q, 200).unwrap();
        let p_hat = heads as f64 / n as f64;
        let allowed = oracle.tail_bound + five_sigma(oracle.bias, n);
        assert!(
            (p_hat - oracle.bias).abs() <= allowed,
            "q = {q}: {p_hat} vs oracle {} (allowed {allowed})",
            oracle.bias
        );

        // Walk-length histogram against C_k/2^(2k+1) for k <= 6.
        for (k, &count) in walk_counts.iter().enumerate() {
            let want = walk_stopping_probability(k as u32);
            let sigma = (n as f64 * want * (1.0 - want)).sqrt();
            let deviation = (count as f64 - n as f64 * want).abs();
            assert!(
                deviation <= 5.0 * sigma,
                "q = {q}, walk cell k = {k}: count {count}, expected {:.1}",
                n as f64 * want
            );
        }
        details.push(format!("q={q}: p_hat={p_hat:.4} (√q={:.4}, {truncated} truncated)", q.sqrt()));
    }
    pass(5, "√q oracle equivalence", started, 60.0, &details.join("; "));
}

#[test]
fn criterion_6_doubling_noiseless() {
    let started = Instant::now();
    let n = 20_000u64;
    let grid = even_grid(0.05, 0.95, 19).unwrap();
    assert_eq!(grid[9], 0.5);

    let mut worst_sigmas = 0.0f64;
    let mut medians = Vec::new();
    for (i, &p) in grid.iter().enumerate() {
        let run = run_factory(&RunSpec::new(
            ProtocolKind::Doubling,
            p,
            n,
            SEED + 600 + i as u64,
        ))
        .unwrap();
        assert!(run.error.is_none());
        assert_eq!(run.records.len() as u64, n);

        let want = f_wedge(p);
        let p_hat = run.heads() as f64 / n as f64;
        if p == 0.5 {
            assert_eq!(run.heads(), n, "p = 1/2 must be certain heads");
        } else {
            let band = five_sigma(want, n);
            assert!(
                (p_hat - want).abs() <= band,
                "bias at p = {p}: {p_hat} vs {want}"
            );
            worst_sigmas = worst_sigmas.max(5.0 * (p_hat - want).abs() / band);
        }

        // Per-output quoin cost: median must be finite; at p = 1/2 the
        // running mean must grow with sample size (infinite-mean stopping
        // time), while the median stays stable.
        let mut per_output = Vec::with_capacity(run.records.len());
        let mut previous = TossLedger::new();
        for record in &run.records {
            per_output.push(record.ledger.quoins_consumed - previous.quoins_consumed);
            previous = record.ledger;
        }
        let mut sorted = per_output.clone();
        sorted.sort_unstable();
        let median = median_of_sorted(&sorted);
        assert!(median.is_finite() && median >= 6.0);
        medians.push((p, median));

        if p == 0.5 {
            let mean_at = |count: usize| -> f64 {
                per_output[..count].iter().sum::<u64>() as f64 / count as f64
            };
            let (m200, m2000, m20000) = (mean_at(200), mean_at(2_000), mean_at(20_000));
            assert!(
                m200 < m2000 && m2000 < m20000,
                "running means must grow: {m200:.1}, {m2000:.1}, {m20000:.1}"
            );
        }
    }
    let median_report: Vec<String> = medians
        .iter()
        .map(|(p, median)| format!("{p:.2}:{median}"))
        .collect();
    println!(
        "acceptance 6: median quoins per output by p — {}",
        median_report.join(" ")
    );
    pass(
        6,
        "doubling correctness",
        started,
        300.0,
        &format!("19 biases x {n} outputs, worst bias deviation {worst_sigmas:.2}σ, medians finite at every p"),
    );
}

#[test]
fn criterion_7_noise_ceiling_consistency() {
    let started = Instant::now();
    let n = 20_000u64;
    let noise = ReadoutConfusion::DEFAULT;

    let observed = apply_confusion(&ideal_half_distribution(), &noise);
    let p01 = observed.entries()[1];
    let ceiling = doubling_ceiling(&noise).unwrap();
    // Documented arithmetic discrepancy: the matrix product gives
    // P'(01) = 0.002525 under the printed M, not the quoted 0.0075.
    assert!((p01 - 0.002525).abs() < 1e-12);

    let mut spec = RunSpec::new(ProtocolKind::Doubling, 0.5, n, SEED + 700);
    spec.noise = Some(noise);
    let run = run_factory(&spec).unwrap();
    assert!(run.error.is_none());
    let p_hat = run.heads() as f64 / n as f64;
    let band = five_sigma(ceiling, n);
    assert!(
        (p_hat - ceiling).abs() <= band,
        "noisy bias {p_hat} vs ceiling {ceiling} (band {band})"
    );
    pass(
        7,
        "noise ceiling consistency",
        started,
        60.0,
        &format!(
            "P'(01) = {p01:.6} -> ceiling {ceiling:.6}, noisy bias {p_hat:.4} (reference pair: 0.0075 -> 0.8775)"
        ),
    );
}

#[test]
fn criterion_8_sweep_shape() {
    let started = Instant::now();
    let shots = 50_000u64;
    let grid = even_grid(0.0, 1.0, 21).unwrap();
    let sweep = run_bell_sweep(&grid, shots, SEED + 800, None).unwrap();

    let phi_plus: Vec<u64> = sweep.rows.iter().map(|r| r.counts[0]).collect();
    let phi_minus: Vec<u64> = sweep.rows.iter().map(|r| r.counts[1]).collect();
    let psi_plus: Vec<u64> = sweep.rows.iter().map(|r| r.counts[2]).collect();
    let psi_minus: Vec<u64> = sweep.rows.iter().map(|r| r.counts[3]).collect();

    // Ψ- never occurs without noise.
    assert!(psi_minus.iter().all(|&c| c == 0));

    // Φ+ hovers at shots/2 at every p.
    let band = 5.0 * (shots as f64 * 0.25).sqrt();
    for (row, &count) in sweep.rows.iter().zip(&phi_plus) {
        assert!(
            (count as f64 - shots as f64 / 2.0).abs() <= band,
            "Φ+ count {count} at p = {}",
            row.p
        );
    }

    // Φ- peaks at the edges and vanishes exactly at p = 1/2.
    let argmax_phi_minus = (0..21).max_by_key(|&i| phi_minus[i]).unwrap();
    assert!(argmax_phi_minus == 0 || argmax_phi_minus == 20);
    assert_eq!(grid[10], 0.5);
    assert_eq!(phi_minus[10], 0);

    // Ψ+ peaks at p = 1/2.
    let argmax_psi_plus = (0..21).max_by_key(|&i| psi_plus[i]).unwrap();
    assert_eq!(argmax_psi_plus, 10);

    pass(
        8,
        "sweep shape",
        started,
        60.0,
        &format!(
            "21 points x {shots} shots: Ψ- all zero, Φ- max at edge (p = {}), Ψ+ max at 0.5",
            grid[argmax_phi_minus]
        ),
    );
}
