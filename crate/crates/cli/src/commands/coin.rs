//! `quoin coin`: run one protocol, emit its bit records and a ledger
//! summary.

use std::path::PathBuf;

use serde::Serialize;

use quoin_core::analysis::sweep::median_of_sorted;
use quoin_core::analysis::{estimate_bias_from_counts, BiasEstimate};
use quoin_core::factories::{TruncationReport, TossLedger};
use quoin_core::{FactoryConfig, FactoryRun, ProtocolKind, RunSpec, StreamMode};

use crate::manifest::RunManifest;
use crate::output::write_rows;
use crate::{parse_noise, CliError, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinKind {
    Vonneumann,
    Fair1q,
    Fairbell,
    Frown,
    Sqdiff,
    Double,
}

impl CoinKind {
    fn protocol(self) -> ProtocolKind {
        match self {
            CoinKind::Vonneumann => ProtocolKind::VonNeumann,
            CoinKind::Fair1q => ProtocolKind::SingleQubitFair,
            CoinKind::Fairbell => ProtocolKind::BellFair,
            CoinKind::Frown => ProtocolKind::Frown,
            CoinKind::Sqdiff => ProtocolKind::SquaredDiff,
            CoinKind::Double => ProtocolKind::Doubling,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CoinKind::Vonneumann => "vonneumann",
            CoinKind::Fair1q => "fair1q",
            CoinKind::Fairbell => "fairbell",
            CoinKind::Frown => "frown",
            CoinKind::Sqdiff => "sqdiff",
            CoinKind::Double => "double",
        }
    }

    /// Which counter carries this protocol's per-output cost.
    fn cost_unit(self) -> &'static str {
        match self {
            CoinKind::Vonneumann => "input-coins",
            _ => "quoins",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct CoinArgs {
    /// Protocol to run.
    #[arg(long, value_enum)]
    pub kind: CoinKind,
    /// Quoin bias (or source bias for vonneumann).
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Number of output coins.
    #[arg(long, default_value_t = 1_000)]
    pub n: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Readout confusion parameters a0,a1,b0,b1; omitted = noiseless.
    #[arg(long, value_name = "A0,A1,B0,B1")]
    pub noise: Option<String>,
    #[arg(long = "max-walk-steps", default_value_t = 1_000_000)]
    pub max_walk_steps: u64,
    #[arg(long = "max-rejections", default_value_t = 1_000_000)]
    pub max_rejections: u64,
    /// Feed the doubling pipeline from one shared Bell-shot stream instead
    /// of independent streams (statistically coupled).
    #[arg(long = "shared-stream", default_value_t = false)]
    pub shared_stream: bool,
    /// Output data file; a `<out>.manifest.json` sidecar is written too.
    #[arg(long, default_value = "coins.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// One output coin with its cumulative ledger snapshot.
#[derive(Debug, Serialize)]
struct CoinFileRow {
    index: u64,
    bit: u8,
    quoins_consumed: u64,
    fair_coins_consumed: u64,
    input_coins_consumed: u64,
    outputs_produced: u64,
}

/// Aggregate summary printed to stdout as JSON.
#[derive(Debug, Serialize)]
struct CoinSummary {
    kind: &'static str,
    p: f64,
    seed: u64,
    n_requested: u64,
    n_produced: u64,
    heads: u64,
    bias: Option<BiasEstimate>,
    ledger: TossLedger,
    cost_unit: &'static str,
    mean_cost_per_output: Option<f64>,
    median_cost_per_output: Option<f64>,
    truncation: Option<TruncationReport>,
    error: Option<String>,
}

pub fn run(args: CoinArgs, argv: &[String]) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be >= 1".to_string()));
    }
    if !(0.0..=1.0).contains(&args.p) {
        return Err(CliError::Usage(format!("--p must lie in [0, 1], got {}", args.p)));
    }
    if args.max_walk_steps == 0 || args.max_rejections == 0 {
        return Err(CliError::Usage("caps must be >= 1".to_string()));
    }
    let noise = args.noise.as_deref().map(parse_noise).transpose()?;

    let mut spec = RunSpec::new(args.kind.protocol(), args.p, args.n, args.seed);
    spec.config = FactoryConfig::new(args.max_walk_steps, args.max_rejections);
    spec.noise = noise;
    spec.mode = if args.shared_stream {
        StreamMode::Shared
    } else {
        StreamMode::Independent
    };

    let run = quoin_core::run_factory(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    write_records(&args, &run)?;
    write_manifest(&args, argv, &spec, noise)?;
    let summary = summarize(&args, &run);
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );

    match run.error {
        None => Ok(()),
        Some(error) => Err(CliError::Truncated(format!(
            "{error}; {} of {} outputs written to {}",
            run.records.len(),
            args.n,
            args.out.display()
        ))),
    }
}

fn write_records(args: &CoinArgs, run: &FactoryRun) -> Result<(), CliError> {
    let rows: Vec<CoinFileRow> = run
        .records
        .iter()
        .enumerate()
        .map(|(index, record)| CoinFileRow {
            index: index as u64,
            bit: record.bit,
            quoins_consumed: record.ledger.quoins_consumed,
            fair_coins_consumed: record.ledger.fair_coins_consumed,
            input_coins_consumed: record.ledger.input_coins_consumed,
            outputs_produced: record.ledger.outputs_produced,
        })
        .collect();
    write_rows(&args.out, args.output.format, &rows)
}

fn write_manifest(
    args: &CoinArgs,
    argv: &[String],
    spec: &RunSpec,
    noise: Option<quoin_core::ReadoutConfusion>,
) -> Result<(), CliError> {
    let params = serde_json::json!({
        "kind": args.kind,
        "p": args.p,
        "n": args.n,
        "seed": args.seed,
        "noise": noise,
        "max_walk_steps": spec.config.max_walk_steps,
        "max_rejections": spec.config.max_rejections,
        "shared_stream": args.shared_stream,
        "format": args.output.format,
    });
    let out_name = args
        .out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    RunManifest::new("coin", argv, args.seed, vec![out_name], params)
        .write_beside(&args.out)?;
    Ok(())
}

fn summarize(args: &CoinArgs, run: &FactoryRun) -> CoinSummary {
    let produced = run.records.len() as u64;
    let heads = run.heads();
    let bias = (produced > 0)
        .then(|| estimate_bias_from_counts(heads, produced).expect("produced > 0"));

    // Per-output cost from consecutive ledger snapshots, in the protocol's
    // native cost counter.
    let mut costs: Vec<u64> = Vec::with_capacity(run.records.len());
    let mut previous = TossLedger::new();
    for record in &run.records {
        let delta = record.ledger.delta_since(&previous);
        costs.push(match args.kind {
            CoinKind::Vonneumann => delta.input_coins_consumed,
            _ => delta.quoins_consumed,
        });
        previous = record.ledger;
    }
    let (mean_cost, median_cost) = if costs.is_empty() {
        (None, None)
    } else {
        let mean = costs.iter().sum::<u64>() as f64 / costs.len() as f64;
        let mut sorted = costs;
        sorted.sort_unstable();
        (Some(mean), Some(median_of_sorted(&sorted)))
    };

    CoinSummary {
        kind: args.kind.name(),
        p: args.p,
        seed: args.seed,
        n_requested: args.n,
        n_produced: produced,
        heads,
        bias,
        ledger: run.ledger,
        cost_unit: args.kind.cost_unit(),
        mean_cost_per_output: mean_cost,
        median_cost_per_output: median_cost,
        truncation: run.truncation,
        error: run.error.as_ref().map(|e| e.to_string()),
    }
}
