//! `quoin reproduce`: emit the simulated x/y series behind the reference
//! figures, together with the closed-form ideal curves.

use std::path::PathBuf;

use serde::Serialize;

use quoin_core::analysis::sweep::{median_of_sorted, run_bell_sweep};
use quoin_core::analysis::{estimate_bias_from_counts, f_frown, f_wedge, von_neumann_cost};
use quoin_core::factories::TossLedger;
use quoin_core::quantum::{bell_distribution, QuoinBias};
use quoin_core::{FactoryConfig, ProtocolKind, ReadoutConfusion, RunSpec};

use crate::manifest::RunManifest;
use crate::output::write_rows;
use crate::{parse_grid, parse_noise, CliError, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigTarget {
    Fig1a,
    Fig2b,
    Fig3a,
    Fig3b,
}

impl FigTarget {
    fn name(self) -> &'static str {
        match self {
            FigTarget::Fig1a => "fig1a",
            FigTarget::Fig2b => "fig2b",
            FigTarget::Fig3a => "fig3a",
            FigTarget::Fig3b => "fig3b",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct ReproduceArgs {
    /// Which figure's data series to generate.
    #[arg(long, value_enum)]
    pub target: FigTarget,
    /// Bias grid override; defaults to 0:1:21 (fig1a: 0.01:0.99:99, since
    /// the von Neumann cost diverges at the endpoints).
    #[arg(long = "p-grid", value_name = "START:END:STEPS")]
    pub p_grid: Option<String>,
    /// Joint measurements per grid point (fig2b, fig3a).
    #[arg(long, default_value_t = 50_000)]
    pub shots: u64,
    /// Doubling outputs per grid point (fig3b).
    #[arg(long, default_value_t = 2_000)]
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
    /// Output directory for the data files and manifest.
    #[arg(long, default_value = "fig-data")]
    pub out: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct Fig1aRow {
    p: f64,
    /// Dashed curve: classical von Neumann cost 1/(p(1-p)).
    von_neumann_coins: f64,
    /// Solid curve: Bell-measurement cost, constant 2.
    bell_quoins: f64,
}

#[derive(Debug, Serialize)]
struct Fig2bRow {
    p: f64,
    shots: u64,
    count_phi_plus: u64,
    count_phi_minus: u64,
    count_psi_plus: u64,
    count_psi_minus: u64,
    expected_phi_plus: f64,
    expected_phi_minus: f64,
    expected_psi_plus: f64,
    expected_psi_minus: f64,
}

#[derive(Debug, Serialize)]
struct Fig3aRow {
    p: f64,
    fair_p_hat: f64,
    fair_ci_low: f64,
    fair_ci_high: f64,
    fair_ideal: f64,
    frown_p_hat: Option<f64>,
    frown_ci_low: Option<f64>,
    frown_ci_high: Option<f64>,
    frown_ideal: f64,
}

#[derive(Debug, Serialize)]
struct Fig3bRow {
    p: f64,
    n: u64,
    wedge_p_hat: f64,
    wedge_ci_low: f64,
    wedge_ci_high: f64,
    wedge_ideal: f64,
    quoins_mean: f64,
    quoins_median: f64,
    truncation_events: u64,
}

/// Per-output quoin-count distribution, one histogram bucket per row.
#[derive(Debug, Serialize)]
struct Fig3bQuoinRow {
    p: f64,
    quoins_per_output: u64,
    count: u64,
}

pub fn run(args: ReproduceArgs, argv: &[String]) -> Result<(), CliError> {
    if args.shots == 0 || args.n == 0 {
        return Err(CliError::Usage("--shots and --n must be >= 1".to_string()));
    }
    let noise = args.noise.as_deref().map(parse_noise).transpose()?;
    let default_grid = match args.target {
        FigTarget::Fig1a => "0.01:0.99:99",
        _ => "0:1:21",
    };
    let grid = parse_grid(args.p_grid.as_deref().unwrap_or(default_grid))?;

    std::fs::create_dir_all(&args.out).map_err(CliError::io(&args.out))?;
    let data_path = |stem: &str| -> PathBuf {
        args.out
            .join(format!("{stem}.{}", args.output.format.extension()))
    };

    let mut outputs: Vec<PathBuf> = Vec::new();
    match args.target {
        FigTarget::Fig1a => {
            let rows = fig1a_rows(&grid)?;
            let path = data_path("fig1a");
            write_rows(&path, args.output.format, &rows)?;
            outputs.push(path);
        }
        FigTarget::Fig2b => {
            let rows = fig2b_rows(&grid, args.shots, args.seed, noise.as_ref())?;
            let path = data_path("fig2b");
            write_rows(&path, args.output.format, &rows)?;
            outputs.push(path);
        }
        FigTarget::Fig3a => {
            let rows = fig3a_rows(&grid, args.shots, args.seed, noise.as_ref())?;
            let path = data_path("fig3a");
            write_rows(&path, args.output.format, &rows)?;
            outputs.push(path);
        }
        FigTarget::Fig3b => {
            let (rows, hist) = fig3b_rows(&args, &grid, noise)?;
            let path = data_path("fig3b");
            write_rows(&path, args.output.format, &rows)?;
            outputs.push(path);
            let hist_path = data_path("fig3b_quoins");
            write_rows(&hist_path, args.output.format, &hist)?;
            outputs.push(hist_path);
        }
    }

    let params = serde_json::json!({
        "target": args.target,
        "p_grid": args.p_grid.as_deref().unwrap_or(default_grid),
        "grid_values": grid,
        "shots": args.shots,
        "n": args.n,
        "seed": args.seed,
        "noise": noise,
        "max_walk_steps": args.max_walk_steps,
        "max_rejections": args.max_rejections,
        "format": args.output.format,
    });
    let manifest_anchor = args.out.join(args.target.name());
    let output_names: Vec<String> = outputs
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    RunManifest::new(
        "reproduce",
        argv,
        args.seed,
        output_names,
        params,
    )
    .write_beside(&manifest_anchor)?;

    for path in &outputs {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn fig1a_rows(grid: &[f64]) -> Result<Vec<Fig1aRow>, CliError> {
    grid.iter()
        .map(|&p| {
            let coins = von_neumann_cost(p).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Fig1aRow {
                p,
                von_neumann_coins: coins,
                bell_quoins: 2.0,
            })
        })
        .collect()
}

fn fig2b_rows(
    grid: &[f64],
    shots: u64,
    seed: u64,
    noise: Option<&ReadoutConfusion>,
) -> Result<Vec<Fig2bRow>, CliError> {
    let sweep =
        run_bell_sweep(grid, shots, seed, noise).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(sweep
        .rows
        .iter()
        .map(|row| {
            // The ideal curve is the noiseless closed form.
            let ideal = bell_distribution(QuoinBias::new(row.p).expect("grid is valid")).probs();
            Fig2bRow {
                p: row.p,
                shots: row.shots,
                count_phi_plus: row.counts[0],
                count_phi_minus: row.counts[1],
                count_psi_plus: row.counts[2],
                count_psi_minus: row.counts[3],
                expected_phi_plus: shots as f64 * ideal[0],
                expected_phi_minus: shots as f64 * ideal[1],
                expected_psi_plus: shots as f64 * ideal[2],
                expected_psi_minus: shots as f64 * ideal[3],
            }
        })
        .collect())
}

fn fig3a_rows(
    grid: &[f64],
    shots: u64,
    seed: u64,
    noise: Option<&ReadoutConfusion>,
) -> Result<Vec<Fig3aRow>, CliError> {
    // The fair and frown series derive from the same sweep counts, the way
    // the measurement record is post-processed into both coins at once.
    let sweep =
        run_bell_sweep(grid, shots, seed, noise).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(sweep
        .rows
        .iter()
        .map(|row| Fig3aRow {
            p: row.p,
            fair_p_hat: row.fair.p_hat,
            fair_ci_low: row.fair.ci_low,
            fair_ci_high: row.fair.ci_high,
            fair_ideal: 0.5,
            frown_p_hat: row.frown.map(|e| e.p_hat),
            frown_ci_low: row.frown.map(|e| e.ci_low),
            frown_ci_high: row.frown.map(|e| e.ci_high),
            frown_ideal: f_frown(row.p),
        })
        .collect())
}

fn fig3b_rows(
    args: &ReproduceArgs,
    grid: &[f64],
    noise: Option<ReadoutConfusion>,
) -> Result<(Vec<Fig3bRow>, Vec<Fig3bQuoinRow>), CliError> {
    let mut rows = Vec::with_capacity(grid.len());
    let mut hist = Vec::new();
    for (i, &p) in grid.iter().enumerate() {
        let mut spec = RunSpec::new(ProtocolKind::Doubling, p, args.n, args.seed);
        spec.stream = i as u64;
        spec.config = FactoryConfig::new(args.max_walk_steps, args.max_rejections);
        spec.noise = noise;
        let run = quoin_core::run_factory(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(error) = run.error {
            return Err(CliError::Truncated(format!(
                "{error} at p = {p} after {} outputs",
                run.records.len()
            )));
        }

        let estimate = estimate_bias_from_counts(run.heads(), args.n)
            .expect("n >= 1 outputs were produced");
        let mut costs: Vec<u64> = Vec::with_capacity(run.records.len());
        let mut previous = TossLedger::new();
        for record in &run.records {
            costs.push(record.ledger.quoins_consumed - previous.quoins_consumed);
            previous = record.ledger;
        }
        costs.sort_unstable();
        let mean = costs.iter().sum::<u64>() as f64 / costs.len() as f64;
        let median = median_of_sorted(&costs);

        rows.push(Fig3bRow {
            p,
            n: args.n,
            wedge_p_hat: estimate.p_hat,
            wedge_ci_low: estimate.ci_low,
            wedge_ci_high: estimate.ci_high,
            wedge_ideal: f_wedge(p),
            quoins_mean: mean,
            quoins_median: median,
            truncation_events: run.truncation.map_or(0, |t| t.events),
        });

        // Collapse the sorted per-output costs into histogram buckets.
        let mut value = costs[0];
        let mut count = 0u64;
        for &cost in &costs {
            if cost == value {
                count += 1;
            } else {
                hist.push(Fig3bQuoinRow {
                    p,
                    quoins_per_output: value,
                    count,
                });
                value = cost;
                count = 1;
            }
        }
        hist.push(Fig3bQuoinRow {
            p,
            quoins_per_output: value,
            count,
        });
    }
    Ok((rows, hist))
}

