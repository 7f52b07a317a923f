//! `quoin sweep`: Bell-outcome counts and derived coin estimates over a
//! bias grid.

use std::path::PathBuf;

use serde::Serialize;

use quoin_core::analysis::sweep::{run_bell_sweep, SweepRow};
use quoin_core::ReadoutConfusion;

use crate::manifest::RunManifest;
use crate::output::write_rows;
use crate::{parse_grid, parse_noise, CliError, OutputArgs};

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Bias grid as start:end:steps.
    #[arg(long = "p-grid", default_value = "0:1:21", value_name = "START:END:STEPS")]
    pub p_grid: String,
    /// Joint measurements per grid point.
    #[arg(long, default_value_t = 50_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Readout confusion parameters a0,a1,b0,b1; omitted = noiseless.
    #[arg(long, value_name = "A0,A1,B0,B1")]
    pub noise: Option<String>,
    /// Output data file; a `<out>.manifest.json` sidecar is written too.
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// One sweep data row. Frown columns are empty when no shot landed in the
/// conditioning event.
#[derive(Debug, Serialize)]
pub struct SweepFileRow {
    pub p: f64,
    pub shots: u64,
    pub count_phi_plus: u64,
    pub count_phi_minus: u64,
    pub count_psi_plus: u64,
    pub count_psi_minus: u64,
    pub fair_heads: u64,
    pub fair_p_hat: f64,
    pub fair_ci_low: f64,
    pub fair_ci_high: f64,
    pub frown_trials: Option<u64>,
    pub frown_heads: Option<u64>,
    pub frown_p_hat: Option<f64>,
    pub frown_ci_low: Option<f64>,
    pub frown_ci_high: Option<f64>,
    pub quoins_consumed: u64,
    pub fair_mean_quoins: f64,
    pub fair_median_quoins: f64,
    pub frown_mean_quoins: Option<f64>,
    pub frown_median_quoins: Option<f64>,
}

impl From<&SweepRow> for SweepFileRow {
    fn from(row: &SweepRow) -> Self {
        SweepFileRow {
            p: row.p,
            shots: row.shots,
            count_phi_plus: row.counts[0],
            count_phi_minus: row.counts[1],
            count_psi_plus: row.counts[2],
            count_psi_minus: row.counts[3],
            fair_heads: row.fair.successes,
            fair_p_hat: row.fair.p_hat,
            fair_ci_low: row.fair.ci_low,
            fair_ci_high: row.fair.ci_high,
            frown_trials: row.frown.map(|e| e.trials),
            frown_heads: row.frown.map(|e| e.successes),
            frown_p_hat: row.frown.map(|e| e.p_hat),
            frown_ci_low: row.frown.map(|e| e.ci_low),
            frown_ci_high: row.frown.map(|e| e.ci_high),
            quoins_consumed: row.fair_cost.quoins_consumed,
            fair_mean_quoins: row.fair_cost.mean_quoins_per_output,
            fair_median_quoins: row.fair_cost.median_quoins_per_output,
            frown_mean_quoins: row.frown_cost.map(|c| c.mean_quoins_per_output),
            frown_median_quoins: row.frown_cost.map(|c| c.median_quoins_per_output),
        }
    }
}

pub fn run(args: SweepArgs, argv: &[String]) -> Result<(), CliError> {
    let grid = parse_grid(&args.p_grid)?;
    if args.shots == 0 {
        return Err(CliError::Usage("--shots must be >= 1".to_string()));
    }
    let noise: Option<ReadoutConfusion> = args.noise.as_deref().map(parse_noise).transpose()?;

    let sweep = run_bell_sweep(&grid, args.shots, args.seed, noise.as_ref())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<SweepFileRow> = sweep.rows.iter().map(SweepFileRow::from).collect();
    write_rows(&args.out, args.output.format, &rows)?;

    let params = serde_json::json!({
        "p_grid": args.p_grid,
        "grid_values": grid,
        "shots": args.shots,
        "seed": args.seed,
        "noise": noise,
        "format": args.output.format,
    });
    let out_name = args
        .out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    RunManifest::new("sweep", argv, args.seed, vec![out_name], params)
        .write_beside(&args.out)?;

    println!(
        "wrote {} rows ({} shots each) to {}",
        rows.len(),
        args.shots,
        args.out.display()
    );
    Ok(())
}
