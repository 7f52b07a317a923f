//! `quoin noise-ceiling`: the confusion matrix, its action on the ideal
//! half-bias readout distribution, and the doubling ceiling it implies.

use std::path::PathBuf;

use serde::Serialize;

use quoin_core::noise::{
    apply_confusion, ceiling_from_p01, confusion_matrix, doubling_ceiling,
    ideal_half_distribution,
};
use quoin_core::ReadoutConfusion;

use crate::manifest::RunManifest;
use crate::{parse_noise, CliError};

/// Commonly quoted reference value for this calibration, printed alongside
/// the computed numbers for comparison.
const REFERENCE_P01: f64 = 0.0075;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct NoiseCeilingArgs {
    /// Readout confusion parameters a0,a1,b0,b1.
    #[arg(long, default_value = "0.995,0.985,0.995,0.985", value_name = "A0,A1,B0,B1")]
    pub noise: String,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    /// Also write the JSON report to a file (with a manifest sidecar).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CeilingReport {
    noise: ReadoutConfusion,
    /// Row = read outcome, column = true outcome, both in (00,01,10,11).
    confusion_matrix: [[f64; 4]; 4],
    /// M · (1/2, 0, 1/2, 0).
    observed: [f64; 4],
    p01: f64,
    ceiling: f64,
    reference_p01: f64,
    reference_ceiling: f64,
}

pub fn run(args: NoiseCeilingArgs, argv: &[String]) -> Result<(), CliError> {
    let noise = parse_noise(&args.noise)?;
    let matrix = confusion_matrix(&noise);
    let observed = apply_confusion(&ideal_half_distribution(), &noise).entries();
    let ceiling = doubling_ceiling(&noise).map_err(|e| CliError::Usage(e.to_string()))?;
    let report = CeilingReport {
        noise,
        confusion_matrix: matrix,
        observed,
        p01: observed[1],
        ceiling,
        reference_p01: REFERENCE_P01,
        reference_ceiling: ceiling_from_p01(REFERENCE_P01).expect("reference is valid"),
    };

    match args.format {
        ReportFormat::Text => print_text(&report),
        ReportFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        ),
    }

    if let Some(out) = &args.out {
        let body = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(out, body + "\n").map_err(CliError::io(out))?;
        let params = serde_json::json!({ "noise": noise });
        let out_name = out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        RunManifest::new("noise-ceiling", argv, 0, vec![out_name], params).write_beside(out)?;
    }
    Ok(())
}

fn print_text(report: &CeilingReport) {
    println!(
        "confusion parameters: a0={} a1={} b0={} b1={}",
        report.noise.a0(),
        report.noise.a1(),
        report.noise.b0(),
        report.noise.b1()
    );
    println!("confusion matrix M (row = read, column = true), basis (00,01,10,11):");
    for row in &report.confusion_matrix {
        println!(
            "  [{:>10.6} {:>10.6} {:>10.6} {:>10.6}]",
            row[0], row[1], row[2], row[3]
        );
    }
    let o = &report.observed;
    println!(
        "P' = M . (1/2, 0, 1/2, 0) = [{:.6}, {:.6}, {:.6}, {:.6}]",
        o[0], o[1], o[2], o[3]
    );
    println!("P'(01) = {:.6}", report.p01);
    println!("doubling ceiling 1 - sqrt(2 P'(01)) = {:.6}", report.ceiling);
    println!(
        "reference pair for comparison: P'(01) = {} -> ceiling {:.6} (2p = 0.8775)",
        report.reference_p01, report.reference_ceiling
    );
}
