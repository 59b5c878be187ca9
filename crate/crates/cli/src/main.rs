//! `simplicial`: batch front end for simplicial energy computations.
//!
//! Every subcommand prints one JSON report to standard output (and to
//! `--report` when given). Exit status is 0 on success, 1 when a check
//! fails or a flow does not converge, and 2 on usage or input errors.

mod commands;
mod input;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use commands::{
    CompareArgs, EnergyArgs, ExportArgs, FlowCmd, OptimizeArgs, ValidateArgs, VerifyArgs,
};

#[derive(Parser, Debug)]
#[command(name = "simplicial", version, about = "Simplicial energy, harmonic maps and their checks")]
struct Cli {
    /// Seed of the single random generator used by a run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the complex and the polygon inequalities of a metric.
    Validate(ValidateArgs),
    /// Energy, simplicial and Riemannian areas, and stretch statistics.
    Energy(EnergyArgs),
    /// Flow a map (or a family of maps) to a harmonic one.
    Flow(FlowCmd),
    /// Alternate harmonic flows with metric updates to minimize simplicial area.
    OptimizeMetric(OptimizeArgs),
    /// Run structural checks on a map, optionally after flowing it.
    Verify(VerifyArgs),
    /// Write the image of a map as a Wavefront OBJ file.
    ExportObj(ExportArgs),
    /// Compare convex-hull behaviour of simplicial and cotangent weights.
    CompareWeights(CompareArgs),
}

/// An error carrying the process exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

/// What was run, with which inputs and overrides. Contains nothing
/// time-dependent, so a fixed seed gives byte-identical reports.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: BTreeMap<String, String>,
    pub overrides: Value,
    pub seed: u64,
    pub output_dir: Option<String>,
    pub version: String,
}

/// Result of a subcommand: the report body and whether it succeeded.
pub struct Outcome {
    pub body: Value,
    pub success: bool,
    pub output_dir: Option<PathBuf>,
}

fn manifest(name: &str, inputs: BTreeMap<String, String>, overrides: Value, seed: u64, out: &Option<PathBuf>) -> RunManifest {
    RunManifest {
        subcommand: name.to_string(),
        inputs,
        overrides,
        seed,
        output_dir: out.as_ref().map(|p| p.display().to_string()),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn overrides<T: Serialize>(args: &T) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    if let Value::Object(map) = &mut v {
        map.remove("inputs");
        map.retain(|_, x| !x.is_null());
    }
    v
}

fn run(cli: &Cli) -> Result<(RunManifest, Outcome), CliError> {
    let seed = cli.seed;
    let none = BTreeMap::new();
    let (name, inputs, over, outcome) = match &cli.command {
        Command::Validate(a) => ("validate", a.inputs.paths(), overrides(a), commands::validate(a)?),
        Command::Energy(a) => ("energy", a.inputs.paths(), overrides(a), commands::energy(a)?),
        Command::Flow(a) => ("flow", a.inputs.paths(), overrides(a), commands::flow(a, seed)?),
        Command::OptimizeMetric(a) => (
            "optimize-metric",
            a.inputs.paths(),
            overrides(a),
            commands::optimize_metric(a, seed)?,
        ),
        Command::Verify(a) => ("verify", a.inputs.paths(), overrides(a), commands::verify(a, seed)?),
        Command::ExportObj(a) => ("export-obj", a.inputs.paths(), overrides(a), commands::export_obj(a)?),
        Command::CompareWeights(a) => ("compare-weights", none, overrides(a), commands::compare_weights(a, seed)?),
    };
    Ok((manifest(name, inputs, over, seed, &outcome.output_dir), outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((manifest, outcome)) => {
            let mut body = outcome.body;
            if let Value::Object(map) = &mut body {
                map.insert("manifest".into(), serde_json::to_value(&manifest).expect("manifest serializes"));
            }
            let text = serde_json::to_string_pretty(&body).expect("reports serialize");
            let _ = writeln!(std::io::stdout(), "{text}");
            if let Some(path) = &cli.report {
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if outcome.success { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
