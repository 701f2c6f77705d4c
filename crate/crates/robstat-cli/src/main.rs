mod args;
mod commands;
mod output;
mod render;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{Map, Value};

use crate::args::{Cli, Command};
use crate::output::{Outputs, RunReport, SCHEMA_VERSION};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or arguments; exit code 2.
    Usage(String),
    /// Failed read, write or estimation; exit code 1.
    Compute(String),
}

impl From<robstat::RobError> for CliError {
    fn from(e: robstat::RobError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<robstat_data::DataError> for CliError {
    fn from(e: robstat_data::DataError) -> Self {
        CliError::Compute(e.to_string())
    }
}

/// What a subcommand hands back for the report.
pub struct Outcome {
    pub summary: Value,
    pub seed_used: bool,
}

fn parameters(cli: &Cli) -> Value {
    let mut map = Map::new();
    if let Value::Object(m) = serde_json::to_value(&cli.common).unwrap_or(Value::Null) {
        map.extend(m);
    }
    let args = match &cli.command {
        Command::Clean(a) => serde_json::to_value(a),
        Command::Transform(a) => serde_json::to_value(a),
        Command::Scale(a) => serde_json::to_value(a),
        Command::Cov(a) => serde_json::to_value(a),
        Command::Reg(a) => serde_json::to_value(a),
        Command::Pca(a) => serde_json::to_value(a),
        Command::Ddc(a) => serde_json::to_value(a),
        Command::Cellmcd(a) => serde_json::to_value(a),
        Command::Boxplot(a) => serde_json::to_value(a),
        Command::Datasets(a) => serde_json::to_value(a),
        Command::Render(a) => serde_json::to_value(a),
    };
    if let Ok(Value::Object(m)) = args {
        map.extend(m);
    }
    Value::Object(map)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let mut out = Outputs::new(&cli.common.out)?;
    let outcome = match cli.common.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Compute(e.to_string()))?
            .install(|| commands::dispatch(&cli, &mut out))?,
        None => commands::dispatch(&cli, &mut out)?,
    };
    let mut files = out.files.clone();
    files.push("report.json".into());
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name().into(),
        parameters: parameters(&cli),
        seed: outcome.seed_used.then_some(cli.common.seed),
        timing_seconds: start.elapsed().as_secs_f64(),
        outputs: files,
        summary: outcome.summary,
        warnings: out.warnings.clone(),
    };
    out.write_json("report.json", &report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
