use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sunflower_lab::config::parse_config_text;
use sunflower_lab::{emit, run, Command, ConfigError, ExperimentConfig, Format, RunError, Status};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// Runs one seeded experiment and writes a JSON or CSV report.
///
/// Exit status is 0 when every asserted check passes, 1 when one fails and
/// 2 on a configuration or input error.
#[derive(Debug, Parser)]
#[command(name = "sunflower-lab", version)]
struct Cli {
    /// sunflower-extract, coverage, closure-demo, hr-verify, clique-verify,
    /// clique-extract, janson, code-poly or spread-experiment. May instead be
    /// given as `command = ...` in the config file.
    command: Option<String>,
    /// Flat `key = value` file; flags and --set override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    confidence: Option<f64>,
    /// exact or mc.
    #[arg(long)]
    engine: Option<String>,
    /// Report path; the format follows the extension unless --format is given.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Command parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut entries = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    let flags = [
        ("seed", cli.seed.map(|v| v.to_string())),
        ("samples", cli.samples.map(|v| v.to_string())),
        ("confidence", cli.confidence.map(|v| v.to_string())),
        ("engine", cli.engine.clone()),
        ("out", cli.out.as_ref().map(|p| p.display().to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            entries.insert(key.to_string(), v);
        }
    }
    for item in &cli.set {
        let (key, value) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: item.clone(),
        })?;
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    let command = cli
        .command
        .as_deref()
        .map(str::parse::<Command>)
        .transpose()?;
    Ok(ExperimentConfig::resolve(command, entries)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|config| run(&config).map(|r| (config, r)));
    let (config, report) = match result {
        Ok(ok) => ok,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &config.out {
        Some(path) => {
            let format = match cli.format {
                Some(FormatArg::Json) => Format::Json,
                Some(FormatArg::Csv) => Format::Csv,
                None => Format::for_path(path),
            };
            if let Err(source) = emit(&report, format, path) {
                eprintln!("error: {}: {source}", path.display());
                return ExitCode::from(2);
            }
            for row in &report.checks {
                let tag = match row.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Report => "INFO",
                };
                let bound = row
                    .bound
                    .map(|b| format!(" (bound {b})"))
                    .unwrap_or_default();
                println!("{tag} {} = {}{bound}", row.name, row.value);
            }
        }
        None => match cli.format {
            Some(FormatArg::Csv) => print!("{}", report.to_csv()),
            _ => print!("{}", report.to_json()),
        },
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
