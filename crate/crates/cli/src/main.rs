//! Configuration-driven verification runner for the two-HCIZ bridge
//! ensemble.
//!
//! Exit codes: 0 when every check passes or is report-only, 1 when any
//! check fails, 2 on invalid input. `RAYON_NUM_THREADS` is the only
//! environment variable honored (thread count of the parallel build).

mod config;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::RunConfig;
use suites::{execute_suite, Suite};

#[derive(Parser)]
#[command(
    name = "nibb",
    version,
    about = "Verification suites for the two-HCIZ dressed bridge ensemble",
    after_help = "Configuration is a JSON document (see configs/default.json); flag \
                  overrides beat config values. Reports are line-delimited JSON with \
                  one record per check."
)]
struct Cli {
    /// Which suite to run.
    #[arg(value_enum)]
    suite: Suite,

    /// Path to the JSON run configuration; the bundled default is used when
    /// omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for reports and archives (default: config out_dir
    /// or ./out).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,

    /// Sample-count override.
    #[arg(long)]
    samples: Option<usize>,

    /// Also write a per-check CSV (check, measured, expected, status).
    #[arg(long)]
    csv: bool,
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = samples;
    }
    if let Some(out) = &cli.out {
        config.out_dir = Some(out.clone());
    }
    config.validate()?;

    let outcome = execute_suite(&config, cli.suite)?;
    for report in &outcome.reports {
        println!("{report}");
    }

    let out_dir = config
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    let files = output::write_suite_output(
        &out_dir,
        cli.suite.name(),
        config.seed,
        &outcome.reports,
        &outcome.archive,
        cli.csv,
    )?;

    let passed = outcome
        .reports
        .iter()
        .filter(|r| r.status == nibb_core::CheckStatus::Pass)
        .count();
    let failed = outcome.reports.iter().filter(|r| r.failed()).count();
    let report_only = outcome.reports.len() - passed - failed;
    println!(
        "suite {}: {} pass, {} fail, {} report-only{} -> {}",
        cli.suite.name(),
        passed,
        failed,
        report_only,
        if outcome.archive.is_empty() {
            String::new()
        } else {
            format!(", {} samples", outcome.archive.len())
        },
        files.report_path.display()
    );
    if let Some(csv) = files.csv_path {
        println!("csv -> {}", csv.display());
    }
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
