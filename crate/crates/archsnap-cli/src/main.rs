use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use archsnap_cli::config::{ExperimentSpec, Format, Overrides};
use archsnap_cli::table::emit;
use archsnap_cli::{compare, critical, exit_code, predict, simulate, summary_json, sweep, Report};
use clap::{Parser, Subcommand};

/// Switching-delay analysis of shallow bistable arches.
#[derive(Parser)]
#[command(name = "archsnap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment description.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for compare and sweep.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Locate the switching fold and its normal form.
    Critical,
    /// Closed-form switching time for the configured load.
    Predict,
    /// Integrate the mode equations and write the time series.
    Simulate,
    /// Compare closed forms with simulations over grids of load offset or rate.
    Compare,
    /// Evaluate a one- or two-parameter grid.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let mut spec = ExperimentSpec::load(cli.config.as_deref())?;
    spec.apply(&cli.overrides);
    if let Some(p) = &cli.out {
        spec.output.path = Some(p.clone());
    }
    if let Some(f) = cli.format {
        spec.output.format = f;
    }
    if let Some(w) = cli.workers {
        spec.output.workers = w;
    }
    let workers = spec.output.workers;
    let report = match cli.command {
        Command::Critical => critical(&spec)?,
        Command::Predict => predict(&spec)?,
        Command::Simulate => simulate(&spec)?,
        Command::Compare => {
            let cmp = compare(&spec, workers)?;
            for s in &cmp.summary {
                eprintln!(
                    "{} q={}: {} rows, {} failed, max relative error {}, slope numeric {} analytic {}",
                    s.regime,
                    s.q,
                    s.rows,
                    s.failures,
                    show(s.max_rel_error),
                    show(s.slope_numeric),
                    show(s.slope_analytic)
                );
            }
            Report {
                table: cmp.table,
                extra: Some(("summary", summary_json(&cmp.summary))),
                failure: None,
            }
        }
        Command::Sweep => Report {
            table: sweep(&spec, workers)?,
            extra: None,
            failure: None,
        },
    };
    write_report(&report, &spec)?;
    match report.failure {
        Some(e) => {
            eprintln!("error: {e:#}");
            Ok(exit_code(&e))
        }
        None => Ok(0),
    }
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.4}"))
}

fn write_report(report: &Report, spec: &ExperimentSpec) -> anyhow::Result<()> {
    let format = spec.output.format;
    // Only the compare summary and error diagnostics go into JSON extras.
    let extra = report.extra.clone();
    match &spec.output.path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = BufWriter::new(f);
            emit(&report.table, extra, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            emit(&report.table, extra, format, &mut w)?;
        }
    }
    Ok(())
}
