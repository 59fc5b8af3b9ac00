//! Command line front end for the announcement-driven event-arrival
//! model: prepare datasets, fit model variants, compare them, simulate
//! fitted models and compute diagnostics.
//!
//! Every command writes tab-separated tables with a metadata block that
//! names the run manifest, and is byte-deterministic given the same
//! inputs, configuration and seed. Exit codes: 0 success, 2 input error,
//! 3 numerical failure, 4 comparison refusal.

mod commands;
mod dataset;
mod error;
mod fits;
mod settings;
mod tsv;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::settings::Settings;

#[derive(Parser)]
#[command(
    name = "newshawk",
    version,
    about = "Self-exciting event-arrival models around scheduled announcements"
)]
struct Cli {
    /// Config file with `key = value` lines; flags override it. Also
    /// read from NEWSHAWK_CONFIG when the flag is absent.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare a dataset directory from raw event stamps and a calendar.
    Ingest {
        /// Event-time file: one UTC timestamp per line.
        #[arg(long)]
        events: PathBuf,
        /// Announcement calendar (comma or tab separated).
        #[arg(long)]
        calendar: PathBuf,
        /// Output directory; defaults to `dataset` under the output root.
        out: Option<PathBuf>,
        /// Trading session as HH:MM-HH:MM (UTC).
        #[arg(long)]
        session: Option<String>,
        /// Seed for the de-quantization jitter.
        #[arg(long)]
        seed: Option<u64>,
        /// Half window length around isolated announcements, seconds.
        #[arg(long)]
        half_width: Option<f64>,
        /// Trailing window of the per-minute impact average, minutes.
        #[arg(long)]
        sma_window: Option<usize>,
    },
    /// Fit a model variant to every unit of a dataset.
    Fit {
        dataset: PathBuf,
        /// Output directory; defaults to `fits-<variant>-<scope>`.
        out: Option<PathBuf>,
        /// Model variant: de, pl, de+news, pl+news, pl+news+nc.
        #[arg(long)]
        variant: Option<String>,
        /// Analysis units: per-day or per-window.
        #[arg(long)]
        scope: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of optimizer starting points per unit.
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Per-unit AIC/BIC deltas between two fit runs on the same dataset.
    Compare {
        fits_a: PathBuf,
        fits_b: PathBuf,
        /// Output directory; defaults to `compare`.
        out: Option<PathBuf>,
    },
    /// Simulate a fitted model over a unit's window.
    Simulate {
        dataset: PathBuf,
        /// Unit id: a date for per-day fits, a window id for per-window.
        unit: String,
        /// Fits directory providing the model.
        fits: PathBuf,
        /// Output directory; defaults to `sim-<unit>`.
        out: Option<PathBuf>,
        /// Second fits directory for the paired count-ratio experiment.
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Residuals, dispersion test, quantile pairs and intensity
    /// decomposition for one fitted unit.
    Diagnose {
        dataset: PathBuf,
        unit: String,
        fits: PathBuf,
        /// Output directory; defaults to `diag-<unit>`.
        out: Option<PathBuf>,
        /// Grid step for the decomposition, seconds.
        #[arg(long)]
        bin_width: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(cli) {
        Ok(()) => {
            eprintln!("wall-clock {:.2}s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest {
            events,
            calendar,
            out,
            session,
            seed,
            half_width,
            sma_window,
        } => {
            if let Some(s) = session {
                settings.session = s.parse().map_err(CliError::input)?;
            }
            set(&mut settings.seed, seed);
            set(&mut settings.half_width, half_width);
            set(&mut settings.sma_window, sma_window);
            let out = settings.out_dir(out, "dataset");
            guard_distinct(&out, &[&events, &calendar])?;
            commands::ingest::run(&settings, &events, &calendar, &out)
        }
        Command::Fit {
            dataset,
            out,
            variant,
            scope,
            seed,
            starts,
        } => {
            if let Some(v) = variant {
                settings.variant = Some(
                    v.parse()
                        .map_err(|e: newshawk_core::Error| CliError::input(e.to_string()))?,
                );
            }
            if let Some(s) = scope {
                settings.scope = s.parse()?;
            }
            set(&mut settings.seed, seed);
            set(&mut settings.starts, starts);
            let default_name = format!(
                "fits-{}-{}",
                settings
                    .variant
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "unset".into()),
                settings.scope.as_str()
            );
            let out = settings.out_dir(out, &default_name);
            guard_distinct(&out, &[&dataset])?;
            commands::fit::run(&settings, &dataset, &out)
        }
        Command::Compare { fits_a, fits_b, out } => {
            let out = settings.out_dir(out, "compare");
            guard_distinct(&out, &[&fits_a, &fits_b])?;
            commands::compare::run(&settings, &fits_a, &fits_b, &out)
        }
        Command::Simulate {
            dataset,
            unit,
            fits,
            out,
            against,
            replicas,
            bin_width,
            seed,
        } => {
            set(&mut settings.replicas, replicas);
            set(&mut settings.bin_width, bin_width);
            set(&mut settings.seed, seed);
            let out = settings.out_dir(out, &format!("sim-{unit}"));
            let mut inputs: Vec<&Path> = vec![&dataset, &fits];
            if let Some(b) = &against {
                inputs.push(b);
            }
            guard_distinct(&out, &inputs)?;
            commands::simulate::run(
                &settings,
                &dataset,
                &unit,
                &fits,
                against.as_deref(),
                &out,
            )
        }
        Command::Diagnose {
            dataset,
            unit,
            fits,
            out,
            bin_width,
        } => {
            set(&mut settings.bin_width, bin_width);
            let out = settings.out_dir(out, &format!("diag-{unit}"));
            guard_distinct(&out, &[&dataset, &fits])?;
            commands::diagnose::run(&settings, &dataset, &unit, &fits, &out)
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Commands never write into their inputs.
fn guard_distinct(out: &Path, inputs: &[&Path]) -> Result<(), CliError> {
    for input in inputs {
        let same = match (out.canonicalize(), input.canonicalize()) {
            (Ok(a), Ok(b)) => a == b,
            // The output usually does not exist yet; fall back to a
            // lexical comparison.
            _ => out == *input,
        };
        if same {
            return Err(CliError::input(format!(
                "output directory {} would overwrite an input",
                out.display()
            )));
        }
    }
    Ok(())
}
