//! `irhvac`: thermal frames to HVAC schedules, AC usage and cycling reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use irhvac_cli::commands::{self, synth::SynthOptions, Context};
use irhvac_cli::config::RunConfig;
use irhvac_cli::error::{exit, CliError, Result};

const EXIT_CODES: &str = "\
Exit codes:
  0   all requested outputs written
  1   I/O or configuration error
  2   empty or missing input
  3   malformed input file
  4   not enough data for the analysis
  5   invalid scenario or frame layout
  64  command-line usage error";

#[derive(Debug, Parser)]
#[command(name = "irhvac", version, about = "Infrared facade analytics: temperature series, HVAC schedules and AC duty cycles", after_help = EXIT_CODES)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Leave generation timestamps out of figures so reruns are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-ROI temperature series from raw-count frames.
    Extract {
        /// Frame directory (a scene directory or its parent).
        #[arg(long, value_name = "DIR")]
        frames: Option<PathBuf>,
        /// ROI definition file.
        #[arg(long, value_name = "PATH")]
        rois: Option<PathBuf>,
    },
    /// Centralized HVAC switch-on and switch-off times from window and wall series.
    Schedule {
        /// Series directory holding `index.csv`.
        #[arg(long, value_name = "DIR")]
        series: Option<PathBuf>,
    },
    /// Window AC usage intervals, nightly cycling fractions and accuracy by hour.
    Acreport {
        /// Series directory holding `index.csv`.
        #[arg(long, value_name = "DIR")]
        series: Option<PathBuf>,
        /// Reference room temperature series for an AC, as `NAME=PATH`; repeatable.
        #[arg(long = "ground-truth", value_name = "NAME=PATH", value_parser = parse_truth)]
        ground_truth: Vec<(String, PathBuf)>,
    },
    /// Synthetic scenario: series, labels and raw-count frames.
    Synth {
        /// Scenario specification (JSON).
        spec: PathBuf,
        /// Frame layout (JSON); automatic when absent.
        #[arg(long, value_name = "PATH")]
        layout: Option<PathBuf>,
        /// Write series and labels only.
        #[arg(long)]
        no_frames: bool,
    },
}

fn parse_truth(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), path.into()))
        }
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}

fn context(cli: &Cli) -> Result<Context> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.paths.output = Some(out.clone());
    }
    match &cli.command {
        Command::Extract { frames, rois } => {
            if let Some(f) = frames {
                config.paths.frames = Some(f.clone());
            }
            if let Some(r) = rois {
                config.paths.rois = Some(r.clone());
            }
        }
        Command::Schedule { series } => {
            if let Some(s) = series {
                config.paths.series = Some(s.clone());
            }
        }
        Command::Acreport {
            series,
            ground_truth,
        } => {
            if let Some(s) = series {
                config.paths.series = Some(s.clone());
            }
            for (name, path) in ground_truth {
                config.paths.ground_truth.insert(name.clone(), path.clone());
            }
        }
        Command::Synth { .. } => {}
    }
    config.validate()?;
    Ok(Context {
        config,
        deterministic: cli.deterministic,
    })
}

fn run(cli: &Cli) -> Result<()> {
    let ctx = context(cli)?;
    match &cli.command {
        Command::Extract { .. } => {
            let s = commands::extract::run(&ctx)?;
            println!(
                "extract: {} frames, {} rejected, {} files skipped, {} series written",
                s.frames,
                s.rejected,
                s.skipped_files,
                s.series.len()
            );
        }
        Command::Schedule { .. } => {
            let r = commands::schedule::run(&ctx)?;
            println!(
                "schedule: {} days analysed, {} events",
                r.days.len(),
                r.events().len()
            );
        }
        Command::Acreport { .. } => {
            let r = commands::acreport::run(&ctx)?;
            for c in &r.cycling {
                println!(
                    "acreport: {} mean cycling fraction {:.3} over {} nights",
                    c.ac_name,
                    c.overall_mean_fraction,
                    c.usable_nights()
                );
            }
        }
        Command::Synth {
            spec,
            layout,
            no_frames,
        } => {
            let opts = SynthOptions {
                layout: layout.clone(),
                frames: !no_frames,
            };
            let sc = commands::synth::run(&ctx, spec, &opts)?;
            println!(
                "synth: {} samples, {} ACs, {} events{}",
                sc.wall.len(),
                sc.condensers.len(),
                sc.labels.events.len(),
                if *no_frames { "" } else { ", frames written" }
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            report_source(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report_source(e: &CliError) {
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}
