mod detect;
mod ingest;
mod mc;
mod simulate;
mod text;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use corrbreak::lrv::{Bandwidth, HacConfig};
use corrbreak::SegmentationConfig;

use crate::detect::{DetectArgs, Formats};
use crate::ingest::InputError;
use crate::mc::{McArgs, McFormat};
use crate::simulate::{AstarArgs, Model, SimulateArgs};

const DETECT_HELP: &str = "\
Input: a CSV file with a header row and either two columns (x, y) or three
(label, x, y). Comma or tab separated; labels are passed through untouched.

Output in --out:
  report.json       configuration, full report and iteration table (json)
  changepoints.csv  index, fraction, date                               (csv)
  segments.csv      start, end, start_date, end_date, correlation       (csv)
  iterations.csv    step, round, start, end, statistic, critical_value,
                    significant, change_point, time_point, date         (csv)
  profiles/*.csv    index, fraction, abs_A_T per tested interval  (--emit-profiles)
Indices are 1-based observation numbers; a change point k means the new
regime starts at observation k + 1.

Exit status: 0 success, 2 input error, 3 numerical error.";

#[derive(Parser)]
#[command(name = "corrbreak", version, about = "Change points in the correlation of two time series")]
struct Cli {
    /// More log output (repeat for debug level).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Segmentation {
    /// Initial significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha0: f64,
    /// Shortest segment that is tested.
    #[arg(long, default_value_t = 20)]
    n_min: usize,
    /// Kernel bandwidth: `log` for floor(ln n) or `fixed:H`.
    #[arg(long, default_value = "log", value_parser = parse_bandwidth)]
    bandwidth: Bandwidth,
    /// Stop after this many change points.
    #[arg(long)]
    max_changepoints: Option<usize>,
}

impl Segmentation {
    fn config(&self) -> SegmentationConfig {
        SegmentationConfig {
            alpha0: self.alpha0,
            n_min: self.n_min,
            max_changepoints: self.max_changepoints,
            hac: HacConfig { bandwidth: self.bandwidth, ..HacConfig::default() },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Detect change points in a CSV file.
    #[command(after_help = DETECT_HELP)]
    Detect {
        #[arg(long, short)]
        input: PathBuf,
        /// Output directory.
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        seg: Segmentation,
        /// Output files to write: json, csv or both.
        #[arg(long, value_delimiter = ',', default_value = "json")]
        format: Vec<String>,
        /// Write the |A_T| curve of every tested interval.
        #[arg(long)]
        emit_profiles: bool,
    },
    /// Simulate a VAR(1) or DCC pair and write it as CSV (t, x, y).
    Simulate {
        /// TOML file holding a simulation spec; replaces the model flags.
        #[arg(long, conflicts_with_all = ["model", "phi", "t", "breaks", "levels"])]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "var1")]
        model: Model,
        /// Autoregressive coefficient (VAR(1) only).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, short = 'n', default_value_t = 1000)]
        t: usize,
        /// Break fractions in (0, 1), comma separated.
        #[arg(long, value_delimiter = ',')]
        breaks: Vec<f64>,
        /// Correlation levels, one more than breaks.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.5")]
        levels: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a named Monte Carlo design.
    Mc {
        /// One of var-null, var-break-early, var-break-mid, var-break-late,
        /// var-two-breaks, var-two-breaks-mean, dcc-null, dcc-break,
        /// dcc-two-breaks.
        #[arg(long)]
        design: String,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample sizes, comma separated; the design's own list when absent.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Worker threads; all cores when absent.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        seg: Segmentation,
        #[arg(long, value_enum, default_value = "text")]
        format: McFormat,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Evaluate the dominance function of a step correlation path.
    Astar {
        #[arg(long, value_delimiter = ',')]
        breaks: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        l1: f64,
        #[arg(long, default_value_t = 1.0)]
        l2: f64,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        /// CSV file for the curve (z, abs_A_star).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    match s {
        "log" => Ok(Bandwidth::LogFloor),
        _ => match s.strip_prefix("fixed:").map(str::parse::<usize>) {
            Some(Ok(h)) if h > 0 => Ok(Bandwidth::Fixed(h)),
            _ => Err(format!("expected `log` or `fixed:H` with H >= 1, got `{s}`")),
        },
    }
}

fn formats(list: &[String]) -> Result<Formats> {
    let mut f = Formats { json: false, csv: false };
    for item in list {
        match item.as_str() {
            "json" => f.json = true,
            "csv" => f.csv = true,
            other => bail!(InputError(format!("unknown format `{other}`; use json and/or csv"))),
        }
    }
    Ok(f)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect { input, out, seg, format, emit_profiles } => {
            detect::run(&DetectArgs { input, out, config: seg.config(), formats: formats(&format)?, emit_profiles })
        }
        Command::Simulate { config, model, phi, t, breaks, levels, seed, out } => {
            simulate::run(&SimulateArgs { config, model, phi, t, breaks, levels, seed, out })
        }
        Command::Mc { design, reps, seed, sizes, threads, seg, format, out } => {
            mc::run(&McArgs { design, reps, seed, sizes, threads, config: seg.config(), format, out })
        }
        Command::Astar { breaks, levels, l1, l2, grid, out } => {
            simulate::run_astar(&AstarArgs { breaks, levels, l1, l2, grid, out })
        }
    }
}

/// 2 for bad input or parameters, 3 when the numerics break down, 1 for
/// anything else (mostly I/O on the output side).
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<corrbreak::Error>() {
            return if e.is_untestable() { 3 } else { 2 };
        }
    }
    1
}

/// Output piped into `head` and the like.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<csv::Error>().is_some_and(
                |e| matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe),
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
