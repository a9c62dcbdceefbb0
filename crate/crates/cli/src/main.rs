//! `fogsim`: simulate scenarios, calibrate them, run the experiment sweeps,
//! probe real endpoints and render result tables.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Usage = 1,
    Config = 2,
    Runtime = 3,
    Calibration = 4,
}

/// An error together with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(status: Status, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            status,
            error: error.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fogsim",
    version,
    about = "Fog-robotics offloading simulator and latency probe"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its latency table.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Result CSV; `-` for standard output.
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-request trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Fit scenario parameters so chosen mean latencies hit their targets.
    Calibrate(CalibrateArgs),
    /// Run a calibrated experiment sweep.
    Experiment {
        #[arg(long, value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample cloud links from their measured min/avg/max triples.
        #[arg(long)]
        stochastic: bool,
    },
    /// Measure round-trip latency to an echo endpoint.
    Probe(ProbeArgs),
    /// Answer probes until interrupted.
    Echo {
        #[arg(long)]
        port: u16,
        /// Artificial delay before each echo, milliseconds.
        #[arg(long, default_value_t = 0)]
        delay: u64,
        #[arg(long)]
        stream: bool,
        #[arg(long, default_value = "0.0.0.0")]
        bind: String,
    },
    /// Print a result CSV as aligned tables.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: PathBuf,
    /// `LABEL=MS[,...]`; labels are `all`, a resolution or `class:<label>`.
    #[arg(long, value_delimiter = ',', required = true)]
    target: Vec<String>,
    /// `NAME=LO:HI[@LABEL][,...]`; without `@LABEL` the n-th knob drives the
    /// n-th target, and extra knobs the last one.
    #[arg(long, value_delimiter = ',', required = true)]
    knob: Vec<String>,
    /// Accepted relative error.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    /// Write the calibrated config here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[arg(long)]
    host: String,
    #[arg(long)]
    port: u16,
    #[arg(long, default_value_t = fogsim_probe::ProbeConfig::DEFAULT_COUNT)]
    count: u32,
    /// Payload bytes per packet.
    #[arg(long, default_value_t = fogsim_probe::ProbeConfig::DEFAULT_PAYLOAD_BYTES)]
    size: usize,
    /// Milliseconds between sends.
    #[arg(long, default_value_t = fogsim_probe::ProbeConfig::DEFAULT_INTERVAL_MS)]
    interval: u64,
    /// Milliseconds before a packet counts as lost.
    #[arg(long, default_value_t = fogsim_probe::ProbeConfig::DEFAULT_TIMEOUT_MS)]
    timeout: u64,
    #[arg(long)]
    stream: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    Ab,
    C,
    Rescue,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out, trace } => {
            commands::simulate(&config, &out, trace.as_deref())
        }
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Experiment {
            kind,
            out,
            seed,
            stochastic,
        } => commands::experiment(kind, &out, seed, stochastic),
        Command::Probe(a) => commands::probe(&a),
        Command::Echo {
            port,
            delay,
            stream,
            bind,
        } => commands::echo(&bind, port, delay, stream),
        Command::Report { input } => commands::report(&input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.status as u8)
        }
    }
}
