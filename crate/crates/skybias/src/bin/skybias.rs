//! Thin command-line front end over [`skybias::pipeline`].
//!
//! Data goes to stdout (or `--output`), diagnostics to stderr. Exit status:
//! 0 on success, 1 on input/validation errors, 2 on internal errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use skybias::biasing::MaxOrder;
use skybias::pipeline::{
    self, Emit, PipelineConfig, PipelineError, DEFAULT_ACOUSTIC_SCALE, DEFAULT_DISCOUNT,
    DEFAULT_HALF_WINDOW_S, DEFAULT_MIN_ORDER, DEFAULT_RADIUS_DEG,
};

#[derive(Parser)]
#[command(
    name = "skybias",
    version,
    about = "Surveillance-driven contextual biasing and lattice rescoring for ATC speech"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Text,
    Lattices,
}

impl From<EmitArg> for Emit {
    fn from(value: EmitArg) -> Emit {
        match value {
            EmitArg::Text => Emit::Text,
            EmitArg::Lattices => Emit::Lattices,
        }
    }
}

fn parse_max_order(s: &str) -> Result<MaxOrder, String> {
    s.parse()
}

#[derive(Subcommand)]
enum Command {
    /// Retrieve per-utterance callsign contexts from a surveillance dump
    Context {
        /// Surveillance CSV (callsign,time,lat,lon)
        #[arg(long)]
        surveillance: PathBuf,
        /// Utterance metadata CSV (utt_id,time,lat,lon)
        #[arg(long)]
        meta: PathBuf,
        /// Airline telephony TSV (DESIGNATOR<TAB>telephony words)
        #[arg(long)]
        airlines: PathBuf,
        /// Time window half-width in seconds
        #[arg(long = "window-s", default_value_t = DEFAULT_HALF_WINDOW_S)]
        window_s: i64,
        /// Degree box half-width around the utterance position
        #[arg(long = "radius-deg", default_value_t = DEFAULT_RADIUS_DEG)]
        radius_deg: f64,
        /// Also generate "niner" digit variants
        #[arg(long)]
        niner: bool,
        /// Write output here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Expand ICAO callsigns into their spoken variants
    Verbalize {
        #[arg(long)]
        airlines: PathBuf,
        #[arg(long)]
        niner: bool,
        /// Callsigns to expand, e.g. DLH72W RYR1LD
        #[arg(required = true)]
        callsigns: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-score lattices with per-utterance biasing automata
    Rescore {
        /// Lattice text file
        #[arg(long)]
        lattices: PathBuf,
        /// Line-delimited JSON contexts from `context`
        #[arg(long)]
        contexts: PathBuf,
        /// Per-occurrence graph-cost bonus
        #[arg(long, default_value_t = DEFAULT_DISCOUNT)]
        discount: f64,
        #[arg(long = "min-order", default_value_t = DEFAULT_MIN_ORDER)]
        min_order: usize,
        /// Maximum n-gram order, or "all"
        #[arg(long = "max-order", default_value = "all", value_parser = parse_max_order)]
        max_order: MaxOrder,
        #[arg(long = "acoustic-scale", default_value_t = DEFAULT_ACOUSTIC_SCALE)]
        acoustic_scale: f64,
        /// Emit best-path text or rescored lattices
        #[arg(long, value_enum, default_value_t = EmitArg::Text)]
        emit: EmitArg,
        /// Worker threads (0 = machine default)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score hypotheses against references (WER, and CA-WER with callsigns)
    Score {
        /// Reference transcripts, one `<utt_id> <word> ...` per line
        #[arg(long)]
        refs: PathBuf,
        /// Hypothesis transcripts, same format
        #[arg(long)]
        hyps: PathBuf,
        /// Expanded ground-truth callsigns per utterance, same format
        #[arg(long)]
        callsigns: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-score and score across several discounts, emitting a TSV table
    Sweep {
        #[arg(long)]
        lattices: PathBuf,
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        refs: PathBuf,
        #[arg(long)]
        callsigns: PathBuf,
        /// Comma-separated discounts, e.g. 0,2,5
        #[arg(long, value_delimiter = ',', required = true)]
        discounts: Vec<f64>,
        #[arg(long = "min-order", default_value_t = DEFAULT_MIN_ORDER)]
        min_order: usize,
        #[arg(long = "max-order", default_value = "all", value_parser = parse_max_order)]
        max_order: MaxOrder,
        #[arg(long = "acoustic-scale", default_value_t = DEFAULT_ACOUSTIC_SCALE)]
        acoustic_scale: f64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Data sink: `--output` file or stdout.
fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, PipelineError> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|source| PipelineError::OpenInput {
                path: path.clone(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut diag = io::stderr();
    match cli.command {
        Command::Context {
            surveillance,
            meta,
            airlines,
            window_s,
            radius_deg,
            niner,
            output,
        } => {
            let config = PipelineConfig {
                surveillance: Some(surveillance),
                meta: Some(meta),
                airlines: Some(airlines),
                half_window_s: window_s,
                radius_deg,
                niner,
                ..PipelineConfig::default()
            };
            let mut out = open_output(&output)?;
            pipeline::run_context(&config, &mut out, &mut diag)?;
            out.flush()?;
        }
        Command::Verbalize {
            airlines,
            niner,
            callsigns,
            output,
        } => {
            let config = PipelineConfig {
                airlines: Some(airlines),
                niner,
                ..PipelineConfig::default()
            };
            let mut out = open_output(&output)?;
            pipeline::run_verbalize(&config, &callsigns, &mut out, &mut diag)?;
            out.flush()?;
        }
        Command::Rescore {
            lattices,
            contexts,
            discount,
            min_order,
            max_order,
            acoustic_scale,
            emit,
            workers,
            output,
        } => {
            let config = PipelineConfig {
                lattices: Some(lattices),
                contexts: Some(contexts),
                discount,
                min_order,
                max_order,
                acoustic_scale,
                emit: emit.into(),
                workers,
                ..PipelineConfig::default()
            };
            let mut out = open_output(&output)?;
            pipeline::run_rescore(&config, &mut out, &mut diag)?;
            out.flush()?;
        }
        Command::Score {
            refs,
            hyps,
            callsigns,
            output,
        } => {
            let config = PipelineConfig {
                refs: Some(refs),
                hyps: Some(hyps),
                callsigns,
                ..PipelineConfig::default()
            };
            let mut out = open_output(&output)?;
            pipeline::run_score(&config, &mut out, &mut diag)?;
            out.flush()?;
        }
        Command::Sweep {
            lattices,
            contexts,
            refs,
            callsigns,
            discounts,
            min_order,
            max_order,
            acoustic_scale,
            workers,
            output,
        } => {
            let config = PipelineConfig {
                lattices: Some(lattices),
                contexts: Some(contexts),
                refs: Some(refs),
                callsigns: Some(callsigns),
                min_order,
                max_order,
                acoustic_scale,
                workers,
                ..PipelineConfig::default()
            };
            let mut out = open_output(&output)?;
            pipeline::run_sweep(&config, &discounts, &mut out, &mut diag)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not errors; argument misuse is an input error.
            if err.use_stderr() {
                let _ = err.print();
                return ExitCode::from(1);
            }
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("skybias: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
