//! `edraw`: command-line front end for the drawing pipeline, parsers,
//! dataset tools and evaluation harness.
//!
//! Exit codes: 0 success, 1 domain or validation failure, 2 I/O or usage
//! failure. Diagnostics go to standard error.

mod dataset;
mod evaluate;
mod output;
mod parse;
mod run;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use edraw_core::AnnotationClass;

pub use output::Failure;

#[derive(Parser)]
#[command(
    name = "edraw",
    version,
    about = "Structured extraction from engineering drawings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Measure,
    Gdt,
    Roughness,
}

impl From<ClassArg> for AnnotationClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Measure => AnnotationClass::Measure,
            ClassArg::Gdt => AnnotationClass::Gdt,
            ClassArg::Roughness => AnnotationClass::Roughness,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the three-stage pipeline on every image in a directory.
    Run {
        /// Directory of drawing images (png, jpg, jpeg).
        #[arg(long)]
        input: PathBuf,
        /// Replay manifest serving recorded detections and reader text.
        #[arg(long)]
        replay: PathBuf,
        /// Pipeline settings (TOML); built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for `<id>.unified.json` files.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads [default: logical cores].
        #[arg(long)]
        workers: Option<usize>,
        /// Record the wall-clock time in each output document.
        #[arg(long)]
        stamp: bool,
    },
    /// Parse one annotation string and print the structured record.
    Parse {
        /// Annotation class.
        #[arg(long, value_enum)]
        class: ClassArg,
        /// Annotation text, e.g. "⌖|⌀0.1|A|B|C".
        text: String,
    },
    /// Count labels per class in a dataset directory.
    Stats {
        /// Dataset root; every `*.txt` label file below it is counted.
        #[arg(long)]
        input: PathBuf,
        /// Output file [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a generation timestamp to the report.
        #[arg(long)]
        stamp: bool,
    },
    /// Shuffle ids with a seed and cut them into parts.
    Split {
        /// File with one id per line.
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated part ratios summing to 1.
        #[arg(long, value_delimiter = ',', default_value = "0.8,0.2")]
        ratios: Vec<f64>,
        /// Shuffle seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output file [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a generation timestamp to the report.
        #[arg(long)]
        stamp: bool,
    },
    /// Score detections against ground-truth label files.
    EvalDetect {
        /// Directory of prediction label files (ground-truth layout plus a
        /// trailing confidence column).
        #[arg(long)]
        pred: PathBuf,
        /// Directory of ground-truth label files.
        #[arg(long)]
        gt: PathBuf,
        /// Minimum IoU for a match, in (0, 1].
        #[arg(long, default_value_t = 0.5)]
        iou_threshold: f64,
        /// Report format.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a generation timestamp to the report (JSON only).
        #[arg(long)]
        stamp: bool,
    },
    /// Score extracted text fields against ground truth.
    EvalParse {
        /// Predicted records (JSONL: id, kind, and fields or text).
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth records in the same layout.
        #[arg(long)]
        gt: PathBuf,
        /// Report format.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a generation timestamp to the report (JSON only).
        #[arg(long)]
        stamp: bool,
    },
    /// Check a unified document against every schema rule.
    Validate {
        /// Path to a `unified.json` file.
        #[arg(long)]
        input: PathBuf,
    },
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            input,
            replay,
            config,
            out,
            workers,
            stamp,
        } => run::run(&input, &replay, config.as_deref(), &out, workers, stamp),
        Command::Parse { class, text } => parse::parse(class.into(), &text),
        Command::Stats { input, out, stamp } => dataset::stats(&input, out.as_deref(), stamp),
        Command::Split {
            input,
            ratios,
            seed,
            out,
            stamp,
        } => dataset::split(&input, ratios, seed, out.as_deref(), stamp),
        Command::EvalDetect {
            pred,
            gt,
            iou_threshold,
            format,
            out,
            stamp,
        } => evaluate::detect(&pred, &gt, iou_threshold, format, out.as_deref(), stamp),
        Command::EvalParse {
            pred,
            gt,
            format,
            out,
            stamp,
        } => evaluate::fields(&pred, &gt, format, out.as_deref(), stamp),
        Command::Validate { input } => validate::validate(&input),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for m in &f.messages {
                eprintln!("error: {m}");
            }
            ExitCode::from(f.code)
        }
    }
}
