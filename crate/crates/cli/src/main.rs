mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdcssf::{ClassifierKind, ClassifierSpec, CvMode, Error, Splitter};

#[derive(Parser, Debug)]
#[command(name = "hdcssf", version, about = "Hierarchy induction and hierarchical classification for time series")]
pub struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory relative dataset paths are resolved against.
    #[arg(long, global = true, env = "HDCSSF_DATA_DIR")]
    pub data_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Nested or flat cross-validation of induced hierarchies.
    Cv(CvArgs),
    /// Grow a hierarchy and train its node classifiers on a whole dataset.
    Fit(FitArgs),
    /// Predict with a model written by `fit`.
    Predict(PredictArgs),
    /// Feature rows, correlations and improvement counts from cv reports.
    Analyze(AnalyzeArgs),
    /// Count similarity-distinct hierarchies.
    Trees(TreesArgs),
    /// Cost model figures for a chain or balanced tree.
    Bench(BenchArgs),
    /// Apply the class-count and accuracy filter to a set of datasets.
    Filter(FilterArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ClassifierArgs {
    #[arg(long, default_value = "linear")]
    pub classifier: ClassifierKind,
    /// Random kernels for the kernel-ridge classifier.
    #[arg(long, default_value_t = 512)]
    pub kernels: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lambda: f64,
}

impl ClassifierArgs {
    pub fn spec(&self, seed: u64) -> ClassifierSpec {
        ClassifierSpec {
            kind: self.classifier,
            num_kernels: self.kernels,
            ridge_lambda: self.lambda,
            seed,
        }
    }
}

#[derive(Args, Debug)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Nested)]
    pub mode: ModeArg,
    /// One or more of potr, srtr, lsoo, exhaustive.
    #[arg(long, value_delimiter = ',', default_value = "potr")]
    pub splitter: Vec<Splitter>,
    /// Iteration counts; several values run a sweep, e.g. 3,5,10,20,50.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub iters: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub outer: usize,
    #[arg(long, default_value_t = 4)]
    pub inner: usize,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// Name recorded in reports; defaults to the file stem.
    #[arg(long)]
    pub dataset_id: Option<String>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Nested,
    Flat,
    Both,
}

impl ModeArg {
    pub fn modes(self) -> Vec<CvMode> {
        match self {
            ModeArg::Nested => vec![CvMode::Nested],
            ModeArg::Flat => vec![CvMode::Flat],
            ModeArg::Both => vec![CvMode::Nested, CvMode::Flat],
        }
    }
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "potr")]
    pub splitter: Splitter,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Folds of the split the tree is grown on; the first is validation.
    #[arg(long, default_value_t = 4)]
    pub inner: usize,
    /// Use this nested-set tree instead of growing one.
    #[arg(long)]
    pub tree: Option<String>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Per-row predictions as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Report files, or directories searched for `*.json` reports.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Recompute balance figures from the datasets under --data-dir.
    #[arg(long)]
    pub recompute: bool,
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TreesArgs {
    #[arg(long)]
    pub classes: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeShape {
    Chain,
    Balanced,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub tree: TreeShape,
    #[arg(long)]
    pub classes: usize,
    #[arg(long)]
    pub instances: usize,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// Dataset files or UCR directories; defaults to every entry of --data-dir.
    pub datasets: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "linear,kernel-ridge")]
    pub classifiers: Vec<ClassifierKind>,
    #[arg(long, default_value_t = 512)]
    pub kernels: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_RUNTIME: u8 = 4;

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::OutOfRange(_) | Error::CapExceeded { .. } => EXIT_CONFIG,
        Error::InvalidDataset(_)
        | Error::Parse { .. }
        | Error::Ragged { .. }
        | Error::InvalidTree(_)
        | Error::LabelSpaceMismatch(_)
        | Error::FoldFeasibility { .. }
        | Error::LengthMismatch { .. }
        | Error::Io(_)
        | Error::Json(_) => EXIT_DATA,
        _ => EXIT_RUNTIME,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match exit_code(err) {
        EXIT_CONFIG => "config",
        EXIT_DATA => "data",
        _ => "runtime",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("{}", serde_json::json!({"error": {"kind": "config", "message": e.to_string()}}));
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            let record = serde_json::json!({
                "error": {"kind": error_kind(&e), "message": e.to_string(), "exit_code": code}
            });
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
