//! `spformat`: convert, benchmark, featurize, train and predict over Matrix
//! Market corpora.
//!
//! Every command first prints a `# config:` line naming every effective
//! setting, defaults included. Exit codes: 0 success, 1 unreadable input,
//! 2 conversion failure, 3 model file failure, 4 empty result set.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spformat::{FormatParams, FormatTag};

#[derive(Debug, Parser)]
#[command(name = "spformat", version, about = "Sparse format benchmarking and selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert matrices to a format, verify the round trip and print layout stats.
    Convert(ConvertArgs),
    /// Multiply a matrix by the all-ones vector and print y.
    Spmv(SpmvArgs),
    /// Benchmark every matrix of a corpus in every requested format.
    Bench(BenchArgs),
    /// Extract static features for matrices or corpora.
    Features(FeaturesArgs),
    /// Train a model from features and benchmark records, then cross-validate it.
    Train(TrainArgs),
    /// Cross-validate without writing a model.
    Cv(TrainArgs),
    /// Predict the best format of a matrix with a trained model.
    Predict(PredictArgs),
    /// Summarize benchmark records: best-format distribution and slowdowns.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
struct ParamArgs {
    /// CSR5 tile width.
    #[arg(long, default_value_t = FormatParams::default().csr5_omega)]
    omega: usize,
    /// CSR5 tile height.
    #[arg(long, default_value_t = FormatParams::default().csr5_sigma)]
    sigma: usize,
    /// SELL slice height.
    #[arg(long = "sell-c", default_value_t = FormatParams::default().sell_c)]
    sell_c: usize,
    /// SELL sorting window (0 disables sorting).
    #[arg(long = "sell-sigma", default_value_t = FormatParams::default().sell_sigma)]
    sell_sigma: usize,
}

impl ParamArgs {
    fn params(&self) -> FormatParams {
        FormatParams {
            csr5_omega: self.omega,
            csr5_sigma: self.sigma,
            sell_c: self.sell_c,
            sell_sigma: self.sell_sigma,
        }
    }

    fn describe(&self) -> String {
        format!(
            "--omega {} --sigma {} --sell-c {} --sell-sigma {}",
            self.omega, self.sigma, self.sell_c, self.sell_sigma
        )
    }
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Matrix Market files or directories searched recursively for *.mtx.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "csr")]
    format: FormatTag,
    #[command(flatten)]
    params: ParamArgs,
    /// Matrices converted concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct SpmvArgs {
    input: PathBuf,
    #[arg(long, default_value = "csr")]
    format: FormatTag,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write y here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClockKind {
    /// Monotonic wall-clock time.
    Wall,
    /// Deterministic feature-based cost model (for testing pipelines).
    CostModel,
}

#[derive(Debug, Args)]
struct BenchArgs {
    corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = FormatTag::ALL)]
    formats: Vec<FormatTag>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long = "min-reps", default_value_t = 5)]
    min_reps: usize,
    #[arg(long = "max-reps", default_value_t = 1000)]
    max_reps: usize,
    /// Run exactly this many timed repetitions instead of the interval rule.
    #[arg(long = "fixed-reps")]
    fixed_reps: Option<usize>,
    /// Stop once the confidence interval is narrower than this fraction of the mean.
    #[arg(long = "ci-gap", default_value_t = 0.05)]
    ci_gap: f64,
    #[arg(long, default_value_t = 2)]
    warmup: usize,
    #[arg(long, value_enum, default_value_t = ClockKind::Wall)]
    clock: ClockKind,
    /// Write records here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Feature records from `spformat features`.
    #[arg(long)]
    features: PathBuf,
    /// Benchmark records from `spformat bench`.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value_t = spformat::model::DEFAULT_MAX_DEPTH)]
    depth: usize,
    #[arg(long = "min-leaf", default_value_t = spformat::model::DEFAULT_MIN_SAMPLES_LEAF)]
    min_leaf: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model output path (required by `train`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Also convert and time one SpMV benchmark in the predicted format.
    #[arg(long)]
    run: bool,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Args)]
struct ReportArgs {
    records: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap would exit with 2 on bad arguments, which means a conversion failure here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
