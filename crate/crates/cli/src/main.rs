mod commands;
mod inputs;
mod table;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gecmetric::analysis::AggregationMode;
use gecmetric::gleu::MultiRefMode;
use gecmetric::util::DEFAULT_SEED;

/// Scores grammatical error correction output and analyses how well the
/// metrics agree with human judgements.
#[derive(Debug, Parser)]
#[command(name = "gecmetric", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Worker threads for sentence-level scoring [default: available parallelism]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Write the JSON report here and print a summary table to stdout.
    /// Without it, the report is written to stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Significant digits for reals in reports; 0 keeps full precision
    #[arg(long, global = true, default_value_t = 6, value_name = "DIGITS")]
    precision: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score system outputs with one or more metrics.
    Score(ScoreArgs),
    /// Rank systems by a metric stored in a report.
    Rank(RankArgs),
    /// Correlate report metrics with a human ranking.
    Correlate(CorrelateArgs),
    /// Sweep the interpolation weight between a reference-less and a
    /// reference-based metric stored in a report.
    Sweep(SweepArgs),
    /// Measure how the oracle correlation depends on the number of references.
    Ablate(AblateArgs),
    /// Rescore against shuffled references and report the score drop.
    Gaming(GamingArgs),
    /// Train the linguistic feature-based model.
    TrainLfm(TrainLfmArgs),
    /// Run the error detectors on sentences and list what they find.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Gleu,
    M2,
    IMeasure,
    ErrorCount,
    Lfm,
}

impl From<MetricArg> for gecmetric::scoring::Metric {
    fn from(m: MetricArg) -> Self {
        use gecmetric::scoring::Metric;
        match m {
            MetricArg::Gleu => Metric::Gleu,
            MetricArg::M2 => Metric::M2,
            MetricArg::IMeasure => Metric::IMeasure,
            MetricArg::ErrorCount => Metric::ErrorCount,
            MetricArg::Lfm => Metric::Lfm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Sentence,
    Corpus,
}

impl From<ModeArg> for AggregationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sentence => AggregationMode::Sentence,
            ModeArg::Corpus => AggregationMode::Corpus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GleuModeArg {
    Sampled,
    MeanOverAll,
}

impl From<GleuModeArg> for MultiRefMode {
    fn from(m: GleuModeArg) -> Self {
        match m {
            GleuModeArg::Sampled => MultiRefMode::Sampled,
            GleuModeArg::MeanOverAll => MultiRefMode::MeanOverAll,
        }
    }
}

/// Source sentences, references and system outputs.
#[derive(Debug, Args)]
struct CorpusArgs {
    /// Gold annotations in M² format; also provides sources and references
    #[arg(long, value_name = "PATH")]
    m2: Option<PathBuf>,

    /// Source sentences, one per line (when no M² file is given)
    #[arg(long, value_name = "PATH", conflicts_with = "m2")]
    source: Option<PathBuf>,

    /// Reference file, one sentence per line; repeat for more references
    #[arg(long = "ref", value_name = "PATH")]
    refs: Vec<PathBuf>,

    /// System output, one sentence per line, as `ID=PATH` or `PATH` (the
    /// file stem is the id); repeat for more systems
    #[arg(long = "hyp", value_name = "[ID=]PATH", required = true)]
    hyps: Vec<String>,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// GLEU reference draws per sentence in sampled mode
    #[arg(long, default_value_t = 500, value_name = "K")]
    gleu_iterations: usize,

    /// How GLEU combines multiple references
    #[arg(long, value_enum, default_value_t = GleuModeArg::Sampled)]
    gleu_mode: GleuModeArg,

    /// Seed for every random choice
    #[arg(long, env = "GECMETRIC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// M² F-measure β
    #[arg(long, default_value_t = 0.5)]
    m2_beta: f64,

    /// Unchanged tokens allowed inside a merged M² edit
    #[arg(long, default_value_t = 2, value_name = "N")]
    m2_max_unchanged: usize,

    /// I-measure weight on corrected tokens
    #[arg(long, default_value_t = 2.0, value_name = "W")]
    im_weight: f64,

    #[command(flatten)]
    detectors: DetectorArgs,

    /// Trained LFM model file
    #[arg(long, value_name = "PATH")]
    lfm_model: Option<PathBuf>,

    /// Language model training text for LFM features, one sentence per line
    #[arg(long, value_name = "PATH")]
    lm_corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectorArgs {
    /// Detectors to run: spell, duplicate, article, capitalization,
    /// terminal-punctuation, punctuation-spacing, external, or all
    /// [default: every built-in, with spell only when --wordlist is given,
    /// plus external when --checker-cmd is given]
    #[arg(long = "detector", value_name = "ID", value_delimiter = ',')]
    detectors: Vec<String>,

    /// Wordlist for the spell detector and LFM features, one word per line
    #[arg(long, value_name = "PATH")]
    wordlist: Option<PathBuf>,

    /// External checker command line (split on whitespace)
    #[arg(long, value_name = "COMMAND")]
    checker_cmd: Option<String>,

    /// Number of external checker processes
    #[arg(long, default_value_t = 1, value_name = "N")]
    checker_pool: usize,

    /// Per-request timeout for the external checker, in milliseconds
    #[arg(long, default_value_t = 10_000, value_name = "MS")]
    checker_timeout_ms: u64,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Metric to compute; repeat for several
    #[arg(long = "metric", value_enum, required = true)]
    metrics: Vec<MetricArg>,

    /// Aggregation recorded as each entry's ranking mode
    #[arg(long, value_enum, default_value_t = ModeArg::Sentence)]
    mode: ModeArg,

    #[command(flatten)]
    metric_args: MetricArgs,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Report written by `score`
    #[arg(long, value_name = "PATH")]
    report: PathBuf,

    /// Metric to rank by [default: every metric in the report]
    #[arg(long = "metric", value_name = "NAME")]
    metrics: Vec<String>,

    /// Use the mean sentence score or the pooled corpus score
    #[arg(long, value_enum, default_value_t = ModeArg::Sentence)]
    mode: ModeArg,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    /// Report written by `score`
    #[arg(long, value_name = "PATH")]
    report: PathBuf,

    /// Human ranking: `system<TAB>score` per line, higher is better
    #[arg(long, value_name = "PATH")]
    human: PathBuf,

    /// Metric to correlate [default: every metric in the report]
    #[arg(long = "metric", value_name = "NAME")]
    metrics: Vec<String>,

    /// Use the mean sentence score or the pooled corpus score
    #[arg(long, value_enum, default_value_t = ModeArg::Sentence)]
    mode: ModeArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Report written by `score` containing both metrics
    #[arg(long, value_name = "PATH")]
    report: PathBuf,

    /// Human ranking: `system<TAB>score` per line
    #[arg(long, value_name = "PATH")]
    human: PathBuf,

    /// Reference-less metric (weight 1 − λ)
    #[arg(long, value_name = "NAME")]
    gbm: String,

    /// Reference-based metric (weight λ)
    #[arg(long, value_name = "NAME")]
    rbm: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GbmArg {
    ErrorCount,
    Lfm,
}

impl From<GbmArg> for gecmetric::scoring::Metric {
    fn from(m: GbmArg) -> Self {
        match m {
            GbmArg::ErrorCount => gecmetric::scoring::Metric::ErrorCount,
            GbmArg::Lfm => gecmetric::scoring::Metric::Lfm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RbmArg {
    Gleu,
    IMeasure,
}

impl From<RbmArg> for gecmetric::scoring::Metric {
    fn from(m: RbmArg) -> Self {
        match m {
            RbmArg::Gleu => gecmetric::scoring::Metric::Gleu,
            RbmArg::IMeasure => gecmetric::scoring::Metric::IMeasure,
        }
    }
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Human ranking: `system<TAB>score` per line
    #[arg(long, value_name = "PATH")]
    human: PathBuf,

    /// Reference-less metric (weight 1 − λ)
    #[arg(long, value_enum, default_value_t = GbmArg::ErrorCount)]
    gbm: GbmArg,

    /// Reference-based metric (weight λ)
    #[arg(long, value_enum, default_value_t = RbmArg::Gleu)]
    rbm: RbmArg,

    /// Reference counts to test [default: 1 up to the available count]
    #[arg(long, value_name = "N", value_delimiter = ',')]
    sizes: Vec<usize>,

    /// Random subsets per reference count
    #[arg(long, default_value_t = 10)]
    trials: usize,

    #[command(flatten)]
    metric_args: MetricArgs,
}

#[derive(Debug, Args)]
struct GamingArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Reference-less metric (weight 1 − λ)
    #[arg(long, value_enum, default_value_t = GbmArg::ErrorCount)]
    gbm: GbmArg,

    /// Reference-based metric (weight λ)
    #[arg(long, value_enum, default_value_t = RbmArg::Gleu)]
    rbm: RbmArg,

    /// Interpolation weight on the reference-based metric
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,

    #[command(flatten)]
    metric_args: MetricArgs,
}

#[derive(Debug, Args)]
struct TrainLfmArgs {
    /// Training data: `sentence<TAB>score` per line
    #[arg(long, value_name = "PATH")]
    train: PathBuf,

    /// Language model training text, one sentence per line
    #[arg(long, value_name = "PATH")]
    lm_corpus: PathBuf,

    /// Wordlist for the misspelling feature
    #[arg(long, value_name = "PATH")]
    wordlist: PathBuf,

    /// Ridge penalty α
    #[arg(long, default_value_t = gecmetric::lfm::DEFAULT_ALPHA)]
    alpha: f64,

    /// Map scores on the 1–4 judgement scale linearly onto [0, 1]
    #[arg(long)]
    rescale_1_4: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Sentences to check (pre-tokenized); read from --input or stdin when absent
    #[arg(value_name = "SENTENCE")]
    sentences: Vec<String>,

    /// File with one sentence per line
    #[arg(long, value_name = "PATH", conflicts_with = "sentences")]
    input: Option<PathBuf>,

    #[command(flatten)]
    detectors: DetectorArgs,
}

/// A problem with the command line rather than with the data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// 1 usage, 2 data, 3 external checker.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<gecmetric::Error>() {
            return match e {
                gecmetric::Error::Detector { .. } => 3,
                gecmetric::Error::InvalidArgument(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            log::error!("{err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
