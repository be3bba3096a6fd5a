use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "penum", version, about = "Read, disambiguate and analyse proto-Elamite numerals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every reading of every numeral, plus the ambiguity summary.
    Convert(Common),
    /// Summary-line analysis over the whole corpus.
    Sumcheck(Common),
    /// Bootstrap a decision list from the unambiguous numerals.
    Train(TrainArgs),
    /// Assign a system to every intact numeral.
    Classify(ClassifyArgs),
    /// Score assignments against a hand-labelled test set.
    Evaluate(EvaluateArgs),
    /// Invalid notations, mixed tablets, sign associations, ratios, magnitudes.
    Report(ReportArgs),
    /// Write a seeded synthetic corpus with its planted systems.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// ATF transliteration file; repeat for several.
    #[arg(long, required = true)]
    pub corpus: Vec<PathBuf>,
    /// System table config (JSON). Overrides --profile.
    #[arg(long, conflicts_with = "profile")]
    pub tables: Option<PathBuf>,
    /// Built-in table profile.
    #[arg(long, default_value = "paper-examples")]
    pub profile: String,
    /// Reject malformed lines instead of skipping them.
    #[arg(long)]
    pub strict: bool,
    /// Diagnostic: ignore digit count limits when evaluating.
    #[arg(long)]
    pub no_max_count: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    #[value(alias = "FREQ_CAUTIOUS")]
    Freq,
    #[value(alias = "CONF_CAUTIOUS")]
    Conf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "conf")]
    pub strategy: StrategyArg,
    /// Confidence threshold.
    #[arg(long, default_value_t = 0.95)]
    pub zeta: f64,
    /// Additive smoothing.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Initial rule budget (frequency strategy).
    #[arg(long, default_value_t = 5)]
    pub n0: usize,
    /// Budget growth per iteration (frequency strategy).
    #[arg(long, default_value_t = 5)]
    pub n_step: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    /// Keep seed classes at their natural sizes.
    #[arg(long)]
    pub no_balance: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Model written by `train`; defaults to <out>/model.json.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Rows of tablet, line, system, evidence.
    #[arg(long)]
    pub test_set: PathBuf,
    /// Defaults to <out>/assignments.tsv.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// Macro instead of micro averaging.
    #[arg(long)]
    pub macro_average: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Defaults to <out>/assignments.tsv.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// Expected ratio between two objects, as ANTECEDENT:CONSEQUENT:RATIO,
    /// with an optional :adjacent suffix to pair neighbouring entries only.
    #[arg(long)]
    pub ratio: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    pub tablets: usize,
    /// Share of notations only one system can read.
    #[arg(long, default_value_t = 0.1)]
    pub seed_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}
