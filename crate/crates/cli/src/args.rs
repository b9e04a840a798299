use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csa_core::cca::{DEFAULT_EPS, DEFAULT_THRESHOLD};
use csa_core::{DegeneratePolicy, SRule};

/// Canonical similarity analysis: align two unimodal embedding spaces with a
/// closed-form fit and score cross-modal pairs.
///
/// Exit status: 0 on success, 1 on invalid input or usage, 2 on numerical failure.
/// CSA_THREADS caps worker threads (0 or unset = one per core).
#[derive(Debug, Parser)]
#[command(name = "csa", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on the training pairs of a manifest.
    Fit(FitArgs),
    /// Write the full score matrix for the evaluation split.
    Score(ScoreArgs),
    /// Zero-shot classification of modality-1 items against class features.
    Classify(ClassifyArgs),
    /// Cross-modal retrieval metrics on the evaluation split.
    Retrieve(RetrieveArgs),
    /// ROC and AUC for detecting aligned (or misinformative) pairs.
    Detect(DetectArgs),
    /// Synthetic linear latent-factor experiments.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Accuracy as a growing fraction of training pairs is shuffled.
    Robustness(RobustnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreFormat {
    /// Tab-separated, header row of modality-2 ids
    Tsv,
    /// CSAF container, double precision, one item per modality-1 row
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitChoice {
    /// The test split when the manifest has one, otherwise the training split
    Auto,
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Degenerate {
    /// Abort on a zero-norm projected vector
    Error,
    /// Score pairs with a zero-norm vector as 0
    Zero,
}

impl From<Degenerate> for DegeneratePolicy {
    fn from(d: Degenerate) -> Self {
        match d {
            Degenerate::Error => DegeneratePolicy::Error,
            Degenerate::Zero => DegeneratePolicy::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    #[value(name = "1to2")]
    OneToTwo,
    #[value(name = "2to1")]
    TwoToOne,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset manifest (JSON)
    pub manifest: PathBuf,
    /// Output model file, or - for standard output
    #[arg(short = 'o', long = "output")]
    pub output: String,
    /// Relative ridge added to each second-moment matrix
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Keep canonical dimensions with correlation at least this value
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, conflicts_with = "s_fixed")]
    pub s_threshold: f64,
    /// Keep exactly this many canonical dimensions (overrides --s-threshold)
    #[arg(long)]
    pub s_fixed: Option<usize>,
}

impl FitArgs {
    pub fn rule(&self) -> SRule {
        match self.s_fixed {
            Some(k) => SRule::Fixed(k),
            None => SRule::Threshold(self.s_threshold),
        }
    }
}

/// Options shared by commands that apply a fitted model to a manifest.
#[derive(Debug, Args)]
pub struct ModelInput {
    /// Fitted model file
    pub model: PathBuf,
    /// Dataset manifest (JSON)
    pub manifest: PathBuf,
    /// Which pairs to evaluate
    #[arg(long, value_enum, default_value_t = SplitChoice::Auto)]
    pub split: SplitChoice,
    /// Override the model's retained dimension with a fixed count
    #[arg(long, conflicts_with = "s_threshold")]
    pub s_fixed: Option<usize>,
    /// Override the model's retained dimension with a correlation threshold
    #[arg(long)]
    pub s_threshold: Option<f64>,
    /// Handling of zero-norm projected vectors
    #[arg(long, value_enum, default_value_t = Degenerate::Error)]
    pub degenerate: Degenerate,
    /// Output path, or - for standard output
    #[arg(short = 'o', long = "output", default_value = "-")]
    pub output: String,
}

impl ModelInput {
    pub fn rule(&self) -> Option<SRule> {
        match (self.s_fixed, self.s_threshold) {
            (Some(k), _) => Some(SRule::Fixed(k)),
            (None, Some(t)) => Some(SRule::Threshold(t)),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: ModelInput,
    /// Score file format
    #[arg(long, value_enum, default_value_t = ScoreFormat::Tsv)]
    pub format: ScoreFormat,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: ModelInput,
    /// Modality-2 feature file with one item per class; its ids are the class labels
    #[arg(long)]
    pub classes: PathBuf,
    /// Evaluate every retained dimension 1..=r and mark the best
    #[arg(long, conflicts_with_all = ["s_fixed", "s_threshold"])]
    pub s_sweep: bool,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    #[command(flatten)]
    pub input: ModelInput,
    /// Retrieval cutoff
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Query modality to candidate modality
    #[arg(long, value_enum, default_value_t = Direction::OneToTwo)]
    pub direction: Direction,
    /// Fail on queries without relevant candidates instead of skipping them
    #[arg(long)]
    pub strict: bool,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: ModelInput,
    /// Misinformation mode: flag a pair when both its score and its second score
    /// fall below their thresholds; pair labels mark misinformative pairs (1)
    #[arg(long, requires = "second_scores")]
    pub two_threshold: bool,
    /// Second score per pair for --two-threshold: TSV with header id1, id2, score
    #[arg(long)]
    pub second_scores: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Signal-to-noise, smallest gain and rank-sum p-value versus retained dimension
    Tradeoff(TradeoffArgs),
    /// Write a labeled synthetic class task as feature files and a manifest
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    /// Latent dimension
    #[arg(long, default_value_t = 10)]
    pub q: usize,
    /// Modality-1 observation dimension
    #[arg(long, default_value_t = 40)]
    pub p1: usize,
    /// Modality-2 observation dimension
    #[arg(long, default_value_t = 60)]
    pub p2: usize,
    /// Number of paired samples
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Observation noise standard deviation
    #[arg(long, default_value_t = 17.0)]
    pub noise_sigma: f64,
    /// Latent standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub latent_sigma: f64,
    /// Retained dimensions to evaluate, comma separated (default: 1..=q)
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<usize>>,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path, or - for standard output
    #[arg(short = 'o', long = "output", default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Directory for features1.csaf, features2.csaf, classes.csaf and manifest.json
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Latent dimension
    #[arg(long, default_value_t = 10)]
    pub q: usize,
    /// Modality-1 observation dimension
    #[arg(long, default_value_t = 40)]
    pub p1: usize,
    /// Modality-2 observation dimension
    #[arg(long, default_value_t = 60)]
    pub p2: usize,
    /// Number of latent classes
    #[arg(long, default_value_t = 10)]
    pub n_classes: usize,
    /// Training pairs
    #[arg(long, default_value_t = 2000)]
    pub n_train: usize,
    /// Test pairs
    #[arg(long, default_value_t = 1000)]
    pub n_test: usize,
    /// Observation noise standard deviation
    #[arg(long, default_value_t = 5.0)]
    pub noise_sigma: f64,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    /// Dataset manifest (JSON); fits on its training pairs
    pub manifest: PathBuf,
    /// Shuffled fractions of training pairs, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub fractions: Vec<f64>,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Repetitions per non-zero fraction
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Class feature file; metric becomes classification accuracy (default: precision@1 of 1to2 retrieval)
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Relative ridge added to each second-moment matrix
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Keep exactly this many canonical dimensions (default: all of them)
    #[arg(long, conflicts_with = "s_threshold")]
    pub s_fixed: Option<usize>,
    /// Keep canonical dimensions with correlation at least this value
    #[arg(long)]
    pub s_threshold: Option<f64>,
    /// Which pairs to evaluate
    #[arg(long, value_enum, default_value_t = SplitChoice::Auto)]
    pub split: SplitChoice,
    /// Handling of zero-norm projected vectors
    #[arg(long, value_enum, default_value_t = Degenerate::Error)]
    pub degenerate: Degenerate,
    /// Report format
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    /// Output path, or - for standard output
    #[arg(short = 'o', long = "output", default_value = "-")]
    pub output: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn leaf_commands(cmd: &clap::Command, path: String, out: &mut Vec<(String, clap::Command)>) {
        let subs: Vec<_> = cmd.get_subcommands().filter(|s| s.get_name() != "help").collect();
        if subs.is_empty() {
            out.push((path.clone(), cmd.clone()));
        }
        for sub in subs {
            leaf_commands(sub, format!("{path} {}", sub.get_name()), out);
        }
    }

    #[test]
    fn help_lists_every_flag_and_default() {
        Cli::command().debug_assert();
        let mut leaves = Vec::new();
        leaf_commands(&Cli::command(), "csa".into(), &mut leaves);
        assert_eq!(leaves.len(), 8);
        for (path, mut cmd) in leaves {
            let help = cmd.render_long_help().to_string();
            for arg in cmd.get_arguments() {
                let id = arg.get_id().as_str();
                if id == "help" || id == "version" {
                    continue;
                }
                match arg.get_long() {
                    Some(long) => assert!(help.contains(&format!("--{long}")), "{path}: --{long} missing"),
                    None => {
                        let name = arg.get_value_names().map(|v| v[0].to_string()).unwrap_or_else(|| id.to_uppercase());
                        assert!(help.contains(&name), "{path}: <{name}> missing");
                    }
                }
                assert!(arg.get_help().is_some() || arg.get_long_help().is_some(), "{path}: {id} undocumented");
                let defaults = if arg.get_action().takes_values() { arg.get_default_values() } else { &[] };
                for default in defaults {
                    let shown = format!("[default: {}", default.to_string_lossy());
                    assert!(help.contains(&shown), "{path}: default of {id} missing");
                }
            }
        }
    }

    #[test]
    fn fit_rule_flags() {
        let cli = Cli::try_parse_from(["csa", "fit", "m.json", "-o", "x", "--s-fixed", "3"]).unwrap();
        let Command::Fit(f) = cli.command else { panic!() };
        assert_eq!(f.rule(), SRule::Fixed(3));
        assert!(Cli::try_parse_from(["csa", "fit", "m.json", "-o", "x", "--s-fixed", "3", "--s-threshold", "0.1"]).is_err());
        let cli = Cli::try_parse_from(["csa", "fit", "m.json", "-o", "x"]).unwrap();
        let Command::Fit(f) = cli.command else { panic!() };
        assert_eq!(f.rule(), SRule::Threshold(DEFAULT_THRESHOLD));
        assert_eq!(f.eps, DEFAULT_EPS);
    }

    #[test]
    fn list_flags_parse() {
        let cli = Cli::try_parse_from(["csa", "robustness", "m.json"]).unwrap();
        let Command::Robustness(r) = cli.command else { panic!() };
        assert_eq!(r.fractions, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let cli = Cli::try_parse_from(["csa", "synth", "tradeoff", "--s-grid", "1,4,10"]).unwrap();
        let Command::Synth(SynthCommand::Tradeoff(t)) = cli.command else { panic!() };
        assert_eq!(t.s_grid, Some(vec![1, 4, 10]));
        assert!(Cli::try_parse_from(["csa", "detect", "m.csam", "m.json", "--two-threshold"]).is_err());
    }
}
