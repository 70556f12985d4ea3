//! `convene` command-line pipeline: ingest → profile → pool → match →
//! network → metrics → report, plus `synth` for simulated corpora.
//!
//! Every stage reads and writes one output directory (`--out`); upstream
//! artifacts are picked up from there.

pub mod manifest;
pub mod plot;
pub mod report;
pub mod stages;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use convene::matching::{Priority, Strategy};
use convene::YearRange;

#[derive(Debug, Parser)]
#[command(name = "convene", version, about = "Counterfactual cohort evaluation of a convening program")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus (and cohort) and store normalized copies.
    Ingest(IngestArgs),
    /// Derive career profiles of the cohort.
    Profile(InputArgs),
    /// Collect the co-author candidate pool and its profiles.
    Pool(InputArgs),
    /// Match every cohort member to a control author.
    Match(MatchArgs),
    /// Build cohort and control co-author networks at cutoff years.
    Network(NetworkArgs),
    /// Compute indicator panels for cohort and control.
    Metrics(MetricsArgs),
    /// Generate a synthetic corpus with a planted intervention.
    Synth(SynthArgs),
    /// Render tables and figures from prior artifacts.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Corpus file [default: <out>/corpus.jsonl].
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Cohort file [default: <out>/cohort.txt].
    #[arg(long)]
    pub cohort: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Drop unknown fields and skip unparseable lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub cohort: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MatchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// propensity | lexicographic
    #[arg(long, default_value = "propensity")]
    pub strategy: Strategy,
    /// Covariate priority for the lexicographic distance.
    #[arg(long, default_value = "out,year,coauth")]
    pub priority: Priority,
    /// Maximum propensity-score difference of a pair.
    #[arg(long)]
    pub caliper: Option<f64>,
    /// Assert that matching consumes no randomness (always true; recorded).
    #[arg(long)]
    pub seedless: bool,
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Cutoff years [default: year before program start, midpoint, last year].
    #[arg(long, value_delimiter = ',')]
    pub cutoffs: Option<Vec<i32>>,
    /// Figure style as key=value pairs, e.g. `size=800,labels=true`.
    #[arg(long)]
    pub style: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Publication window FROM:TO [default: program start to last corpus year].
    #[arg(long)]
    pub window: Option<YearRange>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Key-value config file; defaults apply to absent keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Pipeline directory; the report goes to `<out>/report`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Input that fails validation (exit code 1).
#[derive(Debug)]
pub struct ValidationFailure(pub String);

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailure {}

/// Bad invocation detected after argument parsing (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// An upstream artifact is absent; names the stage that produces it.
#[derive(Debug)]
pub struct MissingArtifact {
    pub path: PathBuf,
    pub producer: &'static str,
}

impl fmt::Display for MissingArtifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "missing {} (run `convene {}` first)", self.path.display(), self.producer)
    }
}

impl std::error::Error for MissingArtifact {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() || err.downcast_ref::<MissingArtifact>().is_some() {
        2
    } else {
        1
    }
}

pub fn run(cli: Cli, argv: &[String]) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(a) => stages::ingest(&a, argv),
        Command::Profile(a) => stages::profile(&a, argv),
        Command::Pool(a) => stages::pool(&a, argv),
        Command::Match(a) => stages::match_stage(&a, argv),
        Command::Network(a) => stages::network(&a, argv),
        Command::Metrics(a) => stages::metrics(&a, argv),
        Command::Synth(a) => stages::synth(&a, argv),
        Command::Report(a) => report::report(&a, argv),
    }
}

/// Parses `args` (program name first), runs the command and maps the outcome
/// to an exit code: 0 success, 1 validation or runtime failure, 2 usage.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
