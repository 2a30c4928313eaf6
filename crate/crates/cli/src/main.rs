mod commands;
mod fetch;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ontocheck_core::antipattern::AntiPatternId;
use serde::Serialize;

pub use output::UsageError;

#[derive(Parser, Debug)]
#[command(name = "ontocheck", version, about = "Build and check ontology consistency corpora")]
struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Download ontologies from a BioPortal-style REST repository.
    ///
    /// The API key is read from the BIOPORTAL_API_KEY environment variable.
    Fetch(FetchArgs),
    /// Split an ontology into modules around its highest-ranked classes.
    Modularize(ModularizeArgs),
    /// Complete one anti-pattern instance inside an ontology.
    Inject(InjectArgs),
    /// Turn ontologies into triple documents (JSONL).
    Translate(TranslateArgs),
    /// Train skip-gram embeddings over walks of the given ontologies.
    Embed(EmbedArgs),
    /// Build a balanced, split dataset from a set of consistent modules.
    BuildDataset(BuildArgs),
    /// Check consistency and coherence with the tableau reasoner.
    Check(CheckArgs),
    /// Score predictions against a dataset.
    Eval(EvalArgs),
    /// Generate synthetic consistent ontologies.
    Gen(GenArgs),
    /// Generate, modularize, inject, translate, balance and split in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct FetchArgs {
    /// Repository base URL.
    #[arg(long, default_value = "https://data.bioontology.org")]
    pub endpoint: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Fetch at most this many ontologies from the listing.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Attempts after the first for throttled or failing requests.
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    /// Base backoff in milliseconds; doubles after each failed attempt.
    #[arg(long, default_value_t = 500)]
    pub backoff_ms: u64,
    /// Pause between requests in milliseconds.
    #[arg(long, default_value_t = 200)]
    pub delay_ms: u64,
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ModularizeArgs {
    pub input: PathBuf,
    /// Number of modules; defaults to one per 200 classes.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct InjectArgs {
    pub input: PathBuf,
    #[arg(long, value_parser = parse_pattern)]
    pub pattern: AntiPatternId,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Most axioms a site may be missing (1 or 2).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub max_missing: u8,
    /// Where the injected ontology goes.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct TranslateArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Documents above this many tokens are left out.
    #[arg(long, default_value_t = 4096)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EmbedArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Table file; a JSON sidecar with the same stem is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "bin")]
    pub format: TableFormat,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 0.025)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Bin,
    Jsonl,
}

#[derive(Args, Debug, Serialize)]
pub struct DatasetOptions {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4096)]
    pub budget: usize,
    /// Patterns to inject, comma separated; all fourteen when absent.
    #[arg(long, value_delimiter = ',', value_parser = parse_pattern)]
    pub patterns: Vec<AntiPatternId>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub max_missing: u8,
    /// Train, validation and test percentages.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [70u32, 15, 15])]
    pub ratios: Vec<u32>,
    /// Shuffle labels together instead of stratifying the split.
    #[arg(long)]
    pub no_stratify: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    /// Module files, or directories of `.omn` files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub options: DatasetOptions,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Include clash traces for inconsistent inputs and unsatisfiable classes.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    /// Score only one part of this split manifest.
    #[arg(long, requires = "part")]
    pub split: Option<PathBuf>,
    #[arg(long, value_parser = ["train", "val", "test"])]
    pub part: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// JSON pipeline configuration; flags given explicitly override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of synthetic source ontologies.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_pattern)]
    pub patterns: Vec<AntiPatternId>,
    /// Also train embeddings and attach pooled vectors to every record.
    #[arg(long)]
    pub embed: bool,
    #[arg(long)]
    pub dim: Option<usize>,
}

fn parse_pattern(s: &str) -> Result<AntiPatternId, String> {
    s.parse().map_err(|e: ontocheck_core::antipattern::UnknownPattern| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Fetch(a) => fetch::run(a),
        Command::Modularize(a) => commands::modularize(a),
        Command::Inject(a) => commands::inject(a),
        Command::Translate(a) => commands::translate(a),
        Command::Embed(a) => commands::embed(a),
        Command::BuildDataset(a) => commands::build_dataset(a),
        Command::Check(a) => commands::check(a),
        Command::Eval(a) => commands::eval(a),
        Command::Gen(a) => commands::gen(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
