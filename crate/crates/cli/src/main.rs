mod commands;
mod error;
mod meta;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::params::ConfigFile;

/// Alteration analysis for TEI-encoded manuscripts.
///
/// Options can also come from a `--config` file of `key = value` lines
/// under `[ingest]`, `[classify]`, ... sections; flags win over the file.
/// Seeds fall back to the ALTERLDA_SEED environment variable.
#[derive(Parser, Debug)]
#[command(name = "alterlda", version)]
struct Cli {
    /// Configuration file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse TEI files into a tokenized JSONL corpus
    Ingest(IngestArgs),
    /// Classify alteration spans and keep only content-related flags
    Classify(ClassifyArgs),
    /// Train alterLDA on a corpus split
    Train(TrainArgs),
    /// Suggest alteration candidates per metadata group
    Suggest(SuggestArgs),
    /// Evaluate fold-in predictions on the held-out split
    Eval(EvalArgs),
    /// Grid search of reconstruction accuracy on synthetic corpora
    Synth(SynthArgs),
    /// Convert a JSON report to csv, json or text
    Report(ReportArgs),
    /// Run the stages configured in the config file
    Run(RunArgs),
}

#[derive(Args, Debug, Default)]
pub struct IngestArgs {
    /// TEI file or directory of *.xml files
    #[arg(long, visible_alias = "in")]
    pub input: Option<PathBuf>,
    /// Output corpus (JSONL); the vocabulary goes next to it as .vocab
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep punctuation tokens
    #[arg(long)]
    pub keep_punct: bool,
    /// File with one stopword per line
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Lemma dictionary, TSV: surface, lemma[, pos]
    #[arg(long, visible_alias = "dict")]
    pub lemmas: Option<PathBuf>,
    /// Word vectors in text format with a `count dims` header
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Paratext regexes, one per line (replaces the built-in set)
    #[arg(long)]
    pub paratext_patterns: Option<PathBuf>,
    /// Maximum edit distance for spelling corrections [default: 2]
    #[arg(long)]
    pub max_dist: Option<usize>,
    /// Maximum cosine distance for stylistic changes [default: 0.3]
    #[arg(long)]
    pub style_threshold: Option<f64>,
    /// Hands without a declared scribe: accept or reject [default: accept]
    #[arg(long)]
    pub unknown_hand: Option<String>,
    /// Span category table (CSV)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Corpus with flags reset to content-related alterations
    #[arg(long)]
    pub out_corpus: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Number of topics [default: 20]
    #[arg(long)]
    pub k: Option<usize>,
    /// Symmetric document-topic concentration [default: 0.1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Symmetric topic-word concentration [default: 0.1]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Alteration concentration: one value, or `unaltered,altered` [default: 1.0,1.0]
    #[arg(long)]
    pub xi: Option<String>,
    /// [default: 1000]
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// [default: 500]
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Average estimates over every LAG-th sweep after burn-in; 0 keeps the final state [default: 10]
    #[arg(long)]
    pub lag: Option<usize>,
    /// Data setting s1, s2 or s3 [default: s1]
    #[arg(long)]
    pub split: Option<String>,
    /// Held-out token fraction for s3 [default: 0.2]
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model checkpoint
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct FoldInArgs {
    /// Model checkpoint written by `train`
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Corpus the model was trained on [default: path stored in the model]
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Metadata field: author, addressee or date [default: author]
    #[arg(long)]
    pub group_by: Option<String>,
    /// Alteration probability from which a token counts as altered [default: 0.5]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// [default: 200]
    #[arg(long)]
    pub foldin_sweeps: Option<usize>,
    /// [default: 100]
    #[arg(long)]
    pub foldin_burn_in: Option<usize>,
    /// [default: the model's seed]
    #[arg(long)]
    pub seed: Option<u64>,
    /// csv, json or text [default: csv]
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SuggestArgs {
    #[command(flatten)]
    pub common: FoldInArgs,
}

#[derive(Args, Debug, Default)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: FoldInArgs,
    /// Must match the model's setting when given
    #[arg(long)]
    pub split: Option<String>,
    /// Must match the model's fraction when given
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SynthArgs {
    /// Comma-separated alphas [default: 0.1,0.5,1.0]
    #[arg(long)]
    pub grid_alpha: Option<String>,
    /// [default: 0.1,0.5,1.0]
    #[arg(long)]
    pub grid_eta: Option<String>,
    /// [default: 0.1,0.5,1.0]
    #[arg(long)]
    pub grid_xi: Option<String>,
    /// Corpus sizes in tokens [default: 5000,20000]
    #[arg(long)]
    pub sizes: Option<String>,
    /// Runs per cell [default: 2]
    #[arg(long)]
    pub runs: Option<usize>,
    /// Topics [default: 10]
    #[arg(long)]
    pub k: Option<usize>,
    /// Vocabulary size [default: 500]
    #[arg(long)]
    pub vocab: Option<usize>,
    /// Tokens per document [default: 100]
    #[arg(long)]
    pub doc_len: Option<usize>,
    /// [default: 300]
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// [default: 200]
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// [default: 10]
    #[arg(long)]
    pub lag: Option<usize>,
    /// argmax or threshold:<p> [default: argmax]
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// csv, json or text [default: csv]
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct ReportArgs {
    /// Report written with --format json
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// csv, json or text [default: text]
    #[arg(long)]
    pub format: Option<String>,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Comma-separated stages [default: ingest,classify,train,eval,suggest]
    #[arg(long)]
    pub stages: Option<String>,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let file = file.as_ref();
    match cli.command {
        Command::Ingest(a) => commands::ingest(&a, file).map(drop),
        Command::Classify(a) => commands::classify(&a, file).map(drop),
        Command::Train(a) => commands::train(&a, file).map(drop),
        Command::Suggest(a) => commands::suggest(&a, file).map(drop),
        Command::Eval(a) => commands::eval(&a, file).map(drop),
        Command::Synth(a) => commands::synth(&a, file).map(drop),
        Command::Report(a) => commands::report(&a, file),
        Command::Run(a) => commands::run(&a, file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
