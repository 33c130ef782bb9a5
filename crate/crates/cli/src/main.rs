use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stigmalex_core::report::{self, OutputFormat, ReportError, RunConfig, StageOutput};
use stigmalex_core::{MissingPolicy, SimilarityConfig, SynsetAggregation};

/// Compare stigmatizing-language lexicons and flag their terms in clinical notes.
#[derive(Parser, Debug)]
#[command(name = "stigmalex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pairwise WordNet similarity matrix between lexicons.
    Compare(Common),
    /// Master term list with majority-vote high-frequency terms.
    Consensus(Common),
    /// Sentiment composition of each lexicon and the high-frequency set.
    Sentiment(Common),
    /// Flag lexicon terms in a corpus of notes.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Directory of .txt notes or a JSON-lines file with `id` and `text`.
        corpus: PathBuf,
    },
    /// Run compare, consensus and sentiment, plus scan when a corpus is given.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Aggregation {
    Max,
    Mean,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Missing {
    Zero,
    Exclude,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON manifest listing the lexicons to load.
    #[arg(long)]
    manifest: PathBuf,
    /// Directory holding the WordNet 3.0 data.* and index.* files.
    #[arg(long)]
    wordnet: Option<PathBuf>,
    /// Term-to-category sentiment lexicon (CSV or TSV).
    #[arg(long)]
    sentiment_lexicon: Option<PathBuf>,
    /// Majority-vote fraction of lexicons a term must appear in.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// How synset-pair scores combine into a term-pair score.
    #[arg(long, value_enum, default_value_t = Aggregation::Max)]
    aggregation: Aggregation,
    /// Treatment of term pairs with no comparable synsets.
    #[arg(long, value_enum, default_value_t = Missing::Zero)]
    missing: Missing,
    /// S_avg above this value marks a lexicon pair as strongly similar.
    #[arg(long, default_value_t = 2.5)]
    strong_threshold: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json])]
    format: Vec<Format>,
    /// Worker threads for the similarity computation.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl Common {
    fn run_config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(&self.manifest, &self.out);
        cfg.wordnet = self.wordnet.clone();
        cfg.sentiment_lexicon = self.sentiment_lexicon.clone();
        cfg.threshold = self.threshold;
        cfg.workers = self.workers;
        cfg.similarity = SimilarityConfig {
            synset_aggregation: match self.aggregation {
                Aggregation::Max => SynsetAggregation::Max,
                Aggregation::Mean => SynsetAggregation::Mean,
            },
            missing_policy: match self.missing {
                Missing::Zero => MissingPolicy::Zero,
                Missing::Exclude => MissingPolicy::Exclude,
            },
            strong_threshold: self.strong_threshold,
            ..SimilarityConfig::default()
        };
        cfg.formats = self
            .format
            .iter()
            .map(|f| match f {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            })
            .collect::<BTreeSet<_>>();
        cfg
    }
}

fn run(cli: Cli) -> Result<Vec<StageOutput>, ReportError> {
    match cli.command {
        Command::Compare(c) => report::run_compare(&c.run_config()).map(|o| vec![o]),
        Command::Consensus(c) => report::run_consensus(&c.run_config()).map(|o| vec![o]),
        Command::Sentiment(c) => report::run_sentiment(&c.run_config()).map(|o| vec![o]),
        Command::Scan { common, corpus } => {
            report::run_scan(&common.run_config(), &corpus).map(|o| vec![o])
        }
        Command::Report { common, corpus } => {
            report::run_all(&common.run_config(), corpus.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; exit 2 is reserved for
            // broken internal invariants.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(outputs) => {
            for o in outputs {
                println!("{}", o.summary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = e.exit_code();
            let err = anyhow::Error::new(e).context("stigmalex failed");
            eprintln!("error: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}
