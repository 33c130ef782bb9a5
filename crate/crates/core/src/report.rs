//! Pipeline stages behind the CLI subcommands and their file emitters.
//!
//! Every emitted file carries provenance: CSV files open with `# key=value`
//! comment lines, JSON documents with a `provenance` object, and JSON-lines
//! files with a leading provenance record. Outputs contain no timestamps or
//! absolute paths, so identical inputs give byte-identical files.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexicon::{consensus_analysis, ConsensusReport, Lexicon, LexiconManifest};
use crate::scanner::{compile_matcher, load_corpus, scan_corpus, ScanReport};
use crate::sentiment::{
    load_sentiment_lexicon, sentiment_report, Sentiment, SentimentReport, SentimentRow,
};
use crate::similarity::{
    similarity_with_sensitivity, SensitivityRow, SimilarityConfig, SimilarityMatrix,
};
use crate::wordnet::{load_wordnet_with, LoadOptions, TaxonomyGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Manifest,
    Wordnet,
    Similarity,
    Consensus,
    Sentiment,
    Corpus,
    Scan,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Manifest => "manifest",
            Stage::Wordnet => "wordnet",
            Stage::Similarity => "similarity",
            Stage::Consensus => "consensus",
            Stage::Sentiment => "sentiment",
            Stage::Corpus => "corpus",
            Stage::Scan => "scan",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{stage} stage failed")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl ReportError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            ReportError::Stage { stage, .. } => Some(*stage),
            ReportError::Invariant(_) => None,
        }
    }

    /// 1 for bad data or configuration, 2 for a broken internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Stage { .. } => 1,
            ReportError::Invariant(_) => 2,
        }
    }
}

fn at<E>(stage: Stage) -> impl FnOnce(E) -> ReportError
where
    E: std::error::Error + Send + Sync + 'static,
{
    move |e| ReportError::Stage {
        stage,
        source: Box::new(e),
    }
}

fn config_error(message: String) -> ReportError {
    #[derive(Debug, Error)]
    #[error("{0}")]
    struct Msg(String);
    ReportError::Stage {
        stage: Stage::Config,
        source: Box::new(Msg(message)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown output format {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub wordnet: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub similarity: SimilarityConfig,
    pub wordnet_options: LoadOptions,
    /// Majority-vote fraction for the consensus analysis.
    pub threshold: f64,
    pub out: PathBuf,
    pub formats: BTreeSet<OutputFormat>,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            wordnet: None,
            sentiment_lexicon: None,
            similarity: SimilarityConfig::default(),
            wordnet_options: LoadOptions::default(),
            threshold: 0.5,
            out: out.into(),
            formats: [OutputFormat::Csv, OutputFormat::Json]
                .into_iter()
                .collect(),
            workers: 1,
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        if self.formats.is_empty() {
            return Err(config_error("no output format selected".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(config_error(format!(
                "consensus threshold must be in (0, 1], got {}",
                self.threshold
            )));
        }
        if self.workers == 0 {
            return Err(config_error("workers must be at least 1".into()));
        }
        self.similarity
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        Ok(())
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }

    /// Short hash over every setting that changes analysis results.
    pub fn config_hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            similarity: &'a SimilarityConfig,
            wordnet_options: &'a LoadOptions,
            threshold: f64,
        }
        let json = serde_json::to_string(&Hashed {
            similarity: &self.similarity,
            wordnet_options: &self.wordnet_options,
            threshold: self.threshold,
        })
        .expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wordnet_release: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentiment_source: Option<String>,
    /// Hypernym edges dropped while loading to break cycles, as `child>parent`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub broken_cycle_edges: Vec<String>,
    pub config_hash: String,
}

impl Provenance {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: format!("stigmalex {}", env!("CARGO_PKG_VERSION")),
            wordnet_release: None,
            sentiment_source: None,
            broken_cycle_edges: Vec::new(),
            config_hash: cfg.config_hash(),
        }
    }

    fn csv_header(&self) -> String {
        let mut s = format!("# tool={}\n", self.tool);
        if let Some(r) = &self.wordnet_release {
            s.push_str(&format!("# wordnet_release={r}\n"));
        }
        if let Some(src) = &self.sentiment_source {
            s.push_str(&format!("# sentiment_source={src}\n"));
        }
        if !self.broken_cycle_edges.is_empty() {
            s.push_str(&format!(
                "# broken_cycle_edges={}\n",
                self.broken_cycle_edges.join(" ")
            ));
        }
        s.push_str(&format!("# config_hash={}\n", self.config_hash));
        s
    }
}

/// Fixed CSV float format.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn csv_string(header: &str, rows: &[Vec<String>]) -> Result<String, ReportError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(row).map_err(at(Stage::Output))?;
    }
    let body = w.into_inner().map_err(|e| config_error(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| ReportError::Invariant(e.to_string()))?;
    Ok(format!("{header}{body}"))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir).map_err(at(Stage::Output))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(at(Stage::Output))?;
    Ok(path)
}

fn json_string<T: Serialize>(value: &T) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(value).map_err(at(Stage::Output))?;
    s.push('\n');
    Ok(s)
}

/// What a stage wrote and the line it reports on stdout.
#[derive(Debug, Clone)]
pub struct StageOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn load_lexicons(cfg: &RunConfig) -> Result<Vec<Lexicon>, ReportError> {
    let manifest = LexiconManifest::load(&cfg.manifest).map_err(at(Stage::Manifest))?;
    manifest.ingest_all().map_err(at(Stage::Manifest))
}

fn load_graph(cfg: &RunConfig) -> Result<TaxonomyGraph, ReportError> {
    let dir = cfg
        .wordnet
        .as_ref()
        .ok_or_else(|| config_error("--wordnet is required".into()))?;
    load_wordnet_with(dir, cfg.wordnet_options).map_err(at(Stage::Wordnet))
}

// ---------- compare ----------

#[derive(Serialize)]
struct MatrixJson<'a> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    matrix: &'a SimilarityMatrix,
    off_diagonal_mean: f64,
    sensitivity: &'a [SensitivityRow],
}

pub fn run_compare(cfg: &RunConfig) -> Result<StageOutput, ReportError> {
    cfg.validate()?;
    let lexicons = load_lexicons(cfg)?;
    let graph = load_graph(cfg)?;
    compare_with(cfg, &lexicons, &graph)
}

fn compare_with(
    cfg: &RunConfig,
    lexicons: &[Lexicon],
    graph: &TaxonomyGraph,
) -> Result<StageOutput, ReportError> {
    let (matrix, sensitivity) =
        similarity_with_sensitivity(lexicons, graph, &cfg.similarity, cfg.workers)
            .map_err(at(Stage::Similarity))?;
    let n = matrix.size();
    for i in 0..n {
        for j in 0..n {
            if matrix.at(i, j).s_avg.to_bits() != matrix.at(j, i).s_avg.to_bits() {
                return Err(ReportError::Invariant(format!(
                    "similarity matrix asymmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut prov = Provenance::new(cfg);
    prov.wordnet_release = Some(graph.release().to_string());
    prov.broken_cycle_edges = graph
        .broken_cycle_edges()
        .iter()
        .map(|(child, parent)| format!("{child}>{parent}"))
        .collect();
    let mean = matrix.off_diagonal_mean();
    let mut files = Vec::new();

    if cfg.wants(OutputFormat::Csv) {
        let mut header = prov.csv_header();
        header.push_str(&format!(
            "# synset_aggregation={} missing_policy={}\n",
            label(&cfg.similarity.synset_aggregation),
            label(&cfg.similarity.missing_policy)
        ));
        let mut rows = vec![std::iter::once("lexicon".to_string())
            .chain(matrix.lexicon_ids.iter().cloned())
            .collect()];
        for i in 0..n {
            let mut row = vec![matrix.lexicon_ids[i].clone()];
            row.extend((0..n).map(|j| fmt4(matrix.at(i, j).s_avg)));
            rows.push(row);
        }
        files.push(write_file(
            &cfg.out,
            "similarity_matrix.csv",
            &csv_string(&header, &rows)?,
        )?);

        let mut rows = vec![vec![
            "synset_aggregation".to_string(),
            "missing_policy".to_string(),
            "off_diagonal_mean".to_string(),
        ]];
        for r in &sensitivity {
            rows.push(vec![
                label(&r.synset_aggregation),
                label(&r.missing_policy),
                fmt4(r.off_diagonal_mean),
            ]);
        }
        files.push(write_file(
            &cfg.out,
            "similarity_sensitivity.csv",
            &csv_string(&prov.csv_header(), &rows)?,
        )?);
    }
    if cfg.wants(OutputFormat::Json) {
        let doc = MatrixJson {
            provenance: &prov,
            matrix: &matrix,
            off_diagonal_mean: mean,
            sensitivity: &sensitivity,
        };
        files.push(write_file(
            &cfg.out,
            "similarity_matrix.json",
            &json_string(&doc)?,
        )?);
    }

    let strong = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| matrix.at(i, j).strong)
        .count();
    Ok(StageOutput {
        files,
        summary: format!(
            "compare: {n} lexicons, off-diagonal mean S_avg = {} ({} of {} pairs above {}; wordnet {})",
            fmt4(mean),
            strong,
            n * (n - 1) / 2,
            cfg.similarity.strong_threshold,
            graph.release()
        ),
    })
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

// ---------- consensus ----------

#[derive(Serialize)]
struct ConsensusJson<'a> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    report: &'a ConsensusReport,
    high_frequency_count: usize,
    coverage: Vec<Coverage>,
}

#[derive(Serialize)]
struct Coverage {
    lexicon: String,
    size: usize,
    high_frequency_terms: usize,
}

pub fn run_consensus(cfg: &RunConfig) -> Result<StageOutput, ReportError> {
    cfg.validate()?;
    let lexicons = load_lexicons(cfg)?;
    consensus_with(cfg, &lexicons).map(|(out, _)| out)
}

fn consensus_with(
    cfg: &RunConfig,
    lexicons: &[Lexicon],
) -> Result<(StageOutput, ConsensusReport), ReportError> {
    let report = consensus_analysis(lexicons, cfg.threshold).map_err(at(Stage::Consensus))?;
    let total: usize = report.entries.iter().map(|e| e.count).sum();
    if total != lexicons.iter().map(Lexicon::len).sum::<usize>() {
        return Err(ReportError::Invariant(
            "consensus counts do not conserve lexicon sizes".into(),
        ));
    }
    let prov = Provenance::new(cfg);
    let mut files = Vec::new();
    let hf = report.high_frequency().count();

    if cfg.wants(OutputFormat::Csv) {
        let mut header = prov.csv_header();
        header.push_str(&format!(
            "# threshold_fraction={} min_count={}\n",
            report.threshold_fraction, report.min_count
        ));
        let mut head = vec!["term".to_string(), "count".to_string()];
        head.extend(report.lexicon_ids.iter().cloned());
        head.push("high_frequency".to_string());
        let mut rows = vec![head];
        for e in &report.entries {
            let mut row = vec![e.term.clone(), e.count.to_string()];
            row.extend(
                report
                    .lexicon_ids
                    .iter()
                    .map(|id| e.members.iter().any(|m| m == id).to_string()),
            );
            row.push(e.high_frequency.to_string());
            rows.push(row);
        }
        files.push(write_file(
            &cfg.out,
            "consensus.csv",
            &csv_string(&header, &rows)?,
        )?);
    }
    if cfg.wants(OutputFormat::Json) {
        let coverage = report
            .coverage()
            .into_iter()
            .zip(lexicons)
            .map(|((id, n), l)| Coverage {
                lexicon: id,
                size: l.len(),
                high_frequency_terms: n,
            })
            .collect();
        let doc = ConsensusJson {
            provenance: &prov,
            report: &report,
            high_frequency_count: hf,
            coverage,
        };
        files.push(write_file(&cfg.out, "consensus.json", &json_string(&doc)?)?);
    }

    let coverage = report
        .coverage()
        .into_iter()
        .map(|(id, n)| format!("{id} {n}/{hf}"))
        .collect::<Vec<_>>()
        .join(", ");
    let summary = format!(
        "consensus: {} master terms, {} high-frequency (count >= {}); coverage: {}",
        report.master_size, hf, report.min_count, coverage
    );
    Ok((StageOutput { files, summary }, report))
}

// ---------- sentiment ----------

#[derive(Serialize)]
struct SentimentJson<'a> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    report: &'a SentimentReport,
}

pub fn run_sentiment(cfg: &RunConfig) -> Result<StageOutput, ReportError> {
    cfg.validate()?;
    let lexicons = load_lexicons(cfg)?;
    let consensus = consensus_analysis(&lexicons, cfg.threshold).map_err(at(Stage::Consensus))?;
    sentiment_with(cfg, &lexicons, &consensus)
}

fn sentiment_row_cells(row: &SentimentRow) -> Vec<String> {
    let mut cells = vec![
        row.label.clone(),
        row.size.to_string(),
        row.matched.to_string(),
        row.counts.positive.to_string(),
        row.counts.negative.to_string(),
        row.counts.neutral.to_string(),
        fmt4(row.proportions.positive),
        fmt4(row.proportions.negative),
        fmt4(row.proportions.neutral),
    ];
    for s in Sentiment::ALL {
        cells.push(row.examples.get(s).join("; "));
    }
    cells
}

fn sentiment_with(
    cfg: &RunConfig,
    lexicons: &[Lexicon],
    consensus: &ConsensusReport,
) -> Result<StageOutput, ReportError> {
    let path = cfg
        .sentiment_lexicon
        .as_ref()
        .ok_or_else(|| config_error("--sentiment-lexicon is required".into()))?;
    let slex = load_sentiment_lexicon(path).map_err(at(Stage::Sentiment))?;
    let report = sentiment_report(lexicons, &consensus.high_frequency_terms(), &slex);
    for row in report
        .per_lexicon
        .iter()
        .chain(std::iter::once(&report.high_frequency))
    {
        if row.counts.total() != row.matched || row.matched > row.size {
            return Err(ReportError::Invariant(format!(
                "sentiment counts inconsistent for {}",
                row.label
            )));
        }
    }

    let mut prov = Provenance::new(cfg);
    prov.sentiment_source = Some(slex.source().to_string());
    let mut files = Vec::new();

    if cfg.wants(OutputFormat::Csv) {
        let counts = slex.counts();
        let mut header = prov.csv_header();
        header.push_str(&format!(
            "# sentiment_lexicon_counts positive={} negative={} neutral={} total={}\n",
            counts.positive,
            counts.negative,
            counts.neutral,
            slex.len()
        ));
        let mut rows = vec![[
            "lexicon",
            "size",
            "matched",
            "positive",
            "negative",
            "neutral",
            "positive_share",
            "negative_share",
            "neutral_share",
            "positive_examples",
            "negative_examples",
            "neutral_examples",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
        for row in report
            .per_lexicon
            .iter()
            .chain(std::iter::once(&report.high_frequency))
        {
            rows.push(sentiment_row_cells(row));
        }
        let a = report.aggregate;
        let mut mean_row = vec![
            "mean".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ];
        mean_row.extend([fmt4(a.positive), fmt4(a.negative), fmt4(a.neutral)]);
        mean_row.extend([String::new(), String::new(), String::new()]);
        rows.push(mean_row);
        let p = report.pooled;
        let mut pooled_row = vec![
            "pooled".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ];
        pooled_row.extend([fmt4(p.positive), fmt4(p.negative), fmt4(p.neutral)]);
        pooled_row.extend([String::new(), String::new(), String::new()]);
        rows.push(pooled_row);
        files.push(write_file(
            &cfg.out,
            "sentiment.csv",
            &csv_string(&header, &rows)?,
        )?);
    }
    if cfg.wants(OutputFormat::Json) {
        let doc = SentimentJson {
            provenance: &prov,
            report: &report,
        };
        files.push(write_file(&cfg.out, "sentiment.json", &json_string(&doc)?)?);
    }

    let a = report.aggregate;
    Ok(StageOutput {
        files,
        summary: format!(
            "sentiment: negative share {:.1}% (mean over lexicons) / {:.1}% (pooled), positive {:.1}% / {:.1}%, neutral {:.1}% / {:.1}%; high-frequency row {} matched of {}",
            a.negative * 100.0,
            report.pooled.negative * 100.0,
            a.positive * 100.0,
            report.pooled.positive * 100.0,
            a.neutral * 100.0,
            report.pooled.neutral * 100.0,
            report.high_frequency.matched,
            report.high_frequency.size
        ),
    })
}

// ---------- scan ----------

#[derive(Serialize)]
struct AnnotationLine<'a> {
    document: &'a str,
    #[serde(flatten)]
    annotation: &'a crate::scanner::Annotation,
}

#[derive(Serialize)]
struct ProvenanceLine<'a> {
    provenance: &'a Provenance,
}

#[derive(Serialize)]
struct ScanSummaryJson<'a> {
    provenance: &'a Provenance,
    documents_scanned: usize,
    documents_flagged: usize,
    fraction_flagged: f64,
    term_frequency: &'a [(String, usize)],
    flagged: Vec<&'a str>,
}

pub fn run_scan(cfg: &RunConfig, corpus: &Path) -> Result<StageOutput, ReportError> {
    cfg.validate()?;
    let lexicons = load_lexicons(cfg)?;
    let consensus = if lexicons.len() >= 2 {
        Some(consensus_analysis(&lexicons, cfg.threshold).map_err(at(Stage::Consensus))?)
    } else {
        None
    };
    scan_with(cfg, &lexicons, consensus.as_ref(), corpus)
}

fn scan_with(
    cfg: &RunConfig,
    lexicons: &[Lexicon],
    consensus: Option<&ConsensusReport>,
    corpus: &Path,
) -> Result<StageOutput, ReportError> {
    let slex = match &cfg.sentiment_lexicon {
        Some(p) => Some(load_sentiment_lexicon(p).map_err(at(Stage::Sentiment))?),
        None => None,
    };
    let documents = load_corpus(corpus).map_err(at(Stage::Corpus))?;
    let matcher = compile_matcher(lexicons, slex.as_ref(), consensus).map_err(at(Stage::Scan))?;
    let report = scan_corpus(&documents, &matcher).map_err(at(Stage::Scan))?;
    check_scan(&report, &documents)?;

    let mut prov = Provenance::new(cfg);
    prov.sentiment_source = slex.as_ref().map(|s| s.source().to_string());
    let mut files = Vec::new();

    let mut lines =
        serde_json::to_string(&ProvenanceLine { provenance: &prov }).map_err(at(Stage::Output))?;
    lines.push('\n');
    for d in &report.documents {
        for a in &d.annotations {
            lines.push_str(
                &serde_json::to_string(&AnnotationLine {
                    document: &d.id,
                    annotation: a,
                })
                .map_err(at(Stage::Output))?,
            );
            lines.push('\n');
        }
    }
    files.push(write_file(&cfg.out, "annotations.jsonl", &lines)?);

    if cfg.wants(OutputFormat::Csv) {
        let mut rows = vec![vec![
            "document".to_string(),
            "annotations".to_string(),
            "flagged".to_string(),
            "terms".to_string(),
        ]];
        for d in &report.documents {
            let terms: BTreeSet<&str> = d.annotations.iter().map(|a| a.term.as_str()).collect();
            rows.push(vec![
                d.id.clone(),
                d.annotations.len().to_string(),
                d.flagged.to_string(),
                terms.into_iter().collect::<Vec<_>>().join("; "),
            ]);
        }
        files.push(write_file(
            &cfg.out,
            "scan_summary.csv",
            &csv_string(&prov.csv_header(), &rows)?,
        )?);

        let mut rows = vec![vec!["term".to_string(), "occurrences".to_string()]];
        rows.extend(
            report
                .term_frequency
                .iter()
                .map(|(t, n)| vec![t.clone(), n.to_string()]),
        );
        files.push(write_file(
            &cfg.out,
            "scan_terms.csv",
            &csv_string(&prov.csv_header(), &rows)?,
        )?);
    }
    if cfg.wants(OutputFormat::Json) {
        let doc = ScanSummaryJson {
            provenance: &prov,
            documents_scanned: report.documents_scanned,
            documents_flagged: report.documents_flagged,
            fraction_flagged: report.fraction_flagged,
            term_frequency: &report.term_frequency,
            flagged: report
                .documents
                .iter()
                .filter(|d| d.flagged)
                .map(|d| d.id.as_str())
                .collect(),
        };
        files.push(write_file(
            &cfg.out,
            "scan_summary.json",
            &json_string(&doc)?,
        )?);
    }

    Ok(StageOutput {
        files,
        summary: format!(
            "scan: {} documents, {} flagged ({}), {} annotations",
            report.documents_scanned,
            report.documents_flagged,
            fmt4(report.fraction_flagged),
            report
                .documents
                .iter()
                .map(|d| d.annotations.len())
                .sum::<usize>()
        ),
    })
}

fn check_scan(
    report: &ScanReport,
    documents: &[crate::scanner::Document],
) -> Result<(), ReportError> {
    for d in &report.documents {
        let text = documents
            .iter()
            .find(|doc| doc.id == d.id)
            .map(|doc| doc.text.as_str())
            .unwrap_or_default();
        let mut prev_end = 0;
        for a in &d.annotations {
            if a.start < prev_end || a.start >= a.end || a.end > text.len() {
                return Err(ReportError::Invariant(format!(
                    "bad annotation span in {}",
                    d.id
                )));
            }
            prev_end = a.end;
        }
    }
    Ok(())
}

// ---------- report (all stages) ----------

/// Runs compare, consensus and sentiment, plus scan when a corpus is given.
/// Inputs are loaded once and shared between stages.
pub fn run_all(cfg: &RunConfig, corpus: Option<&Path>) -> Result<Vec<StageOutput>, ReportError> {
    cfg.validate()?;
    let lexicons = load_lexicons(cfg)?;
    let graph = load_graph(cfg)?;
    let mut outputs = vec![compare_with(cfg, &lexicons, &graph)?];
    let (consensus_out, consensus) = consensus_with(cfg, &lexicons)?;
    outputs.push(consensus_out);
    outputs.push(sentiment_with(cfg, &lexicons, &consensus)?);
    if let Some(corpus) = corpus {
        outputs.push(scan_with(cfg, &lexicons, Some(&consensus), corpus)?);
    }
    Ok(outputs)
}
