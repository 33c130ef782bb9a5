//! Sentiment composition of lexicons against a unigram sentiment lexicon.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexicon::{normalize_term, Lexicon};

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("failed to read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}:{line}: unknown sentiment category {label:?}", path.display())]
    UnknownCategory {
        path: PathBuf,
        line: usize,
        label: String,
    },
    #[error("term {term:?} is listed as both {first} and {second}")]
    Conflict {
        term: String,
        first: Sentiment,
        second: Sentiment,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    /// Accepts `positive`/`negative`/`neutral`, their three-letter
    /// abbreviations, or a signed integer score (sign decides).
    pub fn parse_label(label: &str) -> Option<Self> {
        let l = label.trim().to_ascii_lowercase();
        match l.as_str() {
            "positive" | "pos" => return Some(Self::Positive),
            "negative" | "neg" => return Some(Self::Negative),
            "neutral" | "neu" => return Some(Self::Neutral),
            _ => {}
        }
        l.parse::<i64>().ok().map(|score| match score.signum() {
            1 => Self::Positive,
            -1 => Self::Negative,
            _ => Self::Neutral,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCounts {
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
}

impl CategoryCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative + self.neutral
    }

    fn bump(&mut self, s: Sentiment) {
        match s {
            Sentiment::Positive => self.positive += 1,
            Sentiment::Negative => self.negative += 1,
            Sentiment::Neutral => self.neutral += 1,
        }
    }

    pub fn get(&self, s: Sentiment) -> usize {
        match s {
            Sentiment::Positive => self.positive,
            Sentiment::Negative => self.negative,
            Sentiment::Neutral => self.neutral,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, Sentiment>,
    source: String,
    counts: CategoryCounts,
}

pub fn load_sentiment_lexicon(path: impl AsRef<Path>) -> Result<SentimentLexicon, SentimentError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| SentimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let digest = Sha256::digest(&bytes);
    let source = format!("{name} (sha256:{})", hex_prefix(&digest, 12));

    let text = String::from_utf8(bytes).map_err(|e| SentimentError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("not valid UTF-8: {e}"),
    })?;
    let first_line = text.lines().next().unwrap_or("");
    let tab_separated = path.extension().is_some_and(|e| e == "tsv") || first_line.contains('\t');
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(if tab_separated { b'\t' } else { b',' })
        .from_reader(text.as_bytes());

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| SentimentError::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() < 2 {
            return Err(SentimentError::Parse {
                path: path.to_path_buf(),
                line,
                message: "expected term and category columns".into(),
            });
        }
        let term = record[0].trim();
        let label = record[1].trim();
        if i == 0 && Sentiment::parse_label(label).is_none() && is_header_label(label) {
            continue;
        }
        let category =
            Sentiment::parse_label(label).ok_or_else(|| SentimentError::UnknownCategory {
                path: path.to_path_buf(),
                line,
                label: label.to_string(),
            })?;
        let key = normalize_term(term).map_err(|e| SentimentError::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        rows.push((key, category));
    }
    SentimentLexicon::from_entries(source, rows)
}

fn is_header_label(label: &str) -> bool {
    matches!(
        label.to_ascii_lowercase().as_str(),
        "category" | "sentiment" | "polarity" | "label" | "class" | "score"
    )
}

fn hex_prefix(bytes: &[u8], n: usize) -> String {
    bytes
        .iter()
        .take(n.div_ceil(2))
        .map(|b| format!("{b:02x}"))
        .collect::<String>()[..n]
        .to_string()
}

impl SentimentLexicon {
    /// Builds a lexicon from already-normalized `(term, category)` pairs.
    /// Repeated terms must agree on their category.
    pub fn from_entries<I>(source: impl Into<String>, entries: I) -> Result<Self, SentimentError>
    where
        I: IntoIterator<Item = (String, Sentiment)>,
    {
        let mut map = BTreeMap::new();
        for (term, category) in entries {
            match map.get(&term) {
                Some(&existing) if existing != category => {
                    return Err(SentimentError::Conflict {
                        term,
                        first: existing,
                        second: category,
                    })
                }
                Some(_) => {}
                None => {
                    map.insert(term, category);
                }
            }
        }
        let mut counts = CategoryCounts::default();
        for &c in map.values() {
            counts.bump(c);
        }
        Ok(Self {
            entries: map,
            source: source.into(),
            counts,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// File name and content hash of the loaded file.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn counts(&self) -> CategoryCounts {
        self.counts
    }

    pub fn get(&self, term: &str) -> Option<Sentiment> {
        self.entries.get(term).copied()
    }
}

/// Exact lookup of a normalized term; `None` means unmatched.
pub fn classify_term(term: &str, slex: &SentimentLexicon) -> Option<Sentiment> {
    slex.get(term)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Proportions {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CategoryExamples {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub neutral: Vec<String>,
}

impl CategoryExamples {
    pub fn get(&self, s: Sentiment) -> &[String] {
        match s {
            Sentiment::Positive => &self.positive,
            Sentiment::Negative => &self.negative,
            Sentiment::Neutral => &self.neutral,
        }
    }
}

const EXAMPLES_PER_CELL: usize = 3;

/// One row of the composition table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentRow {
    pub label: String,
    pub size: usize,
    pub matched: usize,
    pub counts: CategoryCounts,
    /// Shares of matched terms; all zero when nothing matched.
    pub proportions: Proportions,
    /// First three matched terms per category, alphabetically.
    pub examples: CategoryExamples,
}

impl SentimentRow {
    fn compute<'a>(
        label: &str,
        terms: impl IntoIterator<Item = &'a str>,
        slex: &SentimentLexicon,
    ) -> Self {
        let mut size = 0;
        let mut counts = CategoryCounts::default();
        let mut matched_terms: BTreeMap<Sentiment, BTreeSet<&str>> = BTreeMap::new();
        for t in terms {
            size += 1;
            if let Some(s) = classify_term(t, slex) {
                counts.bump(s);
                matched_terms.entry(s).or_default().insert(t);
            }
        }
        let matched = counts.total();
        let share = |n: usize| {
            if matched == 0 {
                0.0
            } else {
                n as f64 / matched as f64
            }
        };
        let pick = |s: Sentiment| -> Vec<String> {
            matched_terms
                .get(&s)
                .map(|set| {
                    set.iter()
                        .take(EXAMPLES_PER_CELL)
                        .map(|t| t.to_string())
                        .collect()
                })
                .unwrap_or_default()
        };
        Self {
            label: label.to_string(),
            size,
            matched,
            counts,
            proportions: Proportions {
                positive: share(counts.positive),
                negative: share(counts.negative),
                neutral: share(counts.neutral),
            },
            examples: CategoryExamples {
                positive: pick(Sentiment::Positive),
                negative: pick(Sentiment::Negative),
                neutral: pick(Sentiment::Neutral),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentReport {
    pub source: String,
    pub per_lexicon: Vec<SentimentRow>,
    pub high_frequency: SentimentRow,
    /// Unweighted mean of the per-lexicon proportions, over lexicons with at
    /// least one matched term.
    pub aggregate: Proportions,
    /// Category totals summed over lexicons, divided by total matched terms.
    /// A term listed by several lexicons counts once per lexicon.
    pub pooled: Proportions,
}

pub const HIGH_FREQUENCY_LABEL: &str = "high-frequency";

pub fn sentiment_report(
    lexicons: &[Lexicon],
    high_frequency: &BTreeSet<String>,
    slex: &SentimentLexicon,
) -> SentimentReport {
    let per_lexicon: Vec<SentimentRow> = lexicons
        .iter()
        .map(|l| SentimentRow::compute(&l.id, l.normalized_terms(), slex))
        .collect();
    let hf = SentimentRow::compute(
        HIGH_FREQUENCY_LABEL,
        high_frequency.iter().map(String::as_str),
        slex,
    );
    SentimentReport {
        source: slex.source().to_string(),
        aggregate: mean_proportions(&per_lexicon),
        pooled: pooled_proportions(&per_lexicon),
        per_lexicon,
        high_frequency: hf,
    }
}

pub fn mean_proportions(rows: &[SentimentRow]) -> Proportions {
    let used: Vec<&SentimentRow> = rows.iter().filter(|r| r.matched > 0).collect();
    if used.is_empty() {
        return Proportions::default();
    }
    let mean = |f: fn(&Proportions) -> f64| {
        let mut values: Vec<f64> = used.iter().map(|r| f(&r.proportions)).collect();
        crate::similarity::stable_sum(&mut values) / used.len() as f64
    };
    Proportions {
        positive: mean(|p| p.positive),
        negative: mean(|p| p.negative),
        neutral: mean(|p| p.neutral),
    }
}

pub fn pooled_proportions(rows: &[SentimentRow]) -> Proportions {
    let matched: usize = rows.iter().map(|r| r.matched).sum();
    if matched == 0 {
        return Proportions::default();
    }
    let share = |f: fn(&CategoryCounts) -> usize| {
        rows.iter().map(|r| f(&r.counts)).sum::<usize>() as f64 / matched as f64
    };
    Proportions {
        positive: share(|c| c.positive),
        negative: share(|c| c.negative),
        neutral: share(|c| c.neutral),
    }
}
