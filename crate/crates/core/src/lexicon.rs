//! Lexicon ingestion, term normalization and majority-vote consensus.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("term {0:?} is empty after normalization")]
    InvalidTerm(String),
    #[error("failed to read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("invalid manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("lexicon {id:?}: exclusion {term:?} does not occur in the source")]
    UnknownExclusion { id: String, term: String },
    #[error("lexicon {0:?} is empty after exclusions")]
    Empty(String),
    #[error("{0}")]
    Config(String),
}

/// Canonical form used for every cross-lexicon comparison.
///
/// NFC, lowercase, whitespace runs collapsed to one space, and anything that
/// is not a letter or digit trimmed from both ends. Internal hyphens and
/// apostrophes survive.
pub fn normalize_term(raw: &str) -> Result<String, LexiconError> {
    let composed: String = raw.nfc().collect::<String>().to_lowercase();
    let collapsed = composed.split_whitespace().collect::<Vec<_>>().join(" ");
    let trimmed = collapsed.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        return Err(LexiconError::InvalidTerm(raw.to_string()));
    }
    Ok(trimmed.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub raw: String,
    pub normalized: String,
}

impl Term {
    pub fn new(raw: impl Into<String>) -> Result<Self, LexiconError> {
        let raw = raw.into();
        let normalized = normalize_term(&raw)?;
        Ok(Self { raw, normalized })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    /// One term per line; blank lines and `#` comment lines ignored.
    #[default]
    Text,
    /// CSV with a header row containing a `term` column.
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub term: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(default)]
    pub citation: String,
    /// Relative paths are resolved against the manifest's directory.
    pub source: PathBuf,
    #[serde(default)]
    pub format: SourceFormat,
    #[serde(default)]
    pub exclusions: Vec<Exclusion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconManifest {
    pub lexicons: Vec<ManifestEntry>,
}

impl LexiconManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json(&text, base).map_err(|e| match e {
            LexiconError::Manifest { message, .. } => LexiconError::Manifest {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses a manifest and resolves its source paths against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, LexiconError> {
        let invalid = |message: String| LexiconError::Manifest {
            path: base.to_path_buf(),
            message,
        };
        let mut manifest: LexiconManifest =
            serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        let mut seen = HashSet::new();
        for entry in &mut manifest.lexicons {
            if entry.id.trim().is_empty() {
                return Err(invalid("lexicon id must not be empty".into()));
            }
            if !seen.insert(entry.id.clone()) {
                return Err(invalid(format!("duplicate lexicon id {:?}", entry.id)));
            }
            if entry.source.is_relative() {
                entry.source = base.join(&entry.source);
            }
            if !entry.source.is_file() {
                return Err(invalid(format!(
                    "source for {:?} not found: {}",
                    entry.id,
                    entry.source.display()
                )));
            }
        }
        Ok(manifest)
    }

    pub fn ingest_all(&self) -> Result<Vec<Lexicon>, LexiconError> {
        self.lexicons.iter().map(ingest_lexicon).collect()
    }
}

/// A named, curated set of stigmatizing terms, unique by normalized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lexicon {
    pub id: String,
    pub citation: String,
    terms: BTreeMap<String, Term>,
    excluded: Vec<(Term, String)>,
    source_size: usize,
}

impl Lexicon {
    /// Builds a lexicon from raw terms with no exclusions.
    pub fn new<I, S>(
        id: impl Into<String>,
        citation: impl Into<String>,
        raw: I,
    ) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::curate(
            id.into(),
            citation.into(),
            raw.into_iter().map(Into::into).collect(),
            &[],
        )
    }

    fn curate(
        id: String,
        citation: String,
        raw: Vec<String>,
        exclusions: &[Exclusion],
    ) -> Result<Self, LexiconError> {
        let mut terms = BTreeMap::new();
        for r in raw {
            let term = Term::new(r)?;
            terms.entry(term.normalized.clone()).or_insert(term);
        }
        let source_size = terms.len();

        let mut excluded = Vec::new();
        for ex in exclusions {
            let key = normalize_term(&ex.term)?;
            match terms.remove(&key) {
                Some(term) => excluded.push((term, ex.reason.clone())),
                None if excluded
                    .iter()
                    .any(|(t, _): &(Term, String)| t.normalized == key) => {}
                None => {
                    return Err(LexiconError::UnknownExclusion {
                        id,
                        term: ex.term.clone(),
                    })
                }
            }
        }
        if terms.is_empty() {
            return Err(LexiconError::Empty(id));
        }
        Ok(Self {
            id,
            citation,
            terms,
            excluded,
            source_size,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Distinct normalized terms in the source, before exclusions.
    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.terms.contains_key(normalized)
    }

    /// Terms in normalized-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> + '_ {
        self.terms.values()
    }

    pub fn normalized_terms(&self) -> impl Iterator<Item = &str> + '_ {
        self.terms.keys().map(String::as_str)
    }

    pub fn excluded(&self) -> &[(Term, String)] {
        &self.excluded
    }
}

pub fn ingest_lexicon(entry: &ManifestEntry) -> Result<Lexicon, LexiconError> {
    let raw = match entry.format {
        SourceFormat::Text => read_text_terms(&entry.source)?,
        SourceFormat::Csv => read_csv_terms(&entry.source)?,
    };
    Lexicon::curate(
        entry.id.clone(),
        entry.citation.clone(),
        raw,
        &entry.exclusions,
    )
}

fn read_text_terms(path: &Path) -> Result<Vec<String>, LexiconError> {
    let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn read_csv_terms(path: &Path) -> Result<Vec<String>, LexiconError> {
    let format_err = |message: String| LexiconError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| format_err(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| format_err(e.to_string()))?
        .clone();
    let column = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("term"))
        .ok_or_else(|| format_err("no `term` column in header".into()))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(format!("row {}: {e}", i + 2)))?;
        match record.get(column).map(str::trim) {
            Some(t) if !t.is_empty() => out.push(t.to_string()),
            _ => {}
        }
    }
    Ok(out)
}

/// Union of the normalized terms of all lexicons.
pub fn build_master_list(lexicons: &[Lexicon]) -> BTreeSet<String> {
    lexicons
        .iter()
        .flat_map(|l| l.normalized_terms().map(str::to_string))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusEntry {
    pub term: String,
    /// Ids of the lexicons containing the term, sorted.
    pub members: Vec<String>,
    pub count: usize,
    pub high_frequency: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusReport {
    /// Lexicon ids in input order.
    pub lexicon_ids: Vec<String>,
    pub master_size: usize,
    pub threshold_fraction: f64,
    /// Smallest membership count that qualifies as high-frequency.
    pub min_count: usize,
    /// Sorted by count descending, then term.
    pub entries: Vec<ConsensusEntry>,
}

impl ConsensusReport {
    pub fn high_frequency(&self) -> impl Iterator<Item = &ConsensusEntry> + '_ {
        self.entries.iter().filter(|e| e.high_frequency)
    }

    pub fn high_frequency_terms(&self) -> BTreeSet<String> {
        self.high_frequency().map(|e| e.term.clone()).collect()
    }

    pub fn entry(&self, term: &str) -> Option<&ConsensusEntry> {
        self.entries.iter().find(|e| e.term == term)
    }

    /// How many high-frequency terms each lexicon contains, in input order.
    pub fn coverage(&self) -> Vec<(String, usize)> {
        self.lexicon_ids
            .iter()
            .map(|id| {
                let n = self
                    .high_frequency()
                    .filter(|e| e.members.iter().any(|m| m == id))
                    .count();
                (id.clone(), n)
            })
            .collect()
    }
}

/// `ceil(fraction * n)`, tolerant of representation error in `fraction`.
pub fn majority_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    ((x - 1e-9).ceil().max(1.0)) as usize
}

pub fn consensus_analysis(
    lexicons: &[Lexicon],
    threshold_fraction: f64,
) -> Result<ConsensusReport, LexiconError> {
    if lexicons.len() < 2 {
        return Err(LexiconError::Config(format!(
            "consensus needs at least 2 lexicons, got {}",
            lexicons.len()
        )));
    }
    if !(threshold_fraction > 0.0 && threshold_fraction <= 1.0) {
        return Err(LexiconError::Config(format!(
            "threshold fraction must be in (0, 1], got {threshold_fraction}"
        )));
    }
    let mut ids = HashSet::new();
    for l in lexicons {
        if !ids.insert(l.id.as_str()) {
            return Err(LexiconError::Config(format!(
                "duplicate lexicon id {:?}",
                l.id
            )));
        }
    }

    let min_count = majority_count(threshold_fraction, lexicons.len());
    let mut members: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for l in lexicons {
        for t in l.normalized_terms() {
            members.entry(t).or_default().push(l.id.clone());
        }
    }
    let mut entries: Vec<ConsensusEntry> = members
        .into_iter()
        .map(|(term, mut m)| {
            m.sort();
            let count = m.len();
            ConsensusEntry {
                term: term.to_string(),
                members: m,
                count,
                high_frequency: count >= min_count,
            }
        })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));

    Ok(ConsensusReport {
        lexicon_ids: lexicons.iter().map(|l| l.id.clone()).collect(),
        master_size: entries.len(),
        threshold_fraction,
        min_count,
        entries,
    })
}
