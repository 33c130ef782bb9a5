//! Flags lexicon terms in free-text clinical notes.
//!
//! Matching is case-insensitive and treats any whitespace run in the text as
//! the single space inside a multiword term. A match must sit on word
//! boundaries: text start/end or a character that is neither alphanumeric
//! nor a hyphen. Overlapping candidates resolve leftmost-longest. Offsets
//! are byte offsets into the original text.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use aho_corasick::{AhoCorasick, MatchKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::lexicon::{ConsensusReport, Lexicon};
use crate::sentiment::{Sentiment, SentimentLexicon};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("no terms to match")]
    NoTerms,
    #[error("failed to build matcher: {0}")]
    Build(String),
    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),
    #[error("failed to read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Corpus {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

fn serialize_sentiment<S: Serializer>(s: &Option<Sentiment>, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.map_or("unmatched", Sentiment::as_str))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pattern {
    pub term: String,
    pub lexicon_ids: Vec<String>,
    pub consensus_count: usize,
    pub high_frequency: bool,
    #[serde(serialize_with = "serialize_sentiment")]
    pub sentiment: Option<Sentiment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Annotation {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub term: String,
    pub lexicon_ids: Vec<String>,
    pub consensus_count: usize,
    pub high_frequency: bool,
    #[serde(serialize_with = "serialize_sentiment")]
    pub sentiment: Option<Sentiment>,
}

/// Compiled multi-pattern matcher over every term of a set of lexicons.
#[derive(Debug, Clone)]
pub struct Matcher {
    automaton: AhoCorasick,
    patterns: Vec<Pattern>,
}

/// Lowercases char by char and collapses whitespace runs to one space.
/// `origin[k]` is the `(start, end)` byte span in `text` of the character
/// that produced byte `k` of the folded string.
fn fold(text: &str) -> (String, Vec<(usize, usize)>) {
    let mut folded = String::with_capacity(text.len());
    let mut origin = Vec::with_capacity(text.len());
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if !d.is_whitespace() {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            folded.push(' ');
            origin.push((i, end));
            continue;
        }
        let end = i + c.len_utf8();
        for lc in c.to_lowercase() {
            let before = folded.len();
            folded.push(lc);
            origin.extend(std::iter::repeat_n((i, end), folded.len() - before));
        }
    }
    (folded, origin)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-'
}

pub fn compile_matcher(
    lexicons: &[Lexicon],
    slex: Option<&SentimentLexicon>,
    consensus: Option<&ConsensusReport>,
) -> Result<Matcher, ScanError> {
    let mut by_term: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for l in lexicons {
        for t in l.normalized_terms() {
            by_term.entry(t).or_default().push(l.id.clone());
        }
    }
    if by_term.is_empty() {
        return Err(ScanError::NoTerms);
    }
    let high: HashSet<String> = consensus
        .map(|c| c.high_frequency_terms().into_iter().collect())
        .unwrap_or_default();
    let patterns: Vec<Pattern> = by_term
        .into_iter()
        .map(|(term, mut ids)| {
            ids.sort();
            ids.dedup();
            Pattern {
                term: term.to_string(),
                consensus_count: ids.len(),
                lexicon_ids: ids,
                high_frequency: high.contains(term),
                sentiment: slex.and_then(|s| s.get(term)),
            }
        })
        .collect();
    let needles: Vec<String> = patterns.iter().map(|p| fold(&p.term).0).collect();
    let automaton = AhoCorasick::builder()
        .match_kind(MatchKind::Standard)
        .build(&needles)
        .map_err(|e| ScanError::Build(e.to_string()))?;
    Ok(Matcher {
        automaton,
        patterns,
    })
}

impl Matcher {
    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, term: &str) -> Option<&Pattern> {
        self.patterns
            .binary_search_by(|p| p.term.as_str().cmp(term))
            .ok()
            .map(|i| &self.patterns[i])
    }
}

pub fn scan_document(doc: &Document, m: &Matcher) -> Vec<Annotation> {
    let text = doc.text.as_str();
    let (folded, origin) = fold(text);
    let mut candidates: Vec<(usize, usize, usize)> = m
        .automaton
        .find_overlapping_iter(&folded)
        .filter_map(|mat| {
            let start = origin[mat.start()].0;
            let end = origin[mat.end() - 1].1;
            let left_ok = text[..start]
                .chars()
                .next_back()
                .is_none_or(|c| !is_word_char(c));
            let right_ok = text[end..].chars().next().is_none_or(|c| !is_word_char(c));
            (left_ok && right_ok).then_some((start, end, mat.pattern().as_usize()))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

    let mut out = Vec::new();
    let mut cursor = 0;
    for (start, end, pid) in candidates {
        if start < cursor {
            continue;
        }
        let p = &m.patterns[pid];
        out.push(Annotation {
            start,
            end,
            surface: text[start..end].to_string(),
            term: p.term.clone(),
            lexicon_ids: p.lexicon_ids.clone(),
            consensus_count: p.consensus_count,
            high_frequency: p.high_frequency,
            sentiment: p.sentiment,
        });
        cursor = end;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentResult {
    pub id: String,
    pub flagged: bool,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    /// Sorted by document id.
    pub documents: Vec<DocumentResult>,
    pub documents_scanned: usize,
    pub documents_flagged: usize,
    pub fraction_flagged: f64,
    /// `(term, occurrences)`, count descending then term.
    pub term_frequency: Vec<(String, usize)>,
}

pub fn scan_corpus(documents: &[Document], m: &Matcher) -> Result<ScanReport, ScanError> {
    let mut seen = HashSet::new();
    for d in documents {
        if !seen.insert(d.id.as_str()) {
            return Err(ScanError::DuplicateDocument(d.id.clone()));
        }
    }
    let mut results: Vec<DocumentResult> = documents
        .par_iter()
        .map(|d| {
            let annotations = scan_document(d, m);
            DocumentResult {
                id: d.id.clone(),
                flagged: !annotations.is_empty(),
                annotations,
            }
        })
        .collect();
    results.sort_by(|a, b| a.id.cmp(&b.id));

    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &results {
        for a in &r.annotations {
            *freq.entry(a.term.as_str()).or_default() += 1;
        }
    }
    let mut term_frequency: Vec<(String, usize)> =
        freq.into_iter().map(|(t, n)| (t.to_string(), n)).collect();
    term_frequency.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let flagged = results.iter().filter(|r| r.flagged).count();
    let scanned = results.len();
    Ok(ScanReport {
        fraction_flagged: if scanned == 0 {
            0.0
        } else {
            flagged as f64 / scanned as f64
        },
        documents: results,
        documents_scanned: scanned,
        documents_flagged: flagged,
        term_frequency,
    })
}

/// Reads a directory of `.txt` notes (id = file stem) or a JSON-lines file
/// of `{"id": ..., "text": ...}` objects.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>, ScanError> {
    let path = path.as_ref();
    let io_err = |source| ScanError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(io_err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(&p).map_err(|source| ScanError::Io {
                    path: p.clone(),
                    source,
                })?;
                let id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(Document { id, text })
            })
            .collect()
    } else {
        let text = fs::read_to_string(path).map_err(io_err)?;
        let mut docs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(line).map_err(|e| ScanError::Corpus {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            docs.push(doc);
        }
        Ok(docs)
    }
}
