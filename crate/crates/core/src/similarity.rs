//! Leacock-Chodorow similarity between synsets, terms and whole lexicons.
//!
//! `lch(a, b) = -ln((d + 1) / (2 * D))` where `d` is the shortest hypernym
//! path between `a` and `b` in edges and `D` is the maximum depth of their
//! part of speech. Term similarity reduces the LCH scores of all same-pos
//! synset pairs of two terms; lexicon similarity averages term similarity
//! over the full cross product of two lexicons.
//!
//! All reductions sum their inputs in sorted order, so a score does not
//! depend on argument order or on how the work was split across threads.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::wordnet::{HypernymDistances, PartOfSpeech, SynsetId, TaxonomyGraph, WordNetError};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error(transparent)]
    WordNet(#[from] WordNetError),
    #[error("lexicon {0:?} is empty")]
    EmptyLexicon(String),
    #[error("duplicate lexicon id {0:?}")]
    DuplicateLexiconId(String),
    #[error("a similarity matrix needs at least 2 lexicons, got {0}")]
    TooFewLexicons(usize),
    #[error("invalid similarity config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynsetAggregation {
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Term pairs without a score count as 0 and stay in the denominator.
    Zero,
    /// Term pairs without a score are dropped from the denominator.
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub synset_aggregation: SynsetAggregation,
    pub missing_policy: MissingPolicy,
    pub pos_scope: BTreeSet<PartOfSpeech>,
    /// Scores strictly above this are labelled strong.
    pub strong_threshold: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            synset_aggregation: SynsetAggregation::Max,
            missing_policy: MissingPolicy::Zero,
            pos_scope: PartOfSpeech::TAXONOMIC.into_iter().collect(),
            strong_threshold: 2.5,
        }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), SimilarityError> {
        if !(self.strong_threshold > 0.0 && self.strong_threshold.is_finite()) {
            return Err(SimilarityError::Config(format!(
                "strong_threshold must be a positive number, got {}",
                self.strong_threshold
            )));
        }
        if self.pos_scope.is_empty() {
            return Err(SimilarityError::Config("pos_scope is empty".into()));
        }
        if let Some(p) = self.pos_scope.iter().find(|p| !p.has_taxonomy()) {
            return Err(SimilarityError::Config(format!(
                "{p} has no hypernym taxonomy and cannot be in pos_scope"
            )));
        }
        Ok(())
    }

    pub fn is_strong(&self, score: f64) -> bool {
        score > self.strong_threshold
    }
}

/// LCH score for a known path distance and taxonomy depth.
pub fn lch_from_distance(distance: u32, max_depth: u32) -> Option<f64> {
    if max_depth == 0 {
        return None;
    }
    Some(-((f64::from(distance) + 1.0) / (2.0 * f64::from(max_depth))).ln())
}

pub fn lch_similarity(
    a: SynsetId,
    b: SynsetId,
    graph: &TaxonomyGraph,
) -> Result<Option<f64>, SimilarityError> {
    let distance = graph.shortest_path_distance(a, b)?;
    let depth = graph.max_depth(a.pos).unwrap_or(0);
    Ok(distance.and_then(|d| lch_from_distance(d, depth)))
}

/// Order-independent sum: sort, then Neumaier-compensated accumulation.
pub(crate) fn stable_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values.iter() {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Both synset reductions of one term pair; `None` when no same-pos synset
/// pair has a defined score.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TermPairScore {
    max: Option<f64>,
    mean: Option<f64>,
}

impl TermPairScore {
    fn get(&self, agg: SynsetAggregation) -> Option<f64> {
        match agg {
            SynsetAggregation::Max => self.max,
            SynsetAggregation::Mean => self.mean,
        }
    }
}

struct ExpandedSynset {
    depth: u32,
    distances: HypernymDistances,
}

type Expansion = Vec<ExpandedSynset>;

fn expand_term(
    term: &str,
    graph: &TaxonomyGraph,
    pos_scope: &BTreeSet<PartOfSpeech>,
) -> Result<Expansion, SimilarityError> {
    let mut out = Vec::new();
    for &pos in pos_scope {
        let Some(depth) = graph.max_depth(pos) else {
            continue;
        };
        for id in graph.lookup_ids(term, Some(pos)) {
            out.push(ExpandedSynset {
                depth,
                distances: graph.hypernym_distances(id)?,
            });
        }
    }
    Ok(out)
}

fn score_expansions(a: &Expansion, b: &Expansion) -> TermPairScore {
    let mut values = Vec::new();
    for sa in a {
        for sb in b {
            if sa.distances.pos() != sb.distances.pos() {
                continue;
            }
            if let Some(v) = sa
                .distances
                .distance_to(&sb.distances)
                .and_then(|d| lch_from_distance(d, sa.depth))
            {
                values.push(v);
            }
        }
    }
    if values.is_empty() {
        return TermPairScore {
            max: None,
            mean: None,
        };
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = values.len() as f64;
    let mean = stable_sum(&mut values) / n;
    TermPairScore {
        max: Some(max),
        mean: Some(mean),
    }
}

pub fn term_similarity(
    w1: &str,
    w2: &str,
    graph: &TaxonomyGraph,
    cfg: &SimilarityConfig,
) -> Result<Option<f64>, SimilarityError> {
    let a = expand_term(w1, graph, &cfg.pos_scope)?;
    let b = expand_term(w2, graph, &cfg.pos_scope)?;
    Ok(score_expansions(&a, &b).get(cfg.synset_aggregation))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconPairScore {
    pub lexicon_a: String,
    pub lexicon_b: String,
    pub s_avg: f64,
    /// Term pairs in the denominator.
    pub pair_count: usize,
    /// Term pairs dropped from the denominator.
    pub excluded_pairs: usize,
    /// Term pairs with no comparable synsets, whatever the policy.
    pub undefined_pairs: usize,
    pub strong: bool,
}

/// Expanded terms shared by every pair computation of one run.
struct ExpansionCache {
    by_term: HashMap<String, Expansion>,
}

impl ExpansionCache {
    fn build(
        lexicons: &[&Lexicon],
        graph: &TaxonomyGraph,
        cfg: &SimilarityConfig,
    ) -> Result<Self, SimilarityError> {
        let mut by_term = HashMap::new();
        for l in lexicons {
            for t in l.normalized_terms() {
                if !by_term.contains_key(t) {
                    by_term.insert(t.to_string(), expand_term(t, graph, &cfg.pos_scope)?);
                }
            }
        }
        Ok(Self { by_term })
    }

    fn pair_scores(&self, a: &Lexicon, b: &Lexicon, parallel: bool) -> Vec<TermPairScore> {
        let left: Vec<&Expansion> = a.normalized_terms().map(|t| &self.by_term[t]).collect();
        let right: Vec<&Expansion> = b.normalized_terms().map(|t| &self.by_term[t]).collect();
        let row = |ea: &&Expansion| -> Vec<TermPairScore> {
            right.iter().map(|eb| score_expansions(ea, eb)).collect()
        };
        if parallel {
            left.par_iter().flat_map_iter(&row).collect()
        } else {
            left.iter().flat_map(row).collect()
        }
    }
}

fn reduce_pair(
    a: &Lexicon,
    b: &Lexicon,
    scores: &[TermPairScore],
    agg: SynsetAggregation,
    missing: MissingPolicy,
    strong_threshold: f64,
) -> LexiconPairScore {
    let mut defined: Vec<f64> = scores.iter().filter_map(|s| s.get(agg)).collect();
    let undefined = scores.len() - defined.len();
    let (pair_count, excluded_pairs) = match missing {
        MissingPolicy::Zero => (scores.len(), 0),
        MissingPolicy::Exclude => (defined.len(), undefined),
    };
    let s_avg = if pair_count == 0 {
        0.0
    } else {
        stable_sum(&mut defined) / pair_count as f64
    };
    LexiconPairScore {
        lexicon_a: a.id.clone(),
        lexicon_b: b.id.clone(),
        s_avg,
        pair_count,
        excluded_pairs,
        undefined_pairs: undefined,
        strong: s_avg > strong_threshold,
    }
}

/// Mean term similarity over the cross product of two lexicons.
pub fn lexicon_pair_similarity(
    l1: &Lexicon,
    l2: &Lexicon,
    graph: &TaxonomyGraph,
    cfg: &SimilarityConfig,
) -> Result<LexiconPairScore, SimilarityError> {
    cfg.validate()?;
    for l in [l1, l2] {
        if l.is_empty() {
            return Err(SimilarityError::EmptyLexicon(l.id.clone()));
        }
    }
    let cache = ExpansionCache::build(&[l1, l2], graph, cfg)?;
    let scores = cache.pair_scores(l1, l2, false);
    Ok(reduce_pair(
        l1,
        l2,
        &scores,
        cfg.synset_aggregation,
        cfg.missing_policy,
        cfg.strong_threshold,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityMatrix {
    pub lexicon_ids: Vec<String>,
    /// Row-major `n × n`; entry `(i, j)` compares lexicon `i` with `j`.
    pub scores: Vec<LexiconPairScore>,
    pub config: SimilarityConfig,
    pub wordnet_release: String,
}

impl SimilarityMatrix {
    pub fn size(&self) -> usize {
        self.lexicon_ids.len()
    }

    pub fn get(&self, a: &str, b: &str) -> Option<&LexiconPairScore> {
        let i = self.lexicon_ids.iter().position(|x| x == a)?;
        let j = self.lexicon_ids.iter().position(|x| x == b)?;
        Some(&self.scores[i * self.size() + j])
    }

    pub fn at(&self, i: usize, j: usize) -> &LexiconPairScore {
        &self.scores[i * self.size() + j]
    }

    /// Mean s_avg over the unordered off-diagonal pairs.
    pub fn off_diagonal_mean(&self) -> f64 {
        let n = self.size();
        let mut values: Vec<f64> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.at(i, j).s_avg)
            .collect();
        let count = values.len();
        if count == 0 {
            return 0.0;
        }
        stable_sum(&mut values) / count as f64
    }
}

/// Off-diagonal mean under one aggregation / missing-policy combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub synset_aggregation: SynsetAggregation,
    pub missing_policy: MissingPolicy,
    pub off_diagonal_mean: f64,
}

/// Term-pair scores for every unordered lexicon pair, diagonal included.
struct PairTable {
    ids: Vec<String>,
    /// `(i, j, scores)` for `i <= j`.
    pairs: Vec<(usize, usize, Vec<TermPairScore>)>,
}

fn check_lexicons(lexicons: &[Lexicon]) -> Result<(), SimilarityError> {
    if lexicons.len() < 2 {
        return Err(SimilarityError::TooFewLexicons(lexicons.len()));
    }
    let mut seen = BTreeSet::new();
    for l in lexicons {
        if !seen.insert(l.id.as_str()) {
            return Err(SimilarityError::DuplicateLexiconId(l.id.clone()));
        }
        if l.is_empty() {
            return Err(SimilarityError::EmptyLexicon(l.id.clone()));
        }
    }
    Ok(())
}

fn pair_table(
    lexicons: &[Lexicon],
    graph: &TaxonomyGraph,
    cfg: &SimilarityConfig,
    parallel: bool,
) -> Result<PairTable, SimilarityError> {
    cfg.validate()?;
    check_lexicons(lexicons)?;
    let refs: Vec<&Lexicon> = lexicons.iter().collect();
    let cache = ExpansionCache::build(&refs, graph, cfg)?;
    let n = lexicons.len();
    let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            pairs.push((
                i,
                j,
                cache.pair_scores(&lexicons[i], &lexicons[j], parallel),
            ));
        }
    }
    Ok(PairTable {
        ids: lexicons.iter().map(|l| l.id.clone()).collect(),
        pairs,
    })
}

fn assemble_matrix(
    table: &PairTable,
    lexicons: &[Lexicon],
    cfg: &SimilarityConfig,
    agg: SynsetAggregation,
    missing: MissingPolicy,
    release: &str,
) -> SimilarityMatrix {
    let n = table.ids.len();
    let mut scores: Vec<Option<LexiconPairScore>> = vec![None; n * n];
    for (i, j, pair) in &table.pairs {
        let forward = reduce_pair(
            &lexicons[*i],
            &lexicons[*j],
            pair,
            agg,
            missing,
            cfg.strong_threshold,
        );
        let mut mirrored = forward.clone();
        mirrored.lexicon_a = forward.lexicon_b.clone();
        mirrored.lexicon_b = forward.lexicon_a.clone();
        scores[j * n + i] = Some(mirrored);
        scores[i * n + j] = Some(forward);
    }
    let mut config = cfg.clone();
    config.synset_aggregation = agg;
    config.missing_policy = missing;
    SimilarityMatrix {
        lexicon_ids: table.ids.clone(),
        scores: scores
            .into_iter()
            .map(|s| s.expect("every cell filled"))
            .collect(),
        config,
        wordnet_release: release.to_string(),
    }
}

/// Full pairwise matrix, single-threaded.
pub fn similarity_matrix(
    lexicons: &[Lexicon],
    graph: &TaxonomyGraph,
    cfg: &SimilarityConfig,
) -> Result<SimilarityMatrix, SimilarityError> {
    let table = pair_table(lexicons, graph, cfg, false)?;
    Ok(assemble_matrix(
        &table,
        lexicons,
        cfg,
        cfg.synset_aggregation,
        cfg.missing_policy,
        graph.release(),
    ))
}

fn with_workers<T: Send>(
    workers: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, SimilarityError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimilarityError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Same result as [`similarity_matrix`], bit for bit, computed on `workers`
/// threads.
pub fn similarity_matrix_parallel(
    lexicons: &[Lexicon],
    graph: &TaxonomyGraph,
    cfg: &SimilarityConfig,
    workers: usize,
) -> Result<SimilarityMatrix, SimilarityError> {
    let table = with_workers(workers, || pair_table(lexicons, graph, cfg, true))??;
    Ok(assemble_matrix(
        &table,
        lexicons,
        cfg,
        cfg.synset_aggregation,
        cfg.missing_policy,
        graph.release(),
    ))
}

/// Matrix under `cfg` plus the off-diagonal mean under every
/// aggregation × missing-policy combination, from one pass over the terms.
pub fn similarity_with_sensitivity(
    lexicons: &[Lexicon],
    graph: &TaxonomyGraph,
    cfg: &SimilarityConfig,
    workers: usize,
) -> Result<(SimilarityMatrix, Vec<SensitivityRow>), SimilarityError> {
    let parallel = workers > 1;
    let table = if parallel {
        with_workers(workers, || pair_table(lexicons, graph, cfg, true))??
    } else {
        pair_table(lexicons, graph, cfg, false)?
    };
    let matrix = assemble_matrix(
        &table,
        lexicons,
        cfg,
        cfg.synset_aggregation,
        cfg.missing_policy,
        graph.release(),
    );
    let mut rows = Vec::new();
    for agg in [SynsetAggregation::Max, SynsetAggregation::Mean] {
        for missing in [MissingPolicy::Zero, MissingPolicy::Exclude] {
            let m = assemble_matrix(&table, lexicons, cfg, agg, missing, graph.release());
            rows.push(SensitivityRow {
                synset_aggregation: agg,
                missing_policy: missing,
                off_diagonal_mean: m.off_diagonal_mean(),
            });
        }
    }
    Ok((matrix, rows))
}
