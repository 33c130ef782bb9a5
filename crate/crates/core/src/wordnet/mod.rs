//! WordNet database reader and hypernym taxonomy.
//!
//! [`load_wordnet`] reads the `data.*` / `index.*` files of a WordNet `dict/`
//! directory into an immutable [`TaxonomyGraph`]. The graph answers lemma
//! lookups for every part of speech and hypernym-path queries for nouns and
//! verbs.
//!
//! Depths and distances are counted in edges. A root synset has depth 0.
//! When a part of speech has more than one root and
//! [`LoadOptions::simulate_root`] is set, a virtual root is placed one edge
//! above all real roots, so every pair of synsets of that part of speech is
//! connected. The virtual root never appears as a [`Synset`].

mod parse;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use parse::{is_header_line, parse_data_line, parse_index_line, release_from_header};

#[derive(Debug, Error)]
pub enum WordNetError {
    #[error("wordnet file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("failed to read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("wordnet integrity error: {0}")]
    Integrity(String),
    #[error("synsets {a} and {b} have different parts of speech")]
    PosMismatch { a: SynsetId, b: SynsetId },
    #[error("path operations are not defined for {0} synsets")]
    UnsupportedPos(PartOfSpeech),
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

impl PartOfSpeech {
    pub const ALL: [PartOfSpeech; 4] = [
        PartOfSpeech::Noun,
        PartOfSpeech::Verb,
        PartOfSpeech::Adjective,
        PartOfSpeech::Adverb,
    ];

    /// Parts of speech with a hypernym taxonomy.
    pub const TAXONOMIC: [PartOfSpeech; 2] = [PartOfSpeech::Noun, PartOfSpeech::Verb];

    /// Maps a WordNet `ss_type` / pos tag. Satellite adjectives (`s`) fold
    /// into [`PartOfSpeech::Adjective`].
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "n" => Some(Self::Noun),
            "v" => Some(Self::Verb),
            "a" | "s" => Some(Self::Adjective),
            "r" => Some(Self::Adverb),
            _ => None,
        }
    }

    pub fn tag(self) -> char {
        match self {
            Self::Noun => 'n',
            Self::Verb => 'v',
            Self::Adjective => 'a',
            Self::Adverb => 'r',
        }
    }

    /// Suffix of the database files, e.g. `data.adj`.
    pub fn file_suffix(self) -> &'static str {
        match self {
            Self::Noun => "noun",
            Self::Verb => "verb",
            Self::Adjective => "adj",
            Self::Adverb => "adv",
        }
    }

    pub fn has_taxonomy(self) -> bool {
        matches!(self, Self::Noun | Self::Verb)
    }
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Noun => "noun",
            Self::Verb => "verb",
            Self::Adjective => "adjective",
            Self::Adverb => "adverb",
        })
    }
}

impl FromStr for PartOfSpeech {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "noun" => Ok(Self::Noun),
            "v" | "verb" => Ok(Self::Verb),
            "a" | "s" | "adj" | "adjective" => Ok(Self::Adjective),
            "r" | "adv" | "adverb" => Ok(Self::Adverb),
            other => Err(format!("unknown part of speech {other:?}")),
        }
    }
}

/// Byte offset of a synset in its data file, plus its part of speech.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SynsetId {
    pub offset: u32,
    pub pos: PartOfSpeech,
}

impl SynsetId {
    pub fn new(offset: u32, pos: PartOfSpeech) -> Self {
        Self { offset, pos }
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}-{}", self.offset, self.pos.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Synset {
    pub id: SynsetId,
    /// Lemmas as written in the data file; collocations joined by `_`.
    pub lemmas: Vec<String>,
    pub hypernyms: Vec<SynsetId>,
    pub gloss: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CyclePolicy {
    /// A hypernym cycle is an integrity error.
    Reject,
    /// Drop the edge that closes each cycle, found by depth-first search in
    /// synset order, and record it in [`TaxonomyGraph::broken_cycle_edges`].
    BreakBackEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Follow `@i` (instance hypernym) pointers in addition to `@`.
    pub include_instance_hypernyms: bool,
    /// Add a virtual root above the real roots of a multi-rooted taxonomy.
    pub simulate_root: bool,
    pub cycles: CyclePolicy,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            include_instance_hypernyms: true,
            simulate_root: true,
            cycles: CyclePolicy::BreakBackEdges,
        }
    }
}

/// Shortest hypernym distances from one synset to each of its ancestors
/// (itself included at distance 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypernymDistances {
    pos: PartOfSpeech,
    /// `(node index, distance)`, sorted by node index.
    entries: Vec<(u32, u32)>,
    virtual_root: Option<u32>,
}

impl HypernymDistances {
    pub fn pos(&self) -> PartOfSpeech {
        self.pos
    }

    /// Number of real ancestors, the synset itself included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Minimum over common ancestors `h` of `d(a, h) + d(b, h)`.
    pub fn distance_to(&self, other: &HypernymDistances) -> Option<u32> {
        if self.pos != other.pos {
            return None;
        }
        let (mut i, mut j) = (0, 0);
        let mut best: Option<u32> = None;
        while i < self.entries.len() && j < other.entries.len() {
            let (na, da) = self.entries[i];
            let (nb, db) = other.entries[j];
            match na.cmp(&nb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let d = da + db;
                    best = Some(best.map_or(d, |b| b.min(d)));
                    i += 1;
                    j += 1;
                }
            }
        }
        if let (Some(va), Some(vb)) = (self.virtual_root, other.virtual_root) {
            let d = va + vb;
            best = Some(best.map_or(d, |b| b.min(d)));
        }
        best
    }
}

#[derive(Debug, Clone, Default)]
struct PosSummary {
    roots: usize,
    longest_chain: u32,
    virtual_root: bool,
}

/// Immutable WordNet synset graph with a lemma index.
#[derive(Debug, Clone)]
pub struct TaxonomyGraph {
    release: String,
    options: LoadOptions,
    synsets: Vec<Synset>,
    by_id: HashMap<SynsetId, u32>,
    parents: Vec<Vec<u32>>,
    lemma_index: HashMap<PartOfSpeech, HashMap<String, Vec<SynsetId>>>,
    summary: BTreeMap<PartOfSpeech, PosSummary>,
    broken_edges: Vec<(SynsetId, SynsetId)>,
}

/// Loads a WordNet `dict/` directory with [`LoadOptions::default`].
pub fn load_wordnet(root: impl AsRef<Path>) -> Result<TaxonomyGraph, WordNetError> {
    load_wordnet_with(root, LoadOptions::default())
}

pub fn load_wordnet_with(
    root: impl AsRef<Path>,
    options: LoadOptions,
) -> Result<TaxonomyGraph, WordNetError> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(WordNetError::MissingFile(root.to_path_buf()));
    }

    let mut release = None;
    let mut synsets = Vec::new();
    let mut index_entries = Vec::new();

    for pos in PartOfSpeech::ALL {
        let data_name = format!("data.{}", pos.file_suffix());
        let text = read_file(&root.join(&data_name))?;
        for (n, line) in text.lines().enumerate() {
            if is_header_line(line) {
                if release.is_none() {
                    release = release_from_header(line);
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let rec = parse_data_line(line, &data_name, n + 1, pos)?;
            synsets.push((rec, data_name.clone()));
        }

        let index_name = format!("index.{}", pos.file_suffix());
        let text = read_file(&root.join(&index_name))?;
        for (n, line) in text.lines().enumerate() {
            if is_header_line(line) || line.trim().is_empty() {
                continue;
            }
            let rec = parse_index_line(line, &index_name, n + 1)?;
            if rec.pos != pos {
                return Err(WordNetError::Parse {
                    file: index_name.clone(),
                    line: n + 1,
                    message: format!("entry for {:?} has pos {}", rec.lemma, rec.pos),
                });
            }
            index_entries.push(rec);
        }
    }

    let mut raw = Vec::with_capacity(synsets.len());
    for (rec, _file) in synsets {
        let hypernyms = rec
            .hypernyms
            .iter()
            .filter(|p| options.include_instance_hypernyms || !p.instance)
            .map(|p| SynsetId::new(p.offset, p.pos))
            .collect();
        raw.push(Synset {
            id: SynsetId::new(rec.offset, rec.pos),
            lemmas: rec.lemmas,
            hypernyms,
            gloss: rec.gloss,
        });
    }

    let index = index_entries
        .into_iter()
        .map(|rec| {
            let ids = rec
                .offsets
                .iter()
                .map(|&o| SynsetId::new(o, rec.pos))
                .collect();
            (rec.lemma, rec.pos, ids)
        })
        .collect();

    TaxonomyGraph::assemble(
        release.unwrap_or_else(|| "unknown".to_string()),
        raw,
        Some(index),
        options,
    )
}

fn read_file(path: &Path) -> Result<String, WordNetError> {
    if !path.is_file() {
        return Err(WordNetError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| WordNetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn index_key(lemma: &str) -> String {
    lemma.to_lowercase()
}

type IndexEntries = Vec<(String, PartOfSpeech, Vec<SynsetId>)>;

impl TaxonomyGraph {
    /// Builds a graph from in-memory synsets. The lemma index is derived
    /// from the synsets' own lemmas, in synset order.
    pub fn from_synsets(
        release: impl Into<String>,
        synsets: Vec<Synset>,
        options: LoadOptions,
    ) -> Result<Self, WordNetError> {
        Self::assemble(release.into(), synsets, None, options)
    }

    fn assemble(
        release: String,
        mut synsets: Vec<Synset>,
        index: Option<IndexEntries>,
        options: LoadOptions,
    ) -> Result<Self, WordNetError> {
        let mut by_id = HashMap::with_capacity(synsets.len());
        for (i, s) in synsets.iter().enumerate() {
            if s.lemmas.is_empty() {
                return Err(WordNetError::Integrity(format!(
                    "synset {} has no lemmas",
                    s.id
                )));
            }
            if by_id.insert(s.id, i as u32).is_some() {
                return Err(WordNetError::Integrity(format!(
                    "duplicate synset {}",
                    s.id
                )));
            }
        }

        let mut parents = Vec::with_capacity(synsets.len());
        for s in &synsets {
            let mut ps = Vec::with_capacity(s.hypernyms.len());
            for h in &s.hypernyms {
                if h.pos != s.id.pos {
                    return Err(WordNetError::Integrity(format!(
                        "synset {} has hypernym {} of a different part of speech",
                        s.id, h
                    )));
                }
                let idx = *by_id.get(h).ok_or_else(|| {
                    WordNetError::Integrity(format!(
                        "synset {} points to missing hypernym {}",
                        s.id, h
                    ))
                })?;
                if !ps.contains(&idx) {
                    ps.push(idx);
                }
            }
            parents.push(ps);
        }

        let mut lemma_index: HashMap<PartOfSpeech, HashMap<String, Vec<SynsetId>>> = HashMap::new();
        if let Some(entries) = index {
            for (lemma, pos, ids) in entries {
                for id in &ids {
                    if !by_id.contains_key(id) {
                        return Err(WordNetError::Integrity(format!(
                            "index entry {lemma:?} points to missing synset {id}"
                        )));
                    }
                }
                let slot = lemma_index
                    .entry(pos)
                    .or_default()
                    .entry(index_key(&lemma))
                    .or_default();
                for id in ids {
                    if !slot.contains(&id) {
                        slot.push(id);
                    }
                }
            }
        }
        // Every synset lemma must be findable, whether or not an index file listed it.
        for s in &synsets {
            for lemma in &s.lemmas {
                let slot = lemma_index
                    .entry(s.id.pos)
                    .or_default()
                    .entry(index_key(lemma))
                    .or_default();
                if !slot.contains(&s.id) {
                    slot.push(s.id);
                }
            }
        }

        let (heights, broken) = resolve_cycles(&synsets, &mut parents, options.cycles)?;
        for (i, ps) in parents.iter().enumerate() {
            let ids: Vec<SynsetId> = ps.iter().map(|&p| synsets[p as usize].id).collect();
            synsets[i].hypernyms = ids;
        }
        let broken_edges = broken
            .into_iter()
            .map(|(c, p)| (synsets[c as usize].id, synsets[p as usize].id))
            .collect();

        let mut summary: BTreeMap<PartOfSpeech, PosSummary> = BTreeMap::new();
        for (i, s) in synsets.iter().enumerate() {
            let entry = summary.entry(s.id.pos).or_default();
            if parents[i].is_empty() {
                entry.roots += 1;
            }
            entry.longest_chain = entry.longest_chain.max(heights[i]);
        }
        for (pos, entry) in summary.iter_mut() {
            entry.virtual_root = pos.has_taxonomy() && options.simulate_root && entry.roots > 1;
        }

        Ok(Self {
            release,
            options,
            synsets,
            by_id,
            parents,
            lemma_index,
            summary,
            broken_edges,
        })
    }

    /// WordNet release string read from the license header, e.g. `3.0`.
    pub fn release(&self) -> &str {
        &self.release
    }

    pub fn options(&self) -> LoadOptions {
        self.options
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.by_id.get(&id).map(|&i| &self.synsets[i as usize])
    }

    pub fn synsets(&self, pos: PartOfSpeech) -> impl Iterator<Item = &Synset> + '_ {
        self.synsets.iter().filter(move |s| s.id.pos == pos)
    }

    /// Hypernym edges removed to make the graph acyclic.
    pub fn broken_cycle_edges(&self) -> &[(SynsetId, SynsetId)] {
        &self.broken_edges
    }

    /// Number of synsets of `pos` without hypernyms.
    pub fn root_count(&self, pos: PartOfSpeech) -> usize {
        self.summary.get(&pos).map_or(0, |s| s.roots)
    }

    pub fn has_virtual_root(&self, pos: PartOfSpeech) -> bool {
        self.summary.get(&pos).is_some_and(|s| s.virtual_root)
    }

    /// Longest hypernym chain, in edges, from a synset of `pos` to a root;
    /// one more when the taxonomy has a virtual root. `None` for adjectives,
    /// adverbs and parts of speech with no synsets.
    pub fn max_depth(&self, pos: PartOfSpeech) -> Option<u32> {
        if !pos.has_taxonomy() {
            return None;
        }
        self.summary
            .get(&pos)
            .map(|s| s.longest_chain + u32::from(s.virtual_root))
    }

    /// Synsets whose lemmas contain `term`. Spaces become underscores; when
    /// that finds nothing, hyphens are tried as underscores and then
    /// removed. Out-of-vocabulary terms give an empty list.
    pub fn lookup_synsets(&self, term: &str, pos: Option<PartOfSpeech>) -> Vec<&Synset> {
        self.lookup_ids(term, pos)
            .into_iter()
            .filter_map(|id| self.synset(id))
            .collect()
    }

    pub fn lookup_ids(&self, term: &str, pos: Option<PartOfSpeech>) -> Vec<SynsetId> {
        let term = term.trim();
        if term.is_empty() {
            return Vec::new();
        }
        let base = index_key(term).replace(' ', "_");
        let mut keys = vec![base.clone()];
        for alt in [base.replace('-', "_"), base.replace('-', "")] {
            if !keys.contains(&alt) {
                keys.push(alt);
            }
        }
        let scope: Vec<PartOfSpeech> = match pos {
            Some(p) => vec![p],
            None => PartOfSpeech::ALL.to_vec(),
        };
        for key in &keys {
            let found: Vec<SynsetId> = scope
                .iter()
                .filter_map(|p| self.lemma_index.get(p).and_then(|m| m.get(key)))
                .flatten()
                .copied()
                .collect();
            if !found.is_empty() {
                return found;
            }
        }
        Vec::new()
    }

    fn checked_index(&self, id: SynsetId) -> Result<u32, WordNetError> {
        if !id.pos.has_taxonomy() {
            return Err(WordNetError::UnsupportedPos(id.pos));
        }
        self.by_id
            .get(&id)
            .copied()
            .ok_or(WordNetError::UnknownSynset(id))
    }

    /// Breadth-first shortest distances from `id` to all of its ancestors.
    pub fn hypernym_distances(&self, id: SynsetId) -> Result<HypernymDistances, WordNetError> {
        let start = self.checked_index(id)?;
        let mut seen: HashMap<u32, u32> = HashMap::new();
        let mut queue = VecDeque::from([(start, 0u32)]);
        while let Some((node, d)) = queue.pop_front() {
            if seen.contains_key(&node) {
                continue;
            }
            seen.insert(node, d);
            for &p in &self.parents[node as usize] {
                if !seen.contains_key(&p) {
                    queue.push_back((p, d + 1));
                }
            }
        }
        let mut entries: Vec<(u32, u32)> = seen.into_iter().collect();
        entries.sort_unstable();
        // The virtual root sits one edge above the farthest real ancestor.
        let virtual_root = self
            .has_virtual_root(id.pos)
            .then(|| entries.iter().map(|&(_, d)| d).max().unwrap_or(0) + 1);
        Ok(HypernymDistances {
            pos: id.pos,
            entries,
            virtual_root,
        })
    }

    /// Length in edges of the shortest hypernym path joining `a` and `b`
    /// through a common ancestor. `None` when they share no ancestor.
    pub fn shortest_path_distance(
        &self,
        a: SynsetId,
        b: SynsetId,
    ) -> Result<Option<u32>, WordNetError> {
        if a.pos != b.pos {
            return Err(WordNetError::PosMismatch { a, b });
        }
        let da = self.hypernym_distances(a)?;
        let db = self.hypernym_distances(b)?;
        Ok(da.distance_to(&db))
    }
}

/// Height of every node (longest chain to a root) and the removed
/// `(child, parent)` back edges, as node indices.
type CycleResolution = (Vec<u32>, Vec<(u32, u32)>);

/// Depth-first search over hypernym edges in synset order.
fn resolve_cycles(
    synsets: &[Synset],
    parents: &mut [Vec<u32>],
    policy: CyclePolicy,
) -> Result<CycleResolution, WordNetError> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;

    let n = parents.len();
    let mut color = vec![WHITE; n];
    let mut height = vec![0u32; n];
    let mut broken = Vec::new();
    let mut stack: Vec<(u32, usize)> = Vec::new();

    for start in 0..n as u32 {
        if color[start as usize] != WHITE {
            continue;
        }
        color[start as usize] = GRAY;
        stack.push((start, 0));
        while let Some(top) = stack.last_mut() {
            let (node, next) = (top.0 as usize, top.1);
            if next < parents[node].len() {
                let p = parents[node][next];
                match color[p as usize] {
                    WHITE => {
                        top.1 += 1;
                        color[p as usize] = GRAY;
                        stack.push((p, 0));
                    }
                    GRAY => match policy {
                        CyclePolicy::Reject => {
                            return Err(WordNetError::Integrity(format!(
                                "hypernym cycle through {} -> {}",
                                synsets[node].id, synsets[p as usize].id
                            )));
                        }
                        CyclePolicy::BreakBackEdges => {
                            parents[node].remove(next);
                            broken.push((node as u32, p));
                        }
                    },
                    _ => top.1 += 1,
                }
            } else {
                stack.pop();
                color[node] = BLACK;
                height[node] = parents[node]
                    .iter()
                    .map(|&p| height[p as usize] + 1)
                    .max()
                    .unwrap_or(0);
            }
        }
    }
    Ok((height, broken))
}
