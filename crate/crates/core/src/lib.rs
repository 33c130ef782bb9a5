//! Comparative analysis of stigmatizing-language lexicons.
//!
//! * [`wordnet`]: WordNet database reader and hypernym taxonomy.
//! * [`similarity`]: Leacock-Chodorow similarity from synsets up to whole
//!   lexicon pairs.
//! * [`lexicon`]: lexicon ingestion, normalization and majority-vote
//!   consensus.
//! * [`sentiment`]: per-lexicon sentiment composition.
//! * [`scanner`]: word-boundary-aware term flagging in clinical notes.
//! * [`report`]: the pipeline stages and their CSV/JSON emitters.

#![forbid(unsafe_code)]

pub mod lexicon;
pub mod report;
pub mod scanner;
pub mod sentiment;
pub mod similarity;
pub mod wordnet;

pub use lexicon::{
    build_master_list, consensus_analysis, ingest_lexicon, normalize_term, ConsensusReport,
    Lexicon, LexiconManifest, Term,
};
pub use scanner::{
    compile_matcher, scan_corpus, scan_document, Annotation, Document, Matcher, ScanReport,
};
pub use sentiment::{
    classify_term, load_sentiment_lexicon, sentiment_report, Sentiment, SentimentLexicon,
    SentimentReport,
};
pub use similarity::{
    lch_similarity, lexicon_pair_similarity, similarity_matrix, term_similarity, LexiconPairScore,
    MissingPolicy, SimilarityConfig, SimilarityMatrix, SynsetAggregation,
};
pub use wordnet::{load_wordnet, PartOfSpeech, Synset, SynsetId, TaxonomyGraph};
