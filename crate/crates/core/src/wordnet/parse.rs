//! Line parsers for the WordNet `data.*` and `index.*` text databases.
//!
//! Both files share one convention: lines starting with two spaces are the
//! license header, every other line is a space-delimited record.

use super::{PartOfSpeech, WordNetError};

/// One pointer field of a data line that we keep: a hypernym edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct HypernymPointer {
    pub offset: u32,
    pub pos: PartOfSpeech,
    pub instance: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DataRecord {
    pub offset: u32,
    pub pos: PartOfSpeech,
    pub lemmas: Vec<String>,
    pub hypernyms: Vec<HypernymPointer>,
    pub gloss: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IndexRecord {
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub offsets: Vec<u32>,
}

pub(crate) fn is_header_line(line: &str) -> bool {
    line.starts_with("  ")
}

/// Pulls the release token out of a header line such as
/// `  14 WordNet 3.0 Copyright 2006 by Princeton University.`
pub(crate) fn release_from_header(line: &str) -> Option<String> {
    let mut tokens = line.split_whitespace();
    while let Some(tok) = tokens.next() {
        if tok == "WordNet" {
            return tokens
                .next()
                .map(|t| t.trim_end_matches(['.', ',']).to_string());
        }
    }
    None
}

struct Fields<'a> {
    iter: std::str::SplitWhitespace<'a>,
    file: &'a str,
    line: usize,
}

impl<'a> Fields<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, WordNetError> {
        self.iter.next().ok_or_else(|| WordNetError::Parse {
            file: self.file.to_string(),
            line: self.line,
            message: format!("missing field `{what}`"),
        })
    }

    fn err(&self, message: String) -> WordNetError {
        WordNetError::Parse {
            file: self.file.to_string(),
            line: self.line,
            message,
        }
    }

    fn dec<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, WordNetError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(format!("field `{what}` is not a decimal number: {tok:?}")))
    }

    fn hex(&mut self, what: &str) -> Result<u32, WordNetError> {
        let tok = self.next(what)?;
        u32::from_str_radix(tok, 16)
            .map_err(|_| self.err(format!("field `{what}` is not a hex number: {tok:?}")))
    }
}

/// Adjective lemmas may carry a syntactic marker: `(a)`, `(p)` or `(ip)`.
fn strip_adjective_marker(word: &str) -> &str {
    for marker in ["(a)", "(p)", "(ip)"] {
        if let Some(stripped) = word.strip_suffix(marker) {
            return stripped;
        }
    }
    word
}

pub(crate) fn parse_data_line(
    text: &str,
    file: &str,
    line: usize,
    file_pos: PartOfSpeech,
) -> Result<DataRecord, WordNetError> {
    let (fields_part, gloss) = match text.split_once(" | ") {
        Some((f, g)) => (f, g.trim_end().to_string()),
        None => (text.trim_end().trim_end_matches('|'), String::new()),
    };
    let mut f = Fields {
        iter: fields_part.split_whitespace(),
        file,
        line,
    };

    let offset: u32 = f.dec("synset_offset")?;
    let _lex_filenum: u32 = f.dec("lex_filenum")?;
    let ss_type = f.next("ss_type")?;
    let pos = PartOfSpeech::from_tag(ss_type)
        .ok_or_else(|| f.err(format!("unknown ss_type {ss_type:?}")))?;
    if pos != file_pos {
        return Err(f.err(format!(
            "ss_type {ss_type:?} does not belong in a {} data file",
            file_pos
        )));
    }

    let word_count = f.hex("w_cnt")?;
    if word_count == 0 {
        return Err(f.err("synset has no lemmas".to_string()));
    }
    let mut lemmas = Vec::with_capacity(word_count as usize);
    for _ in 0..word_count {
        let word = f.next("word")?;
        f.hex("lex_id")?;
        lemmas.push(strip_adjective_marker(word).to_string());
    }

    let pointer_count: u32 = f.dec("p_cnt")?;
    let mut hypernyms = Vec::new();
    for _ in 0..pointer_count {
        let symbol = f.next("pointer_symbol")?;
        let target: u32 = f.dec("pointer offset")?;
        let target_tag = f.next("pointer pos")?;
        let target_pos = PartOfSpeech::from_tag(target_tag)
            .ok_or_else(|| f.err(format!("unknown pointer pos {target_tag:?}")))?;
        let source_target = f.next("source/target")?;
        if source_target.len() != 4 || u16::from_str_radix(source_target, 16).is_err() {
            return Err(f.err(format!("bad source/target field {source_target:?}")));
        }
        let instance = match symbol {
            "@" => false,
            "@i" => true,
            _ => continue,
        };
        hypernyms.push(HypernymPointer {
            offset: target,
            pos: target_pos,
            instance,
        });
    }
    // Verb frames follow the pointers; nothing downstream needs them.

    Ok(DataRecord {
        offset,
        pos,
        lemmas,
        hypernyms,
        gloss,
    })
}

pub(crate) fn parse_index_line(
    text: &str,
    file: &str,
    line: usize,
) -> Result<IndexRecord, WordNetError> {
    let mut f = Fields {
        iter: text.split_whitespace(),
        file,
        line,
    };
    let lemma = f.next("lemma")?.to_string();
    let tag = f.next("pos")?;
    let pos = PartOfSpeech::from_tag(tag).ok_or_else(|| f.err(format!("unknown pos {tag:?}")))?;
    let synset_count: usize = f.dec("synset_cnt")?;
    let pointer_count: usize = f.dec("p_cnt")?;
    for _ in 0..pointer_count {
        f.next("ptr_symbol")?;
    }
    let _sense_count: usize = f.dec("sense_cnt")?;
    let _tagsense_count: usize = f.dec("tagsense_cnt")?;
    let mut offsets = Vec::with_capacity(synset_count);
    for _ in 0..synset_count {
        offsets.push(f.dec("synset_offset")?);
    }
    if let Some(extra) = f.iter.next() {
        return Err(f.err(format!("unexpected trailing field {extra:?}")));
    }
    Ok(IndexRecord {
        lemma,
        pos,
        offsets,
    })
}
