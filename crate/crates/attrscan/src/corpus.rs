//! Document ingestion and text segmentation.
//!
//! Documents arrive as JSONL (one object per line with required `id` and
//! `text` keys and an optional `source`). Segmentation produces byte-offset
//! spans so every downstream metric can be traced back to the exact place in
//! the original text:
//!
//! * [`tokenize`] splits on Unicode whitespace and isolates punctuation into
//!   single-character tokens, so "t-shirt" becomes `[t][-][shirt]` and a
//!   query for it matches exactly those three tokens.
//! * [`split_sentences`] cuts at `.`, `!`, `?` and newline, folding runs of
//!   consecutive delimiters into the preceding sentence ("A!! B" is two
//!   sentences, not three).
//!
//! All matching further down the pipeline is case-insensitive; a
//! [`PreparedDoc`] caches the lowercase-folded term per token along with the
//! sentence each token falls in.

use std::fs::File;
use std::io::{BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One corpus document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub source: Option<String>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            text: text.into(),
            source: None,
        }
    }
}

/// Half-open byte range of one token within its document text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub token_index: usize,
    pub byte_start: usize,
    pub byte_end: usize,
}

/// Half-open byte range of one sentence within its document text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub sentence_index: usize,
    pub byte_start: usize,
    pub byte_end: usize,
}

/// Pluggable tokenization strategy.
///
/// Implementations must emit non-empty, non-overlapping spans in increasing
/// byte order. The index records the tokenizer name so a persisted index is
/// only queried with the segmentation it was built under.
pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &'static str;
    fn tokenize(&self, text: &str) -> Vec<TokenSpan>;
}

/// Default tokenizer: alphanumeric runs are words, every other
/// non-whitespace character is its own single-character token.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordTokenizer;

impl Tokenizer for WordTokenizer {
    fn name(&self) -> &'static str {
        "word-v1"
    }

    fn tokenize(&self, text: &str) -> Vec<TokenSpan> {
        let mut spans: Vec<TokenSpan> = Vec::new();
        let mut word_start: Option<usize> = None;
        let push = |start: usize, end: usize, spans: &mut Vec<TokenSpan>| {
            spans.push(TokenSpan {
                token_index: spans.len(),
                byte_start: start,
                byte_end: end,
            });
        };
        for (i, ch) in text.char_indices() {
            if ch.is_alphanumeric() {
                if word_start.is_none() {
                    word_start = Some(i);
                }
            } else {
                if let Some(start) = word_start.take() {
                    push(start, i, &mut spans);
                }
                if !ch.is_whitespace() {
                    push(i, i + ch.len_utf8(), &mut spans);
                }
            }
        }
        if let Some(start) = word_start {
            push(start, text.len(), &mut spans);
        }
        spans
    }
}

/// Tokenizes with the default [`WordTokenizer`].
pub fn tokenize(text: &str) -> Vec<TokenSpan> {
    WordTokenizer.tokenize(text)
}

const SENTENCE_DELIMITERS: [char; 4] = ['.', '!', '?', '\n'];

fn is_sentence_delimiter(ch: char) -> bool {
    SENTENCE_DELIMITERS.contains(&ch)
}

/// Splits text into sentence spans.
///
/// A sentence ends at a delimiter (`.` `!` `?` or newline); a run of
/// adjacent delimiters extends the same sentence instead of opening empty
/// ones. Spans cover the trimmed extent of each sentence, so together they
/// partition the non-whitespace bytes of the text.
pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    let mut out: Vec<SentenceSpan> = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0usize;
    let mut in_run = false;
    let mut run_broken = false;
    let emit = |start: &mut Option<usize>, end: usize, out: &mut Vec<SentenceSpan>| {
        if let Some(s) = start.take() {
            out.push(SentenceSpan {
                sentence_index: out.len(),
                byte_start: s,
                byte_end: end,
            });
        }
    };
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            // Newline terminates the sentence; other whitespace merely ends
            // any pending delimiter run.
            if in_run || (ch == '\n' && start.is_some()) {
                in_run = true;
                run_broken = true;
            }
            continue;
        }
        let delim = is_sentence_delimiter(ch);
        if in_run && (run_broken || !delim) {
            emit(&mut start, end, &mut out);
            in_run = false;
            run_broken = false;
        }
        if start.is_none() {
            start = Some(i);
        }
        end = i + ch.len_utf8();
        if delim {
            in_run = true;
        }
    }
    emit(&mut start, end, &mut out);
    out
}

/// A document segmented under a tokenizer, with per-token lowercase terms
/// and sentence assignments cached for matching.
#[derive(Debug, Clone)]
pub struct PreparedDoc {
    pub doc: Document,
    pub tokens: Vec<TokenSpan>,
    pub sentences: Vec<SentenceSpan>,
    terms: Vec<String>,
    sentence_of: Vec<u32>,
}

impl PreparedDoc {
    pub fn new(doc: Document, tokenizer: &dyn Tokenizer) -> Self {
        let tokens = tokenizer.tokenize(&doc.text);
        let sentences = split_sentences(&doc.text);
        let terms = tokens
            .iter()
            .map(|t| doc.text[t.byte_start..t.byte_end].to_lowercase())
            .collect();
        let mut sentence_of = Vec::with_capacity(tokens.len());
        let mut si = 0usize;
        for t in &tokens {
            while si + 1 < sentences.len() && t.byte_start >= sentences[si].byte_end {
                si += 1;
            }
            sentence_of.push(si as u32);
        }
        PreparedDoc {
            doc,
            tokens,
            sentences,
            terms,
            sentence_of,
        }
    }

    pub fn with_default_tokenizer(doc: Document) -> Self {
        PreparedDoc::new(doc, &WordTokenizer)
    }

    /// Lowercase-folded surface of each token, in order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Index of the sentence containing the given token.
    pub fn sentence_of(&self, token_index: usize) -> usize {
        self.sentence_of[token_index] as usize
    }

    pub fn sentence_map(&self) -> &[u32] {
        &self.sentence_of
    }
}

#[derive(Deserialize)]
struct RawDoc {
    id: String,
    text: String,
    #[serde(default)]
    source: Option<String>,
}

/// Streaming JSONL corpus reader.
///
/// Yields one [`Document`] per non-blank line, failing fast on malformed
/// JSON (with the line number), blank or missing fields, and duplicate ids.
pub struct CorpusReader {
    path: PathBuf,
    lines: Lines<BufReader<File>>,
    line_no: usize,
    seen: std::collections::HashSet<String>,
}

impl CorpusReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(CorpusReader {
            path,
            lines: BufReader::new(file).lines(),
            line_no: 0,
            seen: std::collections::HashSet::new(),
        })
    }

    fn parse(&mut self, line: &str) -> Result<Option<Document>> {
        if line.trim().is_empty() {
            return Ok(None);
        }
        let raw: RawDoc =
            serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                path: self.path.clone(),
                line: self.line_no,
                message: format!("malformed JSON: {e}"),
            })?;
        if raw.id.trim().is_empty() {
            return Err(Error::MalformedRecord {
                path: self.path.clone(),
                line: self.line_no,
                message: "document id is empty".into(),
            });
        }
        if raw.text.trim().is_empty() {
            return Err(Error::MalformedRecord {
                path: self.path.clone(),
                line: self.line_no,
                message: format!("document {:?} has empty text", raw.id),
            });
        }
        if !self.seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateDocId {
                path: self.path.clone(),
                line: self.line_no,
                id: raw.id,
            });
        }
        Ok(Some(Document {
            doc_id: raw.id,
            text: raw.text,
            source: raw.source,
        }))
    }
}

impl Iterator for CorpusReader {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line_no += 1;
            match self.lines.next()? {
                Err(e) => return Some(Err(Error::io(&self.path, e))),
                Ok(line) => match self.parse(&line) {
                    Err(e) => return Some(Err(e)),
                    Ok(Some(doc)) => return Some(Ok(doc)),
                    Ok(None) => continue,
                },
            }
        }
    }
}

/// Reads a whole JSONL corpus into memory.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    CorpusReader::open(path)?.collect()
}
