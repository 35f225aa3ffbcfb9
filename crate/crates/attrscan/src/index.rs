//! Positional inverted index with phrase verification.
//!
//! The index stores unigram postings (doc ordinal + token positions) plus the
//! full term-id sequence of every document. A multi-token n-gram query walks
//! the postings of its first token and verifies the remaining tokens against
//! the stored sequence, so "miso soup" only matches where the tokens `miso`
//! and `soup` are adjacent. Matching is at token boundaries after lowercase
//! folding: "rice" never matches inside "price", and "Tokyo" matches "tokyo".
//!
//! An index persists to a single binary file that starts with a magic tag and
//! a format version, and it remembers which tokenizer built it so queries are
//! segmented the same way.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Tokenizer, WordTokenizer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ATSCIDX\0";
const FORMAT_VERSION: u32 = 1;

/// Default cap on query length, in tokens. Symbols in practice stay short
/// ("wonton noodle soup" is four tokens; hyphenated forms a few more).
pub const DEFAULT_MAX_NGRAM_LEN: usize = 8;

/// A lowercase-folded, tokenized n-gram query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramQuery {
    surface: String,
    tokens: Vec<String>,
}

impl NgramQuery {
    /// Builds a query under the default tokenizer.
    pub fn new(surface: &str) -> Result<Self> {
        NgramQuery::with_tokenizer(surface, &WordTokenizer)
    }

    /// Builds a query under a specific tokenizer (must match the index's).
    pub fn with_tokenizer(surface: &str, tokenizer: &dyn Tokenizer) -> Result<Self> {
        let folded = surface.to_lowercase();
        let tokens: Vec<String> = tokenizer
            .tokenize(&folded)
            .iter()
            .map(|t| folded[t.byte_start..t.byte_end].to_string())
            .collect();
        if tokens.is_empty() {
            return Err(Error::EmptyQuery);
        }
        Ok(NgramQuery {
            surface: folded,
            tokens,
        })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token_len(&self) -> usize {
        self.tokens.len()
    }
}

/// Corpus-wide frequency of one n-gram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub ngram: String,
    pub doc_freq: u64,
    pub total_occurrences: u64,
}

/// Half-open token-index range of one n-gram occurrence inside a document.
pub type TokenRange = (usize, usize);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct DocEntry {
    pub doc_id: String,
    /// Term id of every token, in order.
    pub terms: Vec<u32>,
    /// Sentence index of every token, in order.
    pub sentence_of: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Index {
    tokenizer_name: String,
    max_ngram_len: usize,
    vocab: BTreeMap<String, u32>,
    /// Per term id: (doc ordinal, ascending token positions), ascending by doc.
    postings: Vec<Vec<(u32, Vec<u32>)>>,
    docs: Vec<DocEntry>,
    token_count: u64,
    #[serde(skip)]
    doc_ord: HashMap<String, u32>,
}

impl Index {
    /// Indexes documents under the default tokenizer.
    pub fn build(docs: impl IntoIterator<Item = Document>, max_ngram_len: usize) -> Result<Self> {
        Index::build_with_tokenizer(docs, max_ngram_len, &WordTokenizer)
    }

    pub fn build_with_tokenizer(
        docs: impl IntoIterator<Item = Document>,
        max_ngram_len: usize,
        tokenizer: &dyn Tokenizer,
    ) -> Result<Self> {
        if max_ngram_len == 0 {
            return Err(Error::Config("max_ngram_len must be at least 1".into()));
        }
        let mut index = Index {
            tokenizer_name: tokenizer.name().to_string(),
            max_ngram_len,
            vocab: BTreeMap::new(),
            postings: Vec::new(),
            docs: Vec::new(),
            token_count: 0,
            doc_ord: HashMap::new(),
        };
        for doc in docs {
            index.add_document(doc, tokenizer)?;
        }
        Ok(index)
    }

    fn add_document(&mut self, doc: Document, tokenizer: &dyn Tokenizer) -> Result<()> {
        let ord = self.docs.len() as u32;
        if self.doc_ord.insert(doc.doc_id.clone(), ord).is_some() {
            return Err(Error::Config(format!(
                "duplicate document id {:?}",
                doc.doc_id
            )));
        }
        let spans = tokenizer.tokenize(&doc.text);
        let sentences = crate::corpus::split_sentences(&doc.text);
        let mut terms = Vec::with_capacity(spans.len());
        let mut sentence_of = Vec::with_capacity(spans.len());
        let mut si = 0usize;
        for span in &spans {
            let term = doc.text[span.byte_start..span.byte_end].to_lowercase();
            let next_id = self.vocab.len() as u32;
            let id = *self.vocab.entry(term).or_insert(next_id);
            if id as usize == self.postings.len() {
                self.postings.push(Vec::new());
            }
            let pos = terms.len() as u32;
            match self.postings[id as usize].last_mut() {
                Some((d, positions)) if *d == ord => positions.push(pos),
                _ => self.postings[id as usize].push((ord, vec![pos])),
            }
            terms.push(id);
            while si + 1 < sentences.len() && span.byte_start >= sentences[si].byte_end {
                si += 1;
            }
            sentence_of.push(si as u32);
        }
        self.token_count += terms.len() as u64;
        self.docs.push(DocEntry {
            doc_id: doc.doc_id,
            terms,
            sentence_of,
        });
        Ok(())
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn max_ngram_len(&self) -> usize {
        self.max_ngram_len
    }

    pub fn tokenizer_name(&self) -> &str {
        &self.tokenizer_name
    }

    /// Builds a query with the tokenizer this index was built under.
    pub fn query(&self, surface: &str) -> Result<NgramQuery> {
        if self.tokenizer_name != WordTokenizer.name() {
            return Err(Error::Config(format!(
                "index was built with tokenizer {:?}; construct queries with NgramQuery::with_tokenizer",
                self.tokenizer_name
            )));
        }
        NgramQuery::new(surface)
    }

    fn check_query(&self, q: &NgramQuery) -> Result<Vec<u32>> {
        if q.token_len() > self.max_ngram_len {
            return Err(Error::QueryTooLong {
                len: q.token_len(),
                max: self.max_ngram_len,
            });
        }
        // Any token absent from the vocabulary means zero matches.
        let mut ids = Vec::with_capacity(q.tokens.len());
        for t in &q.tokens {
            match self.vocab.get(t) {
                Some(&id) => ids.push(id),
                None => return Ok(Vec::new()),
            }
        }
        Ok(ids)
    }

    /// Doc ordinals containing the n-gram, in corpus order.
    pub(crate) fn doc_ords_containing(&self, q: &NgramQuery) -> Result<Vec<u32>> {
        let ids = self.check_query(q)?;
        if ids.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for (doc, positions) in &self.postings[ids[0] as usize] {
            let entry = &self.docs[*doc as usize];
            if positions.iter().any(|&p| verify(entry, p, &ids)) {
                out.push(*doc);
            }
        }
        Ok(out)
    }

    /// Doc ids containing the n-gram, in corpus order.
    pub fn docs_containing(&self, q: &NgramQuery) -> Result<Vec<&str>> {
        Ok(self
            .doc_ords_containing(q)?
            .into_iter()
            .map(|d| self.docs[d as usize].doc_id.as_str())
            .collect())
    }

    /// Doc ids containing both n-grams, in corpus order.
    pub fn cooccurrence_docs(&self, a: &NgramQuery, b: &NgramQuery) -> Result<Vec<&str>> {
        Ok(self
            .cooccurrence_ords(a, b)?
            .into_iter()
            .map(|d| self.docs[d as usize].doc_id.as_str())
            .collect())
    }

    pub(crate) fn cooccurrence_ords(&self, a: &NgramQuery, b: &NgramQuery) -> Result<Vec<u32>> {
        let da = self.doc_ords_containing(a)?;
        let db = self.doc_ords_containing(b)?;
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < da.len() && j < db.len() {
            match da[i].cmp(&db[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(da[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(out)
    }

    /// Document frequency and total occurrence count of an n-gram.
    pub fn count(&self, q: &NgramQuery) -> Result<CountRecord> {
        let ids = self.check_query(q)?;
        let mut doc_freq = 0u64;
        let mut total = 0u64;
        if !ids.is_empty() {
            for (doc, positions) in &self.postings[ids[0] as usize] {
                let entry = &self.docs[*doc as usize];
                let n = positions.iter().filter(|&&p| verify(entry, p, &ids)).count();
                if n > 0 {
                    doc_freq += 1;
                    total += n as u64;
                }
            }
        }
        Ok(CountRecord {
            ngram: q.surface.clone(),
            doc_freq,
            total_occurrences: total,
        })
    }

    /// Token ranges of every occurrence of the n-gram in one document.
    pub(crate) fn occurrences_in(&self, ord: u32, q: &NgramQuery) -> Result<Vec<TokenRange>> {
        let ids = self.check_query(q)?;
        if ids.is_empty() {
            return Ok(Vec::new());
        }
        let postings = &self.postings[ids[0] as usize];
        let Ok(slot) = postings.binary_search_by_key(&ord, |(d, _)| *d) else {
            return Ok(Vec::new());
        };
        let entry = &self.docs[ord as usize];
        Ok(postings[slot]
            .1
            .iter()
            .filter(|&&p| verify(entry, p, &ids))
            .map(|&p| (p as usize, p as usize + ids.len()))
            .collect())
    }

    /// Token ranges of every occurrence of the n-gram in the named document.
    pub fn occurrences(&self, doc_id: &str, q: &NgramQuery) -> Result<Vec<TokenRange>> {
        match self.doc_ord.get(doc_id) {
            Some(&ord) => self.occurrences_in(ord, q),
            None => Ok(Vec::new()),
        }
    }

    pub(crate) fn entry(&self, ord: u32) -> &DocEntry {
        &self.docs[ord as usize]
    }

    pub fn doc_id(&self, ord: u32) -> &str {
        &self.docs[ord as usize].doc_id
    }

    /// Vocabulary indexed by term id.
    pub fn term_table(&self) -> Vec<&str> {
        let mut table = vec![""; self.vocab.len()];
        for (term, &id) in &self.vocab {
            table[id as usize] = term.as_str();
        }
        table
    }

    /// The lowercased token sequence of one document.
    pub fn doc_terms(&self, ord: u32) -> Vec<&str> {
        let table = self.term_table();
        self.docs[ord as usize]
            .terms
            .iter()
            .map(|&id| table[id as usize])
            .collect()
    }

    /// Writes the index to a single binary file (magic tag + format version
    /// + payload).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let payload = bincode::serialize(self).map_err(|e| Error::IndexFormat {
            path: path.to_path_buf(),
            message: format!("serialization failed: {e}"),
        })?;
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(MAGIC).map_err(|e| Error::io(path, e))?;
        file.write_all(&FORMAT_VERSION.to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
        file.write_all(&payload).map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut header = [0u8; 12];
        file.read_exact(&mut header).map_err(|_| Error::IndexFormat {
            path: path.to_path_buf(),
            message: "file too short to be an index".into(),
        })?;
        if &header[..8] != MAGIC {
            return Err(Error::IndexFormat {
                path: path.to_path_buf(),
                message: "not an index file (bad magic)".into(),
            });
        }
        let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::IndexFormat {
                path: path.to_path_buf(),
                message: format!(
                    "unsupported format version {version} (this build reads {FORMAT_VERSION})"
                ),
            });
        }
        let mut payload = Vec::new();
        file.read_to_end(&mut payload).map_err(|e| Error::io(path, e))?;
        let mut index: Index = bincode::deserialize(&payload).map_err(|e| Error::IndexFormat {
            path: path.to_path_buf(),
            message: format!("payload does not deserialize: {e}"),
        })?;
        index.doc_ord = index
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i as u32))
            .collect();
        Ok(index)
    }
}

fn verify(entry: &DocEntry, start: u32, ids: &[u32]) -> bool {
    let start = start as usize;
    if start + ids.len() > entry.terms.len() {
        return false;
    }
    entry.terms[start..start + ids.len()] == *ids
}

/// Reads externally supplied n-gram counts (CSV with header
/// `ngram,doc_freq,total_occurrences`). Keys are lowercase-folded.
pub fn import_external_counts(path: impl AsRef<Path>) -> Result<BTreeMap<String, CountRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().from_reader(file);
    let row_err = |row: usize, message: String| Error::MalformedRecord {
        path: path.to_path_buf(),
        line: row,
        message,
    };
    {
        let headers = reader
            .headers()
            .map_err(|e| row_err(1, format!("unreadable header: {e}")))?;
        let expected = ["ngram", "doc_freq", "total_occurrences"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(row_err(
                1,
                format!("expected header {expected:?}, found {headers:?}"),
            ));
        }
    }
    let mut out = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| row_err(row, format!("unreadable row: {e}")))?;
        if record.len() != 3 {
            return Err(row_err(row, format!("expected 3 fields, found {}", record.len())));
        }
        let ngram = record[0].trim().to_lowercase();
        if ngram.is_empty() {
            return Err(row_err(row, "empty ngram".into()));
        }
        let parse = |field: &str, name: &str| -> Result<u64> {
            let v: i64 = field
                .trim()
                .parse()
                .map_err(|_| row_err(row, format!("{name} is not an integer: {field:?}")))?;
            u64::try_from(v).map_err(|_| row_err(row, format!("{name} is negative: {v}")))
        };
        let doc_freq = parse(&record[1], "doc_freq")?;
        let total = parse(&record[2], "total_occurrences")?;
        if doc_freq > total {
            return Err(row_err(
                row,
                format!("doc_freq {doc_freq} exceeds total_occurrences {total}"),
            ));
        }
        if out
            .insert(
                ngram.clone(),
                CountRecord {
                    ngram: ngram.clone(),
                    doc_freq,
                    total_occurrences: total,
                },
            )
            .is_some()
        {
            return Err(row_err(row, format!("duplicate ngram {ngram:?}")));
        }
    }
    Ok(out)
}
