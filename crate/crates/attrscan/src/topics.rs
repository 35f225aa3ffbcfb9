//! Topic modeling over co-occurrence document sets.
//!
//! For a cross-culture case (symbol memorized for culture A, generated
//! for culture B), the pipeline pulls every document where A, B, and the
//! symbol co-occur with contributory relevance, chunks those documents
//! with a sliding token window, fits LDA by collapsed Gibbs sampling, and
//! ranks the top topic words by TF-IDF into a short keyword list.
//!
//! The sampler is deliberately resumable: [`LdaSampler::sweep`] runs one
//! Gibbs pass so callers can assert count conservation between sweeps.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::Path;
use std::process::{Command, Stdio};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::memorization::classify_indexed;
use crate::relevance::{CultureLexicon, RelevanceConfig};

/// Default candidate pool: how many top-probability words per topic feed
/// the TF-IDF ranking.
pub const DEFAULT_CANDIDATES_PER_TOPIC: usize = 20;

const BUILTIN_STOPWORDS: &[&str] = &[
    "a", "about", "above", "across", "after", "again", "against", "all", "along", "am",
    "an", "and", "any", "are", "as", "at", "be", "been", "before", "behind", "being",
    "below", "beneath", "beside", "between", "beyond", "both", "but", "by", "can",
    "could", "did", "do", "does", "doing", "down", "during", "each", "else", "every",
    "few", "for", "from", "further", "had", "has", "have", "having", "he", "her",
    "here", "him", "his", "i", "if", "in", "into", "is", "it", "its", "just", "later",
    "me", "more", "most", "my", "near", "no", "nor", "not", "of", "off", "on", "once",
    "one", "only", "onto", "or", "other", "our", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "them", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "up",
    "upon", "us", "very", "was", "we", "were", "what", "when", "which", "while", "who",
    "whom", "will", "with", "would", "you", "your",
];

/// Tokens excluded from topic modeling.
#[derive(Debug, Clone)]
pub struct StopwordList(BTreeSet<String>);

impl StopwordList {
    pub fn builtin() -> Self {
        StopwordList(BUILTIN_STOPWORDS.iter().map(|s| s.to_string()).collect())
    }

    /// Builtin list extended from a file, one word per line; blank lines
    /// and `#` comments ignored.
    pub fn with_extra_from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut list = Self::builtin();
        list.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase()),
        );
        Ok(list)
    }

    pub fn extend(&mut self, words: impl IntoIterator<Item = String>) {
        self.0.extend(words);
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

/// True for tokens worth modeling: at least one alphanumeric character
/// (drops punctuation tokens the tokenizer emits).
pub fn is_content_token(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// One sliding-window slice of a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub chunk_index: usize,
    /// Half-open token index range within the source document.
    pub token_span: (usize, usize),
    pub terms: Vec<String>,
}

/// Documents where both cultures and the symbol co-occur, restricted to
/// documents whose (culture_a, symbol) relevance verdict is contributory.
/// Returns index ordinals in corpus order; empty is fine.
pub fn select_cooccurrence_set(
    index: &Index,
    lexicon: &CultureLexicon,
    culture_a: &str,
    culture_b: &str,
    symbol: &str,
    cfg: &RelevanceConfig,
) -> Result<Vec<u32>> {
    let symbol_q = index.query(symbol)?;
    let mut with_symbol: BTreeSet<u32> = index.doc_ords_containing(&symbol_q)?.into_iter().collect();
    for culture in [culture_a, culture_b] {
        let mut with_culture = BTreeSet::new();
        for alias in lexicon.aliases(culture)? {
            with_culture.extend(index.doc_ords_containing(alias)?);
        }
        with_symbol = with_symbol.intersection(&with_culture).copied().collect();
    }
    let mut out = Vec::new();
    for ord in with_symbol {
        let verdict = classify_indexed(index, ord, culture_a, &symbol_q, lexicon, cfg)?;
        if verdict.kind.contributes() {
            out.push(ord);
        }
    }
    Ok(out)
}

fn check_window(window: usize, stride: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::Config("chunk window must be at least 1 token".into()));
    }
    if stride == 0 {
        return Err(Error::Config("chunk stride must be at least 1 token".into()));
    }
    if stride > window {
        return Err(Error::Config(format!(
            "chunk stride ({stride}) must not exceed the window ({window})"
        )));
    }
    Ok(())
}

/// Splits token sequences into sliding-window chunks. The last chunk of a
/// document may be short; empty documents produce no chunks.
pub fn chunk_documents<'a>(
    docs: impl IntoIterator<Item = (&'a str, &'a [String])>,
    window: usize,
    stride: usize,
) -> Result<Vec<Chunk>> {
    check_window(window, stride)?;
    let mut chunks = Vec::new();
    for (doc_id, terms) in docs {
        let mut chunk_index = 0;
        let mut start = 0;
        while start < terms.len() {
            let end = (start + window).min(terms.len());
            chunks.push(Chunk {
                doc_id: doc_id.to_string(),
                chunk_index,
                token_span: (start, end),
                terms: terms[start..end].to_vec(),
            });
            if end == terms.len() {
                break;
            }
            chunk_index += 1;
            start += stride;
        }
    }
    Ok(chunks)
}

/// Chunks indexed documents by ordinal.
pub fn chunk_indexed_docs(
    index: &Index,
    ords: &[u32],
    window: usize,
    stride: usize,
) -> Result<Vec<Chunk>> {
    check_window(window, stride)?;
    let mut owned: Vec<(String, Vec<String>)> = Vec::with_capacity(ords.len());
    for &ord in ords {
        let terms = index.doc_terms(ord).iter().map(|s| s.to_string()).collect();
        owned.push((index.doc_id(ord).to_string(), terms));
    }
    chunk_documents(
        owned.iter().map(|(id, t)| (id.as_str(), t.as_slice())),
        window,
        stride,
    )
}

/// LDA hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams::for_k(5)
    }
}

impl LdaParams {
    /// Standard settings for a topic count: alpha = 50/K, beta = 0.01,
    /// 500 sweeps.
    pub fn for_k(k: usize) -> Self {
        LdaParams {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 500,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("lda topic count must be at least 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!(
                "lda alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Config(format!(
                "lda beta must be positive, got {}",
                self.beta
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("lda iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fitted topic model: counts plus vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub vocab: Vec<String>,
    pub topic_word_counts: Vec<Vec<u64>>,
    pub doc_topic_counts: Vec<Vec<u64>>,
}

impl LdaModel {
    /// Smoothed word distribution of one topic; sums to 1.
    pub fn topic_word_dist(&self, topic: usize) -> Vec<f64> {
        let counts = &self.topic_word_counts[topic];
        let total: u64 = counts.iter().sum();
        let v = self.vocab.len() as f64;
        let denom = total as f64 + v * self.beta;
        counts
            .iter()
            .map(|&c| (c as f64 + self.beta) / denom)
            .collect()
    }

    /// Top `m` words of a topic by probability, ties lexicographic.
    pub fn top_words(&self, topic: usize, m: usize) -> Vec<(&str, f64)> {
        let dist = self.topic_word_dist(topic);
        let mut order: Vec<usize> = (0..self.vocab.len()).collect();
        order.sort_by(|&a, &b| {
            dist[b]
                .partial_cmp(&dist[a])
                .expect("probabilities are finite")
                .then_with(|| self.vocab[a].cmp(&self.vocab[b]))
        });
        order
            .into_iter()
            .take(m)
            .map(|i| (self.vocab[i].as_str(), dist[i]))
            .collect()
    }

    /// Total token assignments across all topics.
    pub fn total_assignments(&self) -> u64 {
        self.topic_word_counts.iter().flatten().sum()
    }
}

/// Collapsed Gibbs sampler, one sweep at a time.
pub struct LdaSampler {
    params: LdaParams,
    vocab: Vec<String>,
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<u32>>,
    topic_word_counts: Vec<Vec<u64>>,
    topic_totals: Vec<u64>,
    doc_topic_counts: Vec<Vec<u64>>,
    rng: ChaCha8Rng,
}

impl LdaSampler {
    /// Builds the vocabulary (stopwords and punctuation tokens removed),
    /// assigns every token a random initial topic, and seeds the RNG.
    pub fn new(
        chunks: &[Chunk],
        params: &LdaParams,
        stopwords: &StopwordList,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let mut vocab_ids: BTreeMap<&str, u32> = BTreeMap::new();
        for chunk in chunks {
            for term in &chunk.terms {
                if is_content_token(term) && !stopwords.contains(term) {
                    let next = vocab_ids.len() as u32;
                    vocab_ids.entry(term.as_str()).or_insert(next);
                }
            }
        }
        if vocab_ids.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut vocab = vec![String::new(); vocab_ids.len()];
        for (term, &id) in &vocab_ids {
            vocab[id as usize] = term.to_string();
        }
        let docs: Vec<Vec<u32>> = chunks
            .iter()
            .map(|c| {
                c.terms
                    .iter()
                    .filter_map(|t| vocab_ids.get(t.as_str()).copied())
                    .collect()
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = params.k;
        let mut topic_word_counts = vec![vec![0u64; vocab.len()]; k];
        let mut topic_totals = vec![0u64; k];
        let mut doc_topic_counts = vec![vec![0u64; k]; docs.len()];
        let mut assignments = Vec::with_capacity(docs.len());
        for (d, tokens) in docs.iter().enumerate() {
            let mut doc_assign = Vec::with_capacity(tokens.len());
            for &w in tokens {
                let z = rng.gen_range(0..k) as u32;
                topic_word_counts[z as usize][w as usize] += 1;
                topic_totals[z as usize] += 1;
                doc_topic_counts[d][z as usize] += 1;
                doc_assign.push(z);
            }
            assignments.push(doc_assign);
        }
        Ok(LdaSampler {
            params: *params,
            vocab,
            docs,
            assignments,
            topic_word_counts,
            topic_totals,
            doc_topic_counts,
            rng,
        })
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    /// Sum of all topic assignments; constant across sweeps.
    pub fn total_assignments(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    /// One full Gibbs pass: resample the topic of every token.
    pub fn sweep(&mut self) {
        let k = self.params.k;
        let v_beta = self.vocab.len() as f64 * self.params.beta;
        let mut weights = vec![0.0f64; k];
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i] as usize;
                let old = self.assignments[d][i] as usize;
                self.topic_word_counts[old][w] -= 1;
                self.topic_totals[old] -= 1;
                self.doc_topic_counts[d][old] -= 1;
                let mut total = 0.0;
                for (t, weight) in weights.iter_mut().enumerate() {
                    let p = (self.doc_topic_counts[d][t] as f64 + self.params.alpha)
                        * (self.topic_word_counts[t][w] as f64 + self.params.beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    total += p;
                    *weight = total;
                }
                let draw = self.rng.gen::<f64>() * total;
                let new = weights.partition_point(|&cum| cum < draw).min(k - 1);
                self.assignments[d][i] = new as u32;
                self.topic_word_counts[new][w] += 1;
                self.topic_totals[new] += 1;
                self.doc_topic_counts[d][new] += 1;
            }
        }
    }

    pub fn into_model(self) -> LdaModel {
        LdaModel {
            k: self.params.k,
            alpha: self.params.alpha,
            beta: self.params.beta,
            vocab: self.vocab,
            topic_word_counts: self.topic_word_counts,
            doc_topic_counts: self.doc_topic_counts,
        }
    }
}

/// Fits LDA end to end: `params.iterations` Gibbs sweeps from a seeded
/// RNG. Deterministic for a fixed (chunks, params, seed).
pub fn fit_lda(
    chunks: &[Chunk],
    params: &LdaParams,
    stopwords: &StopwordList,
    seed: u64,
) -> Result<LdaModel> {
    let mut sampler = LdaSampler::new(chunks, params, stopwords, seed)?;
    for _ in 0..params.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

/// A ranked topic keyword.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub term: String,
    pub weight: f64,
}

/// Keyword list for one cross-culture case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordReport {
    pub symbol: String,
    pub culture_a: String,
    pub culture_b: String,
    pub keywords: Vec<Keyword>,
}

/// Ranks the top topic words by TF-IDF over the chunk collection and
/// returns the `k` best distinct terms. The IDF is smoothed as
/// `ln((1+n)/(1+df)) + 1` so terms present in every chunk stay rankable.
pub fn extract_keywords(
    model: &LdaModel,
    chunks: &[Chunk],
    k: usize,
    candidates_per_topic: usize,
) -> Vec<Keyword> {
    let vocab_ids: BTreeMap<&str, usize> = model
        .vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut candidates: BTreeSet<usize> = BTreeSet::new();
    for topic in 0..model.k {
        for (term, _) in model.top_words(topic, candidates_per_topic) {
            candidates.insert(vocab_ids[term]);
        }
    }
    let mut tf = vec![0u64; model.vocab.len()];
    for counts in &model.topic_word_counts {
        for (w, &c) in counts.iter().enumerate() {
            tf[w] += c;
        }
    }
    let mut df = vec![0u64; model.vocab.len()];
    for chunk in chunks {
        let present: BTreeSet<usize> = chunk
            .terms
            .iter()
            .filter_map(|t| vocab_ids.get(t.as_str()).copied())
            .collect();
        for w in present {
            df[w] += 1;
        }
    }
    let n = chunks.len() as f64;
    let mut scored: Vec<(usize, f64)> = candidates
        .into_iter()
        .map(|w| {
            let idf = ((1.0 + n) / (1.0 + df[w] as f64)).ln() + 1.0;
            (w, tf[w] as f64 * idf)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then_with(|| model.vocab[a.0].cmp(&model.vocab[b.0]))
    });
    scored
        .into_iter()
        .take(k)
        .map(|(w, weight)| Keyword {
            term: model.vocab[w].clone(),
            weight,
        })
        .collect()
}

/// Optional shell-out that turns raw topic-word lists into a prose
/// interpretation. The command runs under `sh -c`, receives a JSON array
/// of per-topic word lists on stdin, and its stdout is stored verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpreterHook {
    pub command: String,
}

pub fn interpret_topics(
    hook: &InterpreterHook,
    model: &LdaModel,
    words_per_topic: usize,
) -> Result<String> {
    let topics: Vec<Vec<serde_json::Value>> = (0..model.k)
        .map(|t| {
            model
                .top_words(t, words_per_topic)
                .into_iter()
                .map(|(term, p)| serde_json::json!({"term": term, "probability": p}))
                .collect()
        })
        .collect();
    let input =
        serde_json::to_string(&topics).map_err(|e| Error::Hook(format!("encoding input: {e}")))?;
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&hook.command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Hook(format!("spawning {:?}: {e}", hook.command)))?;
    child
        .stdin
        .as_mut()
        .expect("stdin piped")
        .write_all(input.as_bytes())
        .map_err(|e| Error::Hook(format!("writing to {:?}: {e}", hook.command)))?;
    let output = child
        .wait_with_output()
        .map_err(|e| Error::Hook(format!("waiting for {:?}: {e}", hook.command)))?;
    if !output.status.success() {
        return Err(Error::Hook(format!(
            "{:?} exited with {}: {}",
            hook.command,
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    String::from_utf8(output.stdout)
        .map_err(|e| Error::Hook(format!("{:?} produced non-UTF-8 output: {e}", hook.command)))
}
