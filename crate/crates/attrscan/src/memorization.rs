//! Contribution scores and memorized-association decisions.
//!
//! For a symbol generated by cultures `C_G`, each culture's contribution
//! score is
//!
//! ```text
//! cs = contributory docs for (culture, symbol) / docs containing symbol
//! ```
//!
//! where "contributory" means the per-document relevance verdict is Global
//! or Local. A culture is **memorized** for the symbol when its cs stands
//! out from the rest of `C_G`:
//!
//! * more than 5 generating cultures: z-score the cs values (population
//!   standard deviation) and keep cultures with `z >= 2.6`. A lone spike
//!   among `k` cultures scores `sqrt(k-1)`, so the threshold starts biting
//!   at `k = 8`.
//! * 5 or fewer: z-scores are meaningless at that size, so fall back to the
//!   argmax-cs culture, accepted only if its cs clears `1/N` (`N` = lexicon
//!   size), ties broken lexicographically.
//!
//! A flat distribution (zero standard deviation) memorizes nothing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Index, NgramQuery};
use crate::relevance::{
    self, CultureLexicon, RelevanceConfig, RelevanceMetrics, RelevanceVerdict,
};

/// Generation topic. Anything beyond the two studied topics is carried
/// through as-is.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Topic {
    Food,
    Clothing,
    Other(String),
}

impl From<String> for Topic {
    fn from(s: String) -> Self {
        match s.to_lowercase().as_str() {
            "food" => Topic::Food,
            "clothing" => Topic::Clothing,
            other => Topic::Other(other.to_string()),
        }
    }
}

impl From<Topic> for String {
    fn from(t: Topic) -> String {
        t.to_string()
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topic::Food => write!(f, "food"),
            Topic::Clothing => write!(f, "clothing"),
            Topic::Other(s) => write!(f, "{s}"),
        }
    }
}

/// One model response: the symbols extracted from a generation for a
/// (culture, topic) prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation_id: String,
    pub culture: String,
    pub topic: Topic,
    pub symbols: Vec<String>,
}

/// Loads generations from JSONL, lowercase-folding symbols.
pub fn load_generations(path: impl AsRef<Path>) -> Result<Vec<GenerationRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: GenerationRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("malformed generation record: {e}"),
            })?;
        if rec.culture.trim().is_empty() {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line: line_no,
                message: "culture is empty".into(),
            });
        }
        for s in rec.symbols.iter_mut() {
            *s = s.to_lowercase();
            if s.trim().is_empty() {
                return Err(Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("record {:?} has an empty symbol", rec.generation_id),
                });
            }
        }
        out.push(rec);
    }
    Ok(out)
}

/// Cultures that generated each (topic, symbol), across all records.
pub fn generating_cultures(
    generations: &[GenerationRecord],
) -> BTreeMap<(Topic, String), BTreeSet<String>> {
    let mut map: BTreeMap<(Topic, String), BTreeSet<String>> = BTreeMap::new();
    for rec in generations {
        for symbol in &rec.symbols {
            map.entry((rec.topic.clone(), symbol.clone()))
                .or_default()
                .insert(rec.culture.clone());
        }
    }
    map
}

/// One culture's slice of a contribution distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CultureScore {
    pub n_contributory: usize,
    /// Contributory docs over symbol docs, in [0, 1].
    pub cs: f64,
    /// cs normalized across the generating cultures (0 when all cs are 0);
    /// kept for reporting, the verdict works on raw cs.
    pub share: f64,
    /// Absent when fewer than two generating cultures or the distribution
    /// is flat.
    pub z: Option<f64>,
}

/// Contribution scores of every generating culture for one symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionDistribution {
    pub symbol: String,
    pub n_symbol_docs: u64,
    pub per_culture: BTreeMap<String, CultureScore>,
}

impl ContributionDistribution {
    /// Assembles a distribution from raw per-culture scores, filling in
    /// shares and z-scores.
    pub fn from_scores(
        symbol: impl Into<String>,
        n_symbol_docs: u64,
        scores: BTreeMap<String, (usize, f64)>,
    ) -> Self {
        let cs: Vec<f64> = scores.values().map(|&(_, cs)| cs).collect();
        let total: f64 = cs.iter().sum();
        let zs = z_scores(&cs);
        let per_culture = scores
            .into_iter()
            .enumerate()
            .map(|(i, (culture, (n_contributory, cs_i)))| {
                (
                    culture,
                    CultureScore {
                        n_contributory,
                        cs: cs_i,
                        share: if total > 0.0 { cs_i / total } else { 0.0 },
                        z: zs.as_ref().map(|z| z[i]),
                    },
                )
            })
            .collect();
        ContributionDistribution {
            symbol: symbol.into(),
            n_symbol_docs,
            per_culture,
        }
    }

    pub fn generating_cultures(&self) -> impl Iterator<Item = &str> {
        self.per_culture.keys().map(|s| s.as_str())
    }

    pub fn cs(&self, culture: &str) -> Option<f64> {
        self.per_culture.get(culture).map(|s| s.cs)
    }
}

/// Population z-scores of a vector; `None` when undefined (fewer than two
/// values, or a flat vector).
fn z_scores(values: &[f64]) -> Option<Vec<f64>> {
    if values.len() < 2 {
        return None;
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        // Exactly flat: zero variance regardless of rounding.
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    Some(values.iter().map(|v| (v - mean) / std).collect())
}

/// Counts contributory documents for (culture, symbol) against the index
/// and returns `(n_contributory, cs)`.
pub fn contribution_score(
    symbol: &str,
    culture: &str,
    index: &Index,
    lexicon: &CultureLexicon,
    cfg: &RelevanceConfig,
) -> Result<(usize, f64)> {
    cfg.validate()?;
    let symbol_q = index.query(symbol)?;
    let doc_freq = index.count(&symbol_q)?.doc_freq;
    let mut n_contributory = 0usize;
    for ord in cooccurrence_ords(index, culture, &symbol_q, lexicon)? {
        let verdict = classify_indexed(index, ord, culture, &symbol_q, lexicon, cfg)?;
        if verdict.kind.contributes() {
            n_contributory += 1;
        }
    }
    let cs = if doc_freq > 0 {
        n_contributory as f64 / doc_freq as f64
    } else {
        0.0
    };
    Ok((n_contributory, cs))
}

/// Docs containing the symbol and at least one alias of the culture.
fn cooccurrence_ords(
    index: &Index,
    culture: &str,
    symbol_q: &NgramQuery,
    lexicon: &CultureLexicon,
) -> Result<Vec<u32>> {
    let mut ords = BTreeSet::new();
    for alias in lexicon.aliases(culture)? {
        ords.extend(index.cooccurrence_ords(alias, symbol_q)?);
    }
    Ok(ords.into_iter().collect())
}

/// Relevance verdict for one indexed document, working off stored term
/// sequences instead of re-tokenizing text.
pub(crate) fn classify_indexed(
    index: &Index,
    ord: u32,
    culture: &str,
    symbol_q: &NgramQuery,
    lexicon: &CultureLexicon,
    cfg: &RelevanceConfig,
) -> Result<RelevanceVerdict> {
    let entry = index.entry(ord);
    let mut culture_occs = Vec::new();
    for alias in lexicon.aliases(culture)? {
        culture_occs.extend(index.occurrences_in(ord, alias)?);
    }
    culture_occs.sort_unstable();
    let symbol_occs = index.occurrences_in(ord, symbol_q)?;
    let d_tok = relevance::token_distance(entry.terms.len(), &culture_occs, &symbol_occs);
    let d_sent = relevance::sentence_distance(&entry.sentence_of, &culture_occs, &symbol_occs);
    let target = culture_occs.len() as u64;
    let mut others = 0u64;
    for (name, aliases) in lexicon.iter() {
        if name == culture {
            continue;
        }
        for alias in aliases {
            others += index.occurrences_in(ord, alias)?.len() as u64;
        }
    }
    let metrics = RelevanceMetrics {
        d_tok,
        d_sent,
        d_snr: relevance::signal_noise_ratio(target, others, cfg.epsilon),
    };
    Ok(RelevanceVerdict {
        kind: relevance::verdict_from_metrics(&metrics, cfg),
        metrics,
    })
}

/// Builds the full contribution distribution of a symbol over its
/// generating cultures.
pub fn build_distribution(
    symbol: &str,
    generating: &BTreeSet<String>,
    index: &Index,
    lexicon: &CultureLexicon,
    cfg: &RelevanceConfig,
) -> Result<ContributionDistribution> {
    let symbol_q = index.query(symbol)?;
    let n_symbol_docs = index.count(&symbol_q)?.doc_freq;
    let mut scores = BTreeMap::new();
    for culture in generating {
        let (n_contributory, cs) = contribution_score(symbol, culture, index, lexicon, cfg)?;
        scores.insert(culture.clone(), (n_contributory, cs));
    }
    Ok(ContributionDistribution::from_scores(
        symbol,
        n_symbol_docs,
        scores,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemorizationRule {
    ZScore,
    SmallSampleFallback,
    None,
}

impl MemorizationRule {
    pub fn as_str(self) -> &'static str {
        match self {
            MemorizationRule::ZScore => "zscore",
            MemorizationRule::SmallSampleFallback => "small_sample_fallback",
            MemorizationRule::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zscore" => Some(MemorizationRule::ZScore),
            "small_sample_fallback" => Some(MemorizationRule::SmallSampleFallback),
            "none" => Some(MemorizationRule::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorizationVerdict {
    pub symbol: String,
    pub memorized_for: BTreeSet<String>,
    pub rule: MemorizationRule,
}

/// Decision thresholds for [`classify_memorized`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemorizationConfig {
    pub z_threshold: f64,
    /// At or below this many generating cultures the argmax fallback runs.
    pub small_sample_cutoff: usize,
}

impl Default for MemorizationConfig {
    fn default() -> Self {
        MemorizationConfig {
            z_threshold: 2.6,
            small_sample_cutoff: 5,
        }
    }
}

impl MemorizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_threshold.is_finite() && self.z_threshold > 0.0) {
            return Err(Error::Config(format!(
                "z_threshold must be a positive finite number, got {}",
                self.z_threshold
            )));
        }
        Ok(())
    }
}

/// Picks the memorized culture(s) for one symbol. `n_cultures` is the full
/// lexicon size, the `N` of the `1/N` fallback bound.
pub fn classify_memorized(
    dist: &ContributionDistribution,
    cfg: &MemorizationConfig,
    n_cultures: usize,
) -> MemorizationVerdict {
    let k = dist.per_culture.len();
    let mut memorized_for = BTreeSet::new();
    let mut rule = MemorizationRule::None;
    if k > cfg.small_sample_cutoff {
        for (culture, score) in &dist.per_culture {
            if let Some(z) = score.z {
                if z >= cfg.z_threshold {
                    memorized_for.insert(culture.clone());
                }
            }
        }
        if !memorized_for.is_empty() {
            rule = MemorizationRule::ZScore;
        }
    } else if k > 0 {
        // Too few cultures for a meaningful z; take the argmax if it beats
        // the uniform floor 1/N. BTreeMap order makes ties lexicographic.
        let (top_culture, top_score) = dist
            .per_culture
            .iter()
            .max_by(|a, b| {
                a.1.cs
                    .partial_cmp(&b.1.cs)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| b.0.cmp(a.0))
            })
            .expect("non-empty map");
        if top_score.cs > 1.0 / n_cultures as f64 {
            memorized_for.insert(top_culture.clone());
            rule = MemorizationRule::SmallSampleFallback;
        }
    }
    MemorizationVerdict {
        symbol: dist.symbol.clone(),
        memorized_for,
        rule,
    }
}
