//! Per-document contribution rules.
//!
//! A document that merely contains both a culture alias and a symbol is not
//! automatically evidence for the association. Three metrics decide whether
//! it contributes:
//!
//! * `d_tok` — minimum token distance between any culture-alias occurrence
//!   and any symbol occurrence, computed with a marking walk: alias tokens
//!   are marked 1, symbol tokens 2 (symbol wins on overlap), and a single
//!   pass records the smallest index gap between opposite marks. Overlapping
//!   occurrences count as distance 0.
//! * `d_sent` — minimum sentence-index distance between occurrences (0 when
//!   they share a sentence).
//! * `d_snr` — `log2(target / (others + epsilon))` where `target` counts the
//!   culture's alias occurrences in the document and `others` counts alias
//!   occurrences of every other culture in the lexicon. A document that
//!   never mentions the culture gets `-inf`.
//!
//! A document is **Global** when the symbol sits within a model context
//! window of the culture (`d_tok <= max_seq_len`) and the culture dominates
//! (`d_snr >= 0`); **Local** when they share a close sentence neighborhood
//! (`d_sent <= 2`) and the culture is present but outnumbered no worse than
//! 2:1 (`-1 <= d_snr < 0`); otherwise **NotContributory**.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::PreparedDoc;
use crate::error::{Error, Result};
use crate::index::{NgramQuery, TokenRange};

/// Maps each culture name to its alias n-grams ("Japan" -> japan, japanese).
///
/// Lexicon size is the `N` used for the diffuse threshold and the
/// small-sample contribution bound.
#[derive(Debug, Clone)]
pub struct CultureLexicon {
    cultures: BTreeMap<String, Vec<NgramQuery>>,
}

impl CultureLexicon {
    pub fn from_map(map: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut cultures = BTreeMap::new();
        let mut seen_alias: BTreeMap<String, String> = BTreeMap::new();
        for (name, aliases) in map {
            if name.trim().is_empty() {
                return Err(Error::Config("culture name is empty".into()));
            }
            if aliases.is_empty() {
                return Err(Error::Config(format!(
                    "culture {name:?} has no aliases"
                )));
            }
            let mut queries = Vec::with_capacity(aliases.len());
            for alias in aliases {
                let q = NgramQuery::new(&alias)?;
                if let Some(owner) =
                    seen_alias.insert(q.surface().to_string(), name.clone())
                {
                    return Err(Error::Config(format!(
                        "alias {:?} appears under both {owner:?} and {name:?}",
                        q.surface()
                    )));
                }
                queries.push(q);
            }
            cultures.insert(name, queries);
        }
        if cultures.is_empty() {
            return Err(Error::Config("culture lexicon is empty".into()));
        }
        Ok(CultureLexicon { cultures })
    }

    /// Loads a JSON object mapping culture name to an array of alias strings.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: BTreeMap<String, Vec<String>> =
            serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: e.line(),
                message: format!("malformed culture lexicon: {e}"),
            })?;
        CultureLexicon::from_map(map)
    }

    /// Number of cultures (the `N` in thresholds).
    pub fn len(&self) -> usize {
        self.cultures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cultures.is_empty()
    }

    pub fn contains(&self, culture: &str) -> bool {
        self.cultures.contains_key(culture)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.cultures.keys().map(|s| s.as_str())
    }

    pub fn aliases(&self, culture: &str) -> Result<&[NgramQuery]> {
        self.cultures
            .get(culture)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownCulture {
                culture: culture.to_string(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[NgramQuery])> {
        self.cultures.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Drops the named cultures (for leave-one-out style reruns). Errors if
    /// a name is unknown or nothing would remain.
    pub fn without(mut self, excluded: &[String]) -> Result<Self> {
        for name in excluded {
            if self.cultures.remove(name).is_none() {
                return Err(Error::UnknownCulture {
                    culture: name.clone(),
                });
            }
        }
        if self.cultures.is_empty() {
            return Err(Error::Config(
                "excluding those cultures leaves an empty lexicon".into(),
            ));
        }
        Ok(self)
    }
}

/// Thresholds for the contribution rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceConfig {
    /// Token-distance bound for Global relevance; defaults to a typical
    /// pretraining context window.
    pub max_seq_len: usize,
    /// Sentence-distance bound for Local relevance.
    pub sent_threshold: usize,
    /// Lower edge of the Local signal-to-noise band (upper edge is 0).
    pub snr_low: f64,
    /// Smoothing constant in the signal-to-noise denominator.
    pub epsilon: f64,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        RelevanceConfig {
            max_seq_len: 2048,
            sent_threshold: 2,
            snr_low: -1.0,
            epsilon: 1.0,
        }
    }
}

impl RelevanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        if !(self.snr_low.is_finite() && self.snr_low < 0.0) {
            return Err(Error::Config(format!(
                "snr_low must be negative, got {}",
                self.snr_low
            )));
        }
        if self.max_seq_len == 0 {
            return Err(Error::Config("max_seq_len must be at least 1".into()));
        }
        Ok(())
    }
}

/// The three metrics for one (document, culture, symbol) triple. Distances
/// are absent when either n-gram does not occur in the document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceMetrics {
    pub d_tok: Option<usize>,
    pub d_sent: Option<usize>,
    pub d_snr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Global,
    Local,
    NotContributory,
}

impl VerdictKind {
    pub fn contributes(self) -> bool {
        matches!(self, VerdictKind::Global | VerdictKind::Local)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceVerdict {
    pub kind: VerdictKind,
    pub metrics: RelevanceMetrics,
}

/// All occurrences of the n-gram in the document, as token ranges.
pub fn find_occurrences(doc: &PreparedDoc, q: &NgramQuery) -> Vec<TokenRange> {
    occurrences_in_terms(doc.terms(), q)
}

pub(crate) fn occurrences_in_terms(terms: &[String], q: &NgramQuery) -> Vec<TokenRange> {
    let k = q.token_len();
    if terms.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for start in 0..=terms.len() - k {
        if terms[start..start + k]
            .iter()
            .zip(q.tokens())
            .all(|(a, b)| a == b)
        {
            out.push((start, start + k));
        }
    }
    out
}

/// Minimum token distance between two occurrence sets via the marking walk.
///
/// Returns `None` when either set is empty, `Some(0)` when occurrences
/// overlap, otherwise the smallest index gap between a token of one set and
/// a token of the other.
pub fn token_distance(
    token_count: usize,
    culture_occs: &[TokenRange],
    symbol_occs: &[TokenRange],
) -> Option<usize> {
    if culture_occs.is_empty() || symbol_occs.is_empty() {
        return None;
    }
    let mut marks = vec![0u8; token_count];
    for &(s, e) in culture_occs {
        for m in marks[s..e].iter_mut() {
            *m = 1;
        }
    }
    for &(s, e) in symbol_occs {
        for m in marks[s..e].iter_mut() {
            if *m == 1 {
                // A token inside both occurrence sets: the spans overlap.
                return Some(0);
            }
            *m = 2;
        }
    }
    let mut last_culture: Option<usize> = None;
    let mut last_symbol: Option<usize> = None;
    let mut best: Option<usize> = None;
    for (i, &m) in marks.iter().enumerate() {
        match m {
            1 => {
                if let Some(j) = last_symbol {
                    best = Some(best.map_or(i - j, |b| b.min(i - j)));
                }
                last_culture = Some(i);
            }
            2 => {
                if let Some(j) = last_culture {
                    best = Some(best.map_or(i - j, |b| b.min(i - j)));
                }
                last_symbol = Some(i);
            }
            _ => {}
        }
    }
    best
}

/// Minimum sentence-index distance between two occurrence sets (an
/// occurrence sits in the sentence of its first token).
pub fn sentence_distance(
    sentence_of: &[u32],
    culture_occs: &[TokenRange],
    symbol_occs: &[TokenRange],
) -> Option<usize> {
    if culture_occs.is_empty() || symbol_occs.is_empty() {
        return None;
    }
    let mut best = u32::MAX;
    for &(cs, _) in culture_occs {
        let a = sentence_of[cs];
        for &(ss, _) in symbol_occs {
            let b = sentence_of[ss];
            best = best.min(a.abs_diff(b));
        }
    }
    Some(best as usize)
}

/// `log2(target / (others + epsilon))`; `-inf` when the culture is absent.
pub fn signal_noise_ratio(target: u64, others: u64, epsilon: f64) -> f64 {
    if target == 0 {
        return f64::NEG_INFINITY;
    }
    (target as f64 / (others as f64 + epsilon)).log2()
}

fn alias_occurrence_count(doc: &PreparedDoc, aliases: &[NgramQuery]) -> u64 {
    aliases
        .iter()
        .map(|a| occurrences_in_terms(doc.terms(), a).len() as u64)
        .sum()
}

/// Minimum token distance from any alias of the culture to the symbol.
pub fn min_token_distance(
    doc: &PreparedDoc,
    culture: &str,
    symbol: &NgramQuery,
    lexicon: &CultureLexicon,
) -> Result<Option<usize>> {
    let culture_occs = culture_occurrences(doc, culture, lexicon)?;
    let symbol_occs = find_occurrences(doc, symbol);
    Ok(token_distance(doc.tokens.len(), &culture_occs, &symbol_occs))
}

/// Minimum sentence distance from any alias of the culture to the symbol.
pub fn min_sentence_distance(
    doc: &PreparedDoc,
    culture: &str,
    symbol: &NgramQuery,
    lexicon: &CultureLexicon,
) -> Result<Option<usize>> {
    let culture_occs = culture_occurrences(doc, culture, lexicon)?;
    let symbol_occs = find_occurrences(doc, symbol);
    Ok(sentence_distance(doc.sentence_map(), &culture_occs, &symbol_occs))
}

/// Signal-to-noise ratio of the culture's mentions against all other
/// cultures in the lexicon.
pub fn d_snr(
    doc: &PreparedDoc,
    culture: &str,
    lexicon: &CultureLexicon,
    epsilon: f64,
) -> Result<f64> {
    let target = alias_occurrence_count(doc, lexicon.aliases(culture)?);
    let mut others = 0u64;
    for (name, aliases) in lexicon.iter() {
        if name != culture {
            others += alias_occurrence_count(doc, aliases);
        }
    }
    Ok(signal_noise_ratio(target, others, epsilon))
}

fn culture_occurrences(
    doc: &PreparedDoc,
    culture: &str,
    lexicon: &CultureLexicon,
) -> Result<Vec<TokenRange>> {
    let mut occs = Vec::new();
    for alias in lexicon.aliases(culture)? {
        occs.extend(occurrences_in_terms(doc.terms(), alias));
    }
    occs.sort_unstable();
    Ok(occs)
}

/// Computes all three metrics for one document.
pub fn compute_metrics(
    doc: &PreparedDoc,
    culture: &str,
    symbol: &NgramQuery,
    lexicon: &CultureLexicon,
    cfg: &RelevanceConfig,
) -> Result<RelevanceMetrics> {
    let culture_occs = culture_occurrences(doc, culture, lexicon)?;
    let symbol_occs = find_occurrences(doc, symbol);
    let d_tok = token_distance(doc.tokens.len(), &culture_occs, &symbol_occs);
    let d_sent = sentence_distance(doc.sentence_map(), &culture_occs, &symbol_occs);
    let snr = d_snr(doc, culture, lexicon, cfg.epsilon)?;
    Ok(RelevanceMetrics {
        d_tok,
        d_sent,
        d_snr: snr,
    })
}

/// Applies the Global/Local rules to precomputed metrics.
pub fn verdict_from_metrics(m: &RelevanceMetrics, cfg: &RelevanceConfig) -> VerdictKind {
    if let Some(d_tok) = m.d_tok {
        if d_tok <= cfg.max_seq_len && m.d_snr >= 0.0 {
            return VerdictKind::Global;
        }
    }
    if let Some(d_sent) = m.d_sent {
        if d_sent <= cfg.sent_threshold && m.d_snr >= cfg.snr_low && m.d_snr < 0.0 {
            return VerdictKind::Local;
        }
    }
    VerdictKind::NotContributory
}

/// Classifies one document's contribution to a (culture, symbol) pair.
pub fn classify_document(
    doc: &PreparedDoc,
    culture: &str,
    symbol: &NgramQuery,
    lexicon: &CultureLexicon,
    cfg: &RelevanceConfig,
) -> Result<RelevanceVerdict> {
    cfg.validate()?;
    let metrics = compute_metrics(doc, culture, symbol, lexicon, cfg)?;
    Ok(RelevanceVerdict {
        kind: verdict_from_metrics(&metrics, cfg),
        metrics,
    })
}
