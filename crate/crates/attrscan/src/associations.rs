//! Labels for generated (culture, symbol) pairs.
//!
//! Once memorization verdicts exist, every generated pair falls into
//! exactly one bucket, checked in this order:
//!
//! 1. **Memorized**: the culture itself is in the symbol's memorized set.
//! 2. **CrossCulture**: another culture memorized the symbol.
//! 3. **Diffuse**: generated for at least half the lexicon (configurable
//!    ratio) and memorized by nobody.
//! 4. **WeakFromMemorized**: the symbol reads like a fragment of a
//!    memorized symbol's definition (windowed token-bag F1).
//! 5. **WeakFromDiffuse**: the symbol contains a diffuse symbol as a
//!    contiguous token run.
//! 6. **Unclassified**: everything else (typos, brands, hallucinations).
//!
//! Diffuse symbols also get an overshadowing ratio: how many times more
//! often they appear in the corpus than the memorized symbols they crowd
//! out.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Tokenizer, WordTokenizer};
use crate::error::{Error, Result};
use crate::memorization::{ContributionDistribution, MemorizationVerdict, Topic};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum AssociationKind {
    Memorized,
    CrossCulture,
    Diffuse,
    WeakFromMemorized,
    WeakFromDiffuse,
    Unclassified,
}

impl AssociationKind {
    pub const ALL: [AssociationKind; 6] = [
        AssociationKind::Memorized,
        AssociationKind::CrossCulture,
        AssociationKind::Diffuse,
        AssociationKind::WeakFromMemorized,
        AssociationKind::WeakFromDiffuse,
        AssociationKind::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssociationKind::Memorized => "memorized",
            AssociationKind::CrossCulture => "cross_culture",
            AssociationKind::Diffuse => "diffuse",
            AssociationKind::WeakFromMemorized => "weak_from_memorized",
            AssociationKind::WeakFromDiffuse => "weak_from_diffuse",
            AssociationKind::Unclassified => "unclassified",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for AssociationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind-specific payload backing a label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    None,
    /// CrossCulture: the culture the symbol is actually memorized for.
    SourceCulture(String),
    /// WeakFromMemorized: whose definition the symbol was traced to.
    Definition { symbol: String, culture: String },
    /// WeakFromDiffuse: the diffuse symbols contained in the candidate.
    ContainedDiffuse(Vec<String>),
    /// Diffuse: breadth of generation, plus whether the overshadowing
    /// ratio needed zero-count smoothing.
    GeneratedFor {
        k: usize,
        n: usize,
        smoothed: bool,
    },
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::None => Ok(()),
            Evidence::SourceCulture(c) => f.write_str(c),
            Evidence::Definition { symbol, culture } => write!(f, "{symbol} ({culture})"),
            Evidence::ContainedDiffuse(symbols) => f.write_str(&symbols.join("+")),
            Evidence::GeneratedFor { k, n, smoothed } => {
                write!(f, "generated_for={k}/{n}")?;
                if *smoothed {
                    f.write_str(";smoothed_counts")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationLabel {
    pub culture: String,
    pub topic: Topic,
    pub symbol: String,
    pub kind: AssociationKind,
    pub evidence: Evidence,
    /// Memorized/CrossCulture: contribution score. Diffuse: overshadowing
    /// ratio (absent when the topic has no memorized symbols to compare
    /// against). WeakFromMemorized: F1.
    pub score: Option<f64>,
}

/// External definition text for a memorized symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionRecord {
    pub symbol: String,
    pub culture: String,
    pub definition: String,
}

/// Loads definitions from JSONL, lowercase-folding symbols.
pub fn load_definitions(path: impl AsRef<Path>) -> Result<Vec<DefinitionRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: DefinitionRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("malformed definition record: {e}"),
            })?;
        rec.symbol = rec.symbol.to_lowercase();
        if rec.definition.trim().is_empty() {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("definition for {:?} is empty", rec.symbol),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

/// Thresholds for the non-memorized buckets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationConfig {
    /// A symbol is diffuse when generated for at least
    /// `ceil(n_cultures * diffuse_ratio)` cultures.
    pub diffuse_ratio: f64,
    /// Minimum windowed token-bag F1 to trace a symbol to a definition.
    pub f1_threshold: f64,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        AssociationConfig {
            diffuse_ratio: 0.5,
            f1_threshold: 0.7,
        }
    }
}

impl AssociationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.diffuse_ratio > 0.0 && self.diffuse_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "diffuse_ratio must be in (0, 1], got {}",
                self.diffuse_ratio
            )));
        }
        if !(self.f1_threshold > 0.0 && self.f1_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "f1_threshold must be in (0, 1], got {}",
                self.f1_threshold
            )));
        }
        Ok(())
    }
}

/// Number of generating cultures needed for a symbol to count as diffuse.
pub fn diffuse_threshold(n_cultures: usize, ratio: f64) -> usize {
    (n_cultures as f64 * ratio).ceil() as usize
}

/// True when the symbol is generated broadly and memorized by nobody.
pub fn is_diffuse(
    n_generating: usize,
    memorized_for: &BTreeSet<String>,
    n_cultures: usize,
    ratio: f64,
) -> bool {
    memorized_for.is_empty() && n_generating >= diffuse_threshold(n_cultures, ratio)
}

/// Mean of `diffuse_count / memorized_count` over the memorized symbols.
/// Zero memorized counts are replaced by 1; the boolean reports whether
/// that smoothing fired.
pub fn overshadowing_ratio(
    diffuse_count: u64,
    memorized_counts: &[u64],
) -> Result<(f64, bool)> {
    if memorized_counts.is_empty() {
        return Err(Error::NoMemorizedSymbols);
    }
    let mut total = 0.0;
    let mut smoothed = false;
    for &c in memorized_counts {
        let denom = if c == 0 {
            smoothed = true;
            1
        } else {
            c
        };
        total += diffuse_count as f64 / denom as f64;
    }
    Ok((total / memorized_counts.len() as f64, smoothed))
}

/// Overshadowing summary for one diffuse symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvershadowEntry {
    pub diffuse_symbol: String,
    pub r: f64,
    pub n_cultures_generated: usize,
    pub smoothed: bool,
}

/// Finds the culture a symbol was memorized for when it was generated for
/// a different one. Returns the source culture and its contribution score;
/// multiple sources resolve to the highest score, ties to the
/// lexicographically smallest name.
pub fn detect_cross_culture(
    culture: &str,
    dist: &ContributionDistribution,
    verdict: &MemorizationVerdict,
) -> Option<(String, f64)> {
    if verdict.memorized_for.contains(culture) {
        return None;
    }
    let mut best: Option<(&str, f64)> = None;
    for source in &verdict.memorized_for {
        let cs = dist.cs(source).unwrap_or(0.0);
        let better = match best {
            None => true,
            Some((bc, bcs)) => cs > bcs || (cs == bcs && source.as_str() < bc),
        };
        if better {
            best = Some((source, cs));
        }
    }
    best.map(|(c, cs)| (c.to_string(), cs))
}

fn bag_tokens(text: &str) -> Vec<String> {
    WordTokenizer
        .tokenize(text)
        .iter()
        .map(|t| text[t.byte_start..t.byte_end].to_lowercase())
        .collect()
}

fn bag_counts(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

fn bag_overlap(a: &BTreeMap<&str, usize>, b: &BTreeMap<&str, usize>) -> usize {
    a.iter()
        .map(|(t, &ca)| ca.min(b.get(t).copied().unwrap_or(0)))
        .sum()
}

/// Best token-bag F1 between the candidate and any contiguous window of
/// the definition whose length is within one token of the candidate's.
pub fn definition_window_f1(candidate: &str, definition: &str) -> f64 {
    let cand = bag_tokens(candidate);
    if cand.is_empty() {
        return 0.0;
    }
    let cand_bag = bag_counts(&cand);
    let def = bag_tokens(definition);
    let mut best = 0.0f64;
    let lengths = [cand.len().saturating_sub(1), cand.len(), cand.len() + 1];
    for &w in &lengths {
        if w == 0 || w > def.len() {
            continue;
        }
        for window in def.windows(w) {
            let tp = bag_overlap(&cand_bag, &bag_counts(window));
            if tp == 0 {
                continue;
            }
            let precision = tp as f64 / w as f64;
            let recall = tp as f64 / cand.len() as f64;
            let f1 = 2.0 * precision * recall / (precision + recall);
            best = best.max(f1);
        }
    }
    best
}

/// A candidate symbol traced back to a memorized symbol's definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakMatch {
    pub symbol: String,
    pub culture: String,
    pub f1: f64,
}

/// Matches the candidate against each definition and returns the best hit
/// at or above `f1_threshold`. Ties prefer the lexicographically smallest
/// (symbol, culture).
pub fn trace_weak_from_memorized(
    candidate: &str,
    definitions: &[&DefinitionRecord],
    f1_threshold: f64,
) -> Result<Option<WeakMatch>> {
    if !(f1_threshold > 0.0 && f1_threshold <= 1.0) {
        return Err(Error::Config(format!(
            "f1_threshold must be in (0, 1], got {f1_threshold}"
        )));
    }
    let mut best: Option<WeakMatch> = None;
    for def in definitions {
        let f1 = definition_window_f1(candidate, &def.definition);
        if f1 < f1_threshold {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                f1 > b.f1
                    || (f1 == b.f1
                        && (def.symbol.as_str(), def.culture.as_str())
                            < (b.symbol.as_str(), b.culture.as_str()))
            }
        };
        if better {
            best = Some(WeakMatch {
                symbol: def.symbol.clone(),
                culture: def.culture.clone(),
                f1,
            });
        }
    }
    Ok(best)
}

fn is_token_subsequence(needle: &[String], haystack: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Diffuse symbols appearing inside the candidate as contiguous token
/// runs, e.g. "black t-shirt" contains "t-shirt".
pub fn trace_weak_from_diffuse(
    candidate: &str,
    diffuse_symbols: &BTreeSet<String>,
) -> Option<Vec<String>> {
    let cand = bag_tokens(candidate);
    let mut contained = Vec::new();
    for symbol in diffuse_symbols {
        let toks = bag_tokens(symbol);
        if is_token_subsequence(&toks, &cand) {
            contained.push(symbol.clone());
        }
    }
    if contained.is_empty() {
        None
    } else {
        Some(contained)
    }
}

/// Labels every (culture, symbol) pair of one topic. `dists` and
/// `verdicts` are keyed by symbol; the generating cultures of a symbol are
/// the keys of its distribution. `counts` maps symbols to corpus
/// occurrence totals for the overshadowing ratio.
pub fn label_topic(
    topic: &Topic,
    dists: &BTreeMap<String, ContributionDistribution>,
    verdicts: &BTreeMap<String, MemorizationVerdict>,
    definitions: &[DefinitionRecord],
    counts: &BTreeMap<String, u64>,
    n_cultures: usize,
    cfg: &AssociationConfig,
) -> Result<Vec<AssociationLabel>> {
    cfg.validate()?;
    let empty = BTreeSet::new();
    let memorized_for = |symbol: &str| -> &BTreeSet<String> {
        verdicts.get(symbol).map(|v| &v.memorized_for).unwrap_or(&empty)
    };

    let memorized_symbols: BTreeSet<&str> = dists
        .keys()
        .filter(|s| !memorized_for(s).is_empty())
        .map(|s| s.as_str())
        .collect();
    let diffuse_symbols: BTreeSet<String> = dists
        .iter()
        .filter(|(s, d)| {
            is_diffuse(
                d.per_culture.len(),
                memorized_for(s),
                n_cultures,
                cfg.diffuse_ratio,
            )
        })
        .map(|(s, _)| s.clone())
        .collect();
    let topic_defs: Vec<&DefinitionRecord> = definitions
        .iter()
        .filter(|d| memorized_symbols.contains(d.symbol.as_str()))
        .collect();
    let memorized_counts: Vec<u64> = memorized_symbols
        .iter()
        .map(|s| counts.get(*s).copied().unwrap_or(0))
        .collect();

    let mut overshadow: BTreeMap<&str, (f64, bool)> = BTreeMap::new();
    if !memorized_counts.is_empty() {
        for symbol in &diffuse_symbols {
            let diffuse_count = counts.get(symbol).copied().unwrap_or(0);
            overshadow.insert(
                symbol,
                overshadowing_ratio(diffuse_count, &memorized_counts)?,
            );
        }
    }

    let mut labels = Vec::new();
    for (symbol, dist) in dists {
        let verdict = verdicts.get(symbol);
        for culture in dist.per_culture.keys() {
            let (kind, evidence, score) = if memorized_for(symbol).contains(culture) {
                (
                    AssociationKind::Memorized,
                    Evidence::None,
                    dist.cs(culture),
                )
            } else if let Some((source, cs)) = verdict
                .and_then(|v| detect_cross_culture(culture, dist, v))
            {
                (
                    AssociationKind::CrossCulture,
                    Evidence::SourceCulture(source),
                    Some(cs),
                )
            } else if diffuse_symbols.contains(symbol) {
                let ratio = overshadow.get(symbol.as_str());
                (
                    AssociationKind::Diffuse,
                    Evidence::GeneratedFor {
                        k: dist.per_culture.len(),
                        n: n_cultures,
                        smoothed: ratio.is_some_and(|&(_, s)| s),
                    },
                    ratio.map(|&(r, _)| r),
                )
            } else if let Some(m) =
                trace_weak_from_memorized(symbol, &topic_defs, cfg.f1_threshold)?
            {
                (
                    AssociationKind::WeakFromMemorized,
                    Evidence::Definition {
                        symbol: m.symbol,
                        culture: m.culture,
                    },
                    Some(m.f1),
                )
            } else if let Some(contained) =
                trace_weak_from_diffuse(symbol, &diffuse_symbols)
            {
                (
                    AssociationKind::WeakFromDiffuse,
                    Evidence::ContainedDiffuse(contained),
                    None,
                )
            } else {
                (AssociationKind::Unclassified, Evidence::None, None)
            };
            labels.push(AssociationLabel {
                culture: culture.clone(),
                topic: topic.clone(),
                symbol: symbol.clone(),
                kind,
                evidence,
                score,
            });
        }
    }
    labels.sort_by(|a, b| (&a.culture, &a.symbol).cmp(&(&b.culture, &b.symbol)));
    Ok(labels)
}

/// Overshadowing entries for the diffuse symbols of one topic, for
/// reporting alongside labels.
pub fn overshadow_entries(labels: &[AssociationLabel]) -> Vec<OvershadowEntry> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for label in labels {
        if label.kind != AssociationKind::Diffuse || !seen.insert(&label.symbol) {
            continue;
        }
        if let (Some(r), Evidence::GeneratedFor { k, smoothed, .. }) =
            (label.score, &label.evidence)
        {
            out.push(OvershadowEntry {
                diffuse_symbol: label.symbol.clone(),
                r,
                n_cultures_generated: *k,
                smoothed: *smoothed,
            });
        }
    }
    out
}
