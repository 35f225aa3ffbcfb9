//! Rank correlations and per-culture response dashboards.
//!
//! Two analyses live here: how strongly per-culture memorization counts
//! track per-culture corpus presence (Spearman rho and Kendall tau-b),
//! and what fraction of each culture's generated symbol occurrences falls
//! into each association kind.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::associations::{AssociationKind, AssociationLabel};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::memorization::{GenerationRecord, MemorizationVerdict, Topic};
use crate::relevance::CultureLexicon;

/// Tokens that mark a document as food-related.
pub const FOOD_KEYWORDS: [&str; 17] = [
    "food", "foods", "cuisine", "cuisines", "dish", "dishes", "meal", "meals", "recipe",
    "recipes", "menu", "menus", "breakfast", "lunch", "dinner", "snack", "snacks",
];

/// Tokens that mark a document as clothing-related.
pub const CLOTHING_KEYWORDS: [&str; 15] = [
    "clothing", "clothes", "apparel", "garment", "garments", "outfit", "outfits",
    "attire", "attires", "dress", "dresses", "suit", "suits", "uniform", "uniforms",
];

/// Built-in keyword list for a topic; `None` for topics without one.
pub fn topic_keywords(topic: &Topic) -> Option<&'static [&'static str]> {
    match topic {
        Topic::Food => Some(&FOOD_KEYWORDS),
        Topic::Clothing => Some(&CLOTHING_KEYWORDS),
        Topic::Other(_) => None,
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Stats(format!(
            "vectors have different lengths ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Stats(format!(
            "need at least 2 observations, got {}",
            x.len()
        )));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if v.iter().any(|n| !n.is_finite()) {
            return Err(Error::Stats(format!("{name} contains a non-finite value")));
        }
    }
    Ok(())
}

/// 1-based ranks with ties assigned the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the mean rank.
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        let which = if sxx == 0.0 { "x" } else { "y" };
        return Err(Error::Stats(format!(
            "{which} is constant; correlation undefined"
        )));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Spearman rank correlation: Pearson over average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Counts strict inversions while merge-sorting `values`.
fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = values.split_at_mut(mid);
    let mut inversions = count_inversions(left) + count_inversions(right);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            merged.push(left[i]);
            i += 1;
        } else {
            inversions += (left.len() - i) as u64;
            merged.push(right[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&left[i..]);
    merged.extend_from_slice(&right[j..]);
    values.copy_from_slice(&merged);
    inversions
}

/// Sum of t*(t-1)/2 over runs of equal keys in sorted order.
fn tie_pairs<K: PartialEq>(sorted_keys: &[K]) -> u64 {
    let mut total = 0u64;
    let mut i = 0;
    while i < sorted_keys.len() {
        let mut j = i;
        while j + 1 < sorted_keys.len() && sorted_keys[j + 1] == sorted_keys[i] {
            j += 1;
        }
        let t = (j - i + 1) as u64;
        total += t * (t - 1) / 2;
        i = j + 1;
    }
    total
}

/// Kendall tau-b, tie-corrected, via merge-sort inversion counting.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .expect("finite values")
            .then(y[a].partial_cmp(&y[b]).expect("finite values"))
    });
    let pairs_x: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let pairs_xy: Vec<(f64, f64)> = order.iter().map(|&i| (x[i], y[i])).collect();
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let n1 = tie_pairs(&pairs_x);
    let n3 = tie_pairs(&pairs_xy);
    let mut y_sorted: Vec<f64> = y.to_vec();
    y_sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n2 = tie_pairs(&y_sorted);
    if n1 == n0 || n2 == n0 {
        let which = if n1 == n0 { "x" } else { "y" };
        return Err(Error::Stats(format!(
            "{which} is constant; correlation undefined"
        )));
    }
    // Sorted by (x, y), pairs tied in x contribute no inversions, so the
    // inversion count is exactly the discordant-pair count.
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let discordant = count_inversions(&mut ys);
    let numerator = n0 as i128 - n1 as i128 - n2 as i128 + n3 as i128 - 2 * discordant as i128;
    let denom = ((n0 - n1) as f64).sqrt() * ((n0 - n2) as f64).sqrt();
    Ok(numerator as f64 / denom)
}

/// Correlation between two per-culture count series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub spearman_rho: f64,
    pub kendall_tau: f64,
    pub n: usize,
}

/// Documents mentioning each culture, optionally restricted to documents
/// containing at least one topic keyword.
pub fn culture_doc_counts(
    index: &Index,
    lexicon: &CultureLexicon,
    keywords: Option<&[&str]>,
) -> Result<BTreeMap<String, u64>> {
    let keyword_docs: Option<BTreeSet<u32>> = match keywords {
        Some(words) => {
            let mut set = BTreeSet::new();
            for word in words {
                let q = index.query(word)?;
                set.extend(index.doc_ords_containing(&q)?);
            }
            Some(set)
        }
        None => None,
    };
    let mut counts = BTreeMap::new();
    for (culture, aliases) in lexicon.iter() {
        let mut docs = BTreeSet::new();
        for alias in aliases {
            docs.extend(index.doc_ords_containing(alias)?);
        }
        let n = match &keyword_docs {
            Some(filter) => docs.intersection(filter).count() as u64,
            None => docs.len() as u64,
        };
        counts.insert(culture.to_string(), n);
    }
    Ok(counts)
}

/// Memorized-symbol count per culture, zero-filled over the lexicon.
pub fn memorization_counts<'a>(
    verdicts: impl IntoIterator<Item = &'a MemorizationVerdict>,
    lexicon: &CultureLexicon,
) -> BTreeMap<String, u64> {
    let mut counts: BTreeMap<String, u64> =
        lexicon.names().map(|c| (c.to_string(), 0)).collect();
    for verdict in verdicts {
        for culture in &verdict.memorized_for {
            if let Some(n) = counts.get_mut(culture) {
                *n += 1;
            }
        }
    }
    counts
}

/// Correlates memorized-symbol counts with document counts across
/// cultures. Both maps must cover the same cultures.
pub fn correlate_memorization_frequency(
    memorized: &BTreeMap<String, u64>,
    docs: &BTreeMap<String, u64>,
) -> Result<CorrelationResult> {
    if memorized.keys().ne(docs.keys()) {
        return Err(Error::Stats(
            "memorized and document counts cover different cultures".into(),
        ));
    }
    if docs.len() < 2 {
        return Err(Error::Stats(format!(
            "need at least 2 cultures to correlate, got {}",
            docs.len()
        )));
    }
    let x: Vec<f64> = memorized.values().map(|&v| v as f64).collect();
    let y: Vec<f64> = docs.values().map(|&v| v as f64).collect();
    Ok(CorrelationResult {
        spearman_rho: spearman(&x, &y)?,
        kendall_tau: kendall_tau(&x, &y)?,
        n: x.len(),
    })
}

/// Fraction of symbol occurrences per association kind; always sums to 1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KindFractions {
    pub memorized: f64,
    pub cross_culture: f64,
    pub diffuse: f64,
    pub weak_from_memorized: f64,
    pub weak_from_diffuse: f64,
    pub unclassified: f64,
}

impl KindFractions {
    pub fn get(&self, kind: AssociationKind) -> f64 {
        match kind {
            AssociationKind::Memorized => self.memorized,
            AssociationKind::CrossCulture => self.cross_culture,
            AssociationKind::Diffuse => self.diffuse,
            AssociationKind::WeakFromMemorized => self.weak_from_memorized,
            AssociationKind::WeakFromDiffuse => self.weak_from_diffuse,
            AssociationKind::Unclassified => self.unclassified,
        }
    }

    fn get_mut(&mut self, kind: AssociationKind) -> &mut f64 {
        match kind {
            AssociationKind::Memorized => &mut self.memorized,
            AssociationKind::CrossCulture => &mut self.cross_culture,
            AssociationKind::Diffuse => &mut self.diffuse,
            AssociationKind::WeakFromMemorized => &mut self.weak_from_memorized,
            AssociationKind::WeakFromDiffuse => &mut self.weak_from_diffuse,
            AssociationKind::Unclassified => &mut self.unclassified,
        }
    }

    pub fn sum(&self) -> f64 {
        AssociationKind::ALL.iter().map(|&k| self.get(k)).sum()
    }
}

/// Label-kind breakdown of one culture's responses for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CultureDashboard {
    pub culture: String,
    pub topic: Topic,
    pub fractions: KindFractions,
    pub n_responses: u64,
}

/// Builds per-(culture, topic) dashboards. Each symbol occurrence in each
/// generation record counts once toward its label's fraction, so symbols
/// sampled repeatedly weigh more than rare ones.
pub fn build_dashboard(
    labels: &[AssociationLabel],
    generations: &[GenerationRecord],
) -> Result<Vec<CultureDashboard>> {
    let by_pair: BTreeMap<(&str, &Topic, &str), AssociationKind> = labels
        .iter()
        .map(|l| ((l.culture.as_str(), &l.topic, l.symbol.as_str()), l.kind))
        .collect();
    let mut groups: BTreeMap<(&str, &Topic), (KindFractions, u64, u64)> = BTreeMap::new();
    for rec in generations {
        let entry = groups
            .entry((rec.culture.as_str(), &rec.topic))
            .or_default();
        entry.1 += 1;
        for symbol in &rec.symbols {
            let kind = by_pair
                .get(&(rec.culture.as_str(), &rec.topic, symbol.as_str()))
                .copied()
                .ok_or_else(|| Error::UnlabeledPair {
                    culture: rec.culture.clone(),
                    topic: rec.topic.to_string(),
                    symbol: symbol.clone(),
                })?;
            *entry.0.get_mut(kind) += 1.0;
            entry.2 += 1;
        }
    }
    let mut out = Vec::new();
    for ((culture, topic), (mut fractions, n_responses, occurrences)) in groups {
        if occurrences == 0 {
            continue;
        }
        for kind in AssociationKind::ALL {
            *fractions.get_mut(kind) /= occurrences as f64;
        }
        out.push(CultureDashboard {
            culture: culture.to_string(),
            topic: topic.clone(),
            fractions,
            n_responses,
        });
    }
    Ok(out)
}
