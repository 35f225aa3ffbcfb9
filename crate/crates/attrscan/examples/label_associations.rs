//! Labels every generated (culture, symbol) pair with one of the six
//! association kinds, using the full precedence chain.
//!
//! Run with: cargo run --example label_associations

use std::collections::BTreeMap;

use attrscan::associations::{label_topic, load_definitions, AssociationConfig};
use attrscan::corpus::load_corpus;
use attrscan::index::{Index, DEFAULT_MAX_NGRAM_LEN};
use attrscan::memorization::{
    build_distribution, classify_memorized, generating_cultures, load_generations, Topic,
};
use attrscan::relevance::{CultureLexicon, RelevanceConfig};

fn main() -> attrscan::Result<()> {
    let base = env!("CARGO_MANIFEST_DIR");
    let docs = load_corpus(format!("{base}/testdata/mini/corpus.jsonl"))?;
    let index = Index::build(docs, DEFAULT_MAX_NGRAM_LEN)?;
    let lexicon = CultureLexicon::from_path(format!("{base}/testdata/mini/cultures.json"))?;
    let generations = load_generations(format!("{base}/testdata/mini/generations.jsonl"))?;
    let definitions = load_definitions(format!("{base}/testdata/mini/definitions.jsonl"))?;

    let rel_cfg = RelevanceConfig::default();
    let mem_cfg = Default::default();
    let assoc_cfg = AssociationConfig::default();

    // Group classification state per topic, then label each topic.
    let mut by_topic: BTreeMap<Topic, (BTreeMap<String, _>, BTreeMap<String, _>)> =
        BTreeMap::new();
    for ((topic, symbol), cultures) in generating_cultures(&generations) {
        let dist = build_distribution(&symbol, &cultures, &index, &lexicon, &rel_cfg)?;
        let verdict = classify_memorized(&dist, &mem_cfg, lexicon.len());
        let entry = by_topic.entry(topic).or_default();
        entry.0.insert(symbol.clone(), dist);
        entry.1.insert(symbol, verdict);
    }

    for (topic, (dists, verdicts)) in &by_topic {
        let mut counts = BTreeMap::new();
        for symbol in dists.keys() {
            let total = index.count(&index.query(symbol)?)?.total_occurrences;
            counts.insert(symbol.clone(), total);
        }
        let labels = label_topic(
            topic,
            dists,
            verdicts,
            &definitions,
            &counts,
            lexicon.len(),
            &assoc_cfg,
        )?;
        println!("\n== {topic} ==");
        for label in labels {
            let evidence = label.evidence.to_string();
            println!(
                "{:12} {:20} {:20} {}",
                label.culture,
                label.symbol,
                label.kind.as_str(),
                if evidence.is_empty() { "-".into() } else { evidence },
            );
        }
    }
    Ok(())
}
