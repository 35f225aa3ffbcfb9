//! Correlates per-culture memorized-symbol counts with per-culture corpus
//! document counts, overall and per topic with keyword filtering.
//!
//! Run with: cargo run --example rank_correlations

use attrscan::corpus::load_corpus;
use attrscan::index::{Index, DEFAULT_MAX_NGRAM_LEN};
use attrscan::memorization::{
    build_distribution, classify_memorized, generating_cultures, load_generations,
    MemorizationVerdict, Topic,
};
use attrscan::relevance::{CultureLexicon, RelevanceConfig};
use attrscan::stats::{
    correlate_memorization_frequency, culture_doc_counts, memorization_counts, topic_keywords,
};

fn main() -> attrscan::Result<()> {
    let base = env!("CARGO_MANIFEST_DIR");
    let docs = load_corpus(format!("{base}/testdata/mini/corpus.jsonl"))?;
    let index = Index::build(docs, DEFAULT_MAX_NGRAM_LEN)?;
    let lexicon = CultureLexicon::from_path(format!("{base}/testdata/mini/cultures.json"))?;
    let generations = load_generations(format!("{base}/testdata/mini/generations.jsonl"))?;

    let rel_cfg = RelevanceConfig::default();
    let mut verdicts: Vec<(Topic, MemorizationVerdict)> = Vec::new();
    for ((topic, symbol), cultures) in generating_cultures(&generations) {
        let dist = build_distribution(&symbol, &cultures, &index, &lexicon, &rel_cfg)?;
        verdicts.push((
            topic,
            classify_memorized(&dist, &Default::default(), lexicon.len()),
        ));
    }

    println!("analysis      spearman    kendall     n");
    let all_mem = memorization_counts(verdicts.iter().map(|(_, v)| v), &lexicon);
    let all_docs = culture_doc_counts(&index, &lexicon, None)?;
    let r = correlate_memorization_frequency(&all_mem, &all_docs)?;
    println!(
        "all_topics    {:8.4}   {:8.4}   {:3}",
        r.spearman_rho, r.kendall_tau, r.n
    );

    for topic in [Topic::Food, Topic::Clothing] {
        let keywords = topic_keywords(&topic).expect("built-in topic");
        let mem = memorization_counts(
            verdicts.iter().filter(|(t, _)| *t == topic).map(|(_, v)| v),
            &lexicon,
        );
        let docs = culture_doc_counts(&index, &lexicon, Some(keywords))?;
        let r = correlate_memorization_frequency(&mem, &docs)?;
        println!(
            "{:12}  {:8.4}   {:8.4}   {:3}",
            topic.to_string(),
            r.spearman_rho,
            r.kendall_tau,
            r.n
        );
    }
    Ok(())
}
