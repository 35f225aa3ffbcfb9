//! Builds contribution distributions for every generated symbol and picks
//! out the memorized (culture, symbol) pairs.
//!
//! Run with: cargo run --example find_memorized

use attrscan::corpus::load_corpus;
use attrscan::index::{Index, DEFAULT_MAX_NGRAM_LEN};
use attrscan::memorization::{
    build_distribution, classify_memorized, generating_cultures, load_generations,
    MemorizationConfig,
};
use attrscan::relevance::{CultureLexicon, RelevanceConfig};

fn main() -> attrscan::Result<()> {
    let base = env!("CARGO_MANIFEST_DIR");
    let docs = load_corpus(format!("{base}/testdata/mini/corpus.jsonl"))?;
    let index = Index::build(docs, DEFAULT_MAX_NGRAM_LEN)?;
    let lexicon = CultureLexicon::from_path(format!("{base}/testdata/mini/cultures.json"))?;
    let generations = load_generations(format!("{base}/testdata/mini/generations.jsonl"))?;

    let rel_cfg = RelevanceConfig::default();
    let mem_cfg = MemorizationConfig::default();
    println!("memorized pairs (z threshold {}):\n", mem_cfg.z_threshold);
    for ((topic, symbol), cultures) in generating_cultures(&generations) {
        let dist = build_distribution(&symbol, &cultures, &index, &lexicon, &rel_cfg)?;
        let verdict = classify_memorized(&dist, &mem_cfg, lexicon.len());
        for culture in &verdict.memorized_for {
            let score = &dist.per_culture[culture];
            println!(
                "{topic:9} {symbol:12} -> {culture:8} cs={:.4} ({}/{} docs) z={} rule={}",
                score.cs,
                score.n_contributory,
                dist.n_symbol_docs,
                score
                    .z
                    .map(|z| format!("{z:.3}"))
                    .unwrap_or_else(|| "-".into()),
                verdict.rule.as_str(),
            );
        }
    }
    Ok(())
}
