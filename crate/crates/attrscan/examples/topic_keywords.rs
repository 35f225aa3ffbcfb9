//! Selects the co-occurrence document set for a cross-culture case, fits a
//! seeded topic model over its chunks, and ranks keywords by TF-IDF.
//!
//! Run with: cargo run --example topic_keywords

use attrscan::corpus::load_corpus;
use attrscan::index::{Index, DEFAULT_MAX_NGRAM_LEN};
use attrscan::relevance::{CultureLexicon, RelevanceConfig};
use attrscan::topics::{
    chunk_indexed_docs, extract_keywords, fit_lda, select_cooccurrence_set, LdaParams,
    StopwordList, DEFAULT_CANDIDATES_PER_TOPIC,
};

fn main() -> attrscan::Result<()> {
    let base = env!("CARGO_MANIFEST_DIR");
    let docs = load_corpus(format!("{base}/testdata/mini/corpus.jsonl"))?;
    let index = Index::build(docs, DEFAULT_MAX_NGRAM_LEN)?;
    let lexicon = CultureLexicon::from_path(format!("{base}/testdata/mini/cultures.json"))?;

    let (symbol, culture_a, culture_b) = ("kimono", "Japan", "South Korea");
    let ords = select_cooccurrence_set(
        &index,
        &lexicon,
        culture_a,
        culture_b,
        symbol,
        &RelevanceConfig::default(),
    )?;
    println!("co-occurrence set for ({symbol}, {culture_a}, {culture_b}): {} docs", ords.len());

    let chunks = chunk_indexed_docs(&index, &ords, 2048, 2048)?;
    let params = LdaParams::default();
    let model = fit_lda(&chunks, &params, &StopwordList::builtin(), 42)?;
    println!(
        "fitted {} topics over {} chunks ({} vocabulary terms)\n",
        model.k,
        chunks.len(),
        model.vocab.len()
    );

    for topic in 0..model.k {
        let words: Vec<&str> = model
            .top_words(topic, 5)
            .into_iter()
            .map(|(w, _)| w)
            .collect();
        println!("topic {topic}: {words:?}");
    }

    let keywords = extract_keywords(&model, &chunks, 5, DEFAULT_CANDIDATES_PER_TOPIC);
    println!("\ntop keywords:");
    for k in keywords {
        println!("  {:14} {:.3}", k.term, k.weight);
    }
    Ok(())
}
