//! Builds the positional n-gram index over the mini corpus and runs a few
//! phrase queries against it.
//!
//! Run with: cargo run --example build_index

use attrscan::corpus::load_corpus;
use attrscan::index::{Index, DEFAULT_MAX_NGRAM_LEN};

fn main() -> attrscan::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/mini/corpus.jsonl");
    let docs = load_corpus(path)?;
    let index = Index::build(docs, DEFAULT_MAX_NGRAM_LEN)?;
    println!(
        "indexed {} docs, {} tokens (n-grams up to {} tokens)",
        index.doc_count(),
        index.token_count(),
        index.max_ngram_len()
    );

    for phrase in ["miso soup", "ao dai", "t-shirt", "kimono"] {
        let q = index.query(phrase)?;
        let count = index.count(&q)?;
        println!(
            "\n{:?}: {} docs, {} occurrences",
            phrase, count.doc_freq, count.total_occurrences
        );
        let docs = index.docs_containing(&q)?;
        println!("  first matches: {:?}", &docs[..3.min(docs.len())]);
        if let Some(first) = docs.first() {
            let spans = index.occurrences(first, &q)?;
            println!("  token spans in {first}: {spans:?}");
        }
    }
    Ok(())
}
