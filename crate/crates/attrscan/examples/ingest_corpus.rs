//! Streams the bundled mini corpus and shows how documents are tokenized
//! and split into sentences.
//!
//! Run with: cargo run --example ingest_corpus

use attrscan::corpus::{CorpusReader, PreparedDoc};

fn main() -> attrscan::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/mini/corpus.jsonl");
    let mut n_docs = 0usize;
    let mut n_tokens = 0usize;
    let mut n_sentences = 0usize;
    for doc in CorpusReader::open(path)? {
        let prepared = PreparedDoc::with_default_tokenizer(doc?);
        n_docs += 1;
        n_tokens += prepared.tokens.len();
        n_sentences += prepared.sentences.len();
        if n_docs == 1 {
            println!("first document ({}):", prepared.doc.doc_id);
            println!("  text: {}", prepared.doc.text);
            println!("  tokens: {:?}", &prepared.terms()[..12.min(prepared.terms().len())]);
            println!("  sentences: {}", prepared.sentences.len());
        }
    }
    println!("\ncorpus: {n_docs} docs, {n_tokens} tokens, {n_sentences} sentences");
    Ok(())
}
