//! Scores individual documents for one (culture, symbol) pair: the three
//! relevance metrics and the Global/Local/NotContributory verdict each
//! document earns.
//!
//! Run with: cargo run --example score_documents

use attrscan::corpus::{load_corpus, PreparedDoc};
use attrscan::index::NgramQuery;
use attrscan::relevance::{classify_document, CultureLexicon, RelevanceConfig};

fn main() -> attrscan::Result<()> {
    let base = env!("CARGO_MANIFEST_DIR");
    let docs = load_corpus(format!("{base}/testdata/mini/corpus.jsonl"))?;
    let lexicon = CultureLexicon::from_path(format!("{base}/testdata/mini/cultures.json"))?;
    let cfg = RelevanceConfig::default();
    let symbol = NgramQuery::new("kimono")?;

    println!("document verdicts for (Japan, kimono):\n");
    let mut shown = 0;
    for doc in docs {
        if !doc.text.to_lowercase().contains("kimono") {
            continue;
        }
        let prepared = PreparedDoc::with_default_tokenizer(doc);
        let verdict = classify_document(&prepared, "Japan", &symbol, &lexicon, &cfg)?;
        let m = &verdict.metrics;
        println!(
            "{:10} {:<16} d_tok={:>4} d_sent={:>4} d_snr={:>7.3}",
            prepared.doc.doc_id,
            format!("{:?}", verdict.kind),
            m.d_tok.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
            m.d_sent.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
            m.d_snr,
        );
        shown += 1;
        if shown == 12 {
            break;
        }
    }
    Ok(())
}
