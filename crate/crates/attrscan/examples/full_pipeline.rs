//! Runs all six pipeline stages over the mini corpus into a temporary
//! directory, then prints a summary of each output file.
//!
//! Run with: cargo run --example full_pipeline

use attrscan::config::RunConfig;
use attrscan::pipeline::{
    run_classify, run_correlate, run_index, run_label, run_report, run_topics, StageOptions,
};

fn main() -> attrscan::Result<()> {
    let base = env!("CARGO_MANIFEST_DIR");
    let out = std::env::temp_dir().join("attrscan-full-pipeline");
    let _ = std::fs::remove_dir_all(&out);

    let mut cfg = RunConfig::default();
    cfg.paths.corpus = Some(format!("{base}/testdata/mini/corpus.jsonl").into());
    cfg.paths.cultures = Some(format!("{base}/testdata/mini/cultures.json").into());
    cfg.paths.generations = Some(format!("{base}/testdata/mini/generations.jsonl").into());
    cfg.paths.definitions = Some(format!("{base}/testdata/mini/definitions.jsonl").into());
    cfg.paths.external_counts = Some(format!("{base}/testdata/mini/external_counts.csv").into());
    cfg.output.dir = out.clone();
    let opts = StageOptions::default();

    let index = run_index(&cfg, &opts)?;
    println!(
        "index:        {} docs, {} tokens ({} ms)",
        index.doc_count, index.token_count, index.elapsed_ms
    );
    let classify = run_classify(&cfg, &opts)?;
    println!(
        "classify:     {} pairs, {} memorized",
        classify.pairs, classify.memorized_pairs
    );
    let label = run_label(&cfg, &opts)?;
    println!("label:        {} labels {:?}", label.labels, label.by_kind);
    let report = run_report(&cfg, &opts)?;
    println!("report:       {} dashboards", report.dashboards);
    let correlate = run_correlate(
        &cfg,
        &StageOptions {
            topic_filter: true,
            ..opts
        },
    )?;
    for row in &correlate.rows {
        println!(
            "correlate:    {} rho={:.3} tau={:.3} n={}",
            row.analysis, row.spearman_rho, row.kendall_tau, row.n
        );
    }
    let topics = run_topics(&cfg, &opts)?;
    println!("topics:       {} reports", topics.reports);
    println!("\noutputs in {}", out.display());
    Ok(())
}
