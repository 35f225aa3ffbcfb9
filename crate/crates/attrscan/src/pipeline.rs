//! Stage orchestration behind the CLI: index, classify, label, report,
//! correlate, topics. Each stage reads the previous stage's files from the
//! output directory and writes its own, so stages can be rerun and
//! inspected independently. All floats in output files are printed with 6
//! significant digits to keep reruns byte-identical across platforms.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::associations::{
    label_topic, load_definitions, AssociationKind, AssociationLabel, DefinitionRecord,
    Evidence,
};
use crate::config::RunConfig;
use crate::corpus::load_corpus;
use crate::error::{Error, Result};
use crate::index::{import_external_counts, CountRecord, Index, DEFAULT_MAX_NGRAM_LEN};
use crate::memorization::{
    build_distribution, classify_memorized, generating_cultures, load_generations,
    ContributionDistribution, MemorizationRule, MemorizationVerdict, Topic,
};
use crate::relevance::CultureLexicon;
use crate::stats::{
    build_dashboard, correlate_memorization_frequency, culture_doc_counts,
    memorization_counts, topic_keywords, CultureDashboard,
};
use crate::topics::{
    chunk_indexed_docs, extract_keywords, fit_lda, interpret_topics, select_cooccurrence_set,
    InterpreterHook, Keyword, StopwordList, DEFAULT_CANDIDATES_PER_TOPIC,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const INDEX_FILE: &str = "index.bin";
pub const INDEX_MANIFEST_FILE: &str = "index.manifest.json";
pub const MEMORIZED_FILE: &str = "memorized.csv";
pub const ASSOCIATIONS_FILE: &str = "associations.csv";
pub const DASHBOARD_FILE: &str = "dashboard.json";
pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const TOPICS_FILE: &str = "topics.json";

/// Flags shared by the stages, set from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageOptions {
    /// Overwrite existing outputs instead of refusing.
    pub force: bool,
    /// Mirror every CSV output as a JSON file next to it.
    pub json_mirror: bool,
    /// Correlate per topic against keyword-filtered document counts.
    pub topic_filter: bool,
    /// Include raw topic-word tables in topics.json.
    pub dump_topics: bool,
}

/// Rounds to 6 significant digits; zero and non-finite values pass
/// through.
pub fn round_sig6(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let exp = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(5 - exp);
    (v * scale).round() / scale
}

/// 6-significant-digit decimal string for file output.
pub fn fmt_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    format!("{}", round_sig6(v))
}

fn required_path<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("{key} is required; set it in the config file")))
}

fn check_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::WouldOverwrite {
            path: path.to_path_buf(),
        });
    }
    Ok(())
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| Error::io(&cfg.output.dir, e))
}

fn require_stage_file(path: &Path, what: &str, stage: &str) -> Result<()> {
    if !path.exists() {
        return Err(Error::MissingStage {
            what: what.into(),
            stage: stage.into(),
            path: path.to_path_buf(),
        });
    }
    Ok(())
}

fn load_lexicon(cfg: &RunConfig) -> Result<CultureLexicon> {
    let path = required_path(&cfg.paths.cultures, "paths.cultures")?;
    let lexicon = CultureLexicon::from_path(path)?;
    if cfg.exclude_cultures.is_empty() {
        Ok(lexicon)
    } else {
        lexicon.without(&cfg.exclude_cultures)
    }
}

fn load_index_file(cfg: &RunConfig) -> Result<Index> {
    let path = cfg.out_path(INDEX_FILE);
    require_stage_file(&path, "search index", "index")?;
    Index::load(&path)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Output {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("building thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexSummary {
    pub doc_count: usize,
    pub token_count: u64,
    pub elapsed_ms: u128,
    pub index_path: PathBuf,
    pub manifest_path: PathBuf,
}

#[derive(Serialize)]
struct IndexManifest<'a> {
    schema_version: u32,
    doc_count: usize,
    token_count: u64,
    tokenizer: &'a str,
    max_ngram_len: usize,
    elapsed_ms: u128,
}

/// Builds and persists the corpus index plus a small build manifest.
pub fn run_index(cfg: &RunConfig, opts: &StageOptions) -> Result<IndexSummary> {
    let corpus = required_path(&cfg.paths.corpus, "paths.corpus")?;
    ensure_out_dir(cfg)?;
    let index_path = cfg.out_path(INDEX_FILE);
    let manifest_path = cfg.out_path(INDEX_MANIFEST_FILE);
    check_overwrite(&index_path, opts.force)?;
    check_overwrite(&manifest_path, opts.force)?;
    let start = Instant::now();
    let docs = load_corpus(corpus)?;
    let index = Index::build(docs, DEFAULT_MAX_NGRAM_LEN)?;
    let elapsed_ms = start.elapsed().as_millis();
    index.save(&index_path)?;
    write_json(
        &manifest_path,
        &IndexManifest {
            schema_version: SCHEMA_VERSION,
            doc_count: index.doc_count(),
            token_count: index.token_count(),
            tokenizer: index.tokenizer_name(),
            max_ngram_len: index.max_ngram_len(),
            elapsed_ms,
        },
    )?;
    log::info!(
        "indexed {} docs ({} tokens) in {elapsed_ms} ms",
        index.doc_count(),
        index.token_count()
    );
    Ok(IndexSummary {
        doc_count: index.doc_count(),
        token_count: index.token_count(),
        elapsed_ms,
        index_path,
        manifest_path,
    })
}

const MEMORIZED_HEADER: [&str; 8] = [
    "symbol",
    "topic",
    "culture",
    "n_contributory",
    "n_symbol_docs",
    "cs",
    "z",
    "rule",
];

#[derive(Debug, Clone, Serialize)]
struct MemorizedJsonRow {
    symbol: String,
    topic: String,
    culture: String,
    n_contributory: usize,
    n_symbol_docs: u64,
    cs: f64,
    z: Option<f64>,
    rule: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifySummary {
    pub pairs: usize,
    pub memorized_pairs: usize,
    pub path: PathBuf,
}

/// Scores every generated (symbol, culture) pair against the corpus and
/// writes `memorized.csv`: one row per pair with contribution score,
/// z-score, and the rule (if any) that marked the pair memorized.
pub fn run_classify(cfg: &RunConfig, opts: &StageOptions) -> Result<ClassifySummary> {
    let index = load_index_file(cfg)?;
    let lexicon = load_lexicon(cfg)?;
    let generations = load_generations(required_path(&cfg.paths.generations, "paths.generations")?)?;
    let unknown: BTreeSet<&str> = generations
        .iter()
        .map(|g| g.culture.as_str())
        .filter(|c| !lexicon.contains(c))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownCultures {
            cultures: unknown.into_iter().collect::<Vec<_>>().join(", "),
        });
    }
    ensure_out_dir(cfg)?;
    let csv_path = cfg.out_path(MEMORIZED_FILE);
    check_overwrite(&csv_path, opts.force)?;
    let json_path = cfg.out_path("memorized.json");
    if opts.json_mirror {
        check_overwrite(&json_path, opts.force)?;
    }

    let rel_cfg = cfg.relevance();
    let mem_cfg = cfg.memorization();
    let items: Vec<((Topic, String), BTreeSet<String>)> =
        generating_cultures(&generations).into_iter().collect();
    let n_cultures = lexicon.len();
    let classified: Vec<(Topic, ContributionDistribution, MemorizationVerdict)> =
        with_pool(cfg.output.threads, || {
            items
                .par_iter()
                .map(|((topic, symbol), cultures)| {
                    let dist =
                        build_distribution(symbol, cultures, &index, &lexicon, &rel_cfg)?;
                    let verdict = classify_memorized(&dist, &mem_cfg, n_cultures);
                    Ok((topic.clone(), dist, verdict))
                })
                .collect::<Result<Vec<_>>>()
        })??;

    let mut rows: Vec<(Topic, ContributionDistribution, MemorizationVerdict)> = classified;
    rows.sort_by(|a, b| {
        (a.0.to_string(), &a.1.symbol).cmp(&(b.0.to_string(), &b.1.symbol))
    });

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(MEMORIZED_HEADER)
        .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
    let mut json_rows = Vec::new();
    let mut pairs = 0usize;
    let mut memorized_pairs = 0usize;
    for (topic, dist, verdict) in &rows {
        for (culture, score) in &dist.per_culture {
            pairs += 1;
            let rule = if verdict.memorized_for.contains(culture) {
                memorized_pairs += 1;
                verdict.rule
            } else {
                MemorizationRule::None
            };
            writer
                .write_record([
                    dist.symbol.as_str(),
                    &topic.to_string(),
                    culture,
                    &score.n_contributory.to_string(),
                    &dist.n_symbol_docs.to_string(),
                    &fmt_sig6(score.cs),
                    &score.z.map(fmt_sig6).unwrap_or_default(),
                    rule.as_str(),
                ])
                .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
            if opts.json_mirror {
                json_rows.push(MemorizedJsonRow {
                    symbol: dist.symbol.clone(),
                    topic: topic.to_string(),
                    culture: culture.clone(),
                    n_contributory: score.n_contributory,
                    n_symbol_docs: dist.n_symbol_docs,
                    cs: round_sig6(score.cs),
                    z: score.z.map(round_sig6),
                    rule: rule.as_str().into(),
                });
            }
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
    std::fs::write(&csv_path, bytes).map_err(|e| Error::io(&csv_path, e))?;
    if opts.json_mirror {
        write_json(&json_path, &json_rows)?;
    }
    log::info!("classified {pairs} pairs, {memorized_pairs} memorized");
    Ok(ClassifySummary {
        pairs,
        memorized_pairs,
        path: csv_path,
    })
}

/// Per-topic classification data reconstructed from `memorized.csv`.
#[derive(Debug, Clone, Default)]
pub struct TopicClassification {
    pub dists: BTreeMap<String, ContributionDistribution>,
    pub verdicts: BTreeMap<String, MemorizationVerdict>,
}

/// Reads `memorized.csv` back into per-topic distributions and verdicts.
pub fn read_memorized(path: &Path) -> Result<BTreeMap<Topic, TopicClassification>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let malformed = |line: usize, message: String| Error::MalformedRecord {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    if headers.iter().ne(MEMORIZED_HEADER) {
        return Err(malformed(
            1,
            format!("expected header {MEMORIZED_HEADER:?}"),
        ));
    }
    type SymbolAcc = (BTreeMap<String, (usize, f64)>, u64, BTreeMap<String, MemorizationRule>);
    let mut acc: BTreeMap<(Topic, String), SymbolAcc> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| malformed(line, e.to_string()))?;
        let field = |idx: usize| record.get(idx).unwrap_or_default();
        let symbol = field(0).to_string();
        let topic = Topic::from(field(1).to_string());
        let culture = field(2).to_string();
        let n_contributory: usize = field(3)
            .parse()
            .map_err(|e| malformed(line, format!("n_contributory: {e}")))?;
        let n_symbol_docs: u64 = field(4)
            .parse()
            .map_err(|e| malformed(line, format!("n_symbol_docs: {e}")))?;
        let cs: f64 = field(5)
            .parse()
            .map_err(|e| malformed(line, format!("cs: {e}")))?;
        let rule = MemorizationRule::parse(field(7))
            .ok_or_else(|| malformed(line, format!("unknown rule {:?}", field(7))))?;
        let entry = acc
            .entry((topic, symbol.clone()))
            .or_insert_with(|| (BTreeMap::new(), n_symbol_docs, BTreeMap::new()));
        if entry.1 != n_symbol_docs {
            return Err(malformed(
                line,
                format!("inconsistent n_symbol_docs for symbol {symbol:?}"),
            ));
        }
        if entry.0.insert(culture.clone(), (n_contributory, cs)).is_some() {
            return Err(malformed(
                line,
                format!("duplicate row for symbol {symbol:?}, culture {culture:?}"),
            ));
        }
        if rule != MemorizationRule::None {
            entry.2.insert(culture, rule);
        }
    }
    let mut out: BTreeMap<Topic, TopicClassification> = BTreeMap::new();
    for ((topic, symbol), (scores, n_symbol_docs, rules)) in acc {
        let dist = ContributionDistribution::from_scores(symbol.clone(), n_symbol_docs, scores);
        let rule = rules
            .values()
            .next()
            .copied()
            .unwrap_or(MemorizationRule::None);
        let verdict = MemorizationVerdict {
            symbol: symbol.clone(),
            memorized_for: rules.into_keys().collect(),
            rule,
        };
        let topic_data = out.entry(topic).or_default();
        topic_data.dists.insert(symbol.clone(), dist);
        topic_data.verdicts.insert(symbol, verdict);
    }
    Ok(out)
}

const ASSOCIATIONS_HEADER: [&str; 6] =
    ["culture", "topic", "symbol", "kind", "evidence", "score"];

/// One `associations.csv` row as read back from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRow {
    pub culture: String,
    pub topic: Topic,
    pub symbol: String,
    pub kind: AssociationKind,
    pub evidence: String,
    pub score: Option<f64>,
}

/// Reads `associations.csv` back into rows.
pub fn read_associations(path: &Path) -> Result<Vec<AssociationRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let malformed = |line: usize, message: String| Error::MalformedRecord {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    if headers.iter().ne(ASSOCIATIONS_HEADER) {
        return Err(malformed(
            1,
            format!("expected header {ASSOCIATIONS_HEADER:?}"),
        ));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| malformed(line, e.to_string()))?;
        let field = |idx: usize| record.get(idx).unwrap_or_default();
        let kind = AssociationKind::parse(field(3))
            .ok_or_else(|| malformed(line, format!("unknown kind {:?}", field(3))))?;
        let score = match field(5) {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|e| malformed(line, format!("score: {e}")))?,
            ),
        };
        rows.push(AssociationRow {
            culture: field(0).to_string(),
            topic: Topic::from(field(1).to_string()),
            symbol: field(2).to_string(),
            kind,
            evidence: field(4).to_string(),
            score,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelSummary {
    pub labels: usize,
    pub by_kind: BTreeMap<String, usize>,
    pub path: PathBuf,
}

/// Labels every generated pair using the classification output and writes
/// `associations.csv`.
pub fn run_label(cfg: &RunConfig, opts: &StageOptions) -> Result<LabelSummary> {
    let index = load_index_file(cfg)?;
    let lexicon = load_lexicon(cfg)?;
    let memorized_path = cfg.out_path(MEMORIZED_FILE);
    require_stage_file(&memorized_path, "classification output", "classify")?;
    let by_topic = read_memorized(&memorized_path)?;
    let definitions: Vec<DefinitionRecord> = match &cfg.paths.definitions {
        Some(path) => load_definitions(path)?,
        None => {
            log::warn!("paths.definitions not set; skipping definition tracing");
            Vec::new()
        }
    };
    let external: BTreeMap<String, CountRecord> = match &cfg.paths.external_counts {
        Some(path) => import_external_counts(path)?,
        None => BTreeMap::new(),
    };
    ensure_out_dir(cfg)?;
    let csv_path = cfg.out_path(ASSOCIATIONS_FILE);
    check_overwrite(&csv_path, opts.force)?;
    let json_path = cfg.out_path("associations.json");
    if opts.json_mirror {
        check_overwrite(&json_path, opts.force)?;
    }

    let assoc_cfg = cfg.association();
    let mut labels: Vec<AssociationLabel> = Vec::new();
    for (topic, data) in &by_topic {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for symbol in data.dists.keys() {
            let total = match external.get(symbol) {
                Some(rec) => rec.total_occurrences,
                None => index.count(&index.query(symbol)?)?.total_occurrences,
            };
            counts.insert(symbol.clone(), total);
        }
        labels.extend(label_topic(
            topic,
            &data.dists,
            &data.verdicts,
            &definitions,
            &counts,
            lexicon.len(),
            &assoc_cfg,
        )?);
    }
    labels.sort_by(|a, b| {
        (&a.culture, a.topic.to_string(), &a.symbol).cmp(&(
            &b.culture,
            b.topic.to_string(),
            &b.symbol,
        ))
    });

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(ASSOCIATIONS_HEADER)
        .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
    let mut by_kind: BTreeMap<String, usize> = BTreeMap::new();
    let mut json_rows = Vec::new();
    for label in &labels {
        *by_kind.entry(label.kind.as_str().into()).or_insert(0) += 1;
        writer
            .write_record([
                label.culture.as_str(),
                &label.topic.to_string(),
                &label.symbol,
                label.kind.as_str(),
                &label.evidence.to_string(),
                &label.score.map(fmt_sig6).unwrap_or_default(),
            ])
            .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
        if opts.json_mirror {
            json_rows.push(AssociationRow {
                culture: label.culture.clone(),
                topic: label.topic.clone(),
                symbol: label.symbol.clone(),
                kind: label.kind,
                evidence: label.evidence.to_string(),
                score: label.score.map(round_sig6),
            });
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
    std::fs::write(&csv_path, bytes).map_err(|e| Error::io(&csv_path, e))?;
    if opts.json_mirror {
        write_json(&json_path, &json_rows)?;
    }
    log::info!("labeled {} pairs: {:?}", labels.len(), by_kind);
    Ok(LabelSummary {
        labels: labels.len(),
        by_kind,
        path: csv_path,
    })
}

#[derive(Debug, Clone, Serialize)]
struct DashboardFile {
    schema_version: u32,
    dashboards: Vec<DashboardRow>,
}

#[derive(Debug, Clone, Serialize)]
struct DashboardRow {
    culture: String,
    topic: String,
    n_responses: u64,
    fractions: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub dashboards: usize,
    pub path: PathBuf,
}

/// Aggregates label fractions per (culture, topic) into `dashboard.json`.
pub fn run_report(cfg: &RunConfig, opts: &StageOptions) -> Result<ReportSummary> {
    let assoc_path = cfg.out_path(ASSOCIATIONS_FILE);
    require_stage_file(&assoc_path, "association labels", "label")?;
    let rows = read_associations(&assoc_path)?;
    let generations = load_generations(required_path(&cfg.paths.generations, "paths.generations")?)?;
    let labels: Vec<AssociationLabel> = rows
        .into_iter()
        .map(|r| AssociationLabel {
            culture: r.culture,
            topic: r.topic,
            symbol: r.symbol,
            kind: r.kind,
            evidence: Evidence::None,
            score: r.score,
        })
        .collect();
    let dashboards: Vec<CultureDashboard> = build_dashboard(&labels, &generations)?;
    ensure_out_dir(cfg)?;
    let path = cfg.out_path(DASHBOARD_FILE);
    check_overwrite(&path, opts.force)?;
    let rows: Vec<DashboardRow> = dashboards
        .iter()
        .map(|d| DashboardRow {
            culture: d.culture.clone(),
            topic: d.topic.to_string(),
            n_responses: d.n_responses,
            fractions: AssociationKind::ALL
                .iter()
                .map(|&k| (k.as_str().to_string(), round_sig6(d.fractions.get(k))))
                .collect(),
        })
        .collect();
    write_json(
        &path,
        &DashboardFile {
            schema_version: SCHEMA_VERSION,
            dashboards: rows,
        },
    )?;
    log::info!("wrote {} dashboards", dashboards.len());
    Ok(ReportSummary {
        dashboards: dashboards.len(),
        path,
    })
}

const CORRELATIONS_HEADER: [&str; 4] = ["analysis", "spearman_rho", "kendall_tau", "n"];

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    pub analysis: String,
    pub spearman_rho: f64,
    pub kendall_tau: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelateSummary {
    pub rows: Vec<CorrelationRow>,
    pub path: PathBuf,
}

/// Correlates per-culture memorized-symbol counts with per-culture
/// document counts and writes `correlations.csv`. With `topic_filter`,
/// one row per topic using keyword-filtered document counts; otherwise a
/// single unfiltered row over all topics.
pub fn run_correlate(cfg: &RunConfig, opts: &StageOptions) -> Result<CorrelateSummary> {
    let index = load_index_file(cfg)?;
    let lexicon = load_lexicon(cfg)?;
    let memorized_path = cfg.out_path(MEMORIZED_FILE);
    require_stage_file(&memorized_path, "classification output", "classify")?;
    let by_topic = read_memorized(&memorized_path)?;
    ensure_out_dir(cfg)?;
    let csv_path = cfg.out_path(CORRELATIONS_FILE);
    check_overwrite(&csv_path, opts.force)?;
    let json_path = cfg.out_path("correlations.json");
    if opts.json_mirror {
        check_overwrite(&json_path, opts.force)?;
    }

    let mut rows: Vec<CorrelationRow> = Vec::new();
    if opts.topic_filter {
        let mut topics: Vec<&Topic> = by_topic.keys().collect();
        topics.sort_by_key(|t| t.to_string());
        for topic in topics {
            let Some(keywords) = topic_keywords(topic) else {
                log::warn!("no keyword list for topic {topic}; skipping");
                continue;
            };
            let memorized =
                memorization_counts(by_topic[topic].verdicts.values(), &lexicon);
            let docs = culture_doc_counts(&index, &lexicon, Some(keywords))?;
            let r = correlate_memorization_frequency(&memorized, &docs)?;
            rows.push(CorrelationRow {
                analysis: topic.to_string(),
                spearman_rho: round_sig6(r.spearman_rho),
                kendall_tau: round_sig6(r.kendall_tau),
                n: r.n,
            });
        }
    } else {
        let memorized = memorization_counts(
            by_topic.values().flat_map(|t| t.verdicts.values()),
            &lexicon,
        );
        let docs = culture_doc_counts(&index, &lexicon, None)?;
        let r = correlate_memorization_frequency(&memorized, &docs)?;
        rows.push(CorrelationRow {
            analysis: "all_topics".into(),
            spearman_rho: round_sig6(r.spearman_rho),
            kendall_tau: round_sig6(r.kendall_tau),
            n: r.n,
        });
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(CORRELATIONS_HEADER)
        .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
    for row in &rows {
        writer
            .write_record([
                row.analysis.as_str(),
                &fmt_sig6(row.spearman_rho),
                &fmt_sig6(row.kendall_tau),
                &row.n.to_string(),
            ])
            .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Output { path: csv_path.clone(), message: e.to_string() })?;
    std::fs::write(&csv_path, bytes).map_err(|e| Error::io(&csv_path, e))?;
    if opts.json_mirror {
        write_json(&json_path, &rows)?;
    }
    log::info!("wrote {} correlation rows", rows.len());
    Ok(CorrelateSummary {
        rows,
        path: csv_path,
    })
}

#[derive(Debug, Clone, Serialize)]
struct TopicsFile {
    schema_version: u32,
    reports: Vec<TopicReportRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopicReportRow {
    pub symbol: String,
    pub culture_a: String,
    pub culture_b: String,
    pub n_docs: usize,
    pub n_chunks: usize,
    pub keywords: Vec<Keyword>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topics: Option<Vec<Vec<Keyword>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopicsSummary {
    pub reports: usize,
    pub path: PathBuf,
}

/// Fits a topic model per cross-culture case found in `associations.csv`
/// and writes keyword lists to `topics.json`.
pub fn run_topics(cfg: &RunConfig, opts: &StageOptions) -> Result<TopicsSummary> {
    let index = load_index_file(cfg)?;
    let lexicon = load_lexicon(cfg)?;
    let assoc_path = cfg.out_path(ASSOCIATIONS_FILE);
    require_stage_file(&assoc_path, "association labels", "label")?;
    let rows = read_associations(&assoc_path)?;
    let mut triples: BTreeSet<(String, String, String)> = BTreeSet::new();
    for row in rows {
        if row.kind != AssociationKind::CrossCulture {
            continue;
        }
        if row.evidence.is_empty() {
            return Err(Error::Config(format!(
                "cross_culture row for ({}, {}) has no source culture in its evidence",
                row.culture, row.symbol
            )));
        }
        triples.insert((row.symbol, row.evidence, row.culture));
    }
    ensure_out_dir(cfg)?;
    let path = cfg.out_path(TOPICS_FILE);
    check_overwrite(&path, opts.force)?;

    let stopwords = match &cfg.paths.stopwords {
        Some(p) => StopwordList::with_extra_from_path(p)?,
        None => StopwordList::builtin(),
    };
    let params = cfg.lda_params();
    let rel_cfg = cfg.relevance();
    let (window, stride) = (cfg.lda.window, cfg.chunk_stride());
    let hook = cfg
        .lda
        .interpret_command
        .as_ref()
        .map(|command| InterpreterHook {
            command: command.clone(),
        });
    let jobs: Vec<(usize, &(String, String, String))> = triples.iter().enumerate().collect();
    let reports: Vec<TopicReportRow> = with_pool(cfg.output.threads, || {
        jobs.par_iter()
            .map(|(i, (symbol, culture_a, culture_b))| {
                let ords = select_cooccurrence_set(
                    &index, &lexicon, culture_a, culture_b, symbol, &rel_cfg,
                )?;
                let chunks = chunk_indexed_docs(&index, &ords, window, stride)?;
                let mut report = TopicReportRow {
                    symbol: symbol.clone(),
                    culture_a: culture_a.clone(),
                    culture_b: culture_b.clone(),
                    n_docs: ords.len(),
                    n_chunks: chunks.len(),
                    keywords: Vec::new(),
                    topics: None,
                    interpretation: None,
                };
                if chunks.is_empty() {
                    log::warn!(
                        "no contributory co-occurrence docs for ({symbol}, {culture_a}, {culture_b})"
                    );
                    return Ok(report);
                }
                let seed = cfg.output.seed.wrapping_add(*i as u64);
                let model = match fit_lda(&chunks, &params, &stopwords, seed) {
                    Ok(model) => model,
                    Err(Error::EmptyVocabulary) => {
                        log::warn!(
                            "all tokens filtered for ({symbol}, {culture_a}, {culture_b})"
                        );
                        return Ok(report);
                    }
                    Err(e) => return Err(e),
                };
                report.keywords =
                    extract_keywords(&model, &chunks, cfg.lda.keywords, DEFAULT_CANDIDATES_PER_TOPIC)
                        .into_iter()
                        .map(|k| Keyword {
                            term: k.term,
                            weight: round_sig6(k.weight),
                        })
                        .collect();
                if opts.dump_topics {
                    report.topics = Some(
                        (0..model.k)
                            .map(|t| {
                                model
                                    .top_words(t, 10)
                                    .into_iter()
                                    .map(|(term, w)| Keyword {
                                        term: term.to_string(),
                                        weight: round_sig6(w),
                                    })
                                    .collect()
                            })
                            .collect(),
                    );
                }
                if let Some(hook) = &hook {
                    report.interpretation = Some(interpret_topics(hook, &model, 10)?);
                }
                Ok(report)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let n_reports = reports.len();
    write_json(
        &path,
        &TopicsFile {
            schema_version: SCHEMA_VERSION,
            reports,
        },
    )?;
    log::info!("wrote {n_reports} topic reports");
    Ok(TopicsSummary {
        reports: n_reports,
        path,
    })
}
