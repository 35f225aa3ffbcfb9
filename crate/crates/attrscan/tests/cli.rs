//! End-to-end behavior of the attrscan binary: exit codes, overwrite
//! refusals, JSON mirrors, and flag precedence over the config file.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mini(name: &str) -> String {
    format!("{}/testdata/mini/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn attrscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attrscan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

/// Config pointing at the bundled mini fixture with the given output dir.
fn mini_config(dir: &Path, out: &Path) -> PathBuf {
    write_config(
        dir,
        &format!(
            "[paths]\ncorpus = {:?}\ncultures = {:?}\ngenerations = {:?}\n\
             definitions = {:?}\nexternal_counts = {:?}\n\n[output]\ndir = {:?}\n",
            mini("corpus.jsonl"),
            mini("cultures.json"),
            mini("generations.jsonl"),
            mini("definitions.jsonl"),
            mini("external_counts.csv"),
            out
        ),
    )
}

fn run_ok(args: &[&str]) -> Output {
    let out = attrscan(args);
    assert!(
        out.status.success(),
        "attrscan {:?} failed:\n{}",
        args,
        stderr_of(&out)
    );
    out
}

#[test]
fn missing_corpus_exits_2_and_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[paths]\ncorpus = \"/nonexistent/nowhere.jsonl\"\n");
    let out = attrscan(&[
        "index",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("/nonexistent/nowhere.jsonl"));
}

#[test]
fn refuses_to_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = mini_config(tmp.path(), &out_dir);
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    let again = attrscan(&["index", "--config", cfg]);
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr_of(&again).contains("--force"));
    run_ok(&["index", "--config", cfg, "--force"]);
}

#[test]
fn stage_order_is_enforced() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini_config(tmp.path(), &tmp.path().join("out"));
    let cfg = cfg.to_str().unwrap();

    let out = attrscan(&["classify", "--config", cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("run `attrscan index` first"));

    run_ok(&["index", "--config", cfg]);
    let out = attrscan(&["label", "--config", cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("run `attrscan classify` first"));
}

#[test]
fn unknown_generation_culture_is_rejected_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let gens = tmp.path().join("generations.jsonl");
    std::fs::write(
        &gens,
        "{\"generation_id\": \"g-1\", \"culture\": \"Atlantis\", \
         \"topic\": \"food\", \"symbols\": [\"rice\"]}\n",
    )
    .unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[paths]\ncorpus = {:?}\ncultures = {:?}\ngenerations = {:?}\n\n[output]\ndir = {:?}\n",
            mini("corpus.jsonl"),
            mini("cultures.json"),
            gens,
            tmp.path().join("out")
        ),
    );
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    let out = attrscan(&["classify", "--config", cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("Atlantis"), "stderr: {err}");
    assert!(err.contains("missing from the lexicon"), "stderr: {err}");
}

#[test]
fn empty_generations_yield_header_only_output() {
    let tmp = tempfile::tempdir().unwrap();
    let gens = tmp.path().join("generations.jsonl");
    std::fs::write(&gens, "").unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[paths]\ncorpus = {:?}\ncultures = {:?}\ngenerations = {:?}\n\n[output]\ndir = {:?}\n",
            mini("corpus.jsonl"),
            mini("cultures.json"),
            gens,
            out_dir
        ),
    );
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    run_ok(&["classify", "--config", cfg]);
    let csv = std::fs::read_to_string(out_dir.join("memorized.csv")).unwrap();
    assert_eq!(csv, "symbol,topic,culture,n_contributory,n_symbol_docs,cs,z,rule\n");
}

#[test]
fn correlate_needs_at_least_two_cultures() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.jsonl");
    std::fs::write(
        &corpus,
        "{\"id\": \"d1\", \"text\": \"japan celebrates rice harvest festivals\"}\n",
    )
    .unwrap();
    let cultures = tmp.path().join("cultures.json");
    std::fs::write(&cultures, "{\"Japan\": [\"japan\"]}").unwrap();
    let gens = tmp.path().join("generations.jsonl");
    std::fs::write(
        &gens,
        "{\"generation_id\": \"g-1\", \"culture\": \"Japan\", \
         \"topic\": \"food\", \"symbols\": [\"rice\"]}\n",
    )
    .unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[paths]\ncorpus = {corpus:?}\ncultures = {cultures:?}\ngenerations = {gens:?}\n\n\
             [output]\ndir = {:?}\n",
            tmp.path().join("out")
        ),
    );
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    run_ok(&["classify", "--config", cfg]);
    let out = attrscan(&["correlate", "--config", cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("need at least 2 cultures"));
}

#[test]
fn topics_degrade_to_empty_keywords_without_cooccurrence_docs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = mini_config(tmp.path(), &out_dir);
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    run_ok(&["classify", "--config", cfg]);
    run_ok(&["label", "--config", cfg]);
    let out = run_ok(&["topics", "--config", cfg]);
    assert!(stderr_of(&out).contains("no contributory co-occurrence docs"));

    let topics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("topics.json")).unwrap())
            .unwrap();
    let reports = topics["reports"].as_array().unwrap();
    assert!(reports
        .iter()
        .any(|r| r["keywords"].as_array().unwrap().is_empty() && r["n_docs"] == 0));
    assert!(reports
        .iter()
        .any(|r| !r["keywords"].as_array().unwrap().is_empty()));
}

#[test]
fn forced_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = mini_config(tmp.path(), &out_dir);
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    run_ok(&["classify", "--config", cfg]);
    run_ok(&["label", "--config", cfg]);
    run_ok(&["correlate", "--config", cfg, "--topic-filter"]);
    run_ok(&["topics", "--config", cfg]);

    let files = ["memorized.csv", "associations.csv", "correlations.csv", "topics.json"];
    let before: Vec<Vec<u8>> = files
        .iter()
        .map(|f| std::fs::read(out_dir.join(f)).unwrap())
        .collect();

    run_ok(&["classify", "--config", cfg, "--force"]);
    run_ok(&["label", "--config", cfg, "--force"]);
    run_ok(&["correlate", "--config", cfg, "--topic-filter", "--force"]);
    run_ok(&["topics", "--config", cfg, "--force"]);
    for (f, want) in files.iter().zip(&before) {
        let got = std::fs::read(out_dir.join(f)).unwrap();
        assert_eq!(&got, want, "{f} changed across a forced rerun");
    }
}

#[test]
fn json_flag_mirrors_tabular_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = mini_config(tmp.path(), &out_dir);
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    run_ok(&["classify", "--config", cfg, "--json"]);
    run_ok(&["label", "--config", cfg, "--json"]);
    run_ok(&["correlate", "--config", cfg, "--json"]);

    let rows = |name: &str| -> usize {
        let text = std::fs::read_to_string(out_dir.join(name)).unwrap();
        serde_json::from_str::<serde_json::Value>(&text)
            .unwrap()
            .as_array()
            .unwrap()
            .len()
    };
    let csv_rows = |name: &str| -> usize {
        std::fs::read_to_string(out_dir.join(name)).unwrap().lines().count() - 1
    };
    assert_eq!(rows("memorized.json"), csv_rows("memorized.csv"));
    assert_eq!(rows("associations.json"), csv_rows("associations.csv"));
    assert_eq!(rows("correlations.json"), csv_rows("correlations.csv"));
    assert_eq!(rows("correlations.json"), 1);
}

#[test]
fn every_output_declares_its_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = mini_config(tmp.path(), &out_dir);
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    run_ok(&["classify", "--config", cfg]);
    run_ok(&["label", "--config", cfg]);
    run_ok(&["report", "--config", cfg]);
    run_ok(&["correlate", "--config", cfg]);
    run_ok(&["topics", "--config", cfg]);

    let first_line = |name: &str| -> String {
        std::fs::read_to_string(out_dir.join(name))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(
        first_line("memorized.csv"),
        "symbol,topic,culture,n_contributory,n_symbol_docs,cs,z,rule"
    );
    assert_eq!(
        first_line("associations.csv"),
        "culture,topic,symbol,kind,evidence,score"
    );
    assert_eq!(first_line("correlations.csv"), "analysis,spearman_rho,kendall_tau,n");
    for name in ["dashboard.json", "topics.json", "index.manifest.json"] {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join(name)).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1, "{name}");
    }
}

#[test]
fn out_dir_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config_dir = tmp.path().join("config-out");
    let flag_dir = tmp.path().join("flag-out");
    let cfg = mini_config(tmp.path(), &config_dir);

    run_ok(&[
        "index",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        flag_dir.to_str().unwrap(),
    ]);
    assert!(flag_dir.join("index.bin").is_file());
    assert!(!config_dir.exists());
}

#[test]
fn threads_flag_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = mini_config(tmp.path(), &out_dir);
    let cfg = cfg.to_str().unwrap();

    run_ok(&["index", "--config", cfg]);
    run_ok(&["classify", "--config", cfg, "--threads", "2"]);
    assert!(out_dir.join("memorized.csv").is_file());
}
