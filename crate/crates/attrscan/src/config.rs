//! Run configuration: one TOML or JSON file covering paths, thresholds,
//! topic-model settings, and output options. Command-line flags override
//! file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::associations::AssociationConfig;
use crate::error::{Error, Result};
use crate::memorization::MemorizationConfig;
use crate::relevance::RelevanceConfig;
use crate::topics::LdaParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub paths: PathsConfig,
    pub thresholds: ThresholdConfig,
    pub lda: LdaConfig,
    pub output: OutputConfig,
    /// Cultures dropped from the lexicon before any stage runs
    /// (leave-one-out reruns).
    pub exclude_cultures: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    /// JSONL corpus: {"id", "text", optional "source"} per line.
    pub corpus: Option<PathBuf>,
    /// JSON object: culture name to alias list.
    pub cultures: Option<PathBuf>,
    /// JSONL generations: {"generation_id", "culture", "topic", "symbols"}.
    pub generations: Option<PathBuf>,
    /// JSONL definitions: {"symbol", "culture", "definition"}.
    pub definitions: Option<PathBuf>,
    /// CSV overriding corpus occurrence counts: ngram,doc_freq,total_occurrences.
    pub external_counts: Option<PathBuf>,
    /// Extra stopwords for topic modeling, one per line.
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    /// Additive smoothing in the signal-to-noise denominator.
    pub epsilon: f64,
    /// Token-distance bound for global relevance.
    pub max_seq_len: usize,
    /// Sentence-distance bound for local relevance.
    pub sent_threshold: usize,
    /// Lower signal-to-noise bound for local relevance.
    pub snr_low: f64,
    /// Minimum z-score for memorization.
    pub z_threshold: f64,
    /// At or below this many generating cultures, the argmax fallback runs.
    pub small_sample_cutoff: usize,
    /// Fraction of the lexicon a diffuse symbol must be generated for.
    pub diffuse_ratio: f64,
    /// Minimum F1 to trace a symbol to a definition.
    pub f1_threshold: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            epsilon: 1.0,
            max_seq_len: 2048,
            sent_threshold: 2,
            snr_low: -1.0,
            z_threshold: 2.6,
            small_sample_cutoff: 5,
            diffuse_ratio: 0.5,
            f1_threshold: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaConfig {
    pub topics: usize,
    /// Defaults to 50 / topics when unset.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    /// Sliding-window size in tokens for chunking.
    pub window: usize,
    /// Window stride; defaults to the window (non-overlapping).
    pub stride: Option<usize>,
    /// Keywords per report.
    pub keywords: usize,
    /// Optional `sh -c` command interpreting topic word lists.
    pub interpret_command: Option<String>,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 5,
            alpha: None,
            beta: 0.01,
            iterations: 500,
            window: 2048,
            stride: None,
            keywords: 5,
            interpret_command: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub seed: u64,
    /// Worker threads for parallel stages; defaults to the machine.
    pub threads: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            seed: 42,
            threads: None,
        }
    }
}

impl RunConfig {
    /// Loads a config file; `.json` parses as JSON, anything else as TOML.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.relevance().validate()?;
        self.memorization().validate()?;
        self.association().validate()?;
        self.lda_params().validate()?;
        let (window, stride) = (self.lda.window, self.chunk_stride());
        if window == 0 {
            return Err(Error::Config("lda.window must be at least 1 token".into()));
        }
        if stride == 0 || stride > window {
            return Err(Error::Config(format!(
                "lda.stride must be in 1..={window}, got {stride}"
            )));
        }
        if self.lda.keywords == 0 {
            return Err(Error::Config("lda.keywords must be at least 1".into()));
        }
        Ok(())
    }

    pub fn relevance(&self) -> RelevanceConfig {
        RelevanceConfig {
            max_seq_len: self.thresholds.max_seq_len,
            sent_threshold: self.thresholds.sent_threshold,
            snr_low: self.thresholds.snr_low,
            epsilon: self.thresholds.epsilon,
        }
    }

    pub fn memorization(&self) -> MemorizationConfig {
        MemorizationConfig {
            z_threshold: self.thresholds.z_threshold,
            small_sample_cutoff: self.thresholds.small_sample_cutoff,
        }
    }

    pub fn association(&self) -> AssociationConfig {
        AssociationConfig {
            diffuse_ratio: self.thresholds.diffuse_ratio,
            f1_threshold: self.thresholds.f1_threshold,
        }
    }

    pub fn lda_params(&self) -> LdaParams {
        LdaParams {
            k: self.lda.topics,
            alpha: self
                .lda
                .alpha
                .unwrap_or(50.0 / self.lda.topics.max(1) as f64),
            beta: self.lda.beta,
            iterations: self.lda.iterations,
        }
    }

    pub fn chunk_stride(&self) -> usize {
        self.lda.stride.unwrap_or(self.lda.window)
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.output.dir.join(name)
    }
}
