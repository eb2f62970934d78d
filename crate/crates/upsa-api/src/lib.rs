//! Request/response types shared by the paraphrasing service and its
//! clients. Model payloads travel base64-encoded inside JSON.

use serde::{Deserialize, Serialize};

/// Hyperparameters and mode switches of a paraphrase run. Defaults are the
/// validated values: P=8, Q=1, S=1, T_init=3e-2, C=3e-4, N=100, K=50.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub t_init: f64,
    pub c_rate: f64,
    pub iters: usize,
    pub top_k: usize,
    pub min_length: usize,
    pub max_keywords: usize,
    pub alpha: f64,
    pub seed: u64,
    pub fixed_temp: bool,
    pub no_copy: bool,
    pub no_sem_key: bool,
    pub no_sem_sen: bool,
    pub no_exp: bool,
    pub raw_fluency: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 8.0,
            q: 1.0,
            s: 1.0,
            t_init: 3e-2,
            c_rate: 3e-4,
            iters: 100,
            top_k: 50,
            min_length: 3,
            max_keywords: 5,
            alpha: 0.9,
            seed: 0,
            fixed_temp: false,
            no_copy: false,
            no_sem_key: false,
            no_sem_sen: false,
            no_exp: false,
            raw_fluency: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainRequest {
    pub corpus: Vec<String>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
}

fn default_order() -> usize {
    3
}

fn default_min_count() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainResponse {
    /// Line-per-surface vocabulary text.
    pub vocab: String,
    /// Base64 of the forward model container.
    pub forward: String,
    /// Base64 of the backward model container.
    pub backward: String,
    pub vocab_size: usize,
    pub sentences: usize,
}

/// Model artifacts as they travel over the wire.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    pub vocab: String,
    pub forward: String,
    pub backward: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParaphraseRequest {
    pub models: ModelBundle,
    /// Embedding table in the text format (`surface v1 ... vd`).
    pub embeddings: String,
    /// Stopword list, one word per line; the bundled English list when
    /// absent.
    pub stopwords: Option<String>,
    pub inputs: Vec<String>,
    #[serde(default)]
    pub config: RunConfig,
    #[serde(default)]
    pub with_trace: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParaphraseResponse {
    pub outputs: Vec<String>,
    /// Per-input JSONL search traces when requested.
    pub traces: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateRequest {
    /// `source<TAB>candidate<TAB>reference...` lines.
    pub tsv: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.9
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Report {
    pub bleu: f64,
    pub ibleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub cases: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub report: Report,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRequest {
    pub models: ModelBundle,
    pub embeddings: String,
    pub stopwords: Option<String>,
    /// `source<TAB>reference...` lines.
    pub tsv: String,
    #[serde(default)]
    pub config: RunConfig,
    /// Initial temperatures to test; the service's default grid when empty.
    #[serde(default)]
    pub t_inits: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    pub t_init: f64,
    pub mean_ibleu: f64,
    pub mean_bleu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResponse {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
}
