//! The search objective: semantic preservation x expression diversity x
//! language fluency, computed in log space.
//!
//! Fluency is the per-word geometric mean of the forward-LM probability by
//! default (the raw product shrinks exponentially with length and would
//! flatten the acceptance exponent at the default initial temperature); the
//! unnormalized product is available behind `raw_fluency`.

use crate::embed::{cosine, EmbeddingTable};
use crate::keywords::KeywordSet;
use crate::metrics::{sentence_bleu, BleuConfig};
use crate::ngram::LanguageModel;
use crate::text::Sentence;

/// Power weights and factor switches for the objective.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveWeights {
    /// Keyword-similarity power.
    pub p: f64,
    /// Sentence-similarity power.
    pub q: f64,
    /// Diversity power.
    pub s: f64,
    pub use_sem_key: bool,
    pub use_sem_sen: bool,
    pub use_exp: bool,
    /// Score fluency as the raw probability product instead of the
    /// length-normalized geometric mean.
    pub raw_fluency: bool,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            p: 8.0,
            q: 1.0,
            s: 1.0,
            use_sem_key: true,
            use_sem_sen: true,
            use_exp: true,
            raw_fluency: false,
        }
    }
}

/// Everything needed to score a candidate against a fixed input sentence.
pub struct ObjectiveConfig<'a> {
    pub weights: ObjectiveWeights,
    pub forward_lm: &'a LanguageModel,
    pub embeddings: &'a EmbeddingTable,
    pub keywords: &'a KeywordSet,
    pub source: &'a Sentence,
}

/// Log-space factor breakdown; -inf marks a zero factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBreakdown {
    pub log_sem_key: f64,
    pub log_sem_sen: f64,
    pub log_exp: f64,
    pub log_flu: f64,
    pub log_total: f64,
}

impl ScoreBreakdown {
    /// Raw objective value; 0 when any factor is 0.
    pub fn score(&self) -> f64 {
        if self.log_total == f64::NEG_INFINITY {
            0.0
        } else {
            self.log_total.exp()
        }
    }
}

/// Keyword similarity: min over keywords of the best cosine match in `x`,
/// clamped to [0, 1]. Empty keyword set scores 1. A keyword without an
/// embedding scores 1 if its surface appears verbatim in `x`, else 0.
pub fn sem_key(x: &Sentence, cfg: &ObjectiveConfig) -> f64 {
    let mut min_score = 1.0f64;
    for (keyword, _) in cfg.keywords.entries() {
        let score = match cfg.embeddings.get(&keyword.surface) {
            Some(kv) => {
                let mut best = 0.0f64;
                for tok in x.tokens() {
                    if tok.surface == keyword.surface {
                        best = 1.0;
                        break;
                    }
                    if let Some(wv) = cfg.embeddings.get(&tok.surface) {
                        let c = cosine(wv, kv).expect("table vectors share one dimension");
                        best = best.max(c.max(0.0));
                    }
                }
                best
            }
            None => {
                if x.tokens().iter().any(|t| t.surface == keyword.surface) {
                    1.0
                } else {
                    0.0
                }
            }
        };
        min_score = min_score.min(score);
    }
    min_score
}

/// Sentence similarity: cosine of averaged sentence vectors, clamped to
/// [0, 1].
pub fn sem_sen(x: &Sentence, cfg: &ObjectiveConfig) -> f64 {
    let xv = cfg.embeddings.sentence_vector(x);
    let sv = cfg.embeddings.sentence_vector(cfg.source);
    cosine(&xv, &sv).expect("sentence vectors share one dimension").max(0.0)
}

/// Expression diversity: 1 - BLEU(x, source).
pub fn exp_diversity(x: &Sentence, cfg: &ObjectiveConfig) -> f64 {
    1.0 - sentence_bleu(x, std::slice::from_ref(cfg.source), BleuConfig::default())
}

fn powered_log(value: f64, power: f64) -> f64 {
    if value <= 0.0 {
        if power == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        power * value.ln()
    }
}

/// Combined log score of the candidate.
pub fn total_log_score(x: &Sentence, cfg: &ObjectiveConfig) -> ScoreBreakdown {
    let w = &cfg.weights;
    let log_sem_key = if w.use_sem_key { powered_log(sem_key(x, cfg), w.p) } else { 0.0 };
    let log_sem_sen = if w.use_sem_sen { powered_log(sem_sen(x, cfg), w.q) } else { 0.0 };
    let log_exp = if w.use_exp { powered_log(exp_diversity(x, cfg), w.s) } else { 0.0 };
    let raw_log_flu = cfg.forward_lm.sequence_prob(x);
    let log_flu = if w.raw_fluency {
        raw_log_flu
    } else {
        raw_log_flu / LanguageModel::scored_positions(x.len()) as f64
    };
    let log_total = log_sem_key + log_sem_sen + log_exp + log_flu;
    ScoreBreakdown { log_sem_key, log_sem_sen, log_exp, log_flu, log_total }
}
