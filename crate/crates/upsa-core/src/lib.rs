//! Unsupervised paraphrase generation by simulated annealing.
//!
//! The pipeline rewrites an input sentence through a sequence of word-level
//! edits (replace / insert / delete), scored by a product objective of
//! semantic preservation, expression diversity, and language fluency, and
//! accepted or rejected under a linearly decaying temperature.
//!
//! Modules map onto the stages of the pipeline:
//!
//! * [`text`] — tokenization and vocabulary handling
//! * [`ngram`] — Kneser–Ney smoothed n-gram language models (forward/backward)
//! * [`embed`] — word-embedding table, cosine similarity, sentence vectors
//! * [`keywords`] — RAKE keyword extraction from the input sentence
//! * [`metrics`] — sentence-level BLEU, iBLEU, and ROUGE
//! * [`objective`] — the combined search objective in log space
//! * [`generate`] — the candidate sentence generator (edit proposals)
//! * [`anneal`] — the annealing loop, acceptance rule, and search trace
//! * [`pipeline`] — batch paraphrasing, evaluation, and the temperature sweep

pub mod anneal;
pub mod embed;
mod error;
pub mod generate;
pub mod keywords;
pub mod metrics;
pub mod ngram;
pub mod objective;
pub mod pipeline;
pub mod text;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
