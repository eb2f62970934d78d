//! The candidate sentence generator: proposes one word-level edit per step,
//! sampling the edit word from an objective-induced distribution over a
//! copy-augmented top-K vocabulary.

use rand::Rng;

use crate::ngram::LanguageModel;
use crate::objective::{total_log_score, ObjectiveConfig, ScoreBreakdown};
use crate::text::{Sentence, Token, BOS_ID, EOS_ID};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EditOp {
    Replace,
    Insert,
    Delete,
}

/// Knobs of the generator.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorConfig {
    /// Size of the language-model-ranked candidate vocabulary.
    pub top_k: usize,
    /// Delete proposals that would shrink below this length degrade to the
    /// identity candidate.
    pub min_length: usize,
    /// Insert proposals that would grow beyond this length degrade to the
    /// identity candidate; `None` leaves length unbounded.
    pub max_length: Option<usize>,
    /// Augment the candidate vocabulary with the tokens of the input.
    pub copy: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { top_k: 50, min_length: 3, max_length: None, copy: true }
    }
}

/// One proposed edit with its fully formed candidate and score.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub op: EditOp,
    /// 1-based for Replace/Delete; for Insert, the word goes after token k
    /// (k = 0 inserts at the front).
    pub position: usize,
    pub word: Option<Token>,
    pub candidate: Sentence,
    pub candidate_score: ScoreBreakdown,
}

/// Ordered candidate vocabulary: LM-ranked top-K first, then the not yet
/// present tokens of the input sentence (the copy set).
#[derive(Debug, Clone)]
pub struct CandidateVocab {
    tokens: Vec<Token>,
    top_k_len: usize,
}

impl CandidateVocab {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of leading entries that came from the LM ranking.
    pub fn top_k_len(&self) -> usize {
        self.top_k_len
    }

    pub fn contains_surface(&self, surface: &str) -> bool {
        self.tokens.iter().any(|t| t.surface == surface)
    }
}

/// Pure functional edit application. `position` is 1-based for Replace and
/// Delete; Insert places the word after token `position`.
pub fn apply_edit(x: &Sentence, op: EditOp, position: usize, word: Option<&Token>) -> Result<Sentence> {
    let l = x.len();
    let mut tokens = x.tokens().to_vec();
    match op {
        EditOp::Replace => {
            if position < 1 || position > l {
                return Err(Error::Position { position, length: l });
            }
            let w = word.ok_or(Error::Position { position, length: l })?;
            tokens[position - 1] = w.clone();
        }
        EditOp::Insert => {
            if position > l {
                return Err(Error::Position { position, length: l });
            }
            let w = word.ok_or(Error::Position { position, length: l })?;
            tokens.insert(position, w.clone());
        }
        EditOp::Delete => {
            if position < 1 || position > l || word.is_some() {
                return Err(Error::Position { position, length: l });
            }
            tokens.remove(position - 1);
            if tokens.is_empty() {
                return Err(Error::Position { position, length: l });
            }
        }
    }
    Sentence::new(tokens)
}

/// The candidate vocabulary at an edit position: top-K words under the
/// product of forward-prefix and backward-suffix probabilities, unioned with
/// the tokens of the input sentence when the copy mechanism is on.
///
/// BOS and EOS are never proposed.
pub fn topk_vocab(
    x_t: &Sentence,
    x_0: &Sentence,
    position: usize,
    op: EditOp,
    forward: &LanguageModel,
    backward: &LanguageModel,
    cfg: &GeneratorConfig,
) -> CandidateVocab {
    debug_assert!(matches!(op, EditOp::Replace | EditOp::Insert));
    let ids = x_t.ids();
    // left context = tokens before the slot; right context = tokens after it
    let (left, right): (&[u32], &[u32]) = match op {
        EditOp::Replace => (&ids[..position - 1], &ids[position..]),
        EditOp::Insert => (&ids[..position], &ids[position..]),
        EditOp::Delete => unreachable!("Delete proposals carry no word"),
    };
    // backward model scores the reversed suffix as its context
    let mut right_rev: Vec<u32> = right.to_vec();
    right_rev.reverse();

    let vocab = forward.vocab();
    let mut scored: Vec<(u32, f64)> = (0..vocab.len() as u32)
        .filter(|&id| id != BOS_ID && id != EOS_ID)
        .map(|id| {
            let fwd = forward.word_prob(left, id);
            let bwd = backward.word_prob(&right_rev, id);
            (id, fwd * bwd)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(cfg.top_k);

    let mut tokens: Vec<Token> = scored
        .into_iter()
        .map(|(id, _)| Token::new(vocab.surface_of(id).unwrap(), id))
        .collect();
    let top_k_len = tokens.len();
    if cfg.copy {
        for tok in x_0.tokens() {
            if tok.id == BOS_ID || tok.id == EOS_ID {
                continue;
            }
            if !tokens.iter().any(|t| t.surface == tok.surface) {
                tokens.push(tok.clone());
            }
        }
    }
    CandidateVocab { tokens, top_k_len }
}

/// Samples a word from the objective-induced distribution over the candidate
/// vocabulary: each word forms the full candidate sentence and weighs in
/// proportionally to its objective value. All-zero weights fall back to a
/// uniform draw.
pub fn sample_word(
    vocab: &CandidateVocab,
    x_t: &Sentence,
    position: usize,
    op: EditOp,
    cfg: &ObjectiveConfig,
    rng: &mut impl Rng,
) -> (Token, Sentence, ScoreBreakdown) {
    assert!(!vocab.is_empty(), "candidate vocabulary must be non-empty");
    let mut candidates: Vec<(Sentence, ScoreBreakdown, f64)> = Vec::with_capacity(vocab.len());
    let mut total = 0.0;
    for tok in vocab.tokens() {
        let candidate = apply_edit(x_t, op, position, Some(tok)).expect("slot validated by caller");
        let breakdown = total_log_score(&candidate, cfg);
        let weight = breakdown.score();
        total += weight;
        candidates.push((candidate, breakdown, weight));
    }
    let idx = if total > 0.0 {
        let mut draw = rng.gen::<f64>() * total;
        let mut chosen = candidates.len() - 1;
        for (i, (_, _, w)) in candidates.iter().enumerate() {
            if draw < *w {
                chosen = i;
                break;
            }
            draw -= *w;
        }
        chosen
    } else {
        rng.gen_range(0..candidates.len())
    };
    let (candidate, breakdown, _) = candidates.swap_remove(idx);
    (vocab.tokens()[idx].clone(), candidate, breakdown)
}

/// Draws an edit operation and position uniformly, then forms the full
/// proposal. Replace and Insert delegate to [`topk_vocab`] + [`sample_word`];
/// Delete removes the token directly, degrading to the identity candidate
/// when the sentence is already at `min_length`.
pub fn propose(
    x_t: &Sentence,
    x_0: &Sentence,
    forward: &LanguageModel,
    backward: &LanguageModel,
    obj: &ObjectiveConfig,
    gen: &GeneratorConfig,
    rng: &mut impl Rng,
) -> Proposal {
    let l = x_t.len();
    let op = match rng.gen_range(0..3u8) {
        0 => EditOp::Replace,
        1 => EditOp::Insert,
        _ => EditOp::Delete,
    };
    match op {
        EditOp::Insert if gen.max_length.is_some_and(|m| l >= m) => {
            let position = rng.gen_range(0..=l);
            let candidate = x_t.clone();
            let candidate_score = total_log_score(&candidate, obj);
            Proposal { op, position, word: None, candidate, candidate_score }
        }
        EditOp::Replace | EditOp::Insert => {
            let position = match op {
                EditOp::Replace => rng.gen_range(1..=l),
                _ => rng.gen_range(0..=l),
            };
            let vocab = topk_vocab(x_t, x_0, position, op, forward, backward, gen);
            let (word, candidate, candidate_score) =
                sample_word(&vocab, x_t, position, op, obj, rng);
            Proposal { op, position, word: Some(word), candidate, candidate_score }
        }
        EditOp::Delete => {
            let position = rng.gen_range(1..=l);
            let candidate = if l <= gen.min_length {
                x_t.clone()
            } else {
                apply_edit(x_t, EditOp::Delete, position, None).expect("position in range")
            };
            let candidate_score = total_log_score(&candidate, obj);
            Proposal { op, position, word: None, candidate, candidate_score }
        }
    }
}
