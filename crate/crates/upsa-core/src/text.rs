//! Tokenization, detokenization, and vocabulary management.
//!
//! Tokenization is whitespace splitting plus lowercasing; no subword
//! segmentation. Out-of-vocabulary tokens map to the UNK id but keep their
//! original (lowercased) surface so the copy mechanism and the metrics can
//! still see the rare word.

use std::collections::HashMap;
use std::sync::Arc;

use crate::{Error, Result};

pub const UNK_SURFACE: &str = "<unk>";
pub const BOS_SURFACE: &str = "<s>";
pub const EOS_SURFACE: &str = "</s>";

/// A single word with its vocabulary id. OOV words carry `vocab.unk_id()`
/// but keep their own surface.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub id: u32,
}

impl Token {
    pub fn new(surface: impl Into<String>, id: u32) -> Self {
        Token { surface: surface.into(), id }
    }
}

/// An immutable, non-empty token sequence: the search state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // l >= 1 by construction
    }

    pub fn ids(&self) -> Vec<u32> {
        self.tokens.iter().map(|t| t.id).collect()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    /// Token-reversed copy, used for backward language models.
    pub fn reversed(&self) -> Sentence {
        let mut tokens = self.tokens.clone();
        tokens.reverse();
        Sentence { tokens }
    }
}

impl std::fmt::Display for Sentence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", detokenize(self))
    }
}

/// Bijection between surfaces and ids with reserved UNK/BOS/EOS entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    surfaces: Vec<String>,
    index: HashMap<String, u32>,
}

pub const UNK_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;

impl Vocabulary {
    /// Builds a vocabulary from explicit non-reserved surfaces, in order.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut surfaces = vec![
            UNK_SURFACE.to_string(),
            BOS_SURFACE.to_string(),
            EOS_SURFACE.to_string(),
        ];
        let mut index = HashMap::new();
        for (i, s) in surfaces.iter().enumerate() {
            index.insert(s.clone(), i as u32);
        }
        for w in words {
            let w = w.into();
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Format(format!("invalid vocabulary surface {w:?}")));
            }
            if index.contains_key(&w) {
                return Err(Error::Format(format!("duplicate vocabulary surface {w:?}")));
            }
            index.insert(w.clone(), surfaces.len() as u32);
            surfaces.push(w);
        }
        Ok(Vocabulary { surfaces, index })
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        false // reserved entries are always present
    }

    pub fn unk_id(&self) -> u32 {
        UNK_ID
    }

    pub fn bos_id(&self) -> u32 {
        BOS_ID
    }

    pub fn eos_id(&self) -> u32 {
        EOS_ID
    }

    pub fn id_of(&self, surface: &str) -> Option<u32> {
        self.index.get(surface).copied()
    }

    pub fn surface_of(&self, id: u32) -> Option<&str> {
        self.surfaces.get(id as usize).map(String::as_str)
    }

    /// Non-reserved surfaces in id order.
    pub fn words(&self) -> impl Iterator<Item = (&str, u32)> {
        self.surfaces
            .iter()
            .enumerate()
            .skip(3)
            .map(|(i, s)| (s.as_str(), i as u32))
    }

    /// All surfaces in id order, including the reserved entries.
    pub fn all_surfaces(&self) -> &[String] {
        &self.surfaces
    }
}

/// Whitespace-split, lowercase tokenization against a vocabulary.
pub fn tokenize(text: &str, vocab: &Vocabulary) -> Result<Sentence> {
    let lowered = text.trim().to_lowercase();
    if lowered.is_empty() {
        return Err(Error::EmptyInput);
    }
    let tokens = lowered
        .split_whitespace()
        .map(|w| {
            let id = vocab.id_of(w).unwrap_or(UNK_ID);
            Token::new(w, id)
        })
        .collect();
    Sentence::new(tokens)
}

/// Tokenizes without a vocabulary: every token carries the UNK id. Useful
/// where only surfaces matter (the evaluation metrics).
pub fn tokenize_surfaces(text: &str) -> Result<Sentence> {
    let lowered = text.trim().to_lowercase();
    if lowered.is_empty() {
        return Err(Error::EmptyInput);
    }
    Sentence::new(lowered.split_whitespace().map(|w| Token::new(w, UNK_ID)).collect())
}

/// Joins surfaces with single spaces.
pub fn detokenize(s: &Sentence) -> String {
    s.surfaces().join(" ")
}

/// Builds a vocabulary from a corpus of lines, keeping every surface whose
/// frequency is at least `min_count`. Ordering is deterministic: descending
/// frequency, ties broken by lexicographic surface.
pub fn build_vocabulary<I, S>(corpus: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut saw_sentence = false;
    for line in corpus {
        let line = line.as_ref().trim().to_lowercase();
        if line.is_empty() {
            continue;
        }
        saw_sentence = true;
        for w in line.split_whitespace() {
            *counts.entry(w.to_string()).or_insert(0) += 1;
        }
    }
    if !saw_sentence {
        return Err(Error::EmptyCorpus);
    }
    let mut entries: Vec<(String, u64)> =
        counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::from_words(entries.into_iter().map(|(w, _)| w))
}

/// Writes a vocabulary as one surface per line in id order (reserved entries
/// included).
pub fn vocabulary_to_text(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for s in vocab.all_surfaces() {
        out.push_str(s);
        out.push('\n');
    }
    out
}

/// Parses the line-per-surface format written by [`vocabulary_to_text`].
pub fn vocabulary_from_text(text: &str) -> Result<Vocabulary> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 3
        || lines[0] != UNK_SURFACE
        || lines[1] != BOS_SURFACE
        || lines[2] != EOS_SURFACE
    {
        return Err(Error::Format(
            "vocabulary file must start with the reserved <unk>, <s>, </s> entries".into(),
        ));
    }
    Vocabulary::from_words(lines[3..].iter().map(|s| s.to_string()))
}

pub type SharedVocabulary = Arc<Vocabulary>;
