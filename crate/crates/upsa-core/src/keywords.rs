//! RAKE keyword extraction over a single sentence.
//!
//! The sentence is split into candidate phrases at stopwords and punctuation.
//! Each content word scores degree(w) / frequency(w), where degree counts
//! co-occurrences within candidate phrases (including the word itself); a
//! phrase scores the sum of its word scores. The returned keywords are the
//! content words of the top-scoring phrases, deduplicated.

use std::collections::{HashMap, HashSet};

use crate::text::{Sentence, Token};
use crate::{Error, Result};

/// The stopword list bundled with the crate (one word per line, English).
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    pub fn from_lines(text: &str) -> Result<Self> {
        let mut words = HashSet::new();
        for line in text.lines() {
            let w = line.trim();
            if w.is_empty() {
                continue;
            }
            if w.chars().any(char::is_whitespace) {
                return Err(Error::Format(format!("stopword entry {w:?} contains whitespace")));
            }
            words.insert(w.to_lowercase());
        }
        if words.is_empty() {
            return Err(Error::Format("stopword list is empty".into()));
        }
        Ok(StopwordList { words })
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.words.contains(surface)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for StopwordList {
    fn default() -> Self {
        StopwordList::from_lines(DEFAULT_STOPWORDS).expect("bundled stopword list is valid")
    }
}

/// Keywords of the input sentence with their RAKE word scores, descending,
/// ties by first occurrence position.
#[derive(Debug, Clone, Default)]
pub struct KeywordSet {
    entries: Vec<(Token, f64)>,
}

impl KeywordSet {
    pub fn entries(&self) -> &[(Token, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.surface.as_str())
    }
}

/// Punctuation acts as a phrase delimiter and is never a keyword.
fn is_punctuation(surface: &str) -> bool {
    !surface.chars().any(char::is_alphanumeric)
}

pub fn extract_keywords(
    s: &Sentence,
    stopwords: &StopwordList,
    max_keywords: usize,
) -> KeywordSet {
    assert!(max_keywords >= 1, "max_keywords must be at least 1");
    // phrases: maximal runs of content words between delimiters
    let mut phrases: Vec<Vec<(usize, &Token)>> = Vec::new();
    let mut current: Vec<(usize, &Token)> = Vec::new();
    for (pos, tok) in s.tokens().iter().enumerate() {
        if is_punctuation(&tok.surface) || stopwords.contains(&tok.surface) {
            if !current.is_empty() {
                phrases.push(std::mem::take(&mut current));
            }
        } else {
            current.push((pos, tok));
        }
    }
    if !current.is_empty() {
        phrases.push(current);
    }
    if phrases.is_empty() {
        return KeywordSet::default();
    }

    let mut freq: HashMap<&str, f64> = HashMap::new();
    let mut degree: HashMap<&str, f64> = HashMap::new();
    for phrase in &phrases {
        let phrase_len = phrase.len() as f64;
        for (_, tok) in phrase {
            *freq.entry(tok.surface.as_str()).or_insert(0.0) += 1.0;
            *degree.entry(tok.surface.as_str()).or_insert(0.0) += phrase_len;
        }
    }
    let word_score = |w: &str| degree[w] / freq[w];

    // rank phrases by total word score, ties by first occurrence
    let mut ranked: Vec<(f64, &Vec<(usize, &Token)>)> = phrases
        .iter()
        .map(|p| (p.iter().map(|(_, t)| word_score(&t.surface)).sum::<f64>(), p))
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1[0].0.cmp(&b.1[0].0)));

    let mut seen: HashSet<&str> = HashSet::new();
    let mut entries: Vec<(usize, Token, f64)> = Vec::new();
    for (_, phrase) in ranked {
        for (pos, tok) in phrase {
            if entries.len() >= max_keywords {
                break;
            }
            if seen.insert(tok.surface.as_str()) {
                entries.push((*pos, (*tok).clone(), word_score(&tok.surface)));
            }
        }
        if entries.len() >= max_keywords {
            break;
        }
    }
    entries.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)));
    KeywordSet { entries: entries.into_iter().map(|(_, t, s)| (t, s)).collect() }
}
