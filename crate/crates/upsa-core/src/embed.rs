//! Word-embedding table: text-format loading, cosine similarity, and
//! averaged sentence vectors.

use std::collections::HashMap;
use std::io::BufRead;

use crate::text::Sentence;
use crate::{Error, Result};

/// A word → dense-vector map. Immutable after load; safe for concurrent
/// reads.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn from_pairs<I, S>(dimension: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut vectors = HashMap::new();
        for (word, vec) in pairs {
            let word = word.into();
            if vec.len() != dimension {
                return Err(Error::Dimension { left: dimension, right: vec.len() });
            }
            if vec.iter().any(|x| !x.is_finite()) {
                return Err(Error::Format(format!("non-finite component for {word:?}")));
            }
            vectors.entry(word).or_insert(vec);
        }
        Ok(EmbeddingTable { dimension, vectors })
    }

    /// Parses the common published text format: one row per word,
    /// `surface v1 v2 ... vd`. An optional first header line `count dim`
    /// (two integers) is detected and skipped. Duplicate surfaces keep the
    /// first occurrence.
    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut dimension: Option<usize> = None;
        let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            if lineno == 0 && rest.len() == 1 && word.parse::<u64>().is_ok() && rest[0].parse::<u64>().is_ok()
            {
                continue; // "count dim" header
            }
            let mut vec = Vec::with_capacity(rest.len());
            for tok in &rest {
                let x: f64 = tok.parse().map_err(|_| {
                    Error::Format(format!("line {}: unparseable number {tok:?}", lineno + 1))
                })?;
                if !x.is_finite() {
                    return Err(Error::Format(format!("line {}: non-finite value", lineno + 1)));
                }
                vec.push(x);
            }
            match dimension {
                None => {
                    if vec.is_empty() {
                        return Err(Error::Format(format!("line {}: row has no vector", lineno + 1)));
                    }
                    dimension = Some(vec.len());
                }
                Some(d) if d != vec.len() => {
                    return Err(Error::Format(format!(
                        "line {}: dimension {} does not match {}",
                        lineno + 1,
                        vec.len(),
                        d
                    )));
                }
                _ => {}
            }
            vectors.entry(word.to_string()).or_insert(vec);
        }
        let dimension = dimension.ok_or(Error::EmptyCorpus)?;
        Ok(EmbeddingTable { dimension, vectors })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<&[f64]> {
        self.vectors.get(surface).map(Vec::as_slice)
    }

    /// Arithmetic mean of the vectors of all in-table tokens; tokens absent
    /// from the table are skipped. All tokens absent ⇒ the zero vector.
    pub fn sentence_vector(&self, s: &Sentence) -> Vec<f64> {
        let mut sum = vec![0.0; self.dimension];
        let mut n = 0usize;
        for tok in s.tokens() {
            if let Some(v) = self.get(&tok.surface) {
                for (acc, x) in sum.iter_mut().zip(v) {
                    *acc += x;
                }
                n += 1;
            }
        }
        if n > 0 {
            for x in &mut sum {
                *x /= n as f64;
            }
        }
        sum
    }
}

/// Standard cosine similarity. Returns 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension { left: u.len(), right: v.len() });
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}
