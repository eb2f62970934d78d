//! Sentence-level BLEU, iBLEU, and ROUGE-N.
//!
//! BLEU is the length-penalized geometric mean of clipped n-gram precisions
//! (n = 1..4) with add-one smoothing on orders >= 2 whose raw match count is
//! zero. iBLEU combines reference similarity with a penalty for copying the
//! source. ROUGE-N is n-gram recall against a single reference.

use std::collections::HashMap;

use crate::text::Sentence;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct BleuConfig {
    pub max_order: usize,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_order: 4 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IbleuConfig {
    pub alpha: f64,
    pub bleu: BleuConfig,
}

impl Default for IbleuConfig {
    fn default() -> Self {
        IbleuConfig { alpha: 0.9, bleu: BleuConfig::default() }
    }
}

fn ngram_counts(surfaces: &[&str], n: usize) -> HashMap<Vec<String>, u64> {
    let mut counts = HashMap::new();
    if surfaces.len() >= n {
        for window in surfaces.windows(n) {
            let key: Vec<String> = window.iter().map(|s| s.to_string()).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence-level BLEU of `candidate` against one or more references.
pub fn sentence_bleu(candidate: &Sentence, references: &[Sentence], cfg: BleuConfig) -> f64 {
    assert!(!references.is_empty(), "references must be non-empty");
    assert!((1..=4).contains(&cfg.max_order), "max order must lie in [1, 4]");
    let cand = candidate.surfaces();
    let c_len = cand.len();

    // brevity penalty against the closest reference length (ties -> shorter)
    let r_len = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&l| (l.abs_diff(c_len), l))
        .unwrap();
    let bp = if c_len >= r_len { 1.0 } else { (1.0 - r_len as f64 / c_len as f64).exp() };

    let mut log_sum = 0.0;
    for n in 1..=cfg.max_order {
        let cand_counts = ngram_counts(&cand, n);
        // multi-reference clipping: cap by the max count over references
        let mut max_ref: HashMap<&Vec<String>, u64> = HashMap::new();
        for r in references {
            let surfaces = r.surfaces();
            let rc = ngram_counts(&surfaces, n);
            for (gram, count) in &cand_counts {
                let have = rc.get(gram).copied().unwrap_or(0);
                let entry = max_ref.entry(gram).or_insert(0);
                *entry = (*entry).max(have.min(*count));
            }
        }
        let matches: u64 = max_ref.values().sum();
        let total = c_len.saturating_sub(n - 1) as u64;
        let (m, t) = if n >= 2 && matches == 0 {
            (matches + 1, total + 1) // add-one smoothing
        } else {
            (matches, total)
        };
        if m == 0 || t == 0 {
            return 0.0; // unsmoothed zero at order 1
        }
        log_sum += (m as f64 / t as f64).ln();
    }
    bp * (log_sum / cfg.max_order as f64).exp()
}

/// alpha * BLEU(candidate, references) - (1 - alpha) * BLEU(candidate, source).
pub fn ibleu(
    candidate: &Sentence,
    references: &[Sentence],
    source: &Sentence,
    cfg: IbleuConfig,
) -> f64 {
    assert!((0.0..=1.0).contains(&cfg.alpha), "alpha must lie in [0, 1]");
    let ref_bleu = sentence_bleu(candidate, references, cfg.bleu);
    let src_bleu = sentence_bleu(candidate, std::slice::from_ref(source), cfg.bleu);
    cfg.alpha * ref_bleu - (1.0 - cfg.alpha) * src_bleu
}

/// ROUGE-N recall: clipped reference n-grams found in the candidate, over
/// the number of reference n-grams.
pub fn rouge_n(candidate: &Sentence, reference: &Sentence, n: usize) -> Result<f64> {
    if !(1..=2).contains(&n) {
        return Err(Error::UndefinedMetric(format!("ROUGE-{n} is not supported")));
    }
    if reference.len() < n {
        return Err(Error::UndefinedMetric(format!(
            "reference of length {} has no {n}-grams",
            reference.len()
        )));
    }
    let ref_surfaces = reference.surfaces();
    let cand_surfaces = candidate.surfaces();
    let ref_counts = ngram_counts(&ref_surfaces, n);
    let cand_counts = ngram_counts(&cand_surfaces, n);
    let total: u64 = ref_counts.values().sum();
    let matched: u64 = ref_counts
        .iter()
        .map(|(gram, count)| (*count).min(cand_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    Ok(matched as f64 / total as f64)
}

/// One evaluation case: a source sentence, the generated candidate, and one
/// or more references.
#[derive(Debug, Clone)]
pub struct EvalCase {
    pub source: Sentence,
    pub candidate: Sentence,
    pub references: Vec<Sentence>,
}

/// Arithmetic means of the sentence-level scores across cases.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorpusReport {
    pub bleu: f64,
    pub ibleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub cases: usize,
}

impl CorpusReport {
    /// Fixed 4-decimal report, one line per metric.
    pub fn render(&self) -> String {
        format!(
            "cases  {}\nBLEU   {:.4}\niBLEU  {:.4}\nROUGE1 {:.4}\nROUGE2 {:.4}\n",
            self.cases, self.bleu, self.ibleu, self.rouge1, self.rouge2
        )
    }
}

/// Averages sentence-level metrics over the given cases. ROUGE uses the
/// first reference; a reference too short for an n-gram order contributes
/// recall 0 for that case rather than failing the whole report.
pub fn corpus_report(cases: &[EvalCase], cfg: IbleuConfig) -> Result<CorpusReport> {
    if cases.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut bleu_sum = 0.0;
    let mut ibleu_sum = 0.0;
    let mut rouge1_sum = 0.0;
    let mut rouge2_sum = 0.0;
    for case in cases {
        bleu_sum += sentence_bleu(&case.candidate, &case.references, cfg.bleu);
        ibleu_sum += ibleu(&case.candidate, &case.references, &case.source, cfg);
        rouge1_sum += rouge_n(&case.candidate, &case.references[0], 1).unwrap_or(0.0);
        rouge2_sum += rouge_n(&case.candidate, &case.references[0], 2).unwrap_or(0.0);
    }
    let n = cases.len() as f64;
    Ok(CorpusReport {
        bleu: bleu_sum / n,
        ibleu: ibleu_sum / n,
        rouge1: rouge1_sum / n,
        rouge2: rouge2_sum / n,
        cases: cases.len(),
    })
}
