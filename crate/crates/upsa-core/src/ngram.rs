//! Interpolated Kneser–Ney smoothed n-gram language models.
//!
//! Two models are trained per corpus: a forward model scoring fluency and a
//! backward model (trained on token-reversed sentences) used together with
//! the forward model to rank candidate words around an edit position.
//!
//! Probability queries interpolate down to a uniform base distribution, so
//! every in-vocabulary word has strictly positive probability in every
//! context and the conditional distribution sums to 1.

use std::collections::HashMap;
use std::sync::Arc;

use crate::text::{Sentence, Token, Vocabulary, BOS_ID, EOS_ID};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"UPLM";
const VERSION: u16 = 1;
pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_DISCOUNT: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

type CountTable = HashMap<Vec<u32>, u64>;

/// A trained n-gram model. Immutable after training; queries are safe from
/// many concurrent searches.
#[derive(Debug, Clone)]
pub struct LanguageModel {
    order: usize,
    direction: Direction,
    vocab: Arc<Vocabulary>,
    /// Discount per order (index k-1 for order k), each in [0, 1).
    discounts: Vec<f64>,
    /// Raw k-gram counts, counts[k-1] holds k-grams.
    counts: Vec<CountTable>,
    // Derived tables, rebuilt on load.
    ctx_total: Vec<CountTable>,
    ctx_distinct: Vec<CountTable>,
    /// Continuation counts for orders 1..order: cont[k-1][g] = number of
    /// distinct left extensions of the k-gram g.
    cont: Vec<CountTable>,
    cont_ctx_total: Vec<CountTable>,
    cont_ctx_distinct: Vec<CountTable>,
}

fn derive_context_tables(table: &CountTable) -> (CountTable, CountTable) {
    let mut total = CountTable::new();
    let mut distinct = CountTable::new();
    for (gram, c) in table {
        let ctx = gram[..gram.len() - 1].to_vec();
        *total.entry(ctx.clone()).or_insert(0) += c;
        *distinct.entry(ctx).or_insert(0) += 1;
    }
    (total, distinct)
}

impl LanguageModel {
    /// Trains a model of the given order on a corpus of token-id sentences.
    /// Sentences are padded with `order - 1` BOS tokens and terminated with
    /// one EOS; backward models see each sentence token-reversed.
    pub fn train<I>(corpus: I, order: usize, direction: Direction, vocab: Arc<Vocabulary>) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        Self::train_with_discount(corpus, order, direction, vocab, DEFAULT_DISCOUNT)
    }

    pub fn train_with_discount<I>(
        corpus: I,
        order: usize,
        direction: Direction,
        vocab: Arc<Vocabulary>,
        discount: f64,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        if !(1..=5).contains(&order) {
            return Err(Error::Format(format!("order {order} outside [1, 5]")));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::Format(format!("discount {discount} outside [0, 1)")));
        }
        let mut counts: Vec<CountTable> = vec![CountTable::new(); order];
        let mut saw_sentence = false;
        for mut ids in corpus {
            if ids.is_empty() {
                continue;
            }
            saw_sentence = true;
            if direction == Direction::Backward {
                ids.reverse();
            }
            let mut padded = vec![BOS_ID; order - 1];
            padded.extend_from_slice(&ids);
            padded.push(EOS_ID);
            for k in 1..=order {
                for window in padded.windows(k) {
                    *counts[k - 1].entry(window.to_vec()).or_insert(0) += 1;
                }
            }
        }
        if !saw_sentence {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::from_counts(order, direction, vocab, vec![discount; order], counts))
    }

    fn from_counts(
        order: usize,
        direction: Direction,
        vocab: Arc<Vocabulary>,
        discounts: Vec<f64>,
        counts: Vec<CountTable>,
    ) -> Self {
        let mut ctx_total = Vec::with_capacity(order);
        let mut ctx_distinct = Vec::with_capacity(order);
        for table in &counts {
            let (t, d) = derive_context_tables(table);
            ctx_total.push(t);
            ctx_distinct.push(d);
        }
        // Continuation counts for order k come from the (k+1)-gram table:
        // each distinct (k+1)-gram contributes 1 to its suffix k-gram.
        let mut cont = vec![CountTable::new(); order.saturating_sub(1)];
        for k in 1..order {
            let mut table = CountTable::new();
            for gram in counts[k].keys() {
                *table.entry(gram[1..].to_vec()).or_insert(0) += 1;
            }
            cont[k - 1] = table;
        }
        let mut cont_ctx_total = Vec::with_capacity(cont.len());
        let mut cont_ctx_distinct = Vec::with_capacity(cont.len());
        for table in &cont {
            let (t, d) = derive_context_tables(table);
            cont_ctx_total.push(t);
            cont_ctx_distinct.push(d);
        }
        LanguageModel {
            order,
            direction,
            vocab,
            discounts,
            counts,
            ctx_total,
            ctx_distinct,
            cont,
            cont_ctx_total,
            cont_ctx_distinct,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    /// P(w | context), using at most the last `order - 1` context tokens.
    /// Always in (0, 1].
    pub fn word_prob(&self, context: &[u32], w: u32) -> f64 {
        let keep = self.order.saturating_sub(1).min(context.len());
        let ctx = &context[context.len() - keep..];
        self.prob_at(ctx, w, true)
    }

    /// One interpolation level. `top` selects the raw tables; backed-off
    /// levels use continuation counts, bottoming out at uniform over the
    /// vocabulary.
    fn prob_at(&self, ctx: &[u32], w: u32, top: bool) -> f64 {
        let k = ctx.len() + 1;
        let uniform = 1.0 / self.vocab.len() as f64;
        if k == 1 {
            let raw = self.order == 1 || top;
            let (grams, totals, distincts) = if raw {
                (&self.counts[0], &self.ctx_total[0], &self.ctx_distinct[0])
            } else {
                (&self.cont[0], &self.cont_ctx_total[0], &self.cont_ctx_distinct[0])
            };
            let empty: Vec<u32> = Vec::new();
            let total = totals.get(&empty).copied().unwrap_or(0);
            if total == 0 {
                return uniform;
            }
            let distinct = distincts.get(&empty).copied().unwrap_or(0) as f64;
            let d = self.discounts[0];
            let c = grams.get(&vec![w]).copied().unwrap_or(0) as f64;
            let t = total as f64;
            (c - d).max(0.0) / t + d * distinct / t * uniform
        } else {
            let idx = k - 1;
            let (grams, totals, distincts) = if top {
                (&self.counts[idx], &self.ctx_total[idx], &self.ctx_distinct[idx])
            } else {
                (&self.cont[idx - 1], &self.cont_ctx_total[idx - 1], &self.cont_ctx_distinct[idx - 1])
            };
            let total = totals.get(ctx).copied().unwrap_or(0);
            if total == 0 {
                return self.prob_at(&ctx[1..], w, false);
            }
            let mut gram = Vec::with_capacity(k);
            gram.extend_from_slice(ctx);
            gram.push(w);
            let d = self.discounts[idx];
            let c = grams.get(&gram).copied().unwrap_or(0) as f64;
            let t = total as f64;
            let distinct = distincts.get(ctx).copied().unwrap_or(0) as f64;
            (c - d).max(0.0) / t + d * distinct / t * self.prob_at(&ctx[1..], w, false)
        }
    }

    /// Log probability of the whole sentence including the terminating EOS.
    /// Backward models reverse the sentence internally.
    pub fn sequence_prob(&self, s: &Sentence) -> f64 {
        let mut ids = s.ids();
        if self.direction == Direction::Backward {
            ids.reverse();
        }
        self.sequence_prob_ids(&ids)
    }

    /// Same as [`sequence_prob`](Self::sequence_prob) but over already
    /// direction-adjusted token ids.
    pub fn sequence_prob_ids(&self, ids: &[u32]) -> f64 {
        let mut padded = vec![BOS_ID; self.order - 1];
        padded.extend_from_slice(ids);
        padded.push(EOS_ID);
        let mut log_p = 0.0;
        for i in self.order - 1..padded.len() {
            log_p += self.word_prob(&padded[..i], padded[i]).ln();
        }
        log_p
    }

    /// Number of scored positions for a sentence of length `l` (its words
    /// plus the terminating EOS).
    pub fn scored_positions(len: usize) -> usize {
        len + 1
    }

    /// The K most probable in-vocabulary continuations of `context`,
    /// descending, ties broken by token id ascending. BOS is excluded.
    pub fn topk_continuations(&self, context: &[u32], k: usize) -> Vec<(Token, f64)> {
        let mut scored: Vec<(u32, f64)> = (0..self.vocab.len() as u32)
            .filter(|&id| id != BOS_ID)
            .map(|id| (id, self.word_prob(context, id)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
            .into_iter()
            .map(|(id, p)| (Token::new(self.vocab.surface_of(id).unwrap(), id), p))
            .collect()
    }

    /// Serializes into the versioned binary container. Layout (all integers
    /// little-endian):
    ///
    /// ```text
    /// magic "UPLM" | version u16 | order u8 | direction u8 (0=fwd, 1=bwd)
    /// | discount f64 per order
    /// | vocab: u32 count, then per surface u32 byte-length + UTF-8 bytes
    /// | per order k=1..=n: u64 entry count, entries sorted by id tuple,
    ///   each entry k * u32 ids + u64 count
    /// ```
    pub fn save(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.order as u8);
        out.push(match self.direction {
            Direction::Forward => 0,
            Direction::Backward => 1,
        });
        for d in &self.discounts {
            out.extend_from_slice(&d.to_le_bytes());
        }
        let surfaces = self.vocab.all_surfaces();
        out.extend_from_slice(&(surfaces.len() as u32).to_le_bytes());
        for s in surfaces {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        for table in &self.counts {
            let mut entries: Vec<(&Vec<u32>, &u64)> = table.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
            for (gram, c) in entries {
                for id in gram {
                    out.extend_from_slice(&id.to_le_bytes());
                }
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        out
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let order = r.u8()? as usize;
        if !(1..=5).contains(&order) {
            return Err(Error::Format(format!("order {order} outside [1, 5]")));
        }
        let direction = match r.u8()? {
            0 => Direction::Forward,
            1 => Direction::Backward,
            d => return Err(Error::Format(format!("unknown direction tag {d}"))),
        };
        let mut discounts = Vec::with_capacity(order);
        for _ in 0..order {
            let d = r.f64()?;
            if !(0.0..1.0).contains(&d) {
                return Err(Error::Format(format!("discount {d} outside [0, 1)")));
            }
            discounts.push(d);
        }
        let n_surfaces = r.u32()? as usize;
        if n_surfaces < 3 {
            return Err(Error::Format("vocabulary too small".into()));
        }
        let mut surfaces = Vec::with_capacity(n_surfaces);
        for _ in 0..n_surfaces {
            let len = r.u32()? as usize;
            let bytes = r.take(len)?;
            let s = std::str::from_utf8(bytes)
                .map_err(|_| Error::Format("invalid UTF-8 in vocabulary".into()))?;
            surfaces.push(s.to_string());
        }
        if surfaces[0] != crate::text::UNK_SURFACE
            || surfaces[1] != crate::text::BOS_SURFACE
            || surfaces[2] != crate::text::EOS_SURFACE
        {
            return Err(Error::Format("reserved vocabulary entries out of place".into()));
        }
        let vocab = Arc::new(Vocabulary::from_words(surfaces[3..].iter().cloned())?);
        let mut counts = Vec::with_capacity(order);
        for k in 1..=order {
            let n_entries = r.u64()? as usize;
            let mut table = CountTable::with_capacity(n_entries);
            for _ in 0..n_entries {
                let mut gram = Vec::with_capacity(k);
                for _ in 0..k {
                    let id = r.u32()?;
                    if id as usize >= n_surfaces {
                        return Err(Error::Format(format!("token id {id} out of range")));
                    }
                    gram.push(id);
                }
                let c = r.u64()?;
                if c == 0 {
                    return Err(Error::Format("zero n-gram count".into()));
                }
                table.insert(gram, c);
            }
            counts.push(table);
        }
        if !r.done() {
            return Err(Error::Format("trailing bytes after model payload".into()));
        }
        Ok(Self::from_counts(order, direction, vocab, discounts, counts))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("truncated payload".into()));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::build_vocabulary;

    fn ids(vocab: &Vocabulary, line: &str) -> Vec<u32> {
        line.split_whitespace().map(|w| vocab.id_of(w).unwrap()).collect()
    }

    fn train_on(lines: &[&str], order: usize, direction: Direction) -> LanguageModel {
        let vocab = Arc::new(build_vocabulary(lines.iter().copied(), 1).unwrap());
        let corpus: Vec<Vec<u32>> = lines.iter().map(|l| ids(&vocab, l)).collect();
        LanguageModel::train(corpus, order, direction, vocab).unwrap()
    }

    #[test]
    fn repeated_bigram_dominates() {
        // corpus ["a a a"] x 100, order 2. With one EOS per sentence the
        // context "a" splits 200:100 between "a" and EOS, so the hand value
        // is (200 - 0.75)/300 + 0.75*2/300 * p1(a), well below the naive
        // count ratio but still the clear argmax.
        let lines = vec!["a a a"; 100];
        let lm = train_on(&lines, 2, Direction::Forward);
        let a = lm.vocab().id_of("a").unwrap();
        let p_aa = lm.word_prob(&[a], a);
        let p_eos = lm.word_prob(&[a], EOS_ID);
        assert!(p_aa > p_eos);
        assert!(p_aa > 0.6 && p_aa < 0.7, "p(a|a) = {p_aa}");
        // hand computation: p1(a) = 1.25/3 + 0.75*2/3*(1/4)
        let p1_a = 1.25 / 3.0 + 0.75 * 2.0 / 3.0 * 0.25;
        let expected = 199.25 / 300.0 + 0.75 * 2.0 / 300.0 * p1_a;
        assert!((p_aa - expected).abs() < 1e-12);
    }

    #[test]
    fn seen_bigram_beats_unseen() {
        let lm = train_on(&["a b"], 2, Direction::Forward);
        let a = lm.vocab().id_of("a").unwrap();
        let b = lm.vocab().id_of("b").unwrap();
        assert!(lm.word_prob(&[a], b) > lm.word_prob(&[a], a));
    }

    #[test]
    fn backward_unigram_counts_match_forward() {
        let fwd = train_on(&["a b c"], 2, Direction::Forward);
        let bwd = train_on(&["a b c"], 2, Direction::Backward);
        // Reversal preserves unigram multiset (BOS/EOS placement aside, the
        // word unigrams are identical).
        for w in ["a", "b", "c"] {
            let id = fwd.vocab().id_of(w).unwrap();
            assert_eq!(
                fwd.counts[0].get(&vec![id]),
                bwd.counts[0].get(&vec![id]),
                "unigram count mismatch for {w}"
            );
        }
    }

    #[test]
    fn conditional_distribution_sums_to_one() {
        let lm = train_on(&["a b c", "a b a", "c c b"], 3, Direction::Forward);
        let a = lm.vocab().id_of("a").unwrap();
        let b = lm.vocab().id_of("b").unwrap();
        let z = 999; // out-of-range id acts as an unseen context token
        for ctx in [vec![], vec![a], vec![a, b], vec![z], vec![BOS_ID, BOS_ID], vec![z, z]] {
            let sum: f64 = (0..lm.vocab().len() as u32).map(|w| lm.word_prob(&ctx, w)).sum();
            assert!((sum - 1.0).abs() < 1e-6, "sum {sum} for ctx {ctx:?}");
        }
    }

    #[test]
    fn every_word_strictly_positive() {
        let lm = train_on(&["a b"], 2, Direction::Forward);
        let a = lm.vocab().id_of("a").unwrap();
        for w in 0..lm.vocab().len() as u32 {
            assert!(lm.word_prob(&[a], w) > 0.0);
            assert!(lm.word_prob(&[], w) > 0.0);
        }
    }

    #[test]
    fn unseen_context_backs_off_to_continuation_unigram() {
        let lm = train_on(&["a b", "b c"], 2, Direction::Forward);
        let z = 999;
        // Independent computation of the continuation unigram level.
        let uniform = 1.0 / lm.vocab().len() as f64;
        let b = lm.vocab().id_of("b").unwrap();
        // bigram types: (bos,a),(a,b),(b,eos),(bos,b),(b,c),(c,eos)
        // left extensions: a:1, b:2, c:1, eos:2 -> total 6, distinct 4
        let expected = (2.0 - 0.75) / 6.0 + 0.75 * 4.0 / 6.0 * uniform;
        assert!((lm.word_prob(&[z], b) - expected).abs() < 1e-12);
    }

    #[test]
    fn word_prob_beats_unk_in_seen_context() {
        let lines = vec!["a a"; 100];
        let lm = train_on(&lines, 2, Direction::Forward);
        let a = lm.vocab().id_of("a").unwrap();
        assert!(lm.word_prob(&[a], a) > lm.word_prob(&[a], crate::text::UNK_ID));
    }

    #[test]
    fn training_sentence_beats_permutations() {
        let lines = ["a b c d"];
        let vocab = Arc::new(build_vocabulary(lines.iter().copied(), 1).unwrap());
        let corpus: Vec<Vec<u32>> = lines.iter().map(|l| ids(&vocab, l)).collect();
        let lm = LanguageModel::train(corpus, 3, Direction::Forward, Arc::clone(&vocab)).unwrap();
        let original = ids(&vocab, "a b c d");
        let best = lm.sequence_prob_ids(&original);
        // exhaustive permutations of the 4 tokens
        let mut perm = original.clone();
        permute(&mut perm, 0, &mut |p| {
            assert!(lm.sequence_prob_ids(p) <= best + 1e-12, "permutation {p:?} beat training sentence");
        });
    }

    fn permute(ids: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
        if k == ids.len() {
            f(ids);
            return;
        }
        for i in k..ids.len() {
            ids.swap(k, i);
            permute(ids, k + 1, f);
            ids.swap(k, i);
        }
    }

    #[test]
    fn sequence_prob_is_sum_of_word_probs() {
        let lm = train_on(&["a b c", "c b a"], 3, Direction::Forward);
        let ids_: Vec<u32> = ["a", "b", "c"].iter().map(|w| lm.vocab().id_of(w).unwrap()).collect();
        let mut padded = vec![BOS_ID, BOS_ID];
        padded.extend_from_slice(&ids_);
        padded.push(EOS_ID);
        let manual: f64 = (2..padded.len()).map(|i| lm.word_prob(&padded[..i], padded[i]).ln()).sum();
        assert!((lm.sequence_prob_ids(&ids_) - manual).abs() < 1e-9);
    }

    #[test]
    fn unigram_model_is_direction_invariant() {
        let lines = ["a b c", "b c a"];
        let fwd = train_on(&lines, 1, Direction::Forward);
        let bwd = train_on(&lines, 1, Direction::Backward);
        let vocab = fwd.vocab();
        let s = Sentence::new(
            ids(vocab, "a b c")
                .into_iter()
                .map(|id| Token::new(vocab.surface_of(id).unwrap(), id))
                .collect(),
        )
        .unwrap();
        let pf = fwd.sequence_prob(&s);
        let pb = bwd.sequence_prob(&s);
        assert!((pf - pb).abs() < 1e-12);
    }

    #[test]
    fn backward_equals_forward_on_reversed_corpus() {
        let lines = ["a b c d", "b a c", "d c b a"];
        let bwd = train_on(&lines, 3, Direction::Backward);
        let vocab = Arc::clone(bwd.vocab());
        let reversed: Vec<Vec<u32>> = lines
            .iter()
            .map(|l| {
                let mut v = ids(&vocab, l);
                v.reverse();
                v
            })
            .collect();
        let fwd_rev = LanguageModel::train(reversed, 3, Direction::Forward, Arc::clone(&vocab)).unwrap();
        let s: Vec<Token> = ids(&vocab, "a b c")
            .into_iter()
            .map(|id| Token::new(vocab.surface_of(id).unwrap(), id))
            .collect();
        let s = Sentence::new(s).unwrap();
        let via_bwd = bwd.sequence_prob(&s);
        let via_fwd = fwd_rev.sequence_prob(&s.reversed());
        assert_eq!(via_bwd.to_bits(), via_fwd.to_bits());
    }

    #[test]
    fn topk_single_best() {
        let lines = vec!["a b"; 100];
        let lm = train_on(&lines, 2, Direction::Forward);
        let a = lm.vocab().id_of("a").unwrap();
        let top = lm.topk_continuations(&[a], 1);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].0.surface, "b");
    }

    #[test]
    fn topk_full_vocab_and_prefix_property() {
        let lm = train_on(&["a b c", "b c a"], 2, Direction::Forward);
        let a = lm.vocab().id_of("a").unwrap();
        let full = lm.topk_continuations(&[a], lm.vocab().len() + 10);
        assert_eq!(full.len(), lm.vocab().len() - 1); // BOS excluded
        for w in 1..full.len() {
            assert!(full[w - 1].1 >= full[w].1);
        }
        let prefix = lm.topk_continuations(&[a], 3);
        for (i, (tok, p)) in prefix.iter().enumerate() {
            assert_eq!(tok.id, full[i].0.id);
            assert_eq!(p.to_bits(), full[i].1.to_bits());
        }
        assert!(full.iter().all(|(t, _)| t.id != BOS_ID));
    }

    #[test]
    fn save_load_round_trip_is_bitwise() {
        let lm = train_on(&["a b c", "c b a", "a c b"], 3, Direction::Backward);
        let bytes = lm.save();
        let loaded = LanguageModel::load(&bytes).unwrap();
        assert_eq!(loaded.order(), lm.order());
        assert_eq!(loaded.direction(), lm.direction());
        // query a spread of (ctx, w) pairs; probabilities must be bit-equal
        let v = lm.vocab().len() as u32;
        for ctx_a in 0..v {
            for ctx_b in 0..v {
                for w in 0..v {
                    let p1 = lm.word_prob(&[ctx_a, ctx_b], w);
                    let p2 = loaded.word_prob(&[ctx_a, ctx_b], w);
                    assert_eq!(p1.to_bits(), p2.to_bits());
                }
            }
        }
        // and serialization itself is deterministic
        assert_eq!(bytes, loaded.save());
    }

    #[test]
    fn load_rejects_bad_payloads() {
        let lm = train_on(&["a b"], 2, Direction::Forward);
        let bytes = lm.save();
        assert!(matches!(LanguageModel::load(&bytes[..bytes.len() - 3]), Err(Error::Format(_))));
        assert!(matches!(LanguageModel::load(&[]), Err(Error::Format(_))));
        let mut wrong_version = bytes.clone();
        wrong_version[4] = 9;
        assert!(matches!(LanguageModel::load(&wrong_version), Err(Error::Format(_))));
        let mut wrong_magic = bytes;
        wrong_magic[0] = b'X';
        assert!(matches!(LanguageModel::load(&wrong_magic), Err(Error::Format(_))));
    }
}
