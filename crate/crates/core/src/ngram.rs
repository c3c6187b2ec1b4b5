//! Small absolute-discounting n-gram model used as an offline stand-in for a
//! neural scorer.
//!
//! `p(w | h) = max(c(h,w) - d, 0) / c(h) + d * F(h) / c(h) * p(w | h')`
//!
//! where `F(h)` is the number of distinct followers of `h` and `h'` drops the
//! oldest history token. Unseen histories defer to `h'` entirely. The order-1
//! distribution is the plain relative frequency `c(w) / total`; tokens outside
//! the vocabulary receive `1 / (total + |V|)`, the same floor the unigram model
//! uses by default. Each training line is padded with `n - 1` boundary symbols
//! that are never predicted.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::fingerprint::{fingerprint_parts, Fingerprinter};
use crate::tokenize::TokenizerSpec;

const BOS: u32 = u32::MAX;
const OOV: u32 = u32::MAX - 1;

#[derive(Debug, Default, Clone)]
struct ContextStats {
    total: u64,
    followers: HashMap<u32, u64>,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    discount: f64,
    tokenizer: TokenizerSpec,
    ids: HashMap<String, u32>,
    unigram: Vec<u64>,
    total: u64,
    /// `contexts[m]` maps histories of length `m` (1..order) to follower counts.
    contexts: Vec<HashMap<Box<[u32]>, ContextStats>>,
    fingerprint: String,
}

struct Trainer {
    order: usize,
    tokenizer: TokenizerSpec,
    ids: HashMap<String, u32>,
    unigram: Vec<u64>,
    contexts: Vec<HashMap<Box<[u32]>, ContextStats>>,
    raw: Fingerprinter,
    seq: Vec<u32>,
}

impl Trainer {
    fn new(order: usize, tokenizer: TokenizerSpec) -> Self {
        Trainer {
            order,
            tokenizer,
            ids: HashMap::new(),
            unigram: Vec::new(),
            contexts: (0..order).map(|_| HashMap::new()).collect(),
            raw: Fingerprinter::with_domain("corpus"),
            seq: Vec::new(),
        }
    }

    fn line(&mut self, line: &str) {
        self.raw.update(line.as_bytes());
        let pad = self.order - 1;
        self.seq.clear();
        self.seq.resize(pad, BOS);
        for tok in line.split_whitespace() {
            let tok = self.tokenizer.normalize(tok);
            let id = match self.ids.get(tok.as_ref()) {
                Some(&id) => id,
                None => {
                    let id = self.unigram.len() as u32;
                    self.ids.insert(tok.into_owned(), id);
                    self.unigram.push(0);
                    id
                }
            };
            self.seq.push(id);
        }
        for pos in pad..self.seq.len() {
            let w = self.seq[pos];
            self.unigram[w as usize] += 1;
            for m in 1..self.order {
                let hist = &self.seq[pos - m..pos];
                let stats = self.contexts[m].entry(hist.into()).or_default();
                stats.total += 1;
                *stats.followers.entry(w).or_insert(0) += 1;
            }
        }
    }

    fn finish(self, discount: f64) -> Result<NGramModel> {
        let total: u64 = self.unigram.iter().sum();
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let fingerprint = fingerprint_parts(
            "ngram",
            &[
                &self.raw.finish(),
                &self.tokenizer.name(),
                &self.order.to_string(),
                &discount.to_string(),
            ],
        );
        Ok(NGramModel {
            order: self.order,
            discount,
            tokenizer: self.tokenizer,
            ids: self.ids,
            unigram: self.unigram,
            total,
            contexts: self.contexts,
            fingerprint,
        })
    }
}

fn check_params(order: usize, discount: f64) -> Result<()> {
    if order < 1 {
        return Err(Error::config("order", "n-gram order must be at least 1"));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(Error::config("discount", "discount must lie in (0, 1)"));
    }
    Ok(())
}

impl NGramModel {
    /// Trains on a line-oriented corpus. Each line is one training sequence.
    pub fn train<R: BufRead>(mut reader: R, order: usize, discount: f64, tokenizer: TokenizerSpec) -> Result<Self> {
        check_params(order, discount)?;
        let mut trainer = Trainer::new(order, tokenizer);
        let mut raw = Vec::new();
        let mut offset = 0u64;
        loop {
            raw.clear();
            let n = reader.read_until(b'\n', &mut raw).map_err(|e| Error::io("<corpus>", e))?;
            if n == 0 {
                break;
            }
            let line = std::str::from_utf8(&raw).map_err(|e| Error::InvalidUtf8 {
                offset: offset + e.valid_up_to() as u64,
            })?;
            trainer.line(line);
            offset += n as u64;
        }
        trainer.finish(discount)
    }

    pub fn train_str(text: &str, order: usize, discount: f64, tokenizer: TokenizerSpec) -> Result<Self> {
        check_params(order, discount)?;
        let mut trainer = Trainer::new(order, tokenizer);
        for line in text.split_inclusive('\n') {
            trainer.line(line);
        }
        trainer.finish(discount)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn tokenizer(&self) -> &TokenizerSpec {
        &self.tokenizer
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Vocabulary in first-seen order.
    pub fn vocab(&self) -> Vec<&str> {
        let mut v: Vec<(&str, u32)> = self.ids.iter().map(|(k, &id)| (k.as_str(), id)).collect();
        v.sort_by_key(|&(_, id)| id);
        v.into_iter().map(|(k, _)| k).collect()
    }

    fn id(&self, token: &str) -> u32 {
        self.ids.get(self.tokenizer.normalize(token).as_ref()).copied().unwrap_or(OOV)
    }

    fn base(&self, w: u32) -> f64 {
        if w == OOV {
            1.0 / (self.total as f64 + self.ids.len() as f64)
        } else {
            self.unigram[w as usize] as f64 / self.total as f64
        }
    }

    fn prob_ids(&self, w: u32, hist: &[u32]) -> f64 {
        if hist.is_empty() {
            return self.base(w);
        }
        let lower = self.prob_ids(w, &hist[1..]);
        match self.contexts[hist.len()].get(hist) {
            None => lower,
            Some(stats) => {
                let t = stats.total as f64;
                let c = stats.followers.get(&w).copied().unwrap_or(0) as f64;
                let backoff = self.discount * stats.followers.len() as f64 / t;
                (c - self.discount).max(0.0) / t + backoff * lower
            }
        }
    }

    /// Conditional probability of `token` after `history` (most recent last).
    /// The history is implicitly preceded by boundary symbols.
    pub fn prob(&self, token: &str, history: &[&str]) -> f64 {
        let ids = self.history_ids(history.iter().copied());
        self.prob_ids(self.id(token), &ids)
    }

    fn history_ids<'a>(&self, history: impl Iterator<Item = &'a str>) -> Vec<u32> {
        let mut ids: Vec<u32> = vec![BOS; self.order - 1];
        ids.extend(history.map(|t| self.id(t)));
        let keep = self.order - 1;
        ids.split_off(ids.len() - keep)
    }

    /// Natural-log conditionals of each target token given the context and
    /// the preceding target tokens. Context tokens are scored as history only.
    pub fn score(&self, context: &[String], target: &[String]) -> Result<Vec<f64>> {
        if target.is_empty() {
            return Err(Error::EmptySequence);
        }
        let keep = self.order - 1;
        let mut window: Vec<u32> = vec![BOS; keep];
        window.extend(context.iter().map(|t| self.id(t)));
        let mut out = Vec::with_capacity(target.len());
        for tok in target {
            let w = self.id(tok);
            let hist = &window[window.len() - keep..];
            out.push(self.prob_ids(w, hist).ln());
            window.push(w);
        }
        Ok(out)
    }

    /// Tokenizes raw context and target text with the model's tokenizer.
    pub fn score_text(&self, context: &str, target: &str) -> Result<(Vec<String>, Vec<f64>)> {
        let ctx = self.tokenizer.tokenize(context);
        let tgt = self.tokenizer.tokenize(target);
        let lp = self.score(&ctx, &tgt)?;
        Ok((tgt, lp))
    }
}
