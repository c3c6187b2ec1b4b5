//! Unigram distribution over the scoring vocabulary.
//!
//! Model file layout (natural logarithm everywhere):
//!
//! ```text
//! #letalone-unigram 1
//! #log natural
//! #tokenizer whitespace
//! #smoothing floor 0.25
//! #total 3
//! #types 2
//! #corpus_fingerprint 9f…
//! 2	a
//! 1	b
//! ```
//!
//! Header lines start with `#`; each body line is `count<TAB>token`, sorted by token bytes.
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fingerprint::{fingerprint_parts, Fingerprinter};
use crate::tokenize::{load_vocab, TokenizerKind, TokenizerSpec};

const MAGIC: &str = "#letalone-unigram 1";

/// Smoothing as requested by the caller; `Floor(None)` resolves to
/// `1 / (total + |vocab|)` once the corpus is counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothingSpec {
    None,
    AddK(f64),
    Floor(Option<f64>),
}

impl Default for SmoothingSpec {
    fn default() -> Self {
        SmoothingSpec::Floor(None)
    }
}

impl FromStr for SmoothingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSmoothing(s.to_string());
        let positive = |v: &str| -> Result<f64> {
            let x: f64 = v.parse().map_err(|_| bad())?;
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(bad())
            }
        };
        match s.split_once(':') {
            None if s == "none" => Ok(SmoothingSpec::None),
            None if s == "floor" => Ok(SmoothingSpec::Floor(None)),
            Some(("add-k" | "add_k", k)) => Ok(SmoothingSpec::AddK(positive(k)?)),
            Some(("floor", eps)) => Ok(SmoothingSpec::Floor(Some(positive(eps)?))),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    None,
    AddK(f64),
    Floor(f64),
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::None => f.write_str("none"),
            Smoothing::AddK(k) => write!(f, "add-k {k}"),
            Smoothing::Floor(e) => write!(f, "floor {e}"),
        }
    }
}

impl Smoothing {
    fn parse_header(s: &str) -> Option<Self> {
        let mut parts = s.split(' ');
        let kind = parts.next()?;
        let value = parts.next().map(str::parse::<f64>);
        match (kind, value) {
            ("none", None) => Some(Smoothing::None),
            ("add-k", Some(Ok(k))) if k > 0.0 => Some(Smoothing::AddK(k)),
            ("floor", Some(Ok(e))) if e > 0.0 => Some(Smoothing::Floor(e)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnigramModel {
    tokenizer: TokenizerSpec,
    /// Every vocabulary entry, including zero-count ones in vocab mode.
    counts: BTreeMap<String, u64>,
    total: u64,
    smoothing: Smoothing,
    corpus_fingerprint: String,
}

/// Streaming counter. Chunks may split tokens; the result only depends on the
/// concatenated text.
pub struct UnigramBuilder {
    tokenizer: TokenizerSpec,
    counts: HashMap<String, u64>,
    carry: String,
    raw: Fingerprinter,
}

impl UnigramBuilder {
    pub fn new(tokenizer: TokenizerSpec) -> Self {
        UnigramBuilder {
            tokenizer,
            counts: HashMap::new(),
            carry: String::new(),
            raw: Fingerprinter::with_domain("corpus"),
        }
    }

    fn count(&mut self, text: &str) {
        for tok in text.split_whitespace() {
            *self.counts.entry(self.tokenizer.normalize(tok).into_owned()).or_insert(0) += 1;
        }
    }

    pub fn feed(&mut self, chunk: &str) {
        self.raw.update(chunk.as_bytes());
        let mut buf = std::mem::take(&mut self.carry);
        buf.push_str(chunk);
        match buf.rfind(char::is_whitespace) {
            Some(pos) => {
                let ws_len = buf[pos..].chars().next().map_or(1, char::len_utf8);
                self.count(&buf[..pos]);
                self.carry = buf[pos + ws_len..].to_string();
            }
            None => self.carry = buf,
        }
    }

    /// Counts `text` on all cores. Equivalent to a single `feed`.
    pub fn feed_parallel(&mut self, text: &str) {
        const CHUNK: usize = 1 << 20;
        if text.len() < 2 * CHUNK {
            self.feed(text);
            return;
        }
        self.raw.update(text.as_bytes());
        let joined;
        let body: &str = if self.carry.is_empty() {
            text
        } else {
            joined = std::mem::take(&mut self.carry) + text;
            &joined
        };
        let (body, tail) = match body.rfind(char::is_whitespace) {
            Some(pos) => {
                let ws_len = body[pos..].chars().next().map_or(1, char::len_utf8);
                (&body[..pos], &body[pos + ws_len..])
            }
            None => ("", body),
        };
        let mut shards = Vec::new();
        let mut start = 0;
        while start < body.len() {
            let mut end = (start + CHUNK).min(body.len());
            while end < body.len() && !body.as_bytes()[end].is_ascii_whitespace() {
                end += 1;
            }
            shards.push(&body[start..end]);
            start = end;
        }
        let tokenizer = &self.tokenizer;
        let merged = shards
            .par_iter()
            .map(|shard| {
                let mut counts: HashMap<String, u64> = HashMap::new();
                for tok in shard.split_whitespace() {
                    *counts.entry(tokenizer.normalize(tok).into_owned()).or_insert(0) += 1;
                }
                counts
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        for (k, v) in merged {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.carry = tail.to_string();
    }

    pub fn finish(mut self, smoothing: SmoothingSpec) -> Result<UnigramModel> {
        let carry = std::mem::take(&mut self.carry);
        self.count(&carry);
        let total: u64 = self.counts.values().sum();
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut counts: BTreeMap<String, u64> = self.counts.into_iter().collect();
        if let TokenizerKind::Vocab(path) = &self.tokenizer.kind {
            let vocab = load_vocab(path)?;
            let mut full: BTreeMap<String, u64> = vocab
                .into_iter()
                .map(|t| (self.tokenizer.normalize(&t).into_owned(), 0))
                .collect();
            for (tok, c) in counts {
                match full.get_mut(&tok) {
                    Some(slot) => *slot += c,
                    None => {
                        return Err(Error::config(
                            "corpus",
                            format!("token `{tok}` is not in the vocabulary {}", path.display()),
                        ))
                    }
                }
            }
            counts = full;
        }
        let smoothing = match smoothing {
            SmoothingSpec::None => Smoothing::None,
            SmoothingSpec::AddK(k) => Smoothing::AddK(k),
            SmoothingSpec::Floor(Some(e)) => Smoothing::Floor(e),
            SmoothingSpec::Floor(None) => Smoothing::Floor(1.0 / (total as f64 + counts.len() as f64)),
        };
        let corpus_fingerprint = fingerprint_parts(
            "unigram-corpus",
            &[&self.raw.finish(), &self.tokenizer.name()],
        );
        Ok(UnigramModel {
            tokenizer: self.tokenizer,
            counts,
            total,
            smoothing,
            corpus_fingerprint,
        })
    }
}

/// Builds a unigram model from a reader, streaming in fixed-size chunks.
pub fn build_unigram<R: Read>(
    mut reader: R,
    tokenizer: TokenizerSpec,
    smoothing: SmoothingSpec,
) -> Result<UnigramModel> {
    let mut builder = UnigramBuilder::new(tokenizer);
    let mut buf = vec![0u8; 1 << 16];
    let mut pending: Vec<u8> = Vec::new();
    let mut offset: u64 = 0;
    loop {
        let n = reader.read(&mut buf).map_err(|e| Error::io("<corpus>", e))?;
        if n == 0 {
            break;
        }
        pending.extend_from_slice(&buf[..n]);
        let valid = match std::str::from_utf8(&pending) {
            Ok(_) => pending.len(),
            Err(e) if e.error_len().is_none() => e.valid_up_to(),
            Err(e) => {
                return Err(Error::InvalidUtf8 {
                    offset: offset + e.valid_up_to() as u64,
                })
            }
        };
        let text = std::str::from_utf8(&pending[..valid]).expect("validated");
        builder.feed(text);
        offset += valid as u64;
        pending.drain(..valid);
    }
    if !pending.is_empty() {
        return Err(Error::InvalidUtf8 { offset });
    }
    builder.finish(smoothing)
}

pub fn build_unigram_from_str(
    text: &str,
    tokenizer: TokenizerSpec,
    smoothing: SmoothingSpec,
) -> Result<UnigramModel> {
    let mut builder = UnigramBuilder::new(tokenizer);
    builder.feed_parallel(text);
    builder.finish(smoothing)
}

impl UnigramModel {
    pub fn tokenizer(&self) -> &TokenizerSpec {
        &self.tokenizer
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(self.tokenizer.normalize(token).as_ref()).copied().unwrap_or(0)
    }

    pub fn corpus_fingerprint(&self) -> &str {
        &self.corpus_fingerprint
    }

    /// Fingerprint of the model as a whole: corpus plus smoothing.
    pub fn fingerprint(&self) -> String {
        fingerprint_parts(
            "unigram",
            &[&self.corpus_fingerprint, &self.smoothing.to_string()],
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn prob(&self, token: &str) -> Result<f64> {
        let key = self.tokenizer.normalize(token);
        let count = self.counts.get(key.as_ref()).copied();
        let total = self.total as f64;
        match self.smoothing {
            Smoothing::None => match count {
                Some(c) if c > 0 => Ok(c as f64 / total),
                _ => Err(Error::OutOfVocabulary(token.to_string())),
            },
            Smoothing::AddK(k) => {
                // Tokens outside the vocabulary get the mass of an unseen
                // vocabulary entry; that mass sits outside the normalized set.
                let c = count.unwrap_or(0) as f64;
                Ok((c + k) / (total + k * self.counts.len() as f64))
            }
            Smoothing::Floor(eps) => match count {
                Some(c) if c > 0 => Ok(c as f64 / total),
                _ => Ok(eps),
            },
        }
    }

    /// Natural-log probability of one token.
    pub fn logprob(&self, token: &str) -> Result<f64> {
        Ok(self.prob(token)?.ln())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "#log natural")?;
        writeln!(out, "#tokenizer {}", self.tokenizer.name())?;
        writeln!(out, "#smoothing {}", self.smoothing)?;
        writeln!(out, "#total {}", self.total)?;
        writeln!(out, "#types {}", self.counts.len())?;
        writeln!(out, "#corpus_fingerprint {}", self.corpus_fingerprint)?;
        for (tok, c) in &self.counts {
            writeln!(out, "{c}\t{tok}")?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: BufRead>(reader: R, name: &str) -> Result<Self> {
        let mut tokenizer = None;
        let mut smoothing = None;
        let mut total = None;
        let mut types = None;
        let mut corpus_fingerprint = None;
        let mut counts = BTreeMap::new();
        let mut saw_magic = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            let lineno = i + 1;
            let err = |m: &str| Error::parse(name, lineno, m);
            if i == 0 {
                if line != MAGIC {
                    return Err(err("not a unigram model file"));
                }
                saw_magic = true;
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let (key, value) = h.split_once(' ').ok_or_else(|| err("malformed header"))?;
                match key {
                    "log" if value == "natural" => {}
                    "log" => return Err(err("only natural logarithms are supported")),
                    "tokenizer" => tokenizer = Some(TokenizerSpec::parse_name(value)?),
                    "smoothing" => {
                        smoothing = Some(Smoothing::parse_header(value).ok_or_else(|| err("bad smoothing"))?)
                    }
                    "total" => total = Some(value.parse::<u64>().map_err(|_| err("bad total"))?),
                    "types" => types = Some(value.parse::<usize>().map_err(|_| err("bad types"))?),
                    "corpus_fingerprint" => corpus_fingerprint = Some(value.to_string()),
                    _ => return Err(err("unknown header key")),
                }
                continue;
            }
            let (c, tok) = line.split_once('\t').ok_or_else(|| err("expected count<TAB>token"))?;
            let c: u64 = c.parse().map_err(|_| err("bad count"))?;
            if counts.insert(tok.to_string(), c).is_some() {
                return Err(err("duplicate token"));
            }
        }
        if !saw_magic {
            return Err(Error::parse(name, 1, "empty model file"));
        }
        let missing = |k: &str| Error::parse(name, 1, format!("missing header `{k}`"));
        let total = total.ok_or_else(|| missing("total"))?;
        if counts.values().sum::<u64>() != total {
            return Err(Error::parse(name, 1, "total does not equal the sum of counts"));
        }
        if types.is_some_and(|t| t != counts.len()) {
            return Err(Error::parse(name, 1, "types does not match the number of entries"));
        }
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(UnigramModel {
            tokenizer: tokenizer.ok_or_else(|| missing("tokenizer"))?,
            counts,
            total,
            smoothing: smoothing.ok_or_else(|| missing("smoothing"))?,
            corpus_fingerprint: corpus_fingerprint.ok_or_else(|| missing("corpus_fingerprint"))?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file), &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws() -> TokenizerSpec {
        TokenizerSpec::whitespace()
    }

    #[test]
    fn exact_frequencies() {
        let m = build_unigram_from_str("a a b", ws(), SmoothingSpec::None).unwrap();
        assert_eq!(m.prob("a").unwrap(), 2.0 / 3.0);
        assert_eq!(m.prob("b").unwrap(), 1.0 / 3.0);
        assert!((m.logprob("a").unwrap() - (-0.405465)).abs() < 1e-6);
        assert!(matches!(m.logprob("c"), Err(Error::OutOfVocabulary(_))));
    }

    #[test]
    fn add_k_with_vocab() {
        let dir = tempfile::tempdir().unwrap();
        let vocab = dir.path().join("vocab.txt");
        std::fs::write(&vocab, "a\nb\nc\n").unwrap();
        let spec: TokenizerSpec = format!("vocab:{}", vocab.display()).parse().unwrap();
        let m = build_unigram_from_str("a a b", spec, SmoothingSpec::AddK(1.0)).unwrap();
        assert_eq!(m.prob("c").unwrap(), 1.0 / 6.0);
        assert_eq!(m.prob("a").unwrap(), 3.0 / 6.0);
        let sum: f64 = m.iter().map(|(t, _)| m.prob(t).unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vocab_mode_rejects_unknown_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let vocab = dir.path().join("vocab.txt");
        std::fs::write(&vocab, "a\n").unwrap();
        let spec: TokenizerSpec = format!("vocab:{}", vocab.display()).parse().unwrap();
        assert!(build_unigram_from_str("a z", spec, SmoothingSpec::None).is_err());
    }

    #[test]
    fn degenerate_single_type() {
        let m = build_unigram_from_str("x x x", ws(), SmoothingSpec::None).unwrap();
        assert_eq!(m.logprob("x").unwrap(), 0.0);
    }

    #[test]
    fn floor_oov() {
        let m = build_unigram_from_str("a a b", ws(), SmoothingSpec::Floor(Some(1e-10))).unwrap();
        assert_eq!(m.logprob("zzz").unwrap(), (1e-10f64).ln());
        let auto = build_unigram_from_str("a a b", ws(), SmoothingSpec::default()).unwrap();
        assert_eq!(auto.smoothing(), Smoothing::Floor(1.0 / 5.0));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            build_unigram_from_str("  \n ", ws(), SmoothingSpec::None),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn stream_split_invariance() {
        let text = "the red crate let alone\nthe blue crate";
        let one = build_unigram_from_str(text, ws(), SmoothingSpec::default()).unwrap();
        let mut b = UnigramBuilder::new(ws());
        b.feed("the red cr");
        b.feed("ate let alone\nthe bl");
        b.feed("ue crate");
        let two = b.finish(SmoothingSpec::default()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn parallel_matches_sequential() {
        let text: String = (0..400_000).map(|i| format!("w{} ", i % 97)).collect();
        let par = build_unigram_from_str(&text, ws(), SmoothingSpec::default()).unwrap();
        let seq = build_unigram(text.as_bytes(), ws(), SmoothingSpec::default()).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn lowercase_changes_fingerprint() {
        let a = build_unigram_from_str("Let let", ws(), SmoothingSpec::None).unwrap();
        let b = build_unigram_from_str("Let let", ws().lowercased(true), SmoothingSpec::None).unwrap();
        assert_ne!(a.corpus_fingerprint(), b.corpus_fingerprint());
        assert_eq!(b.prob("LET").unwrap(), 1.0);
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let bytes = b"abc \xff def";
        match build_unigram(&bytes[..], ws(), SmoothingSpec::None) {
            Err(Error::InvalidUtf8 { offset }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let m = build_unigram_from_str("a a b # 3", ws(), SmoothingSpec::AddK(0.1)).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let back = UnigramModel::read_from(&buf[..], "mem").unwrap();
        assert_eq!(back, m);
        for (t, _) in m.iter() {
            assert_eq!(back.prob(t).unwrap().to_bits(), m.prob(t).unwrap().to_bits());
        }
    }

    #[test]
    fn smoothing_spec_parse() {
        assert_eq!("none".parse::<SmoothingSpec>().unwrap(), SmoothingSpec::None);
        assert_eq!("add-k:1".parse::<SmoothingSpec>().unwrap(), SmoothingSpec::AddK(1.0));
        assert_eq!("floor:1e-10".parse::<SmoothingSpec>().unwrap(), SmoothingSpec::Floor(Some(1e-10)));
        assert!("add-k:-1".parse::<SmoothingSpec>().is_err());
        assert!("laplace".parse::<SmoothingSpec>().is_err());
    }
}
