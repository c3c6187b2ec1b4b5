//! Token log-probability exchange format.
//!
//! One JSON object per line, UTF-8, `\n` terminated:
//!
//! ```text
//! {"item_id":"npi-000000-c","condition":"+m+l","tokens":["I","could",…],"logprobs":[-3.2,…],"model":"<fingerprint>"}
//! ```
//!
//! * `condition` is one of `+m+l`, `-m+l`, `+m-l`, `-m-l` (U+2212 is accepted
//!   for the minus sign on input);
//! * `tokens` are the target-sentence tokens only, never context tokens;
//! * `logprobs[i]` is the natural-log probability of `tokens[i]` given the
//!   context and `tokens[..i]`; it must be finite and at most 0;
//! * `model` is the scorer fingerprint and must be identical on every line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ngram::NGramModel;
use crate::scoring::{ItemScores, ScoredSentence};
use crate::template::{ConditionLabel, PerCondition, Suite, TestItem};
use crate::tokenize::{TokenizerKind, TokenizerSpec};
use crate::unigram::UnigramModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogprobRecord {
    pub item_id: String,
    pub condition: ConditionLabel,
    pub tokens: Vec<String>,
    pub logprobs: Vec<f64>,
    pub model: String,
}

impl LogprobRecord {
    fn check(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::record(&self.item_id, format!("{}: no tokens", self.condition)));
        }
        if self.tokens.len() != self.logprobs.len() {
            return Err(Error::record(
                &self.item_id,
                format!(
                    "{}: {} tokens but {} log-probabilities",
                    self.condition,
                    self.tokens.len(),
                    self.logprobs.len()
                ),
            ));
        }
        if let Some(lp) = self.logprobs.iter().find(|lp| !lp.is_finite() || **lp > 0.0) {
            return Err(Error::record(
                &self.item_id,
                format!("{}: log-probability {lp} is not a finite value <= 0", self.condition),
            ));
        }
        Ok(())
    }
}

pub fn write_records<W: Write>(records: &[LogprobRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<logprobs>", e))?;
    }
    out.flush().map_err(|e| Error::io("<logprobs>", e))
}

pub fn save_records(records: &[LogprobRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(records, BufWriter::new(file))
}

pub fn read_records<R: BufRead>(reader: R, name: &str) -> Result<Vec<LogprobRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogprobRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(name, i + 1, e.to_string()))?;
        rec.check()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_records(path: &Path) -> Result<Vec<LogprobRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(BufReader::new(file), &path.display().to_string())
}

/// Scores every condition of every item with the reference model, in parallel
/// over items. Output order follows the suite.
pub fn score_suite_with_ngram(model: &NGramModel, suite: &Suite) -> Result<Vec<LogprobRecord>> {
    let per_item: Vec<Vec<LogprobRecord>> = suite
        .items
        .par_iter()
        .map(|item| {
            item.conditions
                .iter()
                .map(|(c, stim)| {
                    let (tokens, logprobs) = model
                        .score_text(&stim.context, &stim.sentence)
                        .map_err(|e| Error::record(&item.item_id, format!("{c}: {e}")))?;
                    let rec = LogprobRecord {
                        item_id: item.item_id.clone(),
                        condition: c,
                        tokens,
                        logprobs,
                        model: model.fingerprint().to_string(),
                    };
                    rec.check()?;
                    Ok(rec)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_item.into_iter().flatten().collect())
}

/// Checks a record set against a suite and returns the per-(item, condition)
/// index plus the model fingerprint. With a whitespace tokenizer, record
/// tokens must equal the tokenization of the target sentence.
/// Records keyed by item and condition, plus the shared model fingerprint.
pub type RecordIndex<'a> = (HashMap<(&'a str, ConditionLabel), &'a LogprobRecord>, String);

pub fn validate_records<'a>(
    suite: &Suite,
    records: &'a [LogprobRecord],
    tokenizer: Option<&TokenizerSpec>,
) -> Result<RecordIndex<'a>> {
    let items: HashMap<&str, &TestItem> = suite.items.iter().map(|i| (i.item_id.as_str(), i)).collect();
    let mut index = HashMap::with_capacity(records.len());
    let mut model: Option<&str> = None;
    for r in records {
        r.check()?;
        match model {
            None => model = Some(&r.model),
            Some(m) if m != r.model => {
                return Err(Error::record(&r.item_id, "records come from more than one model"))
            }
            _ => {}
        }
        let item = items
            .get(r.item_id.as_str())
            .ok_or_else(|| Error::record(&r.item_id, "item is not in the suite"))?;
        if let Some(tok) = tokenizer.filter(|t| t.kind == TokenizerKind::Whitespace) {
            let expected = tok.tokenize(item.sentence(r.condition));
            let got: Vec<String> = r.tokens.iter().map(|t| tok.normalize(t).into_owned()).collect();
            if expected != got {
                return Err(Error::record(
                    &r.item_id,
                    format!(
                        "{}: token mismatch with suite sentence ({} tokens expected, {} found)",
                        r.condition,
                        expected.len(),
                        got.len()
                    ),
                ));
            }
        }
        if index.insert((r.item_id.as_str(), r.condition), r).is_some() {
            return Err(Error::record(&r.item_id, format!("duplicate record for {}", r.condition)));
        }
    }
    for item in &suite.items {
        for c in ConditionLabel::ALL {
            if !index.contains_key(&(item.item_id.as_str(), c)) {
                return Err(Error::record(&item.item_id, format!("no record for {c}")));
            }
        }
    }
    Ok((index, model.unwrap_or_default().to_string()))
}

/// Turns validated exchange records into per-item SLOR scores.
pub fn item_scores(
    suite: &Suite,
    records: &[LogprobRecord],
    unigram: &UnigramModel,
) -> Result<(HashMap<String, ItemScores>, String)> {
    let (index, model) = validate_records(suite, records, Some(unigram.tokenizer()))?;
    let mut out = HashMap::with_capacity(suite.items.len());
    for item in &suite.items {
        let slor = PerCondition::try_from_fn(|c| -> Result<f64> {
            let r = index[&(item.item_id.as_str(), c)];
            let scored = ScoredSentence::new(r.tokens.clone(), &r.logprobs, unigram)
                .map_err(|e| Error::record(&item.item_id, format!("{c}: {e}")))?;
            Ok(scored.slor)
        })?;
        out.insert(item.item_id.clone(), ItemScores::from_slor(&item.item_id, slor)?);
    }
    Ok((out, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_checks() {
        let mut r = LogprobRecord {
            item_id: "x".into(),
            condition: ConditionLabel::PLUS_MANIP_PLUS_LTALN,
            tokens: vec!["a".into(), "b".into()],
            logprobs: vec![-1.0],
            model: "m".into(),
        };
        assert!(r.check().is_err());
        r.logprobs = vec![-1.0, 0.5];
        assert!(r.check().is_err());
        r.logprobs = vec![-1.0, 0.0];
        r.check().unwrap();
    }

    #[test]
    fn records_round_trip_exactly() {
        let r = LogprobRecord {
            item_id: "npi-000001-s".into(),
            condition: ConditionLabel::MINUS_MANIP_MINUS_LTALN,
            tokens: vec!["I".into(), "could".into()],
            logprobs: vec![-0.1 - 0.2, -1e-300],
            model: "abc".into(),
        };
        let mut buf = Vec::new();
        write_records(std::slice::from_ref(&r), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"condition\":\"-m-l\""));
        let back = read_records(&buf[..], "mem").unwrap();
        assert_eq!(back[0].logprobs[0].to_bits(), r.logprobs[0].to_bits());
        assert_eq!(back, vec![r]);
    }
}
