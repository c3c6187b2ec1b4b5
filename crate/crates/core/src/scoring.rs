//! SLOR, delta-SLOR and twin-pair accuracy.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::template::{ConditionLabel, Order, PerCondition, Property, Suite};
use crate::unigram::UnigramModel;

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Per-token log-odds of the model probability against the unigram product.
pub fn slor(lm_logprob_total: f64, token_unigram_logprobs: &[f64]) -> Result<f64> {
    if token_unigram_logprobs.is_empty() {
        return Err(Error::EmptySequence);
    }
    finite(lm_logprob_total, "model log-probability")?;
    let mut unigram_total = 0.0;
    for &lp in token_unigram_logprobs {
        unigram_total += finite(lp, "unigram log-probability")?;
    }
    Ok((lm_logprob_total - unigram_total) / token_unigram_logprobs.len() as f64)
}

/// SLOR drop caused by the manipulation.
pub fn delta_slor(s_minus_manip: f64, s_plus_manip: f64) -> Result<f64> {
    Ok(finite(s_minus_manip, "SLOR")? - finite(s_plus_manip, "SLOR")?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// `delta(+LtAln) >= delta(-LtAln)`; ties count as correct.
    #[default]
    Inclusive,
    /// Strict `>`, for robustness analysis.
    Strict,
}

pub fn item_correct(delta_ltaln: f64, delta_and: f64) -> bool {
    item_correct_with(delta_ltaln, delta_and, TieRule::Inclusive)
}

pub fn item_correct_with(delta_ltaln: f64, delta_and: f64, rule: TieRule) -> bool {
    match rule {
        TieRule::Inclusive => delta_ltaln >= delta_and,
        TieRule::Strict => delta_ltaln > delta_and,
    }
}

/// One target sentence scored against a model and a unigram baseline.
/// Context tokens never enter `tokens`, `n` or either total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub tokens: Vec<String>,
    pub lm_logprob_total: f64,
    pub n: usize,
    pub unigram_logprob_total: f64,
    pub slor: f64,
}

impl ScoredSentence {
    pub fn new(tokens: Vec<String>, lm_logprobs: &[f64], unigram: &UnigramModel) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptySequence);
        }
        if tokens.len() != lm_logprobs.len() {
            return Err(Error::config(
                "logprobs",
                format!("{} tokens but {} log-probabilities", tokens.len(), lm_logprobs.len()),
            ));
        }
        let mut lm_total = 0.0;
        for &lp in lm_logprobs {
            lm_total += finite(lp, "model log-probability")?;
        }
        let uni: Vec<f64> = tokens.iter().map(|t| unigram.logprob(t)).collect::<Result<_>>()?;
        let unigram_total: f64 = uni.iter().sum();
        let s = slor(lm_total, &uni)?;
        Ok(ScoredSentence {
            n: tokens.len(),
            tokens,
            lm_logprob_total: lm_total,
            unigram_logprob_total: unigram_total,
            slor: s,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScores {
    pub item_id: String,
    pub slor: PerCondition<f64>,
    pub delta_ltaln: f64,
    pub delta_and: f64,
}

impl ItemScores {
    pub fn from_slor(item_id: impl Into<String>, slor: PerCondition<f64>) -> Result<Self> {
        let delta_ltaln = delta_slor(
            slor[ConditionLabel::MINUS_MANIP_PLUS_LTALN],
            slor[ConditionLabel::PLUS_MANIP_PLUS_LTALN],
        )?;
        let delta_and = delta_slor(
            slor[ConditionLabel::MINUS_MANIP_MINUS_LTALN],
            slor[ConditionLabel::PLUS_MANIP_MINUS_LTALN],
        )?;
        Ok(ItemScores {
            item_id: item_id.into(),
            slor,
            delta_ltaln,
            delta_and,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemOutcome {
    pub item_id: String,
    pub order: Order,
    pub template: String,
    pub slor: PerCondition<f64>,
    pub delta_ltaln: f64,
    pub delta_and: f64,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub items: [ItemOutcome; 2],
    pub joint_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub property: Property,
    pub scenario: String,
    pub seed: String,
    /// Item rows, both orders counted.
    pub k: usize,
    pub pairs: usize,
    pub correct_pairs: usize,
    pub accuracy: f64,
    pub tie_rule: TieRule,
    pub lexicon_fingerprint: String,
    pub model_fingerprint: String,
    pub unigram_fingerprint: String,
    pub records: Vec<PairOutcome>,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub tie_rule: TieRule,
    pub scenario: String,
    pub seed: String,
    pub model_fingerprint: String,
    pub unigram_fingerprint: String,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            tie_rule: TieRule::Inclusive,
            scenario: "NoFiltering".into(),
            seed: "seed-0".into(),
            model_fingerprint: String::new(),
            unigram_fingerprint: String::new(),
        }
    }
}

/// Accuracy over twin pairs: a pair counts only when both orders are correct.
pub fn evaluate_suite(suite: &Suite, scores: &HashMap<String, ItemScores>, opts: &EvalOptions) -> Result<SuiteResult> {
    let index: HashMap<&str, usize> = suite
        .items
        .iter()
        .enumerate()
        .map(|(i, item)| (item.item_id.as_str(), i))
        .collect();
    let outcome = |i: usize| -> Result<ItemOutcome> {
        let item = &suite.items[i];
        let s = scores
            .get(&item.item_id)
            .ok_or_else(|| Error::MissingItem(item.item_id.clone()))?;
        Ok(ItemOutcome {
            item_id: item.item_id.clone(),
            order: item.order,
            template: item.filler.template_key(),
            slor: s.slor.clone(),
            delta_ltaln: s.delta_ltaln,
            delta_and: s.delta_and,
            correct: item_correct_with(s.delta_ltaln, s.delta_and, opts.tie_rule),
        })
    };

    let mut records = Vec::with_capacity(suite.pairs());
    let mut paired = 0usize;
    for (i, item) in suite.items.iter().enumerate() {
        let &j = index.get(item.twin_id.as_str()).ok_or_else(|| Error::MissingTwin {
            item: item.item_id.clone(),
            twin: item.twin_id.clone(),
        })?;
        if suite.items[j].twin_id != item.item_id || j == i {
            return Err(Error::record(&item.item_id, "twin link is not mutual"));
        }
        if item.order != Order::Canonical {
            continue;
        }
        if suite.items[j].order != Order::Swapped {
            return Err(Error::record(&item.item_id, "twin has the same order"));
        }
        let a = outcome(i)?;
        let b = outcome(j)?;
        let joint_correct = a.correct && b.correct;
        records.push(PairOutcome {
            items: [a, b],
            joint_correct,
        });
        paired += 2;
    }
    if paired != suite.items.len() {
        return Err(Error::config("suite", "items without a canonical twin"));
    }
    if records.is_empty() {
        return Err(Error::config("suite", "no items to evaluate"));
    }
    let correct_pairs = records.iter().filter(|r| r.joint_correct).count();
    Ok(SuiteResult {
        property: suite.property,
        scenario: opts.scenario.clone(),
        seed: opts.seed.clone(),
        k: suite.k(),
        pairs: records.len(),
        correct_pairs,
        accuracy: correct_pairs as f64 / records.len() as f64,
        tie_rule: opts.tie_rule,
        lexicon_fingerprint: suite.lexicon_fingerprint.clone(),
        model_fingerprint: opts.model_fingerprint.clone(),
        unigram_fingerprint: opts.unigram_fingerprint.clone(),
        records,
    })
}

impl SuiteResult {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
