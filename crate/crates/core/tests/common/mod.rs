#![allow(dead_code)]

use std::collections::HashMap;

use letalone::lexicon::{LexiconConfig, Negation, Noun, Predicate};
use letalone::scoring::ItemScores;
use letalone::template::{ConditionLabel, Order, PerCondition, Suite};
use rand::Rng;

pub fn lexicon(verbs: &[(&str, &str)], subjects: &[&str], nouns: &[&str], mods: &[&str]) -> LexiconConfig {
    LexiconConfig {
        subjects: subjects.iter().map(|s| s.to_string()).collect(),
        second_subject: "you".into(),
        modifiers: mods.iter().map(|s| s.to_string()).collect(),
        nouns: nouns.iter().map(|n| Noun::singular(*n)).collect(),
        domain_nouns: Default::default(),
        predicates: verbs
            .iter()
            .map(|(v, d)| Predicate {
                verb: v.to_string(),
                domain: d.to_string(),
                nouns: None,
            })
            .collect(),
        comparatives: [
            ("weight".to_string(), "heavier than".to_string()),
            ("price".to_string(), "more expensive than".to_string()),
            ("height".to_string(), "taller than".to_string()),
        ]
        .into(),
        negation: Negation::default(),
    }
}

/// Two predicates, one subject, two nouns, three modifiers: 24 items.
pub fn toy_lexicon() -> LexiconConfig {
    lexicon(
        &[("lift", "weight"), ("afford", "price")],
        &["I"],
        &["crate", "box"],
        &["blue", "red", "green"],
    )
}

pub const TOY_CORPUS: &str = "\
I couldn't lift the blue crate let alone the red crate.
She could not afford the box and the green box.
The red crate is heavier than the blue crate.
They let the dog out and left it alone.
Much less is known about the green box than the red one.
I could lift the box more than once.
";

/// SLORs per condition from `rng`; `ties` rounds them so that equal deltas occur.
pub fn random_scores<R: Rng>(suite: &Suite, rng: &mut R, ties: bool) -> HashMap<String, ItemScores> {
    suite
        .items
        .iter()
        .map(|item| {
            let slor = PerCondition::from_fn(|_| {
                let x: f64 = rng.gen_range(-3.0..3.0);
                if ties {
                    x.round()
                } else {
                    x
                }
            });
            (item.item_id.clone(), ItemScores::from_slor(item.item_id.clone(), slor).unwrap())
        })
        .collect()
}

/// Straight-line accuracy: loop over canonical items, find the twin by a
/// linear scan and apply the comparison by hand.
pub fn brute_force(suite: &Suite, scores: &HashMap<String, ItemScores>, strict: bool) -> (Vec<bool>, f64) {
    let correct = |id: &str| {
        let s = &scores[id].slor;
        let dl = s[ConditionLabel::MINUS_MANIP_PLUS_LTALN] - s[ConditionLabel::PLUS_MANIP_PLUS_LTALN];
        let da = s[ConditionLabel::MINUS_MANIP_MINUS_LTALN] - s[ConditionLabel::PLUS_MANIP_MINUS_LTALN];
        if strict {
            dl > da
        } else {
            dl >= da
        }
    };
    let mut joint = Vec::new();
    for item in &suite.items {
        if item.order != Order::Canonical {
            continue;
        }
        let twin = suite.items.iter().find(|t| t.item_id == item.twin_id).unwrap();
        joint.push(correct(&item.item_id) && correct(&twin.item_id));
    }
    let hits = joint.iter().filter(|b| **b).count();
    let accuracy = hits as f64 / (suite.items.len() / 2) as f64;
    (joint, accuracy)
}

/// Lines matching `pattern` as a whole word, found by plain substring search
/// on the lowercased line with a hand-written boundary check.
pub fn has_word(line: &str, pattern: &str) -> bool {
    let hay = line.to_ascii_lowercase();
    let is_wordish = |c: char| c.is_alphabetic() || c == '-' || c == '\'' || c == '\u{2019}';
    hay.match_indices(pattern).any(|(i, m)| {
        let before = hay[..i].chars().next_back();
        let after = hay[i + m.len()..].chars().next();
        !before.is_some_and(is_wordish) && !after.is_some_and(is_wordish)
    })
}
