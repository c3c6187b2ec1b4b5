//! Lexicon configuration for the templatic suites.
//!
//! The bundled lexicons are a reconstruction: the original inventories were
//! never released. They are sized so that the formal suites contain 5217 twin
//! pairs and the semantic suite 16887 twin pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprinter;

const DEFAULT_FORMAL: &str = include_str!("../lexicons/formal.json");
const DEFAULT_SEMANTIC: &str = include_str!("../lexicons/semantic.json");

/// An object noun. Plural nouns take "are" in comparative follow-ups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "NounRepr", into = "NounRepr")]
pub struct Noun {
    pub text: String,
    pub plural: bool,
}

impl Noun {
    pub fn singular(text: impl Into<String>) -> Self {
        Noun {
            text: text.into(),
            plural: false,
        }
    }

    pub fn plural(text: impl Into<String>) -> Self {
        Noun {
            text: text.into(),
            plural: true,
        }
    }

    pub fn copula(&self) -> &'static str {
        if self.plural {
            "are"
        } else {
            "is"
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NounRepr {
    Bare(String),
    Full {
        text: String,
        #[serde(default)]
        plural: bool,
    },
}

impl From<NounRepr> for Noun {
    fn from(r: NounRepr) -> Self {
        match r {
            NounRepr::Bare(text) => Noun::singular(text),
            NounRepr::Full { text, plural } => Noun { text, plural },
        }
    }
}

impl From<Noun> for NounRepr {
    fn from(n: Noun) -> Self {
        if n.plural {
            NounRepr::Full {
                text: n.text,
                plural: true,
            }
        } else {
            NounRepr::Bare(n.text)
        }
    }
}

/// A negatable transitive predicate in base form ("lift", "pay for").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub verb: String,
    /// Scalar domain, e.g. "weight" or "price". Must have a comparative.
    pub domain: String,
    /// Restricts the objects of this predicate; falls back to the domain's
    /// nouns and then to the global noun list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nouns: Option<Vec<Noun>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Negation {
    /// Negated modal used in the base frame.
    pub negative: String,
    /// Positive modal substituted by the negation-removal manipulation.
    pub positive: String,
    /// Words counted as negation when checking licensor removal.
    pub tokens: Vec<String>,
}

impl Default for Negation {
    fn default() -> Self {
        Negation {
            negative: "couldn't".into(),
            positive: "could".into(),
            tokens: ["couldn't", "not", "n't", "never", "no", "cannot", "can't"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl Negation {
    /// Number of whitespace words in `sentence` that are negation tokens.
    pub fn count_in(&self, sentence: &str) -> usize {
        sentence
            .split_whitespace()
            .map(|w| {
                w.trim_matches(|c: char| c.is_ascii_punctuation() && c != '\'')
                    .to_lowercase()
            })
            .filter(|w| self.tokens.iter().any(|t| t.eq_ignore_ascii_case(w)))
            .count()
    }
}

fn default_second_subject() -> String {
    "you".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconConfig {
    /// Subject NPs as they appear mid-sentence ("I", "she", "Max").
    pub subjects: Vec<String>,
    /// Subject of the elided second conjunct ("... let alone you the red crate").
    #[serde(default = "default_second_subject")]
    pub second_subject: String,
    /// Neutral adjectives distinguishing the two focus NPs.
    pub modifiers: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nouns: Vec<Noun>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub domain_nouns: BTreeMap<String, Vec<Noun>>,
    pub predicates: Vec<Predicate>,
    /// Scalar domain to comparative phrase ("heavier than").
    #[serde(deserialize_with = "unique_keys")]
    pub comparatives: BTreeMap<String, String>,
    #[serde(default)]
    pub negation: Negation,
}

fn unique_keys<'de, D>(de: D) -> std::result::Result<BTreeMap<String, String>, D::Error>
where
    D: Deserializer<'de>,
{
    struct UniqueVisitor;

    impl<'de> Visitor<'de> for UniqueVisitor {
        type Value = BTreeMap<String, String>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map from scalar domain to comparative phrase")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some((k, v)) = map.next_entry::<String, String>()? {
                if out.contains_key(&k) {
                    return Err(serde::de::Error::custom(format!(
                        "domain `{k}` has more than one comparative"
                    )));
                }
                out.insert(k, v);
            }
            Ok(out)
        }
    }

    de.deserialize_map(UniqueVisitor)
}

/// One predicate/noun combination, the unit the per-template analysis groups by.
#[derive(Debug, Clone, Copy)]
pub struct Template<'a> {
    pub predicate: &'a Predicate,
    pub noun: &'a Noun,
    pub comparative: &'a str,
}

impl LexiconConfig {
    pub fn default_formal() -> Self {
        serde_json::from_str(DEFAULT_FORMAL).expect("bundled formal lexicon is valid JSON")
    }

    pub fn default_semantic() -> Self {
        serde_json::from_str(DEFAULT_SEMANTIC).expect("bundled semantic lexicon is valid JSON")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let lexicon: LexiconConfig =
            serde_json::from_str(text).map_err(|e| Error::config("lexicon", e.to_string()))?;
        lexicon.validate()?;
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn nouns_for<'a>(&'a self, predicate: &'a Predicate) -> &'a [Noun] {
        if let Some(nouns) = &predicate.nouns {
            return nouns;
        }
        if let Some(nouns) = self.domain_nouns.get(&predicate.domain) {
            return nouns;
        }
        &self.nouns
    }

    /// Predicate/noun templates in generation order.
    pub fn templates(&self) -> impl Iterator<Item = Template<'_>> {
        self.predicates.iter().flat_map(move |p| {
            let comparative = self
                .comparatives
                .get(&p.domain)
                .map(String::as_str)
                .unwrap_or("");
            self.nouns_for(p).iter().map(move |noun| Template {
                predicate: p,
                noun,
                comparative,
            })
        })
    }

    pub fn template_count(&self) -> usize {
        self.predicates.iter().map(|p| self.nouns_for(p).len()).sum()
    }

    /// Twin pairs per suite: subjects x templates x unordered modifier pairs.
    pub fn pair_count(&self) -> usize {
        let m = self.modifiers.len();
        self.subjects.len() * self.template_count() * m * m.saturating_sub(1) / 2
    }

    /// Items per suite, counting both modifier orders.
    pub fn item_count(&self) -> usize {
        2 * self.pair_count()
    }

    pub fn fingerprint(&self) -> String {
        let mut fp = Fingerprinter::with_domain("lexicon");
        fp.update(&serde_json::to_vec(self).expect("lexicon serializes"));
        fp.finish()
    }

    pub fn validate(&self) -> Result<()> {
        fn text(slot: &str, s: &str) -> Result<()> {
            if s.trim().is_empty() {
                return Err(Error::config(slot, "empty string"));
            }
            if s.contains('\n') || s.contains('\r') {
                return Err(Error::config(slot, format!("`{s}` contains a newline")));
            }
            Ok(())
        }
        fn nonempty<T>(slot: &str, v: &[T]) -> Result<()> {
            if v.is_empty() {
                return Err(Error::config(slot, "required slot is empty"));
            }
            Ok(())
        }

        nonempty("subjects", &self.subjects)?;
        for s in &self.subjects {
            text("subjects", s)?;
        }
        text("second_subject", &self.second_subject)?;

        if self.modifiers.len() < 2 {
            return Err(Error::config("modifiers", "at least two modifiers are required"));
        }
        let mut seen = BTreeSet::new();
        for m in &self.modifiers {
            text("modifiers", m)?;
            if m.split_whitespace().count() != 1 {
                return Err(Error::config("modifiers", format!("`{m}` is not a single word")));
            }
            if !seen.insert(m.as_str()) {
                return Err(Error::config("modifiers", format!("duplicate modifier `{m}`")));
            }
        }

        nonempty("predicates", &self.predicates)?;
        for p in &self.predicates {
            text("predicates.verb", &p.verb)?;
            text("predicates.domain", &p.domain)?;
            match self.comparatives.get(&p.domain) {
                Some(c) => text(&format!("comparatives.{}", p.domain), c)?,
                None => {
                    return Err(Error::config(
                        format!("comparatives.{}", p.domain),
                        format!("no comparative phrase for the domain of `{}`", p.verb),
                    ))
                }
            }
            let nouns = self.nouns_for(p);
            if nouns.is_empty() {
                return Err(Error::config(
                    "nouns",
                    format!("no nouns available for predicate `{}`", p.verb),
                ));
            }
            for n in nouns {
                text("nouns", &n.text)?;
            }
        }

        let neg = &self.negation;
        text("negation.negative", &neg.negative)?;
        text("negation.positive", &neg.positive)?;
        if neg.count_in(&neg.negative) != 1 {
            return Err(Error::config(
                "negation.tokens",
                format!("negative form `{}` must be exactly one negation token", neg.negative),
            ));
        }
        if neg.count_in(&neg.positive) != 0 {
            return Err(Error::config(
                "negation.positive",
                format!("positive form `{}` is itself a negation token", neg.positive),
            ));
        }
        let words = self
            .subjects
            .iter()
            .chain(std::iter::once(&self.second_subject))
            .chain(&self.modifiers)
            .chain(self.predicates.iter().map(|p| &p.verb))
            .chain(self.predicates.iter().flat_map(|p| self.nouns_for(p)).map(|n| &n.text));
        for w in words {
            if neg.count_in(w) != 0 {
                return Err(Error::config(
                    "negation.tokens",
                    format!("lexical item `{w}` contains a negation token"),
                ));
            }
        }
        Ok(())
    }
}
