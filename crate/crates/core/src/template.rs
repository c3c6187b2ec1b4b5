//! Templatic minimal-pair generation in the 2x2 {±Manip} x {±LtAln} design.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lexicon::{LexiconConfig, Noun, Template};

pub const LET_ALONE: &str = "let alone";
pub const AND: &str = "and";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    ConjClause,
    ConjVp,
    ConjGap,
    Cleft,
    Npi,
    ScalarSemantics,
}

impl Property {
    /// Reporting order: the three constraint tests, the two controls, then meaning.
    pub const ALL: [Property; 6] = [
        Property::ConjClause,
        Property::Cleft,
        Property::Npi,
        Property::ConjVp,
        Property::ConjGap,
        Property::ScalarSemantics,
    ];

    pub const FORMAL: [Property; 5] = [
        Property::ConjClause,
        Property::Cleft,
        Property::Npi,
        Property::ConjVp,
        Property::ConjGap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::ConjClause => "conj_clause",
            Property::ConjVp => "conj_vp",
            Property::ConjGap => "conj_gap",
            Property::Cleft => "cleft",
            Property::Npi => "npi",
            Property::ScalarSemantics => "scalar_semantics",
        }
    }

    pub fn is_formal(self) -> bool {
        self != Property::ScalarSemantics
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Property::ConjClause => "Conjunction (Clause)",
            Property::ConjVp => "Conjunction (VP)",
            Property::ConjGap => "Conjunction (Gap)",
            Property::Cleft => "Clefting",
            Property::Npi => "NPI",
            Property::ScalarSemantics => "Scalar Semantics",
        }
    }

    /// Expected accuracy for a model that has the humanlike generalization.
    pub fn prediction(self) -> &'static str {
        match self {
            Property::ConjVp | Property::ConjGap => "near 25%",
            _ => "near 100%",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownProperty(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    fn parse(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            // ASCII hyphen-minus and U+2212 are both accepted.
            '-' | '\u{2212}' => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// One cell of the ±Manip x ±LtAln cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConditionLabel {
    pub manip: Sign,
    pub ltaln: Sign,
}

impl ConditionLabel {
    pub const PLUS_MANIP_PLUS_LTALN: ConditionLabel = ConditionLabel::new(Sign::Plus, Sign::Plus);
    pub const MINUS_MANIP_PLUS_LTALN: ConditionLabel = ConditionLabel::new(Sign::Minus, Sign::Plus);
    pub const PLUS_MANIP_MINUS_LTALN: ConditionLabel = ConditionLabel::new(Sign::Plus, Sign::Minus);
    pub const MINUS_MANIP_MINUS_LTALN: ConditionLabel = ConditionLabel::new(Sign::Minus, Sign::Minus);

    /// The full cross, in file order.
    pub const ALL: [ConditionLabel; 4] = [
        Self::PLUS_MANIP_PLUS_LTALN,
        Self::MINUS_MANIP_PLUS_LTALN,
        Self::PLUS_MANIP_MINUS_LTALN,
        Self::MINUS_MANIP_MINUS_LTALN,
    ];

    pub const fn new(manip: Sign, ltaln: Sign) -> Self {
        ConditionLabel { manip, ltaln }
    }

    fn index(self) -> usize {
        match (self.manip, self.ltaln) {
            (Sign::Plus, Sign::Plus) => 0,
            (Sign::Minus, Sign::Plus) => 1,
            (Sign::Plus, Sign::Minus) => 2,
            (Sign::Minus, Sign::Minus) => 3,
        }
    }

    /// Key used in files: `+m+l`, `-m+l`, `+m-l`, `-m-l`.
    pub fn key(self) -> String {
        format!("{}m{}l", self.manip.symbol(), self.ltaln.symbol())
    }

    pub fn parse_key(key: &str) -> Option<Self> {
        let chars: Vec<char> = key.chars().collect();
        match chars.as_slice() {
            [a, 'm', b, 'l'] => Some(ConditionLabel::new(Sign::parse(*a)?, Sign::parse(*b)?)),
            _ => None,
        }
    }
}

impl fmt::Display for ConditionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl Serialize for ConditionLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for ConditionLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ConditionLabel::parse_key(&s)
            .ok_or_else(|| de::Error::custom(format!("invalid condition key `{s}`")))
    }
}

/// A value for each of the four conditions. Serialized as a map keyed by
/// condition; all four keys are required.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerCondition<T> {
    values: [T; 4],
}

impl<T> PerCondition<T> {
    pub fn from_fn(mut f: impl FnMut(ConditionLabel) -> T) -> Self {
        PerCondition {
            values: ConditionLabel::ALL.map(&mut f),
        }
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(ConditionLabel) -> std::result::Result<T, E>) -> std::result::Result<Self, E> {
        let [a, b, c, d] = ConditionLabel::ALL;
        Ok(PerCondition {
            values: [f(a)?, f(b)?, f(c)?, f(d)?],
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (ConditionLabel, &T)> {
        ConditionLabel::ALL.into_iter().zip(self.values.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerCondition<U> {
        PerCondition {
            values: [
                f(&self.values[0]),
                f(&self.values[1]),
                f(&self.values[2]),
                f(&self.values[3]),
            ],
        }
    }
}

impl<T> Index<ConditionLabel> for PerCondition<T> {
    type Output = T;

    fn index(&self, c: ConditionLabel) -> &T {
        &self.values[c.index()]
    }
}

impl<T> IndexMut<ConditionLabel> for PerCondition<T> {
    fn index_mut(&mut self, c: ConditionLabel) -> &mut T {
        &mut self.values[c.index()]
    }
}

impl<T: Serialize> Serialize for PerCondition<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        for (c, v) in self.iter() {
            map.serialize_entry(&c.key(), v)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for PerCondition<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = PerCondition<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map with the four condition keys")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut slots: [Option<T>; 4] = [None, None, None, None];
                while let Some(key) = map.next_key::<ConditionLabel>()? {
                    let slot = &mut slots[key.index()];
                    if slot.is_some() {
                        return Err(de::Error::custom(format!("duplicate condition `{key}`")));
                    }
                    *slot = Some(map.next_value()?);
                }
                let [a, b, c, d] = slots;
                match (a, b, c, d) {
                    (Some(a), Some(b), Some(c), Some(d)) => Ok(PerCondition {
                        values: [a, b, c, d],
                    }),
                    _ => Err(de::Error::custom("all four conditions are required")),
                }
            }
        }

        d.deserialize_map(V(std::marker::PhantomData))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Canonical,
    Swapped,
}

/// Context and target text for one condition. The context is empty for the
/// formal suites.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Stimulus {
    pub context: String,
    pub sentence: String,
}

/// Lexical fillers of an item, kept so results can be grouped per template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filler {
    pub subject: String,
    pub predicate: String,
    pub noun: String,
    pub domain: String,
    pub comparative: String,
    pub first_modifier: String,
    pub second_modifier: String,
}

impl Filler {
    /// Grouping key for per-template breakdowns.
    pub fn template_key(&self) -> String {
        format!("{}|{}|{}", self.predicate, self.noun, self.comparative)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestItem {
    pub item_id: String,
    pub twin_id: String,
    pub property: Property,
    pub order: Order,
    pub conditions: PerCondition<Stimulus>,
    pub filler: Filler,
}

impl TestItem {
    pub fn sentence(&self, c: ConditionLabel) -> &str {
        &self.conditions[c].sentence
    }

    pub fn context(&self, c: ConditionLabel) -> &str {
        &self.conditions[c].context
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub property: Property,
    pub items: Vec<TestItem>,
    pub lexicon_fingerprint: String,
}

impl Suite {
    /// Item rows, counting both modifier orders.
    pub fn k(&self) -> usize {
        self.items.len()
    }

    /// Twin pairs, counting each item and its twin once.
    pub fn pairs(&self) -> usize {
        self.items.len() / 2
    }

    pub fn get(&self, item_id: &str) -> Option<&TestItem> {
        self.items.iter().find(|i| i.item_id == item_id)
    }

    /// Checks grid completeness, property homogeneity and twin closure.
    pub fn validate(&self) -> Result<()> {
        let index: std::collections::HashMap<&str, &TestItem> =
            self.items.iter().map(|i| (i.item_id.as_str(), i)).collect();
        if index.len() != self.items.len() {
            return Err(Error::config("items", "duplicate item ids"));
        }
        for item in &self.items {
            if item.property != self.property {
                return Err(Error::record(&item.item_id, "property differs from suite"));
            }
            let twin = index.get(item.twin_id.as_str()).ok_or_else(|| Error::MissingTwin {
                item: item.item_id.clone(),
                twin: item.twin_id.clone(),
            })?;
            if twin.twin_id != item.item_id || twin.order == item.order {
                return Err(Error::record(&item.item_id, "twin link is not mutual"));
            }
            for (c, s) in item.conditions.iter() {
                if s.sentence.is_empty() {
                    return Err(Error::record(&item.item_id, format!("empty sentence for {c}")));
                }
                if self.property.is_formal() != s.context.is_empty() {
                    return Err(Error::record(&item.item_id, format!("unexpected context for {c}")));
                }
            }
        }
        Ok(())
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn conjunction(ltaln: Sign) -> &'static str {
    match ltaln {
        Sign::Plus => LET_ALONE,
        Sign::Minus => AND,
    }
}

struct Frame<'a> {
    lexicon: &'a LexiconConfig,
    subject: &'a str,
    verb: &'a str,
    noun: &'a Noun,
    first: &'a str,
    second: &'a str,
}

impl Frame<'_> {
    fn np(&self, modifier: &str) -> String {
        format!("the {} {}", modifier, self.noun.text)
    }

    /// "SUBJ couldn't PRED the MOD1 NOUN CONJ the MOD2 NOUN."
    fn base(&self, modal: &str, conj: &str) -> String {
        capitalize(&format!(
            "{} {} {} {} {} {}.",
            self.subject,
            modal,
            self.verb,
            self.np(self.first),
            conj,
            self.np(self.second)
        ))
    }

    fn formal(&self, property: Property, c: ConditionLabel) -> String {
        let neg = &self.lexicon.negation.negative;
        let conj = conjunction(c.ltaln);
        if c.manip == Sign::Minus {
            return self.base(neg, conj);
        }
        let (subj, verb, np1, np2) = (self.subject, self.verb, self.np(self.first), self.np(self.second));
        let s = match property {
            Property::ConjClause => format!("{subj} {neg} {verb} {np1} {conj} {subj} {neg} {verb} {np2}."),
            Property::ConjVp => format!("{subj} {neg} {verb} {np1} {conj} {verb} {np2}."),
            Property::ConjGap => {
                format!("{subj} {neg} {verb} {np1} {conj} {} {np2}.", self.lexicon.second_subject)
            }
            Property::Cleft => format!("It is {np1} {conj} {np2} that {subj} {neg} {verb}."),
            Property::Npi => return self.base(&self.lexicon.negation.positive, conj),
            Property::ScalarSemantics => unreachable!("not a formal property"),
        };
        capitalize(&s)
    }

    /// Comparative follow-up asserting that `higher` outranks `lower`.
    fn follow_up(&self, comparative: &str, higher: &str, lower: &str) -> String {
        format!(
            "The {} {} {} {} {}.",
            higher,
            self.noun.text,
            self.noun.copula(),
            comparative,
            self.np(lower)
        )
    }

    /// Context is the let-alone or "and" sentence. The -Manip follow-up places
    /// the second focus NP higher on the scale; +Manip swaps the NPs. The same
    /// rule labels both context types.
    fn semantic(&self, comparative: &str, c: ConditionLabel) -> Stimulus {
        let context = self.base(&self.lexicon.negation.negative, conjunction(c.ltaln));
        let sentence = match c.manip {
            Sign::Minus => self.follow_up(comparative, self.second, self.first),
            Sign::Plus => self.follow_up(comparative, self.first, self.second),
        };
        Stimulus { context, sentence }
    }
}

fn generate(lexicon: &LexiconConfig, property: Property) -> Result<Suite> {
    lexicon.validate()?;
    let mut items = Vec::with_capacity(lexicon.item_count());
    let mut pair = 0usize;
    let templates: Vec<Template<'_>> = lexicon.templates().collect();
    for template in &templates {
        for subject in &lexicon.subjects {
            for (i, a) in lexicon.modifiers.iter().enumerate() {
                for b in &lexicon.modifiers[i + 1..] {
                    let canonical = format!("{}-{:06}-c", property, pair);
                    let swapped = format!("{}-{:06}-s", property, pair);
                    for (order, first, second) in [(Order::Canonical, a, b), (Order::Swapped, b, a)] {
                        let frame = Frame {
                            lexicon,
                            subject,
                            verb: &template.predicate.verb,
                            noun: template.noun,
                            first,
                            second,
                        };
                        let conditions = PerCondition::from_fn(|c| {
                            if property.is_formal() {
                                Stimulus {
                                    context: String::new(),
                                    sentence: frame.formal(property, c),
                                }
                            } else {
                                frame.semantic(template.comparative, c)
                            }
                        });
                        let (item_id, twin_id) = match order {
                            Order::Canonical => (canonical.clone(), swapped.clone()),
                            Order::Swapped => (swapped.clone(), canonical.clone()),
                        };
                        items.push(TestItem {
                            item_id,
                            twin_id,
                            property,
                            order,
                            conditions,
                            filler: Filler {
                                subject: subject.clone(),
                                predicate: template.predicate.verb.clone(),
                                noun: template.noun.text.clone(),
                                domain: template.predicate.domain.clone(),
                                comparative: template.comparative.to_string(),
                                first_modifier: first.clone(),
                                second_modifier: second.clone(),
                            },
                        });
                    }
                    pair += 1;
                }
            }
        }
    }
    Ok(Suite {
        property,
        items,
        lexicon_fingerprint: lexicon.fingerprint(),
    })
}

/// Generates one of the five formal suites.
pub fn generate_formal_suite(lexicon: &LexiconConfig, property: Property) -> Result<Suite> {
    if !property.is_formal() {
        return Err(Error::NotFormal(property.to_string()));
    }
    generate(lexicon, property)
}

/// Generates the scalar-semantics suite: a let-alone or "and" context followed
/// by a comparative sentence in one of the two directions.
pub fn generate_semantic_suite(lexicon: &LexiconConfig) -> Result<Suite> {
    generate(lexicon, Property::ScalarSemantics)
}

pub fn generate_suite(lexicon: &LexiconConfig, property: Property) -> Result<Suite> {
    generate(lexicon, property)
}
