//! Filtered-corpus construction: case-insensitive literal matching with
//! whole-unit removal and exact accounting.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprinter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioName {
    NoFiltering,
    NoPairedFocus,
    NoPairedFocComp,
    NoLet,
    NoAlone,
    NoLetorAlone,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::NoFiltering,
        ScenarioName::NoPairedFocus,
        ScenarioName::NoPairedFocComp,
        ScenarioName::NoLet,
        ScenarioName::NoAlone,
        ScenarioName::NoLetorAlone,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::NoFiltering => "NoFiltering",
            ScenarioName::NoPairedFocus => "NoPairedFocus",
            ScenarioName::NoPairedFocComp => "NoPairedFocComp",
            ScenarioName::NoLet => "NoLet",
            ScenarioName::NoAlone => "NoAlone",
            ScenarioName::NoLetorAlone => "NoLetorAlone",
        }
    }

    pub fn patterns(self) -> &'static [&'static str] {
        const PAIRED: &[&str] = &["let alone", "much less", "never mind", "not to mention"];
        match self {
            ScenarioName::NoFiltering => &[],
            ScenarioName::NoPairedFocus => PAIRED,
            ScenarioName::NoPairedFocComp => &[
                "let alone",
                "much less",
                "never mind",
                "not to mention",
                "more than",
                "less than",
            ],
            ScenarioName::NoLet => &["let"],
            ScenarioName::NoAlone => &["alone"],
            ScenarioName::NoLetorAlone => &["let", "alone"],
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalUnit {
    #[default]
    Line,
    /// Terminal punctuation followed by whitespace and a capital starts a new
    /// sentence. Sentences never span lines.
    Sentence,
}

impl FromStr for RemovalUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(RemovalUnit::Line),
            "sentence" => Ok(RemovalUnit::Sentence),
            _ => Err(Error::config("removal_unit", format!("unknown unit `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// A match must not touch a letter, hyphen or apostrophe on either side.
    #[default]
    Word,
    /// Any case-insensitive occurrence matches ("let's", "letting").
    Substring,
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(BoundaryMode::Word),
            "substring" => Ok(BoundaryMode::Substring),
            _ => Err(Error::config("boundary", format!("unknown boundary mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterScenario {
    pub name: ScenarioName,
    pub patterns: Vec<String>,
    pub removal_unit: RemovalUnit,
    pub boundary: BoundaryMode,
}

impl FilterScenario {
    pub fn new(name: ScenarioName) -> Self {
        FilterScenario {
            name,
            patterns: name.patterns().iter().map(|p| p.to_string()).collect(),
            removal_unit: RemovalUnit::Line,
            boundary: BoundaryMode::Word,
        }
    }

    pub fn with_unit(mut self, unit: RemovalUnit) -> Self {
        self.removal_unit = unit;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name == ScenarioName::NoFiltering && !self.patterns.is_empty() {
            return Err(Error::config("patterns", "NoFiltering takes no patterns"));
        }
        for p in &self.patterns {
            if p.is_empty() || p.starts_with(' ') || p.ends_with(' ') || p.contains("  ") {
                return Err(Error::config("patterns", format!("malformed pattern `{p}`")));
            }
            if let Some(c) = p.chars().find(|c| r".^$*+?()[]{}|\".contains(*c) || (c.is_whitespace() && *c != ' ')) {
                return Err(Error::config("patterns", format!("pattern `{p}` contains `{c}`")));
            }
        }
        Ok(())
    }
}

/// All scenarios, baseline first.
pub fn scenario_catalog() -> Vec<FilterScenario> {
    ScenarioName::ALL.into_iter().map(FilterScenario::new).collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c == '-' || c == '\'' || c == '\u{2019}'
}

/// Compiled matcher for one scenario.
pub struct Filter {
    scenario: FilterScenario,
    automaton: Option<AhoCorasick>,
}

impl Filter {
    pub fn new(scenario: FilterScenario) -> Result<Self> {
        scenario.validate()?;
        let automaton = if scenario.patterns.is_empty() {
            None
        } else {
            Some(
                AhoCorasickBuilder::new()
                    .ascii_case_insensitive(true)
                    .match_kind(MatchKind::Standard)
                    .build(&scenario.patterns)
                    .map_err(|e| Error::config("patterns", e.to_string()))?,
            )
        };
        Ok(Filter { scenario, automaton })
    }

    pub fn scenario(&self) -> &FilterScenario {
        &self.scenario
    }

    /// Adds per-pattern occurrence counts for `unit` into `counts` and
    /// returns whether anything matched.
    fn scan(&self, unit: &str, counts: &mut [u64]) -> bool {
        let Some(ac) = &self.automaton else {
            return false;
        };
        let mut hit = false;
        for m in ac.find_overlapping_iter(unit) {
            if self.scenario.boundary == BoundaryMode::Word {
                let before = unit[..m.start()].chars().next_back();
                let after = unit[m.end()..].chars().next();
                if before.is_some_and(is_word_char) || after.is_some_and(is_word_char) {
                    continue;
                }
            }
            counts[m.pattern().as_usize()] += 1;
            hit = true;
        }
        hit
    }

    /// Whether `unit` contains at least one match of any pattern.
    pub fn matches(&self, unit: &str) -> bool {
        let mut scratch = vec![0; self.scenario.patterns.len()];
        self.scan(unit, &mut scratch)
    }

    fn filter_line(&self, line: &str, out: &mut Vec<u8>, acc: &mut Counts) {
        match self.scenario.removal_unit {
            RemovalUnit::Line => {
                acc.units_in += 1;
                let mut per = vec![0; acc.matches.len()];
                if self.scan(line, &mut per) {
                    acc.units_removed += 1;
                    acc.add_hits(&per);
                } else {
                    out.extend_from_slice(line.as_bytes());
                }
            }
            RemovalUnit::Sentence => {
                let (content, terminator) = split_terminator(line);
                let spans = sentence_spans(content);
                let mut kept_any = spans.is_empty();
                for span in spans {
                    acc.units_in += 1;
                    let mut per = vec![0; acc.matches.len()];
                    if self.scan(span, &mut per) {
                        acc.units_removed += 1;
                        acc.add_hits(&per);
                    } else {
                        out.extend_from_slice(span.as_bytes());
                        kept_any = true;
                    }
                }
                if kept_any {
                    out.extend_from_slice(terminator.as_bytes());
                }
            }
        }
    }
}

fn split_terminator(line: &str) -> (&str, &str) {
    let content = line.trim_end_matches(['\n', '\r']);
    (content, &line[content.len()..])
}

/// Splits one line (without terminator) into sentence spans. Each span keeps
/// its trailing whitespace, so the spans concatenate back to `content`.
pub fn sentence_spans(content: &str) -> Vec<&str> {
    if content.trim().is_empty() {
        return if content.is_empty() { vec![] } else { vec![content] };
    }
    let mut spans = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = content.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | '\u{201d}' | '\u{2019}' | ')' | ']') {
                j += 1;
            }
            let ws_start = j;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j > ws_start && j < chars.len() {
                let mut k = j;
                if matches!(chars[k].1, '"' | '\u{201c}' | '(' | '\'' | '\u{2018}') && k + 1 < chars.len() {
                    k += 1;
                }
                if chars[k].1.is_uppercase() {
                    let cut = chars[j].0;
                    spans.push(&content[start..cut]);
                    start = cut;
                }
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    spans.push(&content[start..]);
    spans
}

/// Splits a text into removal units exactly as the filter sees them.
pub fn split_units(text: &str, unit: RemovalUnit) -> Vec<&str> {
    let lines = text.split_inclusive('\n');
    match unit {
        RemovalUnit::Line => lines.collect(),
        RemovalUnit::Sentence => lines.flat_map(|l| sentence_spans(split_terminator(l).0)).collect(),
    }
}

#[derive(Debug, Clone, Default)]
struct Counts {
    units_in: u64,
    units_removed: u64,
    matches: Vec<u64>,
    units_with: Vec<u64>,
}

impl Counts {
    fn new(patterns: usize) -> Self {
        Counts {
            matches: vec![0; patterns],
            units_with: vec![0; patterns],
            ..Default::default()
        }
    }

    fn add_hits(&mut self, per: &[u64]) {
        for (i, &n) in per.iter().enumerate() {
            self.matches[i] += n;
            if n > 0 {
                self.units_with[i] += 1;
            }
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        self.units_in += other.units_in;
        self.units_removed += other.units_removed;
        for (a, b) in self.matches.iter_mut().zip(other.matches) {
            *a += b;
        }
        for (a, b) in self.units_with.iter_mut().zip(other.units_with) {
            *a += b;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCount {
    /// Occurrences in removed units.
    pub matches: u64,
    /// Units containing at least one occurrence.
    pub units: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub scenario: ScenarioName,
    pub removal_unit: RemovalUnit,
    pub boundary: BoundaryMode,
    pub units_in: u64,
    pub units_removed: u64,
    pub units_out: u64,
    pub bytes_in: u64,
    pub bytes_out: u64,
    pub patterns: BTreeMap<String, PatternCount>,
    pub corpus_fingerprint_in: String,
    pub corpus_fingerprint_out: String,
}

impl FilterReport {
    pub fn any_removed(&self) -> bool {
        self.units_removed > 0
    }

    fn build(
        scenario: &FilterScenario,
        counts: Counts,
        bytes_in: u64,
        bytes_out: u64,
        fp_in: String,
        fp_out: String,
    ) -> Self {
        let patterns = scenario
            .patterns
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    p.clone(),
                    PatternCount {
                        matches: counts.matches[i],
                        units: counts.units_with[i],
                    },
                )
            })
            .collect();
        FilterReport {
            scenario: scenario.name,
            removal_unit: scenario.removal_unit,
            boundary: scenario.boundary,
            units_in: counts.units_in,
            units_removed: counts.units_removed,
            units_out: counts.units_in - counts.units_removed,
            bytes_in,
            bytes_out,
            patterns,
            corpus_fingerprint_in: fp_in,
            corpus_fingerprint_out: fp_out,
        }
    }
}

fn corpus_fp() -> Fingerprinter {
    Fingerprinter::with_domain("corpus")
}

/// Streams `reader` line by line into `writer`.
pub fn filter_stream<R: BufRead, W: Write>(
    mut reader: R,
    mut writer: W,
    scenario: &FilterScenario,
) -> Result<FilterReport> {
    let filter = Filter::new(scenario.clone())?;
    let mut counts = Counts::new(scenario.patterns.len());
    let (mut fp_in, mut fp_out) = (corpus_fp(), corpus_fp());
    let (mut bytes_in, mut bytes_out) = (0u64, 0u64);
    let mut raw = Vec::new();
    let mut out = Vec::new();
    loop {
        raw.clear();
        let n = reader.read_until(b'\n', &mut raw).map_err(|e| Error::io("<input>", e))?;
        if n == 0 {
            break;
        }
        let line = std::str::from_utf8(&raw).map_err(|e| Error::InvalidUtf8 {
            offset: bytes_in + e.valid_up_to() as u64,
        })?;
        fp_in.update(&raw);
        bytes_in += n as u64;
        out.clear();
        filter.filter_line(line, &mut out, &mut counts);
        fp_out.update(&out);
        bytes_out += out.len() as u64;
        writer.write_all(&out).map_err(|e| Error::io("<output>", e))?;
    }
    writer.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(FilterReport::build(scenario, counts, bytes_in, bytes_out, fp_in.finish(), fp_out.finish()))
}

/// Filters an in-memory corpus on all cores. Output and report are identical
/// to [`filter_stream`] regardless of how the input is sharded.
pub fn filter_bytes(input: &[u8], scenario: &FilterScenario) -> Result<(Vec<u8>, FilterReport)> {
    filter_bytes_sharded(input, scenario, 1 << 20)
}

pub fn filter_bytes_sharded(
    input: &[u8],
    scenario: &FilterScenario,
    shard_bytes: usize,
) -> Result<(Vec<u8>, FilterReport)> {
    let text = std::str::from_utf8(input).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to() as u64,
    })?;
    let filter = Filter::new(scenario.clone())?;
    let mut shards = Vec::new();
    let mut start = 0;
    while start < text.len() {
        let mut end = (start + shard_bytes.max(1)).min(text.len());
        while end < text.len() && input[end - 1] != b'\n' {
            end += 1;
        }
        shards.push(&text[start..end]);
        start = end;
    }
    let pieces: Vec<(Vec<u8>, Counts)> = shards
        .par_iter()
        .map(|shard| {
            let mut out = Vec::with_capacity(shard.len());
            let mut counts = Counts::new(scenario.patterns.len());
            for line in shard.split_inclusive('\n') {
                filter.filter_line(line, &mut out, &mut counts);
            }
            (out, counts)
        })
        .collect();
    let mut output = Vec::with_capacity(input.len());
    let mut counts = Counts::new(scenario.patterns.len());
    for (out, c) in pieces {
        output.extend_from_slice(&out);
        counts = counts.merge(c);
    }
    let mut fp_in = corpus_fp();
    fp_in.update(input);
    let mut fp_out = corpus_fp();
    fp_out.update(&output);
    let report = FilterReport::build(
        scenario,
        counts,
        input.len() as u64,
        output.len() as u64,
        fp_in.finish(),
        fp_out.finish(),
    );
    Ok((output, report))
}
