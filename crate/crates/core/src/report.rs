//! Seed aggregation and table layouts for results.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::filter::ScenarioName;
use crate::scoring::SuiteResult;
use crate::template::Property;

/// Column order of the filtered-pretraining grid.
const GRID_COLUMNS: [Property; 6] = [
    Property::Npi,
    Property::ConjClause,
    Property::Cleft,
    Property::ConjVp,
    Property::ConjGap,
    Property::ScalarSemantics,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInterval {
    pub mean: f64,
    /// Half-width of the 95% interval; `None` with a single seed.
    pub half_width: Option<f64>,
    /// Set when the interval rests on fewer than three seeds.
    pub low_power: bool,
}

/// Mean of per-seed accuracies with a two-sided 95% Student-t interval
/// (n - 1 degrees of freedom) over the seed means.
pub fn seed_interval(values: &[f64]) -> Option<SeedInterval> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let half_width = if values.len() < 2 {
        None
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let t = StudentsT::new(0.0, 1.0, n - 1.0).ok()?.inverse_cdf(0.975);
        Some(t * (var / n).sqrt())
    };
    Some(SeedInterval {
        mean,
        half_width,
        low_power: values.len() < 3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub scenario: String,
    pub property: Property,
    pub seeds: BTreeMap<String, f64>,
    pub interval: SeedInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub scenario: String,
    pub seed: String,
    pub property: Property,
    pub lexicon_fingerprint: String,
    pub model_fingerprint: String,
    pub unigram_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenarios: Vec<String>,
    pub properties: Vec<Property>,
    pub seeds: Vec<String>,
    pub cells: Vec<Cell>,
    pub lineage: Vec<Lineage>,
}

fn scenario_rank(name: &str) -> (usize, String) {
    let rank = name
        .parse::<ScenarioName>()
        .map(|s| ScenarioName::ALL.iter().position(|x| *x == s).unwrap_or(usize::MAX))
        .unwrap_or(usize::MAX);
    (rank, name.to_string())
}

impl Report {
    /// Aggregates results into a complete scenario x property grid. Every
    /// cell must have every seed.
    pub fn build(results: &[SuiteResult]) -> Result<Report> {
        if results.is_empty() {
            return Err(Error::IncompleteGrid(vec!["no results".into()]));
        }
        let mut by_cell: BTreeMap<(String, Property), BTreeMap<String, f64>> = BTreeMap::new();
        let mut scenarios = BTreeSet::new();
        let mut properties = BTreeSet::new();
        let mut seeds = BTreeSet::new();
        let mut lineage = Vec::new();
        for r in results {
            scenarios.insert(scenario_rank(&r.scenario));
            properties.insert(Property::ALL.iter().position(|p| *p == r.property).unwrap_or(0));
            seeds.insert(r.seed.clone());
            let cell = by_cell.entry((r.scenario.clone(), r.property)).or_default();
            if cell.insert(r.seed.clone(), r.accuracy).is_some() {
                return Err(Error::config(
                    "results",
                    format!("duplicate result for {}/{}/{}", r.scenario, r.property, r.seed),
                ));
            }
            lineage.push(Lineage {
                scenario: r.scenario.clone(),
                seed: r.seed.clone(),
                property: r.property,
                lexicon_fingerprint: r.lexicon_fingerprint.clone(),
                model_fingerprint: r.model_fingerprint.clone(),
                unigram_fingerprint: r.unigram_fingerprint.clone(),
            });
        }
        let scenarios: Vec<String> = scenarios.into_iter().map(|(_, s)| s).collect();
        let properties: Vec<Property> = properties.into_iter().map(|i| Property::ALL[i]).collect();
        let seeds: Vec<String> = seeds.into_iter().collect();

        let mut missing = Vec::new();
        let mut cells = Vec::new();
        for s in &scenarios {
            for &p in &properties {
                let got = by_cell.remove(&(s.clone(), p)).unwrap_or_default();
                for seed in &seeds {
                    if !got.contains_key(seed) {
                        missing.push(format!("{s}/{p}/{seed}"));
                    }
                }
                if missing.is_empty() {
                    let values: Vec<f64> = got.values().copied().collect();
                    let interval = seed_interval(&values).expect("nonempty");
                    cells.push(Cell {
                        scenario: s.clone(),
                        property: p,
                        seeds: got,
                        interval,
                    });
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::IncompleteGrid(missing));
        }
        lineage.sort_by(|a, b| {
            (scenario_rank(&a.scenario), &a.seed, a.property).cmp(&(scenario_rank(&b.scenario), &b.seed, b.property))
        });
        Ok(Report {
            scenarios,
            properties,
            seeds,
            cells,
            lineage,
        })
    }

    pub fn cell(&self, scenario: &str, property: Property) -> Option<&Cell> {
        self.cells.iter().find(|c| c.scenario == scenario && c.property == property)
    }

    /// Rows of the filtered-pretraining grid: one per scenario.
    pub fn grid_rows(&self) -> Vec<Vec<String>> {
        let cols: Vec<Property> = GRID_COLUMNS.into_iter().filter(|p| self.properties.contains(p)).collect();
        self.scenarios
            .iter()
            .map(|s| {
                let mut row = vec![s.clone()];
                row.extend(cols.iter().map(|&p| fmt_interval(&self.cell(s, p).expect("complete grid").interval)));
                row
            })
            .collect()
    }

    fn headline_scenario(&self) -> &str {
        self.scenarios
            .iter()
            .find(|s| *s == ScenarioName::NoFiltering.as_str())
            .unwrap_or(&self.scenarios[0])
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let headline = self.headline_scenario();
        let formal: Vec<Property> = Property::FORMAL.into_iter().filter(|p| self.properties.contains(p)).collect();
        if !formal.is_empty() {
            let _ = writeln!(md, "## Syntactic tests ({headline})\n");
            md.push_str("| Formal Property | Prediction | Accuracy |\n|---|---|---|\n");
            for p in formal {
                let c = self.cell(headline, p).expect("complete grid");
                let _ = writeln!(md, "| {} | {} | {} |", p.display_name(), p.prediction(), fmt_interval(&c.interval));
            }
            md.push('\n');
        }
        if self.properties.contains(&Property::ScalarSemantics) {
            let _ = writeln!(md, "## Semantic tests ({headline})\n");
            md.push_str("| Model | Property | Prediction | Accuracy |\n|---|---|---|---|\n");
            let c = self.cell(headline, Property::ScalarSemantics).expect("complete grid");
            let _ = writeln!(
                md,
                "| LM | {} | {} | {} |",
                Property::ScalarSemantics.display_name(),
                Property::ScalarSemantics.prediction(),
                fmt_interval(&c.interval)
            );
            md.push('\n');
        }
        md.push_str("## Filtered pretraining\n\n");
        let cols: Vec<Property> = GRID_COLUMNS.into_iter().filter(|p| self.properties.contains(p)).collect();
        md.push_str("| Filtering Scenario |");
        for p in &cols {
            let _ = write!(md, " {} |", grid_label(*p));
        }
        md.push_str("\n|---|");
        md.push_str(&"---|".repeat(cols.len()));
        md.push('\n');
        for row in self.grid_rows() {
            let _ = writeln!(md, "| {} |", row.join(" | "));
        }
        let n = self.seeds.len();
        let _ = writeln!(
            md,
            "\nMeans over {n} seed(s) ({}). Intervals are two-sided 95% Student-t intervals over seed means with {} degree(s) of freedom.",
            self.seeds.join(", "),
            n.saturating_sub(1)
        );
        if n < 2 {
            md.push_str("With a single seed the interval is undefined.\n");
        } else if n < 3 {
            md.push_str("Low power: the interval rests on two seeds.\n");
        }
        md
    }

    pub fn summary_tsv(&self) -> String {
        let mut out = String::from("scenario\tproperty\tseeds\tmean\tci_half_width\tlow_power");
        for s in &self.seeds {
            let _ = write!(out, "\tacc:{s}");
        }
        out.push('\n');
        for c in &self.cells {
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                c.scenario,
                c.property,
                c.seeds.len(),
                c.interval.mean,
                c.interval.half_width.map_or("NA".to_string(), |h| h.to_string()),
                c.interval.low_power
            );
            for s in &self.seeds {
                let _ = write!(out, "\t{}", c.seeds[s]);
            }
            out.push('\n');
        }
        out
    }
}

fn grid_label(p: Property) -> &'static str {
    match p {
        Property::ConjGap => "Conjunction (Elided VP)",
        _ => p.display_name(),
    }
}

fn fmt_interval(i: &SeedInterval) -> String {
    match i.half_width {
        Some(h) => format!("{:.1} ± {:.1}%", 100.0 * i.mean, 100.0 * h),
        None => format!("{:.1}% (CI undefined)", 100.0 * i.mean),
    }
}

/// Tidy per-item table for distribution plots.
pub fn deltas_tsv(results: &[SuiteResult]) -> String {
    let mut out = String::from(
        "scenario\tseed\tproperty\titem_id\torder\ttemplate\tdelta_ltaln\tdelta_and\tdelta_diff\tcorrect\tjoint_correct\n",
    );
    for r in sorted(results) {
        for pair in &r.records {
            for item in &pair.items {
                let order = match item.order {
                    crate::template::Order::Canonical => "canonical",
                    crate::template::Order::Swapped => "swapped",
                };
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.scenario,
                    r.seed,
                    r.property,
                    item.item_id,
                    order,
                    item.template,
                    item.delta_ltaln,
                    item.delta_and,
                    item.delta_ltaln - item.delta_and,
                    item.correct,
                    pair.joint_correct
                );
            }
        }
    }
    out
}

/// Per-template pair accuracy, for breakdowns by predicate, noun and comparative.
pub fn templates_tsv(results: &[SuiteResult]) -> String {
    let mut out = String::from("scenario\tseed\tproperty\ttemplate\tpairs\tcorrect_pairs\taccuracy\n");
    for r in sorted(results) {
        let mut groups: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for pair in &r.records {
            let g = groups.entry(pair.items[0].template.as_str()).or_default();
            g.0 += 1;
            g.1 += pair.joint_correct as usize;
        }
        for (t, (n, c)) in groups {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}", r.scenario, r.seed, r.property, t, n, c, c as f64 / n as f64);
        }
    }
    out
}

fn sorted(results: &[SuiteResult]) -> Vec<&SuiteResult> {
    let mut v: Vec<&SuiteResult> = results.iter().collect();
    v.sort_by(|a, b| {
        (scenario_rank(&a.scenario), &a.seed, a.property).cmp(&(scenario_rank(&b.scenario), &b.seed, b.property))
    });
    v
}

/// Writes `report.md`, `report.json`, `summary.tsv`, `deltas.tsv` and
/// `templates.tsv` into `dir`.
pub fn write_report(results: &[SuiteResult], dir: &Path) -> Result<Report> {
    let report = Report::build(results)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    write("report.md", report.to_markdown())?;
    write("report.json", serde_json::to_string_pretty(&report)? + "\n")?;
    write("summary.tsv", report.summary_tsv())?;
    write("deltas.tsv", deltas_tsv(results))?;
    write("templates.tsv", templates_tsv(results))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::TieRule;

    fn result(scenario: &str, property: Property, seed: &str, accuracy: f64) -> SuiteResult {
        SuiteResult {
            property,
            scenario: scenario.into(),
            seed: seed.into(),
            k: 2,
            pairs: 1,
            correct_pairs: 1,
            accuracy,
            tie_rule: TieRule::Inclusive,
            lexicon_fingerprint: "l".into(),
            model_fingerprint: format!("m-{seed}"),
            unigram_fingerprint: "u".into(),
            records: vec![],
        }
    }

    #[test]
    fn two_seed_interval() {
        let i = seed_interval(&[0.98, 0.992]).unwrap();
        assert!((i.mean - 0.986).abs() < 1e-12);
        // sd = 0.006 * sqrt(2); half-width = t(0.975, 1) * sd / sqrt(2).
        let expected = 12.706204736432095 * 0.006;
        assert!((i.half_width.unwrap() - expected).abs() < 1e-6);
        assert!(i.low_power);
    }

    #[test]
    fn single_seed_interval_undefined() {
        let i = seed_interval(&[0.5]).unwrap();
        assert_eq!(i.mean, 0.5);
        assert_eq!(i.half_width, None);
    }

    #[test]
    fn three_scenarios_one_property() {
        let results: Vec<_> = ["NoLet", "NoFiltering", "NoAlone"]
            .iter()
            .map(|s| result(s, Property::Npi, "a", 0.5))
            .collect();
        let r = Report::build(&results).unwrap();
        let rows = r.grid_rows();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0][0], "NoFiltering");
        assert_eq!(rows[2][0], "NoAlone");
    }

    #[test]
    fn incomplete_grid_lists_cells() {
        let results = vec![
            result("NoFiltering", Property::Npi, "a", 0.5),
            result("NoFiltering", Property::Npi, "b", 0.5),
            result("NoFiltering", Property::Cleft, "a", 0.5),
        ];
        match Report::build(&results) {
            Err(Error::IncompleteGrid(cells)) => assert_eq!(cells, vec!["NoFiltering/cleft/b".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn markdown_layout() {
        let results = vec![
            result("NoFiltering", Property::Npi, "a", 0.98),
            result("NoFiltering", Property::Npi, "b", 0.992),
        ];
        let md = Report::build(&results).unwrap().to_markdown();
        assert!(md.contains("| NPI | near 100% | 98.6 ± "));
        assert!(md.contains("Low power"));
    }
}
