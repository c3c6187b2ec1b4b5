//! End-to-end runs driven by a TOML configuration.
//!
//! ```toml
//! corpus = "train.txt"
//! output_dir = "out"
//! scenarios = ["NoFiltering", "NoLet"]
//! properties = ["npi", "cleft"]
//!
//! [unigram]
//! tokenizer = "whitespace"
//! smoothing = "floor"
//!
//! [[seeds]]
//! id = "a"
//! scorer = "reference-lm"
//! order = 3
//! discount = 0.7
//!
//! [[seeds]]
//! id = "b"
//! scorer = "logprobs"
//! path = "scores/{scenario}/{seed}/{property}.jsonl"
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{item_scores, load_records, save_records, score_suite_with_ngram};
use crate::filter::{filter_stream, BoundaryMode, FilterScenario, RemovalUnit, ScenarioName};
use crate::fingerprint::fingerprint_parts;
use crate::lexicon::LexiconConfig;
use crate::ngram::NGramModel;
use crate::report::{write_report, Report};
use crate::scoring::{evaluate_suite, EvalOptions, SuiteResult, TieRule};
use crate::suite_io::{read_suite, write_suite};
use crate::template::{generate_suite, Property, Suite};
use crate::tokenize::TokenizerSpec;
use crate::unigram::{build_unigram, SmoothingSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "all_scenarios")]
    pub scenarios: Vec<ScenarioName>,
    #[serde(default = "all_properties")]
    pub properties: Vec<Property>,
    pub formal_lexicon: Option<PathBuf>,
    pub semantic_lexicon: Option<PathBuf>,
    /// Pre-generated suite files, used instead of generating from a lexicon.
    #[serde(default)]
    pub suites: BTreeMap<Property, PathBuf>,
    #[serde(default)]
    pub filter: FilterOptions,
    #[serde(default)]
    pub unigram: UnigramOptions,
    pub seeds: Vec<SeedConfig>,
    /// Count exact ties as incorrect.
    #[serde(default)]
    pub strict: bool,
}

fn all_scenarios() -> Vec<ScenarioName> {
    ScenarioName::ALL.to_vec()
}

fn all_properties() -> Vec<Property> {
    Property::ALL.to_vec()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterOptions {
    #[serde(default)]
    pub removal_unit: RemovalUnit,
    #[serde(default)]
    pub boundary: BoundaryMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnigramOptions {
    #[serde(default = "default_tokenizer")]
    pub tokenizer: String,
    #[serde(default)]
    pub lowercase: bool,
    #[serde(default = "default_smoothing")]
    pub smoothing: String,
}

fn default_tokenizer() -> String {
    "whitespace".into()
}

fn default_smoothing() -> String {
    "floor".into()
}

impl Default for UnigramOptions {
    fn default() -> Self {
        UnigramOptions {
            tokenizer: default_tokenizer(),
            lowercase: false,
            smoothing: default_smoothing(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedConfig {
    pub id: String,
    #[serde(flatten)]
    pub scorer: Scorer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scorer", rename_all = "kebab-case")]
pub enum Scorer {
    /// Train an n-gram model on each filtered corpus.
    ReferenceLm {
        order: usize,
        #[serde(default = "default_discount")]
        discount: f64,
    },
    /// Read externally produced exchange files. `{scenario}`, `{seed}` and
    /// `{property}` in the path are substituted.
    Logprobs { path: String },
}

fn default_discount() -> f64 {
    0.5
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Parses a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.corpus);
        join(&mut self.output_dir);
        self.formal_lexicon.iter_mut().for_each(join);
        self.semantic_lexicon.iter_mut().for_each(join);
        self.suites.values_mut().for_each(join);
        for seed in &mut self.seeds {
            if let Scorer::Logprobs { path } = &mut seed.scorer {
                if Path::new(path).is_relative() {
                    *path = base.join(&*path).to_string_lossy().into_owned();
                }
            }
        }
    }

    pub fn tokenizer(&self) -> Result<TokenizerSpec> {
        Ok(self.unigram.tokenizer.parse::<TokenizerSpec>()?.lowercased(self.unigram.lowercase))
    }

    pub fn smoothing(&self) -> Result<SmoothingSpec> {
        self.unigram.smoothing.parse()
    }

    pub fn validate(&self) -> Result<()> {
        let exists = |slot: &str, p: &Path| {
            if p.exists() {
                Ok(())
            } else {
                Err(Error::config(slot, format!("{} does not exist", p.display())))
            }
        };
        exists("corpus", &self.corpus)?;
        if let Some(p) = &self.formal_lexicon {
            exists("formal_lexicon", p)?;
        }
        if let Some(p) = &self.semantic_lexicon {
            exists("semantic_lexicon", p)?;
        }
        for (prop, p) in &self.suites {
            exists(&format!("suites.{prop}"), p)?;
        }
        if self.scenarios.is_empty() {
            return Err(Error::config("scenarios", "no scenarios selected"));
        }
        if self.properties.is_empty() {
            return Err(Error::config("properties", "no properties selected"));
        }
        let distinct = |n: usize, m: usize, slot: &str| {
            if n == m {
                Ok(())
            } else {
                Err(Error::config(slot, "entries must be distinct"))
            }
        };
        distinct(self.scenarios.iter().collect::<BTreeSet<_>>().len(), self.scenarios.len(), "scenarios")?;
        distinct(self.properties.iter().collect::<BTreeSet<_>>().len(), self.properties.len(), "properties")?;
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        let ids: BTreeSet<&str> = self.seeds.iter().map(|s| s.id.as_str()).collect();
        distinct(ids.len(), self.seeds.len(), "seeds")?;
        for s in &self.seeds {
            if s.id.is_empty() || s.id.contains(['/', '\\']) || s.id.starts_with('.') {
                return Err(Error::config("seeds", format!("seed id `{}` is not a plain name", s.id)));
            }
            if let Scorer::ReferenceLm { order, discount } = s.scorer {
                if order < 1 || !(discount > 0.0 && discount < 1.0) {
                    return Err(Error::config(
                        format!("seeds.{}", s.id),
                        "reference-lm needs order >= 1 and discount in (0, 1)",
                    ));
                }
            }
        }
        self.tokenizer()?;
        self.smoothing()?;
        Ok(())
    }
}

/// Refuses concurrent writers to one output directory.
struct RunLock(PathBuf);

impl RunLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(".lock");
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => {
                    Error::config("output_dir", format!("{} is locked by another run", dir.display()))
                }
                _ => Error::io(&path, e),
            })?;
        Ok(RunLock(path))
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioLineage {
    pub scenario: ScenarioName,
    pub corpus_fingerprint_in: String,
    pub corpus_fingerprint_out: String,
    pub units_removed: u64,
    pub unigram_fingerprint: String,
}

/// Written to `lineage.json`: the fingerprints of every input and intermediate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLineage {
    pub config_fingerprint: String,
    pub suites: BTreeMap<Property, String>,
    pub scenarios: Vec<ScenarioLineage>,
}

pub struct RunOutcome {
    pub results: Vec<SuiteResult>,
    pub report: Report,
    pub lineage: RunLineage,
}

fn mkdir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn load_suites(cfg: &RunConfig) -> Result<Vec<Suite>> {
    let formal = match &cfg.formal_lexicon {
        Some(p) => LexiconConfig::load(p)?,
        None => LexiconConfig::default_formal(),
    };
    let semantic = match &cfg.semantic_lexicon {
        Some(p) => LexiconConfig::load(p)?,
        None => LexiconConfig::default_semantic(),
    };
    let mut suites = Vec::new();
    for &p in &cfg.properties {
        let suite = match cfg.suites.get(&p) {
            Some(path) => {
                let s = read_suite(path)?;
                if s.property != p {
                    return Err(Error::config(
                        format!("suites.{p}"),
                        format!("file holds a {} suite", s.property),
                    ));
                }
                s
            }
            None => generate_suite(if p.is_formal() { &formal } else { &semantic }, p)?,
        };
        suites.push(suite);
    }
    Ok(suites)
}

/// Runs generate, filter, unigram, score, evaluate and report.
///
/// Layout of `output_dir`:
/// `suites/<property>.jsonl`, `scenarios/<scenario>/{corpus.txt, filter.json,
/// unigram.tsv}`, `scenarios/<scenario>/<seed>/{logprobs,results}/<property>.*`,
/// `report/` and `lineage.json`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let out = &cfg.output_dir;
    mkdir(out)?;
    let _lock = RunLock::acquire(out)?;
    let tokenizer = cfg.tokenizer()?;
    let smoothing = cfg.smoothing()?;
    let tie_rule = if cfg.strict { TieRule::Strict } else { TieRule::Inclusive };

    let suites = load_suites(cfg).map_err(|e| e.in_stage("generate"))?;
    let suite_dir = out.join("suites");
    mkdir(&suite_dir)?;
    for s in &suites {
        write_suite(s, &suite_dir.join(format!("{}.jsonl", s.property))).map_err(|e| e.in_stage("generate"))?;
    }

    let mut results = Vec::new();
    let mut scenario_lineage = Vec::new();
    for &name in &cfg.scenarios {
        let sdir = out.join("scenarios").join(name.as_str());
        mkdir(&sdir)?;

        let corpus_path = sdir.join("corpus.txt");
        let scenario = FilterScenario::new(name)
            .with_unit(cfg.filter.removal_unit)
            .with_boundary(cfg.filter.boundary);
        let report = (|| {
            let input = File::open(&cfg.corpus).map_err(|e| Error::io(&cfg.corpus, e))?;
            let output = File::create(&corpus_path).map_err(|e| Error::io(&corpus_path, e))?;
            let report = filter_stream(BufReader::new(input), BufWriter::new(output), &scenario)?;
            let path = sdir.join("filter.json");
            fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&path, e))?;
            Ok(report)
        })()
        .map_err(|e: Error| e.in_stage("filter"))?;

        let unigram = (|| {
            let f = File::open(&corpus_path).map_err(|e| Error::io(&corpus_path, e))?;
            let model = build_unigram(BufReader::new(f), tokenizer.clone(), smoothing)?;
            model.save(&sdir.join("unigram.tsv"))?;
            Ok(model)
        })()
        .map_err(|e: Error| e.in_stage("unigram"))?;
        let unigram_fp = unigram.fingerprint();
        scenario_lineage.push(ScenarioLineage {
            scenario: name,
            corpus_fingerprint_in: report.corpus_fingerprint_in.clone(),
            corpus_fingerprint_out: report.corpus_fingerprint_out.clone(),
            units_removed: report.units_removed,
            unigram_fingerprint: unigram_fp.clone(),
        });

        for seed in &cfg.seeds {
            let seed_dir = sdir.join(&seed.id);
            let lp_dir = seed_dir.join("logprobs");
            let res_dir = seed_dir.join("results");
            mkdir(&lp_dir)?;
            mkdir(&res_dir)?;
            let ngram = match seed.scorer {
                Scorer::ReferenceLm { order, discount } => {
                    let f = File::open(&corpus_path).map_err(|e| Error::io(&corpus_path, e))?;
                    Some(
                        NGramModel::train(BufReader::new(f), order, discount, tokenizer.clone())
                            .map_err(|e| e.in_stage("score"))?,
                    )
                }
                Scorer::Logprobs { .. } => None,
            };
            for suite in &suites {
                let records = match (&seed.scorer, &ngram) {
                    (_, Some(model)) => {
                        let records = score_suite_with_ngram(model, suite).map_err(|e| e.in_stage("score"))?;
                        save_records(&records, &lp_dir.join(format!("{}.jsonl", suite.property)))?;
                        records
                    }
                    (Scorer::Logprobs { path }, None) => {
                        let path = path
                            .replace("{scenario}", name.as_str())
                            .replace("{seed}", &seed.id)
                            .replace("{property}", suite.property.as_str());
                        load_records(Path::new(&path)).map_err(|e| e.in_stage("score"))?
                    }
                    _ => unreachable!("reference-lm seeds always have a model"),
                };
                let (scores, model_fp) = item_scores(suite, &records, &unigram).map_err(|e| e.in_stage("score"))?;
                let opts = EvalOptions {
                    tie_rule,
                    scenario: name.to_string(),
                    seed: seed.id.clone(),
                    model_fingerprint: model_fp,
                    unigram_fingerprint: unigram_fp.clone(),
                };
                let result = evaluate_suite(suite, &scores, &opts).map_err(|e| e.in_stage("evaluate"))?;
                result.save(&res_dir.join(format!("{}.json", suite.property)))?;
                results.push(result);
            }
        }
    }

    let report = write_report(&results, &out.join("report")).map_err(|e| e.in_stage("report"))?;
    let config_text = serde_json::to_string(cfg)?;
    let lineage = RunLineage {
        config_fingerprint: fingerprint_parts("run-config", &[&config_text]),
        suites: suites.iter().map(|s| (s.property, s.lexicon_fingerprint.clone())).collect(),
        scenarios: scenario_lineage,
    };
    let path = out.join("lineage.json");
    fs::write(&path, serde_json::to_string_pretty(&lineage)? + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(RunOutcome {
        results,
        report,
        lineage,
    })
}
