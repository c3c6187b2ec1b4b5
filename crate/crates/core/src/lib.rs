//! Minimal-pair test suites for the *let alone* construction, SLOR scoring
//! from per-token log-probabilities, and filtered pretraining corpora.

pub mod error;
pub mod exchange;
pub mod filter;
pub mod fingerprint;
pub mod lexicon;
pub mod manifest;
pub mod ngram;
pub mod pipeline;
pub mod report;
pub mod scoring;
pub mod suite_io;
pub mod template;
pub mod tokenize;
pub mod unigram;

pub use error::{Error, Result};
pub use exchange::LogprobRecord;
pub use filter::{FilterReport, FilterScenario, ScenarioName};
pub use lexicon::LexiconConfig;
pub use manifest::TrainingManifest;
pub use ngram::NGramModel;
pub use pipeline::RunConfig;
pub use report::Report;
pub use scoring::{evaluate_suite, ItemScores, ScoredSentence, SuiteResult};
pub use template::{ConditionLabel, Property, Suite, TestItem};
pub use tokenize::TokenizerSpec;
pub use unigram::UnigramModel;
