use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A lexicon or run configuration is missing a slot or violates an invariant.
    #[error("configuration error in `{slot}`: {message}")]
    Config { slot: String, message: String },

    #[error("unknown property `{0}`")]
    UnknownProperty(String),

    #[error("property `{0}` is not a formal property")]
    NotFormal(String),

    #[error("unknown filter scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown tokenizer spec `{0}`")]
    UnknownTokenizer(String),

    #[error("invalid smoothing `{0}`")]
    InvalidSmoothing(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("token `{0}` is out of vocabulary and the model is unsmoothed")]
    OutOfVocabulary(String),

    #[error("empty token sequence")]
    EmptySequence,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("input is not valid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: u64 },

    #[error("missing scores for item `{0}`")]
    MissingItem(String),

    #[error("item `{item}` has twin `{twin}` which is not present")]
    MissingTwin { item: String, twin: String },

    #[error("item `{item}`: {message}")]
    InvalidRecord { item: String, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("report grid incomplete, missing cells: {}", .0.join(", "))]
    IncompleteGrid(Vec<String>),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(slot: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            slot: slot.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn record(item: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidRecord {
            item: item.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
