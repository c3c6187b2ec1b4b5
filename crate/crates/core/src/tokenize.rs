use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizerKind {
    /// Whitespace-separated words.
    Whitespace,
    /// Text already segmented by an external subword tokenizer into
    /// whitespace-separated pieces; the vocabulary file defines the inventory.
    Vocab(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerSpec {
    pub kind: TokenizerKind,
    pub lowercase: bool,
}

impl TokenizerSpec {
    pub fn whitespace() -> Self {
        TokenizerSpec {
            kind: TokenizerKind::Whitespace,
            lowercase: false,
        }
    }

    pub fn lowercased(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn normalize<'a>(&self, token: &'a str) -> std::borrow::Cow<'a, str> {
        if self.lowercase {
            std::borrow::Cow::Owned(token.to_lowercase())
        } else {
            std::borrow::Cow::Borrowed(token)
        }
    }

    /// Splits and normalizes `text`.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split_whitespace()
            .map(|t| self.normalize(t).into_owned())
            .collect()
    }

    /// The name recorded in model headers and fingerprints.
    pub fn name(&self) -> String {
        format!("{}{}", self.kind, if self.lowercase { "+lower" } else { "" })
    }

    pub fn parse_name(name: &str) -> Result<Self> {
        let (base, lowercase) = match name.strip_suffix("+lower") {
            Some(b) => (b, true),
            None => (name, false),
        };
        Ok(base.parse::<TokenizerSpec>()?.lowercased(lowercase))
    }
}

impl fmt::Display for TokenizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenizerKind::Whitespace => f.write_str("whitespace"),
            TokenizerKind::Vocab(p) => write!(f, "vocab:{}", p.display()),
        }
    }
}

impl FromStr for TokenizerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = if s == "whitespace" {
            TokenizerKind::Whitespace
        } else if let Some(path) = s.strip_prefix("vocab:").filter(|p| !p.is_empty()) {
            TokenizerKind::Vocab(PathBuf::from(path))
        } else {
            return Err(Error::UnknownTokenizer(s.to_string()));
        };
        Ok(TokenizerSpec {
            kind,
            lowercase: false,
        })
    }
}

/// Reads a subword vocabulary: one token per line; anything after a tab is ignored.
pub fn load_vocab(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vocab = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let token = line.split('\t').next().unwrap_or("");
        if token.is_empty() {
            continue;
        }
        if token.chars().any(char::is_whitespace) {
            return Err(Error::parse(path.display().to_string(), i + 1, "token contains whitespace"));
        }
        vocab.push(token.to_string());
    }
    Ok(vocab)
}
