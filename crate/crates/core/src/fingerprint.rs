//! Content fingerprints used to link every artifact to the inputs that produced it.

use sha2::{Digest, Sha256};

/// Incremental SHA-256 fingerprint. Feeding the same bytes in any chunking
/// yields the same digest.
#[derive(Clone, Default)]
pub struct Fingerprinter {
    hasher: Sha256,
}

impl Fingerprinter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a fingerprint in a named domain so that equal payloads of
    /// different kinds never collide.
    pub fn with_domain(domain: &str) -> Self {
        let mut fp = Self::new();
        fp.field(domain.as_bytes());
        fp
    }

    pub fn update(&mut self, bytes: &[u8]) {
        self.hasher.update(bytes);
    }

    /// Length-prefixed field, so `("ab","c")` and `("a","bc")` differ.
    pub fn field(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

pub fn fingerprint_bytes(bytes: &[u8]) -> String {
    let mut fp = Fingerprinter::new();
    fp.update(bytes);
    fp.finish()
}

/// Fingerprint of a list of named parts, e.g. other fingerprints plus parameters.
pub fn fingerprint_parts(domain: &str, parts: &[&str]) -> String {
    let mut fp = Fingerprinter::with_domain(domain);
    for part in parts {
        fp.field(part.as_bytes());
    }
    fp.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_does_not_matter() {
        let mut a = Fingerprinter::new();
        a.update(b"hello world");
        let mut b = Fingerprinter::new();
        b.update(b"hello ");
        b.update(b"world");
        assert_eq!(a.finish(), b.finish());
    }

    #[test]
    fn parts_are_delimited() {
        assert_ne!(
            fingerprint_parts("x", &["ab", "c"]),
            fingerprint_parts("x", &["a", "bc"])
        );
    }
}
