//! Line-delimited JSON suite files.
//!
//! The first line is a header record, followed by one record per item:
//!
//! ```text
//! {"record":"header","format":"letalone-suite","version":1,"generator":"letalone 0.1.0","property":"npi","k":24,"pairs":12,"lexicon_fingerprint":"…"}
//! {"record":"item","item_id":"npi-000000-c","twin_id":"npi-000000-s","order":"canonical","conditions":{"+m+l":{"context":"","sentence":"…"},…},"filler":{…}}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::template::{Filler, Order, PerCondition, Property, Stimulus, Suite, TestItem};

pub const SUITE_FORMAT: &str = "letalone-suite";
pub const SUITE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteHeader {
    pub format: String,
    pub version: u32,
    pub generator: String,
    pub property: Property,
    /// Item rows, both modifier orders counted separately.
    pub k: usize,
    /// Twin pairs.
    pub pairs: usize,
    pub lexicon_fingerprint: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Header(SuiteHeader),
    Item(Box<ItemRecord>),
}

#[derive(Serialize, Deserialize)]
struct ItemRecord {
    item_id: String,
    twin_id: String,
    order: Order,
    conditions: PerCondition<Stimulus>,
    filler: Filler,
}

pub fn generator_version() -> String {
    format!("letalone {}", env!("CARGO_PKG_VERSION"))
}

impl Suite {
    pub fn header(&self) -> SuiteHeader {
        SuiteHeader {
            format: SUITE_FORMAT.into(),
            version: SUITE_VERSION,
            generator: generator_version(),
            property: self.property,
            k: self.k(),
            pairs: self.pairs(),
            lexicon_fingerprint: self.lexicon_fingerprint.clone(),
        }
    }
}

pub fn write_suite_to<W: Write>(suite: &Suite, mut out: W) -> Result<()> {
    let io = |e| Error::io("<suite>", e);
    serde_json::to_writer(&mut out, &Record::Header(suite.header()))?;
    out.write_all(b"\n").map_err(io)?;
    for item in &suite.items {
        let rec = Record::Item(Box::new(ItemRecord {
            item_id: item.item_id.clone(),
            twin_id: item.twin_id.clone(),
            order: item.order,
            conditions: item.conditions.clone(),
            filler: item.filler.clone(),
        }));
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_suite(suite: &Suite, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_suite_to(suite, BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_suite_from<R: BufRead>(reader: R, name: &str) -> Result<Suite> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(name, e))?;
            match serde_json::from_str::<Record>(&line) {
                Ok(Record::Header(h)) => h,
                Ok(Record::Item(_)) => return Err(Error::parse(name, 1, "expected header record")),
                Err(e) => return Err(Error::parse(name, 1, e.to_string())),
            }
        }
        None => return Err(Error::parse(name, 1, "empty suite file")),
    };
    if header.format != SUITE_FORMAT {
        return Err(Error::parse(name, 1, format!("unknown format `{}`", header.format)));
    }
    let mut items = Vec::with_capacity(header.k);
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Record>(&line) {
            Ok(Record::Item(r)) => items.push(TestItem {
                item_id: r.item_id,
                twin_id: r.twin_id,
                property: header.property,
                order: r.order,
                conditions: r.conditions,
                filler: r.filler,
            }),
            Ok(Record::Header(_)) => return Err(Error::parse(name, i + 1, "unexpected second header")),
            Err(e) => return Err(Error::parse(name, i + 1, e.to_string())),
        }
    }
    if items.len() != header.k {
        return Err(Error::parse(
            name,
            1,
            format!("header declares k = {} but file has {} items", header.k, items.len()),
        ));
    }
    let suite = Suite {
        property: header.property,
        items,
        lexicon_fingerprint: header.lexicon_fingerprint,
    };
    suite.validate()?;
    Ok(suite)
}

pub fn read_suite(path: &Path) -> Result<Suite> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_suite_from(BufReader::new(file), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconConfig;
    use crate::template::generate_formal_suite;

    #[test]
    fn empty_suite_has_header_only() {
        let suite = Suite {
            property: Property::Cleft,
            items: vec![],
            lexicon_fingerprint: "abc".into(),
        };
        let mut buf = Vec::new();
        write_suite_to(&suite, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("\"k\":0"));
        assert_eq!(read_suite_from(&buf[..], "mem").unwrap(), suite);
    }

    #[test]
    fn round_trip_and_determinism() {
        let mut lex = LexiconConfig::default_formal();
        lex.subjects.truncate(1);
        let suite = generate_formal_suite(&lex, Property::ConjGap).unwrap();
        let mut a = Vec::new();
        write_suite_to(&suite, &mut a).unwrap();
        let again = generate_formal_suite(&lex, Property::ConjGap).unwrap();
        let mut b = Vec::new();
        write_suite_to(&again, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(read_suite_from(&a[..], "mem").unwrap(), suite);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let mut lex = LexiconConfig::default_formal();
        lex.subjects.truncate(1);
        let suite = generate_formal_suite(&lex, Property::Npi).unwrap();
        let mut buf = Vec::new();
        write_suite_to(&suite, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(read_suite_from(cut.as_bytes(), "mem").is_err());
    }
}
