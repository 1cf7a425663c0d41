//! Pretraining word-frequency estimates, loaded from a `word<TAB>count` TSV.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct FrequencyTable {
    counts: BTreeMap<String, u64>,
}

impl FrequencyTable {
    pub fn new(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        FrequencyTable {
            counts: counts.into_iter().collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut counts = BTreeMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, count) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected word<TAB>count".into(),
            })?;
            let count: u64 = count.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad count {count:?}"),
            })?;
            counts.insert(word.to_string(), count);
        }
        Ok(FrequencyTable { counts })
    }

    pub fn dump(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        for (word, count) in &self.counts {
            writeln!(writer, "{word}\t{count}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    /// Case-folded lookup first, raw form as fallback. Absent words are
    /// `None`, never zero.
    pub fn lookup(&self, word: &str) -> Option<u64> {
        self.counts
            .get(&word.to_lowercase())
            .or_else(|| self.counts.get(word))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_unknown_marker() {
        let table = FrequencyTable::new([("sun".to_string(), 12345u64)]);
        assert_eq!(table.lookup("sun"), Some(12345));
        assert_eq!(table.lookup("SUN"), Some(12345));
        assert_eq!(table.lookup("planet"), None);
    }

    #[test]
    fn raw_form_fallback() {
        let table = FrequencyTable::new([("NASA".to_string(), 7u64)]);
        assert_eq!(table.lookup("NASA"), Some(7));
    }

    #[test]
    fn tsv_round_trip() {
        let table = FrequencyTable::new([
            ("planet".to_string(), 100u64),
            ("sun".to_string(), 200u64),
        ]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("freq.tsv");
        table.dump(&path).unwrap();
        let loaded = FrequencyTable::load(&path).unwrap();
        assert_eq!(loaded.lookup("planet"), Some(100));
        assert_eq!(loaded.lookup("sun"), Some(200));
        assert_eq!(loaded.len(), 2);
        // file diff oracle: dumping again reproduces the bytes
        let path2 = dir.path().join("freq2.tsv");
        loaded.dump(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }
}
