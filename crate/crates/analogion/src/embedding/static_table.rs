//! FastText-style static lookup backend: a word table plus an optional
//! character n-gram table used to compose vectors for OOV words.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::embedding::{mean_of, BackendKind, EmbeddingBackend, WordVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct StaticBackend {
    dim: usize,
    table: HashMap<String, WordVector>,
    ngrams: Option<NgramTable>,
}

#[derive(Debug, Clone)]
pub struct NgramTable {
    min_n: usize,
    max_n: usize,
    vectors: HashMap<String, WordVector>,
}

/// Character n-grams of `<word>` (with boundary markers), lengths
/// `min_n..=max_n`, in order of occurrence.
pub fn char_ngrams(word: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut grams = Vec::new();
    for n in min_n..=max_n {
        if n > chars.len() {
            break;
        }
        for window in chars.windows(n) {
            grams.push(window.iter().collect());
        }
    }
    grams
}

impl StaticBackend {
    pub fn new(dim: usize, table: HashMap<String, WordVector>, ngrams: Option<NgramTable>) -> Result<Self> {
        for (word, vec) in &table {
            if vec.len() != dim {
                return Err(Error::Validation(format!(
                    "vector for {word:?} has dimension {}, expected {dim}",
                    vec.len()
                )));
            }
            if vec.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("non-finite entry for {word:?}")));
            }
        }
        Ok(StaticBackend { dim, table, ngrams })
    }

    /// Load the text format: a `dim <d>` header, `word v1 .. vd` lines, and
    /// an optional `#ngrams <min> <max>` section of n-gram vectors.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut lines = reader.lines().enumerate();

        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        let header = header.map_err(|e| Error::io(path, e))?;
        let dim: usize = header
            .strip_prefix("dim ")
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("expected `dim <d>` header, got {header:?}"),
            })?;

        let mut table = HashMap::new();
        let mut ngrams: Option<NgramTable> = None;
        let mut in_ngrams = false;
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#ngrams") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: "expected `#ngrams <min> <max>`".into(),
                    });
                }
                let min_n = parts[0].parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: "bad min_n".into(),
                })?;
                let max_n = parts[1].parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: "bad max_n".into(),
                })?;
                ngrams = Some(NgramTable {
                    min_n,
                    max_n,
                    vectors: HashMap::new(),
                });
                in_ngrams = true;
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap().to_string();
            let values: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            if values.len() != dim {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {dim} values, got {}", values.len()),
                });
            }
            if in_ngrams {
                ngrams.as_mut().unwrap().vectors.insert(key, values);
            } else {
                table.insert(key, values);
            }
        }
        StaticBackend::new(dim, table, ngrams)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.table.contains_key(word)
    }

    /// In-vocabulary word: its table row. OOV word: the mean of its known
    /// character n-gram vectors, when an n-gram table is available.
    pub fn lookup(&self, word: &str) -> Result<WordVector> {
        if word.is_empty() {
            return Err(Error::Validation("cannot look up an empty word".into()));
        }
        if let Some(vec) = self.table.get(word) {
            return Ok(vec.clone());
        }
        if let Some(ngrams) = &self.ngrams {
            let rows: Vec<&[f64]> = char_ngrams(word, ngrams.min_n, ngrams.max_n)
                .iter()
                .filter_map(|g| ngrams.vectors.get(g).map(|v| v.as_slice()))
                .collect();
            if !rows.is_empty() {
                return Ok(mean_of(&rows));
            }
        }
        Err(Error::MissingWord(word.to_string()))
    }
}

impl EmbeddingBackend for StaticBackend {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Static
    }

    fn encode_pair(&self, first: &str, second: &str) -> Result<(WordVector, WordVector)> {
        Ok((self.lookup(first)?, self.lookup(second)?))
    }

    fn encode_single_word(&self, word: &str) -> Result<WordVector> {
        self.lookup(word)
    }

    fn is_oov(&self, word: &str) -> bool {
        !self.table.contains_key(word)
    }

    fn piece_count(&self, word: &str) -> usize {
        if self.table.contains_key(word) {
            1
        } else {
            2
        }
    }
}
