//! Pluggable word-vector backends: a static lookup table, a deterministic
//! stub pair encoder for tests and desk-scale runs, and a trainable toy
//! encoder.

mod frequency;
mod static_table;
mod stub;
mod toy;

pub use frequency::FrequencyTable;
pub use static_table::StaticBackend;
pub use stub::{StubBackend, StubTokenizer};
pub use toy::{Affine, ToyBackend, ToyGrads, WordTrace};
pub(crate) use toy::softmax2 as toy_softmax;

use crate::corpus::AnalogyQuad;
use crate::error::Result;

pub type WordVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Static,
    Contextual,
}

/// Contiguous token index range occupied by one word inside an encoded
/// sequence (end exclusive, special positions excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub word: String,
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

pub trait EmbeddingBackend {
    fn dimension(&self) -> usize;
    fn kind(&self) -> BackendKind;

    /// Encode a word pair in one sequence and mean-pool each word's final
    /// hidden vectors over its token span. Static backends fall back to two
    /// independent lookups.
    fn encode_pair(&self, first: &str, second: &str) -> Result<(WordVector, WordVector)>;

    /// Encode one word alone, with no pair partner.
    fn encode_single_word(&self, word: &str) -> Result<WordVector>;

    /// Contextual: the tokenizer splits the word into >= 2 pieces.
    /// Static: the word is absent from the vocabulary.
    fn is_oov(&self, word: &str) -> bool;

    /// Number of subword pieces the backend's tokenizer assigns to the word.
    fn piece_count(&self, word: &str) -> usize;
}

/// Encode (a,b) and (c,d) independently; the two pair encodings never attend
/// to each other.
pub fn encode_quad_for_offsets(
    backend: &dyn EmbeddingBackend,
    quad: &AnalogyQuad,
) -> Result<[WordVector; 4]> {
    let (va, vb) = backend.encode_pair(&quad.a, &quad.b)?;
    let (vc, vd) = backend.encode_pair(&quad.c, &quad.d)?;
    Ok([va, vb, vc, vd])
}

pub(crate) fn mean_of(rows: &[&[f64]]) -> WordVector {
    let dim = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut out = vec![0.0; dim];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row.iter()) {
            *o += v;
        }
    }
    let n = rows.len() as f64;
    for o in &mut out {
        *o /= n;
    }
    out
}
