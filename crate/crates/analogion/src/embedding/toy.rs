//! Trainable toy encoder: a word embedding table, an optional
//! dimension-preserving feed-forward layer applied token-wise before
//! pooling, and a two-output classification head. Small enough for
//! finite-difference gradient checks and fast desk-scale training.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::BalancedCorpus;
use crate::embedding::{BackendKind, EmbeddingBackend, WordVector};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_LEN: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub weight: Vec<f64>, // out x in, row-major
    pub bias: Vec<f64>,   // out
    pub rows: usize,
    pub cols: usize,
}

impl Affine {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Affine {
            weight: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
            rows,
            cols,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut a = Affine::zeros(dim, dim);
        for i in 0..dim {
            a.weight[i * dim + i] = 1.0;
        }
        a
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                self.bias[r]
                    + self.weight[r * self.cols..(r + 1) * self.cols]
                        .iter()
                        .zip(x)
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Given dL/dy, accumulate dL/dW and dL/db and return dL/dx.
    pub fn backward(&self, x: &[f64], dy: &[f64], dw: &mut [f64], db: &mut [f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.cols];
        for r in 0..self.rows {
            db[r] += dy[r];
            for c in 0..self.cols {
                dw[r * self.cols + c] += dy[r] * x[c];
                dx[c] += self.weight[r * self.cols + c] * dy[r];
            }
        }
        dx
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyBackend {
    words: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    dim: usize,
    pub embeddings: Vec<f64>, // vocab x dim
    pub extra: Option<Affine>,
    pub head: Affine,
    pub max_len: usize,
}

/// Token ids one word occupies; enough to replay the forward pass during
/// backprop.
#[derive(Debug, Clone)]
pub struct WordTrace {
    pub token_ids: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ToyGrads {
    pub embeddings: Vec<f64>,
    pub extra_weight: Vec<f64>,
    pub extra_bias: Vec<f64>,
    pub head_weight: Vec<f64>,
    pub head_bias: Vec<f64>,
}

impl ToyGrads {
    pub fn zeros_like(backend: &ToyBackend) -> Self {
        let (ew, eb) = match &backend.extra {
            Some(a) => (a.weight.len(), a.bias.len()),
            None => (0, 0),
        };
        ToyGrads {
            embeddings: vec![0.0; backend.embeddings.len()],
            extra_weight: vec![0.0; ew],
            extra_bias: vec![0.0; eb],
            head_weight: vec![0.0; backend.head.weight.len()],
            head_bias: vec![0.0; backend.head.bias.len()],
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for tensor in [
            &mut self.embeddings,
            &mut self.extra_weight,
            &mut self.extra_bias,
            &mut self.head_weight,
            &mut self.head_bias,
        ] {
            for g in tensor.iter_mut() {
                *g *= factor;
            }
        }
    }
}

impl ToyBackend {
    pub fn from_vocab(
        words: Vec<String>,
        dim: usize,
        seed: u64,
        init_scale: f64,
        extra_layer: bool,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let embeddings = (0..words.len() * dim)
            .map(|_| rng.gen_range(-init_scale..init_scale))
            .collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        ToyBackend {
            words,
            index,
            dim,
            embeddings,
            extra: extra_layer.then(|| Affine::identity(dim)),
            head: Affine::zeros(2, dim),
            max_len: DEFAULT_MAX_LEN,
        }
    }

    /// Vocabulary = every whitespace-delimited token of every term, in
    /// first-seen order.
    pub fn from_corpus(corpus: &BalancedCorpus, dim: usize, seed: u64, extra_layer: bool) -> Self {
        let mut words = Vec::new();
        let mut seen = HashMap::new();
        for quad in &corpus.quads {
            for term in quad.terms() {
                for token in term.split_whitespace() {
                    if !seen.contains_key(token) {
                        seen.insert(token.to_string(), words.len());
                        words.push(token.to_string());
                    }
                }
            }
        }
        ToyBackend::from_vocab(words, dim, seed, 0.1, extra_layer)
    }

    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn vocab_words(&self) -> &[String] {
        &self.words
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut backend: ToyBackend = serde_json::from_reader(BufReader::new(file))?;
        backend.rebuild_index();
        Ok(backend)
    }

    fn token_ids(&self, word: &str) -> Result<Vec<usize>> {
        let ids: Vec<usize> = word
            .split_whitespace()
            .map(|t| {
                self.index
                    .get(t)
                    .copied()
                    .ok_or_else(|| Error::MissingWord(t.to_string()))
            })
            .collect::<Result<_>>()?;
        if ids.is_empty() {
            return Err(Error::Alignment(format!(
                "word {word:?} tokenizes to zero tokens"
            )));
        }
        Ok(ids)
    }

    fn token_hidden(&self, id: usize) -> Vec<f64> {
        let base = &self.embeddings[id * self.dim..(id + 1) * self.dim];
        match &self.extra {
            Some(layer) => layer.apply(base),
            None => base.to_vec(),
        }
    }

    /// Forward pass for one word: mean of its token hidden vectors.
    pub fn word_vector_traced(&self, word: &str) -> Result<(WordVector, WordTrace)> {
        let ids = self.token_ids(word)?;
        let mut out = vec![0.0; self.dim];
        for id in &ids {
            for (o, h) in out.iter_mut().zip(self.token_hidden(*id)) {
                *o += h;
            }
        }
        let n = ids.len() as f64;
        for o in &mut out {
            *o /= n;
        }
        Ok((out, WordTrace { token_ids: ids }))
    }

    /// Backprop a word-vector gradient through pooling, the optional extra
    /// layer and the embedding table. With `freeze_backbone` only the extra
    /// layer accumulates gradient.
    pub fn backward_word(
        &self,
        trace: &WordTrace,
        grad: &[f64],
        grads: &mut ToyGrads,
        freeze_backbone: bool,
    ) {
        let per_token: Vec<f64> = grad.iter().map(|g| g / trace.token_ids.len() as f64).collect();
        for id in &trace.token_ids {
            let base = &self.embeddings[id * self.dim..(id + 1) * self.dim];
            match &self.extra {
                Some(layer) => {
                    let dx = layer.backward(
                        base,
                        &per_token,
                        &mut grads.extra_weight,
                        &mut grads.extra_bias,
                    );
                    if !freeze_backbone {
                        for (slot, g) in grads.embeddings[id * self.dim..(id + 1) * self.dim]
                            .iter_mut()
                            .zip(dx)
                        {
                            *slot += g;
                        }
                    }
                }
                None => {
                    if !freeze_backbone {
                        for (slot, g) in grads.embeddings[id * self.dim..(id + 1) * self.dim]
                            .iter_mut()
                            .zip(&per_token)
                        {
                            *slot += g;
                        }
                    }
                }
            }
        }
    }

    /// Sequence representation for the concatenated classifier input: mean
    /// of all word-token hidden vectors ([CLS]/[SEP] positions excluded).
    pub fn sequence_rep_traced(&self, words: &[&str]) -> Result<(WordVector, WordTrace)> {
        let mut ids = Vec::new();
        for word in words {
            ids.extend(self.token_ids(word)?);
        }
        // words.len() + 1 separators plus [CLS]
        let seq_len = ids.len() + words.len() + 1;
        if seq_len > self.max_len {
            return Err(Error::Truncation {
                len: seq_len,
                limit: self.max_len,
            });
        }
        let mut rep = vec![0.0; self.dim];
        for id in &ids {
            for (o, h) in rep.iter_mut().zip(self.token_hidden(*id)) {
                *o += h;
            }
        }
        let n = ids.len() as f64;
        for o in &mut rep {
            *o /= n;
        }
        Ok((rep, WordTrace { token_ids: ids }))
    }

    /// Positive-class probability from the affine head over the sequence
    /// representation.
    pub fn classifier_probability(&self, words: &[&str]) -> Result<f64> {
        let (rep, _) = self.sequence_rep_traced(words)?;
        let logits = self.head.apply(&rep);
        Ok(softmax2(logits[0], logits[1]).1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat view of all parameters, for finite-difference checks and
    /// optimizer audits. Order: embeddings, extra weight, extra bias, head
    /// weight, head bias.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = self.embeddings.clone();
        if let Some(extra) = &self.extra {
            out.extend_from_slice(&extra.weight);
            out.extend_from_slice(&extra.bias);
        }
        out.extend_from_slice(&self.head.weight);
        out.extend_from_slice(&self.head.bias);
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        let mut cursor = 0;
        let take = |cursor: &mut usize, len: usize| {
            let slice = &flat[*cursor..*cursor + len];
            *cursor += len;
            slice.to_vec()
        };
        self.embeddings = take(&mut cursor, self.embeddings.len());
        if let Some(extra) = &mut self.extra {
            extra.weight = take(&mut cursor, extra.weight.len());
            extra.bias = take(&mut cursor, extra.bias.len());
        }
        self.head.weight = take(&mut cursor, self.head.weight.len());
        self.head.bias = take(&mut cursor, self.head.bias.len());
        assert_eq!(cursor, flat.len());
    }

    pub fn grads_flat(grads: &ToyGrads) -> Vec<f64> {
        let mut out = grads.embeddings.clone();
        out.extend_from_slice(&grads.extra_weight);
        out.extend_from_slice(&grads.extra_bias);
        out.extend_from_slice(&grads.head_weight);
        out.extend_from_slice(&grads.head_bias);
        out
    }
}

pub(crate) fn softmax2(l0: f64, l1: f64) -> (f64, f64) {
    let m = l0.max(l1);
    let e0 = (l0 - m).exp();
    let e1 = (l1 - m).exp();
    let z = e0 + e1;
    (e0 / z, e1 / z)
}

impl EmbeddingBackend for ToyBackend {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Contextual
    }

    fn encode_pair(&self, first: &str, second: &str) -> Result<(WordVector, WordVector)> {
        let (v1, _) = self.word_vector_traced(first)?;
        let (v2, _) = self.word_vector_traced(second)?;
        Ok((v1, v2))
    }

    fn encode_single_word(&self, word: &str) -> Result<WordVector> {
        Ok(self.word_vector_traced(word)?.0)
    }

    fn is_oov(&self, word: &str) -> bool {
        self.piece_count(word) >= 2
    }

    fn piece_count(&self, word: &str) -> usize {
        word.split_whitespace().count().max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backend(extra: bool) -> ToyBackend {
        ToyBackend::from_vocab(
            vec!["sun".into(), "planet".into(), "solar".into(), "system".into()],
            3,
            1,
            0.5,
            extra,
        )
    }

    #[test]
    fn single_token_word_is_embedding_row() {
        let b = backend(false);
        let (v, trace) = b.word_vector_traced("sun").unwrap();
        assert_eq!(trace.token_ids, vec![0]);
        assert_eq!(v, b.embeddings[0..3].to_vec());
    }

    #[test]
    fn multiword_term_is_mean_of_rows() {
        let b = backend(false);
        let (v, trace) = b.word_vector_traced("solar system").unwrap();
        assert_eq!(trace.token_ids, vec![2, 3]);
        for i in 0..3 {
            let expected = (b.embeddings[2 * 3 + i] + b.embeddings[3 * 3 + i]) / 2.0;
            assert!((v[i] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_extra_layer_preserves_vectors() {
        let plain = backend(false);
        let with_extra = {
            let mut b = backend(false);
            b.extra = Some(Affine::identity(3));
            b
        };
        let (v1, _) = plain.word_vector_traced("planet").unwrap();
        let (v2, _) = with_extra.word_vector_traced("planet").unwrap();
        for (a, b) in v1.iter().zip(&v2) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_word_is_missing_word_error() {
        let b = backend(false);
        match b.word_vector_traced("nucleus") {
            Err(Error::MissingWord(w)) => assert_eq!(w, "nucleus"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_head_gives_half_probability() {
        let b = backend(false);
        let p = b.classifier_probability(&["sun", "planet", "solar", "system"]).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn classifier_respects_length_limit() {
        let mut b = backend(false);
        b.max_len = 4;
        match b.classifier_probability(&["sun", "planet", "solar", "system"]) {
            Err(Error::Truncation { len, limit }) => {
                assert_eq!(len, 9);
                assert_eq!(limit, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn params_flat_round_trip() {
        let mut b = backend(true);
        let flat = b.params_flat();
        let mut perturbed = flat.clone();
        perturbed[0] += 1.5;
        b.set_params_flat(&perturbed);
        assert_eq!(b.params_flat(), perturbed);
    }

    #[test]
    fn backward_word_frozen_leaves_embedding_grads_zero() {
        let b = backend(true);
        let (_, trace) = b.word_vector_traced("sun").unwrap();
        let mut grads = ToyGrads::zeros_like(&b);
        b.backward_word(&trace, &[1.0, 2.0, 3.0], &mut grads, true);
        assert!(grads.embeddings.iter().all(|g| *g == 0.0));
        assert!(grads.extra_weight.iter().any(|g| *g != 0.0));
    }

    #[test]
    fn save_load_round_trip() {
        let b = backend(true);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.json");
        b.save(&path).unwrap();
        let loaded = ToyBackend::load(&path).unwrap();
        assert_eq!(loaded.params_flat(), b.params_flat());
        let (v, _) = loaded.word_vector_traced("sun").unwrap();
        assert_eq!(v, b.word_vector_traced("sun").unwrap().0);
    }
}
