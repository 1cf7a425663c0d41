//! Deterministic contextual stub backend. Token vectors are derived from a
//! seeded hash of the token string, so every pipeline test runs without
//! model downloads and an independent re-implementation can reproduce the
//! vectors exactly.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::{mean_of, BackendKind, EmbeddingBackend, TokenSpan, WordVector};
use crate::error::{Error, Result};

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

/// Subword tokenizer stand-in. Words in the vocabulary stay whole; anything
/// else is split into fixed-size character chunks.
#[derive(Debug, Clone)]
pub struct StubTokenizer {
    vocab: BTreeSet<String>,
    chunk: usize,
}

impl StubTokenizer {
    pub fn new(vocab: impl IntoIterator<Item = String>, chunk: usize) -> Self {
        StubTokenizer {
            vocab: vocab.into_iter().collect(),
            chunk: chunk.max(1),
        }
    }

    /// No vocabulary: every word is chunked.
    pub fn chunked(chunk: usize) -> Self {
        StubTokenizer::new(std::iter::empty(), chunk)
    }

    /// Every word longer than `chunk` chars splits; shorter words stay whole.
    pub fn tokenize_word(&self, word: &str) -> Vec<String> {
        // multi-word terms tokenize word by word, one shared span downstream
        let mut pieces = Vec::new();
        for part in word.split_whitespace() {
            if self.vocab.contains(part) {
                pieces.push(part.to_string());
                continue;
            }
            let chars: Vec<char> = part.chars().collect();
            for chunk in chars.chunks(self.chunk) {
                pieces.push(chunk.iter().collect());
            }
        }
        pieces
    }
}

#[derive(Debug, Clone)]
pub struct StubBackend {
    dim: usize,
    seed: u64,
    tokenizer: StubTokenizer,
}

pub(crate) fn fnv1a(s: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in s.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl StubBackend {
    pub fn new(dim: usize, seed: u64, tokenizer: StubTokenizer) -> Self {
        StubBackend { dim, seed, tokenizer }
    }

    pub fn tokenizer(&self) -> &StubTokenizer {
        &self.tokenizer
    }

    pub fn token_vector(&self, token: &str) -> WordVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(token));
        (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    /// Lay out `[CLS] w1.. [SEP] (w2.. [SEP])` and return the word spans
    /// (special positions excluded) plus the full token list.
    pub fn layout(&self, words: &[&str]) -> Result<(Vec<String>, Vec<TokenSpan>)> {
        let mut tokens = vec![CLS.to_string()];
        let mut spans = Vec::with_capacity(words.len());
        for word in words {
            let pieces = self.tokenizer.tokenize_word(word);
            if pieces.is_empty() {
                return Err(Error::Alignment(format!(
                    "word {word:?} tokenizes to zero tokens"
                )));
            }
            let start = tokens.len();
            tokens.extend(pieces);
            spans.push(TokenSpan {
                word: word.to_string(),
                start,
                end: tokens.len(),
            });
            tokens.push(SEP.to_string());
        }
        Ok((tokens, spans))
    }

    fn pool_span(&self, tokens: &[String], span: &TokenSpan) -> WordVector {
        let rows: Vec<WordVector> = tokens[span.start..span.end]
            .iter()
            .map(|t| self.token_vector(t))
            .collect();
        mean_of(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>())
    }
}

impl EmbeddingBackend for StubBackend {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> BackendKind {
        BackendKind::Contextual
    }

    fn encode_pair(&self, first: &str, second: &str) -> Result<(WordVector, WordVector)> {
        let (tokens, spans) = self.layout(&[first, second])?;
        Ok((
            self.pool_span(&tokens, &spans[0]),
            self.pool_span(&tokens, &spans[1]),
        ))
    }

    fn encode_single_word(&self, word: &str) -> Result<WordVector> {
        let (tokens, spans) = self.layout(&[word])?;
        Ok(self.pool_span(&tokens, &spans[0]))
    }

    fn is_oov(&self, word: &str) -> bool {
        self.piece_count(word) >= 2
    }

    fn piece_count(&self, word: &str) -> usize {
        self.tokenizer.tokenize_word(word).len()
    }
}
