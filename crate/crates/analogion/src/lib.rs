//! Training and evaluation of embedding models on proportional analogies
//! (a:b::c:d) with relation-offset cosine objectives.
//!
//! The pipeline ingests four analogy datasets into one balanced corpus,
//! fine-tunes a trainable toy backend fold-by-fold, and evaluates held-out
//! analogies under classification, ranking and distractor protocols, with
//! word-similarity and frequency/OOV analyses on the side.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod fixtures;
pub mod manifest;
pub mod objective;
pub mod training;

pub use error::{Error, Result};
