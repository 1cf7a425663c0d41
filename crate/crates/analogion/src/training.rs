//! Fold-wise fine-tuning of the toy backend with decoupled-weight-decay
//! Adam, including the frozen-backbone single-layer variant.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{AnalogyQuad, BalancedCorpus, FoldSplit};
use crate::embedding::{ToyBackend, ToyGrads};
use crate::error::{Error, Result};
use crate::objective::{batch_classifier_objective, batch_objective, LossConfig, OffsetVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SimpleClassifier,
    OffsetAb,
    OffsetAc,
}

impl Objective {
    pub fn offset_variant(&self) -> Option<OffsetVariant> {
        match self {
            Objective::SimpleClassifier => None,
            Objective::OffsetAb => Some(OffsetVariant::Ab),
            Objective::OffsetAc => Some(OffsetVariant::Ac),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub betas: (f64, f64),
    pub seed: u64,
    pub objective: Objective,
    pub margin: f64,
    pub freeze_backbone: bool,
    pub extra_layer: bool,
    pub backbone_id: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 3,
            batch_size: 32,
            learning_rate: 2e-5,
            weight_decay: 0.01,
            betas: (0.9, 0.999),
            seed: 0,
            objective: Objective::OffsetAb,
            margin: 0.0,
            freeze_backbone: false,
            extra_layer: false,
            backbone_id: "toy:32".into(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be > 0".into()));
        }
        if self.extra_layer && !self.freeze_backbone {
            return Err(Error::Config(
                "extra_layer requires freeze_backbone".into(),
            ));
        }
        Ok(())
    }

    /// Toy backbone ids look like `toy:<dim>`.
    pub fn toy_dim(&self) -> Result<usize> {
        self.backbone_id
            .strip_prefix("toy:")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| {
                Error::Config(format!(
                    "backbone_id {:?} is not a trainable toy backbone (expected toy:<dim>)",
                    self.backbone_id
                ))
            })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    pub fold_index: usize,
    pub epoch_mean_losses: Vec<f64>,
    pub final_loss: f64,
    pub duration_secs: f64,
    pub backbone_digest_before: String,
    pub backbone_digest_after: String,
}

#[derive(Debug)]
pub struct RunArtifact {
    pub fold_index: usize,
    pub backend: ToyBackend,
    pub log: Vec<StepLog>,
    pub metrics: RunMetrics,
    pub config: TrainConfig,
    pub heldout_ids: Vec<String>,
    pub dir: Option<PathBuf>,
}

/// Decoupled-weight-decay Adam over the toy backend's tensors.
pub struct AdamW {
    lr: f64,
    weight_decay: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamW {
    pub fn new(cfg: &TrainConfig, backend: &ToyBackend) -> Self {
        let shapes = Self::tensor_lens(backend);
        AdamW {
            lr: cfg.learning_rate,
            weight_decay: cfg.weight_decay,
            beta1: cfg.betas.0,
            beta2: cfg.betas.1,
            eps: 1e-8,
            t: 0,
            m: shapes.iter().map(|len| vec![0.0; *len]).collect(),
            v: shapes.iter().map(|len| vec![0.0; *len]).collect(),
        }
    }

    fn tensor_lens(backend: &ToyBackend) -> Vec<usize> {
        let (ew, eb) = match &backend.extra {
            Some(a) => (a.weight.len(), a.bias.len()),
            None => (0, 0),
        };
        vec![
            backend.embeddings.len(),
            ew,
            eb,
            backend.head.weight.len(),
            backend.head.bias.len(),
        ]
    }

    pub fn step(&mut self, backend: &mut ToyBackend, grads: &ToyGrads, freeze_backbone: bool) {
        self.t += 1;
        if !freeze_backbone {
            self.update_tensor(0, &mut backend.embeddings, &grads.embeddings);
        }
        if let Some(extra) = &mut backend.extra {
            self.update_tensor(1, &mut extra.weight, &grads.extra_weight);
            self.update_tensor(2, &mut extra.bias, &grads.extra_bias);
        }
        self.update_tensor(3, &mut backend.head.weight, &grads.head_weight);
        self.update_tensor(4, &mut backend.head.bias, &grads.head_bias);
    }

    fn update_tensor(&mut self, idx: usize, params: &mut [f64], grad: &[f64]) {
        let bias1 = 1.0 - self.beta1.powi(self.t as i32);
        let bias2 = 1.0 - self.beta2.powi(self.t as i32);
        let m = &mut self.m[idx];
        let v = &mut self.v[idx];
        for i in 0..params.len() {
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * grad[i];
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            params[i] -=
                self.lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * params[i]);
        }
    }
}

fn derive_seed(master: u64, stream: u64) -> u64 {
    // splitmix64 over (master, stream)
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn digest_f64s(values: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for value in values {
        hasher.update(value.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Deterministic backbone initialization for a given config and fold.
pub fn init_backend(corpus: &BalancedCorpus, config: &TrainConfig, fold_index: usize) -> Result<ToyBackend> {
    let dim = config.toy_dim()?;
    Ok(ToyBackend::from_corpus(
        corpus,
        dim,
        derive_seed(config.seed, fold_index as u64),
        config.extra_layer,
    ))
}

fn objective_step(
    batch: &[&AnalogyQuad],
    backend: &ToyBackend,
    config: &TrainConfig,
) -> Result<(f64, ToyGrads)> {
    match config.objective.offset_variant() {
        Some(variant) => batch_objective(
            batch,
            backend,
            &LossConfig {
                margin: config.margin,
                variant,
            },
            config.freeze_backbone,
        ),
        None => batch_classifier_objective(batch, backend, config.freeze_backbone),
    }
}

/// Train on every fold except `fold_index`. Batches are reshuffled each
/// epoch with a seed derived from (config seed, fold); the final short batch
/// is kept.
pub fn train_fold(
    corpus: &BalancedCorpus,
    folds: &FoldSplit,
    fold_index: usize,
    config: &TrainConfig,
    out_dir: Option<&Path>,
) -> Result<RunArtifact> {
    config.validate()?;
    if fold_index >= folds.k {
        return Err(Error::Config(format!(
            "fold index {fold_index} out of range for k={}",
            folds.k
        )));
    }

    let mut train_quads: Vec<&AnalogyQuad> = Vec::new();
    let mut heldout_ids: Vec<String> = Vec::new();
    for quad in &corpus.quads {
        let id = quad.id();
        let fold = folds.fold_of(&id).ok_or_else(|| {
            Error::Validation(format!("quad {id} missing from fold assignments"))
        })?;
        if fold == fold_index {
            heldout_ids.push(id);
        } else {
            train_quads.push(quad);
        }
    }
    if heldout_ids.is_empty() {
        return Err(Error::Validation(format!("held-out fold {fold_index} is empty")));
    }
    if train_quads.is_empty() {
        return Err(Error::Validation("training split is empty".into()));
    }

    let started = Instant::now();
    let mut backend = init_backend(corpus, config, fold_index)?;
    let digest_before = digest_f64s(&backend.embeddings);
    let mut optimizer = AdamW::new(config, &backend);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1_000 + fold_index as u64));

    let mut log = Vec::new();
    let mut epoch_mean_losses = Vec::with_capacity(config.epochs);
    let mut step = 0usize;
    for epoch in 0..config.epochs {
        train_quads.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in train_quads.chunks(config.batch_size) {
            let (loss, grads) = objective_step(batch, &backend, config)?;
            optimizer.step(&mut backend, &grads, config.freeze_backbone);
            step += 1;
            epoch_loss += loss;
            batches += 1;
            log.push(StepLog {
                step,
                epoch,
                loss,
                lr: config.learning_rate,
            });
        }
        epoch_mean_losses.push(epoch_loss / batches as f64);
    }

    let metrics = RunMetrics {
        fold_index,
        final_loss: log.last().map(|l| l.loss).unwrap_or(f64::NAN),
        epoch_mean_losses,
        duration_secs: started.elapsed().as_secs_f64(),
        backbone_digest_before: digest_before,
        backbone_digest_after: digest_f64s(&backend.embeddings),
    };

    let dir = match out_dir {
        Some(base) => Some(write_artifact(base, fold_index, config, &backend, &log, &metrics)?),
        None => None,
    };

    Ok(RunArtifact {
        fold_index,
        backend,
        log,
        metrics,
        config: config.clone(),
        heldout_ids,
        dir,
    })
}

fn write_artifact(
    base: &Path,
    fold_index: usize,
    config: &TrainConfig,
    backend: &ToyBackend,
    log: &[StepLog],
    metrics: &RunMetrics,
) -> Result<PathBuf> {
    let dir = base.join(format!("fold_{fold_index}"));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let config_path = dir.join("config.json");
    let file = File::create(&config_path).map_err(|e| Error::io(&config_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), config)?;

    let log_path = dir.join("train_log.jsonl");
    let file = File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut writer = BufWriter::new(file);
    for entry in log {
        serde_json::to_writer(&mut writer, entry)?;
        writer.write_all(b"\n").map_err(|e| Error::io(&log_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(&log_path, e))?;

    backend.save(&dir.join("params.json"))?;

    let metrics_path = dir.join("metrics.json");
    let file = File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), metrics)?;

    Ok(dir)
}

pub fn artifact_is_complete(base: &Path, fold_index: usize) -> bool {
    let dir = base.join(format!("fold_{fold_index}"));
    ["config.json", "train_log.jsonl", "params.json", "metrics.json"]
        .iter()
        .all(|name| dir.join(name).is_file())
}

/// One run per fold, with per-fold seeds derived from the master seed.
pub fn train_all_folds(
    corpus: &BalancedCorpus,
    folds: &FoldSplit,
    config: &TrainConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<RunArtifact>> {
    (0..folds.k)
        .map(|fold| train_fold(corpus, folds, fold, config, out_dir))
        .collect()
}

/// Appendix-style variant: frozen backbone, identity-initialized extra
/// feed-forward layer trained alone.
pub fn train_frozen_single_layer(
    corpus: &BalancedCorpus,
    folds: &FoldSplit,
    config: &TrainConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<RunArtifact>> {
    if !config.extra_layer || !config.freeze_backbone {
        return Err(Error::Config(
            "frozen single-layer training requires extra_layer and freeze_backbone".into(),
        ));
    }
    train_all_folds(corpus, folds, config, out_dir)
}
