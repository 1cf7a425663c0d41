//! Relation-offset cosine scores, the cosine embedding loss with analytic
//! gradients, and the concatenated-input classifier score.

use serde::{Deserialize, Serialize};

use crate::corpus::AnalogyQuad;
use crate::embedding::{ToyBackend, ToyGrads};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetVariant {
    /// Pairs the differences (a-b, c-d).
    Ab,
    /// Pairs the differences (a-c, b-d).
    Ac,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LossConfig {
    pub margin: f64,
    pub variant: OffsetVariant,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            margin: 0.0,
            variant: OffsetVariant::Ab,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.margin) {
            return Err(Error::Config(format!(
                "margin must lie in [-1, 1], got {}",
                self.margin
            )));
        }
        Ok(())
    }
}

/// +1 = true analogy, -1 = false.
pub fn pair_label(label: bool) -> i8 {
    if label {
        1
    } else {
        -1
    }
}

/// A score plus a flag marking degenerate inputs (zero vectors), which are
/// scored as 0 instead of raising.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub value: f64,
    pub degenerate: bool,
}

const NORM_EPS: f64 = 1e-300;

/// Cosine similarity; zero-norm inputs yield (0, degenerate).
pub fn cosine(x1: &[f64], x2: &[f64]) -> Scored {
    debug_assert_eq!(x1.len(), x2.len());
    let dot: f64 = x1.iter().zip(x2).map(|(a, b)| a * b).sum();
    let n1: f64 = x1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n2: f64 = x2.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n1 < NORM_EPS || n2 < NORM_EPS {
        return Scored {
            value: 0.0,
            degenerate: true,
        };
    }
    Scored {
        value: dot / (n1 * n2),
        degenerate: false,
    }
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// cos of the paired difference vectors for the given variant.
pub fn offset_score(va: &[f64], vb: &[f64], vc: &[f64], vd: &[f64], variant: OffsetVariant) -> Scored {
    let (x1, x2) = match variant {
        OffsetVariant::Ab => (diff(va, vb), diff(vc, vd)),
        OffsetVariant::Ac => (diff(va, vc), diff(vb, vd)),
    };
    cosine(&x1, &x2)
}

/// y=+1: 1 - cos(x1,x2). y=-1: max(0, cos(x1,x2) - margin).
pub fn cosine_embedding_loss(x1: &[f64], x2: &[f64], y: i8, margin: f64) -> Scored {
    let cos = cosine(x1, x2);
    let value = if y > 0 {
        1.0 - cos.value
    } else {
        (cos.value - margin).max(0.0)
    };
    Scored {
        value,
        degenerate: cos.degenerate,
    }
}

/// Loss plus analytic gradients w.r.t. both inputs. The hinge subgradient at
/// cos = margin is 0; degenerate inputs get zero gradient.
pub fn cosine_embedding_loss_grad(
    x1: &[f64],
    x2: &[f64],
    y: i8,
    margin: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let dim = x1.len();
    let cos = cosine(x1, x2);
    let loss = if y > 0 {
        1.0 - cos.value
    } else {
        (cos.value - margin).max(0.0)
    };

    // dloss/dcos: -1 for positives; 1 past the hinge for negatives; else 0
    let dcos = if y > 0 {
        -1.0
    } else if cos.value > margin {
        1.0
    } else {
        0.0
    };
    if cos.degenerate || dcos == 0.0 {
        return (loss, vec![0.0; dim], vec![0.0; dim]);
    }

    let n1: f64 = x1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n2: f64 = x2.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = cos.value;
    let g1: Vec<f64> = (0..dim)
        .map(|i| dcos * (x2[i] / (n1 * n2) - s * x1[i] / (n1 * n1)))
        .collect();
    let g2: Vec<f64> = (0..dim)
        .map(|i| dcos * (x1[i] / (n1 * n2) - s * x2[i] / (n2 * n2)))
        .collect();
    (loss, g1, g2)
}

/// Mean cosine embedding loss over a batch of quads with gradients for every
/// trainable parameter of the toy backend.
pub fn batch_objective(
    quads: &[&AnalogyQuad],
    backend: &ToyBackend,
    config: &LossConfig,
    freeze_backbone: bool,
) -> Result<(f64, ToyGrads)> {
    config.validate()?;
    if quads.is_empty() {
        return Err(Error::Validation("empty batch".into()));
    }

    let mut total_loss = 0.0;
    let mut grads = ToyGrads::zeros_like(backend);
    for quad in quads {
        let (va, ta) = backend.word_vector_traced(&quad.a)?;
        let (vb, tb) = backend.word_vector_traced(&quad.b)?;
        let (vc, tc) = backend.word_vector_traced(&quad.c)?;
        let (vd, td) = backend.word_vector_traced(&quad.d)?;

        let (x1, x2) = match config.variant {
            OffsetVariant::Ab => (diff(&va, &vb), diff(&vc, &vd)),
            OffsetVariant::Ac => (diff(&va, &vc), diff(&vb, &vd)),
        };
        let (loss, g1, g2) =
            cosine_embedding_loss_grad(&x1, &x2, pair_label(quad.label), config.margin);
        total_loss += loss;

        let neg = |g: &[f64]| g.iter().map(|v| -v).collect::<Vec<f64>>();
        let (ga, gb, gc, gd) = match config.variant {
            OffsetVariant::Ab => (g1.clone(), neg(&g1), g2.clone(), neg(&g2)),
            OffsetVariant::Ac => (g1.clone(), g2.clone(), neg(&g1), neg(&g2)),
        };
        backend.backward_word(&ta, &ga, &mut grads, freeze_backbone);
        backend.backward_word(&tb, &gb, &mut grads, freeze_backbone);
        backend.backward_word(&tc, &gc, &mut grads, freeze_backbone);
        backend.backward_word(&td, &gd, &mut grads, freeze_backbone);
    }

    let n = quads.len() as f64;
    grads.scale(1.0 / n);
    Ok((total_loss / n, grads))
}

/// Mean cross-entropy of the concatenated-input classifier over a batch.
pub fn batch_classifier_objective(
    quads: &[&AnalogyQuad],
    backend: &ToyBackend,
    freeze_backbone: bool,
) -> Result<(f64, ToyGrads)> {
    if quads.is_empty() {
        return Err(Error::Validation("empty batch".into()));
    }

    let mut total_loss = 0.0;
    let mut grads = ToyGrads::zeros_like(backend);
    for quad in quads {
        let words = quad.terms();
        let (rep, trace) = backend.sequence_rep_traced(&words)?;
        let logits = backend.head.apply(&rep);
        let (p0, p1) = crate::embedding::toy_softmax(logits[0], logits[1]);
        let target = usize::from(quad.label);
        let p_target = if target == 1 { p1 } else { p0 };
        total_loss += -(p_target.max(1e-300)).ln();

        // softmax + cross-entropy: dlogits = p - onehot(target)
        let dlogits = [
            p0 - f64::from(u8::from(target == 0)),
            p1 - f64::from(u8::from(target == 1)),
        ];
        let drep = backend
            .head
            .backward(&rep, &dlogits, &mut grads.head_weight, &mut grads.head_bias);
        backend.backward_word(&trace, &drep, &mut grads, freeze_backbone);
    }

    let n = quads.len() as f64;
    grads.scale(1.0 / n);
    Ok((total_loss / n, grads))
}

/// Probability of the positive class for the single concatenated sequence
/// "a [SEP] b [SEP] c [SEP] d".
pub fn concat_classifier_score(backend: &ToyBackend, quad: &AnalogyQuad) -> Result<f64> {
    backend.classifier_probability(&quad.terms())
}
