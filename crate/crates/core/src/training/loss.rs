use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{encode, ModelParams};
use crate::speaker::SpeakerEmbedding;

/// Per-step loss components. `total` is always `l1 + l2 + lambda3 * l3`,
/// accumulated left to right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub total: f64,
}

impl LossReport {
    pub fn new(l1: f64, l2: f64, l3: f64, lambda3: f64) -> Self {
        Self {
            l1,
            l2,
            l3,
            total: total_loss(l1, l2, l3, lambda3),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.l1.is_finite() && self.l2.is_finite() && self.l3.is_finite() && self.total.is_finite()
    }
}

fn same_shape(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    if a.is_empty() {
        return Err(Error::Degenerate("loss over an empty matrix".into()));
    }
    Ok(())
}

/// Mean of squared entrywise differences.
pub fn mse(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    same_shape(a, b)?;
    let sum: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// Mean of absolute entrywise differences.
pub fn mean_abs(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    same_shape(a, b)?;
    let sum: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.len() as f64)
}

/// Reconstruction error of the decoder output.
pub fn loss_l1(x: ArrayView2<f64>, decoded: ArrayView2<f64>) -> Result<f64> {
    mse(x, decoded)
}

/// Reconstruction error of the postnet output.
pub fn loss_l2(x: ArrayView2<f64>, refined: ArrayView2<f64>) -> Result<f64> {
    mse(x, refined)
}

/// Content consistency: mean absolute difference between the codes of the
/// input and the codes of the postnet output, both encoded with `e`.
pub fn loss_l3(
    params: &ModelParams,
    x: ArrayView2<f64>,
    refined: ArrayView2<f64>,
    e: &SpeakerEmbedding,
) -> Result<f64> {
    let a = encode(params, x, e)?;
    let b = encode(params, refined, e)?;
    mean_abs(a.codes().view(), b.codes().view())
}

pub fn total_loss(l1: f64, l2: f64, l3: f64, lambda3: f64) -> f64 {
    l1 + l2 + lambda3 * l3
}
