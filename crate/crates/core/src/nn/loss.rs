//! The four training losses. Each is a masked, per-sample weighted squared
//! error summed over actions and averaged over the batch:
//!
//! `L = 1/n * sum_i w_i * sum_a m_ia (o_ia - y_ia)^2`
//!
//! where `o` is the raw output, or a softmax over unmasked entries for the
//! average-strategy network.

use ndarray::{Array1, Array2};

use super::mlp::{Gradients, Mlp};
use crate::tabular::discount;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Cumulative advantage network against a bootstrapped target.
    BootstrapCumulative,
    /// Instantaneous advantage network against sampled advantages.
    Instantaneous,
    /// History value network against a one-step target on the taken action.
    QTd,
    /// Average-strategy network against iteration-weighted strategies.
    WeightedStrategy,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [
        LossKind::BootstrapCumulative,
        LossKind::Instantaneous,
        LossKind::QTd,
        LossKind::WeightedStrategy,
    ];

    pub fn softmax_output(self) -> bool {
        self == LossKind::WeightedStrategy
    }
}

/// Training examples laid out as dense matrices.
#[derive(Clone, Debug)]
pub struct Batch {
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
    /// 1 where the entry contributes, 0 elsewhere.
    pub mask: Array2<f64>,
    pub weights: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }
}

/// Softmax restricted to entries with `mask > 0`; masked entries get 0.
pub fn masked_softmax(logits: &[f64], mask: &[f64]) -> Vec<f64> {
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&z, _)| z)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&z, &m)| if m > 0.0 { (z - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|p| *p /= total);
    }
    out
}

/// Mean loss over the batch and its gradient with respect to the network
/// parameters.
pub fn loss_and_gradients(net: &Mlp, batch: &Batch, kind: LossKind) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    if batch.targets.iter().any(|v| !v.is_finite()) || batch.weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training target"));
    }
    let cache = net.forward_cached(batch.inputs.view())?;
    let n = batch.len();
    let scale = 1.0 / n as f64;
    let mut grad = Array2::zeros(cache.output.raw_dim());
    let mut loss = 0.0;
    for i in 0..n {
        let w = batch.weights[i];
        let z = cache.output.row(i);
        let y = batch.targets.row(i);
        let m = batch.mask.row(i);
        if kind.softmax_output() {
            let p = masked_softmax(z.as_slice().expect("row"), m.to_vec().as_slice());
            let g: Vec<f64> = (0..p.len()).map(|a| 2.0 * w * m[a] * (p[a] - y[a])).collect();
            loss += w * (0..p.len()).map(|a| m[a] * (p[a] - y[a]).powi(2)).sum::<f64>();
            let dot: f64 = p.iter().zip(&g).map(|(p, g)| p * g).sum();
            for a in 0..p.len() {
                grad[[i, a]] = scale * p[a] * (g[a] - dot);
            }
        } else {
            for a in 0..z.len() {
                let d = m[a] * (z[a] - y[a]);
                loss += w * d * d;
                grad[[i, a]] = scale * 2.0 * w * d;
            }
        }
    }
    let loss = loss * scale;
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    Ok((loss, net.backward(&cache, grad)))
}

/// Only evaluates the loss.
pub fn loss_value(net: &Mlp, batch: &Batch, kind: LossKind) -> Result<f64> {
    let out = net.forward_batch(batch.inputs.view())?;
    let mut loss = 0.0;
    for i in 0..batch.len() {
        let m = batch.mask.row(i).to_vec();
        let o = if kind.softmax_output() {
            masked_softmax(out.row(i).as_slice().expect("row"), &m)
        } else {
            out.row(i).to_vec()
        };
        let sq: f64 = (0..o.len()).map(|a| m[a] * (o[a] - batch.targets[[i, a]]).powi(2)).sum();
        loss += batch.weights[i] * sq;
    }
    Ok(loss / batch.len() as f64)
}

/// How the previous cumulative estimate enters the bootstrapped target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bootstrap {
    /// `max(prev, 0) * (t-1)^alpha / ((t-1)^alpha + 1)`.
    DiscountClip { alpha: f64 },
    /// `prev`, undiscounted and unclipped.
    Plain,
    /// `prev * (t-1) / t`.
    Linear,
}

/// Target for the cumulative advantage network at iteration `t`.
pub fn make_target_bootstrap_cumulative(prev: &[f64], advantages: &[f64], t: u64, kind: Bootstrap) -> Result<Vec<f64>> {
    if t < 1 {
        return Err(Error::InvalidIteration(t));
    }
    if prev.len() != advantages.len() {
        return Err(Error::DimensionMismatch {
            expected: prev.len(),
            got: advantages.len(),
        });
    }
    let carry = |p: f64| match kind {
        Bootstrap::DiscountClip { alpha } => p.max(0.0) * discount((t - 1) as f64, alpha),
        Bootstrap::Plain => p,
        Bootstrap::Linear => p * (t - 1) as f64 / t as f64,
    };
    Ok(prev.iter().zip(advantages).map(|(&p, &r)| carry(p) + r).collect())
}

/// One-step value target; `successor` is `sum_a sigma(I', a) Q(h', a)` at a
/// non-terminal successor.
pub fn make_target_q(reward: f64, successor: Option<f64>) -> f64 {
    reward + successor.unwrap_or(0.0)
}

/// `(t / T)^gamma`.
pub fn strategy_loss_weight(t: u64, total: u64, gamma: f64) -> Result<f64> {
    if t < 1 || t > total {
        return Err(Error::InvalidIteration(t));
    }
    Ok((t as f64 / total as f64).powf(gamma))
}
