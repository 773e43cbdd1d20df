//! Per-token training losses on raw logits.
//!
//! Every loss is evaluated in log space from the logits `z` of one token, with
//! `f = softmax(z)`. Gradients are taken with respect to `z`.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// `-ln(1e-12)`: the largest value a single log term may contribute.
pub const LOG_CLAMP: f64 = 27.631021115928547;

/// What one token is trained towards.
#[derive(Clone, Debug, PartialEq)]
pub enum TokenTarget {
    /// Cross-entropy against one tag.
    Hard(usize),
    /// Partial-label likelihood `-log <f, g>`.
    Partial(Vec<f64>),
    /// `KL(g || f)`.
    Distill(Vec<f64>),
    /// Independent sigmoid scores; `(tag, target)` pairs, unlisted tags add nothing.
    Sigmoid(Vec<(usize, f64)>),
}

/// Summed loss over a sequence and its gradient with respect to the logits.
#[derive(Clone, Debug)]
pub struct LossOutput {
    pub loss: f64,
    pub grad: Array2<f64>,
    /// Log terms that hit the underflow clamp.
    pub clamped: usize,
}

pub(crate) fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

fn softmax_into(z: &[f64], lse: f64, out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - lse).exp();
    }
}

fn clamp(value: f64, clamped: &mut usize) -> f64 {
    if value > LOG_CLAMP {
        *clamped += 1;
        LOG_CLAMP
    } else {
        value
    }
}

/// Loss of one token; writes `dL/dz` into `grad`.
pub fn token_loss(target: &TokenTarget, z: &[f64], grad: &mut [f64], clamped: &mut usize) -> Result<f64> {
    if z.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::NonFinite("logits"));
    }
    let k = z.len();
    if let TokenTarget::Sigmoid(pairs) = target {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for &(t, y) in pairs {
            let v = z[t];
            // softplus(v) - y v, stable for large |v|
            loss += v.max(0.0) - y * v + (-v.abs()).exp().ln_1p();
            grad[t] = 1.0 / (1.0 + (-v).exp()) - y;
        }
        return Ok(loss);
    }
    let lse = log_sum_exp(z);
    softmax_into(z, lse, grad);
    let loss = match target {
        TokenTarget::Hard(t) => {
            grad[*t] -= 1.0;
            clamp(lse - z[*t], clamped)
        }
        TokenTarget::Partial(g) => {
            debug_assert_eq!(g.len(), k);
            // log <f, g> = lse(z + ln g) - lse(z)
            let shifted: Vec<f64> = z
                .iter()
                .zip(g)
                .map(|(&v, &p)| if p > 0.0 { v + p.ln() } else { f64::NEG_INFINITY })
                .collect();
            let lse_g = log_sum_exp(&shifted);
            if lse_g == f64::NEG_INFINITY {
                let mass: f64 = g.iter().filter(|&&p| p > 0.0).sum();
                if mass == 0.0 {
                    return Err(Error::EmptyAllowedSet);
                }
                // f vanishes on the whole support of g: pull towards g
                for (gr, &p) in grad.iter_mut().zip(g) {
                    *gr -= p.max(0.0) / mass;
                }
                *clamped += 1;
                return Ok(LOG_CLAMP);
            }
            // dL/dz = f - q with q proportional to f * g
            for (gr, &s) in grad.iter_mut().zip(&shifted) {
                *gr -= (s - lse_g).exp();
            }
            clamp(lse - lse_g, clamped)
        }
        TokenTarget::Distill(g) => {
            debug_assert_eq!(g.len(), k);
            let mut loss = 0.0;
            for ((gr, &v), &p) in grad.iter_mut().zip(z).zip(g) {
                *gr -= p;
                if p > 0.0 {
                    loss += p * (p.ln() + clamp(lse - v, clamped));
                }
            }
            loss.max(0.0)
        }
        TokenTarget::Sigmoid(_) => unreachable!(),
    };
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    Ok(loss)
}

/// Sums [`token_loss`] over the rows of `logits`.
pub fn sequence_loss(logits: ArrayView2<f64>, targets: &[TokenTarget]) -> Result<LossOutput> {
    assert_eq!(logits.nrows(), targets.len(), "one target per token");
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    let mut clamped = 0;
    let mut z = vec![0.0; logits.ncols()];
    for (i, target) in targets.iter().enumerate() {
        for (dst, src) in z.iter_mut().zip(logits.row(i)) {
            *dst = *src;
        }
        let mut row = grad.row_mut(i);
        let g = row.as_slice_mut().expect("standard layout");
        loss += token_loss(target, &z, g, &mut clamped)?;
    }
    if clamped > 0 {
        log::warn!("{clamped} log terms clamped at 1e-12");
    }
    Ok(LossOutput { loss, grad, clamped })
}

/// Probability-space partial-label loss `-log <f, g>` of a single token, for
/// checking against the logit-space kernel.
pub fn plm_term(f: &[f64], g: &[f64]) -> f64 {
    let dot: f64 = f.iter().zip(g).map(|(a, b)| a * b).sum();
    -dot.max(1e-12).ln()
}

/// Probability-space `KL(g || f)` of a single token; `0 log 0` counts as 0.
pub fn kl_term(f: &[f64], g: &[f64]) -> f64 {
    f.iter()
        .zip(g)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&q, &p)| p * (p.ln() - q.max(1e-12).ln()))
        .sum()
}

/// Probability-space soft cross-entropy `<-log f, g>`.
pub fn soft_ce_term(f: &[f64], g: &[f64]) -> f64 {
    f.iter()
        .zip(g)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&q, &p)| -p * q.max(1e-12).ln())
        .sum()
}
