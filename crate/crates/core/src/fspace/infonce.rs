use serde::{Deserialize, Serialize};

use super::gaussian::{log_density_unchecked, log_sum_exp, softmax, DiagGaussian};
use super::FspaceError;

/// InfoNCE loss over a batch whose `i`-th Gaussian and `i`-th embedding are
/// the positive pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoNce {
    pub loss: f64,
    pub n: usize,
}

impl InfoNce {
    /// `ln N - loss`. Negative whenever the positives score below the
    /// average negative.
    pub fn raw_bound(&self) -> f64 {
        (self.n as f64).ln() - self.loss
    }

    /// The mutual-information lower bound `max(0, ln N - loss)`.
    pub fn mi_lower_bound(&self) -> f64 {
        self.raw_bound().max(0.0)
    }
}

/// Gradient of the loss with respect to one Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianGrad {
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
}

fn check(gs: &[DiagGaussian], vs: &[Vec<f64>]) -> Result<(), FspaceError> {
    if gs.is_empty() {
        return Err(FspaceError::Empty);
    }
    if gs.len() != vs.len() {
        return Err(FspaceError::BatchMismatch(gs.len(), vs.len()));
    }
    let d = gs[0].dim();
    for g in gs {
        if g.dim() != d {
            return Err(FspaceError::DimMismatch(d, g.dim()));
        }
    }
    for v in vs {
        if v.len() != d {
            return Err(FspaceError::DimMismatch(d, v.len()));
        }
    }
    Ok(())
}

/// `logits[i][j] = log_density(gs[i], vs[j])`.
pub fn logits(gs: &[DiagGaussian], vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    gs.iter()
        .map(|g| vs.iter().map(|v| log_density_unchecked(g, v)).collect())
        .collect()
}

pub fn infonce_loss(gs: &[DiagGaussian], vs: &[Vec<f64>]) -> Result<InfoNce, FspaceError> {
    check(gs, vs)?;
    let l = logits(gs, vs);
    let n = gs.len();
    let loss = if n == 1 {
        0.0
    } else {
        l.iter()
            .enumerate()
            .map(|(i, row)| log_sum_exp(row) - row[i])
            .sum::<f64>()
            / n as f64
    };
    Ok(InfoNce { loss, n })
}

/// Loss plus gradients with respect to every Gaussian and embedding.
pub fn infonce_grad(
    gs: &[DiagGaussian],
    vs: &[Vec<f64>],
) -> Result<(InfoNce, Vec<GaussianGrad>, Vec<Vec<f64>>), FspaceError> {
    let value = infonce_loss(gs, vs)?;
    let n = gs.len();
    let d = gs[0].dim();
    let mut dg: Vec<GaussianGrad> = (0..n)
        .map(|_| GaussianGrad {
            mu: vec![0.0; d],
            log_var: vec![0.0; d],
        })
        .collect();
    let mut dv = vec![vec![0.0; d]; n];
    if n == 1 {
        return Ok((value, dg, dv));
    }
    let l = logits(gs, vs);
    for (i, g) in gs.iter().enumerate() {
        let p = softmax(&l[i]);
        for (j, v) in vs.iter().enumerate() {
            let coef = (p[j] - f64::from(u8::from(i == j))) / n as f64;
            if coef == 0.0 {
                continue;
            }
            for k in 0..d {
                let inv = (-g.log_var[k]).exp();
                let diff = v[k] - g.mu[k];
                dg[i].mu[k] += coef * diff * inv;
                dg[i].log_var[k] += coef * (-0.5 + 0.5 * diff * diff * inv);
                dv[j][k] -= coef * diff * inv;
            }
        }
    }
    Ok((value, dg, dv))
}
