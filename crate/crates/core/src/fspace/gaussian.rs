use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::FspaceError;

/// A normal distribution with diagonal covariance, stored as means and
/// log-variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagGaussian {
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mu: Vec<f64>, log_var: Vec<f64>) -> Result<Self, FspaceError> {
        if mu.len() != log_var.len() {
            return Err(FspaceError::DimMismatch(mu.len(), log_var.len()));
        }
        if mu.iter().chain(&log_var).any(|x| !x.is_finite()) {
            return Err(FspaceError::NonFinite);
        }
        Ok(DiagGaussian { mu, log_var })
    }

    pub fn standard(dim: usize) -> Self {
        DiagGaussian {
            mu: vec![0.0; dim],
            log_var: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn var(&self, i: usize) -> f64 {
        self.log_var[i].exp()
    }

    /// `[mu, log_var]` concatenated.
    pub fn packed(&self) -> Vec<f64> {
        let mut z = self.mu.clone();
        z.extend_from_slice(&self.log_var);
        z
    }

    pub fn unpack(z: &[f64]) -> Self {
        let d = z.len() / 2;
        DiagGaussian {
            mu: z[..d].to_vec(),
            log_var: z[d..].to_vec(),
        }
    }
}

/// Normalized product of two Gaussians. The unnormalized product equals
/// `exp(log_alpha)` times the returned density.
pub fn gaussian_product_exact(a: &DiagGaussian, b: &DiagGaussian) -> Result<(DiagGaussian, f64), FspaceError> {
    if a.dim() != b.dim() {
        return Err(FspaceError::DimMismatch(a.dim(), b.dim()));
    }
    let d = a.dim();
    let mut mu = Vec::with_capacity(d);
    let mut log_var = Vec::with_capacity(d);
    let mut log_alpha = 0.0;
    for i in 0..d {
        let (va, vb) = (a.var(i), b.var(i));
        let s = va + vb;
        mu.push((b.mu[i] * va + a.mu[i] * vb) / s);
        // log(va*vb/s)
        log_var.push(a.log_var[i] + b.log_var[i] - s.ln());
        let diff = a.mu[i] - b.mu[i];
        log_alpha += -0.5 * (2.0 * PI * s).ln() - diff * diff / (2.0 * s);
    }
    Ok((DiagGaussian { mu, log_var }, log_alpha))
}

/// Differential entropy in nats.
pub fn entropy(g: &DiagGaussian) -> f64 {
    let d = g.dim() as f64;
    0.5 * g.log_var.iter().sum::<f64>() + 0.5 * d * (1.0 + (2.0 * PI).ln())
}

pub fn log_density(g: &DiagGaussian, v: &[f64]) -> Result<f64, FspaceError> {
    if v.len() != g.dim() {
        return Err(FspaceError::DimMismatch(g.dim(), v.len()));
    }
    Ok(log_density_unchecked(g, v))
}

pub(crate) fn log_density_unchecked(g: &DiagGaussian, v: &[f64]) -> f64 {
    let ln2pi = (2.0 * PI).ln();
    g.mu.iter()
        .zip(&g.log_var)
        .zip(v)
        .map(|((m, lv), x)| {
            let d = x - m;
            -0.5 * (ln2pi + lv) - 0.5 * d * d * (-lv).exp()
        })
        .sum()
}

/// `Σ w_i [mu_i, log_var_i]` for weights summing to one.
pub fn weighted_combination(gs: &[DiagGaussian], weights: &[f64]) -> Result<DiagGaussian, FspaceError> {
    let first = gs.first().ok_or(FspaceError::Empty)?;
    let d = first.dim();
    if gs.len() != weights.len() {
        return Err(FspaceError::DimMismatch(gs.len(), weights.len()));
    }
    let mut mu = vec![0.0; d];
    let mut log_var = vec![0.0; d];
    for (g, &w) in gs.iter().zip(weights) {
        if g.dim() != d {
            return Err(FspaceError::DimMismatch(d, g.dim()));
        }
        for i in 0..d {
            mu[i] += w * g.mu[i];
            log_var[i] += w * g.log_var[i];
        }
    }
    Ok(DiagGaussian { mu, log_var })
}

/// Numerically stable softmax.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g1(mu: f64, var: f64) -> DiagGaussian {
        DiagGaussian::new(vec![mu], vec![var.ln()]).unwrap()
    }

    #[test]
    fn symmetric_product() {
        let (p, _) = gaussian_product_exact(&g1(0.0, 1.0), &g1(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(p.mu[0], 0.0);
        assert_abs_diff_eq!(p.var(0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn shifted_product() {
        let (p, la) = gaussian_product_exact(&g1(0.0, 1.0), &g1(2.0, 1.0)).unwrap();
        assert_abs_diff_eq!(p.mu[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.var(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(la, -0.5 * (4.0 * PI).ln() - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn broad_factor_is_uninformative() {
        let (p, _) = gaussian_product_exact(&g1(0.7, 0.3), &g1(-5.0, 1e12)).unwrap();
        assert_abs_diff_eq!(p.mu[0], 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(p.var(0), 0.3, epsilon = 1e-9);
    }

    #[test]
    fn entropy_values() {
        assert_abs_diff_eq!(entropy(&g1(0.0, 1.0)), 1.4189385332046727, epsilon = 1e-12);
        let g = DiagGaussian::new(vec![0.0; 3], vec![0.2, -1.0, 0.5]).unwrap();
        let h = DiagGaussian::new(vec![0.0; 3], g.log_var.iter().map(|l| l - 2f64.ln()).collect()).unwrap();
        assert_abs_diff_eq!(entropy(&g) - entropy(&h), 1.5 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn log_density_peak_and_decay() {
        let g = g1(0.0, 1.0);
        assert_abs_diff_eq!(log_density(&g, &[0.0]).unwrap(), -0.5 * (2.0 * PI).ln(), epsilon = 1e-15);
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let v = log_density(&g, &[k as f64 * 0.5]).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(log_density(&g, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn errors() {
        assert!(DiagGaussian::new(vec![0.0], vec![]).is_err());
        assert!(DiagGaussian::new(vec![f64::NAN], vec![0.0]).is_err());
        assert!(gaussian_product_exact(&g1(0.0, 1.0), &DiagGaussian::standard(2)).is_err());
        assert!(weighted_combination(&[], &[]).is_err());
    }
}
