use rand::Rng;
use serde::{Deserialize, Serialize};

/// Layout of a two-layer perceptron `W2 tanh(W1 x + b1) + b2` whose
/// parameters live in a caller-owned flat slice, in the order W1, b1, W2, b2
/// (weights row-major).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct MlpCache {
    pub hidden: Vec<f64>,
    pub out: Vec<f64>,
}

impl MlpShape {
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize) -> Self {
        MlpShape { n_in, n_hidden, n_out }
    }

    pub fn param_count(&self) -> usize {
        self.n_hidden * (self.n_in + 1) + self.n_out * (self.n_hidden + 1)
    }

    fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let (w1, rest) = p.split_at(self.n_hidden * self.n_in);
        let (b1, rest) = rest.split_at(self.n_hidden);
        let (w2, b2) = rest.split_at(self.n_out * self.n_hidden);
        (w1, b1, w2, &b2[..self.n_out])
    }

    /// Uniform init with bound `sqrt(3 / fan_in)`, output layer scaled by
    /// `out_scale`; biases start at zero.
    pub fn init<R: Rng + ?Sized>(&self, out_scale: f64, rng: &mut R) -> Vec<f64> {
        let mut p = vec![0.0; self.param_count()];
        let b1 = (3.0 / self.n_in.max(1) as f64).sqrt();
        let b2 = out_scale * (3.0 / self.n_hidden.max(1) as f64).sqrt();
        let n_w1 = self.n_hidden * self.n_in;
        for w in &mut p[..n_w1] {
            *w = rng.gen_range(-b1..=b1);
        }
        let w2_start = n_w1 + self.n_hidden;
        for w in &mut p[w2_start..w2_start + self.n_out * self.n_hidden] {
            *w = rng.gen_range(-b2..=b2);
        }
        p
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> MlpCache {
        debug_assert_eq!(x.len(), self.n_in);
        let (w1, b1, w2, b2) = self.split(p);
        let hidden: Vec<f64> = (0..self.n_hidden)
            .map(|h| {
                let row = &w1[h * self.n_in..(h + 1) * self.n_in];
                (b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()).tanh()
            })
            .collect();
        let out = (0..self.n_out)
            .map(|o| {
                let row = &w2[o * self.n_hidden..(o + 1) * self.n_hidden];
                b2[o] + row.iter().zip(&hidden).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect();
        MlpCache { hidden, out }
    }

    /// Accumulate `d loss / d params` into `grad` given `d_out`, and return
    /// `d loss / d x`.
    pub fn backward(&self, p: &[f64], x: &[f64], cache: &MlpCache, d_out: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let (w1, _, w2, _) = self.split(p);
        let n_w1 = self.n_hidden * self.n_in;
        let w2_start = n_w1 + self.n_hidden;
        let b2_start = w2_start + self.n_out * self.n_hidden;
        let mut d_hidden = vec![0.0; self.n_hidden];
        for o in 0..self.n_out {
            let g = d_out[o];
            if g == 0.0 {
                continue;
            }
            grad[b2_start + o] += g;
            for h in 0..self.n_hidden {
                grad[w2_start + o * self.n_hidden + h] += g * cache.hidden[h];
                d_hidden[h] += g * w2[o * self.n_hidden + h];
            }
        }
        let mut d_x = vec![0.0; self.n_in];
        for h in 0..self.n_hidden {
            let a = cache.hidden[h];
            let dz = d_hidden[h] * (1.0 - a * a);
            if dz == 0.0 {
                continue;
            }
            grad[n_w1 + h] += dz;
            for i in 0..self.n_in {
                grad[h * self.n_in + i] += dz * x[i];
                d_x[i] += dz * w1[h * self.n_in + i];
            }
        }
        d_x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = MlpShape::new(3, 5, 2);
        let p = s.init(1.0, &mut rng);
        let x = vec![0.3, -0.7, 1.1];
        let w = [0.5, -2.0];
        let f = |p: &[f64], x: &[f64]| -> f64 { s.forward(p, x).out.iter().zip(&w).map(|(a, b)| a * b).sum() };
        let cache = s.forward(&p, &x);
        let mut grad = vec![0.0; s.param_count()];
        let dx = s.backward(&p, &x, &cache, &w, &mut grad);
        let h = 1e-6;
        for k in 0..p.len() {
            let mut a = p.clone();
            let mut b = p.clone();
            a[k] += h;
            b[k] -= h;
            let fd = (f(&a, &x) - f(&b, &x)) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-7, "param {k}: {fd} vs {}", grad[k]);
        }
        for i in 0..3 {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (f(&p, &a) - f(&p, &b)) / (2.0 * h);
            assert!((fd - dx[i]).abs() < 1e-7);
        }
    }
}
