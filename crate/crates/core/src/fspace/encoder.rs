use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gaussian::{softmax, weighted_combination, DiagGaussian};
use super::infonce::{infonce_grad, infonce_loss, InfoNce};
use super::mlp::{MlpCache, MlpShape};
use super::FspaceError;

/// Log-variances pass through `LV_BOUND * tanh(raw / LV_BOUND)`.
pub const LV_BOUND: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// F-space dimension.
    pub dim: usize,
    pub hidden: usize,
    pub attention_hidden: usize,
    /// Hash buckets for program tokens; half unigrams, half token-position pairs.
    pub program_buckets: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            dim: 32,
            hidden: 32,
            attention_hidden: 16,
            program_buckets: 64,
        }
    }
}

/// Parameters of the example encoder, the attention scorer and the program
/// encoder, stored as one flat vector in that order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub dim: usize,
    pub example: MlpShape,
    pub attention: MlpShape,
    pub program: MlpShape,
    pub values: Vec<f64>,
}

fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Hashed bag of tokens plus token-position pairs, normalized by length.
pub fn program_features(tokens: &[String], buckets: usize) -> Vec<f64> {
    let half = (buckets / 2).max(1);
    let mut f = vec![0.0; buckets.max(2)];
    let n = tokens.len().max(1) as f64;
    for (pos, t) in tokens.iter().enumerate() {
        f[(fnv1a(t.as_bytes(), 0) % half as u64) as usize] += 1.0 / n.sqrt();
        let key = format!("{t}@{pos}");
        f[half + (fnv1a(key.as_bytes(), 1) % half as u64) as usize] += 1.0;
    }
    f
}

fn soft_clamp(raw: f64) -> (f64, f64) {
    let t = (raw / LV_BOUND).tanh();
    (LV_BOUND * t, 1.0 - t * t)
}

/// Cached forward pass for one example.
pub(crate) struct ExampleTrace {
    cache: MlpCache,
    /// Derivative of the output squashing, means first then log-variances.
    slope: Vec<f64>,
    pub(crate) gaussian: DiagGaussian,
}

impl EncoderParams {
    pub fn init<R: Rng + ?Sized>(feature_dim: usize, cfg: EncoderConfig, rng: &mut R) -> Self {
        let d = cfg.dim;
        let example = MlpShape::new(feature_dim, cfg.hidden, 2 * d);
        let attention = MlpShape::new(2 * d, cfg.attention_hidden, 1);
        let program = MlpShape::new(cfg.program_buckets.max(2), cfg.hidden, d);
        let mut values = example.init(0.1, rng);
        values.extend(attention.init(1.0, rng));
        values.extend(program.init(0.5, rng));
        EncoderParams {
            dim: d,
            example,
            attention,
            program,
            values,
        }
    }

    fn ranges(&self) -> [std::ops::Range<usize>; 3] {
        let a = self.example.param_count();
        let b = a + self.attention.param_count();
        let c = b + self.program.param_count();
        [0..a, a..b, b..c]
    }

    pub fn param_count(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn trace_example(&self, features: &[f64]) -> ExampleTrace {
        let [r, _, _] = self.ranges();
        let cache = self.example.forward(&self.values[r], features);
        let d = self.dim;
        let mu = cache.out[..d].to_vec();
        let mut slope = vec![1.0; d];
        let (log_var, lv_slope): (Vec<f64>, Vec<f64>) = cache.out[d..].iter().map(|&x| soft_clamp(x)).unzip();
        slope.extend(lv_slope);
        ExampleTrace {
            cache,
            slope,
            gaussian: DiagGaussian { mu, log_var },
        }
    }

    pub fn encode_example(&self, features: &[f64]) -> Result<DiagGaussian, FspaceError> {
        if features.len() != self.example.n_in {
            return Err(FspaceError::DimMismatch(self.example.n_in, features.len()));
        }
        Ok(self.trace_example(features).gaussian)
    }

    pub fn attention_score(&self, g: &DiagGaussian) -> f64 {
        let [_, r, _] = self.ranges();
        self.attention.forward(&self.values[r], &g.packed()).out[0]
    }

    /// Attention weights over `gs`; they are non-negative and sum to one.
    pub fn attention_weights(&self, gs: &[DiagGaussian]) -> Vec<f64> {
        softmax(&gs.iter().map(|g| self.attention_score(g)).collect::<Vec<_>>())
    }

    pub fn intersect_attention(&self, gs: &[DiagGaussian]) -> Result<DiagGaussian, FspaceError> {
        if gs.is_empty() {
            return Err(FspaceError::Empty);
        }
        weighted_combination(gs, &self.attention_weights(gs))
    }

    pub fn encode_program(&self, tokens: &[String]) -> Vec<f64> {
        let [_, _, r] = self.ranges();
        self.program
            .forward(&self.values[r], &program_features(tokens, self.program.n_in))
            .out
    }

    /// Intersected Gaussian of an example set given as feature vectors.
    pub fn encode_set(&self, examples: &[Vec<f64>]) -> Result<DiagGaussian, FspaceError> {
        let gs = examples
            .iter()
            .map(|f| self.encode_example(f))
            .collect::<Result<Vec<_>, _>>()?;
        self.intersect_attention(&gs)
    }

    /// InfoNCE loss of a batch: `sets[i]` holds the example features of task
    /// `i` and `programs[i]` the hashed features of its program.
    pub fn batch_loss(&self, sets: &[Vec<Vec<f64>>], programs: &[Vec<f64>]) -> Result<InfoNce, FspaceError> {
        let gs = sets
            .iter()
            .map(|s| self.encode_set(s))
            .collect::<Result<Vec<_>, _>>()?;
        let [_, _, r] = self.ranges();
        let vs: Vec<Vec<f64>> = programs
            .iter()
            .map(|p| self.program.forward(&self.values[r.clone()], p).out)
            .collect();
        infonce_loss(&gs, &vs)
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn batch_loss_grad(
        &self,
        sets: &[Vec<Vec<f64>>],
        programs: &[Vec<f64>],
    ) -> Result<(InfoNce, Vec<f64>), FspaceError> {
        let [re, ra, rp] = self.ranges();
        let mut grad = vec![0.0; self.values.len()];
        let mut traces = Vec::with_capacity(sets.len());
        let mut gs = Vec::with_capacity(sets.len());
        for set in sets {
            if set.is_empty() {
                return Err(FspaceError::Empty);
            }
            let ex: Vec<ExampleTrace> = set.iter().map(|f| self.trace_example(f)).collect();
            let zs: Vec<Vec<f64>> = ex.iter().map(|t| t.gaussian.packed()).collect();
            let att: Vec<MlpCache> = zs
                .iter()
                .map(|z| self.attention.forward(&self.values[ra.clone()], z))
                .collect();
            let w = softmax(&att.iter().map(|c| c.out[0]).collect::<Vec<_>>());
            let gaussians: Vec<DiagGaussian> = ex.iter().map(|t| t.gaussian.clone()).collect();
            gs.push(weighted_combination(&gaussians, &w)?);
            traces.push((ex, zs, att, w));
        }
        let pcache: Vec<MlpCache> = programs
            .iter()
            .map(|p| self.program.forward(&self.values[rp.clone()], p))
            .collect();
        let vs: Vec<Vec<f64>> = pcache.iter().map(|c| c.out.clone()).collect();
        let (value, dg, dv) = infonce_grad(&gs, &vs)?;

        for (j, (p, c)) in programs.iter().zip(&pcache).enumerate() {
            self.program
                .backward(&self.values[rp.clone()], p, c, &dv[j], &mut grad[rp.clone()]);
        }
        for (i, (ex, zs, att, w)) in traces.iter().enumerate() {
            let mut dz_g = dg[i].mu.clone();
            dz_g.extend_from_slice(&dg[i].log_var);
            let g = gs[i].packed();
            for k in 0..ex.len() {
                let dot: f64 = dz_g.iter().zip(zs[k].iter().zip(&g)).map(|(a, (z, m))| a * (z - m)).sum();
                let ds = w[k] * dot;
                let mut dz: Vec<f64> = dz_g.iter().map(|x| w[k] * x).collect();
                let back = self
                    .attention
                    .backward(&self.values[ra.clone()], &zs[k], &att[k], &[ds], &mut grad[ra.clone()]);
                for (a, b) in dz.iter_mut().zip(back) {
                    *a += b;
                }
                for (a, s) in dz.iter_mut().zip(&ex[k].slope) {
                    *a *= s;
                }
                self.example
                    .backward(&self.values[re.clone()], &sets[i][k], &ex[k].cache, &dz, &mut grad[re.clone()]);
            }
        }
        Ok((value, grad))
    }

    /// Text checkpoint: a shape manifest followed by one value per line.
    pub fn to_checkpoint(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}", self.dim);
        for (name, m) in [("example", self.example), ("attention", self.attention), ("program", self.program)] {
            let _ = writeln!(s, "{name} {} {} {}", m.n_in, m.n_hidden, m.n_out);
        }
        let _ = writeln!(s, "values {}", self.values.len());
        for v in &self.values {
            let _ = writeln!(s, "{v:e}");
        }
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, FspaceError> {
        let bad = |m: &str| FspaceError::Checkpoint(m.to_string());
        let mut lines = text.lines();
        let mut field = |name: &str| -> Result<Vec<usize>, FspaceError> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(bad(&format!("expected {name}")));
            }
            parts
                .map(|p| p.parse().map_err(|_| bad(&format!("bad number in {name}"))))
                .collect()
        };
        let dim = *field("dim")?.first().ok_or_else(|| bad("dim"))?;
        let mut shape = |name: &str| -> Result<MlpShape, FspaceError> {
            match field(name)?.as_slice() {
                [a, b, c] => Ok(MlpShape::new(*a, *b, *c)),
                _ => Err(bad(&format!("{name} needs three sizes"))),
            }
        };
        let example = shape("example")?;
        let attention = shape("attention")?;
        let program = shape("program")?;
        let n = *field("values")?.first().ok_or_else(|| bad("values"))?;
        let values = lines
            .map(|l| l.trim().parse::<f64>().map_err(|_| bad("bad value")))
            .collect::<Result<Vec<_>, _>>()?;
        let expected = example.param_count() + attention.param_count() + program.param_count();
        if values.len() != n || n != expected {
            return Err(bad(&format!("expected {expected} values, found {}", values.len())));
        }
        if example.n_out != 2 * dim || attention.n_in != 2 * dim || attention.n_out != 1 || program.n_out != dim {
            return Err(bad("inconsistent shapes"));
        }
        Ok(EncoderParams {
            dim,
            example,
            attention,
            program,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(rng: &mut ChaCha8Rng) -> EncoderParams {
        let cfg = EncoderConfig {
            dim: 4,
            hidden: 6,
            attention_hidden: 5,
            program_buckets: 8,
        };
        EncoderParams::init(5, cfg, rng)
    }

    #[test]
    fn single_and_repeated_gaussians() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = small(&mut rng);
        let g = p.encode_example(&[0.1, 0.2, -0.3, 0.0, 1.0]).unwrap();
        let one = p.intersect_attention(std::slice::from_ref(&g)).unwrap();
        assert_eq!(one, g);
        let many = p.intersect_attention(&vec![g.clone(); 5]).unwrap();
        for (a, b) in many.mu.iter().zip(&g.mu) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(p.intersect_attention(&[]).is_err());
    }

    #[test]
    fn attention_mean_lies_between_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = small(&mut rng);
        let a = p.encode_example(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let b = p.encode_example(&[0.0, -1.0, 2.0, 0.0, 0.5]).unwrap();
        let w = p.attention_weights(&[a.clone(), b.clone()]);
        assert!(w.iter().all(|&x| x >= 0.0));
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        let m = p.intersect_attention(&[a.clone(), b.clone()]).unwrap();
        for i in 0..4 {
            let (lo, hi) = (a.mu[i].min(b.mu[i]), a.mu[i].max(b.mu[i]));
            assert!(m.mu[i] >= lo - 1e-12 && m.mu[i] <= hi + 1e-12);
        }
    }

    #[test]
    fn init_is_deterministic_and_near_unit_variance() {
        let p = EncoderParams::init(63, EncoderConfig::default(), &mut ChaCha8Rng::seed_from_u64(3));
        let q = EncoderParams::init(63, EncoderConfig::default(), &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(p, q);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let f: Vec<f64> = (0..63).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = p.encode_example(&f).unwrap();
            assert_eq!(g.dim(), 32);
            assert!(g.log_var.iter().all(|lv| lv.abs() < 0.5));
        }
        let v = p.encode_program(&["MAP".to_string(), "(+1)".to_string()]);
        assert_eq!(v.len(), 32);
        assert!(p.encode_example(&[0.0; 3]).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let p = small(&mut ChaCha8Rng::seed_from_u64(5));
        let q = EncoderParams::from_checkpoint(&p.to_checkpoint()).unwrap();
        assert_eq!(p, q);
        let mut text = p.to_checkpoint();
        text.push_str("1.0\n");
        assert!(EncoderParams::from_checkpoint(&text).is_err());
    }
}
