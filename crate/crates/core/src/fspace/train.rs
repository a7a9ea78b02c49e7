use std::collections::HashMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::encoder::{program_features, EncoderParams};
use super::gaussian::{entropy, log_density, softmax, DiagGaussian};
use super::FspaceError;
use crate::domain::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    /// Query steps per episode.
    pub steps: usize,
    /// Candidate inputs scored per query.
    pub candidates: usize,
    pub learning_rate: f64,
    /// Gradients are rescaled to at most this norm.
    pub clip: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 400,
            steps: 3,
            candidates: 4,
            learning_rate: 0.05,
            clip: 5.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Loss summed over query steps and divided by the step count, per iteration.
    pub loss_history: Vec<f64>,
    /// Per-iteration, per-step losses.
    pub step_losses: Vec<Vec<f64>>,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,step,loss\n");
        for (i, steps) in self.step_losses.iter().enumerate() {
            for (t, l) in steps.iter().enumerate() {
                s.push_str(&format!("{i},{},{l}\n", t + 1));
            }
        }
        s
    }
}

/// A committee member: a program with its embedding.
pub struct Member<'a, P> {
    pub program: &'a P,
    pub embedding: Vec<f64>,
}

pub fn embed_committee<'a, D: Domain>(
    params: &EncoderParams,
    domain: &D,
    programs: &'a [D::Program],
) -> Vec<Member<'a, D::Program>> {
    programs
        .iter()
        .map(|p| Member {
            program: p,
            embedding: params.encode_program(&domain.program_tokens(p)),
        })
        .collect()
}

/// Expected entropy reduction of the intersected Gaussian from querying `x`.
/// Committee members are weighted by the density the current Gaussian gives
/// their embeddings; responses that are not evidence leave the Gaussian
/// unchanged.
pub fn expected_entropy_reduction<D: Domain>(
    params: &EncoderParams,
    domain: &D,
    history: &[DiagGaussian],
    committee: &[Member<'_, D::Program>],
    x: &D::Input,
) -> Result<f64, FspaceError> {
    let current = params.intersect_attention(history)?;
    let h0 = entropy(&current);
    if committee.is_empty() {
        return Ok(0.0);
    }
    let logits = committee
        .iter()
        .map(|m| log_density(&current, &m.embedding))
        .collect::<Result<Vec<_>, _>>()?;
    let weights = softmax(&logits);
    let mut groups: HashMap<D::Output, f64> = HashMap::new();
    let mut order = Vec::new();
    for (m, w) in committee.iter().zip(&weights) {
        let y = domain.respond(m.program, x);
        let slot = groups.entry(y.clone()).or_insert_with(|| {
            order.push(y);
            0.0
        });
        *slot += w;
    }
    let mut expected = 0.0;
    for y in order {
        let p = groups[&y];
        let h = if domain.is_evidence(&y) {
            let mut set = history.to_vec();
            set.push(params.encode_example(&domain.features(x, &y))?);
            entropy(&params.intersect_attention(&set)?)
        } else {
            h0
        };
        expected += p * h;
    }
    Ok(h0 - expected)
}

/// Index of the best-scoring candidate, ties broken by serialized input.
pub fn best_candidate<D: Domain>(
    params: &EncoderParams,
    domain: &D,
    history: &[DiagGaussian],
    committee: &[Member<'_, D::Program>],
    candidates: &[D::Input],
) -> Result<(usize, f64), FspaceError> {
    let mut best: Option<(usize, f64, String)> = None;
    for (i, x) in candidates.iter().enumerate() {
        let s = expected_entropy_reduction(params, domain, history, committee, x)?;
        let key = domain.encode_input(x);
        let better = match &best {
            None => true,
            Some((_, bs, bk)) => s > *bs || (s == *bs && key < *bk),
        };
        if better {
            best = Some((i, s, key));
        }
    }
    best.map(|(i, s, _)| (i, s)).ok_or(FspaceError::Empty)
}

/// Central-difference check of `batch_loss_grad`. Returns
/// `|g_analytic - g_numeric| / max(|g_analytic|, |g_numeric|)`.
pub fn gradient_check(
    params: &EncoderParams,
    sets: &[Vec<Vec<f64>>],
    programs: &[Vec<f64>],
    h: f64,
) -> Result<f64, FspaceError> {
    let (_, analytic) = params.batch_loss_grad(sets, programs)?;
    let mut p = params.clone();
    let mut numeric = vec![0.0; analytic.len()];
    for k in 0..analytic.len() {
        let orig = p.values[k];
        p.values[k] = orig + h;
        let up = p.batch_loss(sets, programs)?.loss;
        p.values[k] = orig - h;
        let down = p.batch_loss(sets, programs)?.loss;
        p.values[k] = orig;
        numeric[k] = (up - down) / (2.0 * h);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    let scale = norm(&analytic).max(norm(&numeric)).max(1e-12);
    Ok(norm(&diff) / scale)
}

struct Episode<'a, D: Domain> {
    program: &'a D::Program,
    gaussians: Vec<DiagGaussian>,
    features: Vec<Vec<f64>>,
}

/// One query step for every episode: score candidates, query the episode's
/// own program, append the example.
fn advance<D: Domain>(
    params: &EncoderParams,
    domain: &D,
    committee: &[Member<'_, D::Program>],
    episodes: &mut [Episode<'_, D>],
    candidates: usize,
    rng: &mut dyn RngCore,
) -> Result<(), FspaceError> {
    for ep in episodes.iter_mut() {
        let pool: Vec<D::Input> = (0..candidates.max(1))
            .map(|_| domain.sample_input(ep.program, rng))
            .collect();
        let (i, _) = best_candidate(params, domain, &ep.gaussians, committee, &pool)?;
        let x = &pool[i];
        let y = domain.respond(ep.program, x);
        let f = domain.features(x, &y);
        ep.gaussians.push(params.encode_example(&f)?);
        ep.features.push(f);
    }
    Ok(())
}

fn start_episodes<'a, D: Domain>(
    params: &EncoderParams,
    domain: &D,
    programs: &'a [D::Program],
) -> Result<Vec<Episode<'a, D>>, FspaceError> {
    programs
        .iter()
        .map(|p| {
            let (x, y) = domain.start_signal(p);
            let f = domain.features(&x, &y);
            Ok(Episode {
                program: p,
                gaussians: vec![params.encode_example(&f)?],
                features: vec![f],
            })
        })
        .collect()
}

/// Recurrent InfoNCE training. Each iteration runs a `steps`-long query
/// episode for every program in the batch, sums the batch loss over the
/// steps and applies one clipped gradient-descent update.
pub fn train_recurrent<D: Domain>(
    params: &mut EncoderParams,
    domain: &D,
    programs: &[D::Program],
    cfg: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<TrainReport, FspaceError> {
    if programs.len() < 2 {
        return Err(FspaceError::BatchTooSmall(programs.len()));
    }
    let steps = cfg.steps.max(1);
    let prog_feats: Vec<Vec<f64>> = programs
        .iter()
        .map(|p| program_features(&domain.program_tokens(p), params.program.n_in))
        .collect();
    let mut report = TrainReport::default();
    for iter in 0..cfg.iterations {
        let committee = embed_committee(params, domain, programs);
        let mut episodes = start_episodes(params, domain, programs)?;
        let mut total = vec![0.0; params.param_count()];
        let mut losses = Vec::with_capacity(steps);
        for _ in 0..steps {
            advance(params, domain, &committee, &mut episodes, cfg.candidates, rng)?;
            let sets: Vec<Vec<Vec<f64>>> = episodes.iter().map(|e| e.features.clone()).collect();
            let (value, grad) = params.batch_loss_grad(&sets, &prog_feats)?;
            if !value.loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(FspaceError::Diverged { iteration: iter });
            }
            losses.push(value.loss);
            for (t, g) in total.iter_mut().zip(grad) {
                *t += g;
            }
        }
        let norm = total.iter().map(|g| g * g).sum::<f64>().sqrt();
        let scale = if norm > cfg.clip { cfg.clip / norm } else { 1.0 };
        for (v, g) in params.values.iter_mut().zip(&total) {
            *v -= cfg.learning_rate * scale * g;
        }
        report.loss_history.push(losses.iter().sum::<f64>() / steps as f64);
        report.step_losses.push(losses);
    }
    Ok(report)
}

/// Mean per-step InfoNCE of fresh episodes under the current parameters.
pub fn evaluate_loss<D: Domain>(
    params: &EncoderParams,
    domain: &D,
    programs: &[D::Program],
    steps: usize,
    candidates: usize,
    rng: &mut dyn RngCore,
) -> Result<f64, FspaceError> {
    let prog_feats: Vec<Vec<f64>> = programs
        .iter()
        .map(|p| program_features(&domain.program_tokens(p), params.program.n_in))
        .collect();
    let committee = embed_committee(params, domain, programs);
    let mut episodes = start_episodes(params, domain, programs)?;
    let mut total = 0.0;
    for _ in 0..steps.max(1) {
        advance(params, domain, &committee, &mut episodes, candidates, rng)?;
        let sets: Vec<Vec<Vec<f64>>> = episodes.iter().map(|e| e.features.clone()).collect();
        total += params.batch_loss(&sets, &prog_feats)?.loss;
    }
    Ok(total / steps.max(1) as f64)
}

/// Entropy of the intersected Gaussian after the start signal and after
/// each of `steps` queries chosen by entropy-reduction scoring against
/// `committee`, for the hidden program `truth`.
pub fn rollout_entropies<D: Domain>(
    params: &EncoderParams,
    domain: &D,
    truth: &D::Program,
    committee: &[D::Program],
    steps: usize,
    candidates: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>, FspaceError> {
    let members = embed_committee(params, domain, committee);
    let mut episodes = start_episodes(params, domain, std::slice::from_ref(truth))?;
    let mut out = vec![entropy(&params.intersect_attention(&episodes[0].gaussians)?)];
    for _ in 0..steps {
        advance(params, domain, &members, &mut episodes, candidates, rng)?;
        out.push(entropy(&params.intersect_attention(&episodes[0].gaussians)?));
    }
    Ok(out)
}
