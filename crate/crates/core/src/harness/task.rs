use std::collections::HashSet;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};
use crate::domain::{Domain, KarelDomain, ListDomain};
use crate::karel::{sample_program, KarelAst};
use crate::listproc::{sample_list_program, sample_list_program_with, ListProgram};

/// A domain whose programs the harness can draw as ground truths and
/// distractors.
pub trait TaskSource: Domain + Sized {
    fn for_config(cfg: &ExperimentConfig) -> Self;
    fn sample_truth(&self, cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> Self::Program;
    /// A program of the same kind and input signature as `truth`.
    fn sample_like(&self, truth: &Self::Program, cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> Self::Program;
}

impl TaskSource for KarelDomain {
    fn for_config(cfg: &ExperimentConfig) -> Self {
        KarelDomain {
            density: cfg.karel.density(),
        }
    }

    fn sample_truth(&self, cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> KarelAst {
        sample_program(cfg.karel.bounds(), rng)
    }

    fn sample_like(&self, _truth: &KarelAst, cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> KarelAst {
        sample_program(cfg.karel.bounds(), rng)
    }
}

fn list_len(cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> usize {
    cfg.list
        .program_len
        .unwrap_or_else(|| cfg.list.regime.regime().sample_len(rng))
}

impl TaskSource for ListDomain {
    fn for_config(_cfg: &ExperimentConfig) -> Self {
        ListDomain::default()
    }

    fn sample_truth(&self, cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> ListProgram {
        let len = list_len(cfg, rng);
        sample_list_program(len, rng)
    }

    fn sample_like(&self, truth: &ListProgram, cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> ListProgram {
        let len = list_len(cfg, rng);
        sample_list_program_with(truth.inputs().to_vec(), len, rng)
    }
}

/// One synthesis problem: the hidden program, the ranked candidate pool
/// that contains it, and crash-filtered held-out inputs.
#[derive(Clone, Debug)]
pub struct Task<D: Domain> {
    pub id: usize,
    pub truth: D::Program,
    /// Sorted by size, then serialized text.
    pub pool: Vec<D::Program>,
    /// Distinct inputs on which the truth does not crash: the held-out count
    /// plus the query count.
    pub heldout: Vec<D::Input>,
}

/// Serialized description of a task.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: usize,
    pub dsl: String,
    pub truth: String,
    pub truth_size: usize,
    pub pool_size: usize,
    pub pool: Vec<String>,
}

impl<D: Domain> Task<D> {
    pub fn record(&self, domain: &D) -> TaskRecord {
        TaskRecord {
            task: self.id,
            dsl: domain.name().to_string(),
            truth: domain.encode_program(&self.truth),
            truth_size: domain.program_size(&self.truth),
            pool_size: self.pool.len(),
            pool: self.pool.iter().map(|p| domain.encode_program(p)).collect(),
        }
    }

    pub fn truth_index(&self) -> usize {
        self.pool
            .iter()
            .position(|p| *p == self.truth)
            .expect("the truth is in its pool")
    }

    /// The first `n` held-out inputs not among `exclude`.
    pub fn heldout_excluding(&self, domain: &D, exclude: &[D::Input], n: usize) -> Vec<D::Input> {
        let skip: HashSet<String> = exclude.iter().map(|x| domain.encode_input(x)).collect();
        self.heldout
            .iter()
            .filter(|x| !skip.contains(&domain.encode_input(x)))
            .take(n)
            .cloned()
            .collect()
    }
}

/// The seeded generator for one task, independent of other tasks.
pub fn task_rng(seed: u64, task: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(task as u64);
    rng
}

/// Stream for task construction.
pub const TASK_STREAM: u64 = 0;
/// Stream for query selection, shared by every strategy of a task.
pub const QUERY_STREAM: u64 = 1;

const TRUTH_ATTEMPTS: usize = 1000;
const INPUT_TRIES_PER_INPUT: usize = 40;

/// Up to `n` distinct inputs on which `p` gives an evidence response.
pub fn valid_inputs<D: Domain>(domain: &D, p: &D::Program, n: usize, rng: &mut dyn RngCore) -> Vec<D::Input> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n * INPUT_TRIES_PER_INPUT {
        if out.len() == n {
            break;
        }
        let x = domain.sample_input(p, rng);
        if domain.is_evidence(&domain.respond(p, &x)) && seen.insert(domain.encode_input(&x)) {
            out.push(x);
        }
    }
    out
}

/// Draw task `id`: a ground truth with enough crash-free inputs, its pool
/// and held-out inputs.
pub fn make_task<D: TaskSource>(domain: &D, cfg: &ExperimentConfig, id: usize) -> Result<Task<D>, HarnessError> {
    let mut rng = task_rng(cfg.seed, id, TASK_STREAM);
    let need = cfg.heldout + cfg.queries;
    for _ in 0..TRUTH_ATTEMPTS {
        let truth = domain.sample_truth(cfg, &mut rng);
        let heldout = valid_inputs(domain, &truth, need, &mut rng);
        if heldout.len() < need {
            continue;
        }
        let mut pool = vec![truth.clone()];
        let mut seen: HashSet<D::Program> = pool.iter().cloned().collect();
        let mut tries = 0;
        while pool.len() <= cfg.pool.distractors && tries < 50 * (cfg.pool.distractors + 1) {
            tries += 1;
            let p = domain.sample_like(&truth, cfg, &mut rng);
            if seen.insert(p.clone()) {
                pool.push(p);
            }
        }
        let mut keyed: Vec<(usize, String, D::Program)> = pool
            .into_iter()
            .map(|p| (domain.program_size(&p), domain.encode_program(&p), p))
            .collect();
        keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        let pool = keyed.into_iter().map(|(_, _, p)| p).collect();
        return Ok(Task { id, truth, pool, heldout });
    }
    Err(HarnessError::TaskGeneration(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Dsl;

    #[test]
    fn tasks_are_seeded_and_pools_sorted() {
        let mut cfg = ExperimentConfig::desk(Dsl::List);
        cfg.pool.distractors = 20;
        let d = ListDomain::default();
        let a = make_task(&d, &cfg, 3).unwrap();
        let b = make_task(&d, &cfg, 3).unwrap();
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.pool, b.pool);
        assert_eq!(a.heldout, b.heldout);
        assert_eq!(a.pool.len(), 21);
        let keys: Vec<(usize, String)> = a.pool.iter().map(|p| (d.program_size(p), d.encode_program(p))).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a.pool[a.truth_index()], a.truth);
        assert!(a.pool.iter().all(|p| p.inputs() == a.truth.inputs()));
        let c = make_task(&d, &cfg, 4).unwrap();
        assert_ne!(a.heldout, c.heldout);
    }

    #[test]
    fn karel_heldout_inputs_do_not_crash() {
        let mut cfg = ExperimentConfig::desk(Dsl::Karel);
        cfg.pool.distractors = 5;
        let d = KarelDomain::for_config(&cfg);
        let t = make_task(&d, &cfg, 0).unwrap();
        assert_eq!(t.heldout.len(), cfg.heldout + cfg.queries);
        assert!(t.heldout.iter().all(|x| d.is_evidence(&d.respond(&t.truth, x))));
        let ex = t.heldout_excluding(&d, &t.heldout[..2], 3);
        assert_eq!(ex, t.heldout[2..5].to_vec());
    }
}
