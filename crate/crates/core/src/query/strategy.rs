use std::collections::HashSet;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::info::{ig_ranking, ResponseMatrix};
use super::{CandidatePool, Oracle, QueryError};
use crate::domain::Domain;
use crate::fspace::{embed_committee, expected_entropy_reduction, DiagGaussian, EncoderParams};

/// What a strategy sees when choosing the next query.
pub struct QueryContext<'a, D: Domain> {
    pub domain: &'a D,
    pub pool: &'a CandidatePool<D::Program>,
    /// Examples so far, starting with the start signal.
    pub history: &'a [(D::Input, D::Output)],
}

/// A chosen query, with the oracle's response if the strategy already asked.
#[derive(Clone, Debug)]
pub struct Selection<D: Domain> {
    pub input: D::Input,
    pub response: Option<D::Output>,
}

pub trait Strategy<D: Domain> {
    fn name(&self) -> String;
    fn select(
        &mut self,
        ctx: &QueryContext<'_, D>,
        oracle: &mut Oracle<'_, D>,
        rng: &mut dyn RngCore,
    ) -> Result<Selection<D>, QueryError>;
}

/// Draw `n` inputs, dropping duplicates, and return them with their
/// serialized keys.
fn sample_candidates<D: Domain>(
    oracle: &Oracle<'_, D>,
    n: usize,
    rng: &mut dyn RngCore,
) -> (Vec<D::Input>, Vec<String>) {
    let domain = oracle.domain();
    let mut seen = HashSet::new();
    let (mut xs, mut keys) = (Vec::new(), Vec::new());
    for _ in 0..n.max(1) {
        let x = oracle.sample_input(rng);
        let key = domain.encode_input(&x);
        if seen.insert(key.clone()) {
            xs.push(x);
            keys.push(key);
        }
    }
    (xs, keys)
}

/// Candidate indices sorted by score, best first, ties by key.
fn ranked(scores: &[f64], keys: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| keys[a].cmp(&keys[b]))
    });
    order
}

/// Probe candidates in order until one gets an evidence response.
fn first_evidence<D: Domain>(
    order: &[usize],
    xs: &[D::Input],
    oracle: &mut Oracle<'_, D>,
) -> Option<Selection<D>> {
    for &i in order {
        let y = oracle.probe(&xs[i]);
        if oracle.domain().is_evidence(&y) {
            return Some(Selection {
                input: xs[i].clone(),
                response: Some(y),
            });
        }
    }
    None
}

fn random_valid<D: Domain>(
    oracle: &mut Oracle<'_, D>,
    max_tries: usize,
    rng: &mut dyn RngCore,
) -> Result<Selection<D>, QueryError> {
    for _ in 0..max_tries {
        let x = oracle.sample_input(rng);
        let y = oracle.probe(&x);
        if oracle.domain().is_evidence(&y) {
            return Ok(Selection {
                input: x,
                response: Some(y),
            });
        }
    }
    Err(QueryError::NoValidQuery { tries: max_tries })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomStrategy {
    /// Redraw until the response is evidence.
    pub crash_filter: bool,
    pub max_tries: usize,
}

impl Default for RandomStrategy {
    fn default() -> Self {
        RandomStrategy {
            crash_filter: false,
            max_tries: 1000,
        }
    }
}

impl<D: Domain> Strategy<D> for RandomStrategy {
    fn name(&self) -> String {
        if self.crash_filter { "random-valid" } else { "random" }.to_string()
    }

    fn select(
        &mut self,
        _ctx: &QueryContext<'_, D>,
        oracle: &mut Oracle<'_, D>,
        rng: &mut dyn RngCore,
    ) -> Result<Selection<D>, QueryError> {
        if self.crash_filter {
            return random_valid(oracle, self.max_tries, rng);
        }
        Ok(Selection {
            input: oracle.sample_input(rng),
            response: None,
        })
    }
}

/// Query by committee: ask the input on which the top surviving programs
/// disagree the most.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbcStrategy {
    pub committee: usize,
    pub candidates: usize,
    /// Probe down the ranking until a response is evidence.
    pub crash_aware: bool,
    pub max_rounds: usize,
}

impl Default for QbcStrategy {
    fn default() -> Self {
        QbcStrategy {
            committee: 32,
            candidates: 100,
            crash_aware: true,
            max_rounds: 50,
        }
    }
}

impl QbcStrategy {
    /// Number of distinct committee responses to each candidate.
    pub fn scores<D: Domain>(domain: &D, committee: &[&D::Program], xs: &[D::Input]) -> Vec<f64> {
        xs.iter()
            .map(|x| {
                committee
                    .iter()
                    .map(|p| domain.respond(p, x))
                    .collect::<HashSet<_>>()
                    .len() as f64
            })
            .collect()
    }
}

impl<D: Domain> Strategy<D> for QbcStrategy {
    fn name(&self) -> String {
        if self.crash_aware { "qbc-aware" } else { "qbc" }.to_string()
    }

    fn select(
        &mut self,
        ctx: &QueryContext<'_, D>,
        oracle: &mut Oracle<'_, D>,
        rng: &mut dyn RngCore,
    ) -> Result<Selection<D>, QueryError> {
        if ctx.history.len() <= 1 {
            return if self.crash_aware {
                random_valid(oracle, self.max_rounds * self.candidates.max(1), rng)
            } else {
                Ok(Selection {
                    input: oracle.sample_input(rng),
                    response: None,
                })
            };
        }
        let committee: Vec<&D::Program> = ctx.pool.survivors().take(self.committee).collect();
        for _ in 0..self.max_rounds.max(1) {
            let (xs, keys) = sample_candidates(oracle, self.candidates, rng);
            let scores = Self::scores(ctx.domain, &committee, &xs);
            let order = ranked(&scores, &keys);
            if !self.crash_aware {
                return Ok(Selection {
                    input: xs[order[0]].clone(),
                    response: None,
                });
            }
            if let Some(sel) = first_evidence(&order, &xs, oracle) {
                return Ok(sel);
            }
        }
        Err(QueryError::NoValidQuery {
            tries: self.max_rounds * self.candidates,
        })
    }
}

/// Ask the candidate with the largest expected information gain about the
/// program under the uniform posterior over the pool, optionally planning
/// `lookahead` queries ahead.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IgStrategy {
    pub candidates: usize,
    pub lookahead: usize,
    /// Probe down the ranking until a response is evidence.
    pub crash_aware: bool,
    pub max_rounds: usize,
}

impl Default for IgStrategy {
    fn default() -> Self {
        IgStrategy {
            candidates: 100,
            lookahead: 1,
            crash_aware: false,
            max_rounds: 50,
        }
    }
}

impl<D: Domain> Strategy<D> for IgStrategy {
    fn name(&self) -> String {
        let base = if self.lookahead <= 1 {
            "ig".to_string()
        } else {
            format!("ig-l{}", self.lookahead)
        };
        if self.crash_aware {
            format!("{base}-aware")
        } else {
            base
        }
    }

    fn select(
        &mut self,
        ctx: &QueryContext<'_, D>,
        oracle: &mut Oracle<'_, D>,
        rng: &mut dyn RngCore,
    ) -> Result<Selection<D>, QueryError> {
        let survivors: Vec<&D::Program> = ctx.pool.survivors().collect();
        if survivors.is_empty() {
            return Err(QueryError::EmptyPool);
        }
        let all: Vec<usize> = (0..survivors.len()).collect();
        for _ in 0..self.max_rounds.max(1) {
            let (xs, keys) = sample_candidates(oracle, self.candidates, rng);
            let m = ResponseMatrix::build(ctx.domain, &survivors, &xs);
            let order = ig_ranking(&m, &all, &keys, self.lookahead);
            if !self.crash_aware {
                return Ok(Selection {
                    input: xs[order[0]].clone(),
                    response: None,
                });
            }
            if let Some(sel) = first_evidence(&order, &xs, oracle) {
                return Ok(sel);
            }
        }
        Err(QueryError::NoValidQuery {
            tries: self.max_rounds * self.candidates,
        })
    }
}

/// Ask the candidate that most shrinks the learned example-set Gaussian,
/// with the top surviving programs standing in for the program space.
#[derive(Clone, Debug)]
pub struct FspaceStrategy {
    pub params: Arc<EncoderParams>,
    pub committee: usize,
    pub candidates: usize,
    pub crash_aware: bool,
    pub max_rounds: usize,
}

impl FspaceStrategy {
    pub fn new(params: Arc<EncoderParams>) -> Self {
        FspaceStrategy {
            params,
            committee: 32,
            candidates: 100,
            crash_aware: false,
            max_rounds: 50,
        }
    }
}

impl<D: Domain> Strategy<D> for FspaceStrategy {
    fn name(&self) -> String {
        if self.crash_aware { "fspace-aware" } else { "fspace" }.to_string()
    }

    fn select(
        &mut self,
        ctx: &QueryContext<'_, D>,
        oracle: &mut Oracle<'_, D>,
        rng: &mut dyn RngCore,
    ) -> Result<Selection<D>, QueryError> {
        let members: Vec<D::Program> = ctx.pool.survivors().take(self.committee).cloned().collect();
        let committee = embed_committee(&self.params, ctx.domain, &members);
        let history: Vec<DiagGaussian> = ctx
            .history
            .iter()
            .filter(|(_, y)| ctx.domain.is_evidence(y))
            .map(|(x, y)| self.params.encode_example(&ctx.domain.features(x, y)))
            .collect::<Result<_, _>>()?;
        for _ in 0..self.max_rounds.max(1) {
            let (xs, keys) = sample_candidates(oracle, self.candidates, rng);
            let scores = xs
                .iter()
                .map(|x| expected_entropy_reduction(&self.params, ctx.domain, &history, &committee, x))
                .collect::<Result<Vec<_>, _>>()?;
            let order = ranked(&scores, &keys);
            if !self.crash_aware {
                return Ok(Selection {
                    input: xs[order[0]].clone(),
                    response: None,
                });
            }
            if let Some(sel) = first_evidence(&order, &xs, oracle) {
                return Ok(sel);
            }
        }
        Err(QueryError::NoValidQuery {
            tries: self.max_rounds * self.candidates,
        })
    }
}
