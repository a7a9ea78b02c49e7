use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{CandidatePool, Oracle, QueryContext, QueryError, Strategy};
use crate::domain::Domain;

/// Oracle use and pool size for one query step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub oracle_calls: usize,
    /// Probed queries that were thrown away.
    pub rejected: usize,
    /// Surviving pool programs after the step.
    pub surviving: usize,
}

/// The start signal followed by one example per query step.
#[derive(Clone, Debug)]
pub struct QueryRun<D: Domain> {
    pub history: Vec<(D::Input, D::Output)>,
    pub steps: Vec<StepStats>,
}

impl<D: Domain> QueryRun<D> {
    /// The queried examples without the start signal.
    pub fn examples(&self) -> &[(D::Input, D::Output)] {
        &self.history[1..]
    }

    /// Examples that constrain the program.
    pub fn evidence(&self, domain: &D) -> Vec<(D::Input, D::Output)> {
        self.examples()
            .iter()
            .filter(|(_, y)| domain.is_evidence(y))
            .cloned()
            .collect()
    }

    pub fn total_calls(&self) -> usize {
        self.steps.iter().map(|s| s.oracle_calls).sum()
    }
}

/// Ask `steps` queries of `truth` chosen by `strategy`, narrowing `pool`
/// after each evidence response.
pub fn run_query_loop<D: Domain>(
    domain: &D,
    truth: &D::Program,
    strategy: &mut dyn Strategy<D>,
    pool: &mut CandidatePool<D::Program>,
    steps: usize,
    rng: &mut dyn RngCore,
) -> Result<QueryRun<D>, QueryError> {
    let mut oracle = Oracle::new(domain, truth);
    let mut history = vec![oracle.start_signal()];
    let mut stats = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (calls0, probes0) = (oracle.calls(), oracle.probes());
        let ctx = QueryContext {
            domain,
            pool,
            history: &history,
        };
        let sel = strategy.select(&ctx, &mut oracle, rng)?;
        let y = match sel.response {
            Some(y) => y,
            None => oracle.answer(&sel.input),
        };
        pool.posterior_update(domain, &sel.input, &y)?;
        let kept_probe = usize::from(oracle.probes() > probes0);
        stats.push(StepStats {
            oracle_calls: oracle.calls() - calls0,
            rejected: oracle.probes() - probes0 - kept_probe,
            surviving: pool.surviving(),
        });
        history.push((sel.input, y));
    }
    Ok(QueryRun { history, steps: stats })
}

/// Whether `p` reproduces every example exactly.
pub fn replays<D: Domain>(domain: &D, p: &D::Program, examples: &[(D::Input, D::Output)]) -> bool {
    examples.iter().all(|(x, y)| domain.respond(p, x) == *y)
}
