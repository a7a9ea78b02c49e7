use serde::{Deserialize, Serialize};

use super::QueryError;
use crate::domain::Domain;

/// A finite set of candidate programs with a uniform posterior over the
/// ones consistent with every observed example.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePool<P> {
    programs: Vec<P>,
    alive: Vec<bool>,
}

impl<P: Clone> CandidatePool<P> {
    pub fn new(programs: Vec<P>) -> Self {
        let alive = vec![true; programs.len()];
        CandidatePool { programs, alive }
    }

    pub fn programs(&self) -> &[P] {
        &self.programs
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn is_alive(&self, i: usize) -> bool {
        self.alive[i]
    }

    pub fn surviving(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn survivor_indices(&self) -> Vec<usize> {
        (0..self.programs.len()).filter(|&i| self.alive[i]).collect()
    }

    /// Surviving programs in pool order.
    pub fn survivors(&self) -> impl Iterator<Item = &P> {
        self.programs.iter().zip(&self.alive).filter(|(_, &a)| a).map(|(p, _)| p)
    }

    /// Posterior weight of every program (zero for eliminated ones).
    pub fn weights(&self) -> Vec<f64> {
        let n = self.surviving();
        self.alive
            .iter()
            .map(|&a| if a && n > 0 { 1.0 / n as f64 } else { 0.0 })
            .collect()
    }

    /// Eliminate programs whose response to `x` differs from `y`. Responses
    /// that are not evidence leave the pool unchanged. Returns how many
    /// programs were removed; fails without modifying the pool if none would
    /// survive.
    pub fn posterior_update<D: Domain<Program = P>>(
        &mut self,
        domain: &D,
        x: &D::Input,
        y: &D::Output,
    ) -> Result<usize, QueryError> {
        if !domain.is_evidence(y) {
            return Ok(0);
        }
        let keep: Vec<bool> = self
            .programs
            .iter()
            .zip(&self.alive)
            .map(|(p, &a)| a && domain.respond(p, x) == *y)
            .collect();
        let kept = keep.iter().filter(|&&k| k).count();
        if kept == 0 {
            return Err(QueryError::InconsistentPool);
        }
        let removed = self.surviving() - kept;
        self.alive = keep;
        Ok(removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ListDomain;
    use crate::listproc::{ListProgram, Value};

    fn pool() -> CandidatePool<ListProgram> {
        CandidatePool::new(
            ["MAP (*2)", "MAP (**2)"]
                .iter()
                .map(|f| format!("v0 = INPUT LIST\nv1 = {f} v0").parse().unwrap())
                .collect(),
        )
    }

    #[test]
    fn consistent_example_keeps_both() {
        let d = ListDomain::default();
        let mut p = pool();
        let before = p.weights();
        let removed = p
            .posterior_update(&d, &vec![Value::List(vec![2])], &Value::List(vec![4]))
            .unwrap();
        assert_eq!(removed, 0);
        assert_eq!(p.weights(), before);
        assert_eq!(before, vec![0.5, 0.5]);
    }

    #[test]
    fn discriminating_example_keeps_square() {
        let d = ListDomain::default();
        let mut p = pool();
        p.posterior_update(&d, &vec![Value::List(vec![3])], &Value::List(vec![9]))
            .unwrap();
        assert_eq!(p.surviving(), 1);
        assert_eq!(p.weights(), vec![0.0, 1.0]);
        assert_eq!(p.survivors().next().unwrap().to_string(), "v0 = INPUT LIST\nv1 = MAP (**2) v0");
    }

    #[test]
    fn inconsistent_example_is_an_error_and_leaves_pool() {
        let d = ListDomain::default();
        let mut p = pool();
        let err = p.posterior_update(&d, &vec![Value::List(vec![3])], &Value::List(vec![7]));
        assert_eq!(err, Err(QueryError::InconsistentPool));
        assert_eq!(p.surviving(), 2);
    }
}
