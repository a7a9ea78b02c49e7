//! Enumerative synthesis from examples, and the functional-equivalence proxy.

mod karel;
mod list;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Domain, KarelDomain, ListDomain, TableDomain};

pub use karel::{KarelSpace, REPEAT_COUNTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("no evidence examples to synthesize from")]
    NoExamples,
    #[error("example inputs disagree on the input signature")]
    MixedSignature,
}

/// When to stop enumerating.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynthMode<P> {
    First,
    TopK(usize),
    /// Keep going until this program itself is found.
    UntilMatch(P),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest program size searched: node count for Karel, statement count
    /// for lists.
    pub max_size: usize,
    /// Cap on visited program prefixes.
    pub max_explored: u64,
    /// Wall-clock cap in milliseconds. Results under a time cap depend on
    /// machine speed.
    pub max_millis: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_size: 4,
            max_explored: 2_000_000,
            max_millis: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The mode's stopping condition was met.
    FirstConsistent,
    BudgetExhausted,
    /// Every program within the size bound was tried.
    PoolExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::FirstConsistent => "first-consistent",
            StopReason::BudgetExhausted => "budget-exhausted",
            StopReason::PoolExhausted => "pool-exhausted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthStats {
    pub explored: u64,
    pub elapsed_ms: u64,
    pub stop: StopReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisResult<P> {
    /// Consistent programs in enumeration order.
    pub candidates: Vec<P>,
    pub stats: SynthStats,
}

/// Bookkeeping shared by the enumerators: visit counting, budget checks and
/// candidate collection.
pub(crate) struct Search<'a, P> {
    mode: &'a SynthMode<P>,
    budget: Budget,
    start: Instant,
    explored: u64,
    out_of_budget: bool,
    done: bool,
    candidates: Vec<P>,
}

impl<'a, P: PartialEq> Search<'a, P> {
    pub(crate) fn new(mode: &'a SynthMode<P>, budget: Budget) -> Self {
        Search {
            mode,
            budget,
            start: Instant::now(),
            explored: 0,
            out_of_budget: false,
            done: false,
            candidates: Vec::new(),
        }
    }

    /// Count one visited prefix. Returns false once the search must stop.
    pub(crate) fn visit(&mut self) -> bool {
        if self.stopped() {
            return false;
        }
        self.explored += 1;
        if self.explored > self.budget.max_explored {
            self.out_of_budget = true;
        } else if let Some(ms) = self.budget.max_millis {
            if self.explored.is_multiple_of(256) && self.start.elapsed() > Duration::from_millis(ms) {
                self.out_of_budget = true;
            }
        }
        !self.out_of_budget
    }

    pub(crate) fn stopped(&self) -> bool {
        self.done || self.out_of_budget
    }

    pub(crate) fn accept(&mut self, p: P) {
        let hit = match self.mode {
            SynthMode::First => true,
            SynthMode::TopK(k) => self.candidates.len() + 1 >= *k,
            SynthMode::UntilMatch(target) => p == *target,
        };
        self.candidates.push(p);
        if hit {
            self.done = true;
        }
    }

    pub(crate) fn finish(self) -> SynthesisResult<P> {
        let stop = if self.done {
            StopReason::FirstConsistent
        } else if self.out_of_budget {
            StopReason::BudgetExhausted
        } else {
            StopReason::PoolExhausted
        };
        SynthesisResult {
            candidates: self.candidates,
            stats: SynthStats {
                explored: self.explored,
                elapsed_ms: self.start.elapsed().as_millis() as u64,
                stop,
            },
        }
    }
}

/// A domain whose programs can be enumerated against examples.
pub trait Enumerate: Domain {
    /// Enumerate programs consistent with `examples`, all of which are
    /// evidence.
    fn enumerate(
        &self,
        examples: &[(Self::Input, Self::Output)],
        budget: Budget,
        mode: &SynthMode<Self::Program>,
    ) -> Result<SynthesisResult<Self::Program>, SynthError>;
}

/// Number of examples used to prune prefixes; the rest are checked only on
/// complete programs.
pub(crate) const WORKING_SET: usize = 10;

/// Synthesize programs consistent with the evidence among `examples`. The
/// start signal must not be included.
pub fn synthesize<D: Enumerate>(
    domain: &D,
    examples: &[(D::Input, D::Output)],
    budget: Budget,
    mode: &SynthMode<D::Program>,
) -> Result<SynthesisResult<D::Program>, SynthError> {
    let evidence: Vec<_> = examples
        .iter()
        .filter(|(_, y)| domain.is_evidence(y))
        .cloned()
        .collect();
    if evidence.is_empty() {
        return Err(SynthError::NoExamples);
    }
    domain.enumerate(&evidence, budget, mode)
}

/// Programs of a ranked pool consistent with the evidence among `examples`,
/// in pool order.
pub fn pool_search<D: Domain>(
    domain: &D,
    pool: &[D::Program],
    examples: &[(D::Input, D::Output)],
    mode: &SynthMode<D::Program>,
) -> SynthesisResult<D::Program> {
    let mut search = Search::new(
        mode,
        Budget {
            max_size: usize::MAX,
            max_explored: u64::MAX,
            max_millis: None,
        },
    );
    for p in pool {
        if !search.visit() {
            break;
        }
        if consistent(domain, p, examples) {
            search.accept(p.clone());
        }
    }
    search.finish()
}

/// Whether `p` reproduces every evidence example.
pub fn consistent<D: Domain>(domain: &D, p: &D::Program, examples: &[(D::Input, D::Output)]) -> bool {
    examples
        .iter()
        .filter(|(_, y)| domain.is_evidence(y))
        .all(|(x, y)| domain.respond(p, x) == *y)
}

/// Whether two programs agree on every input, under the domain's
/// equivalence response.
pub fn functional_equivalence<D: Domain>(domain: &D, p1: &D::Program, p2: &D::Program, inputs: &[D::Input]) -> bool {
    p1 == p2 || inputs.iter().all(|x| domain.fe_response(p1, x) == domain.fe_response(p2, x))
}

impl Enumerate for KarelDomain {
    fn enumerate(
        &self,
        examples: &[(Self::Input, Self::Output)],
        budget: Budget,
        mode: &SynthMode<Self::Program>,
    ) -> Result<SynthesisResult<Self::Program>, SynthError> {
        Ok(karel::enumerate(self, examples, budget, mode))
    }
}

impl Enumerate for ListDomain {
    fn enumerate(
        &self,
        examples: &[(Self::Input, Self::Output)],
        budget: Budget,
        mode: &SynthMode<Self::Program>,
    ) -> Result<SynthesisResult<Self::Program>, SynthError> {
        list::enumerate(self, examples, budget, mode)
    }
}

impl Enumerate for TableDomain {
    fn enumerate(
        &self,
        examples: &[(Self::Input, Self::Output)],
        _budget: Budget,
        mode: &SynthMode<Self::Program>,
    ) -> Result<SynthesisResult<Self::Program>, SynthError> {
        Ok(pool_search(self, &self.programs(), examples, mode))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::karel::{parse_karel, sample_world};
    use crate::listproc::{sample_list_input, InputRanges, ListProgram, Type};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn examples<D: Domain>(d: &D, p: &D::Program, xs: &[D::Input]) -> Vec<(D::Input, D::Output)> {
        xs.iter().map(|x| (x.clone(), d.respond(p, x))).collect()
    }

    #[test]
    fn karel_move_examples_are_satisfied() {
        let d = KarelDomain::default();
        let truth = parse_karel("def run(): move()").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<_> = std::iter::repeat_with(|| sample_world(&mut rng))
            .filter(|w| d.is_evidence(&d.respond(&truth, w)))
            .take(3)
            .collect();
        let ex = examples(&d, &truth, &xs);
        let r = synthesize(&d, &ex, Budget::default(), &SynthMode::First).unwrap();
        assert_eq!(r.stats.stop, StopReason::FirstConsistent);
        assert!(consistent(&d, &r.candidates[0], &ex));
    }

    #[test]
    fn contradictory_examples_exhaust_the_pool() {
        let d = ListDomain::default();
        let x = vec![Value::List(vec![1, 2])];
        let ex = vec![(x.clone(), Value::Int(1)), (x, Value::Int(2))];
        let budget = Budget {
            max_size: 2,
            ..Budget::default()
        };
        let r = synthesize(&d, &ex, budget, &SynthMode::First).unwrap();
        assert!(r.candidates.is_empty());
        assert_eq!(r.stats.stop, StopReason::PoolExhausted);
    }

    use crate::listproc::Value;

    #[test]
    fn map_plus_one_generalizes() {
        let d = ListDomain::default();
        let truth: ListProgram = "v0 = INPUT LIST\nv1 = MAP (+1) v0".parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ranges = InputRanges::default();
        let xs: Vec<_> = (0..5).map(|_| sample_list_input(&[Type::List], &ranges, &mut rng)).collect();
        let r = synthesize(&d, &examples(&d, &truth, &xs), Budget::default(), &SynthMode::First).unwrap();
        let fresh: Vec<_> = (0..100).map(|_| sample_list_input(&[Type::List], &ranges, &mut rng)).collect();
        assert!(functional_equivalence(&d, &r.candidates[0], &truth, &fresh));
    }

    #[test]
    fn fe_examples() {
        let d = KarelDomain::default();
        let a = parse_karel("def run(): turnLeft(); turnLeft(); turnLeft()").unwrap();
        let b = parse_karel("def run(): turnRight()").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let worlds: Vec<_> = (0..100).map(|_| sample_world(&mut rng)).collect();
        assert!(functional_equivalence(&d, &a, &b, &worlds));
        assert!(functional_equivalence(&d, &a, &a, &worlds));

        let l = ListDomain::default();
        let dbl: ListProgram = "v0 = INPUT LIST\nv1 = MAP (*2) v0".parse().unwrap();
        let sq: ListProgram = "v0 = INPUT LIST\nv1 = MAP (**2) v0".parse().unwrap();
        let held = vec![vec![Value::List(vec![2])], vec![Value::List(vec![3])]];
        assert!(functional_equivalence(&l, &dbl, &sq, &held[..1]));
        assert!(!functional_equivalence(&l, &dbl, &sq, &held));
    }

    #[test]
    fn top_k_and_until_match() {
        let d = ListDomain::default();
        let truth: ListProgram = "v0 = INPUT LIST\nv1 = SORT v0\nv2 = REVERSE v1".parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ranges = InputRanges::default();
        let xs: Vec<_> = (0..5).map(|_| sample_list_input(&[Type::List], &ranges, &mut rng)).collect();
        let ex = examples(&d, &truth, &xs);
        let top = synthesize(&d, &ex, Budget::default(), &SynthMode::TopK(3)).unwrap();
        assert_eq!(top.candidates.len(), 3);
        assert!(top.candidates.iter().all(|p| consistent(&d, p, &ex)));
        let sizes: Vec<usize> = top.candidates.iter().map(|p| p.len()).collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        let hit = synthesize(&d, &ex, Budget::default(), &SynthMode::UntilMatch(truth.clone())).unwrap();
        assert_eq!(hit.candidates.last(), Some(&truth));
    }

    #[test]
    fn tiny_budget_is_a_value() {
        let d = ListDomain::default();
        let truth: ListProgram = "v0 = INPUT LIST\nv1 = SORT v0\nv2 = REVERSE v1".parse().unwrap();
        let x = vec![Value::List(vec![3, 1, 2])];
        let ex = examples(&d, &truth, &[x]);
        let budget = Budget {
            max_explored: 3,
            ..Budget::default()
        };
        let r = synthesize(&d, &ex, budget, &SynthMode::UntilMatch(truth)).unwrap();
        assert_eq!(r.stats.stop, StopReason::BudgetExhausted);
    }

    #[test]
    fn pool_search_respects_order() {
        let d = TableDomain::worked_example();
        let ex = vec![(0, true), (3, false)];
        let r = synthesize(&d, &ex, Budget::default(), &SynthMode::TopK(10)).unwrap();
        assert_eq!(r.candidates, vec![0, 3]);
        assert_eq!(r.stats.stop, StopReason::PoolExhausted);
        assert_eq!(synthesize(&d, &[], Budget::default(), &SynthMode::First), Err(SynthError::NoExamples));
    }
}
