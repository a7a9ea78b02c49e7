use std::collections::HashSet;
use std::ops::RangeInclusive;

use super::{consistent, Budget, Search, SynthMode, SynthesisResult, WORKING_SET};
use crate::domain::{KarelDomain, KarelResponse};
use crate::karel::{execute_block_from, Action, Cond, CrashMode, KarelAst, KarelWorld, Outcome, Sensor, Stmt};

/// Repeat counts the enumerator tries.
pub const REPEAT_COUNTS: RangeInclusive<u8> = 2..=9;

const MEMO_CAP: usize = 1 << 20;

/// Every statement and every nonempty block up to a size bound, grouped by
/// size and sorted within each size.
#[derive(Clone, Debug)]
pub struct KarelSpace {
    stmts: Vec<Vec<Stmt>>,
    blocks: Vec<Vec<Vec<Stmt>>>,
}

impl KarelSpace {
    pub fn new(max_size: usize) -> Self {
        let mut conds: Vec<Vec<Cond>> = vec![Vec::new(), Vec::new(), Vec::new()];
        for s in Sensor::ALL {
            conds[1].push(Cond::Sensor(s));
            conds[2].push(Cond::Sensor(s).not());
        }
        let mut stmts: Vec<Vec<Stmt>> = vec![Vec::new(); max_size + 1];
        let mut blocks: Vec<Vec<Vec<Stmt>>> = vec![Vec::new(); max_size + 1];
        for size in 1..=max_size {
            let mut here = Vec::new();
            if size == 1 {
                here.extend(Action::ALL.map(Stmt::Action));
            }
            for (cs, cset) in conds.iter().enumerate().skip(1) {
                let bodies = size.saturating_sub(1 + cs);
                if bodies >= 1 {
                    for c in cset {
                        for b in &blocks[bodies] {
                            here.push(Stmt::If(c.clone(), b.clone()));
                            here.push(Stmt::While(c.clone(), b.clone()));
                        }
                    }
                }
                for then in 1..bodies {
                    for c in cset {
                        for t in &blocks[then] {
                            for o in &blocks[bodies - then] {
                                here.push(Stmt::IfElse(c.clone(), t.clone(), o.clone()));
                            }
                        }
                    }
                }
            }
            if size >= 2 {
                for n in REPEAT_COUNTS {
                    for b in &blocks[size - 1] {
                        here.push(Stmt::Repeat(n, b.clone()));
                    }
                }
            }
            here.sort();
            stmts[size] = here;
            let mut seqs = Vec::new();
            for first in 1..=size {
                for s in &stmts[first] {
                    if first == size {
                        seqs.push(vec![s.clone()]);
                    } else {
                        for rest in &blocks[size - first] {
                            let mut seq = vec![s.clone()];
                            seq.extend(rest.iter().cloned());
                            seqs.push(seq);
                        }
                    }
                }
            }
            blocks[size] = seqs;
        }
        KarelSpace { stmts, blocks }
    }

    pub fn max_size(&self) -> usize {
        self.stmts.len() - 1
    }

    pub fn statements(&self, size: usize) -> &[Stmt] {
        &self.stmts[size]
    }

    /// Nonempty statement sequences of exactly `size`.
    pub fn blocks(&self, size: usize) -> &[Vec<Stmt>] {
        &self.blocks[size]
    }
}

struct Ctx<'a, 'm> {
    domain: &'a KarelDomain,
    space: &'a KarelSpace,
    working: &'a [(KarelWorld, KarelWorld)],
    all: &'a [(KarelWorld, KarelResponse)],
    search: Search<'m, KarelAst>,
    dead: HashSet<(usize, Vec<KarelWorld>)>,
}

pub(super) fn enumerate(
    domain: &KarelDomain,
    examples: &[(KarelWorld, KarelResponse)],
    budget: Budget,
    mode: &SynthMode<KarelAst>,
) -> SynthesisResult<KarelAst> {
    let search = Search::new(mode, budget);
    let working: Vec<(KarelWorld, KarelWorld)> = examples
        .iter()
        .filter_map(|(x, y)| y.world().map(|w| (x.clone(), w.clone())))
        .take(WORKING_SET)
        .collect();
    let space = KarelSpace::new(budget.max_size);
    let mut ctx = Ctx {
        domain,
        space: &space,
        working: &working,
        all: examples,
        search,
        dead: HashSet::new(),
    };
    let states: Vec<(KarelWorld, u64)> = working.iter().map(|(x, _)| (x.clone(), 0)).collect();
    for size in 1..=budget.max_size {
        let mut prefix = Vec::new();
        extend(&mut ctx, &mut prefix, &states, size);
        if ctx.search.stopped() {
            break;
        }
    }
    ctx.search.finish()
}

/// Try every completion of `prefix` adding exactly `remaining` nodes.
/// Returns whether some completion matched the working examples.
fn extend(ctx: &mut Ctx<'_, '_>, prefix: &mut Vec<Stmt>, states: &[(KarelWorld, u64)], remaining: usize) -> bool {
    if remaining == 0 {
        if states.iter().zip(ctx.working).any(|((w, _), (_, y))| w != y) {
            return false;
        }
        let p = KarelAst::new(prefix.clone());
        if consistent(ctx.domain, &p, ctx.all) {
            ctx.search.accept(p);
        }
        return true;
    }
    let key = (remaining, states.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>());
    if ctx.dead.contains(&key) {
        return false;
    }
    let mut found = false;
    for k in 1..=remaining {
        for stmt in ctx.space.statements(k) {
            if !ctx.search.visit() {
                return found;
            }
            let Some(next) = step(stmt, states) else {
                continue;
            };
            prefix.push(stmt.clone());
            found |= extend(ctx, prefix, &next, remaining - k);
            prefix.pop();
            if ctx.search.stopped() {
                return found;
            }
        }
    }
    if !found && ctx.dead.len() < MEMO_CAP {
        ctx.dead.insert(key);
    }
    found
}

fn step(stmt: &Stmt, states: &[(KarelWorld, u64)]) -> Option<Vec<(KarelWorld, u64)>> {
    states
        .iter()
        .map(|(w, calls)| {
            let out = execute_block_from(std::slice::from_ref(stmt), w, *calls, CrashMode::Halt);
            match out.kind {
                Outcome::Ok(next) => Some((next, out.api_calls)),
                _ => None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::karel::block_size;

    #[test]
    fn space_sizes_are_exact_and_sorted() {
        let space = KarelSpace::new(4);
        assert_eq!(space.statements(1).len(), 5);
        assert_eq!(space.statements(2).len(), 8 * 5);
        assert_eq!(space.blocks(1).len(), 5);
        assert_eq!(space.blocks(2).len(), 40 + 25);
        for size in 1..=4 {
            assert!(space.statements(size).iter().all(|s| s.size() == size));
            assert!(space.blocks(size).iter().all(|b| block_size(b) == size));
            assert!(space.statements(size).windows(2).all(|w| w[0] < w[1]));
        }
        let n3 = space.statements(3).len();
        assert_eq!(n3, 2 * 5 * 5 + 8 * 65);
    }
}
