use std::collections::HashSet;

use super::{consistent, Budget, Search, SynthError, SynthMode, SynthesisResult, WORKING_SET};
use crate::domain::ListDomain;
use crate::listproc::{apply, arg_choices, Func, ListProgram, Statement, Type, Value};

const MEMO_CAP: usize = 1 << 20;

/// Values of one variable across the working examples.
type Column = Vec<Value>;

struct Ctx<'a, 'm> {
    domain: &'a ListDomain,
    funcs: Vec<Func>,
    sig: Vec<Type>,
    targets: Column,
    all: &'a [(Vec<Value>, Value)],
    search: Search<'m, ListProgram>,
    dead: HashSet<(usize, Vec<Column>, Vec<bool>)>,
}

/// Input signature shared by every example.
fn signature(examples: &[(Vec<Value>, Value)]) -> Result<Vec<Type>, SynthError> {
    let (first, _) = examples.first().ok_or(SynthError::NoExamples)?;
    let sig: Vec<Type> = first
        .iter()
        .map(|v| v.ty().ok_or(SynthError::MixedSignature))
        .collect::<Result<_, _>>()?;
    let same = examples
        .iter()
        .all(|(x, _)| x.len() == sig.len() && x.iter().zip(&sig).all(|(v, t)| v.ty() == Some(*t)));
    if same && !sig.is_empty() && sig.len() <= 3 {
        Ok(sig)
    } else {
        Err(SynthError::MixedSignature)
    }
}

pub(super) fn enumerate(
    domain: &ListDomain,
    examples: &[(Vec<Value>, Value)],
    budget: Budget,
    mode: &SynthMode<ListProgram>,
) -> Result<SynthesisResult<ListProgram>, SynthError> {
    let sig = signature(examples)?;
    let working = &examples[..examples.len().min(WORKING_SET)];
    let mut cols: Vec<Column> = (0..sig.len())
        .map(|i| working.iter().map(|(x, _)| x[i].clone()).collect())
        .collect();
    let mut ctx = Ctx {
        domain,
        funcs: Func::all(),
        sig: sig.clone(),
        targets: working.iter().map(|(_, y)| y.clone()).collect(),
        all: examples,
        search: Search::new(mode, budget),
        dead: HashSet::new(),
    };
    let mut types = sig;
    let mut used = Vec::new();
    let mut stmts = Vec::new();
    for len in 1..=budget.max_size {
        extend(&mut ctx, &mut types, &mut cols, &mut used, &mut stmts, len);
        if ctx.search.stopped() {
            break;
        }
    }
    Ok(ctx.search.finish())
}

/// Try every way to add exactly `remaining` statements. `used[i]` tells
/// whether statement `i`'s result is consumed. Returns whether some
/// completion matched the working examples.
fn extend(
    ctx: &mut Ctx<'_, '_>,
    types: &mut Vec<Type>,
    cols: &mut Vec<Column>,
    used: &mut Vec<bool>,
    stmts: &mut Vec<Statement>,
    remaining: usize,
) -> bool {
    let n_in = ctx.sig.len();
    if remaining == 0 {
        if cols.last() != Some(&ctx.targets) {
            return false;
        }
        let p = ListProgram::new(ctx.sig.clone(), stmts.clone()).expect("enumerator builds well-typed programs");
        if consistent(ctx.domain, &p, ctx.all) {
            ctx.search.accept(p);
        }
        return true;
    }
    let key = (remaining, cols[n_in..].to_vec(), used.clone());
    if ctx.dead.contains(&key) {
        return false;
    }
    let unused = used.iter().filter(|&&u| !u).count();
    let last = remaining == 1;
    let mut found = false;
    for fi in 0..ctx.funcs.len() {
        let f = ctx.funcs[fi];
        if last && !ctx.targets.iter().all(|y| y.ty().is_none_or(|t| t == f.ret_type())) {
            continue;
        }
        for args in arg_choices(f, types, None) {
            if !ctx.search.visit() {
                return found;
            }
            let consumed: HashSet<usize> = args
                .iter()
                .filter(|&&a| a >= n_in && !used[a - n_in])
                .copied()
                .collect();
            let after = unused - consumed.len() + 1;
            if after > remaining || (last && after != 1) {
                continue;
            }
            let col: Column = (0..ctx.targets.len())
                .map(|e| {
                    let vals: Vec<&Value> = args.iter().map(|&a| &cols[a][e]).collect();
                    apply(f, &vals)
                })
                .collect();
            for &a in &consumed {
                used[a - n_in] = true;
            }
            used.push(false);
            types.push(f.ret_type());
            cols.push(col);
            stmts.push(Statement { func: f, args });
            found |= extend(ctx, types, cols, used, stmts, remaining - 1);
            stmts.pop();
            cols.pop();
            types.pop();
            used.pop();
            for &a in &consumed {
                used[a - n_in] = false;
            }
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
