//! Seeded generators for list programs and their inputs.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::func::Func;
use super::program::{ListProgram, Statement};
use super::value::{Type, Value, MAX_LIST_LEN};

/// Program-length regime for sampled list tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Exactly four statements.
    D1,
    /// Between one and twelve statements.
    D2,
}

impl Regime {
    pub fn sample_len<R: Rng + ?Sized>(self, rng: &mut R) -> usize {
        match self {
            Regime::D1 => 4,
            Regime::D2 => rng.gen_range(1..=12),
        }
    }

    pub fn max_len(self) -> usize {
        match self {
            Regime::D1 => 4,
            Regime::D2 => 12,
        }
    }
}

/// Value ranges for sampled inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRanges {
    pub list_elem: RangeInclusive<i32>,
    pub int: RangeInclusive<i32>,
    pub list_len: RangeInclusive<usize>,
}

impl Default for InputRanges {
    fn default() -> Self {
        InputRanges {
            list_elem: -64..=64,
            int: -4..=24,
            list_len: 0..=MAX_LIST_LEN,
        }
    }
}

impl InputRanges {
    /// Ranges for generated queries: every list has exactly 20 elements.
    pub fn query() -> Self {
        InputRanges {
            list_len: MAX_LIST_LEN..=MAX_LIST_LEN,
            ..InputRanges::default()
        }
    }
}

fn sample_signature<R: Rng + ?Sized>(rng: &mut R) -> Vec<Type> {
    loop {
        let n = rng.gen_range(1..=3);
        let sig: Vec<Type> = (0..n)
            .map(|_| if rng.gen_bool(0.7) { Type::List } else { Type::Int })
            .collect();
        if sig.contains(&Type::List) {
            return sig;
        }
    }
}

/// Argument tuples for `f` over `types` that mention `must` when given.
pub(crate) fn arg_choices(f: Func, types: &[Type], must: Option<usize>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for &want in f.arg_types() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                types
                    .iter()
                    .enumerate()
                    .filter(move |&(_, &t)| t == want)
                    .map(move |(i, _)| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
            })
            .collect();
    }
    if let Some(m) = must {
        out.retain(|a| a.contains(&m));
    }
    out
}

/// Sample a well-typed program of exactly `len` statements over a random
/// signature. Every statement after the first consumes its predecessor's
/// result, so no statement is dead.
pub fn sample_list_program<R: Rng + ?Sized>(len: usize, rng: &mut R) -> ListProgram {
    let sig = sample_signature(rng);
    sample_list_program_with(sig, len, rng)
}

/// As [`sample_list_program`] with a fixed signature containing a LIST slot.
pub fn sample_list_program_with<R: Rng + ?Sized>(sig: Vec<Type>, len: usize, rng: &mut R) -> ListProgram {
    let len = len.max(1);
    let funcs = Func::all();
    let mut types = sig.clone();
    let mut stmts = Vec::with_capacity(len);
    for i in 0..len {
        let must = (i > 0).then(|| types.len() - 1);
        let options: Vec<(Func, Vec<Vec<usize>>)> = funcs
            .iter()
            .map(|&f| (f, arg_choices(f, &types, must)))
            .filter(|(_, c)| !c.is_empty())
            .collect();
        let (func, choices) = options.choose(rng).expect("a LIST variable is always available");
        let args = choices.choose(rng).expect("non-empty").clone();
        types.push(func.ret_type());
        stmts.push(Statement { func: *func, args });
    }
    ListProgram::new(sig, stmts).expect("sampler only builds well-typed programs")
}

pub fn sample_value<R: Rng + ?Sized>(ty: Type, ranges: &InputRanges, rng: &mut R) -> Value {
    match ty {
        Type::Int => Value::Int(rng.gen_range(ranges.int.clone())),
        Type::List => {
            let n = rng.gen_range(ranges.list_len.clone()).min(MAX_LIST_LEN);
            Value::List((0..n).map(|_| rng.gen_range(ranges.list_elem.clone())).collect())
        }
    }
}

pub fn sample_list_input<R: Rng + ?Sized>(slots: &[Type], ranges: &InputRanges, rng: &mut R) -> Vec<Value> {
    slots.iter().map(|&t| sample_value(t, ranges, rng)).collect()
}

/// The all-`Null` tuple used as the first observation before any query.
pub fn list_start_signal(slots: usize) -> Vec<Value> {
    vec![Value::Null; slots]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_and_exact_length() {
        let a = sample_list_program(4, &mut ChaCha8Rng::seed_from_u64(1));
        let b = sample_list_program(4, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert_eq!(a.prune(), a);
    }

    #[test]
    fn length_one_reads_only_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = sample_list_program(1, &mut rng);
            assert_eq!(p.len(), 1);
            assert!(p.statements()[0].args.iter().all(|&a| a < p.inputs().len()));
        }
    }

    #[test]
    fn thousand_d1_programs_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ranges = InputRanges::default();
        for _ in 0..1000 {
            let p = sample_list_program(4, &mut rng);
            assert_eq!(p.prune().len(), 4);
            for _ in 0..5 {
                let x = sample_list_input(p.inputs(), &ranges, &mut rng);
                assert!(x.iter().all(Value::in_range));
                let y = p.execute(&x).unwrap();
                assert!(y.in_range());
            }
        }
    }

    #[test]
    fn d2_lengths_vary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lens: Vec<usize> = (0..200)
            .map(|_| sample_list_program(Regime::D2.sample_len(&mut rng), &mut rng).len())
            .collect();
        assert!(lens.iter().all(|&n| (1..=12).contains(&n)));
        assert!(lens.contains(&1) && lens.contains(&12));
    }

    #[test]
    fn start_signal_and_query_inputs() {
        assert_eq!(list_start_signal(3), vec![Value::Null, Value::Null, Value::Null]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = InputRanges::query();
        for _ in 0..100 {
            let x = sample_list_input(&[Type::List, Type::Int], &q, &mut rng);
            assert!(matches!(&x[0], Value::List(v) if v.len() == 20));
        }
        let mut saw_empty = false;
        for _ in 0..500 {
            if let Value::List(v) = sample_value(Type::List, &InputRanges::default(), &mut rng) {
                saw_empty |= v.is_empty();
            }
        }
        assert!(saw_empty);
    }
}
