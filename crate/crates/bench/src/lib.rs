//! Seeded fixtures shared by the criterion benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsynth_core::karel::{sample_program, sample_world, KarelAst, KarelWorld, ProgramBounds};
use qsynth_core::listproc::{sample_list_input, sample_list_program, InputRanges, ListProgram, Value};
use qsynth_core::{Domain, ListDomain};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` sampled Karel programs and `n` sampled worlds.
pub fn karel_fixture(n: usize) -> (Vec<KarelAst>, Vec<KarelWorld>) {
    let mut r = rng(11);
    let programs = (0..n).map(|_| sample_program(ProgramBounds::default(), &mut r)).collect();
    let worlds = (0..n).map(|_| sample_world(&mut r)).collect();
    (programs, worlds)
}

/// `n` sampled list programs of length `len`, each with one input.
pub fn list_fixture(n: usize, len: usize) -> Vec<(ListProgram, Vec<Value>)> {
    let mut r = rng(12);
    let ranges = InputRanges::query();
    (0..n)
        .map(|_| {
            let p = sample_list_program(len, &mut r);
            let x = sample_list_input(p.inputs(), &ranges, &mut r);
            (p, x)
        })
        .collect()
}

/// A pool of `pool` list programs sharing one signature and `queries`
/// candidate inputs for it.
pub fn selection_fixture(pool: usize, queries: usize) -> (ListDomain, Vec<ListProgram>, Vec<Vec<Value>>) {
    let domain = ListDomain::default();
    let mut r = rng(13);
    let first = sample_list_program(4, &mut r);
    let mut programs = vec![first.clone()];
    while programs.len() < pool {
        let p = qsynth_core::listproc::sample_list_program_with(first.inputs().to_vec(), 4, &mut r);
        if !programs.contains(&p) {
            programs.push(p);
        }
    }
    let inputs = (0..queries).map(|_| domain.sample_input(&first, &mut r)).collect();
    (domain, programs, inputs)
}
