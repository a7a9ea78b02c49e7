use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsynth_core::domain::{Domain, KarelDomain, ListDomain};
use qsynth_core::fspace::{entropy, gaussian_product_exact, DiagGaussian};
use qsynth_core::karel::{
    branch_coverage, execute_fast, parse_karel, sample_program, sample_world, CrashMode, Outcome, ProgramBounds,
};
use qsynth_core::listproc::{
    execute_list, sample_list_input, sample_list_program, sample_list_program_with, InputRanges, ListProgram, Value,
    INT_MAX, INT_MIN, MAX_LIST_LEN,
};
use qsynth_core::query::{argmax_by_key, ig_lookahead, information_gain, CandidatePool, ResponseMatrix};

fn in_range(v: &Value) -> bool {
    match v {
        Value::Int(x) => (INT_MIN..=INT_MAX).contains(x),
        Value::List(xs) => xs.len() <= MAX_LIST_LEN && xs.iter().all(|x| (INT_MIN..=INT_MAX).contains(x)),
        Value::Null => true,
    }
}

fn list_pool(seed: u64, n: usize) -> (ListDomain, Vec<ListProgram>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = sample_list_program(3, &mut rng);
    let mut pool = vec![first.clone()];
    for _ in 0..n {
        let p = sample_list_program_with(first.inputs().to_vec(), 3, &mut rng);
        if !pool.contains(&p) {
            pool.push(p);
        }
    }
    (ListDomain::default(), pool, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn list_values_stay_in_range(seed in any::<u64>(), len in 1usize..=12, lo in -300i32..0, hi in 0i32..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_list_program(len, &mut rng);
        let ranges = InputRanges { list_elem: lo..=hi, int: lo..=hi, list_len: 0..=MAX_LIST_LEN };
        let x: Vec<Value> = sample_list_input(p.inputs(), &ranges, &mut rng)
            .into_iter()
            .map(|v| match v {
                Value::Int(i) => Value::Int(i.clamp(INT_MIN, INT_MAX)),
                Value::List(xs) => Value::List(xs.into_iter().map(|i| i.clamp(INT_MIN, INT_MAX)).collect()),
                Value::Null => Value::Null,
            })
            .collect();
        if let Ok(y) = execute_list(&p, &x) {
            prop_assert!(in_range(&y), "{p} on {x:?} gave {y:?}");
        }
    }

    #[test]
    fn list_programs_round_trip_through_text(seed in any::<u64>(), len in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_list_program(len, &mut rng);
        let back: ListProgram = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn karel_programs_round_trip_and_stay_still_never_crashes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_program(ProgramBounds::default(), &mut rng);
        prop_assert_eq!(parse_karel(&p.pretty()).unwrap(), p.clone());
        let w = sample_world(&mut rng);
        let out = execute_fast(&p, &w, CrashMode::StayStill);
        prop_assert!(!matches!(out.kind, Outcome::Crash(_)));
        let again = execute_fast(&p, &w, CrashMode::StayStill);
        prop_assert_eq!(out, again);
    }

    #[test]
    fn karel_coverage_grows_with_inputs(seed in any::<u64>(), k in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_program(ProgramBounds::default(), &mut rng);
        let ws: Vec<_> = (0..8).map(|_| sample_world(&mut rng)).collect();
        let (a, b) = (branch_coverage(&p, &ws[..k]), branch_coverage(&p, &ws));
        prop_assert!((0.0..=1.0).contains(&a) && a <= b);
    }

    #[test]
    fn pools_shrink_and_keep_the_truth(seed in any::<u64>(), pick in 0usize..16) {
        let (d, programs, mut rng) = list_pool(seed, 15);
        let truth = programs[pick % programs.len()].clone();
        let mut pool = CandidatePool::new(programs);
        let mut last = pool.surviving();
        for _ in 0..5 {
            let x = d.sample_input(&truth, &mut rng);
            pool.posterior_update(&d, &x, &d.respond(&truth, &x)).unwrap();
            prop_assert!(pool.surviving() <= last);
            last = pool.surviving();
            let w: f64 = pool.weights().iter().sum();
            prop_assert!((w - 1.0).abs() < 1e-12);
        }
        prop_assert!(pool.survivors().any(|p| *p == truth));
    }

    #[test]
    fn information_gain_is_bounded_and_greedy_matches_lookahead_one(seed in any::<u64>()) {
        let (d, programs, mut rng) = list_pool(seed, 20);
        let refs: Vec<&ListProgram> = programs.iter().collect();
        let xs: Vec<Vec<Value>> = (0..12).map(|_| d.sample_input(&programs[0], &mut rng)).collect();
        let keys: Vec<String> = xs.iter().map(|x| d.encode_input(x)).collect();
        let m = ResponseMatrix::build(&d, &refs, &xs);
        let all: Vec<usize> = (0..refs.len()).collect();
        let gains: Vec<f64> = (0..xs.len()).map(|q| information_gain(&m, &all, q)).collect();
        let cap = (refs.len() as f64).log2() + 1e-12;
        prop_assert!(gains.iter().all(|&g| (-1e-12..=cap).contains(&g)));
        prop_assert_eq!(ig_lookahead(&m, &all, &keys, 1).map(|r| r.0), argmax_by_key(&gains, &keys));
    }

    #[test]
    fn gaussian_products_never_raise_entropy(
        mus in prop::collection::vec(-4.0f64..4.0, 1..8),
        lvs in prop::collection::vec(-4.0f64..4.0, 8),
        lvs2 in prop::collection::vec(-4.0f64..4.0, 8),
    ) {
        let d = mus.len();
        let a = DiagGaussian::new(mus.clone(), lvs[..d].to_vec()).unwrap();
        let b = DiagGaussian::new(mus.iter().map(|m| -m).collect(), lvs2[..d].to_vec()).unwrap();
        let (c, _) = gaussian_product_exact(&a, &b).unwrap();
        prop_assert!(entropy(&c) <= entropy(&a).min(entropy(&b)) + 1e-12);
    }
}

#[test]
fn karel_domain_responses_are_deterministic() {
    let d = KarelDomain::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let p = sample_program(ProgramBounds::default(), &mut rng);
        let w = d.sample_input(&p, &mut rng);
        assert_eq!(d.respond(&p, &w), d.respond(&p, &w));
        let y = d.respond(&p, &w);
        assert_eq!(d.decode_output(&d.encode_output(&y)).unwrap(), y);
        assert_eq!(d.decode_input(&d.encode_input(&w)).unwrap(), w);
    }
}
