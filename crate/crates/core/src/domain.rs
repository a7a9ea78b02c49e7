//! The interface query strategies, synthesizers and the harness share, and
//! its Karel, list and lookup-table instances.

use std::fmt::Debug;
use std::hash::Hash;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::karel::{
    branch_coverage, build_start_world, execute_fast, parse_karel, CrashMode, CrashReason, Dir, KarelAst,
    KarelWorld, Outcome, WorldDensity, GRID,
};
use crate::listproc::{list_start_signal, parse_tuple, sample_list_input, InputRanges, ListProgram, Value};

/// A program domain: how programs answer inputs, how inputs are sampled,
/// and how everything is serialized.
pub trait Domain: Sync {
    type Program: Clone + Eq + Hash + Ord + Debug + Send + Sync;
    type Input: Clone + Eq + Hash + Debug + Send + Sync;
    type Output: Clone + Eq + Hash + Debug + Send + Sync;

    fn name(&self) -> &'static str;

    /// The oracle's answer to `x`.
    fn respond(&self, p: &Self::Program, x: &Self::Input) -> Self::Output;

    /// Whether a response constrains the program. Crash responses do not.
    fn is_evidence(&self, _y: &Self::Output) -> bool {
        true
    }

    /// Response used for functional-equivalence comparison.
    fn fe_response(&self, p: &Self::Program, x: &Self::Input) -> Self::Output {
        self.respond(p, x)
    }

    /// The fixed example that opens every query history.
    fn start_signal(&self, p: &Self::Program) -> (Self::Input, Self::Output);

    /// Draw an input suitable for `p`. Only the shape of `p`'s inputs is read.
    fn sample_input(&self, p: &Self::Program, rng: &mut dyn RngCore) -> Self::Input;

    fn encode_program(&self, p: &Self::Program) -> String;
    fn decode_program(&self, s: &str) -> Result<Self::Program, String>;
    fn encode_input(&self, x: &Self::Input) -> String;
    fn decode_input(&self, s: &str) -> Result<Self::Input, String>;
    fn encode_output(&self, y: &Self::Output) -> String;
    fn decode_output(&self, s: &str) -> Result<Self::Output, String>;

    /// Fixed-length numeric description of one example.
    fn features(&self, x: &Self::Input, y: &Self::Output) -> Vec<f64>;
    fn feature_dim(&self) -> usize;
    fn program_tokens(&self, p: &Self::Program) -> Vec<String>;

    /// Program size used to rank candidates.
    fn program_size(&self, p: &Self::Program) -> usize;

    /// Union branch coverage of `p` over `inputs`, where defined.
    fn coverage(&self, _p: &Self::Program, _inputs: &[Self::Input]) -> Option<f64> {
        None
    }
}

/// A Karel response: the final world, or why execution stopped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KarelResponse {
    World(KarelWorld),
    Crash(CrashReason),
}

impl KarelResponse {
    pub fn world(&self) -> Option<&KarelWorld> {
        match self {
            KarelResponse::World(w) => Some(w),
            KarelResponse::Crash(_) => None,
        }
    }
}

fn crash_name(r: CrashReason) -> &'static str {
    match r {
        CrashReason::PickEmpty => "pick_empty",
        CrashReason::PutOverflow => "put_overflow",
        CrashReason::HitObstacleOrBoundary => "hit_wall",
        CrashReason::InfiniteLoop => "infinite_loop",
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KarelDomain {
    pub density: WorldDensity,
}

impl KarelDomain {
    fn run(&self, p: &KarelAst, x: &KarelWorld, mode: CrashMode) -> KarelResponse {
        let out = execute_fast(p, x, mode);
        match out.kind {
            Outcome::Ok(w) => KarelResponse::World(w),
            _ => KarelResponse::Crash(out.crash_reason().expect("not ok")),
        }
    }
}

const KAREL_FEATURES: usize = 42;

impl Domain for KarelDomain {
    type Program = KarelAst;
    type Input = KarelWorld;
    type Output = KarelResponse;

    fn name(&self) -> &'static str {
        "karel"
    }

    fn respond(&self, p: &KarelAst, x: &KarelWorld) -> KarelResponse {
        self.run(p, x, CrashMode::Halt)
    }

    fn is_evidence(&self, y: &KarelResponse) -> bool {
        matches!(y, KarelResponse::World(_))
    }

    fn fe_response(&self, p: &KarelAst, x: &KarelWorld) -> KarelResponse {
        self.run(p, x, CrashMode::StayStill)
    }

    fn start_signal(&self, _p: &KarelAst) -> (KarelWorld, KarelResponse) {
        let w = build_start_world();
        (w.clone(), KarelResponse::World(w))
    }

    fn sample_input(&self, _p: &KarelAst, rng: &mut dyn RngCore) -> KarelWorld {
        crate::karel::sample_world_with(self.density, rng)
    }

    fn encode_program(&self, p: &KarelAst) -> String {
        p.pretty()
    }

    fn decode_program(&self, s: &str) -> Result<KarelAst, String> {
        parse_karel(s).map_err(|e| e.to_string())
    }

    fn encode_input(&self, x: &KarelWorld) -> String {
        x.encode()
    }

    fn decode_input(&self, s: &str) -> Result<KarelWorld, String> {
        KarelWorld::decode(s).map_err(|e| e.to_string())
    }

    fn encode_output(&self, y: &KarelResponse) -> String {
        match y {
            KarelResponse::World(w) => w.encode(),
            KarelResponse::Crash(r) => format!("CRASH:{}", crash_name(*r)),
        }
    }

    fn decode_output(&self, s: &str) -> Result<KarelResponse, String> {
        if let Some(name) = s.strip_prefix("CRASH:") {
            return [
                CrashReason::PickEmpty,
                CrashReason::PutOverflow,
                CrashReason::HitObstacleOrBoundary,
                CrashReason::InfiniteLoop,
            ]
            .into_iter()
            .find(|&r| crash_name(r) == name)
            .map(KarelResponse::Crash)
            .ok_or_else(|| format!("unknown crash reason {name:?}"));
        }
        self.decode_input(s).map(KarelResponse::World)
    }

    fn features(&self, x: &KarelWorld, y: &KarelResponse) -> Vec<f64> {
        let mut f = Vec::with_capacity(KAREL_FEATURES);
        let scale = (GRID - 1) as f64;
        let push_agent = |f: &mut Vec<f64>, w: &KarelWorld| {
            let a = w.agent();
            f.push(a.row as f64 / scale);
            f.push(a.col as f64 / scale);
            for d in Dir::ALL {
                f.push(f64::from(u8::from(a.facing == d)));
            }
        };
        push_agent(&mut f, x);
        let out = y.world().unwrap_or(x);
        push_agent(&mut f, out);
        let (a, b) = (x.agent(), out.agent());
        f.push((b.row as f64 - a.row as f64) / scale);
        f.push((b.col as f64 - a.col as f64) / scale);
        let (tin, tout) = (f64::from(x.total_markers()), f64::from(out.total_markers()));
        f.extend([tin / 20.0, tout / 20.0, (tout - tin) / 5.0]);
        for at in [a, b] {
            f.push(f64::from(x.cell(at.row, at.col).markers()) / 10.0);
            f.push(f64::from(out.cell(at.row, at.col).markers()) / 10.0);
        }
        let mut blocks = [0.0; 16];
        for (i, (ci, co)) in x.cells().iter().zip(out.cells().iter()).enumerate() {
            let (r, c) = (i / GRID, i % GRID);
            blocks[(r / 4) * 4 + c / 4] += f64::from(co.markers()) - f64::from(ci.markers());
        }
        f.extend(blocks.iter().map(|d| d / 4.0));
        let flag = |r: Option<CrashReason>| f64::from(u8::from(matches!(y, KarelResponse::Crash(c) if Some(*c) == r)));
        f.push(f64::from(u8::from(y.world().is_some())));
        for r in [
            CrashReason::PickEmpty,
            CrashReason::PutOverflow,
            CrashReason::HitObstacleOrBoundary,
            CrashReason::InfiniteLoop,
        ] {
            f.push(flag(Some(r)));
        }
        debug_assert_eq!(f.len(), KAREL_FEATURES);
        f
    }

    fn feature_dim(&self) -> usize {
        KAREL_FEATURES
    }

    fn program_tokens(&self, p: &KarelAst) -> Vec<String> {
        p.tokens()
    }

    fn program_size(&self, p: &KarelAst) -> usize {
        p.size()
    }

    fn coverage(&self, p: &KarelAst, inputs: &[KarelWorld]) -> Option<f64> {
        Some(branch_coverage(p, inputs))
    }
}

/// The list DSL. Inputs are drawn from `ranges`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListDomain {
    pub ranges: InputRanges,
}

impl Default for ListDomain {
    fn default() -> Self {
        ListDomain {
            ranges: InputRanges::query(),
        }
    }
}

const LIST_SLOTS: usize = 3;
const VALUE_BLOCK: usize = 14;
const DIFF_BLOCK: usize = 7;
const LIST_FEATURES: usize = (LIST_SLOTS + 1) * VALUE_BLOCK + DIFF_BLOCK;

fn value_block(v: Option<&Value>, out: &mut Vec<f64>) {
    let start = out.len();
    out.resize(start + VALUE_BLOCK, 0.0);
    let b = &mut out[start..];
    match v {
        None => {}
        Some(Value::Null) => b[0] = 1.0,
        Some(Value::Int(x)) => {
            b[1] = 1.0;
            b[3] = f64::from(*x) / 64.0;
        }
        Some(Value::List(xs)) => {
            b[2] = 1.0;
            b[4] = xs.len() as f64 / 20.0;
            if !xs.is_empty() {
                let n = xs.len() as f64;
                b[5] = xs.iter().map(|&x| f64::from(x)).sum::<f64>() / n / 64.0;
                b[6] = f64::from(*xs.iter().min().expect("non-empty")) / 64.0;
                b[7] = f64::from(*xs.iter().max().expect("non-empty")) / 64.0;
            }
            for (slot, &x) in b[8..].iter_mut().zip(xs) {
                *slot = f64::from(x) / 64.0;
            }
        }
    }
}

impl Domain for ListDomain {
    type Program = ListProgram;
    type Input = Vec<Value>;
    type Output = Value;

    fn name(&self) -> &'static str {
        "list"
    }

    fn respond(&self, p: &ListProgram, x: &Vec<Value>) -> Value {
        p.execute(x).unwrap_or(Value::Null)
    }

    fn start_signal(&self, p: &ListProgram) -> (Vec<Value>, Value) {
        (list_start_signal(p.inputs().len()), Value::Null)
    }

    fn sample_input(&self, p: &ListProgram, rng: &mut dyn RngCore) -> Vec<Value> {
        sample_list_input(p.inputs(), &self.ranges, rng)
    }

    fn encode_program(&self, p: &ListProgram) -> String {
        p.to_string().replace('\n', "; ")
    }

    fn decode_program(&self, s: &str) -> Result<ListProgram, String> {
        s.parse().map_err(|e: crate::listproc::ListError| e.to_string())
    }

    fn encode_input(&self, x: &Vec<Value>) -> String {
        crate::listproc::format_tuple(x)
    }

    fn decode_input(&self, s: &str) -> Result<Vec<Value>, String> {
        parse_tuple(s).map_err(|e| e.to_string())
    }

    fn encode_output(&self, y: &Value) -> String {
        y.to_string()
    }

    fn decode_output(&self, s: &str) -> Result<Value, String> {
        s.parse().map_err(|e: crate::listproc::ListError| e.to_string())
    }

    fn features(&self, x: &Vec<Value>, y: &Value) -> Vec<f64> {
        let mut f = Vec::with_capacity(LIST_FEATURES);
        for slot in 0..LIST_SLOTS {
            value_block(x.get(slot), &mut f);
        }
        value_block(Some(y), &mut f);
        let first_list = x.iter().find_map(|v| match v {
            Value::List(xs) => Some(xs),
            _ => None,
        });
        let mut diff = [0.0; DIFF_BLOCK];
        match (first_list, y) {
            (Some(xs), Value::List(ys)) => {
                diff[0] = (ys.len() as f64 - xs.len() as f64) / 20.0;
                for (d, (a, b)) in diff[1..].iter_mut().zip(xs.iter().zip(ys)) {
                    *d = (f64::from(*b) - f64::from(*a)) / 64.0;
                }
            }
            (Some(xs), Value::Int(v)) => {
                diff[0] = f64::from(*v) / 64.0 - xs.len() as f64 / 20.0;
                if let Some(&h) = xs.first() {
                    diff[1] = (f64::from(*v) - f64::from(h)) / 64.0;
                }
            }
            _ => {}
        }
        f.extend(diff);
        debug_assert_eq!(f.len(), LIST_FEATURES);
        f
    }

    fn feature_dim(&self) -> usize {
        LIST_FEATURES
    }

    fn program_tokens(&self, p: &ListProgram) -> Vec<String> {
        p.tokens()
    }

    fn program_size(&self, p: &ListProgram) -> usize {
        p.len()
    }
}

/// A finite domain given by a response table: `table[p][q]` is program
/// `p`'s boolean answer to query `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDomain {
    pub table: Vec<Vec<bool>>,
    pub query_names: Vec<String>,
}

impl TableDomain {
    pub fn new(table: Vec<Vec<bool>>, query_names: Vec<String>) -> Self {
        assert!(table.iter().all(|row| row.len() == query_names.len()));
        TableDomain { table, query_names }
    }

    /// Eight programs answering four queries `q_A..q_D`; each query splits
    /// the programs evenly.
    pub fn worked_example() -> Self {
        let rows = ["1000", "1001", "1011", "1110", "0110", "0111", "0100", "0001"];
        let table = rows
            .iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect();
        let names = ["q_A", "q_B", "q_C", "q_D"].map(String::from).to_vec();
        TableDomain::new(table, names)
    }

    pub fn programs(&self) -> Vec<usize> {
        (0..self.table.len()).collect()
    }

    pub fn queries(&self) -> Vec<usize> {
        (0..self.query_names.len()).collect()
    }

    pub fn query_index(&self, name: &str) -> Option<usize> {
        self.query_names.iter().position(|n| n == name)
    }
}

impl Domain for TableDomain {
    type Program = usize;
    type Input = usize;
    type Output = bool;

    fn name(&self) -> &'static str {
        "table"
    }

    fn respond(&self, p: &usize, x: &usize) -> bool {
        self.table[*p][*x]
    }

    fn start_signal(&self, _p: &usize) -> (usize, bool) {
        (usize::MAX, false)
    }

    fn sample_input(&self, _p: &usize, rng: &mut dyn RngCore) -> usize {
        rng.gen_range(0..self.query_names.len())
    }

    fn encode_program(&self, p: &usize) -> String {
        format!("p{p}")
    }

    fn decode_program(&self, s: &str) -> Result<usize, String> {
        s.strip_prefix('p')
            .and_then(|n| n.parse().ok())
            .filter(|&n| n < self.table.len())
            .ok_or_else(|| format!("unknown program {s:?}"))
    }

    fn encode_input(&self, x: &usize) -> String {
        self.query_names
            .get(*x)
            .cloned()
            .unwrap_or_else(|| "start".to_string())
    }

    fn decode_input(&self, s: &str) -> Result<usize, String> {
        if s == "start" {
            return Ok(usize::MAX);
        }
        self.query_index(s).ok_or_else(|| format!("unknown query {s:?}"))
    }

    fn encode_output(&self, y: &bool) -> String {
        y.to_string()
    }

    fn decode_output(&self, s: &str) -> Result<bool, String> {
        s.parse().map_err(|_| format!("bad response {s:?}"))
    }

    fn features(&self, x: &usize, y: &bool) -> Vec<f64> {
        let mut f = vec![0.0; self.feature_dim()];
        if *x < self.query_names.len() {
            f[2 * x + usize::from(*y)] = 1.0;
        }
        f
    }

    fn feature_dim(&self) -> usize {
        2 * self.query_names.len()
    }

    fn program_tokens(&self, p: &usize) -> Vec<String> {
        vec![self.encode_program(p)]
    }

    fn program_size(&self, _p: &usize) -> usize {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::listproc::Type;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn karel_round_trips_and_features() {
        let d = KarelDomain::default();
        let p = parse_karel("def run(): move(); putMarker()").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = d.sample_input(&p, &mut rng);
            let y = d.respond(&p, &x);
            assert_eq!(d.decode_input(&d.encode_input(&x)).unwrap(), x);
            assert_eq!(d.decode_output(&d.encode_output(&y)).unwrap(), y);
            let f = d.features(&x, &y);
            assert_eq!(f.len(), d.feature_dim());
            assert!(f.iter().all(|v| v.is_finite()));
        }
        assert_eq!(d.decode_program(&d.encode_program(&p)).unwrap(), p);
        let crash = KarelResponse::Crash(CrashReason::PickEmpty);
        assert!(!d.is_evidence(&crash));
        assert_eq!(d.decode_output(&d.encode_output(&crash)).unwrap(), crash);
    }

    #[test]
    fn karel_start_signal_is_centered_world() {
        let d = KarelDomain::default();
        let (x, y) = d.start_signal(&KarelAst::default());
        assert_eq!(x, build_start_world());
        assert_eq!(y.world(), Some(&x));
    }

    #[test]
    fn list_round_trips_and_features() {
        let d = ListDomain::default();
        let p: ListProgram = "v0 = INPUT LIST\nv1 = INPUT INT\nv2 = TAKE v1 v0".parse().unwrap();
        assert_eq!(d.decode_program(&d.encode_program(&p)).unwrap(), p);
        assert_eq!(p.inputs(), &[Type::List, Type::Int]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let x = d.sample_input(&p, &mut rng);
            let y = d.respond(&p, &x);
            assert_eq!(d.decode_input(&d.encode_input(&x)).unwrap(), x);
            assert_eq!(d.decode_output(&d.encode_output(&y)).unwrap(), y);
            assert_eq!(d.features(&x, &y).len(), d.feature_dim());
        }
        let (x, y) = d.start_signal(&p);
        assert_eq!(x, vec![Value::Null, Value::Null]);
        assert_eq!(y, Value::Null);
    }

    #[test]
    fn worked_table_splits_evenly() {
        let d = TableDomain::worked_example();
        for q in d.queries() {
            let yes = d.programs().iter().filter(|&&p| d.respond(&p, &q)).count();
            assert_eq!(yes, 4);
        }
        assert_eq!(d.decode_input("q_C").unwrap(), 2);
    }
}
