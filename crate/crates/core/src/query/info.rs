//! Information measures over a uniform posterior, computed from a table of
//! program responses.
//!
//! A response that is not evidence (a Karel crash) tells the observer
//! nothing, so the posterior after observing it is the prior.

use std::collections::HashMap;

use crate::domain::Domain;

const TIE: f64 = 1e-12;

/// Responses of `n_prog` programs to `n_query` queries, interned per query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseMatrix {
    n_prog: usize,
    n_query: usize,
    ids: Vec<u32>,
    /// `evidence[q][id]`.
    evidence: Vec<Vec<bool>>,
}

impl ResponseMatrix {
    pub fn build<D: Domain>(domain: &D, programs: &[&D::Program], queries: &[D::Input]) -> Self {
        let (n_prog, n_query) = (programs.len(), queries.len());
        let mut ids = vec![0u32; n_prog * n_query];
        let mut evidence = Vec::with_capacity(n_query);
        for (q, x) in queries.iter().enumerate() {
            let mut seen: HashMap<D::Output, u32> = HashMap::new();
            let mut ev = Vec::new();
            for (p, prog) in programs.iter().enumerate() {
                let y = domain.respond(prog, x);
                let next = seen.len() as u32;
                let id = *seen.entry(y).or_insert_with_key(|y| {
                    ev.push(domain.is_evidence(y));
                    next
                });
                ids[p * n_query + q] = id;
            }
            evidence.push(ev);
        }
        ResponseMatrix {
            n_prog,
            n_query,
            ids,
            evidence,
        }
    }

    /// Matrix of a boolean table, `table[p][q]`.
    pub fn from_table(table: &[Vec<bool>]) -> Self {
        let n_prog = table.len();
        let n_query = table.first().map_or(0, Vec::len);
        let ids = table.iter().flat_map(|r| r.iter().map(|&b| u32::from(b))).collect();
        ResponseMatrix {
            n_prog,
            n_query,
            ids,
            evidence: vec![vec![true, true]; n_query],
        }
    }

    pub fn programs(&self) -> usize {
        self.n_prog
    }

    pub fn queries(&self) -> usize {
        self.n_query
    }

    pub fn id(&self, p: usize, q: usize) -> u32 {
        self.ids[p * self.n_query + q]
    }

    pub fn is_evidence(&self, p: usize, q: usize) -> bool {
        self.evidence[q][self.id(p, q) as usize]
    }

    /// Programs of `subset` grouped by response to `q`, in first-seen order,
    /// with a flag telling whether the response is evidence.
    pub fn split(&self, subset: &[usize], q: usize) -> Vec<(bool, Vec<usize>)> {
        let mut index: HashMap<u32, usize> = HashMap::new();
        let mut groups: Vec<(bool, Vec<usize>)> = Vec::new();
        for &p in subset {
            let id = self.id(p, q);
            let g = *index.entry(id).or_insert_with(|| {
                groups.push((self.evidence[q][id as usize], Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(p);
        }
        groups
    }
}

/// Shannon entropy in bits of a weight vector (zero weights ignored).
pub fn entropy_bits(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

fn uniform_entropy(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (n as f64).log2()
    }
}

/// Information gained about the program, in bits, from asking `q` when the
/// posterior is uniform over `subset`.
pub fn information_gain(m: &ResponseMatrix, subset: &[usize], q: usize) -> f64 {
    let n = subset.len();
    if n <= 1 {
        return 0.0;
    }
    let h = uniform_entropy(n);
    let expected: f64 = m
        .split(subset, q)
        .iter()
        .map(|(ev, g)| {
            let p = g.len() as f64 / n as f64;
            p * if *ev { uniform_entropy(g.len()) } else { h }
        })
        .sum();
    (h - expected).max(0.0)
}

/// Mutual information in bits between the program and the joint responses
/// to the fixed query tuple `qs`.
pub fn joint_information(m: &ResponseMatrix, subset: &[usize], qs: &[usize]) -> f64 {
    let n = subset.len();
    if n <= 1 {
        return 0.0;
    }
    let expected: f64 = subset
        .iter()
        .map(|&t| {
            let survivors = subset
                .iter()
                .filter(|&&p| {
                    qs.iter()
                        .all(|&q| !m.is_evidence(t, q) || m.id(p, q) == m.id(t, q))
                })
                .count();
            uniform_entropy(survivors)
        })
        .sum::<f64>()
        / n as f64;
    (uniform_entropy(n) - expected).max(0.0)
}

/// Expected information of the best adaptive `depth`-query plan from `subset`.
pub fn lookahead_value(m: &ResponseMatrix, subset: &[usize], depth: usize) -> f64 {
    if depth == 0 || subset.len() <= 1 {
        return 0.0;
    }
    (0..m.queries())
        .map(|q| first_query_value(m, subset, q, depth))
        .fold(0.0, f64::max)
}

/// Expected information of asking `q` first and then following the best
/// adaptive plan for the remaining `depth - 1` queries.
pub fn first_query_value(m: &ResponseMatrix, subset: &[usize], q: usize, depth: usize) -> f64 {
    let n = subset.len();
    if depth == 0 || n <= 1 {
        return 0.0;
    }
    let gain = information_gain(m, subset, q);
    if depth == 1 {
        return gain;
    }
    let rest: f64 = m
        .split(subset, q)
        .iter()
        .map(|(ev, g)| {
            let p = g.len() as f64 / n as f64;
            let next = if *ev { g.as_slice() } else { subset };
            p * lookahead_value(m, next, depth - 1)
        })
        .sum();
    gain + rest
}

/// Index of the best query under `score`, ties broken by the smaller key.
pub fn argmax_by_key<K: Ord>(scores: &[f64], keys: &[K]) -> Option<usize> {
    argmax_lex(scores, &vec![0.0; scores.len()], keys)
}

/// Index of the best query under `primary`, then `secondary`, then the
/// smaller key.
pub fn argmax_lex<K: Ord>(primary: &[f64], secondary: &[f64], keys: &[K]) -> Option<usize> {
    let beats = |i: usize, b: usize| {
        let (p, bp) = (primary[i], primary[b]);
        if (p - bp).abs() > TIE {
            return p > bp;
        }
        let (s, bs) = (secondary[i], secondary[b]);
        if (s - bs).abs() > TIE {
            return s > bs;
        }
        keys[i] < keys[b]
    };
    let mut best: Option<usize> = None;
    for i in 0..primary.len() {
        best = match best {
            Some(b) if !beats(i, b) => Some(b),
            _ => Some(i),
        };
    }
    best
}

/// Best first query for a `depth`-step adaptive plan. Ties go to the larger
/// immediate gain, then the smaller key. Returns the query index and its
/// plan value.
pub fn ig_lookahead<K: Ord>(m: &ResponseMatrix, subset: &[usize], keys: &[K], depth: usize) -> Option<(usize, f64)> {
    let values: Vec<f64> = (0..m.queries())
        .map(|q| first_query_value(m, subset, q, depth.max(1)))
        .collect();
    let gains: Vec<f64> = (0..m.queries()).map(|q| information_gain(m, subset, q)).collect();
    argmax_lex(&values, &gains, keys).map(|i| (i, values[i]))
}

/// Every query index ordered as [`ig_lookahead`] prefers them.
pub fn ig_ranking<K: Ord>(m: &ResponseMatrix, subset: &[usize], keys: &[K], depth: usize) -> Vec<usize> {
    let values: Vec<f64> = (0..m.queries())
        .map(|q| first_query_value(m, subset, q, depth.max(1)))
        .collect();
    let gains: Vec<f64> = (0..m.queries()).map(|q| information_gain(m, subset, q)).collect();
    let mut order: Vec<usize> = (0..m.queries()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .total_cmp(&values[a])
            .then_with(|| gains[b].total_cmp(&gains[a]))
            .then_with(|| keys[a].cmp(&keys[b]))
    });
    order
}

/// Expected number of queries an optimal adaptive policy needs before the
/// posterior is a single program, counting `first` as the opening query
/// when given. Queries with non-evidence responses on the current subset
/// are not used.
pub fn expected_queries_to_isolate(m: &ResponseMatrix, subset: &[usize], first: Option<usize>) -> f64 {
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    match first {
        None => isolate(m, subset.to_vec(), &mut memo),
        Some(q) => after(m, subset, q, &mut memo).unwrap_or(f64::INFINITY),
    }
}

fn after(m: &ResponseMatrix, subset: &[usize], q: usize, memo: &mut HashMap<Vec<usize>, f64>) -> Option<f64> {
    let groups = m.split(subset, q);
    if groups.len() < 2 || groups.iter().any(|(ev, _)| !ev) {
        return None;
    }
    let n = subset.len() as f64;
    Some(
        1.0 + groups
            .into_iter()
            .map(|(_, g)| g.len() as f64 / n * isolate(m, g, memo))
            .sum::<f64>(),
    )
}

fn isolate(m: &ResponseMatrix, subset: Vec<usize>, memo: &mut HashMap<Vec<usize>, f64>) -> f64 {
    if subset.len() <= 1 {
        return 0.0;
    }
    if let Some(&v) = memo.get(&subset) {
        return v;
    }
    let best = (0..m.queries())
        .filter_map(|q| after(m, &subset, q, memo))
        .fold(f64::INFINITY, f64::min);
    let v = if best.is_finite() { best } else { 0.0 };
    memo.insert(subset, v);
    v
}
