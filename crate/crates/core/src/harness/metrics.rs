use serde::{Deserialize, Serialize};

use crate::domain::Domain;

/// The four success measures for one predicted program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricRow {
    /// Agrees with the truth on the query inputs.
    pub semantics: bool,
    /// Also agrees on the first held-out input.
    pub generalization: bool,
    /// Agrees on the query inputs and every held-out input.
    pub fe: bool,
    /// Same canonical text as the truth.
    pub exact: bool,
}

fn agrees<D: Domain>(domain: &D, p: &D::Program, truth: &D::Program, inputs: &[D::Input]) -> bool {
    inputs
        .iter()
        .all(|x| domain.fe_response(p, x) == domain.fe_response(truth, x))
}

/// Score `predicted` against `truth`. `heldout[0]` is the generalization
/// input. Responses are compared with the domain's equivalence response.
pub fn evaluate_metrics<D: Domain>(
    domain: &D,
    predicted: Option<&D::Program>,
    truth: &D::Program,
    examples: &[D::Input],
    heldout: &[D::Input],
) -> MetricRow {
    let Some(p) = predicted else {
        return MetricRow::default();
    };
    let semantics = agrees(domain, p, truth, examples);
    let generalization = semantics && agrees(domain, p, truth, &heldout[..heldout.len().min(1)]);
    let fe = generalization && agrees(domain, p, truth, heldout);
    MetricRow {
        semantics,
        generalization,
        fe,
        exact: domain.encode_program(p) == domain.encode_program(truth),
    }
}

/// Coverage of the truth by the semantics, generalization and FE example
/// sets, where the domain defines coverage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub semantics: f64,
    pub generalization: f64,
    pub fe: f64,
}

pub fn coverage_row<D: Domain>(
    domain: &D,
    truth: &D::Program,
    examples: &[D::Input],
    heldout: &[D::Input],
) -> Option<CoverageRow> {
    let six: Vec<D::Input> = examples.iter().chain(heldout.iter().take(1)).cloned().collect();
    let all: Vec<D::Input> = examples.iter().chain(heldout).cloned().collect();
    Some(CoverageRow {
        semantics: domain.coverage(truth, examples)?,
        generalization: domain.coverage(truth, &six)?,
        fe: domain.coverage(truth, &all)?,
    })
}

/// Mean coverage per example set over the rows that have one.
pub fn coverage_report<'a>(rows: impl IntoIterator<Item = &'a CoverageRow>) -> Option<CoverageRow> {
    let rows: Vec<&CoverageRow> = rows.into_iter().collect();
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    Some(CoverageRow {
        semantics: rows.iter().map(|r| r.semantics).sum::<f64>() / n,
        generalization: rows.iter().map(|r| r.generalization).sum::<f64>() / n,
        fe: rows.iter().map(|r| r.fe).sum::<f64>() / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{KarelDomain, ListDomain};
    use crate::karel::{parse_karel, sample_world};
    use crate::listproc::{ListProgram, Value};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lp(s: &str) -> ListProgram {
        format!("v0 = INPUT LIST\nv1 = {s} v0").parse().unwrap()
    }

    fn l(xs: &[i32]) -> Vec<Value> {
        vec![Value::List(xs.to_vec())]
    }

    #[test]
    fn truth_passes_everything() {
        let d = ListDomain::default();
        let t = lp("SORT");
        let m = evaluate_metrics(&d, Some(&t), &t, &[l(&[2, 1])], &[l(&[3, 1]), l(&[5])]);
        assert_eq!(
            m,
            MetricRow {
                semantics: true,
                generalization: true,
                fe: true,
                exact: true
            }
        );
    }

    #[test]
    fn wrong_on_first_heldout() {
        let d = ListDomain::default();
        let m = evaluate_metrics(&d, Some(&lp("MAP (*2)")), &lp("MAP (**2)"), &[l(&[2]), l(&[0])], &[l(&[3]), l(&[2])]);
        assert!(m.semantics && !m.generalization && !m.fe && !m.exact);
        let none = evaluate_metrics(&d, None, &lp("SORT"), &[l(&[2])], &[l(&[3])]);
        assert_eq!(none, MetricRow::default());
    }

    #[test]
    fn straight_line_programs_are_fully_covered() {
        let d = KarelDomain::default();
        let t = parse_karel("def run(): move(); turnLeft()").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<_> = (0..6).map(|_| sample_world(&mut rng)).collect();
        let row = coverage_row(&d, &t, &xs[..5], &xs[5..]).unwrap();
        assert_eq!((row.semantics, row.generalization, row.fe), (1.0, 1.0, 1.0));
        assert!(coverage_row(&ListDomain::default(), &lp("SORT"), &[l(&[1])], &[l(&[2])]).is_none());
    }

    #[test]
    fn coverage_grows_with_the_example_set() {
        let d = KarelDomain::default();
        let t = parse_karel("def run(): ifelse(markersPresent()): pickMarker() else: putMarker(); while(frontIsClear()): move()")
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let xs: Vec<_> = (0..100).map(|_| sample_world(&mut rng)).collect();
            let row = coverage_row(&d, &t, &xs[..5], &xs[5..]).unwrap();
            assert!(row.semantics <= row.generalization && row.generalization <= row.fe);
        }
    }
}
