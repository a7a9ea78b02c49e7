//! Seeded generators for Karel programs and worlds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ast::{Action, Cond, KarelAst, Sensor, Stmt};
use super::world::{Agent, Cell, Dir, KarelWorld, CELLS, GRID, MAX_MARKERS};

/// Shape bounds for sampled programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramBounds {
    /// Maximum nesting of control structures.
    pub max_depth: usize,
    /// Maximum number of statements (actions and control structures).
    pub max_stmts: usize,
}

impl Default for ProgramBounds {
    fn default() -> Self {
        ProgramBounds {
            max_depth: 2,
            max_stmts: 5,
        }
    }
}

/// Densities for sampled worlds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldDensity {
    pub obstacle: f64,
    pub marker: f64,
}

impl Default for WorldDensity {
    fn default() -> Self {
        WorldDensity {
            obstacle: 0.1,
            marker: 0.15,
        }
    }
}

const CONTROL_PROB: f64 = 0.35;
const CONTINUE_PROB: f64 = 0.6;
const NOT_PROB: f64 = 0.25;

fn sample_cond<R: Rng + ?Sized>(rng: &mut R) -> Cond {
    let sensor = Sensor::ALL[rng.gen_range(0..Sensor::ALL.len())];
    let c = Cond::Sensor(sensor);
    if rng.gen_bool(NOT_PROB) {
        c.not()
    } else {
        c
    }
}

fn sample_action<R: Rng + ?Sized>(rng: &mut R) -> Action {
    Action::ALL[rng.gen_range(0..Action::ALL.len())]
}

fn sample_seq<R: Rng + ?Sized>(depth: usize, remaining: &mut usize, rng: &mut R) -> Vec<Stmt> {
    let mut seq = Vec::new();
    while *remaining > 0 && (seq.is_empty() || rng.gen_bool(CONTINUE_PROB)) {
        *remaining -= 1;
        let control = depth > 0 && *remaining >= 1 && rng.gen_bool(CONTROL_PROB);
        if !control {
            seq.push(Stmt::Action(sample_action(rng)));
            continue;
        }
        let stmt = match rng.gen_range(0..4) {
            0 => Stmt::If(sample_cond(rng), sample_seq(depth - 1, remaining, rng)),
            1 => Stmt::While(sample_cond(rng), sample_seq(depth - 1, remaining, rng)),
            2 => Stmt::Repeat(rng.gen_range(2..=9), sample_seq(depth - 1, remaining, rng)),
            _ => {
                let cond = sample_cond(rng);
                let then = sample_seq(depth - 1, remaining, rng);
                if *remaining == 0 {
                    Stmt::If(cond, then)
                } else {
                    Stmt::IfElse(cond, then, sample_seq(depth - 1, remaining, rng))
                }
            }
        };
        seq.push(stmt);
    }
    seq
}

/// Sample a grammar-valid program within `bounds`.
pub fn sample_program<R: Rng + ?Sized>(bounds: ProgramBounds, rng: &mut R) -> KarelAst {
    let max = bounds.max_stmts.max(1);
    let mut remaining = rng.gen_range(1..=max);
    KarelAst::new(sample_seq(bounds.max_depth, &mut remaining, rng))
}

/// Sample a 16×16 world with the default densities.
pub fn sample_world<R: Rng + ?Sized>(rng: &mut R) -> KarelWorld {
    sample_world_with(WorldDensity::default(), rng)
}

pub fn sample_world_with<R: Rng + ?Sized>(density: WorldDensity, rng: &mut R) -> KarelWorld {
    let mut cells = [Cell::Empty; CELLS];
    for cell in cells.iter_mut() {
        if rng.gen_bool(density.obstacle) {
            *cell = Cell::Obstacle;
        } else if rng.gen_bool(density.marker) {
            // Small piles are more common than large ones.
            let n = 1 + (rng.gen::<f64>().powi(3) * f64::from(MAX_MARKERS)) as u8;
            *cell = Cell::Markers(n.min(MAX_MARKERS));
        }
    }
    let free: Vec<usize> = (0..CELLS).filter(|&i| cells[i] != Cell::Obstacle).collect();
    let at = if free.is_empty() {
        let i = rng.gen_range(0..CELLS);
        cells[i] = Cell::Empty;
        i
    } else {
        free[rng.gen_range(0..free.len())]
    };
    let agent = Agent {
        row: at / GRID,
        col: at % GRID,
        facing: Dir::ALL[rng.gen_range(0..4)],
    };
    KarelWorld::from_parts(cells, agent).expect("sampled world satisfies invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::karel::parse::parse_karel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_program() {
        let b = ProgramBounds {
            max_depth: 2,
            max_stmts: 5,
        };
        let a = sample_program(b, &mut ChaCha8Rng::seed_from_u64(7));
        let c = sample_program(b, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, c);
    }

    #[test]
    fn degenerate_bounds_give_one_action() {
        let b = ProgramBounds {
            max_depth: 0,
            max_stmts: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = sample_program(b, &mut rng);
            assert_eq!(p.body.len(), 1);
            assert!(matches!(p.body[0], Stmt::Action(_)));
        }
    }

    #[test]
    fn thousand_samples_respect_bounds_and_round_trip() {
        let b = ProgramBounds {
            max_depth: 2,
            max_stmts: 5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = sample_program(b, &mut rng);
            assert!(p.depth() <= 2);
            assert_eq!(parse_karel(&p.pretty()).unwrap(), p);
        }
    }

    #[test]
    fn thousand_worlds_are_valid_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            assert!(sample_world(&mut rng).validate().is_ok());
        }
        let a = sample_world(&mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_world(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
