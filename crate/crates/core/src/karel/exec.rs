//! Karel interpreter with crash handling and branch-coverage tracing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ast::{Action, Cond, KarelAst, Sensor, Stmt};
use super::world::KarelWorld;

/// Executions are cut off when the API-call counter reaches this value.
pub const MAX_API_CALLS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrashMode {
    /// Stop at the first crash.
    Halt,
    /// A crashing action leaves the state unchanged and execution continues.
    StayStill,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CrashReason {
    PickEmpty,
    PutOverflow,
    HitObstacleOrBoundary,
    InfiniteLoop,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Ok(KarelWorld),
    Crash(CrashReason),
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExecOutcome {
    pub kind: Outcome,
    pub api_calls: u64,
}

impl ExecOutcome {
    pub fn world(&self) -> Option<&KarelWorld> {
        match &self.kind {
            Outcome::Ok(w) => Some(w),
            _ => None,
        }
    }

    /// The crash reason, with a timeout reported as an infinite loop.
    pub fn crash_reason(&self) -> Option<CrashReason> {
        match self.kind {
            Outcome::Ok(_) => None,
            Outcome::Crash(r) => Some(r),
            Outcome::Timeout => Some(CrashReason::InfiniteLoop),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self.kind, Outcome::Ok(_))
    }
}

/// Branch sites reached during execution. Every `if`, `ifelse`, `while` and
/// `repeat` owns two consecutive ids in pre-order: the entry (then/body) arm
/// and the skip (else/loop-exit) arm.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageTrace {
    pub visited: BTreeSet<usize>,
    pub total: usize,
}

impl CoverageTrace {
    pub fn for_program(prog: &KarelAst) -> Self {
        CoverageTrace {
            visited: BTreeSet::new(),
            total: prog.branch_sites(),
        }
    }

    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.visited.len() as f64 / self.total as f64
        }
    }

    pub fn merge(&mut self, other: &CoverageTrace) {
        self.visited.extend(other.visited.iter().copied());
    }
}

enum Stop {
    Crash(CrashReason),
    Timeout,
}

struct Machine<'t> {
    world: KarelWorld,
    mode: CrashMode,
    calls: u64,
    trace: Option<&'t mut BTreeSet<usize>>,
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), Stop> {
        self.calls += 1;
        if self.calls >= MAX_API_CALLS {
            Err(Stop::Timeout)
        } else {
            Ok(())
        }
    }

    fn visit(&mut self, site: usize) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.insert(site);
        }
    }

    fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    fn action(&mut self, action: Action) -> Result<(), Stop> {
        self.tick()?;
        let (done, reason) = match action {
            Action::Move => (self.world.try_move(), CrashReason::HitObstacleOrBoundary),
            Action::TurnLeft => {
                self.world.turn_left();
                (true, CrashReason::HitObstacleOrBoundary)
            }
            Action::TurnRight => {
                self.world.turn_right();
                (true, CrashReason::HitObstacleOrBoundary)
            }
            Action::PickMarker => (self.world.try_pick(), CrashReason::PickEmpty),
            Action::PutMarker => (self.world.try_put(), CrashReason::PutOverflow),
        };
        match (done, self.mode) {
            (true, _) | (false, CrashMode::StayStill) => Ok(()),
            (false, CrashMode::Halt) => Err(Stop::Crash(reason)),
        }
    }

    fn cond(&mut self, cond: &Cond) -> Result<bool, Stop> {
        match cond {
            Cond::Not(inner) => Ok(!self.cond(inner)?),
            Cond::Sensor(sensor) => {
                self.tick()?;
                let facing = self.world.agent().facing;
                Ok(match sensor {
                    Sensor::FrontIsClear => self.world.is_clear(facing),
                    Sensor::LeftIsClear => self.world.is_clear(facing.left()),
                    Sensor::RightIsClear => self.world.is_clear(facing.right()),
                    Sensor::MarkersPresent => self.world.markers_here() > 0,
                    Sensor::NoMarkersPresent => self.world.markers_here() == 0,
                })
            }
        }
    }

    fn block(&mut self, block: &[Stmt], mut site: usize) -> Result<(), Stop> {
        let tracing = self.tracing();
        for stmt in block {
            self.stmt(stmt, site)?;
            if tracing {
                site += stmt.branch_sites();
            }
        }
        Ok(())
    }

    fn stmt(&mut self, stmt: &Stmt, site: usize) -> Result<(), Stop> {
        match stmt {
            Stmt::Action(a) => self.action(*a),
            Stmt::If(c, body) => {
                if self.cond(c)? {
                    self.visit(site);
                    self.block(body, site + 2)
                } else {
                    self.visit(site + 1);
                    Ok(())
                }
            }
            Stmt::IfElse(c, then, other) => {
                if self.cond(c)? {
                    self.visit(site);
                    self.block(then, site + 2)
                } else {
                    self.visit(site + 1);
                    let offset = if self.tracing() {
                        super::ast::block_sites(then)
                    } else {
                        0
                    };
                    self.block(other, site + 2 + offset)
                }
            }
            Stmt::While(c, body) => {
                while self.cond(c)? {
                    self.visit(site);
                    self.block(body, site + 2)?;
                }
                self.visit(site + 1);
                Ok(())
            }
            Stmt::Repeat(n, body) => {
                for _ in 0..*n {
                    self.visit(site);
                    self.block(body, site + 2)?;
                }
                self.visit(site + 1);
                Ok(())
            }
        }
    }
}

fn run(
    prog: &KarelAst,
    world: &KarelWorld,
    mode: CrashMode,
    trace: Option<&mut BTreeSet<usize>>,
) -> ExecOutcome {
    let mut m = Machine {
        world: world.clone(),
        mode,
        calls: 0,
        trace,
    };
    let kind = match m.block(&prog.body, 0) {
        Ok(()) => Outcome::Ok(m.world),
        Err(Stop::Crash(reason)) => Outcome::Crash(reason),
        Err(Stop::Timeout) => Outcome::Timeout,
    };
    ExecOutcome {
        kind,
        api_calls: m.calls,
    }
}

/// Execute `prog` on `world`, recording branch coverage.
pub fn execute(prog: &KarelAst, world: &KarelWorld, mode: CrashMode) -> (ExecOutcome, CoverageTrace) {
    let mut trace = CoverageTrace::for_program(prog);
    let outcome = run(prog, world, mode, Some(&mut trace.visited));
    (outcome, trace)
}

/// Execute without coverage bookkeeping.
pub fn execute_fast(prog: &KarelAst, world: &KarelWorld, mode: CrashMode) -> ExecOutcome {
    run(prog, world, mode, None)
}

/// Continue executing the statements `block` from `world`. Used by the
/// synthesizer to extend program prefixes incrementally; the call budget is
/// shared with `calls_so_far`.
pub(crate) fn execute_block_from(
    block: &[Stmt],
    world: &KarelWorld,
    calls_so_far: u64,
    mode: CrashMode,
) -> ExecOutcome {
    let mut m = Machine {
        world: world.clone(),
        mode,
        calls: calls_so_far,
        trace: None,
    };
    let kind = match m.block(block, 0) {
        Ok(()) => Outcome::Ok(m.world),
        Err(Stop::Crash(reason)) => Outcome::Crash(reason),
        Err(Stop::Timeout) => Outcome::Timeout,
    };
    ExecOutcome {
        kind,
        api_calls: m.calls,
    }
}

/// Union branch coverage of `prog` over `inputs`, executed in stay-still mode.
pub fn branch_coverage(prog: &KarelAst, inputs: &[KarelWorld]) -> f64 {
    let mut total = CoverageTrace::for_program(prog);
    for w in inputs {
        let (_, t) = execute(prog, w, CrashMode::StayStill);
        total.merge(&t);
    }
    total.ratio()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::karel::parse::parse_karel;
    use crate::karel::world::{build_start_world, Agent, Cell, Dir};

    fn prog(src: &str) -> KarelAst {
        parse_karel(src).unwrap()
    }

    #[test]
    fn empty_program_is_identity() {
        let w = build_start_world();
        let (out, trace) = execute(&KarelAst::default(), &w, CrashMode::Halt);
        assert_eq!(out.kind, Outcome::Ok(w));
        assert_eq!(trace.total, 0);
        assert_eq!(trace.ratio(), 1.0);
    }

    #[test]
    fn pick_on_empty_cell_crashes_in_halt_mode() {
        let w = build_start_world();
        let p = prog("def run(): pickMarker()");
        let (out, _) = execute(&p, &w, CrashMode::Halt);
        assert_eq!(out.kind, Outcome::Crash(CrashReason::PickEmpty));
        let (out, _) = execute(&p, &w, CrashMode::StayStill);
        assert_eq!(out.kind, Outcome::Ok(w));
    }

    #[test]
    fn put_on_full_cell() {
        let mut w = build_start_world();
        w.set_cell(8, 8, Cell::Markers(10)).unwrap();
        let p = prog("def run(): putMarker()");
        assert_eq!(
            execute_fast(&p, &w, CrashMode::Halt).kind,
            Outcome::Crash(CrashReason::PutOverflow)
        );
        let out = execute_fast(&p, &w, CrashMode::StayStill);
        assert_eq!(out.world().unwrap().cell(8, 8), Cell::Markers(10));
    }

    #[test]
    fn walking_into_wall_or_obstacle() {
        let w = KarelWorld::empty(Agent {
            row: 0,
            col: 3,
            facing: Dir::North,
        });
        let p = prog("def run(): move()");
        assert_eq!(
            execute_fast(&p, &w, CrashMode::Halt).kind,
            Outcome::Crash(CrashReason::HitObstacleOrBoundary)
        );
        let mut w2 = build_start_world();
        w2.set_cell(7, 8, Cell::Obstacle).unwrap();
        assert_eq!(
            execute_fast(&p, &w2, CrashMode::Halt).kind,
            Outcome::Crash(CrashReason::HitObstacleOrBoundary)
        );
        // stay-still: the blocked move is skipped and the next one runs
        let p2 = prog("def run(): move(); turnRight(); move()");
        let out = execute_fast(&p2, &w2, CrashMode::StayStill);
        let a = out.world().unwrap().agent();
        assert_eq!((a.row, a.col, a.facing), (8, 9, Dir::East));
    }

    #[test]
    fn spinning_loop_times_out_in_both_modes() {
        let p = prog("def run(): while(frontIsClear()): turnLeft()");
        let w = build_start_world();
        for mode in [CrashMode::Halt, CrashMode::StayStill] {
            let out = execute_fast(&p, &w, mode);
            assert_eq!(out.kind, Outcome::Timeout);
            assert_eq!(out.api_calls, MAX_API_CALLS);
            assert_eq!(out.crash_reason(), Some(CrashReason::InfiniteLoop));
        }
    }

    #[test]
    fn repeat_runs_body_count_times() {
        let p = prog("def run(): repeat(4): putMarker()");
        let out = execute_fast(&p, &build_start_world(), CrashMode::Halt);
        assert_eq!(out.world().unwrap().cell(8, 8), Cell::Markers(4));
        assert_eq!(out.api_calls, 4);
    }

    #[test]
    fn coverage_of_if_without_markers_is_half() {
        let p = prog("def run(): if(markersPresent()): move()");
        assert_eq!(branch_coverage(&p, &[build_start_world()]), 0.5);
        let mut w = build_start_world();
        w.set_cell(8, 8, Cell::Markers(1)).unwrap();
        assert_eq!(branch_coverage(&p, &[build_start_world(), w]), 1.0);
    }

    #[test]
    fn coverage_site_ids_are_distinct_for_nested_arms() {
        let p = prog(
            "def run(): ifelse(frontIsClear()): if(markersPresent()): move() else: repeat(2): turnLeft()",
        );
        assert_eq!(p.branch_sites(), 6);
        let (_, t) = execute(&p, &build_start_world(), CrashMode::StayStill);
        // then-arm (0), inner if skipped (3)
        assert_eq!(t.visited.iter().copied().collect::<Vec<_>>(), vec![0, 3]);
        let w = KarelWorld::empty(Agent {
            row: 0,
            col: 0,
            facing: Dir::North,
        });
        let (_, t) = execute(&p, &w, CrashMode::StayStill);
        // else-arm (1), repeat body (4) and exit (5)
        assert_eq!(t.visited.iter().copied().collect::<Vec<_>>(), vec![1, 4, 5]);
    }

    #[test]
    fn straight_line_coverage_is_one() {
        let p = prog("def run(): move(); turnLeft(); putMarker()");
        assert_eq!(branch_coverage(&p, &[]), 1.0);
        assert_eq!(branch_coverage(&p, &[build_start_world()]), 1.0);
    }
}
