//! The Karel grid-world DSL: syntax, worlds, interpreter and samplers.

mod ast;
mod exec;
mod parse;
mod sample;
mod world;

pub use ast::{block_depth, block_sites, block_size, Action, Cond, KarelAst, Sensor, Stmt, MAX_REPEAT};
pub(crate) use exec::execute_block_from;
pub use exec::{
    branch_coverage, execute, execute_fast, CoverageTrace, CrashMode, CrashReason, ExecOutcome,
    Outcome, MAX_API_CALLS,
};
pub use parse::{parse_karel, ParseError};
pub use sample::{sample_program, sample_world, sample_world_with, ProgramBounds, WorldDensity};
pub use world::{
    build_start_world, Agent, Cell, Dir, KarelWorld, WorldError, CELLS, CELL_FEATURES, GRID,
    MAX_MARKERS,
};
