//! Choosing which inputs to ask the hidden program about.

mod info;
mod oracle;
mod pool;
mod run;
mod strategy;

use thiserror::Error;

use crate::fspace::FspaceError;

pub use info::{
    argmax_by_key, argmax_lex, entropy_bits, expected_queries_to_isolate, first_query_value, ig_lookahead, ig_ranking, information_gain,
    joint_information, lookahead_value, ResponseMatrix,
};
pub use oracle::Oracle;
pub use pool::CandidatePool;
pub use run::{replays, run_query_loop, QueryRun, StepStats};
pub use strategy::{
    FspaceStrategy, IgStrategy, QbcStrategy, QueryContext, RandomStrategy, Selection, Strategy,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("no pool program is consistent with the examples")]
    InconsistentPool,
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("no query with an evidence response after {tries} tries")]
    NoValidQuery { tries: usize },
    #[error(transparent)]
    Fspace(#[from] FspaceError),
}
