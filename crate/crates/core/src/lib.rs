//! Query-driven example generation for programming by example.

pub mod karel;
pub mod listproc;
pub mod domain;
pub mod fspace;
pub mod query;
pub mod synth;
pub mod harness;

pub use domain::{Domain, KarelDomain, ListDomain, TableDomain};
pub use harness::{Dsl, ExperimentConfig, HarnessError, Stage, StrategySpec};
pub use query::{CandidatePool, Oracle, QueryError, Strategy};
pub use synth::{SynthError, SynthMode, SynthesisResult};
