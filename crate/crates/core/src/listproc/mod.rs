//! Typed straight-line list programs.

mod exec;
mod func;
mod program;
mod sample;
mod value;

use thiserror::Error;

pub(crate) use sample::arg_choices;
pub use exec::{apply, execute_list};
pub use func::{BinFn, Func, IntFn, PredFn};
pub use program::{ListProgram, Statement};
pub use sample::{
    list_start_signal, sample_list_input, sample_list_program, sample_list_program_with, sample_value, InputRanges,
    Regime,
};
pub use value::{clamp, format_tuple, parse_tuple, Type, Value, INT_MAX, INT_MIN, MAX_LIST_LEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ListError {
    #[error("list of length {0} exceeds the maximum of {MAX_LIST_LEN}")]
    ListTooLong(usize),
    #[error("bad value {0:?}")]
    BadValue(String),
    #[error("programs take 1 to 3 inputs, got {0}")]
    BadSignature(usize),
    #[error("program has no statements")]
    EmptyProgram,
    #[error("statement {stmt}: expected {expected} arguments, got {got}")]
    Arity { stmt: usize, expected: usize, got: usize },
    #[error("statement {stmt}: v{var} is not defined")]
    UnboundVar { stmt: usize, var: usize },
    #[error("statement {stmt}: v{var} has type {got}, expected {expected}")]
    ArgType {
        stmt: usize,
        var: usize,
        expected: Type,
        got: Type,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("expected {expected} inputs, got {got}")]
    InputArity { expected: usize, got: usize },
    #[error("input {slot} has type {got}, expected {expected}")]
    InputType { slot: usize, expected: Type, got: Type },
}
