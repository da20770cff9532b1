//! Datalog± programs with Skolem-term identifiers: the intermediate
//! representation, static checks, the bag transformation and evaluation.

mod bagify;
mod eval;
mod ir;
mod render;
mod stratify;
mod warded;

use thiserror::Error;

pub use bagify::bagify;
pub use eval::{evaluate, evaluate_with, DerivedFacts, EvalOptions, Strategy, ValueId, DEFAULT_MAX_DERIVATIONS};
pub use ir::*;
pub use render::{parse_program, render_program};
pub use stratify::{audit_recursion, stratify, RecursionAudit};
pub use warded::{check_warded, WardednessReport};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DatalogError {
    #[error("program is not stratifiable: {0}")]
    NotStratifiable(String),
    #[error("unsafe rule `{rule}`: variable {variable} is never bound")]
    Unsafe { rule: String, variable: String },
    #[error("predicate {predicate} used with arity {found}, expected {expected}")]
    ArityMismatch { predicate: String, expected: usize, found: usize },
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("recursive rule creates fresh identifiers: {0}")]
    RecursiveSkolem(String),
    #[error("program syntax error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
