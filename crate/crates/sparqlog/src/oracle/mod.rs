//! Reference evaluation kept apart from the rule engine: direct multiset
//! semantics for patterns and paths, derivation-tree counting for programs,
//! and result comparison.

mod compare;
mod direct;
mod dt;

use thiserror::Error;

pub use compare::{compare_multisets, CompareReport};
pub use direct::{eval_path_direct, eval_pattern_direct, eval_query_direct, DirectAnswer, PairMultiset};
pub use dt::{count_derivation_trees, count_derivation_trees_with, DtLimits, Multiplicity};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("program is not stratifiable at predicate {0}")]
    NotStratifiable(String),
    #[error("unsupported program: {0}")]
    Unsupported(String),
}
