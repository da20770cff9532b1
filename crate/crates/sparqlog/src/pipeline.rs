use std::path::PathBuf;

use thiserror::Error;

use crate::datalog::{evaluate_with, DatalogError, EvalOptions, GoalKind, Program};
use crate::oracle::{eval_query_direct, DirectAnswer, OracleError};
use crate::rdf::{translate_data, Dataset, RdfError};
use crate::solution::{apply_modifiers, eval_ask, extract_solutions, serialize, serialize_boolean, Format, SolutionError};
use crate::solution::{SolutionMapping, SolutionMultiset};
use crate::sparql::{Query, QueryError};
use crate::translator::translate_query;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Datalog(#[from] DatalogError),
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Process exit status: 1 for I/O, 2 for malformed or unsupported input,
    /// 3 for resource limits, 4 for failed static checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Rdf(RdfError::Io { .. }) => 1,
            Error::Rdf(RdfError::File { source, .. }) if matches!(**source, RdfError::Io { .. }) => 1,
            Error::Datalog(DatalogError::ResourceLimit(_)) | Error::Oracle(OracleError::ResourceLimit(_)) => 3,
            Error::Datalog(DatalogError::NotStratifiable(_) | DatalogError::RecursiveSkolem(_))
            | Error::Oracle(OracleError::NotStratifiable(_)) => 4,
            _ => 2,
        }
    }
}

/// A query result: the solution multiset and its modified sequence, or the
/// answer of an ASK query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Solutions { multiset: SolutionMultiset, sequence: Vec<SolutionMapping> },
    Boolean(bool),
}

impl Answer {
    pub fn serialize(&self, format: Format) -> String {
        match self {
            Answer::Solutions { multiset, sequence } => serialize(sequence, &multiset.vars, format),
            Answer::Boolean(b) => serialize_boolean(*b, format),
        }
    }
}

/// Evaluates a translated program and reads its answer.
pub fn answer_program(program: &Program, d: &Dataset, opts: &EvalOptions) -> Result<Answer, Error> {
    let goal = program.goal.as_ref().ok_or_else(|| Error::Usage("program has no goal".into()))?;
    let df = evaluate_with(program, &translate_data(d), opts)?;
    Ok(match goal.kind {
        GoalKind::Ask => Answer::Boolean(eval_ask(&df, goal)),
        GoalKind::Select { .. } => {
            let multiset = extract_solutions(&df, goal);
            let sequence = apply_modifiers(&multiset, &goal.modifiers);
            Answer::Solutions { multiset, sequence }
        }
    })
}

/// Translates and evaluates `q` over `d` with the rule engine.
pub fn run_query(q: &Query, d: &Dataset, opts: &EvalOptions) -> Result<Answer, Error> {
    answer_program(&translate_query(q)?, d, opts)
}

/// Evaluates `q` over `d` with the direct evaluator.
pub fn run_query_direct(q: &Query, d: &Dataset) -> Answer {
    match eval_query_direct(q, d) {
        DirectAnswer::Boolean(b) => Answer::Boolean(b),
        DirectAnswer::Solutions(multiset) => {
            let sequence = apply_modifiers(&multiset, &q.modifiers);
            Answer::Solutions { multiset, sequence }
        }
    }
}
