//! SPARQL query parsing into an indexed algebra tree, plus filter
//! expressions and their evaluation.

mod ast;
mod expr;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::*;
pub use expr::{CmpOp, EvalError, Expr, RegexSpec, TypeTest};
pub use parser::{parse_expression, parse_query};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

impl QueryError {
    pub(crate) fn syntax(src: &str, offset: usize, message: impl Into<String>) -> QueryError {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        QueryError::Syntax { line, column, message: message.into() }
    }
}
