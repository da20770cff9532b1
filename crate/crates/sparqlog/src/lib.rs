//! SPARQL query answering by translation into warded Datalog± with bag
//! semantics. A query becomes a program whose answer predicate carries a
//! Skolem-term identifier per solution, so that duplicate solutions stay
//! apart exactly as the SPARQL multiset semantics requires.
//!
//! The usual flow is [`sparql::parse_query`], [`translator::translate_query`],
//! [`rdf::translate_data`], [`datalog::evaluate`] and
//! [`solution::extract_solutions`]; [`run_query`] does all of it. The
//! [`oracle`] module evaluates the same queries directly on the algebra.

pub mod datalog;
pub mod oracle;
mod pipeline;
pub mod rdf;
pub mod solution;
pub mod sparql;
pub mod translator;

pub use pipeline::{answer_program, run_query, run_query_direct, Answer, Error};
