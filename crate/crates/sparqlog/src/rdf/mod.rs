//! RDF terms, triples and datasets, N-Triples/N-Quads ingestion, and the
//! encoding of a dataset as Datalog facts.

mod ntriples;
mod term;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::datalog::{Atom, DTerm, Fact, Rule};

pub(crate) use ntriples::Cursor;
pub use ntriples::{parse_nquads, parse_ntriples, serialize_ntriples, Quad};
pub use term::*;

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: Box<RdfError> },
    #[error("graph name {0:?} is given more than once")]
    DuplicateGraph(String),
    #[error("graph name {0:?} is reserved for the default graph")]
    ReservedGraphName(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    /// Builds a triple, rejecting terms in positions where RDF forbids them.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, String> {
        if !(subject.is_iri() || subject.is_blank()) {
            return Err("subject must be an IRI or blank node".into());
        }
        if !predicate.is_iri() {
            return Err("predicate must be an IRI".into());
        }
        if object.is_unbound() {
            return Err("object must be an RDF term".into());
        }
        Ok(Triple { subject, predicate, object })
    }
}

pub type Graph = BTreeSet<Triple>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub default_graph: Graph,
    pub named_graphs: BTreeMap<String, Graph>,
}

impl Dataset {
    pub fn new() -> Dataset {
        Dataset::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Dataset {
        Dataset { default_graph: triples.into_iter().collect(), named_graphs: BTreeMap::new() }
    }

    pub fn with_named(mut self, name: impl Into<String>, triples: impl IntoIterator<Item = Triple>) -> Dataset {
        self.named_graphs.entry(name.into()).or_default().extend(triples);
        self
    }

    pub fn graph(&self, name: Option<&str>) -> Option<&Graph> {
        match name {
            None => Some(&self.default_graph),
            Some(n) => self.named_graphs.get(n),
        }
    }

    pub fn triple_count(&self) -> usize {
        self.default_graph.len() + self.named_graphs.values().map(BTreeSet::len).sum::<usize>()
    }
}

fn read(path: &Path) -> Result<String, RdfError> {
    std::fs::read_to_string(path).map_err(|source| RdfError::Io { path: path.to_path_buf(), source })
}

fn is_quad_file(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("nq"))
}

fn in_file<T>(path: &Path, r: Result<T, RdfError>) -> Result<T, RdfError> {
    r.map_err(|e| RdfError::File { path: path.to_path_buf(), source: Box::new(e) })
}

/// Loads a dataset. Default sources are merged into the default graph; a
/// `.nq` default source routes quads carrying a graph label into that named
/// graph. Each named source becomes one named graph (graph labels inside a
/// named `.nq` source are ignored).
pub fn load_dataset<P: AsRef<Path>, Q: AsRef<Path>>(
    default_sources: &[P],
    named_sources: &[(String, Q)],
) -> Result<Dataset, RdfError> {
    let mut ds = Dataset::new();
    let mut seen = BTreeSet::new();
    for (name, _) in named_sources {
        if name == "default" {
            return Err(RdfError::ReservedGraphName(name.clone()));
        }
        if !seen.insert(name.clone()) {
            return Err(RdfError::DuplicateGraph(name.clone()));
        }
    }
    for path in default_sources {
        let path = path.as_ref();
        let text = read(path)?;
        if is_quad_file(path) {
            for q in in_file(path, parse_nquads(&text))? {
                match q.graph {
                    None => {
                        ds.default_graph.insert(q.triple);
                    }
                    Some(g) => {
                        if g == "default" {
                            return Err(RdfError::ReservedGraphName(g));
                        }
                        ds.named_graphs.entry(g).or_default().insert(q.triple);
                    }
                }
            }
        } else {
            ds.default_graph.extend(in_file(path, parse_ntriples(&text))?);
        }
    }
    for (name, path) in named_sources {
        let path = path.as_ref();
        let text = read(path)?;
        let triples: Vec<Triple> = if is_quad_file(path) {
            in_file(path, parse_nquads(&text))?.into_iter().map(|q| q.triple).collect()
        } else {
            in_file(path, parse_ntriples(&text))?
        };
        ds.named_graphs.entry(name.clone()).or_default().extend(triples);
    }
    Ok(ds)
}

/// Ground facts describing a dataset plus the fixed rules over them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactBase {
    pub facts: BTreeSet<Fact>,
    pub rules: Vec<Rule>,
}

impl FactBase {
    /// A fact base with no facts and no rules.
    pub fn empty() -> FactBase {
        FactBase::default()
    }

    /// Renders the facts in the textual program syntax, one per line.
    pub fn render_facts(&self) -> String {
        let mut out = String::new();
        for f in &self.facts {
            out.push_str(&f.to_string());
            out.push('\n');
        }
        out
    }
}

/// The rules `term/1` and `subjectOrObject/2` every fact base carries.
pub fn fixed_rules() -> Vec<Rule> {
    let x = || DTerm::var("X");
    let mut rules = Vec::new();
    for kind in ["iri", "literal", "bnode"] {
        rules.push(Rule::new(Atom::new("term", vec![x()]), vec![Atom::new(kind, vec![x()])]));
    }
    let triple = Atom::new("triple", vec![DTerm::var("X"), DTerm::var("P"), DTerm::var("Y"), DTerm::var("D")]);
    rules.push(Rule::new(Atom::new("subjectOrObject", vec![DTerm::var("X"), DTerm::var("D")]), vec![triple.clone()]));
    rules.push(Rule::new(Atom::new("subjectOrObject", vec![DTerm::var("Y"), DTerm::var("D")]), vec![triple]));
    rules
}

fn kind_fact(t: &Term) -> Fact {
    let pred = match t {
        Term::Iri(_) => "iri",
        Term::Literal(_) => "literal",
        Term::Blank(_) => "bnode",
        Term::Unbound => unreachable!("triples never contain Unbound"),
    };
    Fact::new(pred, vec![t.clone()])
}

/// Encodes a dataset as facts: `iri/literal/bnode` per distinct term (graph
/// names included), `triple/4` per triple with the graph column set to
/// `"default"` or the graph IRI, and `named/1` per named graph.
pub fn translate_data(d: &Dataset) -> FactBase {
    let mut facts = BTreeSet::new();
    let mut emit = |g: &Term, graph: &Graph| {
        for t in graph {
            for term in [&t.subject, &t.predicate, &t.object] {
                facts.insert(kind_fact(term));
            }
            facts.insert(Fact::new(
                "triple",
                vec![t.subject.clone(), t.predicate.clone(), t.object.clone(), g.clone()],
            ));
        }
    };
    emit(&Term::default_graph(), &d.default_graph);
    for (name, graph) in &d.named_graphs {
        emit(&Term::iri(name.clone()), graph);
    }
    for name in d.named_graphs.keys() {
        facts.insert(Fact::new("named", vec![Term::iri(name.clone())]));
        facts.insert(Fact::new("iri", vec![Term::iri(name.clone())]));
    }
    FactBase { facts, rules: fixed_rules() }
}
