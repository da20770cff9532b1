use std::str::FromStr;

use serde_json::{json, Map, Value as Json};

use super::{SolutionError, SolutionMapping, SolutionMultiset};
use crate::rdf::{Cursor, Term};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Tsv,
    Json,
}

impl FromStr for Format {
    type Err = SolutionError;

    fn from_str(s: &str) -> Result<Format, SolutionError> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            _ => Err(SolutionError::UnknownFormat(s.to_string())),
        }
    }
}

fn json_term(t: &Term) -> Json {
    match t {
        Term::Iri(i) => json!({"type": "uri", "value": i}),
        Term::Blank(b) => json!({"type": "bnode", "value": b}),
        Term::Literal(l) => {
            let mut o = Map::new();
            o.insert("type".into(), json!("literal"));
            o.insert("value".into(), json!(l.lexical));
            if let Some(lang) = &l.lang {
                o.insert("xml:lang".into(), json!(lang));
            } else if let Some(dt) = &l.datatype {
                o.insert("datatype".into(), json!(dt));
            }
            Json::Object(o)
        }
        Term::Unbound => Json::Null,
    }
}

/// Renders a solution sequence. TSV has a `?var` header and N-Triples
/// cells, empty for unbound; JSON follows the SPARQL results layout.
pub fn serialize(seq: &[SolutionMapping], vars: &[String], format: Format) -> String {
    match format {
        Format::Tsv => {
            let mut out = vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t");
            out.push('\n');
            for m in seq {
                out.push_str(&vars.iter().map(|v| m.get(v).to_string()).collect::<Vec<_>>().join("\t"));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let bindings: Vec<Json> = seq
                .iter()
                .map(|m| {
                    Json::Object(
                        vars.iter().filter(|v| m.is_bound(v)).map(|v| (v.clone(), json_term(m.get(v)))).collect(),
                    )
                })
                .collect();
            let doc = json!({"head": {"vars": vars}, "results": {"bindings": bindings}});
            let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
            s.push('\n');
            s
        }
    }
}

pub fn serialize_boolean(b: bool, format: Format) -> String {
    match format {
        Format::Tsv => format!("{b}\n"),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({"head": {}, "boolean": b})).expect("JSON values always serialize");
            s.push('\n');
            s
        }
    }
}

fn cell(text: &str, line: usize) -> Result<Term, SolutionError> {
    if text.is_empty() {
        return Ok(Term::Unbound);
    }
    let mut cur = Cursor::new(text);
    let t = cur.term().map_err(|message| SolutionError::Syntax { line, message })?;
    if !cur.at_end() {
        return Err(SolutionError::Syntax { line, message: format!("trailing text after term: {:?}", cur.rest()) });
    }
    Ok(t)
}

/// Reads a TSV result document as written by [`serialize`].
pub fn parse_tsv(text: &str) -> Result<SolutionMultiset, SolutionError> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = match lines.next() {
        Some(h) if !text.is_empty() => h,
        _ => return Err(SolutionError::Syntax { line: 1, message: "missing header".into() }),
    };
    let vars: Vec<String> = if header.is_empty() {
        vec![]
    } else {
        header
            .split('\t')
            .map(|h| match h.strip_prefix('?') {
                Some(v) if !v.is_empty() => Ok(v.to_string()),
                _ => Err(SolutionError::Syntax { line: 1, message: format!("bad header cell {h:?}") }),
            })
            .collect::<Result<_, _>>()?
    };
    let mut out = SolutionMultiset::new(vars.clone());
    let body: Vec<&str> = lines.collect();
    let body = match body.split_last() {
        Some((last, rest)) if last.is_empty() => rest,
        _ => &body[..],
    };
    for (k, l) in body.iter().enumerate() {
        let line = k + 2;
        let cells: Vec<&str> = if vars.is_empty() { vec![] } else { l.split('\t').collect() };
        if cells.len() != vars.len() || (vars.is_empty() && !l.is_empty()) {
            return Err(SolutionError::Syntax {
                line,
                message: format!("expected {} cells, found {}", vars.len(), l.split('\t').count()),
            });
        }
        let mut m = SolutionMapping::new();
        for (v, c) in vars.iter().zip(cells) {
            m.insert(v.clone(), cell(c, line)?);
        }
        out.add(m, 1);
    }
    Ok(out)
}
