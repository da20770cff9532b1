use std::cmp::Ordering;
use std::fmt;

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

const NUMERIC_TYPES: &[&str] = &[
    "integer",
    "decimal",
    "float",
    "double",
    "int",
    "long",
    "short",
    "byte",
    "nonNegativeInteger",
    "nonPositiveInteger",
    "positiveInteger",
    "negativeInteger",
    "unsignedLong",
    "unsignedInt",
    "unsignedShort",
    "unsignedByte",
];

/// A literal value: lexical form plus optional datatype or language tag.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<String>,
    pub lang: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Literal {
        Literal { lexical: lexical.into(), datatype: None, lang: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Literal {
        Literal { lexical: lexical.into(), datatype: Some(datatype.into()), lang: None }
    }

    pub fn lang(lexical: impl Into<String>, lang: impl Into<String>) -> Literal {
        Literal { lexical: lexical.into(), datatype: None, lang: Some(lang.into()) }
    }

    /// Numeric value when the datatype is one of the XSD numeric types and
    /// the lexical form parses.
    pub fn numeric_value(&self) -> Option<f64> {
        let dt = self.datatype.as_deref()?;
        let local = dt.strip_prefix(XSD)?;
        if !NUMERIC_TYPES.contains(&local) {
            return None;
        }
        let text = self.lexical.trim();
        match local {
            "float" | "double" => match text {
                "INF" | "+INF" => Some(f64::INFINITY),
                "-INF" => Some(f64::NEG_INFINITY),
                "NaN" => Some(f64::NAN),
                _ => parse_decimal_like(text, true),
            },
            "decimal" => parse_decimal_like(text, false),
            _ => {
                if text.contains(['.', 'e', 'E']) {
                    None
                } else {
                    parse_decimal_like(text, false)
                }
            }
        }
    }

    /// True for plain literals and `xsd:string`; these compare as strings.
    pub fn is_simple(&self) -> bool {
        self.lang.is_none() && matches!(self.datatype.as_deref(), None | Some(XSD_STRING))
    }
}

fn parse_decimal_like(text: &str, allow_exponent: bool) -> Option<f64> {
    let body = text.strip_prefix(['+', '-']).unwrap_or(text);
    if body.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(at) if allow_exponent => (&body[..at], Some(&body[at + 1..])),
        Some(_) => return None,
        None => (body, None),
    };
    let mut digits = 0;
    let mut dots = 0;
    for c in mantissa.chars() {
        match c {
            '0'..='9' => digits += 1,
            '.' => dots += 1,
            _ => return None,
        }
    }
    if digits == 0 || dots > 1 {
        return None;
    }
    if let Some(exp) = exponent {
        let exp = exp.strip_prefix(['+', '-']).unwrap_or(exp);
        if exp.is_empty() || !exp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
    }
    text.parse::<f64>().ok()
}

/// An RDF term, or the `Unbound` marker used for variables without a value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Unbound,
    Blank(String),
    Iri(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Term {
        Term::Iri(value.into())
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term::Blank(label.into())
    }

    pub fn plain(lexical: impl Into<String>) -> Term {
        Term::Literal(Literal::plain(lexical))
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Term {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn lang_literal(lexical: impl Into<String>, lang: impl Into<String>) -> Term {
        Term::Literal(Literal::lang(lexical, lang))
    }

    pub fn integer(value: i64) -> Term {
        Term::typed(value.to_string(), XSD_INTEGER)
    }

    pub fn boolean(value: bool) -> Term {
        Term::typed(if value { "true" } else { "false" }, XSD_BOOLEAN)
    }

    /// The constant used as graph column value for the default graph.
    pub fn default_graph() -> Term {
        Term::plain("default")
    }

    pub fn is_unbound(&self) -> bool {
        matches!(self, Term::Unbound)
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn numeric_value(&self) -> Option<f64> {
        self.as_literal().and_then(Literal::numeric_value)
    }

    /// Boolean value of an `xsd:boolean` literal.
    pub fn boolean_value(&self) -> Option<bool> {
        let lit = self.as_literal()?;
        if lit.datatype.as_deref() != Some(XSD_BOOLEAN) {
            return None;
        }
        match lit.lexical.as_str() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            _ => None,
        }
    }

    fn class_rank(&self) -> u8 {
        match self {
            Term::Unbound => 0,
            Term::Blank(_) => 1,
            Term::Iri(_) => 2,
            Term::Literal(_) => 3,
        }
    }

    /// Total order used for sorting solutions: Unbound < Blank < IRI <
    /// Literal; numeric literals compare by value, everything else by its
    /// N-Triples rendering.
    pub fn order_cmp(&self, other: &Term) -> Ordering {
        let rank = self.class_rank().cmp(&other.class_rank());
        if rank != Ordering::Equal {
            return rank;
        }
        if let (Some(a), Some(b)) = (self.numeric_value(), other.numeric_value()) {
            if let Some(ord) = a.partial_cmp(&b) {
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
        self.to_string().cmp(&other.to_string())
    }
}

/// Writes `text` in N-Triples string escaping.
pub(crate) fn escape_string(out: &mut impl fmt::Write, text: &str) -> fmt::Result {
    for c in text.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            '\r' => out.write_str("\\r")?,
            '\t' => out.write_str("\\t")?,
            '\u{8}' => out.write_str("\\b")?,
            '\u{c}' => out.write_str("\\f")?,
            c if (c as u32) < 0x20 || c as u32 == 0x7f => write!(out, "\\u{:04X}", c as u32)?,
            c => out.write_char(c)?,
        }
    }
    Ok(())
}

pub(crate) fn escape_iri(out: &mut impl fmt::Write, iri: &str) -> fmt::Result {
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => write!(out, "\\u{:04X}", c as u32)?,
            c if (c as u32) <= 0x20 => write!(out, "\\u{:04X}", c as u32)?,
            c => out.write_char(c)?,
        }
    }
    Ok(())
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        escape_string(f, &self.lexical)?;
        f.write_str("\"")?;
        if let Some(lang) = &self.lang {
            write!(f, "@{lang}")?;
        } else if let Some(dt) = &self.datatype {
            f.write_str("^^<")?;
            escape_iri(f, dt)?;
            f.write_str(">")?;
        }
        Ok(())
    }
}

/// N-Triples surface syntax; `Unbound` renders as the empty string.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Unbound => Ok(()),
            Term::Blank(label) => write!(f, "_:{label}"),
            Term::Iri(iri) => {
                f.write_str("<")?;
                escape_iri(f, iri)?;
                f.write_str(">")
            }
            Term::Literal(lit) => lit.fmt(f),
        }
    }
}
