use super::term::{Literal, Term};
use super::{RdfError, Triple};

/// A statement from an N-Quads document; `graph` is `None` for the default graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    pub triple: Triple,
    pub graph: Option<String>,
}

/// Character cursor shared by the line-oriented term syntaxes (N-Triples,
/// result TSV, the Datalog fact notation).
pub(crate) struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str) -> Cursor<'a> {
        Cursor { text, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn set_pos(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' || c == '\r' || c == '\n' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn hex_escape(&mut self, len: usize) -> Result<char, String> {
        let start = self.pos;
        for _ in 0..len {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => {}
                _ => return Err("bad unicode escape".into()),
            }
        }
        let code = u32::from_str_radix(&self.text[start..self.pos], 16).map_err(|e| e.to_string())?;
        char::from_u32(code).ok_or_else(|| "escape is not a scalar value".into())
    }

    /// Parses `<...>` and returns the unescaped IRI text.
    pub(crate) fn iri(&mut self) -> Result<String, String> {
        if !self.eat('<') {
            return Err("expected '<'".into());
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated IRI".into()),
                Some('>') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return Err("bad escape in IRI".into()),
                },
                Some(c) if c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`' || (c as u32) <= 0x20 => {
                    return Err(format!("character {c:?} not allowed in IRI"))
                }
                Some(c) => out.push(c),
            }
        }
    }

    /// Parses a double-quoted string with N-Triples escapes.
    pub(crate) fn quoted(&mut self) -> Result<String, String> {
        if !self.eat('"') {
            return Err("expected '\"'".into());
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated string".into()),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('t') => out.push('\t'),
                    Some('b') => out.push('\u{8}'),
                    Some('n') => out.push('\n'),
                    Some('r') => out.push('\r'),
                    Some('f') => out.push('\u{c}'),
                    Some('"') => out.push('"'),
                    Some('\'') => out.push('\''),
                    Some('\\') => out.push('\\'),
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return Err("bad escape in string".into()),
                },
                Some('\n') | Some('\r') => return Err("line break in string".into()),
                Some(c) => out.push(c),
            }
        }
    }

    pub(crate) fn blank_label(&mut self) -> Result<String, String> {
        if !self.rest().starts_with("_:") {
            return Err("expected '_:'".into());
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        while self.text[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err("empty blank node label".into());
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn lang_tag(&mut self) -> Result<String, String> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let tag = &self.text[start..self.pos];
        let mut parts = tag.split('-');
        let first = parts.next().unwrap_or("");
        if first.is_empty() || !first.chars().all(|c| c.is_ascii_alphabetic()) || parts.any(str::is_empty) {
            return Err("malformed language tag".into());
        }
        Ok(tag.to_string())
    }

    /// Parses an N-Triples term: IRI, blank node or literal.
    pub(crate) fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => Ok(Term::Blank(self.blank_label()?)),
            Some('"') => {
                let lexical = self.quoted()?;
                if self.eat('@') {
                    Ok(Term::Literal(Literal { lexical, datatype: None, lang: Some(self.lang_tag()?) }))
                } else if self.rest().starts_with("^^") {
                    self.pos += 2;
                    Ok(Term::Literal(Literal { lexical, datatype: Some(self.iri()?), lang: None }))
                } else {
                    Ok(Term::Literal(Literal { lexical, datatype: None, lang: None }))
                }
            }
            Some(c) => Err(format!("unexpected character {c:?}")),
            None => Err("unexpected end of line".into()),
        }
    }
}

fn statement(line: &str, quads: bool) -> Result<Option<(Vec<Term>, Option<Term>)>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let mut terms = Vec::with_capacity(3);
    for _ in 0..3 {
        terms.push(cur.term()?);
        cur.skip_ws();
    }
    let mut graph = None;
    if quads && cur.peek() != Some('.') {
        graph = Some(cur.term()?);
        cur.skip_ws();
    }
    if !cur.eat('.') {
        return Err("expected '.' at end of statement".into());
    }
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err("trailing content after '.'".into());
    }
    Ok(Some((terms, graph)))
}

fn build(terms: Vec<Term>, line: usize) -> Result<Triple, RdfError> {
    let mut it = terms.into_iter();
    let (s, p, o) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    Triple::new(s, p, o).map_err(|message| RdfError::Syntax { line, message })
}

/// Parses an N-Triples document.
pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, RdfError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        match statement(line, false).map_err(|message| RdfError::Syntax { line: line_no, message })? {
            None => {}
            Some((terms, _)) => out.push(build(terms, line_no)?),
        }
    }
    Ok(out)
}

/// Parses an N-Quads document.
pub fn parse_nquads(text: &str) -> Result<Vec<Quad>, RdfError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        match statement(line, true).map_err(|message| RdfError::Syntax { line: line_no, message })? {
            None => {}
            Some((terms, graph)) => {
                let graph = match graph {
                    None => None,
                    Some(Term::Iri(g)) => Some(g),
                    Some(_) => {
                        return Err(RdfError::Syntax { line: line_no, message: "graph label must be an IRI".into() })
                    }
                };
                out.push(Quad { triple: build(terms, line_no)?, graph });
            }
        }
    }
    Ok(out)
}

/// Renders triples as an N-Triples document.
pub fn serialize_ntriples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&format!("{} {} {} .\n", t.subject, t.predicate, t.object));
    }
    out
}
