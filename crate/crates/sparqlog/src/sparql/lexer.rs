use super::QueryError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Iri(String),
    PName(String, String),
    Blank(String),
    Anon,
    Var(String),
    Str(String),
    LangTag(String),
    DoubleCaret,
    Integer(String),
    Decimal(String),
    Double(String),
    Word(String),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: usize,
}

const PUNCTS: &[&str] = &[
    "&&", "||", "!=", "<=", ">=", "{", "}", "(", ")", ".", ";", ",", "*", "|", "/", "^", "?", "+", "-", "!", "=", "<",
    ">", "[", "]",
];

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.' || c == '\u{b7}'
}

fn is_var_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\u{b7}'
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, pos: usize, msg: impl Into<String>) -> QueryError {
        QueryError::syntax(self.src, pos, msg)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    self.take_while(|c| c != '\n');
                }
                _ => return,
            }
        }
    }

    fn try_iri(&mut self) -> Option<String> {
        let rest = self.rest();
        let mut end = None;
        for (i, c) in rest.char_indices().skip(1) {
            match c {
                '>' => {
                    end = Some(i);
                    break;
                }
                '<' | '"' | '{' | '}' | '|' | '^' | '`' => return None,
                c if (c as u32) <= 0x20 => return None,
                _ => {}
            }
        }
        let end = end?;
        let raw = &rest[1..end];
        let text = unescape_iri(raw)?;
        self.pos += end + 1;
        Some(text)
    }

    fn string(&mut self, start: usize) -> Result<String, QueryError> {
        let quote = self.bump().unwrap();
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut out = String::new();
        loop {
            let c = self.bump().ok_or_else(|| self.err(start, "unterminated string"))?;
            if c == quote {
                if !long {
                    return Ok(out);
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    self.bump();
                    self.bump();
                    while self.peek() == Some(quote) {
                        out.push(quote);
                        self.bump();
                    }
                    return Ok(out);
                }
                out.push(c);
                continue;
            }
            match c {
                '\\' => {
                    let e = self.bump().ok_or_else(|| self.err(start, "unterminated string"))?;
                    match e {
                        't' => out.push('\t'),
                        'b' => out.push('\u{8}'),
                        'n' => out.push('\n'),
                        'r' => out.push('\r'),
                        'f' => out.push('\u{c}'),
                        '"' => out.push('"'),
                        '\'' => out.push('\''),
                        '\\' => out.push('\\'),
                        'u' | 'U' => {
                            let n = if e == 'u' { 4 } else { 8 };
                            let hex: String = (0..n).filter_map(|_| self.bump()).collect();
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .filter(|_| hex.len() == n)
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.err(self.pos, "bad unicode escape"))?;
                            out.push(ch);
                        }
                        _ => return Err(self.err(self.pos, "bad escape sequence")),
                    }
                }
                '\n' | '\r' if !long => return Err(self.err(start, "line break in string")),
                c => out.push(c),
            }
        }
    }

    fn number(&mut self) -> Tok {
        let int = self.take_while(|c| c.is_ascii_digit()).to_string();
        let mut text = int;
        let mut decimal = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            text.push('.');
            text.push_str(self.take_while(|c| c.is_ascii_digit()));
            decimal = true;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            let mut exp = String::from("e");
            self.bump();
            if let Some(s @ ('+' | '-')) = self.peek() {
                exp.push(s);
                self.bump();
            }
            let digits = self.take_while(|c| c.is_ascii_digit());
            if digits.is_empty() {
                self.pos = save;
            } else {
                exp.push_str(digits);
                text.push_str(&exp);
                return Tok::Double(text);
            }
        }
        if decimal {
            Tok::Decimal(text)
        } else {
            Tok::Integer(text)
        }
    }

    fn local_name(&mut self) -> String {
        let mut out = String::new();
        loop {
            match self.peek() {
                Some('\\') => {
                    let save = self.pos;
                    self.bump();
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => out.push(c),
                        _ => {
                            self.pos = save;
                            break;
                        }
                    }
                }
                Some('%') if self.peek_at(1).is_some_and(|c| c.is_ascii_hexdigit())
                    && self.peek_at(2).is_some_and(|c| c.is_ascii_hexdigit()) =>
                {
                    for _ in 0..3 {
                        out.push(self.bump().unwrap());
                    }
                }
                Some(c) if is_name_char(c) || c == ':' => {
                    out.push(c);
                    self.bump();
                }
                _ => break,
            }
        }
        while out.ends_with('.') {
            out.pop();
            self.pos -= 1;
        }
        out
    }

    fn next(&mut self) -> Result<Option<Token>, QueryError> {
        self.skip_trivia();
        let pos = self.pos;
        let Some(c) = self.peek() else { return Ok(None) };
        let tok = match c {
            '<' => match self.try_iri() {
                Some(i) => Tok::Iri(i),
                None => self.punct(pos)?,
            },
            '?' | '$' if self.peek_at(1).is_some_and(is_var_char) => {
                self.bump();
                Tok::Var(self.take_while(is_var_char).to_string())
            }
            '"' | '\'' => Tok::Str(self.string(pos)?),
            '@' => {
                self.bump();
                let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                if tag.is_empty() {
                    return Err(self.err(pos, "empty language tag"));
                }
                Tok::LangTag(tag.to_string())
            }
            '^' if self.peek_at(1) == Some('^') => {
                self.pos += 2;
                Tok::DoubleCaret
            }
            '_' if self.peek_at(1) == Some(':') => {
                self.pos += 2;
                let label = self.take_while(is_name_char);
                let label = label.trim_end_matches('.');
                self.pos = pos + 2 + label.len();
                if label.is_empty() {
                    return Err(self.err(pos, "empty blank node label"));
                }
                Tok::Blank(label.to_string())
            }
            '[' => {
                let save = self.pos;
                self.bump();
                self.skip_trivia();
                if self.peek() == Some(']') {
                    self.bump();
                    Tok::Anon
                } else {
                    self.pos = save;
                    self.punct(pos)?
                }
            }
            '0'..='9' => self.number(),
            '.' if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => self.number(),
            ':' => {
                self.bump();
                Tok::PName(String::new(), self.local_name())
            }
            c if is_name_start(c) => {
                let word = self.take_while(is_name_char);
                let word = word.trim_end_matches('.');
                self.pos = pos + word.len();
                if self.peek() == Some(':') {
                    self.bump();
                    Tok::PName(word.to_string(), self.local_name())
                } else {
                    Tok::Word(word.to_string())
                }
            }
            _ => self.punct(pos)?,
        };
        Ok(Some(Token { tok, pos }))
    }

    fn punct(&mut self, pos: usize) -> Result<Tok, QueryError> {
        for p in PUNCTS {
            if self.rest().starts_with(p) {
                self.pos += p.len();
                return Ok(Tok::Punct(p));
            }
        }
        Err(self.err(pos, format!("unexpected character {:?}", self.peek().unwrap())))
    }
}

fn unescape_iri(raw: &str) -> Option<String> {
    if !raw.contains('\\') {
        return Some(raw.to_string());
    }
    let mut out = String::new();
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let n = match chars.next()? {
            'u' => 4,
            'U' => 8,
            _ => return None,
        };
        let hex: String = chars.by_ref().take(n).collect();
        if hex.len() != n {
            return None;
        }
        out.push(char::from_u32(u32::from_str_radix(&hex, 16).ok()?)?);
    }
    Some(out)
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, QueryError> {
    let mut lx = Lexer { src, pos: 0 };
    let mut out = Vec::new();
    while let Some(t) = lx.next()? {
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("SELECT ?N $L WHERE { ?X ex:name ?N . } # c"),
            vec![
                Tok::Word("SELECT".into()),
                Tok::Var("N".into()),
                Tok::Var("L".into()),
                Tok::Word("WHERE".into()),
                Tok::Punct("{"),
                Tok::Var("X".into()),
                Tok::PName("ex".into(), "name".into()),
                Tok::Var("N".into()),
                Tok::Punct("."),
                Tok::Punct("}"),
            ]
        );
    }

    #[test]
    fn iri_versus_less_than() {
        assert_eq!(toks("<http://a>"), vec![Tok::Iri("http://a".into())]);
        assert_eq!(toks("?x < 5"), vec![Tok::Var("x".into()), Tok::Punct("<"), Tok::Integer("5".into())]);
        assert_eq!(toks("?x <= ?y"), vec![Tok::Var("x".into()), Tok::Punct("<="), Tok::Var("y".into())]);
    }

    #[test]
    fn numbers_and_strings() {
        assert_eq!(toks("5 ."), vec![Tok::Integer("5".into()), Tok::Punct(".")]);
        assert_eq!(toks("1.5 2e3 .5"), vec![Tok::Decimal("1.5".into()), Tok::Double("2e3".into()), Tok::Decimal(".5".into())]);
        assert_eq!(toks("'a\\'b' \"\"\"x\"y\"\"\""), vec![Tok::Str("a'b".into()), Tok::Str("x\"y".into())]);
        assert_eq!(toks("\"c\"@en ^^"), vec![Tok::Str("c".into()), Tok::LangTag("en".into()), Tok::DoubleCaret]);
    }

    #[test]
    fn path_operators() {
        assert_eq!(
            toks("ex:p+/^ex:q? ?y"),
            vec![
                Tok::PName("ex".into(), "p".into()),
                Tok::Punct("+"),
                Tok::Punct("/"),
                Tok::Punct("^"),
                Tok::PName("ex".into(), "q".into()),
                Tok::Punct("?"),
                Tok::Var("y".into()),
            ]
        );
        assert_eq!(toks("_:b1. [ ]"), vec![Tok::Blank("b1".into()), Tok::Punct("."), Tok::Anon]);
        assert_eq!(toks("ex:a.b."), vec![Tok::PName("ex".into(), "a.b".into()), Tok::Punct(".")]);
    }
}
