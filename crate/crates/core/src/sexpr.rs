//! S-expressions: the one data model shared by programs, message contents and
//! the wire format.
//!
//! The reader accepts symbols, signed integers, decimals, `#t`/`#f`,
//! double-quoted strings, proper lists and the `'x` quote shorthand. The
//! printer emits the canonical form: single spaces between list elements and
//! the shortest decimal representation that reads back to the same number.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A case-sensitive symbol name.
///
/// Construction is validated so that every symbol prints as a token that the
/// reader turns back into the same symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Result<Symbol, InvalidSymbol> {
        if is_symbol_token(name) {
            Ok(Symbol(Arc::from(name)))
        } else {
            Err(InvalidSymbol(name.to_string()))
        }
    }

    /// Builds a symbol from a name known to be valid.
    ///
    /// Panics on invalid names; meant for literals in host code.
    pub fn from_static(name: &'static str) -> Symbol {
        Symbol::new(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}", self.0)
    }
}

impl std::borrow::Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for Symbol {
    fn eq(&self, other: &str) -> bool {
        &*self.0 == other
    }
}

impl PartialEq<&str> for Symbol {
    fn eq(&self, other: &&str) -> bool {
        &*self.0 == *other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid symbol name {0:?}")]
pub struct InvalidSymbol(pub String);

/// Exact 64-bit integers or decimals. There is no rational or bignum tower.
#[derive(Debug, Clone, Copy)]
pub enum Number {
    Int(i64),
    Dec(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Dec(d) => d,
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            (Number::Dec(a), Number::Dec(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            // Debug gives the shortest round-tripping form and always keeps a
            // `.` or exponent, so the token reads back as a decimal.
            Number::Dec(d) => write!(f, "{d:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Symbol(Symbol),
    Number(Number),
    Bool(bool),
    Str(Arc<str>),
    List(Arc<[SExpr]>),
}

impl SExpr {
    /// Panics on an invalid symbol name.
    pub fn sym(name: &'static str) -> SExpr {
        SExpr::Symbol(Symbol::from_static(name))
    }

    pub fn int(i: i64) -> SExpr {
        SExpr::Number(Number::Int(i))
    }

    pub fn string(s: &str) -> SExpr {
        SExpr::Str(Arc::from(s))
    }

    pub fn list(items: Vec<SExpr>) -> SExpr {
        SExpr::List(Arc::from(items))
    }

    pub fn nil() -> SExpr {
        SExpr::List(Arc::from(Vec::new()))
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            SExpr::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            _ => None,
        }
    }

    /// True when this is a list whose first element is the symbol `head`.
    pub fn is_form(&self, head: &str) -> bool {
        matches!(self.as_list(), Some([SExpr::Symbol(s), ..]) if s == head)
    }
}

impl From<Symbol> for SExpr {
    fn from(s: Symbol) -> Self {
        SExpr::Symbol(s)
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Symbol(s) => f.write_str(s.as_str()),
            SExpr::Number(n) => write!(f, "{n}"),
            SExpr::Bool(true) => f.write_str("#t"),
            SExpr::Bool(false) => f.write_str("#f"),
            SExpr::Str(s) => write_string_literal(f, s),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn write_string_literal(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

/// Canonical text form.
pub fn print(expr: &SExpr) -> String {
    expr.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedEof,
    UnexpectedCloseParen,
    TrailingInput,
    IllegalToken(String),
    BadEscape(char),
    UnterminatedString,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::EmptyInput => f.write_str("empty input"),
            ParseErrorKind::UnexpectedEof => f.write_str("unbalanced parentheses: unexpected end of input"),
            ParseErrorKind::UnexpectedCloseParen => f.write_str("unbalanced parentheses: unexpected `)`"),
            ParseErrorKind::TrailingInput => f.write_str("trailing input after expression"),
            ParseErrorKind::IllegalToken(t) => write!(f, "illegal token {t:?}"),
            ParseErrorKind::BadEscape(c) => write!(f, "unknown string escape \\{c}"),
            ParseErrorKind::UnterminatedString => f.write_str("unterminated string"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at line {line}, column {column}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

/// Reads exactly one expression; surrounding whitespace is allowed.
pub fn read(text: &str) -> Result<SExpr, ParseError> {
    let mut reader = Reader::new(text);
    reader.skip_atmosphere();
    if reader.at_end() {
        return Err(reader.error(ParseErrorKind::EmptyInput));
    }
    let expr = reader.expr()?;
    reader.skip_atmosphere();
    if !reader.at_end() {
        return Err(reader.error(ParseErrorKind::TrailingInput));
    }
    Ok(expr)
}

/// Reads a sequence of expressions, e.g. a seed file. `;` starts a line comment.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut reader = Reader::new(text);
    let mut out = Vec::new();
    loop {
        reader.skip_atmosphere();
        if reader.at_end() {
            return Ok(out);
        }
        out.push(reader.expr()?);
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '\'' | '"' | ';')
}

fn is_integer_syntax(tok: &str) -> bool {
    let digits = tok.strip_prefix(['+', '-']).unwrap_or(tok);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_decimal_syntax(tok: &str) -> bool {
    let body = tok.strip_prefix(['+', '-']).unwrap_or(tok);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], Some(&mantissa[i + 1..])),
        None => (mantissa, None),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !frac_part.is_none_or(all_digits) {
        return false;
    }
    if int_part.is_empty() && frac_part.is_none_or(str::is_empty) {
        return false;
    }
    match exponent {
        Some(e) => is_integer_syntax(e),
        None => frac_part.is_some(),
    }
}

fn is_symbol_token(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('#')
        && !name.chars().any(is_delimiter)
        && !is_integer_syntax(name)
        && !is_decimal_syntax(name)
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader { text, pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(kind, self.pos)
    }

    fn error_at(&self, kind: ParseErrorKind, offset: usize) -> ParseError {
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { kind, offset, line, column }
    }

    fn skip_atmosphere(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<SExpr, ParseError> {
        self.skip_atmosphere();
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEof)),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_atmosphere();
                    match self.peek() {
                        None => return Err(self.error(ParseErrorKind::UnexpectedEof)),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::list(items));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(')') => Err(self.error(ParseErrorKind::UnexpectedCloseParen)),
            Some('\'') => {
                self.bump();
                let quoted = self.expr()?;
                Ok(SExpr::list(vec![SExpr::sym("quote"), quoted]))
            }
            Some('"') => self.string(),
            Some(_) => self.atom(),
        }
    }

    fn string(&mut self) -> Result<SExpr, ParseError> {
        let start = self.pos;
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error_at(ParseErrorKind::UnterminatedString, start)),
                Some('"') => return Ok(SExpr::Str(Arc::from(out))),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some(c) => return Err(self.error(ParseErrorKind::BadEscape(c))),
                    None => return Err(self.error_at(ParseErrorKind::UnterminatedString, start)),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn atom(&mut self) -> Result<SExpr, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if is_delimiter(c) {
                break;
            }
            self.bump();
        }
        let tok = &self.text[start..self.pos];
        let illegal = || self.error_at(ParseErrorKind::IllegalToken(tok.to_string()), start);
        if is_integer_syntax(tok) {
            return tok.parse::<i64>().map(SExpr::int).map_err(|_| illegal());
        }
        if is_decimal_syntax(tok) {
            return match tok.parse::<f64>() {
                Ok(d) if d.is_finite() => Ok(SExpr::Number(Number::Dec(d))),
                _ => Err(illegal()),
            };
        }
        match tok {
            "#t" => Ok(SExpr::Bool(true)),
            "#f" => Ok(SExpr::Bool(false)),
            _ => Symbol::new(tok).map(SExpr::Symbol).map_err(|_| illegal()),
        }
    }
}
