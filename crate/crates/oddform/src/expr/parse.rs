//! Recursive-descent parser for the expression language.
//!
//! Grammar (ASCII, whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' uint)?
//! base   := number | ident | '(' expr ')' | 'sqrt' '(' expr ')' | '-' base
//! ```
//!
//! Identifiers are the chart's coordinates or declared constants; anything
//! else is an [`ParseErrorKind::UnknownIdentifier`] error. All errors carry
//! the byte offset at which they were detected.

use thiserror::Error;

use super::{build, Chart, ScalarExpr, ScalarField};

/// Why parsing failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// A character that can never start a token.
    UnexpectedChar(char),
    /// A well-formed token in the wrong place; `expected` describes what the
    /// grammar allows here.
    UnexpectedToken { found: String, expected: &'static str },
    /// Input ended where the grammar required more.
    UnexpectedEnd { expected: &'static str },
    /// An identifier that is neither a chart coordinate nor a constant.
    UnknownIdentifier(String),
    /// A numeric literal that does not scan as a finite number.
    MalformedNumber(String),
    /// A `^` exponent that does not fit the supported range.
    ExponentOutOfRange(String),
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "unexpected `{found}`, expected {expected}")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` (not a coordinate or constant)")
            }
            ParseErrorKind::MalformedNumber(s) => write!(f, "malformed number `{s}`"),
            ParseErrorKind::ExponentOutOfRange(s) => {
                write!(f, "exponent `{s}` out of range (nonnegative integer expected)")
            }
        }
    }
}

/// Syntax or symbol-resolution error, with the byte offset of the problem.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte offset {offset}")]
pub struct ParseError {
    /// What went wrong.
    pub kind: ParseErrorKind,
    /// Byte offset into the source text.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("{v}"),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token plus the byte offset where it starts.
    fn next(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.src[self.pos..].chars().next() else {
            return Ok(None);
        };
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok(Some((tok, start)));
        }
        if c.is_ascii_digit() {
            let rest = &self.src[self.pos..];
            let mut len = 0;
            let bytes = rest.as_bytes();
            while len < bytes.len() && bytes[len].is_ascii_digit() {
                len += 1;
            }
            if len < bytes.len() && bytes[len] == b'.' {
                len += 1;
                while len < bytes.len() && bytes[len].is_ascii_digit() {
                    len += 1;
                }
            }
            if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
                let mut elen = len + 1;
                if elen < bytes.len() && (bytes[elen] == b'+' || bytes[elen] == b'-') {
                    elen += 1;
                }
                let digits_start = elen;
                while elen < bytes.len() && bytes[elen].is_ascii_digit() {
                    elen += 1;
                }
                // Only treat `e` as an exponent when digits follow; otherwise
                // it is the start of an identifier (e.g. `2*e1`).
                if elen > digits_start {
                    len = elen;
                }
            }
            let text = &rest[..len];
            let value: f64 = text.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::MalformedNumber(text.to_owned()),
                offset: start,
            })?;
            if !value.is_finite() {
                return Err(ParseError {
                    kind: ParseErrorKind::MalformedNumber(text.to_owned()),
                    offset: start,
                });
            }
            self.pos += len;
            return Ok(Some((Tok::Num(value), start)));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let rest = &self.src[self.pos..];
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            let text = rest[..len].to_owned();
            self.pos += len;
            return Ok(Some((Tok::Ident(text), start)));
        }
        Err(ParseError {
            kind: ParseErrorKind::UnexpectedChar(c),
            offset: start,
        })
    }
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    cursor: usize,
    end_offset: usize,
    chart: &'a Chart,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.cursor).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map(|(_, o)| *o)
            .unwrap_or(self.end_offset)
    }

    fn fail(&self, expected: &'static str) -> ParseError {
        match self.tokens.get(self.cursor) {
            Some((tok, offset)) => ParseError {
                kind: ParseErrorKind::UnexpectedToken {
                    found: tok.describe(),
                    expected,
                },
                offset: *offset,
            },
            None => ParseError {
                kind: ParseErrorKind::UnexpectedEnd { expected },
                offset: self.end_offset,
            },
        }
    }

    /// Consume the expected token or fail *at the current position*.
    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.bump();
                Ok(())
            }
            _ => Err(self.fail(expected)),
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let first = self.term()?;
        let mut terms = vec![first];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(build::neg(t));
                }
                _ => break,
            }
        }
        Ok(build::add(terms))
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let f = self.factor()?;
                    acc = build::mul(vec![acc, f]);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let f = self.factor()?;
                    acc = build::quot(acc, f);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let offset = self.here();
            match self.bump() {
                Some((Tok::Num(v), _)) => {
                    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                        return Err(ParseError {
                            kind: ParseErrorKind::ExponentOutOfRange(format!("{v}")),
                            offset,
                        });
                    }
                    Ok(build::pow(base, v as u32))
                }
                Some((tok, offset)) => Err(ParseError {
                    kind: ParseErrorKind::UnexpectedToken {
                        found: tok.describe(),
                        expected: "a nonnegative integer exponent",
                    },
                    offset,
                }),
                None => Err(ParseError {
                    kind: ParseErrorKind::UnexpectedEnd {
                        expected: "a nonnegative integer exponent",
                    },
                    offset: self.end_offset,
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<ScalarExpr, ParseError> {
        match self.peek() {
            Some(Tok::Num(_)) => {
                let Some((Tok::Num(v), _)) = self.bump() else {
                    unreachable!()
                };
                Ok(build::lit(v))
            }
            Some(Tok::Ident(name)) if name == "sqrt" => {
                self.bump();
                self.expect(Tok::LParen, "`(` after sqrt")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(build::sqrt(inner))
            }
            Some(Tok::Ident(_)) => {
                let Some((Tok::Ident(name), offset)) = self.bump() else {
                    unreachable!()
                };
                if let Some(i) = self.chart.coord_index(&name) {
                    Ok(build::coord(i))
                } else if let Some(i) = self.chart.constant_index(&name) {
                    Ok(build::konst(i))
                } else {
                    Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        offset,
                    })
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Minus) => {
                self.bump();
                let inner = self.base()?;
                Ok(build::neg(inner))
            }
            _ => Err(self.fail("a number, identifier, `(` or `-`")),
        }
    }
}

/// Parse `text` into a [`ScalarField`] over `chart`.
///
/// Errors report the byte offset of the first problem; identifiers must be
/// chart coordinates or declared constants.
pub fn parse_expr(text: &str, chart: &Chart) -> Result<ScalarField, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next()? {
        tokens.push(tok);
    }
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end_offset: text.len(),
        chart,
    };
    let expr = parser.expr()?;
    if parser.cursor != parser.tokens.len() {
        return Err(parser.fail("end of input"));
    }
    Ok(build::field(chart, expr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new(&["t", "x1", "x2", "x10"], &[("c", 2.0)]).unwrap()
    }

    #[test]
    fn parses_arithmetic() {
        let ch = chart();
        let f = parse_expr("t + x1^2", &ch).unwrap();
        let p = ch.point(&[1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.eval(&p).unwrap(), 5.0);
    }

    #[test]
    fn parses_sqrt_quotient() {
        let ch = chart();
        let f = parse_expr("1/sqrt(1 - x10^2)", &ch).unwrap();
        let p = ch.point(&[0.0, 0.0, 0.0, 0.5]).unwrap();
        let expected = 1.0 / (1.0f64 - 0.25).sqrt();
        assert_eq!(f.eval(&p).unwrap(), expected);
    }

    #[test]
    fn reports_offset_of_missing_operand() {
        let ch = chart();
        let err = parse_expr("x1 +", &ch).unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));
    }

    #[test]
    fn reports_unknown_identifier_by_name() {
        let ch = chart();
        let err = parse_expr("t + bogus", &ch).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("bogus".into()));
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let ch = chart();
        let f = parse_expr("-t^2 + 2*x1", &ch).unwrap();
        // Per the grammar, `-t^2` is `(-t)^2`.
        let p = ch.point(&[3.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.eval(&p).unwrap(), 11.0);
    }

    #[test]
    fn division_is_left_associative() {
        let ch = chart();
        let f = parse_expr("8/2/2", &ch).unwrap();
        let p = ch.point(&[0.0; 4]).unwrap();
        assert_eq!(f.eval(&p).unwrap(), 2.0);
    }

    #[test]
    fn rejects_chained_powers() {
        let ch = chart();
        assert!(parse_expr("t^2^3", &ch).is_err());
    }

    #[test]
    fn rejects_fractional_exponent() {
        let ch = chart();
        let err = parse_expr("t^2.5", &ch).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ExponentOutOfRange(_)));
    }

    #[test]
    fn scientific_notation_literals() {
        let ch = chart();
        let f = parse_expr("1.5e-3 + t", &ch).unwrap();
        let p = ch.point(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.eval(&p).unwrap(), 1.0015);
    }

    #[test]
    fn unexpected_character_reports_position() {
        let ch = chart();
        let err = parse_expr("t + @", &ch).unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('@'));
    }

    #[test]
    fn whitespace_is_insignificant() {
        let ch = chart();
        let a = parse_expr("t+x1*x2", &ch).unwrap();
        let b = parse_expr("  t  +  x1 * x2  ", &ch).unwrap();
        let p = ch.point(&[1.0, 2.0, 3.0, 0.0]).unwrap();
        assert_eq!(a.eval(&p).unwrap(), b.eval(&p).unwrap());
    }
}
