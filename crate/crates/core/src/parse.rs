//! Reader for the system DSL.
//!
//! ```text
//! # circles in R^3
//! m = 2
//! f1 = 3*q1*(p1*q1 + p2*q2)/(1 + p1^2 + p2^2)
//! f2 = 3*q2*(p1*q1 + p2*q2)/(1 + p1^2 + p2^2)
//! ```
//!
//! Statements are separated by newlines or `;`. Expressions use `+ - * / ^`,
//! parentheses, rational literals, `sin cos exp ln`, and the coordinates
//! `x`, `y<i>`, `p<i>`, `q<i>` (with `y<i>'` and `y<i>''` as aliases for
//! `p<i>` and `q<i>`). Exponents must be integer constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ParseError;
use crate::expr::{Expr, Func, Var};
use crate::system::OdeSystem;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::SyntaxError {
        line,
        column,
        message: message.into(),
    }
}

/// Tokenizes one statement. `column0` is the 1-based column of `src[0]`.
fn lex(src: &str, line: usize, column0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = column0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, line, column });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut frac_part = String::new();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = chars[fs..i].iter().collect();
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(syntax(line, column, "malformed number"));
            }
            let digits = format!("{int_part}{frac_part}");
            let n: BigInt = digits.parse().map_err(|_| syntax(line, column, "malformed number"))?;
            let d = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push(Token {
                tok: Tok::Num(BigRational::new(n, d)),
                line,
                column,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                column,
            });
            continue;
        }
        return Err(syntax(line, column, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: column0 + chars.len(),
    });
    Ok(out)
}

/// Resolves a coordinate name for dimension `m`.
fn resolve_var(name: &str, m: usize, line: usize, column: usize) -> Result<Option<Var>, ParseError> {
    if name == "x" {
        return Ok(Some(Var::X));
    }
    let primes = name.chars().rev().take_while(|&c| c == '\'').count();
    let stem = &name[..name.len() - primes];
    let mut chars = stem.chars();
    let Some(head) = chars.next() else {
        return Ok(None);
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Ok(None);
    }
    let ctor: fn(usize) -> Var = match (head, primes) {
        ('y', 0) => Var::Y,
        ('y', 1) | ('p', 0) => Var::P,
        ('y', 2) | ('q', 0) => Var::Q,
        _ => return Ok(None),
    };
    let out_of_range = || ParseError::IndexOutOfRange {
        line,
        column,
        name: name.to_string(),
        m,
    };
    let index: usize = digits.parse().map_err(|_| out_of_range())?;
    if index == 0 || index > m {
        return Err(out_of_range());
    }
    Ok(Some(ctor(index)))
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    m: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(t.line, t.column, format!("expected {what}")))
        }
    }

    fn infix_power(tok: &Tok) -> Option<(u8, u8)> {
        match tok {
            Tok::Plus | Tok::Minus => Some((1, 2)),
            Tok::Star | Tok::Slash => Some((3, 4)),
            Tok::Caret => Some((7, 6)),
            _ => None,
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let t = self.next();
        let mut lhs = match t.tok {
            Tok::Num(c) => Expr::constant(c),
            Tok::Minus => -self.expr(5)?,
            Tok::Plus => self.expr(5)?,
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                inner
            }
            Tok::Ident(name) => self.identifier(&name, t.line, t.column)?,
            Tok::End => return Err(syntax(t.line, t.column, "unexpected end of expression")),
            _ => return Err(syntax(t.line, t.column, "expected an operand")),
        };
        loop {
            let op = self.peek().clone();
            let Some((lbp, rbp)) = Self::infix_power(&op.tok) else {
                break;
            };
            if lbp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(rbp)?;
            lhs = match op.tok {
                Tok::Plus => lhs + rhs,
                Tok::Minus => lhs - rhs,
                Tok::Star => lhs * rhs,
                Tok::Slash => lhs / rhs,
                Tok::Caret => Expr::pow(&lhs, integer_exponent(&rhs, op.line, op.column)?),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn identifier(&mut self, name: &str, line: usize, column: usize) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::LParen {
            let Some(func) = Func::from_name(name) else {
                return Err(ParseError::UnknownFunction {
                    line,
                    column,
                    name: name.to_string(),
                });
            };
            self.next();
            let arg = self.expr(0)?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::apply(func, arg));
        }
        if Func::from_name(name).is_some() {
            return Err(syntax(line, column, format!("function `{name}` needs an argument")));
        }
        match resolve_var(name, self.m, line, column)? {
            Some(v) => Ok(Expr::var(v)),
            None => Err(syntax(line, column, format!("unknown identifier `{name}`"))),
        }
    }
}

fn integer_exponent(e: &Expr, line: usize, column: usize) -> Result<i32, ParseError> {
    let Some(c) = e.as_const() else {
        return Err(syntax(line, column, "exponent must be an integer constant"));
    };
    if !c.denom().is_one() {
        return Err(syntax(line, column, "rational powers are not supported"));
    }
    i32::try_from(c.numer().clone()).map_err(|_| syntax(line, column, "exponent too large"))
}

fn parse_tokens(toks: &[Token], m: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { toks, pos: 0, m };
    let e = p.expr(0)?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(syntax(t.line, t.column, "unexpected trailing input"));
    }
    Ok(e)
}

/// Parses a single expression over a system of dimension `m`.
pub fn parse_expr(text: &str, m: usize) -> Result<Expr, ParseError> {
    let toks = lex(text, 1, 1)?;
    parse_tokens(&toks, m)
}

/// One `;`/newline separated statement with its source position.
struct Statement<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn statements(text: &str) -> Vec<Statement<'_>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for piece in body.split(';') {
            if !piece.trim().is_empty() {
                out.push(Statement {
                    text: piece,
                    line: ln + 1,
                    column: offset + 1,
                });
            }
            offset += piece.chars().count() + 1;
        }
    }
    out
}

/// Parses a complete system description.
pub fn parse_system(text: &str) -> Result<OdeSystem, ParseError> {
    let mut m: Option<usize> = None;
    let mut rhs: Vec<Option<Expr>> = Vec::new();
    let mut last_line = 1;
    for st in statements(text) {
        last_line = st.line;
        let toks = lex(st.text, st.line, st.column)?;
        let (name, at) = match &toks[0].tok {
            Tok::Ident(n) => (n.clone(), &toks[0]),
            _ => {
                return Err(syntax(
                    toks[0].line,
                    toks[0].column,
                    "expected `m = <int>` or `f<i> = <expr>`",
                ))
            }
        };
        if toks[1].tok != Tok::Eq {
            return Err(syntax(toks[1].line, toks[1].column, "expected `=`"));
        }
        let body = &toks[2..];
        if name == "m" {
            if m.is_some() {
                return Err(syntax(at.line, at.column, "dimension declared twice"));
            }
            let value = match body {
                [Token { tok: Tok::Num(c), .. }, Token { tok: Tok::End, .. }]
                    if c.is_integer() && *c >= BigRational::zero() =>
                {
                    c.to_integer()
                }
                _ => {
                    return Err(syntax(
                        body[0].line,
                        body[0].column,
                        "`m` must be a non-negative integer",
                    ))
                }
            };
            let dim = usize::try_from(value).map_err(|_| syntax(at.line, at.column, "dimension too large"))?;
            if dim < 2 {
                return Err(ParseError::DimensionTooSmall { m: dim });
            }
            m = Some(dim);
            rhs = vec![None; dim];
            continue;
        }
        let Some(dim) = m else {
            return Err(syntax(at.line, at.column, "`m = <int>` must come before the equations"));
        };
        let index = name
            .strip_prefix('f')
            .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| syntax(at.line, at.column, format!("unknown left-hand side `{name}`")))?;
        if index == 0 || index > dim {
            return Err(ParseError::IndexOutOfRange {
                line: at.line,
                column: at.column,
                name,
                m: dim,
            });
        }
        if rhs[index - 1].is_some() {
            return Err(syntax(at.line, at.column, format!("`{name}` defined twice")));
        }
        if body[0].tok == Tok::End {
            return Err(syntax(body[0].line, body[0].column, "missing right-hand side"));
        }
        rhs[index - 1] = Some(parse_tokens(body, dim)?);
    }
    let Some(dim) = m else {
        return Err(syntax(last_line, 1, "missing `m = <int>`"));
    };
    let mut f = Vec::with_capacity(dim);
    for (i, e) in rhs.into_iter().enumerate() {
        match e {
            Some(e) => f.push(e),
            None => return Err(syntax(last_line, 1, format!("missing definition of f{}", i + 1))),
        }
    }
    Ok(OdeSystem::new(f).expect("validated by the parser"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::circles_system;

    #[test]
    fn parses_simple_system() {
        let sys = parse_system("m=2\nf1 = q2^2\nf2 = 0").unwrap();
        assert_eq!(sys.f(1), &Expr::q(2).powi(2));
        assert_eq!(sys.f(2), &Expr::zero());
    }

    #[test]
    fn semicolons_and_comments() {
        let sys = parse_system("m=2; f1=0; f2=x # comment\n").unwrap();
        assert_eq!(sys.f(2), &Expr::x());
    }

    #[test]
    fn index_out_of_range() {
        let err = parse_system("m=2\nf1 = q3\nf2 = 0").unwrap_err();
        assert!(
            matches!(err, ParseError::IndexOutOfRange { line: 2, column: 6, .. }),
            "{err:?}"
        );
        assert!(matches!(
            parse_system("m=2\nf3 = 0").unwrap_err(),
            ParseError::IndexOutOfRange { .. }
        ));
    }

    #[test]
    fn dimension_too_small() {
        assert_eq!(
            parse_system("m=1\nf1=0").unwrap_err(),
            ParseError::DimensionTooSmall { m: 1 }
        );
    }

    #[test]
    fn unknown_function() {
        let err = parse_system("m=2\nf1 = tan(x)\nf2 = 0").unwrap_err();
        assert!(matches!(err, ParseError::UnknownFunction { ref name, .. } if name == "tan"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_system("m=2\nf1 = (x + \nf2 = 0").unwrap_err();
        assert!(matches!(err, ParseError::SyntaxError { line: 2, .. }), "{err:?}");
        let err = parse_system("m=2\nf1 = x $ 2\nf2 = 0").unwrap_err();
        assert!(
            matches!(err, ParseError::SyntaxError { line: 2, column: 8, .. }),
            "{err:?}"
        );
        assert!(parse_system("m=2\nf1 = 0").is_err());
        assert!(parse_system("f1 = 0\nm=2").is_err());
        assert!(parse_system("m=2\nf1=0\nf1=1\nf2=0").is_err());
    }

    #[test]
    fn rational_powers_rejected() {
        assert!(parse_expr("q1^(1/2)", 2).is_err());
        assert!(parse_expr("q1^x", 2).is_err());
        assert_eq!(parse_expr("q1^-2", 2).unwrap(), Expr::q(1).powi(-2));
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_expr("-q1^2", 2).unwrap(), -Expr::q(1).powi(2));
        assert_eq!(parse_expr("2^3^2", 2).unwrap(), Expr::integer(512));
        assert_eq!(parse_expr("1 - 2 - 3", 2).unwrap(), Expr::integer(-4));
        assert_eq!(parse_expr("8/2/2", 2).unwrap(), Expr::integer(2));
        assert_eq!(parse_expr("0.25", 2).unwrap(), Expr::rational(1, 4));
    }

    #[test]
    fn prime_aliases() {
        assert_eq!(parse_expr("y1' + y2''", 2).unwrap(), Expr::p(1) + Expr::q(2));
    }

    #[test]
    fn circles_roundtrip() {
        for m in 2..=4 {
            let sys = circles_system(m).unwrap();
            let back = parse_system(&sys.render()).unwrap();
            assert_eq!(back, sys);
        }
    }
}
