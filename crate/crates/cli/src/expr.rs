//! Polynomial expressions in `x1..x{2n}` and `h`, and cross-product elements.
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := power ('*' power)*
//! power   := atom ['^' INT]
//! atom    := INT ['/' INT] | 'x'INT | 'h' | '(' expr ')'
//! cross   := ['-'] cterm (('+'|'-') cterm)*
//! cterm   := '(' expr ')' ('*' NAME)* | NAME ('*' NAME)*
//! ```

use std::collections::BTreeMap;
use std::fmt;

use fedosov::ring::{Poly, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// A syntax or semantic error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Slash => f.write_str("/"),
            Tok::Caret => f.write_str("^"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::Comma => f.write_str(","),
            Tok::Eq => f.write_str("="),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub col: usize,
}

/// Splits one line into tokens; `col0` is the column of the first character.
pub fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Int(digits.parse().expect("ascii digits")),
                col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            _ => return Err(ParseError::new(line, col, format!("unexpected character `{c}`"))),
        };
        out.push(Token { tok, col });
        i += 1;
    }
    Ok(out)
}

/// Parsed polynomial expression; variables are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyExpr {
    Num(Rational),
    Var(usize),
    H,
    Neg(Box<PolyExpr>),
    Add(Box<PolyExpr>, Box<PolyExpr>),
    Sub(Box<PolyExpr>, Box<PolyExpr>),
    Mul(Box<PolyExpr>, Box<PolyExpr>),
    Pow(Box<PolyExpr>, u32),
}

/// Coefficients of `h^l`, each a polynomial in `x`.
pub type HSeries = BTreeMap<u32, Poly>;

fn series_add(a: &HSeries, b: &HSeries, sign: i64) -> HSeries {
    let mut out = a.clone();
    for (l, p) in b {
        let q = if sign < 0 { -p } else { p.clone() };
        let e = out.entry(*l).or_insert_with(|| Poly::zero(p.dim()));
        *e = &*e + &q;
    }
    out.retain(|_, p| !p.is_zero());
    out
}

fn series_mul(a: &HSeries, b: &HSeries) -> HSeries {
    let mut out = HSeries::new();
    for (la, pa) in a {
        for (lb, pb) in b {
            let e = out.entry(la + lb).or_insert_with(|| Poly::zero(pa.dim()));
            *e = &*e + &(pa * pb);
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

impl PolyExpr {
    /// Expands into powers of `h` with polynomial coefficients.
    pub fn to_series(&self, dim: usize) -> HSeries {
        let mut out = HSeries::new();
        match self {
            PolyExpr::Num(c) => {
                if !c.is_zero() {
                    out.insert(0, Poly::constant(dim, c.clone()));
                }
                out
            }
            PolyExpr::Var(i) => {
                out.insert(0, Poly::var(dim, *i));
                out
            }
            PolyExpr::H => {
                out.insert(1, Poly::one(dim));
                out
            }
            PolyExpr::Neg(a) => series_add(&out, &a.to_series(dim), -1),
            PolyExpr::Add(a, b) => series_add(&a.to_series(dim), &b.to_series(dim), 1),
            PolyExpr::Sub(a, b) => series_add(&a.to_series(dim), &b.to_series(dim), -1),
            PolyExpr::Mul(a, b) => series_mul(&a.to_series(dim), &b.to_series(dim)),
            PolyExpr::Pow(a, e) => {
                let base = a.to_series(dim);
                out.insert(0, Poly::one(dim));
                for _ in 0..*e {
                    out = series_mul(&out, &base);
                }
                out
            }
        }
    }

    /// The polynomial value of an expression without `h`.
    pub fn to_poly(&self, dim: usize) -> Poly {
        self.to_series(dim).remove(&0).unwrap_or_else(|| Poly::zero(dim))
    }
}

/// One summand `f * e_{i1} ⋯ e_{ik}` of a cross-product element; the word
/// may be in any order.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossTerm {
    pub coeff: PolyExpr,
    pub word: Vec<usize>,
}

/// Recursive-descent parser over one line's tokens.
pub struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
    dim: usize,
    allow_h: bool,
}

impl<'a> Parser<'a> {
    /// `end_col` is reported for errors at the end of input.
    pub fn new(toks: &'a [Token], line: usize, end_col: usize, dim: usize, allow_h: bool) -> Self {
        Parser {
            toks,
            pos: 0,
            line,
            end_col,
            dim,
            allow_h,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found `{t}`")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn peek_is(&self, t: &Tok) -> bool {
        self.peek() == Some(t)
    }

    /// Column of the next token, or of the end of input.
    pub fn current_col(&self) -> usize {
        self.col()
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{t}`")))
        }
    }

    pub fn expr(&mut self) -> Result<PolyExpr, ParseError> {
        let mut acc = if self.eat(&Tok::Minus) {
            PolyExpr::Neg(Box::new(self.term()?))
        } else {
            self.eat(&Tok::Plus);
            self.term()?
        };
        loop {
            if self.eat(&Tok::Plus) {
                acc = PolyExpr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                acc = PolyExpr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr, ParseError> {
        let mut acc = self.power()?;
        while self.eat(&Tok::Star) {
            acc = PolyExpr::Mul(Box::new(acc), Box::new(self.power()?));
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<PolyExpr, ParseError> {
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        match self.peek() {
            Some(Tok::Int(n)) => {
                let e = u32::try_from(n).map_err(|_| self.error("exponent too large"))?;
                self.pos += 1;
                Ok(PolyExpr::Pow(Box::new(base), e))
            }
            _ => Err(self.unexpected("a nonnegative integer exponent")),
        }
    }

    fn int(&mut self) -> Option<BigInt> {
        if let Some(Tok::Int(n)) = self.peek() {
            let n = n.clone();
            self.pos += 1;
            Some(n)
        } else {
            None
        }
    }

    fn atom(&mut self) -> Result<PolyExpr, ParseError> {
        if let Some(n) = self.int() {
            if self.eat(&Tok::Slash) {
                let col = self.col();
                let d = self
                    .int()
                    .ok_or_else(|| self.unexpected("an integer denominator"))?;
                if d.is_zero() {
                    return Err(ParseError::new(self.line, col, "zero denominator"));
                }
                return Ok(PolyExpr::Num(Rational::new(n, d)));
            }
            return Ok(PolyExpr::Num(Rational::from_integer(n)));
        }
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        if let Some(Tok::Ident(name)) = self.peek() {
            let name = name.clone();
            if name == "h" {
                if !self.allow_h {
                    return Err(self.error("`h` is not allowed here"));
                }
                self.pos += 1;
                return Ok(PolyExpr::H);
            }
            if let Some(i) = variable_index(&name) {
                if i == 0 || i > self.dim {
                    return Err(self.error(format!("variable `{name}` outside x1..x{}", self.dim)));
                }
                self.pos += 1;
                return Ok(PolyExpr::Var(i - 1));
            }
            return Err(self.error(format!("unknown name `{name}`")));
        }
        Err(self.unexpected("a number, variable, `h` or `(`"))
    }

    /// A name token, returned with its column.
    pub fn name(&mut self) -> Result<(String, usize), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let out = (s.clone(), self.col());
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub fn int_token(&mut self) -> Result<(BigInt, usize), ParseError> {
        let col = self.col();
        self.int()
            .map(|n| (n, col))
            .ok_or_else(|| self.unexpected("an integer"))
    }

    /// Cross-product element over the given basis names.
    pub fn cross(&mut self, basis: &[String]) -> Result<Vec<CrossTerm>, ParseError> {
        let mut out = Vec::new();
        let mut negate = self.eat(&Tok::Minus);
        loop {
            let mut term = self.cross_term(basis)?;
            if negate {
                term.coeff = PolyExpr::Neg(Box::new(term.coeff));
            }
            out.push(term);
            if self.eat(&Tok::Plus) {
                negate = false;
            } else if self.eat(&Tok::Minus) {
                negate = true;
            } else {
                return Ok(out);
            }
        }
    }

    fn cross_term(&mut self, basis: &[String]) -> Result<CrossTerm, ParseError> {
        let mut word = Vec::new();
        let coeff = if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            if !self.eat(&Tok::Star) {
                return Ok(CrossTerm { coeff: e, word });
            }
            e
        } else {
            PolyExpr::Num(Rational::one())
        };
        loop {
            let col = self.col();
            let (name, _) = self.name().map_err(|_| self.unexpected("a basis element"))?;
            let i = basis
                .iter()
                .position(|b| *b == name)
                .ok_or_else(|| ParseError::new(self.line, col, format!("unknown basis element `{name}`")))?;
            word.push(i);
            if !self.eat(&Tok::Star) {
                return Ok(CrossTerm { coeff, word });
            }
        }
    }
}

impl Parser<'_> {
    /// `Σ c_k e_k` with rational literal coefficients, or `0`.
    pub fn lincomb(&mut self, basis: &[String]) -> Result<Vec<(usize, Rational)>, ParseError> {
        let mut out = Vec::new();
        let mut sign = if self.eat(&Tok::Minus) { -1 } else { 1 };
        loop {
            let mut c = Rational::from_integer(sign.into());
            if let Some(n) = self.int() {
                let mut v = Rational::from_integer(n);
                if self.eat(&Tok::Slash) {
                    let col = self.col();
                    let d = self
                        .int()
                        .ok_or_else(|| self.unexpected("an integer denominator"))?;
                    if d.is_zero() {
                        return Err(ParseError::new(self.line, col, "zero denominator"));
                    }
                    v /= Rational::from_integer(d);
                }
                if v.is_zero() && out.is_empty() && self.at_end() {
                    return Ok(out);
                }
                c *= v;
                self.expect(Tok::Star)?;
            }
            let col = self.col();
            let (name, _) = self.name().map_err(|_| self.unexpected("a basis element"))?;
            let i = basis
                .iter()
                .position(|b| *b == name)
                .ok_or_else(|| ParseError::new(self.line, col, format!("unknown basis element `{name}`")))?;
            out.push((i, c));
            if self.eat(&Tok::Plus) {
                sign = 1;
            } else if self.eat(&Tok::Minus) {
                sign = -1;
            } else {
                return Ok(out);
            }
        }
    }
}

/// `x<k>` for `k` a decimal integer.
pub fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses a standalone expression given on the command line.
pub fn parse_expr(text: &str, dim: usize, allow_h: bool) -> Result<PolyExpr, ParseError> {
    let toks = tokenize(text, 1, 1)?;
    let mut p = Parser::new(&toks, 1, text.chars().count() + 1, dim, allow_h);
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a standalone cross-product element.
pub fn parse_cross(text: &str, dim: usize, basis: &[String]) -> Result<Vec<CrossTerm>, ParseError> {
    let toks = tokenize(text, 1, 1)?;
    if let [Token { tok: Tok::Int(n), .. }] = toks.as_slice() {
        if n.is_zero() {
            return Ok(Vec::new());
        }
    }
    let mut p = Parser::new(&toks, 1, text.chars().count() + 1, dim, true);
    let e = p.cross(basis)?;
    p.finish()?;
    Ok(e)
}
