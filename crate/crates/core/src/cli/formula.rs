//! Regression formulas.
//!
//! A formula is a `+`-separated list of terms, each of which becomes one
//! column of the design matrix (there is no intercept). Terms are products
//! of column references, numbers, parenthesized shifts such as
//! `(distance-27)` and indicators such as `I(distance<=27)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl Cmp {
    fn apply(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Le => a <= b,
            Cmp::Lt => a < b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Col(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Indicator(Cmp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, lookup: &dyn Fn(&str) -> f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Col(c) => lookup(c),
            Expr::Neg(e) => -e.eval(lookup),
            Expr::Add(a, b) => a.eval(lookup) + b.eval(lookup),
            Expr::Sub(a, b) => a.eval(lookup) - b.eval(lookup),
            Expr::Mul(a, b) => a.eval(lookup) * b.eval(lookup),
            Expr::Div(a, b) => a.eval(lookup) / b.eval(lookup),
            Expr::Indicator(op, a, b) => {
                if op.apply(a.eval(lookup), b.eval(lookup)) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn columns_into(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Col(c) => {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
            Expr::Neg(e) => e.columns_into(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Indicator(_, a, b) => {
                a.columns_into(out);
                b.columns_into(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    /// Source text, used as the coefficient name.
    pub name: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Formula {
    pub terms: Vec<Term>,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.terms.iter().map(|t| t.name.as_str()).collect();
        f.write_str(&names.join(" + "))
    }
}

impl Formula {
    pub fn parse(src: &str) -> Result<Formula> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, src };
        let mut terms = Vec::new();
        if p.tokens.is_empty() {
            return Ok(Formula { terms });
        }
        loop {
            let start = p.offset();
            let expr = p.product()?;
            let end = p.offset();
            terms.push(Term {
                name: src[start..end].split_whitespace().collect::<String>(),
                expr,
            });
            match p.peek() {
                None => break,
                Some(Tok::Plus) => p.pos += 1,
                Some(Tok::Minus) => {
                    return Err(Error::Formula(
                        "'-' between terms is ambiguous; wrap shifts in parentheses, e.g. (x-27)".into(),
                    ))
                }
                Some(t) => return Err(Error::Formula(format!("unexpected {t:?} in formula"))),
            }
        }
        let mut seen = std::collections::HashSet::new();
        for t in &terms {
            if !seen.insert(&t.name) {
                return Err(Error::Formula(format!("term '{}' appears twice", t.name)));
            }
        }
        Ok(Formula { terms })
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.name.clone()).collect()
    }

    /// Columns referenced by any term, in order of first use.
    pub fn columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.terms {
            t.expr.columns_into(&mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Cmp(Cmp),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let end_of = |k: usize| chars.get(k).map(|c| c.0).unwrap_or(src.len());
    while i < chars.len() {
        let (at, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '≤' => Some(Tok::Cmp(Cmp::Le)),
            '≥' => Some(Tok::Cmp(Cmp::Ge)),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, at, end_of(i + 1)));
            i += 1;
            continue;
        }
        if matches!(c, '<' | '>' | '=' | '!') {
            let next = chars.get(i + 1).map(|c| c.1);
            let (op, width) = match (c, next) {
                ('<', Some('=')) => (Cmp::Le, 2),
                ('>', Some('=')) => (Cmp::Ge, 2),
                ('=', Some('=')) => (Cmp::Eq, 2),
                ('!', Some('=')) => (Cmp::Ne, 2),
                ('<', _) => (Cmp::Lt, 1),
                ('>', _) => (Cmp::Gt, 1),
                _ => return Err(Error::Formula(format!("unexpected '{c}' at offset {at}"))),
            };
            out.push((Tok::Cmp(op), at, end_of(i + width)));
            i += width;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() {
                let d = chars[j].1;
                let exp_sign = (d == '-' || d == '+') && j > i && matches!(chars[j - 1].1, 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    j += 1;
                } else {
                    break;
                }
            }
            let text = &src[at..end_of(j)];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Formula(format!("bad number '{text}'")))?;
            out.push((Tok::Num(v), at, end_of(j)));
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_' || chars[j].1 == '.') {
                j += 1;
            }
            out.push((Tok::Ident(src[at..end_of(j)].to_string()), at, end_of(j)));
            i = j;
            continue;
        }
        return Err(Error::Formula(format!("unexpected '{c}' at offset {at}")));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize, usize)>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        match self.tokens.get(self.pos) {
            Some(t) => t.1,
            None => self
                .tokens
                .get(self.pos.wrapping_sub(1))
                .map(|t| t.2)
                .unwrap_or(self.src.len()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Formula(format!("expected {tok:?}, found {:?}", self.peek())))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                // implicit product, as in I(d<=27)(d-27)
                Some(Tok::LParen) => lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?)),
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "I" && self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let lhs = self.sum()?;
                    let op = match self.peek() {
                        Some(Tok::Cmp(op)) => *op,
                        other => return Err(Error::Formula(format!("indicator needs a comparison, found {other:?}"))),
                    };
                    self.pos += 1;
                    let rhs = self.sum()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Indicator(op, Box::new(lhs), Box::new(rhs)))
                } else {
                    Ok(Expr::Col(name))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(Error::Formula(format!("unexpected {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(f: &Formula, d: f64) -> Vec<f64> {
        f.terms.iter().map(|t| t.expr.eval(&|_| d)).collect()
    }

    #[test]
    fn indicator_shift_product() {
        for src in ["I(distance<=27)*(distance-27)", "I(distance≤27)(distance-27)"] {
            let f = Formula::parse(src).unwrap();
            assert_eq!(f.terms.len(), 1);
            assert_eq!(f.columns(), vec!["distance"]);
            assert_eq!(eval(&f, 10.0), vec![-17.0]);
            assert_eq!(eval(&f, 27.0), vec![0.0]);
            assert_eq!(eval(&f, 40.0), vec![0.0]);
        }
        assert_eq!(
            Formula::parse("I(distance<=27)*(distance-27)").unwrap().terms[0].name,
            "I(distance<=27)*(distance-27)"
        );
    }

    #[test]
    fn several_terms() {
        let f = Formula::parse("x1 + x2*x3 + (x4 - 2.5e0) + -x5 + I(x1 > 0)").unwrap();
        assert_eq!(f.names(), vec!["x1", "x2*x3", "(x4-2.5e0)", "-x5", "I(x1>0)"]);
        assert_eq!(f.columns(), vec!["x1", "x2", "x3", "x4", "x5"]);
        assert_eq!(eval(&f, 2.0), vec![2.0, 4.0, -0.5, -2.0, 1.0]);
        assert!(Formula::parse("").unwrap().is_empty());
        assert!(Formula::parse("  ").unwrap().is_empty());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "x -", "x - 27", "(x", "I(x)", "x ++ y", "x # y", "x + x", "1..2", "I(x <= 3",
        ] {
            let err = Formula::parse(bad).unwrap_err();
            assert!(matches!(err, Error::Formula(_)), "{bad}: {err}");
            assert_eq!(err.exit_code(), 1);
        }
    }
}
