//! Polynomial expressions in chart coordinates, for user-declared fields.
//!
//! Grammar: sums and products of numbers, coordinate names and named
//! parameters, with parentheses, unary minus and non-negative integer powers
//! (`^`). Coordinates are `x0..x3` or the chart labels (`t, x, y, z` /
//! `t, r, theta, phi`).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn eval(&self, x: &[Jet; 4]) -> Jet {
        match self {
            Expr::Num(v) => Jet::constant(*v),
            Expr::Coord(i) => x[*i].clone(),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, n) => {
                let base = a.eval(x);
                let mut acc = Jet::constant(1.0);
                for _ in 0..*n {
                    acc = &acc * &base;
                }
                acc
            }
        }
    }

    pub fn eval_f64(&self, x: &[f64; 4]) -> f64 {
        self.eval(&Jet::seed(x, 0)).value()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> std::result::Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().map_err(|_| format!("bad number `{s}`"))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    labels: [&'a str; 4],
    params: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> std::result::Result<Expr, String> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> std::result::Result<Expr, String> {
        let mut lhs = self.unary()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Expr, String> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Expr, String> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.tokens.get(self.pos).cloned() {
                Some(Token::Num(n)) if n >= 0.0 && n.fract() == 0.0 && n <= 32.0 => {
                    self.pos += 1;
                    return Ok(Expr::Pow(Box::new(base), n as u32));
                }
                _ => return Err("exponent must be a non-negative integer literal".into()),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<Expr, String> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = ["x0", "x1", "x2", "x3"].iter().position(|l| *l == name) {
                    return Ok(Expr::Coord(i));
                }
                if let Some(i) = self.labels.iter().position(|l| *l == name) {
                    return Ok(Expr::Coord(i));
                }
                if let Some(v) = self.params.get(&name) {
                    return Ok(Expr::Num(*v));
                }
                Err(format!("unknown identifier `{name}`"))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err("missing `)`".into());
                }
                Ok(e)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Parses `src` with coordinate labels and named parameters.
pub fn parse(src: &str, labels: [&str; 4], params: &BTreeMap<String, f64>) -> Result<Expr> {
    let err = |reason: String| Error::Expression {
        expr: src.into(),
        reason,
    };
    let tokens = tokenize(src).map_err(err)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        labels,
        params,
    };
    let e = p.sum().map_err(err)?;
    if p.pos != p.tokens.len() {
        return Err(err(format!("trailing input at token {}", p.pos)));
    }
    Ok(e)
}
