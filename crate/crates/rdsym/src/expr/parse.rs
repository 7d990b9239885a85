//! Recursive-descent parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, `* /`, unary minus, `^`
//! (right-associative). Function application and parentheses are atoms.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{fractional_pow, EvalError};

/// Syntax or name-resolution failure, with the byte offset where it occurred.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub message: String,
    pub position: usize,
}

fn err<T>(message: impl Into<String>, position: usize) -> Result<T, ParseError> {
    Err(ParseError { message: message.into(), position })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Exp => Ok(v.exp()),
            Func::Ln => {
                if v > 0.0 {
                    Ok(v.ln())
                } else {
                    Err(EvalError::Domain { op: "ln", value: v })
                }
            }
            Func::Sqrt => {
                if v >= 0.0 {
                    Ok(v.sqrt())
                } else {
                    Err(EvalError::Domain { op: "sqrt", value: v })
                }
            }
            Func::Abs => Ok(v.abs()),
        }
    }
}

/// Parsed expression tree. Variables are stored as indices into the variable
/// list the expression was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, args: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => args[*i],
            Expr::Neg(e) => -e.eval(args)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(args)?;
                let y = b.eval(args)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::Domain { op: "div", value: 0.0 });
                        }
                        x / y
                    }
                    BinOp::Pow => fractional_pow(x, y)?,
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(args)?)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

/// Prints fully parenthesized so that reparsing reproduces the same tree.
pub(crate) struct ExprPrinter<'a> {
    pub expr: &'a Expr,
    pub vars: &'a [String],
}

impl fmt::Display for ExprPrinter<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(e: &Expr, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                Expr::Num(c) => {
                    if *c < 0.0 || (c == &0.0 && c.is_sign_negative()) {
                        write!(f, "({c})")
                    } else {
                        write!(f, "{c}")
                    }
                }
                Expr::Var(i) => write!(f, "{}", vars[*i]),
                Expr::Neg(inner) => {
                    write!(f, "(-")?;
                    go(inner, vars, f)?;
                    write!(f, ")")
                }
                Expr::Bin(op, a, b) => {
                    let sym = match op {
                        BinOp::Add => "+",
                        BinOp::Sub => "-",
                        BinOp::Mul => "*",
                        BinOp::Div => "/",
                        BinOp::Pow => "^",
                    };
                    write!(f, "(")?;
                    go(a, vars, f)?;
                    write!(f, "{sym}")?;
                    go(b, vars, f)?;
                    write!(f, ")")
                }
                Expr::Call(func, a) => {
                    write!(f, "{}(", func.name())?;
                    go(a, vars, f)?;
                    write!(f, ")")
                }
            }
        }
        go(self.expr, self.vars, f)
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
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                match text.parse::<f64>() {
                    Ok(v) => out.push((Tok::Num(v), start)),
                    Err(_) => return err(format!("invalid number `{text}`"), start),
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            other => return err(format!("unexpected character `{other}`"), i),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let at = self.here();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => err(format!("expected {what}"), at),
        }
    }

    // sum := product (('+' | '-') product)*
    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(self.product()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // product := unary (('*' | '/') unary)*
    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := '-' unary | power; `^` binds tighter, so -x^2 is -(x^2)
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right-associative; exponent may carry a sign)
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let expo = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(expo)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, &format!("`(` after function `{name}`"))?;
                    let arg = self.sum()?;
                    self.expect(Tok::RParen, "closing `)`")?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "e" if !self.vars.iter().any(|v| v == "e") => {
                        return Ok(Expr::Num(std::f64::consts::E))
                    }
                    _ => {}
                }
                if let Some(i) = self.vars.iter().position(|v| v == &name) {
                    Ok(Expr::Var(i))
                } else {
                    err(format!("unknown identifier `{name}`"), at)
                }
            }
            _ => err("expected a number, variable, or `(`", at),
        }
    }
}

pub(crate) fn parse_source(src: &str, vars: &Arc<[String]>) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, vars, len: src.len() };
    let expr = p.sum()?;
    if p.pos != p.toks.len() {
        return err("trailing input", p.here());
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, args: &[f64]) -> f64 {
        let vars: Arc<[String]> = ["x".to_string(), "y".to_string()].into();
        parse_source(src, &vars).unwrap().eval(args).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("1+2*3", &[0.0, 0.0]), 7.0);
        assert_eq!(eval("2^3^2", &[0.0, 0.0]), 512.0);
        assert_eq!(eval("-2^2", &[0.0, 0.0]), -4.0);
        assert_eq!(eval("2^-1", &[0.0, 0.0]), 0.5);
        assert_eq!(eval("6/3/2", &[0.0, 0.0]), 1.0);
        assert_eq!(eval("1-2-3", &[0.0, 0.0]), -4.0);
    }

    #[test]
    fn constants_and_functions() {
        assert!((eval("cos(pi)", &[0.0, 0.0]) + 1.0).abs() < 1e-15);
        assert!((eval("ln(e)", &[0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(eval("abs(-3)", &[0.0, 0.0]), 3.0);
        assert_eq!(eval("sqrt(9)", &[0.0, 0.0]), 3.0);
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(eval("1.5e2", &[0.0, 0.0]), 150.0);
        assert_eq!(eval("2e-3", &[0.0, 0.0]), 0.002);
        assert_eq!(eval(".5", &[0.0, 0.0]), 0.5);
    }

    #[test]
    fn unknown_identifier_positioned() {
        let vars: Arc<[String]> = ["x".to_string()].into();
        let e = parse_source("x + zz", &vars).unwrap_err();
        assert_eq!(e.position, 4);
        assert!(e.message.contains("zz"));
    }

    #[test]
    fn syntax_error_positioned() {
        let vars: Arc<[String]> = ["x".to_string()].into();
        assert!(parse_source("x + ", &vars).is_err());
        assert!(parse_source("(x", &vars).is_err());
        assert!(parse_source("x 2", &vars).is_err());
    }

    #[test]
    fn print_reparse_roundtrip() {
        let vars: Arc<[String]> = ["x".to_string(), "y".to_string()].into();
        let e = parse_source("-x^2 + 3*sin(y)/1.5 - exp(-x)", &vars).unwrap();
        let printed = ExprPrinter { expr: &e, vars: &vars }.to_string();
        let reparsed = parse_source(&printed, &vars).unwrap();
        for i in 0..20 {
            let x = -1.0 + 0.1 * i as f64;
            let args = [x, 0.3 * x + 0.1];
            assert!((e.eval(&args).unwrap() - reparsed.eval(&args).unwrap()).abs() <= 1e-12);
        }
    }
}
