//! A tiny arithmetic language over the coefficient index `k`.
//!
//! Grammar (usual precedence, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'k' | 'pi' | 'e' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func   := log | exp | sqrt | min | max
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    K,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Log,
    Exp,
    Sqrt,
    Min,
    Max,
}

/// A parsed expression in `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(LabError::Expr(format!("trailing input in `{src}`")));
        }
        Ok(Self { source: src.to_string(), root })
    }

    pub fn constant(v: f64) -> Self {
        Self { source: format!("{v}"), root: Node::Num(v) }
    }

    pub fn eval(&self, k: f64) -> f64 {
        eval(&self.root, k)
    }

    /// True when the expression does not mention `k`.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::K => false,
                Node::Neg(a) => walk(a),
                Node::Bin(_, a, b) => walk(a) && walk(b),
                Node::Call(_, args) => args.iter().all(walk),
            }
        }
        walk(&self.root)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl FromStr for Expr {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn eval(n: &Node, k: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::K => k,
        Node::Neg(a) => -eval(a, k),
        Node::Bin(op, a, b) => {
            let (x, y) = (eval(a, k), eval(b, k));
            match op {
                Op::Add => x + y,
                Op::Sub => x - y,
                Op::Mul => x * y,
                Op::Div => x / y,
                Op::Pow => x.powf(y),
            }
        }
        Node::Call(func, args) => {
            let mut vals = args.iter().map(|a| eval(a, k));
            match func {
                Func::Log => vals.next().map_or(f64::NAN, f64::ln),
                Func::Exp => vals.next().map_or(f64::NAN, f64::exp),
                Func::Sqrt => vals.next().map_or(f64::NAN, f64::sqrt),
                Func::Min => vals.fold(f64::INFINITY, f64::min),
                Func::Max => vals.fold(f64::NEG_INFINITY, f64::max),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
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
            // scientific notation: 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                } else {
                    i = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| LabError::Expr(format!("bad number `{text}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(LabError::Expr(format!("unexpected character `{c}` in `{src}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_sym(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Sym(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(LabError::Expr(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { Op::Add } else { Op::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { Op::Mul } else { Op::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek_sym() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_sym() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| LabError::Expr("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Sym('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "k" => Ok(Node::K),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                "log" | "exp" | "sqrt" | "min" | "max" => {
                    let func = match name.as_str() {
                        "log" => Func::Log,
                        "exp" => Func::Exp,
                        "sqrt" => Func::Sqrt,
                        "min" => Func::Min,
                        _ => Func::Max,
                    };
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.peek_sym() == Some(',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    let unary = matches!(func, Func::Log | Func::Exp | Func::Sqrt);
                    if unary && args.len() != 1 {
                        return Err(LabError::Expr(format!("`{name}` takes one argument")));
                    }
                    Ok(Node::Call(func, args))
                }
                other => Err(LabError::Expr(format!("unknown identifier `{other}`"))),
            },
            Tok::Sym(c) => Err(LabError::Expr(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, k: f64) -> f64 {
        Expr::parse(s).unwrap().eval(k)
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(ev("1/(k+2)", 0.0), 0.5);
        assert_eq!(ev("2+3*4", 0.0), 14.0);
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("min(1, k, 3)", 2.0), 1.0);
        assert_eq!(ev("max(1, k, 3)", 5.0), 5.0);
        assert!((ev("sqrt(k)*exp(0)", 9.0) - 3.0).abs() < 1e-15);
        assert!((ev("1e-3*k", 2.0) - 2e-3).abs() < 1e-18);
    }

    #[test]
    fn optimal_alpha_rule() {
        // alpha_k^{-1} = 3k log(ek)^2
        let e = Expr::parse("1/(3*k*log(e*k)^2)").unwrap();
        for k in [1.0, 4.0, 100.0] {
            let want = 1.0 / (3.0 * k * (std::f64::consts::E * k).ln().powi(2));
            assert_eq!(e.eval(k), want);
        }
        assert!(!e.is_constant());
        assert!(Expr::parse("2*pi").unwrap().is_constant());
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("foo(1)").is_err());
        assert!(Expr::parse("log(1,2)").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("1 $ 2").is_err());
    }
}
