//! Mini expression language for initial data, targets and boundary signals.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 't' | 'pi' | 'e' | func '(' args ')' | '(' expr ')'
//! func   := sin | cos | exp | gaussian(center, width)
//! ```
//!
//! `gaussian(c, w)` is exp(−((x − c)/w)²). Errors carry the byte offset.

use crate::error::{KdvError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    T,
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
    Sin,
    Cos,
    Exp,
    Gaussian,
}

impl Func {
    fn arity(self) -> usize {
        match self {
            Func::Gaussian => 2,
            _ => 1,
        }
    }
}

/// A parsed expression in the variables x and t.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

fn err(pos: usize, msg: impl std::fmt::Display) -> KdvError {
    KdvError::Parse(format!("expression error at position {pos}: {msg}"))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected '{}'", c as char)))
        }
    }

    fn unexpected(&mut self, what: &str) -> KdvError {
        match self.peek() {
            Some(c) => err(self.pos, format!("{what}, found '{}'", c as char)),
            None => err(self.pos, format!("{what}, found end of input")),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                Op::Add
            } else if self.eat(b'-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                Op::Mul
            } else if self.eat(b'/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            // right associative; binds tighter than a leading minus: -x^2 = -(x^2)
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        let mut p = self.pos;
        digits(&mut p);
        if p < s.len() && s[p] == b'.' {
            p += 1;
            digits(&mut p);
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                digits(&mut q);
                p = q;
            }
        }
        let text = std::str::from_utf8(&s[start..p]).expect("ascii");
        let v: f64 = text.parse().map_err(|_| err(start, format!("malformed number '{text}'")))?;
        self.pos = p;
        Ok(Node::Num(v))
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let func = match name {
                    "x" => return Ok(Node::X),
                    "t" => return Ok(Node::T),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "gaussian" => Func::Gaussian,
                    _ => return Err(err(start, format!("unknown identifier '{name}'"))),
                };
                self.expect(b'(')?;
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if args.len() != func.arity() {
                    return Err(err(start, format!("{name} takes {} argument(s), got {}", func.arity(), args.len())));
                }
                self.expect(b')')?;
                Ok(Node::Call(func, args))
            }
            _ => Err(self.unexpected("expected a number, variable, function or '('")),
        }
    }
}

fn eval(node: &Node, x: f64, t: f64) -> Result<f64> {
    Ok(match node {
        Node::Num(v) => *v,
        Node::X => x,
        Node::T => t,
        Node::Neg(a) => -eval(a, x, t)?,
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, t)?, eval(b, x, t)?);
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => {
                    if b == 0.0 {
                        return Err(KdvError::Parse(format!("domain error: division by zero at x = {x}, t = {t}")));
                    }
                    a / b
                }
                Op::Pow => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], x, t)?;
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Gaussian => {
                    let w = eval(&args[1], x, t)?;
                    if w == 0.0 {
                        return Err(KdvError::Parse("domain error: gaussian width is zero".into()));
                    }
                    (-((x - a) / w).powi(2)).exp()
                }
            }
        }
    })
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        if !source.is_ascii() {
            let pos = source.char_indices().find(|(_, c)| !c.is_ascii()).map_or(0, |(i, _)| i);
            return Err(err(pos, "non-ASCII character"));
        }
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        if p.peek().is_some() {
            return Err(p.unexpected("unexpected trailing input"));
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let v = eval(&self.root, x, t)?;
        if !v.is_finite() {
            return Err(KdvError::Parse(format!(
                "domain error: '{}' is not finite at x = {x}, t = {t}",
                self.source
            )));
        }
        Ok(v)
    }

    /// Samples at every point of `xs` (t = 0).
    pub fn sample_x(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.eval(x, 0.0)).collect()
    }

    /// Samples at every point of `ts` (x = 0).
    pub fn sample_t(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.eval(0.0, t)).collect()
    }
}

/// Parse and evaluate in one step.
pub fn expression_eval(expr: &str, x: f64) -> Result<f64> {
    Expr::parse(expr)?.eval(x, 0.0)
}
