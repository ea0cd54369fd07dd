//! Expression parsing, evaluation and symbolic differentiation.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' integer)?
//! base   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | tan | exp | abs
//! ```
//!
//! Unary minus is accepted as a convenience on top of the grammar.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Abs,
    /// Derivative of `abs`; not reachable from the grammar.
    Sign,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Abs => v.abs(),
            Func::Sign => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Syntax tree of a real expression in the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    X,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::X => x,
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Neg(a) => -a.eval(x),
            Node::Pow(a, n) => a.eval(x).powi(*n),
            Node::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Symbolic derivative with light constant folding.
    pub fn derivative(&self) -> Node {
        match self {
            Node::Const(_) => Node::Const(0.0),
            Node::X => Node::Const(1.0),
            Node::Add(a, b) => add(a.derivative(), b.derivative()),
            Node::Sub(a, b) => sub(a.derivative(), b.derivative()),
            Node::Mul(a, b) => add(
                mul(a.derivative(), (**b).clone()),
                mul((**a).clone(), b.derivative()),
            ),
            Node::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = sub(
                    mul(a.derivative(), (**b).clone()),
                    mul((**a).clone(), b.derivative()),
                );
                div(num, pow((**b).clone(), 2))
            }
            Node::Neg(a) => neg(a.derivative()),
            Node::Pow(a, n) => {
                if *n == 0 {
                    return Node::Const(0.0);
                }
                mul(
                    mul(Node::Const(*n as f64), pow((**a).clone(), n - 1)),
                    a.derivative(),
                )
            }
            Node::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Tan => add(Node::Const(1.0), pow(call(Func::Tan, inner), 2)),
                    Func::Exp => call(Func::Exp, inner),
                    Func::Abs => call(Func::Sign, inner),
                    Func::Sign => Node::Const(0.0),
                };
                mul(outer, a.derivative())
            }
        }
    }
}

fn add(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x - y),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Node::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Node::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x / y),
        (Some(0.0), _) => Node::Const(0.0),
        (_, Some(1.0)) => a,
        _ => Node::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn pow(a: Node, n: i32) -> Node {
    match (n, a.as_const()) {
        (0, _) => Node::Const(1.0),
        (1, _) => a,
        (_, Some(c)) => Node::Const(c.powi(n)),
        _ => Node::Pow(Box::new(a), n),
    }
}

fn call(f: Func, a: Node) -> Node {
    match a.as_const() {
        Some(c) => Node::Const(f.apply(c)),
        None => Node::Call(f, Box::new(a)),
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c}"),
            Node::X => write!(f, "x"),
            Node::Add(a, b) => write!(f, "({a}+{b})"),
            Node::Sub(a, b) => write!(f, "({a}-{b})"),
            Node::Mul(a, b) => write!(f, "({a}*{b})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, n) => write!(f, "({a}^{n})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed expression together with its first three derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    text: String,
    nodes: [Node; 4],
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self> {
        let root = Parser::new(text).parse()?;
        let d1 = root.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        Ok(Expression {
            text: text.to_string(),
            nodes: [root, d1, d2, d3],
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.nodes[0].eval(x)
    }

    /// Derivative of the given order (0..=3).
    pub fn eval_derivative(&self, order: usize, x: f64) -> f64 {
        self.nodes[order].eval(x)
    }

    pub fn node(&self, order: usize) -> &Node {
        &self.nodes[order]
    }

    /// Classical Schwarzian `f'''/f' - 3/2 (f''/f')^2` in the expression's own coordinate.
    pub fn schwarzian(&self, x: f64) -> f64 {
        let d1 = self.eval_derivative(1, x);
        let d2 = self.eval_derivative(2, x);
        let d3 = self.eval_derivative(3, x);
        d3 / d1 - 1.5 * (d2 / d1).powi(2)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Node> {
        let node = self.expr()?;
        match self.peek() {
            None => Ok(node),
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.integer()?;
            return Ok(Node::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<i32>() {
            Ok(n) => Ok(n),
            Err(_) => {
                self.pos = start;
                self.err("expected integer exponent")
            }
        }
    }

    fn base(&mut self) -> Result<Node> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let func = match ident {
                    "x" => return Ok(Node::X),
                    "pi" => return Ok(Node::Const(std::f64::consts::PI)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "tan" => Func::Tan,
                    "exp" => Func::Exp,
                    "abs" => Func::Abs,
                    _ => {
                        self.pos = start;
                        return self.err(format!("unknown identifier '{ident}'"));
                    }
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(Node::Call(func, Box::new(arg)))
            }
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => self.err(format!("expected '{}', found '{}'", c as char, got as char)),
            None => self.err(format!("expected '{}', found end of input", c as char)),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < s.len() && (s[p] == b'+' || s[p] == b'-') {
                p += 1;
            }
            if p < s.len() && s[p].is_ascii_digit() {
                while p < s.len() && s[p].is_ascii_digit() {
                    p += 1;
                }
                self.pos = p;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Const(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("malformed number '{text}'"))
            }
        }
    }
}
