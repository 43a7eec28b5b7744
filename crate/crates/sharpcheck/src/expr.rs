//! A small expression language for user test fields.
//!
//! Grammar: numbers, `+ - * / ^`, parentheses, `|e|`, the functions `exp`,
//! `log`, `sqrt`, `abs`, `sin`, `cos`, the constants `pi` and `e`, and the
//! variables `x1..xn`, `t` (the last coordinate), `r = |x|` and `rp = |x'|`.
//! Gradients come from forward-mode differentiation of the parsed tree.

use std::fmt;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, Tail};
use crate::geometry::{Dimension, HalfSpacePoint, SpaceVector};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Coord(usize),
    Radius,
    RadiusPrime,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Value and gradient carried through evaluation.
#[derive(Clone, Copy, Debug)]
struct Dual {
    v: f64,
    g: SpaceVector,
}

impl Dual {
    fn constant(v: f64, n: usize) -> Self {
        Self { v, g: SpaceVector::zeros(n) }
    }
    /// Chain rule for a scalar function with derivative `d`.
    fn map(self, v: f64, d: f64) -> Self {
        Self { v, g: self.g.scale(d) }
    }
}

impl Node {
    fn is_constant(&self) -> bool {
        match self {
            Node::Num(_) => true,
            Node::Coord(_) | Node::Radius | Node::RadiusPrime => false,
            Node::Neg(a) | Node::Call(_, a) => a.is_constant(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn eval(&self, x: &SpaceVector) -> Dual {
        let n = x.len();
        match self {
            Node::Num(c) => Dual::constant(*c, n),
            Node::Coord(i) => Dual { v: x[*i], g: SpaceVector::unit(n, *i) },
            Node::Radius | Node::RadiusPrime => {
                let mut y = *x;
                if matches!(self, Node::RadiusPrime) {
                    y[n - 1] = 0.0;
                }
                let r = y.norm();
                // the subgradient 0 at the kink
                let g = if r > 0.0 { y.scale(1.0 / r) } else { SpaceVector::zeros(n) };
                Dual { v: r, g }
            }
            Node::Neg(a) => {
                let a = a.eval(x);
                Dual { v: -a.v, g: -a.g }
            }
            Node::Add(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                Dual { v: a.v + b.v, g: a.g + b.g }
            }
            Node::Sub(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                Dual { v: a.v - b.v, g: a.g - b.g }
            }
            Node::Mul(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                Dual { v: a.v * b.v, g: a.g.scale(b.v) + b.g.scale(a.v) }
            }
            Node::Div(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                let v = a.v / b.v;
                Dual { v, g: (a.g - b.g.scale(v)).scale(1.0 / b.v) }
            }
            Node::Pow(a, b) => {
                let base = a.eval(x);
                if b.is_constant() {
                    let k = b.eval(x).v;
                    if k == 0.0 {
                        return Dual::constant(1.0, n);
                    }
                    if k.fract() == 0.0 && k.abs() <= 64.0 {
                        let k = k as i32;
                        return base.map(base.v.powi(k), k as f64 * base.v.powi(k - 1));
                    }
                    return base.map(base.v.powf(k), k * base.v.powf(k - 1.0));
                }
                let e = b.eval(x);
                let v = base.v.powf(e.v);
                let ln = base.v.ln();
                Dual { v, g: (e.g.scale(ln) + base.g.scale(e.v / base.v)).scale(v) }
            }
            Node::Call(f, a) => {
                let a = a.eval(x);
                match f {
                    Func::Exp => {
                        let v = a.v.exp();
                        a.map(v, v)
                    }
                    Func::Log => a.map(a.v.ln(), 1.0 / a.v),
                    Func::Sqrt => {
                        let v = a.v.sqrt();
                        a.map(v, 0.5 / v)
                    }
                    Func::Abs => a.map(
                        a.v.abs(),
                        if a.v > 0.0 {
                            1.0
                        } else if a.v < 0.0 {
                            -1.0
                        } else {
                            0.0
                        },
                    ),
                    Func::Sin => a.map(a.v.sin(), a.v.cos()),
                    Func::Cos => a.map(a.v.cos(), -a.v.sin()),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
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
            // exponent part, only when followed by a digit or sign+digit
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
            let v = s.parse::<f64>().map_err(|_| Error::Expression(format!("bad number `{s}`")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()|".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character `{c}` at {i}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    n: usize,
    /// Depth of open `|...|` groups; a `|` closes one when positive.
    abs_depth: usize,
}

impl Parser {
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

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(Error::Expression(format!("expected `{op}` at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            // right associative, binds tighter than unary minus on the left
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.peek().cloned().ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Op('|') => {
                self.abs_depth += 1;
                let e = self.expr()?;
                self.expect('|')?;
                self.abs_depth -= 1;
                Ok(Node::Call(Func::Abs, Box::new(e)))
            }
            Token::Ident(name) => self.ident(&name),
            Token::Op(c) => Err(Error::Expression(format!("unexpected `{c}`"))),
        }
    }

    fn ident(&mut self, name: &str) -> Result<Node> {
        let func = match name {
            "exp" => Some(Func::Exp),
            "log" | "ln" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        };
        if let Some(f) = func {
            self.expect('(')?;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(Node::Call(f, Box::new(e)));
        }
        match name {
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            "t" => Ok(Node::Coord(self.n - 1)),
            "r" => Ok(Node::Radius),
            "rp" => Ok(Node::RadiusPrime),
            _ => {
                let idx = name
                    .strip_prefix('x')
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| (1..=self.n).contains(&k))
                    .ok_or_else(|| Error::Expression(format!("unknown identifier `{name}` for n = {}", self.n)))?;
                Ok(Node::Coord(idx - 1))
            }
        }
    }
}

/// A parsed field with a declared tail.
#[derive(Clone)]
pub struct Expression {
    n: usize,
    source: String,
    root: Node,
    tail: Tail,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({:?}, n = {})", self.source, self.n)
    }
}

impl Expression {
    pub fn parse(src: &str, n: Dimension, tail: Tail) -> Result<Self> {
        let n = n.get();
        let mut p = Parser { tokens: tokenize(src)?, pos: 0, n, abs_depth: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!("trailing input after token {}", p.pos)));
        }
        debug_assert_eq!(p.abs_depth, 0);
        Ok(Self { n, source: src.to_string(), root, tail })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn eval(&self, x: &SpaceVector) -> Dual {
        self.root.eval(x)
    }
}

impl ScalarField for Expression {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.eval(&x.as_vector()).v
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.eval(&x.as_vector()).g
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        let d = self.eval(&x.as_vector());
        (d.v, d.g)
    }
    fn tail(&self) -> Tail {
        self.tail
    }
    fn describe(&self) -> String {
        self.source.clone()
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        self.eval(x).v
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        self.eval(x).g
    }
}

/// Parses a tail declaration: `compact:R`, `bounded:k`, `log:c:k`, `linear`
/// or `unknown`.
pub fn parse_tail(s: &str) -> Result<Tail> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Expression(format!("bad number `{t}` in tail `{s}`")));
    match parts.as_slice() {
        ["compact", r] => Ok(Tail::Compact { radius: num(r)? }),
        ["bounded", k] => Ok(Tail::Bounded { grad_decay: num(k)? }),
        ["log", c, k] => Ok(Tail::LogGrowth { coefficient: num(c)?, grad_decay: num(k)? }),
        ["linear"] => Ok(Tail::LinearGrowth),
        ["unknown"] => Ok(Tail::Unknown),
        _ => Err(Error::Expression(format!("unrecognised tail `{s}`"))),
    }
}
