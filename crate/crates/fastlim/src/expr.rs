//! Parser and evaluator for the initial-data expression grammar:
//! literals, `x`, `y`, `+ - * / ^`, `cos`, `sin`, `exp` and the constant
//! `pi`. `^` binds tightest and is right-associative; unknown identifiers
//! are rejected at parse time.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    Y,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Cos(Box<Node>),
    Sin(Box<Node>),
    Exp(Box<Node>),
}

/// A parsed expression; keeps its source text for echoing into configs.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: src.chars().collect(),
            pos: 0,
            src,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::Config(format!(
                "unexpected trailing input at byte {} in expression {src:?}",
                p.pos
            )));
        }
        Ok(Expr {
            source: src.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        eval_node(&self.root, x, y)
    }
}

fn eval_node(n: &Node, x: f64, y: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X => x,
        Node::Y => y,
        Node::Add(a, b) => eval_node(a, x, y) + eval_node(b, x, y),
        Node::Sub(a, b) => eval_node(a, x, y) - eval_node(b, x, y),
        Node::Mul(a, b) => eval_node(a, x, y) * eval_node(b, x, y),
        Node::Div(a, b) => eval_node(a, x, y) / eval_node(b, x, y),
        Node::Pow(a, b) => eval_node(a, x, y).powf(eval_node(b, x, y)),
        Node::Neg(a) => -eval_node(a, x, y),
        Node::Cos(a) => eval_node(a, x, y).cos(),
        Node::Sin(a) => eval_node(a, x, y).sin(),
        Node::Exp(a) => eval_node(a, x, y).exp(),
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                // accept ASCII '-' and the typographic minus
                Some('-') | Some('\u{2212}') => {
                    self.bump();
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
                Some('*') => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some('/') => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        match self.peek() {
            Some('-') | Some('\u{2212}') => {
                self.bump();
                Ok(Node::Neg(Box::new(self.factor()?)))
            }
            Some('+') => {
                self.bump();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.bump();
            // right-associative; exponent may carry a sign
            let exp = self.factor()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            Some('(') => {
                self.bump();
                let inner = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::Config(format!(
                        "missing closing parenthesis in expression {:?}",
                        self.src
                    )));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::Config(format!(
                "unexpected token {other:?} in expression {:?}",
                self.src
            ))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_digit() || c == '.' {
                self.pos += 1;
            } else if (c == 'e' || c == 'E')
                && self.pos > start
                && self
                    .chars
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == '+' || n == '-')
            {
                self.pos += 2;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_digit())
                {
                    self.pos += 1;
                }
                break;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| Error::Config(format!("bad numeric literal {text:?} in {:?}", self.src)))
    }

    fn ident(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphabetic())
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match name.as_str() {
            "x" => Ok(Node::X),
            "y" => Ok(Node::Y),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "cos" | "sin" | "exp" => {
                if self.bump() != Some('(') {
                    return Err(Error::Config(format!(
                        "function {name} needs parenthesized argument in {:?}",
                        self.src
                    )));
                }
                let arg = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::Config(format!(
                        "missing closing parenthesis after {name}(...) in {:?}",
                        self.src
                    )));
                }
                Ok(match name.as_str() {
                    "cos" => Node::Cos(Box::new(arg)),
                    "sin" => Node::Sin(Box::new(arg)),
                    _ => Node::Exp(Box::new(arg)),
                })
            }
            _ => Err(Error::Config(format!(
                "unknown identifier {name:?} in expression {:?}",
                self.src
            ))),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}
