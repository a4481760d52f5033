//! The scalar expression language used to write anchors, structure
//! functions, Hamiltonians and Lagrangians.
//!
//! Grammar (`^` binds tightest and is right-associative, unary minus sits
//! between `^` and `* /`):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp | log | sqrt
//! ```
//!
//! Identifiers are resolved at parse time against the caller's variable list
//! (conventionally `x1..xn`, `y1..ym`, `xi1..xim`).

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::jet::{Scalar, ScalarFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree. Numeric literals are non-negative; negative constants
/// are represented as `Neg(Num(..))` (see [`Expr::num`]).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var { index: usize, name: String },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
            Expr::Neg(Box::new(Expr::Num(-v)))
        } else {
            Expr::Num(v)
        }
    }

    pub fn var(index: usize, name: impl Into<String>) -> Expr {
        Expr::Var {
            index,
            name: name.into(),
        }
    }

    pub fn pow(self, e: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(e))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// True when the tree contains no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var { .. } => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var { index, .. } => Some(*index),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, None) => x,
                    (None, y) => y,
                }
            }
        }
    }

    /// Evaluates on reals or jets. All bindings must share one dimension.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S> {
        let dim = vars.first().map_or(0, |v| v.dim());
        self.eval_dim(vars, dim)
    }

    fn eval_dim<S: Scalar>(&self, vars: &[S], dim: usize) -> Result<S> {
        let wrap = |e: crate::error::DomainError, node: &Expr| Error::Domain {
            source: e,
            expr: node.to_string(),
        };
        Ok(match self {
            Expr::Num(v) => S::constant(*v, dim),
            Expr::Var { index, .. } => match vars.get(*index) {
                Some(v) => v.clone(),
                None => {
                    return Err(Error::Dimension {
                        what: "variable bindings",
                        expected: index + 1,
                        got: vars.len(),
                    })
                }
            },
            Expr::Neg(a) => a.eval_dim(vars, dim)?.neg(),
            Expr::Add(a, b) => a.eval_dim(vars, dim)?.add(&b.eval_dim(vars, dim)?),
            Expr::Sub(a, b) => a.eval_dim(vars, dim)?.sub(&b.eval_dim(vars, dim)?),
            Expr::Mul(a, b) => a.eval_dim(vars, dim)?.mul(&b.eval_dim(vars, dim)?),
            Expr::Div(a, b) => a
                .eval_dim(vars, dim)?
                .div(&b.eval_dim(vars, dim)?)
                .map_err(|e| wrap(e, self))?,
            Expr::Pow(a, b) => {
                let base = a.eval_dim(vars, dim)?;
                if b.is_constant() {
                    let c: f64 = b.eval_dim::<f64>(&[], 0)?;
                    base.powf(c).map_err(|e| wrap(e, self))?
                } else {
                    base.pow(&b.eval_dim(vars, dim)?).map_err(|e| wrap(e, self))?
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval_dim(vars, dim)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln().map_err(|e| wrap(e, self))?,
                    Func::Sqrt => x.sqrt().map_err(|e| wrap(e, self))?,
                }
            }
        })
    }

    /// Renames/reindexes variables through `map` (old index -> new variable).
    pub fn remap(&self, map: &impl Fn(usize) -> (usize, String)) -> Expr {
        let r = |e: &Expr| Box::new(e.remap(map));
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var { index, .. } => {
                let (i, n) = map(*index);
                Expr::Var { index: i, name: n }
            }
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::Pow(a, b) => Expr::Pow(r(a), r(b)),
            Expr::Call(f, a) => Expr::Call(*f, r(a)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var { .. } | Expr::Call(..) => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({})", v)?
                } else {
                    write!(f, "{}", v)?
                }
            }
            Expr::Var { name, .. } => f.write_str(name)?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_prec(f, 3)?;
            }
            Expr::Add(a, b) => bin(f, a, "+", b, 1, 2)?,
            Expr::Sub(a, b) => bin(f, a, "-", b, 1, 2)?,
            Expr::Mul(a, b) => bin(f, a, "*", b, 2, 3)?,
            Expr::Div(a, b) => bin(f, a, "/", b, 2, 3)?,
            Expr::Pow(a, b) => bin(f, a, "^", b, 5, 3)?,
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn bin(f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, la: u8, lb: u8) -> fmt::Result {
    a.write_prec(f, la)?;
    f.write_str(op)?;
    b.write_prec(f, lb)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl ScalarFn for Expr {
    fn eval_on<S: Scalar>(&self, args: &[S]) -> Result<S> {
        self.eval(args)
    }
}

macro_rules! expr_op {
    ($tr:ident, $m:ident, $v:ident) => {
        impl core::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(rhs))
            }
        }
    };
}
expr_op!(Add, add, Add);
expr_op!(Sub, sub, Sub);
expr_op!(Mul, mul, Mul);
expr_op!(Div, div, Div);

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Standard variable names for a chart with `n` base and `m` fiber
/// coordinates. `fiber` is `"y"` for E and `"xi"` for E*.
pub fn variable_names(n: usize, m: usize, fiber: &str) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{}", i))
        .chain((1..=m).map(|a| format!("{}{}", fiber, a)))
        .collect()
}

/// Parses `text`, resolving identifiers against `vars` (index = position).
pub fn parse<S: AsRef<str>>(text: &str, vars: &[S]) -> Result<Expr> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        vars,
    };
    p.skip_ws();
    if p.pos == p.bytes.len() {
        return Err(p.syntax(p.pos, "empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.syntax(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a, S> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    vars: &'a [S],
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

impl<'a, S: AsRef<str>> Parser<'a, S> {
    fn syntax(&self, offset: usize, msg: &str) -> Error {
        let (line, column) = line_col(self.src, offset);
        Error::Syntax {
            offset,
            line,
            column,
            message: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs + self.term()?;
            } else if self.eat(b'-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs * self.unary()?;
            } else if self.eat(b'/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = match self.peek() {
            None => return Err(self.syntax(self.pos, "unexpected end of input")),
            Some(_) => self.pos,
        };
        let c = self.bytes[start];
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax(self.pos, "expected `)`"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < self.bytes.len() && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_') {
                end += 1;
            }
            let ident = &self.src[start..end];
            self.pos = end;
            if let Some(func) = Func::from_name(ident) {
                if !self.eat(b'(') {
                    return Err(self.syntax(self.pos, "expected `(` after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax(self.pos, "expected `)`"));
                }
                return Ok(Expr::call(func, arg));
            }
            return match self.vars.iter().position(|v| v.as_ref() == ident) {
                Some(index) => Ok(Expr::var(index, ident)),
                None => {
                    let (line, column) = line_col(self.src, start);
                    Err(Error::UnknownIdentifier {
                        name: ident.to_string(),
                        offset: start,
                        line,
                        column,
                    })
                }
            };
        }
        Err(self.syntax(start, "unexpected character"))
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let b = self.bytes;
        let mut end = start;
        while end < b.len() && b[end].is_ascii_digit() {
            end += 1;
        }
        if end < b.len() && b[end] == b'.' {
            end += 1;
            while end < b.len() && b[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < b.len() && (b[end] == b'e' || b[end] == b'E') {
            let mut k = end + 1;
            if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                k += 1;
            }
            if k < b.len() && b[k].is_ascii_digit() {
                while k < b.len() && b[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                Ok(Expr::Num(v))
            }
            _ => Err(self.syntax(start, "malformed number")),
        }
    }
}
