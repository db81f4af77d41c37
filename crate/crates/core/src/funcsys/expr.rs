//! Expressions over `+ - * / ^`, `log2`, `ln`, `sqrt`, `min`, `max`,
//! rational constants, named parameters and up to two variables.

use crate::numerics::{render_rational, Interval, NumericsError, XInterval};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Log2,
    Ln,
    Sqrt,
    Exp2,
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigRational),
    /// A parameter or variable, resolved by `compile`.
    Name(String),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error in {src:?} at {pos}: {msg}")]
    Syntax { src: String, pos: usize, msg: String },
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    i: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let b = src.as_bytes();
    let mut out = vec![];
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let s = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            let q = crate::numerics::parse_rational(&src[s..i]).map_err(|_| ExprError::Syntax {
                src: src.into(),
                pos: s,
                msg: "bad number".into(),
            })?;
            out.push((s, Tok::Num(q)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Ident(src[s..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Syntax { src: src.into(), pos: i, msg: format!("unexpected {c:?}") });
        }
    }
    Ok(out)
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, ExprError> {
        let pos = self.toks.get(self.i).map(|t| t.0).unwrap_or(self.src.len());
        Err(ExprError::Syntax { src: self.src.into(), pos, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut l = self.term()?;
        loop {
            if self.eat('+') {
                l = Expr::Bin(Op::Add, Box::new(l), Box::new(self.term()?));
            } else if self.eat('-') {
                l = Expr::Bin(Op::Sub, Box::new(l), Box::new(self.term()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut l = self.unary()?;
        loop {
            if self.eat('*') {
                l = Expr::Bin(Op::Mul, Box::new(l), Box::new(self.unary()?));
            } else if self.eat('/') {
                l = Expr::Bin(Op::Div, Box::new(l), Box::new(self.unary()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.i += 1;
                Ok(Expr::Num(q))
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                if self.eat('(') {
                    let f = match name.as_str() {
                        "log2" => Func::Log2,
                        "ln" => Func::Ln,
                        "sqrt" => Func::Sqrt,
                        "exp2" => Func::Exp2,
                        "min" => Func::Min,
                        "max" => Func::Max,
                        _ => return self.err(&format!("unknown function {name}")),
                    };
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    let want = if matches!(f, Func::Min | Func::Max) { 2 } else { 1 };
                    if args.len() != want {
                        return self.err("wrong number of arguments");
                    }
                    Ok(Expr::Call(f, args))
                } else {
                    Ok(Expr::Name(name))
                }
            }
            Some(Tok::Sym('(')) => {
                self.i += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            _ => self.err("expected a number, name or '('"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let toks = lex(src)?;
        let mut p = Parser { src, toks, i: 0 };
        let e = p.expr()?;
        if p.i != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    /// Substitute parameters and bind variables to slots.
    pub fn compile(&self, params: &BTreeMap<String, BigRational>, vars: &[&str]) -> Result<Compiled, ExprError> {
        Ok(Compiled { root: self.lower(params, vars)?, src: self.to_string() })
    }

    fn lower(&self, params: &BTreeMap<String, BigRational>, vars: &[&str]) -> Result<Node, ExprError> {
        Ok(match self {
            Expr::Num(q) => Node::constant(q.clone()),
            Expr::Name(n) => {
                if let Some(i) = vars.iter().position(|v| v == n) {
                    Node::Var(i)
                } else if let Some(q) = params.get(n) {
                    Node::constant(q.clone())
                } else {
                    return Err(ExprError::UnknownName(n.clone()));
                }
            }
            Expr::Neg(a) => Node::Neg(Box::new(a.lower(params, vars)?)),
            Expr::Bin(Op::Pow, a, b) => {
                let base = a.lower(params, vars)?;
                let ex = b.lower(params, vars)?;
                match ex.const_value() {
                    Some(q) if small_ratio(&q).is_some() => {
                        let (p, d) = small_ratio(&q).unwrap();
                        Node::PowRat(Box::new(base), p, d)
                    }
                    _ => Node::Bin(Op::Pow, Box::new(base), Box::new(ex)),
                }
            }
            Expr::Bin(op, a, b) => Node::Bin(*op, Box::new(a.lower(params, vars)?), Box::new(b.lower(params, vars)?)),
            Expr::Call(f, args) => {
                Node::Call(*f, args.iter().map(|a| a.lower(params, vars)).collect::<Result<_, _>>()?)
            }
        })
    }
}

fn small_ratio(q: &BigRational) -> Option<(i64, u32)> {
    let p = q.numer().to_i64()?;
    let d = q.denom().to_u32()?;
    if p.abs() <= 1 << 20 && d <= 1 << 20 {
        Some((p, d))
    } else {
        None
    }
}

fn prec_of(e: &Expr) -> u8 {
    match e {
        Expr::Bin(Op::Add | Op::Sub, ..) => 1,
        Expr::Bin(Op::Mul | Op::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(Op::Pow, ..) => 4,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if prec_of(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(q) => {
                if q.denom().is_one() && !q.is_negative() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "({})", render_rational(q))
                }
            }
            Expr::Name(n) => write!(f, "{n}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    Op::Add => ("+", 1),
                    Op::Sub => ("-", 1),
                    Op::Mul => ("*", 2),
                    Op::Div => ("/", 2),
                    Op::Pow => ("^", 4),
                };
                wrap(f, a, if *op == Op::Pow { 5 } else { p })?;
                write!(f, "{sym}")?;
                // left-associative: a right operand of equal precedence keeps its parens
                wrap(f, b, if *op == Op::Pow { p } else { p + 1 })
            }
            Expr::Call(func, args) => {
                let name = match func {
                    Func::Log2 => "log2",
                    Func::Ln => "ln",
                    Func::Sqrt => "sqrt",
                    Func::Exp2 => "exp2",
                    Func::Min => "min",
                    Func::Max => "max",
                };
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

const CONST_BITS: u32 = 512;

#[derive(Clone, Debug)]
enum Node {
    Const(BigRational, Interval, XInterval),
    Var(usize),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    PowRat(Box<Node>, i64, u32),
    Call(Func, Vec<Node>),
}

impl Node {
    fn constant(q: BigRational) -> Node {
        let enc = Interval::from_rational(&q, CONST_BITS);
        let x = XInterval::from_interval(&enc);
        Node::Const(q, enc, x)
    }

    fn const_value(&self) -> Option<BigRational> {
        match self {
            Node::Const(q, ..) => Some(q.clone()),
            Node::Neg(a) => a.const_value().map(|q| -q),
            Node::Bin(op, a, b) => {
                let (x, y) = (a.const_value()?, b.const_value()?);
                match op {
                    Op::Add => Some(x + y),
                    Op::Sub => Some(x - y),
                    Op::Mul => Some(x * y),
                    Op::Div if !y.is_zero() => Some(x / y),
                    Op::Pow if y.denom().is_one() => {
                        let e = y.numer().to_i32()?;
                        if x.is_zero() && e < 0 {
                            return None;
                        }
                        Some(num_traits::pow::Pow::pow(&x, e))
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn eval(&self, vars: &[Interval], prec: u32) -> Result<Interval, NumericsError> {
        let p = prec + 8;
        Ok(match self {
            Node::Const(q, enc, _) => {
                if prec + 16 <= CONST_BITS {
                    enc.round(p)
                } else {
                    Interval::from_rational(q, p)
                }
            }
            Node::Var(i) => vars[*i].clone(),
            Node::Neg(a) => a.eval(vars, prec)?.neg(),
            Node::Bin(op, a, b) => {
                let x = a.eval(vars, prec)?;
                let y = b.eval(vars, prec)?;
                match op {
                    Op::Add => x.add(&y, p),
                    Op::Sub => x.sub(&y, p),
                    Op::Mul => x.mul(&y, p),
                    Op::Div => x.div(&y, p)?,
                    Op::Pow => {
                        if !x.is_positive() {
                            return Err(NumericsError::Domain("real power of a nonpositive base".into()));
                        }
                        y.mul(&x.log2(p)?, p).exp2(p)
                    }
                }
            }
            Node::PowRat(a, n, d) => {
                let x = a.eval(vars, prec)?;
                if *d > 1 && x.hi.is_negative() {
                    return Err(NumericsError::Domain("fractional power of a negative number".into()));
                }
                x.pow_rat(*n, *d, p)?
            }
            Node::Call(f, args) => {
                let x = args[0].eval(vars, prec)?;
                match f {
                    Func::Log2 => x.log2(p)?,
                    Func::Ln => x.ln(p)?,
                    Func::Sqrt => x.sqrt(p)?,
                    Func::Exp2 => x.exp2(p),
                    Func::Min => x.min(&args[1].eval(vars, prec)?),
                    Func::Max => x.max(&args[1].eval(vars, prec)?),
                }
            }
        })
    }
}

impl Node {
    fn eval_xi(&self, vars: &[XInterval]) -> Result<XInterval, NumericsError> {
        Ok(match self {
            Node::Const(_, _, x) => *x,
            Node::Var(i) => vars[*i],
            Node::Neg(a) => a.eval_xi(vars)?.neg(),
            Node::Bin(op, a, b) => {
                let x = a.eval_xi(vars)?;
                let y = b.eval_xi(vars)?;
                match op {
                    Op::Add => x.add(y),
                    Op::Sub => x.sub(y),
                    Op::Mul => x.mul(y),
                    Op::Div => x.div(y)?,
                    Op::Pow => {
                        if !x.is_positive() {
                            return Err(NumericsError::Domain("real power of a nonpositive base".into()));
                        }
                        x.pow(y)?
                    }
                }
            }
            Node::PowRat(a, n, d) => a.eval_xi(vars)?.pow_rat(*n, *d)?,
            Node::Call(f, args) => {
                let x = args[0].eval_xi(vars)?;
                match f {
                    Func::Log2 => x.log2()?,
                    Func::Ln => x.ln()?,
                    Func::Sqrt => x.sqrt()?,
                    Func::Exp2 => x.exp2()?,
                    Func::Min => x.min(args[1].eval_xi(vars)?),
                    Func::Max => x.max(args[1].eval_xi(vars)?),
                }
            }
        })
    }
}

impl Node {
    fn eval_f64(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Const(_, enc, _) => enc.to_f64(),
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval_f64(vars),
            Node::Bin(op, a, b) => {
                let (x, y) = (a.eval_f64(vars), b.eval_f64(vars));
                match op {
                    Op::Add => x + y,
                    Op::Sub => x - y,
                    Op::Mul => x * y,
                    Op::Div => x / y,
                    Op::Pow => x.powf(y),
                }
            }
            Node::PowRat(a, n, d) => a.eval_f64(vars).powf(*n as f64 / *d as f64),
            Node::Call(f, args) => {
                let x = args[0].eval_f64(vars);
                match f {
                    Func::Log2 => x.log2(),
                    Func::Ln => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Exp2 => x.exp2(),
                    Func::Min => x.min(args[1].eval_f64(vars)),
                    Func::Max => x.max(args[1].eval_f64(vars)),
                }
            }
        }
    }
}

/// An expression with parameters substituted and variables bound to slots.
#[derive(Clone, Debug)]
pub struct Compiled {
    root: Node,
    src: String,
}

impl Compiled {
    /// Enclosure of the value, rounded outward to about `prec` bits.
    pub fn eval(&self, vars: &[Interval], prec: u32) -> Result<Interval, NumericsError> {
        Ok(self.root.eval(vars, prec)?.round(prec))
    }

    /// Enclosure in extended-exponent floating point (about 50 bits).
    pub fn eval_xi(&self, vars: &[XInterval]) -> Result<XInterval, NumericsError> {
        self.root.eval_xi(vars)
    }

    /// Plain floating-point value, for screening only.
    pub fn eval_f64(&self, vars: &[f64]) -> f64 {
        self.root.eval_f64(vars)
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    /// Value when the expression has no variables.
    pub fn constant(&self) -> Option<BigRational> {
        self.root.const_value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(src: &str, t: f64) -> f64 {
        let e = Expr::parse(src).unwrap();
        let mut params = BTreeMap::new();
        params.insert("gamma".to_string(), BigRational::new(3.into(), 1.into()));
        let c = e.compile(&params, &["t"]).unwrap();
        let x = Interval::point(crate::numerics::Dyadic::from_f64(t).unwrap());
        c.eval(&[x], 64).unwrap().to_f64()
    }

    #[test]
    fn evaluates() {
        assert!((eval1("t*log2(t)^2", 8.0) - 72.0).abs() < 1e-12);
        assert!((eval1("gamma*t", 2.0) - 6.0).abs() < 1e-12);
        assert!((eval1("(t*log2(t))^(1/2)", 16.0) - 8.0).abs() < 1e-12);
        assert!((eval1("t^0.3", 5.0) - 5f64.powf(0.3)).abs() < 1e-12);
        assert!((eval1("ln(t)", std::f64::consts::E) - 1.0).abs() < 1e-12);
        assert!((eval1("min(t, 2) - -max(t, 3)", 1.0) - 4.0).abs() < 1e-12);
        assert!((eval1("2^-t", 3.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn display_roundtrips() {
        for s in ["t*log2(t)^2", "sqrt(gamma*z/y)", "(t*log2(t))^(1/2)", "a-(b-c)", "-t^2", "t/(y*z)"] {
            let e = Expr::parse(s).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{s}");
        }
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("t*").is_err());
        assert!(Expr::parse("foo(t)").is_err());
        assert!(Expr::parse("t $ 2").is_err());
        let e = Expr::parse("q*t").unwrap();
        assert_eq!(e.compile(&BTreeMap::new(), &["t"]).unwrap_err(), ExprError::UnknownName("q".into()));
    }
}
