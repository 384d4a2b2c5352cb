//! Expression language for surface parametrizations and field components.
//!
//! Grammar (radians everywhere, no implicit multiplication):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?          // right-associative, binds above unary minus
//! atom    := number | "pi" | identifier | identifier "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! `u1`, `u2`, `u3` are the chart coordinates; any other identifier is a
//! named parameter resolved at evaluation time (field expressions use `x`,
//! `y`, `z` as parameters bound to the surface position).

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use super::jet::{Jet, JetError};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    U1,
    U2,
    U3,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::U1 => "u1",
            Var::U2 => "u2",
            Var::U3 => "u3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Atan2,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan2" => Func::Atan2,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan2 => "atan2",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

/// Abstract syntax tree of a scalar expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
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
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its starting byte offset; `None` at end of input.
    fn next(&mut self) -> Result<Option<(Tok, usize)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let b = self.src[self.pos];
        let tok = match b {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                let mut saw_digit = false;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                    saw_digit = true;
                }
                if end < self.src.len() && self.src[end] == b'.' {
                    end += 1;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                        saw_digit = true;
                    }
                }
                if saw_digit
                    && end < self.src.len()
                    && (self.src[end] == b'e' || self.src[end] == b'E')
                {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                if !saw_digit {
                    return Err(Error::Syntax {
                        offset: start,
                        message: "malformed number".into(),
                    });
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap();
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
                self.pos = end;
                Tok::Ident(text)
            }
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected byte 0x{b:02x}"),
                })
            }
        };
        Ok(Some((tok, start)))
    }
}

// ---------------------------------------------------------------------------
// Parser (Pratt, with `^` binding tighter than unary minus)
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

const BP_ADD: u8 = 1;
const BP_MUL: u8 = 3;
const BP_NEG: u8 = 5;
const BP_POW_L: u8 = 7;
const BP_POW_R: u8 = 6; // right-associative

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Expr> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (op, l_bp, r_bp) = match self.peek() {
                Some(Tok::Plus) => (BinOp::Add, BP_ADD, BP_ADD + 1),
                Some(Tok::Minus) => (BinOp::Sub, BP_ADD, BP_ADD + 1),
                Some(Tok::Star) => (BinOp::Mul, BP_MUL, BP_MUL + 1),
                Some(Tok::Slash) => (BinOp::Div, BP_MUL, BP_MUL + 1),
                Some(Tok::Caret) => (BinOp::Pow, BP_POW_L, BP_POW_R),
                _ => break,
            };
            if l_bp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.parse_expr(r_bp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                let operand = self.parse_expr(BP_NEG)?;
                Ok(Expr::Neg(Box::new(operand)))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.parse_expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or(Error::UnknownFunction { name: name.clone(), offset })?;
                    self.pos += 1;
                    let mut args = vec![self.parse_expr(0)?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.parse_expr(0)?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(Error::Syntax {
                            offset,
                            message: format!(
                                "{} takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    Ok(match name.as_str() {
                        "pi" => Expr::Pi,
                        "u1" => Expr::Var(Var::U1),
                        "u2" => Expr::Var(Var::U2),
                        "u3" => Expr::Var(Var::U3),
                        _ => Expr::Param(name),
                    })
                }
            }
            Some(_) => Err(Error::Syntax {
                offset,
                message: "expected a value".into(),
            }),
            None => Err(Error::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation environments
// ---------------------------------------------------------------------------

/// Values of the chart coordinates for plain evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub struct VarValues {
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub u3: Option<f64>,
}

impl VarValues {
    pub fn surface(u1: f64, u2: f64) -> Self {
        VarValues { u1: Some(u1), u2: Some(u2), u3: None }
    }

    pub fn layer(u1: f64, u2: f64, u3: f64) -> Self {
        VarValues { u1: Some(u1), u2: Some(u2), u3: Some(u3) }
    }

    fn get(&self, v: Var) -> Result<f64> {
        match v {
            Var::U1 => self.u1,
            Var::U2 => self.u2,
            Var::U3 => self.u3,
        }
        .ok_or_else(|| Error::Invalid(format!("variable {} is not bound here", v.name())))
    }
}

impl Expr {
    /// Parse `source` into an AST; errors carry the byte offset.
    pub fn parse(source: &str) -> Result<Expr> {
        let mut lexer = Lexer::new(source);
        let mut toks = Vec::new();
        while let Some(t) = lexer.next()? {
            toks.push(t);
        }
        let end = source.len();
        let mut parser = Parser { toks, pos: 0, end };
        let e = parser.parse_expr(0)?;
        if parser.pos != parser.toks.len() {
            return Err(Error::Syntax {
                offset: parser.offset(),
                message: "trailing input".into(),
            });
        }
        Ok(e)
    }

    /// Set of free parameter names (identifiers other than u1/u2/u3/pi).
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_parameters(&mut out);
        out
    }

    fn collect_parameters(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) => e.collect_parameters(out),
            Expr::Bin(_, a, b) => {
                a.collect_parameters(out);
                b.collect_parameters(out);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_parameters(out);
                }
            }
            _ => {}
        }
    }

    /// Structure-preserving variable substitution.
    pub fn map_vars(&self, f: &impl Fn(Var) -> Expr) -> Expr {
        match self {
            Expr::Var(v) => f(*v),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_vars(f))),
            Expr::Bin(op, a, b) => {
                Expr::Bin(*op, Box::new(a.map_vars(f)), Box::new(b.map_vars(f)))
            }
            Expr::Call(func, args) => {
                Expr::Call(*func, args.iter().map(|a| a.map_vars(f)).collect())
            }
            other => other.clone(),
        }
    }

    fn domain_err(&self, e: JetError) -> Error {
        Error::Domain { expr: self.to_string(), message: e.to_string() }
    }

    /// Plain floating-point evaluation.
    pub fn eval(&self, vars: &VarValues, params: &BTreeMap<String, f64>) -> Result<f64> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Pi => Ok(PI),
            Expr::Var(v) => vars.get(*v),
            Expr::Param(name) => params
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownIdentifier { name: name.clone() }),
            Expr::Neg(e) => Ok(-e.eval(vars, params)?),
            Expr::Bin(op, a, b) => {
                let x = a.eval(vars, params)?;
                let y = b.eval(vars, params)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(self.domain_err(JetError::DivisionByZero))
                        } else {
                            Ok(x / y)
                        }
                    }
                    BinOp::Pow => {
                        if x == 0.0 && y < 0.0 {
                            Err(self.domain_err(JetError::DivisionByZero))
                        } else if x < 0.0 && y != y.trunc() {
                            Err(self.domain_err(JetError::PowNonPositiveBase))
                        } else {
                            Ok(x.powf(y))
                        }
                    }
                }
            }
            Expr::Call(func, args) => {
                let x = args[0].eval(vars, params)?;
                match func {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => Ok(x.tan()),
                    Func::Sinh => Ok(x.sinh()),
                    Func::Cosh => Ok(x.cosh()),
                    Func::Tanh => Ok(x.tanh()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x <= 0.0 {
                            Err(self.domain_err(JetError::LogNonPositive))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            Err(self.domain_err(JetError::SqrtNonPositive))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                    Func::Atan2 => {
                        let y = args[1].eval(vars, params)?;
                        if x == 0.0 && y == 0.0 {
                            Err(self.domain_err(JetError::Atan2Origin))
                        } else {
                            Ok(x.atan2(y))
                        }
                    }
                }
            }
        }
    }

    /// Jet evaluation about a base point in (u1, u2); `u3`, when bound,
    /// enters as a constant (its derivatives are handled in closed form by
    /// the geometry layer, never by jets).
    pub fn eval_jet(
        &self,
        u1: f64,
        u2: f64,
        u3: Option<f64>,
        params: &BTreeMap<String, f64>,
    ) -> Result<Jet> {
        match self {
            Expr::Num(v) => Ok(Jet::constant(*v)),
            Expr::Pi => Ok(Jet::constant(PI)),
            Expr::Var(Var::U1) => Ok(Jet::variable(u1, 0)),
            Expr::Var(Var::U2) => Ok(Jet::variable(u2, 1)),
            Expr::Var(Var::U3) => u3.map(Jet::constant).ok_or_else(|| {
                Error::Invalid("u3 is not bound in this surface expression".into())
            }),
            Expr::Param(name) => params
                .get(name)
                .map(|&v| Jet::constant(v))
                .ok_or_else(|| Error::UnknownIdentifier { name: name.clone() }),
            Expr::Neg(e) => Ok(-e.eval_jet(u1, u2, u3, params)?),
            Expr::Bin(op, a, b) => {
                let x = a.eval_jet(u1, u2, u3, params)?;
                let y = b.eval_jet(u1, u2, u3, params)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => x.div(&y).map_err(|e| self.domain_err(e)),
                    BinOp::Pow => x.pow(&y).map_err(|e| self.domain_err(e)),
                }
            }
            Expr::Call(func, args) => {
                let x = args[0].eval_jet(u1, u2, u3, params)?;
                match func {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => x.tan().map_err(|e| self.domain_err(e)),
                    Func::Sinh => Ok(x.sinh()),
                    Func::Cosh => Ok(x.cosh()),
                    Func::Tanh => Ok(x.tanh()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => x.ln().map_err(|e| self.domain_err(e)),
                    Func::Sqrt => x.sqrt().map_err(|e| self.domain_err(e)),
                    Func::Atan2 => {
                        let y = args[1].eval_jet(u1, u2, u3, params)?;
                        x.atan2(&y).map_err(|e| self.domain_err(e))
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Pretty-printer (round-trips to a structurally identical tree)
// ---------------------------------------------------------------------------

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, needs: bool) -> fmt::Result {
            if needs {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(e) => {
                f.write_str("-")?;
                paren(f, e, e.prec() < 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, prec, right_assoc) = match op {
                    BinOp::Add => ("+", 1, false),
                    BinOp::Sub => ("-", 1, false),
                    BinOp::Mul => ("*", 2, false),
                    BinOp::Div => ("/", 2, false),
                    BinOp::Pow => ("^", 4, true),
                };
                if right_assoc {
                    paren(f, a, a.prec() <= prec)?;
                    f.write_str(sym)?;
                    paren(f, b, b.prec() < prec)
                } else {
                    paren(f, a, a.prec() < prec)?;
                    f.write_str(sym)?;
                    paren(f, b, b.prec() <= prec)
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
