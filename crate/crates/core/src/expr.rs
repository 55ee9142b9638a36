//! Scalar expression trees over chart coordinates.
//!
//! Expressions are the primitive representation for frame components, map
//! components and structure coefficients. The tree is closed under symbolic
//! differentiation with respect to any coordinate, so every derivative the
//! engine takes is analytic; finite differences only appear in test oracles.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

/// Errors raised while evaluating an expression at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(i32),
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
    #[error("variable index {index} out of range for point of dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
}

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Add(ScalarExpr, ScalarExpr),
    Sub(ScalarExpr, ScalarExpr),
    Mul(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    Neg(ScalarExpr),
    /// Integer power of the base expression.
    Pow(ScalarExpr, i32),
    Exp(ScalarExpr),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Log(ScalarExpr),
}

/// Immutable scalar expression; cheap to clone (shared subtree).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr {
    node: Rc<Node>,
}

impl ScalarExpr {
    fn new(node: Node) -> Self {
        ScalarExpr {
            node: Rc::new(node),
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarExpr::new(Node::Const(c))
    }

    pub fn zero() -> Self {
        ScalarExpr::constant(0.0)
    }

    pub fn one() -> Self {
        ScalarExpr::constant(1.0)
    }

    pub fn var(index: usize) -> Self {
        ScalarExpr::new(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.node {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return ScalarExpr::constant(a + b);
        }
        ScalarExpr::new(Node::Add(self.clone(), rhs.clone()))
    }

    pub fn sub(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.neg();
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return ScalarExpr::constant(a - b);
        }
        ScalarExpr::new(Node::Sub(self.clone(), rhs.clone()))
    }

    pub fn mul(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() || rhs.is_zero() {
            return ScalarExpr::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return ScalarExpr::constant(a * b);
        }
        ScalarExpr::new(Node::Mul(self.clone(), rhs.clone()))
    }

    pub fn div(&self, rhs: &ScalarExpr) -> ScalarExpr {
        if self.is_zero() && !rhs.is_zero() {
            return ScalarExpr::zero();
        }
        if rhs.is_one() {
            return self.clone();
        }
        ScalarExpr::new(Node::Div(self.clone(), rhs.clone()))
    }

    pub fn neg(&self) -> ScalarExpr {
        if let Some(c) = self.as_const() {
            return ScalarExpr::constant(-c);
        }
        ScalarExpr::new(Node::Neg(self.clone()))
    }

    pub fn pow(&self, exponent: i32) -> ScalarExpr {
        match exponent {
            0 => ScalarExpr::one(),
            1 => self.clone(),
            _ => {
                if let Some(c) = self.as_const() {
                    return ScalarExpr::constant(c.powi(exponent));
                }
                ScalarExpr::new(Node::Pow(self.clone(), exponent))
            }
        }
    }

    pub fn exp(&self) -> ScalarExpr {
        ScalarExpr::new(Node::Exp(self.clone()))
    }

    pub fn sin(&self) -> ScalarExpr {
        ScalarExpr::new(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> ScalarExpr {
        ScalarExpr::new(Node::Cos(self.clone()))
    }

    pub fn log(&self) -> ScalarExpr {
        ScalarExpr::new(Node::Log(self.clone()))
    }

    /// Linear combination `sum_i coeffs[i] * exprs[i]`.
    pub fn linear_combination(coeffs: &[f64], exprs: &[ScalarExpr]) -> ScalarExpr {
        let mut acc = ScalarExpr::zero();
        for (c, e) in coeffs.iter().zip(exprs) {
            acc = acc.add(&ScalarExpr::constant(*c).mul(e));
        }
        acc
    }

    /// Evaluates the expression at the given coordinate values.
    ///
    /// Domain violations (log of non-positive arguments, division by zero)
    /// are reported as errors rather than silently producing NaN.
    pub fn eval(&self, vars: &[f64]) -> Result<f64, EvalError> {
        let value = match &*self.node {
            Node::Const(c) => *c,
            Node::Var(i) => {
                if *i >= vars.len() {
                    return Err(EvalError::VariableOutOfRange {
                        index: *i,
                        dim: vars.len(),
                    });
                }
                vars[*i]
            }
            Node::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Node::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Node::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Node::Div(a, b) => {
                let d = b.eval(vars)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(vars)? / d
            }
            Node::Neg(a) => -a.eval(vars)?,
            Node::Pow(a, k) => {
                let base = a.eval(vars)?;
                if base == 0.0 && *k < 0 {
                    return Err(EvalError::ZeroToNegativePower(*k));
                }
                base.powi(*k)
            }
            Node::Exp(a) => a.eval(vars)?.exp(),
            Node::Sin(a) => a.eval(vars)?.sin(),
            Node::Cos(a) => a.eval(vars)?.cos(),
            Node::Log(a) => {
                let x = a.eval(vars)?;
                if x <= 0.0 {
                    return Err(EvalError::LogDomain(x));
                }
                x.ln()
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Exact partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> ScalarExpr {
        match &*self.node {
            Node::Const(_) => ScalarExpr::zero(),
            Node::Var(i) => {
                if *i == var {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            }
            Node::Add(a, b) => a.diff(var).add(&b.diff(var)),
            Node::Sub(a, b) => a.diff(var).sub(&b.diff(var)),
            Node::Mul(a, b) => a.diff(var).mul(b).add(&a.mul(&b.diff(var))),
            Node::Div(a, b) => {
                // (a/b)' = a'/b - a b'/b^2
                let da = a.diff(var);
                let db = b.diff(var);
                da.div(b).sub(&a.mul(&db).div(&b.mul(b)))
            }
            Node::Neg(a) => a.diff(var).neg(),
            Node::Pow(a, k) => {
                // (a^k)' = k a^(k-1) a'
                ScalarExpr::constant(f64::from(*k))
                    .mul(&a.pow(k - 1))
                    .mul(&a.diff(var))
            }
            Node::Exp(a) => self.clone().mul(&a.diff(var)),
            Node::Sin(a) => a.cos().mul(&a.diff(var)),
            Node::Cos(a) => a.sin().neg().mul(&a.diff(var)),
            Node::Log(a) => a.diff(var).div(a),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.node {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, None) => x,
                    (None, y) => y,
                }
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a)
            | Node::Log(a) => a.max_var(),
        }
    }

    /// Renders the expression with the given coordinate names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a ScalarExpr,
    names: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.names, 0, f)
    }
}

fn write_expr(
    e: &ScalarExpr,
    names: &[String],
    parent_prec: u8,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    let (prec, body): (u8, Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result>) = match &*e.node {
        Node::Const(c) => (40, Box::new(move |f| write!(f, "{c}"))),
        Node::Var(i) => {
            let name = names.get(*i).cloned().unwrap_or_else(|| format!("x{i}"));
            (40, Box::new(move |f| write!(f, "{name}")))
        }
        Node::Add(a, b) => (
            10,
            Box::new(move |f| {
                write_expr(a, names, 10, f)?;
                write!(f, " + ")?;
                write_expr(b, names, 10, f)
            }),
        ),
        Node::Sub(a, b) => (
            10,
            Box::new(move |f| {
                write_expr(a, names, 10, f)?;
                write!(f, " - ")?;
                write_expr(b, names, 11, f)
            }),
        ),
        Node::Mul(a, b) => (
            20,
            Box::new(move |f| {
                write_expr(a, names, 20, f)?;
                write!(f, "*")?;
                write_expr(b, names, 20, f)
            }),
        ),
        Node::Div(a, b) => (
            20,
            Box::new(move |f| {
                write_expr(a, names, 20, f)?;
                write!(f, "/")?;
                write_expr(b, names, 21, f)
            }),
        ),
        Node::Neg(a) => (
            15,
            Box::new(move |f| {
                write!(f, "-")?;
                write_expr(a, names, 15, f)
            }),
        ),
        Node::Pow(a, k) => (
            30,
            Box::new(move |f| {
                write_expr(a, names, 31, f)?;
                write!(f, "^{k}")
            }),
        ),
        Node::Exp(a) => (40, Box::new(move |f| write_call("exp", a, names, f))),
        Node::Sin(a) => (40, Box::new(move |f| write_call("sin", a, names, f))),
        Node::Cos(a) => (40, Box::new(move |f| write_call("cos", a, names, f))),
        Node::Log(a) => (40, Box::new(move |f| write_call("log", a, names, f))),
    };
    if prec < parent_prec {
        write!(f, "(")?;
        body(f)?;
        write!(f, ")")
    } else {
        body(f)
    }
}

fn write_call(
    name: &str,
    arg: &ScalarExpr,
    names: &[String],
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    write!(f, "{name}(")?;
    write_expr(arg, names, 0, f)?;
    write!(f, ")")
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse error with 1-based line/column of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
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

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'+' => {
                    self.bump();
                    out.push((Tok::Plus, line, col));
                }
                b'-' => {
                    self.bump();
                    out.push((Tok::Minus, line, col));
                }
                b'*' => {
                    self.bump();
                    out.push((Tok::Star, line, col));
                }
                b'/' => {
                    self.bump();
                    out.push((Tok::Slash, line, col));
                }
                b'^' => {
                    self.bump();
                    out.push((Tok::Caret, line, col));
                }
                b'(' => {
                    self.bump();
                    out.push((Tok::LParen, line, col));
                }
                b')' => {
                    self.bump();
                    out.push((Tok::RParen, line, col));
                }
                b'0'..=b'9' | b'.' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(b'0'..=b'9') | Some(b'.')) {
                        self.bump();
                    }
                    // scientific suffix like 1e-3
                    if matches!(self.peek(), Some(b'e') | Some(b'E')) {
                        let save = (self.pos, self.line, self.col);
                        self.bump();
                        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                            self.bump();
                        }
                        if matches!(self.peek(), Some(b'0'..=b'9')) {
                            while matches!(self.peek(), Some(b'0'..=b'9')) {
                                self.bump();
                            }
                        } else {
                            // not an exponent; restore and let `e...` lex as identifier
                            self.pos = save.0;
                            self.line = save.1;
                            self.col = save.2;
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let value: f64 = text.parse().map_err(|_| ParseError {
                        line,
                        col,
                        message: format!("invalid numeric literal `{text}`"),
                    })?;
                    out.push((Tok::Num(value), line, col));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while matches!(
                        self.peek(),
                        Some(b'a'..=b'z') | Some(b'A'..=b'Z') | Some(b'0'..=b'9') | Some(b'_')
                    ) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    out.push((Tok::Ident(text.to_string()), line, col));
                }
                other => {
                    return Err(self.error(format!(
                        "unexpected character `{}`",
                        char::from(other)
                    )));
                }
            }
        }
        Ok(out)
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn location(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.location();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    // additive := multiplicative (('+'|'-') multiplicative)*
    fn additive(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.multiplicative()?;
                    lhs = lhs.add(&rhs);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.multiplicative()?;
                    lhs = lhs.sub(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    // multiplicative := unary (('*'|'/') unary)*
    fn multiplicative(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = lhs.mul(&rhs);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = lhs.div(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<ScalarExpr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            let inner = self.unary()?;
            return Ok(inner.neg());
        }
        self.power()
    }

    // power := primary ('^' integer)*   (right assoc via recursion is moot:
    // exponents are integer literals, so left-to-right application is fine)
    fn power(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Tok::Caret) {
            self.bump();
            let exponent = self.integer_exponent()?;
            base = base.pow(exponent);
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, ParseError> {
        let mut negate = false;
        let mut parens = false;
        if self.peek() == Some(&Tok::LParen) {
            self.bump();
            parens = true;
        }
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            negate = true;
        }
        let value = match self.bump() {
            Some(Tok::Num(v)) => {
                if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                    self.pos -= 1;
                    return Err(self.error(format!("exponent must be an integer, got `{v}`")));
                }
                v as i32
            }
            _ => {
                if self.pos > 0 {
                    self.pos -= 1;
                }
                return Err(self.error("expected integer exponent after `^`"));
            }
        };
        if parens {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        Ok(if negate { -value } else { value })
    }

    fn primary(&mut self) -> Result<ScalarExpr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.bump();
                Ok(ScalarExpr::constant(v))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                if self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let arg = self.additive()?;
                    self.expect(Tok::RParen, "`)` to close function call")?;
                    match name.as_str() {
                        "exp" => Ok(arg.exp()),
                        "sin" => Ok(arg.sin()),
                        "cos" => Ok(arg.cos()),
                        "log" => Ok(arg.log()),
                        other => Err(self.error(format!("unknown function `{other}`"))),
                    }
                } else if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    Ok(ScalarExpr::var(i))
                } else {
                    // token already consumed; point at it
                    self.pos -= 1;
                    let err = self.error(format!("unknown identifier `{name}`"));
                    self.pos += 1;
                    Err(err)
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.additive()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(other) => Err(self.error(format!("unexpected token `{other:?}`"))),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

/// Parses a single expression over the named coordinates.
pub fn parse_expr(src: &str, vars: &[String]) -> Result<ScalarExpr, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    if toks.is_empty() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        vars,
    };
    let expr = parser.additive()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.error("trailing input after expression"));
    }
    Ok(expr)
}

/// Splits `src` on top-level commas (commas inside parentheses do not split)
/// and parses each piece.
pub fn parse_expr_list(src: &str, vars: &[String]) -> Result<Vec<ScalarExpr>, ParseError> {
    let mut out = Vec::new();
    for piece in split_top_level(src, ',') {
        out.push(parse_expr(piece, vars)?);
    }
    Ok(out)
}

/// Splits on a separator at parenthesis depth zero.
pub fn split_top_level(src: &str, sep: char) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in src.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                pieces.push(&src[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    pieces.push(&src[start..]);
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    #[test]
    fn parses_and_evaluates() {
        let e = parse_expr("exp(z)*(x + y) - 2*x^2", &xyz()).unwrap();
        let v = e.eval(&[1.0, 2.0, 0.0]).unwrap();
        assert_eq!(v, 3.0 - 2.0);
    }

    #[test]
    fn precedence_is_conventional() {
        let e = parse_expr("-x^2", &xyz()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0]).unwrap(), -9.0);
        let e = parse_expr("2 + 3 * 4", &xyz()).unwrap();
        assert_eq!(e.eval(&[0.0; 3]).unwrap(), 14.0);
        let e = parse_expr("x^(-2)", &xyz()).unwrap();
        assert_eq!(e.eval(&[2.0, 0.0, 0.0]).unwrap(), 0.25);
    }

    #[test]
    fn reports_error_position() {
        let err = parse_expr("exp(z) + e^^z", &xyz()).unwrap_err();
        assert_eq!(err.line, 1);
        // `e` is an unknown identifier here; either it or the stray caret must
        // be reported at its column.
        assert!(err.col >= 10, "col was {}", err.col);
    }

    #[test]
    fn unknown_identifier_rejected() {
        let err = parse_expr("x + w", &xyz()).unwrap_err();
        assert!(err.message.contains('w'));
    }

    #[test]
    fn log_domain_error() {
        let e = parse_expr("log(x)", &xyz()).unwrap();
        assert_eq!(e.eval(&[-1.0, 0.0, 0.0]), Err(EvalError::LogDomain(-1.0)));
        assert!(e.eval(&[2.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn division_by_zero_reported() {
        let e = parse_expr("1/x", &xyz()).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0, 0.0]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn differentiates_all_node_kinds() {
        let e = parse_expr("exp(2*z) + sin(x)*cos(y) + log(x) + x^3 + x/y", &xyz()).unwrap();
        let p = [0.7, 1.3, 0.2];
        for var in 0..3 {
            let sym = e.diff(var).eval(&p).unwrap();
            let h = 1e-6;
            let mut hi = p;
            let mut lo = p;
            hi[var] += h;
            lo[var] -= h;
            let fd = (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h);
            assert!((sym - fd).abs() < 1e-8, "var {var}: {sym} vs {fd}");
        }
    }

    #[test]
    fn top_level_split_respects_parens() {
        let pieces = split_top_level("exp(z), (x + y), 0", ',');
        assert_eq!(pieces.len(), 3);
        let exprs = parse_expr_list("exp(z), (x + y), 0", &xyz()).unwrap();
        assert_eq!(exprs.len(), 3);
    }
}
