//! Expression language for oscillator right-hand sides f(x, v).
//!
//! Grammar: `+ - * /` with usual precedence, right-associative `^`,
//! unary minus binding tighter than the base of `^` (so `-x^2` is
//! `(-x)^2`), functions `sin cos tan exp log sqrt abs tanh`, variables
//! `x` and `v`, constants `pi` and `e`, parentheses.
//!
//! Evaluation runs in second-order dual arithmetic; see [`Expr::eval_full`].

pub mod dual;

pub use dual::Dual2;

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "-",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
            UnaryFn::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable(Var),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Value and all partials of f at a point, exact to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub d_x: f64,
    pub d_v: f64,
    pub d_xx: f64,
    pub d_xv: f64,
    pub d_vv: f64,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        let tokens = lex(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.parse_bp(0)?;
        match parser.peek() {
            (Tok::End, _) => Ok(expr),
            (_, offset) => Err(Error::Syntax {
                offset,
                message: "unexpected trailing input".into(),
            }),
        }
    }

    /// Evaluate value and all first/second partials at (x, v).
    pub fn eval_full(&self, x: f64, v: f64) -> Result<EvalResult> {
        let d = self.eval_dual(x, v)?;
        Ok(EvalResult {
            value: d.val,
            d_x: d.dx,
            d_v: d.dv,
            d_xx: d.dxx,
            d_xv: d.dxv,
            d_vv: d.dvv,
        })
    }

    /// Value-only fast path; same domain checks as `eval_full`.
    pub fn eval(&self, x: f64, v: f64) -> Result<f64> {
        match self {
            Expr::Constant(c) => Ok(*c),
            Expr::Variable(Var::X) => Ok(x),
            Expr::Variable(Var::V) => Ok(v),
            Expr::Unary(f, a) => {
                let a = a.eval(x, v)?;
                match f {
                    UnaryFn::Neg => Ok(-a),
                    UnaryFn::Sin => Ok(a.sin()),
                    UnaryFn::Cos => Ok(a.cos()),
                    UnaryFn::Tan => Ok(a.tan()),
                    UnaryFn::Exp => Ok(a.exp()),
                    UnaryFn::Log => {
                        if a <= 0.0 {
                            return Err(domain("log", "argument must be positive"));
                        }
                        Ok(a.ln())
                    }
                    UnaryFn::Sqrt => {
                        if a < 0.0 {
                            return Err(domain("sqrt", "argument must be nonnegative"));
                        }
                        Ok(a.sqrt())
                    }
                    UnaryFn::Abs => Ok(a.abs()),
                    UnaryFn::Tanh => Ok(a.tanh()),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(x, v)?;
                match op {
                    BinaryOp::Add => Ok(a + r.eval(x, v)?),
                    BinaryOp::Sub => Ok(a - r.eval(x, v)?),
                    BinaryOp::Mul => Ok(a * r.eval(x, v)?),
                    BinaryOp::Div => {
                        let b = r.eval(x, v)?;
                        if b == 0.0 {
                            return Err(domain("/", "division by zero"));
                        }
                        Ok(a / b)
                    }
                    BinaryOp::Pow => {
                        let b = r.eval(x, v)?;
                        pow_value(a, b)
                    }
                }
            }
        }
    }

    fn eval_dual(&self, x: f64, v: f64) -> Result<Dual2> {
        match self {
            Expr::Constant(c) => Ok(Dual2::constant(*c)),
            Expr::Variable(Var::X) => Ok(Dual2::var_x(x)),
            Expr::Variable(Var::V) => Ok(Dual2::var_v(v)),
            Expr::Unary(f, a) => {
                let a = a.eval_dual(x, v)?;
                match f {
                    UnaryFn::Neg => Ok(-a),
                    UnaryFn::Sin => Ok(a.sin()),
                    UnaryFn::Cos => Ok(a.cos()),
                    UnaryFn::Tan => Ok(a.tan()),
                    UnaryFn::Exp => Ok(a.exp()),
                    UnaryFn::Log => {
                        if a.val <= 0.0 {
                            return Err(domain("log", "argument must be positive"));
                        }
                        Ok(a.ln())
                    }
                    UnaryFn::Sqrt => {
                        if a.val < 0.0 {
                            return Err(domain("sqrt", "argument must be nonnegative"));
                        }
                        Ok(a.sqrt())
                    }
                    UnaryFn::Abs => Ok(a.abs()),
                    UnaryFn::Tanh => Ok(a.tanh()),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_dual(x, v)?;
                match op {
                    BinaryOp::Add => Ok(a + r.eval_dual(x, v)?),
                    BinaryOp::Sub => Ok(a - r.eval_dual(x, v)?),
                    BinaryOp::Mul => Ok(a * r.eval_dual(x, v)?),
                    BinaryOp::Div => {
                        let b = r.eval_dual(x, v)?;
                        if b.val == 0.0 {
                            return Err(domain("/", "division by zero"));
                        }
                        Ok(a / b)
                    }
                    BinaryOp::Pow => {
                        // Integer constant exponents go through repeated
                        // multiplication so negative bases are legal.
                        if let Some(n) = integer_exponent(r) {
                            return Ok(a.powi(n));
                        }
                        let b = r.eval_dual(x, v)?;
                        if b.dx == 0.0
                            && b.dv == 0.0
                            && b.val.fract() == 0.0
                            && b.val.abs() < 1e9
                        {
                            return Ok(a.powi(b.val as i64));
                        }
                        if a.val <= 0.0 {
                            return Err(domain(
                                "^",
                                "non-integer power of a non-positive base",
                            ));
                        }
                        Ok(a.pow(b))
                    }
                }
            }
        }
    }

    /// Does the expression mention the given variable?
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Constant(_) => false,
            Expr::Variable(w) => *w == var,
            Expr::Unary(_, a) => a.uses(var),
            Expr::Binary(_, l, r) => l.uses(var) || r.uses(var),
        }
    }
}

fn pow_value(a: f64, b: f64) -> Result<f64> {
    if b.fract() == 0.0 && b.abs() < 1e9 {
        let mut acc = 1.0_f64;
        let mut base = a;
        let mut n = (b.abs()) as u64;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        if b < 0.0 {
            if acc == 0.0 {
                return Err(domain("^", "zero raised to a negative power"));
            }
            return Ok(1.0 / acc);
        }
        return Ok(acc);
    }
    if a <= 0.0 {
        return Err(domain("^", "non-integer power of a non-positive base"));
    }
    Ok(a.powf(b))
}

fn integer_exponent(e: &Expr) -> Option<i64> {
    match e {
        Expr::Constant(c) if c.fract() == 0.0 && c.abs() < 1e9 => Some(*c as i64),
        Expr::Unary(UnaryFn::Neg, inner) => integer_exponent(inner).map(|n| -n),
        _ => None,
    }
}

fn domain(node: &str, message: &str) -> Error {
    Error::Domain {
        node: node.into(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

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
    End,
}

fn lex(source: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = source.as_bytes();
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
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent part
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(source[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    out.push((Tok::End, source.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pratt parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

// Prefix minus uses binding power 7, above `^`'s left power 5, so unary
// minus grabs only the base of a following exponentiation.
const NEG_BP: u8 = 7;

impl Parser {
    fn peek(&self) -> (Tok, usize) {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn parse_bp(&mut self, min_bp: u8) -> Result<Expr> {
        let (tok, offset) = self.bump();
        let mut lhs = match tok {
            Tok::Num(n) => Expr::Constant(n),
            Tok::Minus => Expr::Unary(UnaryFn::Neg, Box::new(self.parse_bp(NEG_BP)?)),
            Tok::LParen => {
                let inner = self.parse_bp(0)?;
                match self.bump() {
                    (Tok::RParen, _) => inner,
                    (_, off) => {
                        return Err(Error::Syntax {
                            offset: off,
                            message: "expected `)`".into(),
                        })
                    }
                }
            }
            Tok::Ident(name) => self.parse_ident(name, offset)?,
            Tok::End => {
                return Err(Error::Syntax {
                    offset,
                    message: "unexpected end of input".into(),
                })
            }
            other => {
                return Err(Error::Syntax {
                    offset,
                    message: format!("unexpected token `{other:?}`"),
                })
            }
        };

        loop {
            let (op, l_bp, r_bp) = match self.peek().0 {
                Tok::Plus => (BinaryOp::Add, 1, 2),
                Tok::Minus => (BinaryOp::Sub, 1, 2),
                Tok::Star => (BinaryOp::Mul, 3, 4),
                Tok::Slash => (BinaryOp::Div, 3, 4),
                Tok::Caret => (BinaryOp::Pow, 5, 4), // right-associative
                _ => break,
            };
            if l_bp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.parse_bp(r_bp)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_ident(&mut self, name: String, offset: usize) -> Result<Expr> {
        if self.peek().0 == Tok::LParen {
            let func = match name.as_str() {
                "sin" => UnaryFn::Sin,
                "cos" => UnaryFn::Cos,
                "tan" => UnaryFn::Tan,
                "exp" => UnaryFn::Exp,
                "log" => UnaryFn::Log,
                "sqrt" => UnaryFn::Sqrt,
                "abs" => UnaryFn::Abs,
                "tanh" => UnaryFn::Tanh,
                _ => return Err(Error::UnknownIdentifier { name, offset }),
            };
            self.bump(); // (
            let arg = self.parse_bp(0)?;
            match self.bump() {
                (Tok::RParen, _) => Ok(Expr::Unary(func, Box::new(arg))),
                (_, off) => Err(Error::Syntax {
                    offset: off,
                    message: "expected `)` after function argument".into(),
                }),
            }
        } else {
            match name.as_str() {
                "x" => Ok(Expr::Variable(Var::X)),
                "v" => Ok(Expr::Variable(Var::V)),
                "pi" => Ok(Expr::Constant(std::f64::consts::PI)),
                "e" => Ok(Expr::Constant(std::f64::consts::E)),
                _ => Err(Error::UnknownIdentifier { name, offset }),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Printer: minimal parentheses, chosen so print -> parse round-trips.
// ---------------------------------------------------------------------------

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Constant(_) | Expr::Variable(_) => 5,
        Expr::Unary(UnaryFn::Neg, _) => 4,
        Expr::Unary(..) => 5,
        Expr::Binary(BinaryOp::Pow, ..) => 3,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}

fn write_child(e: &Expr, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
    if precedence(e) < need {
        write!(f, "(")?;
        write_expr(e, f)?;
        write!(f, ")")
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Constant(c) => write!(f, "{c}"),
        Expr::Variable(Var::X) => write!(f, "x"),
        Expr::Variable(Var::V) => write!(f, "v"),
        Expr::Unary(UnaryFn::Neg, a) => {
            write!(f, "-")?;
            write_child(a, f, 4)
        }
        Expr::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(a, f)?;
            write!(f, ")")
        }
        Expr::Binary(op, l, r) => match op {
            BinaryOp::Add => {
                write_child(l, f, 1)?;
                write!(f, "+")?;
                write_child(r, f, 2)
            }
            BinaryOp::Sub => {
                write_child(l, f, 1)?;
                write!(f, "-")?;
                write_child(r, f, 2)
            }
            BinaryOp::Mul => {
                write_child(l, f, 2)?;
                write!(f, "*")?;
                write_child(r, f, 3)
            }
            BinaryOp::Div => {
                write_child(l, f, 2)?;
                write!(f, "/")?;
                write_child(r, f, 3)
            }
            BinaryOp::Pow => {
                // base must parse as an atom or a prefix-minus operand
                let base_need = 4;
                write_child(l, f, base_need)?;
                write!(f, "^")?;
                write_child(r, f, 3)
            }
        },
    }
}
