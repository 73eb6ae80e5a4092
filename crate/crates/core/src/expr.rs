//! Closed-form scalar functions of `(n, t)`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := NUMBER | 't' | 'n' | '(' expr ')' | '-' factor
//! ```
//!
//! `NUMBER` is a decimal literal (`12`, `0.25`) and is stored as an exact
//! rational, so evaluation over [`BigRational`] is exact.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("no stabilization of the n-ladder within tolerance {tol:e} (last two values {prev} and {last})")]
    NonConvergence { tol: f64, prev: f64, last: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree over the variables `t` and `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(BigRational),
    T,
    N,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(value: BigRational) -> Self {
        Expr::Const(value)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// `true` when the tree never mentions `n`.
    pub fn is_n_free(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::T => true,
            Expr::N => false,
            Expr::Neg(e) => e.is_n_free(),
            Expr::Binary(_, l, r) => l.is_n_free() && r.is_n_free(),
        }
    }

    pub fn eval<S: Scalar>(&self, t: &S, n: &S) -> Result<S, ExprError> {
        Ok(match self {
            Expr::Const(c) => S::from_rational(c),
            Expr::T => t.clone(),
            Expr::N => n.clone(),
            Expr::Neg(e) => -e.eval(t, n)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval(t, n)?;
                let b = r.eval(t, n)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err(ExprError::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
        })
    }

    /// Evaluates at an integer sequence index.
    pub fn eval_at<S: Scalar>(&self, t: &S, n: u64) -> Result<S, ExprError> {
        self.eval(t, &S::cast_u64(n))
    }

    /// Pointwise limit as `n → ∞`, estimated on the dyadic ladder
    /// `n = 2^4, 2^5, …, 2^40`.
    pub fn limit_in_n<S: Scalar>(&self, t: &S, tol: &S) -> Result<S, ExprError> {
        limit_in_n(self, t, tol)
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

pub fn eval_expr<S: Scalar>(e: &Expr, t: &S, n: &S) -> Result<S, ExprError> {
    e.eval(t, n)
}

pub const LADDER_FIRST_EXP: u32 = 4;
pub const LADDER_LAST_EXP: u32 = 40;

pub fn limit_in_n<S: Scalar>(e: &Expr, t: &S, tol: &S) -> Result<S, ExprError> {
    let mut prev = e.eval_at(t, 1u64 << LADDER_FIRST_EXP)?;
    for j in LADDER_FIRST_EXP + 1..=LADDER_LAST_EXP {
        let cur = e.eval_at(t, 1u64 << j)?;
        if (cur.clone() - prev.clone()).abs() < *tol {
            return Ok(cur);
        }
        prev = cur;
    }
    let last = e.eval_at(t, 1u64 << LADDER_LAST_EXP)?;
    let before = e.eval_at(t, 1u64 << (LADDER_LAST_EXP - 1))?;
    Err(ExprError::NonConvergence {
        tol: tol.approx_f64(),
        prev: before.approx_f64(),
        last: last.approx_f64(),
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax { offset: self.pos, message: message.to_string() }
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

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    b"t" => Ok(Expr::T),
                    b"n" => Ok(Expr::N),
                    other => Err(ExprError::UnknownIdentifier {
                        offset: start,
                        name: String::from_utf8_lossy(other).into_owned(),
                    }),
                }
            }
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let mut digits = String::new();
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            digits.push(self.src[self.pos] as char);
            self.pos += 1;
        }
        let mut scale = 0u32;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                digits.push(self.src[self.pos] as char);
                scale += 1;
                self.pos += 1;
            }
            if scale == 0 {
                return Err(ExprError::Syntax {
                    offset: self.pos,
                    message: "expected digits after decimal point".into(),
                });
            }
        }
        let numer: BigInt = digits.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: "malformed number".into(),
        })?;
        let denom = num_traits::pow(BigInt::from(10), scale as usize);
        Ok(Expr::Const(BigRational::new(numer, denom)))
    }
}

/// Writes a rational as an exact decimal when its denominator divides a
/// power of ten, else as `(p/q)`.
fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_negative() {
        // Only reachable for programmatically built constants.
        return write!(f, "(0-{})", DisplayRational(&-r.clone()));
    }
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return write!(f, "({}/{})", r.numer(), r.denom());
    }
    let scale = twos.max(fives);
    if scale == 0 {
        return write!(f, "{}", r.numer());
    }
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), scale as usize));
    let digits = scaled.to_integer().to_string();
    let width = scale as usize + 1;
    let padded = format!("{digits:0>width$}");
    let (int_part, frac_part) = padded.split_at(padded.len() - scale as usize);
    write!(f, "{int_part}.{frac_part}")
}

struct DisplayRational<'a>(&'a BigRational);

impl fmt::Display for DisplayRational<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rational(self.0, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_rational(c, f),
            Expr::T => f.write_str("t"),
            Expr::N => f.write_str("n"),
            Expr::Neg(e) => match **e {
                Expr::Binary(..) => write!(f, "-({e})"),
                _ => write!(f, "-{e}"),
            },
            Expr::Binary(op, l, r) => {
                let prec = op.precedence();
                let wrap_left = matches!(**l, Expr::Binary(lop, ..) if lop.precedence() < prec);
                let wrap_right = matches!(**r, Expr::Binary(rop, ..) if rop.precedence() <= prec);
                if wrap_left {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if wrap_right {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

/// Constant as `f64`, when the tree is a bare literal.
pub fn as_constant(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => c.to_f64(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    const PSI: &str = "(2*n*(1+t)+2*t+1)/(n+1)";
    const PHI: &str = "(n*(2+t)+1)/n";

    #[test]
    fn precedence_and_grouping() {
        let a = parse_expr("2+3*4").unwrap();
        let b = parse_expr("(2+3)*4").unwrap();
        assert_eq!(a.eval(&0.0f64, &1.0).unwrap(), 14.0);
        assert_eq!(b.eval(&0.0f64, &1.0).unwrap(), 20.0);
    }

    #[test]
    fn left_associativity() {
        let e = parse_expr("8-3-2").unwrap();
        assert_eq!(e.eval(&0.0f64, &1.0).unwrap(), 3.0);
        let e = parse_expr("16/4/2").unwrap();
        assert_eq!(e.eval(&0.0f64, &1.0).unwrap(), 2.0);
    }

    #[test]
    fn paper_pair_point_values() {
        let psi = parse_expr(PSI).unwrap();
        let phi = parse_expr(PHI).unwrap();
        let one = ratio(1, 1);
        assert_eq!(psi.eval(&one, &one).unwrap(), ratio(7, 2));
        assert_eq!(phi.eval(&ratio(0, 1), &one).unwrap(), ratio(3, 1));
        assert_eq!(psi.eval(&1.0f64, &1.0).unwrap(), 3.5);
    }

    #[test]
    fn identity_expression() {
        let e = parse_expr("t").unwrap();
        assert_eq!(e, Expr::T);
        assert_eq!(e.eval(&5.0f64, &17.0).unwrap(), 5.0);
    }

    #[test]
    fn tree_shape_of_psi() {
        let psi = parse_expr(PSI).unwrap();
        match psi {
            Expr::Binary(BinOp::Div, num, den) => {
                assert!(matches!(*num, Expr::Binary(BinOp::Add, ..)));
                assert_eq!(
                    *den,
                    Expr::binary(BinOp::Add, Expr::N, Expr::Const(ratio(1, 1)))
                );
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_expr("2+*3") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        match parse_expr("(1+t") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("1 2"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr(""), Err(ExprError::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expr("3."), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse_expr("1 + exp"),
            Err(ExprError::UnknownIdentifier { offset: 4, name: "exp".into() })
        );
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = parse_expr("1/(n-1)").unwrap();
        assert_eq!(e.eval(&0.0f64, &1.0), Err(ExprError::DivisionByZero));
        assert_eq!(e.eval(&ratio(0, 1), &ratio(1, 1)), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn decimal_literals_are_exact() {
        let e = parse_expr("0.1").unwrap();
        assert_eq!(e, Expr::Const(ratio(1, 10)));
        assert_eq!(e.to_string(), "0.1");
        assert_eq!(parse_expr("0.025").unwrap().to_string(), "0.025");
        assert_eq!(parse_expr("12.50").unwrap().to_string(), "12.5");
    }

    #[test]
    fn limits_of_paper_pair() {
        let psi = parse_expr(PSI).unwrap();
        let phi = parse_expr(PHI).unwrap();
        let l = psi.limit_in_n(&1.0f64, &1e-9).unwrap();
        assert!((l - 4.0).abs() < 1e-9);
        let l = phi.limit_in_n(&0.0f64, &1e-9).unwrap();
        assert!((l - 2.0).abs() < 1e-9);
    }

    #[test]
    fn limit_of_constant() {
        let e = parse_expr("3").unwrap();
        assert_eq!(e.limit_in_n(&42.0f64, &1e-9).unwrap(), 3.0);
    }

    #[test]
    fn limit_of_divergent_family_fails() {
        let e = parse_expr("n*t").unwrap();
        assert!(matches!(
            e.limit_in_n(&1.0f64, &1e-9),
            Err(ExprError::NonConvergence { .. })
        ));
        // n*t at t = 0 is identically zero.
        assert_eq!(e.limit_in_n(&0.0f64, &1e-9).unwrap(), 0.0);
    }

    #[test]
    fn unparse_minimal_parentheses() {
        let e = parse_expr("(a)".replace('a', "t").as_str()).unwrap();
        assert_eq!(e.to_string(), "t");
        assert_eq!(parse_expr("1-(2-3)").unwrap().to_string(), "1 - (2 - 3)");
        assert_eq!(parse_expr("(1-2)-3").unwrap().to_string(), "1 - 2 - 3");
        assert_eq!(parse_expr("-(t+1)*2").unwrap().to_string(), "-(t + 1) * 2");
    }

    #[test]
    fn n_free_detection() {
        assert!(parse_expr("2*t+1").unwrap().is_n_free());
        assert!(!parse_expr(PHI).unwrap().is_n_free());
    }
}
