//! Point evaluation.
//!
//! The mode is fixed before evaluation starts: exact when the tree contains
//! no function applications and every needed value is exact, floating
//! otherwise. A floating evaluation never returns NaN; out-of-domain inputs
//! and non-finite results are reported as errors.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{Expr, ExprError, Func, Node, Symbol};

/// A coordinate value or evaluation result.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Sum of two scalars of the same mode.
    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a + b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a + b)),
            _ => Err(ExprError::ModeMismatch),
        }
    }

    /// Product of two scalars of the same mode.
    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a * b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a * b)),
            _ => Err(ExprError::ModeMismatch),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Values assigned to symbols.
pub type Point = HashMap<Symbol, Scalar>;

fn exact_eval(e: &Expr, p: &Point) -> Result<BigRational, ExprError> {
    Ok(match e.node() {
        Node::Num(r) => r.clone(),
        Node::Var(s) => match p.get(s) {
            Some(Scalar::Exact(r)) => r.clone(),
            Some(Scalar::Float(_)) => return Err(ExprError::ModeMismatch),
            None => return Err(ExprError::MissingAssignment(s.name().to_string())),
        },
        Node::Add(xs) => {
            let mut acc = BigRational::zero();
            for x in xs {
                acc += exact_eval(x, p)?;
            }
            acc
        }
        Node::Mul(xs) => {
            let mut acc = exact_eval(&xs[0], p)?;
            for x in &xs[1..] {
                if acc.is_zero() {
                    // Still evaluate to surface division by zero.
                    exact_eval(x, p)?;
                } else {
                    acc *= exact_eval(x, p)?;
                }
            }
            acc
        }
        Node::Div(a, b) => {
            let d = exact_eval(b, p)?;
            if d.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            exact_eval(a, p)? / d
        }
        Node::Pow(b, n) => {
            let v = exact_eval(b, p)?;
            if *n < 0 {
                if v.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                num_traits::pow(v.recip(), n.unsigned_abs() as usize)
            } else {
                num_traits::pow(v, *n as usize)
            }
        }
        Node::Func(..) => unreachable!("exact mode excludes functions"),
    })
}

fn float_eval(e: &Expr, p: &Point) -> Result<f64, ExprError> {
    let v = match e.node() {
        Node::Num(r) => rational_to_f64(r),
        Node::Var(s) => match p.get(s) {
            Some(v) => v.to_f64(),
            None => return Err(ExprError::MissingAssignment(s.name().to_string())),
        },
        Node::Add(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += float_eval(x, p)?;
            }
            acc
        }
        Node::Mul(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= float_eval(x, p)?;
            }
            acc
        }
        Node::Div(a, b) => {
            let d = float_eval(b, p)?;
            if d == 0.0 {
                return Err(ExprError::DivisionByZero);
            }
            float_eval(a, p)? / d
        }
        Node::Pow(b, n) => {
            let v = float_eval(b, p)?;
            if *n < 0 && v == 0.0 {
                return Err(ExprError::DivisionByZero);
            }
            v.powi(*n as i32)
        }
        Node::Func(f, a) => {
            let x = float_eval(a, p)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => {
                    if x.cos() == 0.0 {
                        return Err(ExprError::Domain("tan".into()));
                    }
                    x.tan()
                }
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(ExprError::Domain("log".into()));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(ExprError::Domain("sqrt".into()));
                    }
                    x.sqrt()
                }
                Func::Atan => x.atan(),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Domain("non-finite intermediate".into()))
    }
}

/// Evaluates `e` at `p`.
pub fn evaluate(e: &Expr, p: &Point) -> Result<Scalar, ExprError> {
    let syms = e.free_symbols();
    for s in &syms {
        if !p.contains_key(s) {
            return Err(ExprError::MissingAssignment(s.name().to_string()));
        }
    }
    let exact = e.is_rational_function() && syms.iter().all(|s| p[s].is_exact());
    if exact {
        exact_eval(e, p).map(Scalar::Exact)
    } else {
        float_eval(e, p).map(Scalar::Float)
    }
}
