//! Printing in the input grammar. Canonical trees print to text that parses
//! and simplifies back to the same tree.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Expr, Node};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn num_prec(r: &BigRational) -> u8 {
    if r.is_negative() {
        PREC_NEG
    } else if r.is_integer() {
        PREC_ATOM
    } else {
        PREC_MUL
    }
}

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(r) => num_prec(r),
        Node::Var(_) | Node::Func(..) => PREC_ATOM,
        Node::Pow(_, n) if *n < 0 => PREC_MUL,
        Node::Pow(..) => PREC_POW,
        Node::Mul(fs) => {
            if fs[0].has_negative_sign() {
                PREC_NEG
            } else {
                PREC_MUL
            }
        }
        Node::Div(..) => PREC_MUL,
        Node::Add(_) => PREC_ADD,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    if prec(e) < min {
        format!("({e})")
    } else {
        e.to_string()
    }
}

fn int_str(i: &BigInt) -> String {
    i.to_string()
}

/// Prints `coef * num / den` where `num` and `den` are already formatted
/// factor strings.
fn write_product(f: &mut fmt::Formatter<'_>, coef: &BigRational, num: &[String], den: &[String]) -> fmt::Result {
    if coef.is_negative() {
        f.write_str("-")?;
    }
    let c = coef.abs();
    let mut top: Vec<String> = Vec::new();
    if !c.numer().is_one() || num.is_empty() {
        top.push(int_str(c.numer()));
    }
    top.extend(num.iter().cloned());
    f.write_str(&top.join("*"))?;
    let mut bottom: Vec<String> = Vec::new();
    if !c.denom().is_one() {
        bottom.push(int_str(c.denom()));
    }
    bottom.extend(den.iter().cloned());
    match bottom.len() {
        0 => Ok(()),
        1 => write!(f, "/{}", bottom[0]),
        _ => write!(f, "/({})", bottom.join("*")),
    }
}

fn pow_str(b: &Expr, n: i64) -> String {
    if n == 1 {
        wrap(b, PREC_POW + 1)
    } else {
        format!("{}^{}", wrap(b, PREC_POW + 1), n)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Node::Var(s) => write!(f, "{s}"),
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
            Node::Pow(b, n) if *n < 0 => write_product(f, &BigRational::one(), &[], &[pow_str(b, -n)]),
            Node::Pow(b, n) => write!(f, "{}^{}", wrap(b, PREC_POW + 1), n),
            Node::Mul(fs) => {
                let canonical = fs.iter().skip(1).all(|x| !matches!(x.node(), Node::Num(_)))
                    && fs
                        .iter()
                        .all(|x| !matches!(x.node(), Node::Mul(_) | Node::Add(_) | Node::Div(..)));
                if !canonical {
                    let parts: Vec<String> = fs.iter().map(|x| wrap(x, PREC_POW)).collect();
                    return f.write_str(&parts.join("*"));
                }
                let (coef, rest) = match fs[0].node() {
                    Node::Num(r) => (r.clone(), &fs[1..]),
                    _ => (BigRational::one(), &fs[..]),
                };
                let mut num = Vec::new();
                let mut den = Vec::new();
                for x in rest {
                    match x.node() {
                        Node::Pow(b, n) if *n < 0 => den.push(pow_str(b, -n)),
                        _ => num.push(wrap(x, PREC_POW)),
                    }
                }
                write_product(f, &coef, &num, &den)
            }
            Node::Div(a, b) => write!(f, "{}/{}", wrap(a, PREC_MUL), wrap(b, PREC_NEG)),
            Node::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i == 0 {
                        f.write_str(&wrap(t, PREC_ADD + 1))?;
                    } else if t.has_negative_sign() {
                        write!(f, " - {}", wrap(&(-t), PREC_ADD + 1))?;
                    } else {
                        write!(f, " + {}", wrap(t, PREC_ADD + 1))?;
                    }
                }
                Ok(())
            }
        }
    }
}
