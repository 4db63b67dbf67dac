//! Rational normal form and exact zero testing.

use std::collections::BTreeMap;

use num_rational::BigRational;

use super::{Expr, Node, Symbol};

/// Brings a canonical expression over a common denominator.
///
/// Returns `(numerator, denominator)` with both sides expanded polynomials
/// in the variables and in any function applications, which are treated as
/// opaque atoms.
pub fn together(e: &Expr) -> (Expr, Expr) {
    match e.node() {
        Node::Num(r) => (
            Expr::rational(BigRational::from_integer(r.numer().clone())),
            Expr::rational(BigRational::from_integer(r.denom().clone())),
        ),
        Node::Var(_) | Node::Func(..) => (e.clone(), Expr::one()),
        Node::Pow(b, n) => {
            let (nb, db) = together(b);
            if *n > 0 {
                (nb.pow(*n), db.pow(*n))
            } else {
                (db.pow(-n), nb.pow(-n))
            }
        }
        Node::Mul(xs) => {
            let mut num = Vec::with_capacity(xs.len());
            let mut den = Vec::with_capacity(xs.len());
            for x in xs {
                let (a, b) = together(x);
                num.push(a);
                den.push(b);
            }
            (Expr::product(num), Expr::product(den))
        }
        Node::Add(xs) => {
            let mut groups: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
            for x in xs {
                let (a, b) = together(x);
                groups.entry(b).or_default().push(a);
            }
            let parts: Vec<(Expr, Expr)> = groups.into_iter().map(|(d, ns)| (Expr::sum(ns), d)).collect();
            let mut num = Vec::with_capacity(parts.len());
            for (i, (n, _)) in parts.iter().enumerate() {
                let others = parts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (_, d))| d.clone());
                num.push(Expr::product(std::iter::once(n.clone()).chain(others)));
            }
            let den = Expr::product(parts.into_iter().map(|(_, d)| d));
            (Expr::sum(num), den)
        }
        Node::Div(..) => together(&e.simplify()),
    }
}

/// Exact zero test.
///
/// `Some(true)` when the expression is identically zero after bringing it
/// over a common denominator, `Some(false)` when it is a rational function
/// with a nonzero numerator, and `None` when function atoms leave the
/// question open.
pub fn is_zero_exact(e: &Expr) -> Option<bool> {
    let e = e.simplify();
    if e.is_zero() {
        return Some(true);
    }
    if let Node::Num(_) = e.node() {
        return Some(false);
    }
    let (n, d) = together(&e);
    if d.is_zero() {
        return None;
    }
    if n.is_zero() {
        Some(true)
    } else if e.is_rational_function() {
        Some(false)
    } else {
        None
    }
}

/// One monomial `coef * prod(sym^exp)` of an expanded polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coef: BigRational,
    pub powers: Vec<(Symbol, u32)>,
}

impl PolyTerm {
    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|(_, e)| e).sum()
    }
}

/// Monomials of a canonical polynomial, or `None` if it is not one.
pub fn polynomial_terms(e: &Expr) -> Option<Vec<PolyTerm>> {
    let e = e.simplify();
    let terms = match e.node() {
        Node::Add(xs) => xs.clone(),
        _ if e.is_zero() => return Some(Vec::new()),
        _ => vec![e.clone()],
    };
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let (coef, mono) = super::simplify::split_term(&t);
        let mut powers = Vec::new();
        if let Some(m) = mono {
            let factors = match m.node() {
                Node::Mul(fs) => fs.clone(),
                _ => vec![m.clone()],
            };
            for f in factors {
                match f.node() {
                    Node::Var(s) => powers.push((s.clone(), 1)),
                    Node::Pow(b, n) if *n > 0 => powers.push((b.as_symbol()?.clone(), *n as u32)),
                    _ => return None,
                }
            }
        }
        out.push(PolyTerm { coef, powers });
    }
    Some(out)
}
