//! Canonical-form constructors.
//!
//! Invariants of a canonical tree:
//! - `Add` has at least two terms, sorted by monomial with the constant first,
//!   and no two terms share a monomial.
//! - `Mul` has at least two factors: an optional leading rational `!= 1`
//!   followed by powers of distinct bases in sorted order.
//! - Bases of `Pow` are variables, functions, or primitive sums; sums only
//!   appear as bases with negative exponents because positive powers of sums
//!   are expanded.
//! - A sum is primitive when its last term has coefficient 1.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Expr, Func, Node};

pub(crate) fn simplify(e: &Expr) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Var(_) => e.clone(),
        Node::Func(f, a) => make_func(*f, simplify(a)),
        Node::Pow(b, n) => make_pow(simplify(b), *n),
        Node::Mul(xs) => make_mul(xs.iter().map(simplify).collect()),
        Node::Add(xs) => make_add(xs.iter().map(simplify).collect()),
        Node::Div(a, b) => make_mul(vec![simplify(a), make_pow(simplify(b), -1)]),
    }
}

/// Splits a canonical term into its rational coefficient and monomial.
pub(crate) fn split_term(t: &Expr) -> (BigRational, Option<Expr>) {
    match t.node() {
        Node::Num(r) => (r.clone(), None),
        Node::Mul(fs) => match fs[0].node() {
            Node::Num(r) => {
                let rest = &fs[1..];
                let mono = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::from_node(Node::Mul(rest.to_vec()))
                };
                (r.clone(), Some(mono))
            }
            _ => (BigRational::one(), Some(t.clone())),
        },
        _ => (BigRational::one(), Some(t.clone())),
    }
}

fn join_term(c: BigRational, mono: Option<Expr>) -> Expr {
    match mono {
        None => Expr::rational(c),
        Some(m) if c.is_one() => m,
        Some(m) => {
            let mut fs = vec![Expr::rational(c)];
            match m.node() {
                Node::Mul(xs) => fs.extend(xs.iter().cloned()),
                _ => fs.push(m.clone()),
            }
            Expr::from_node(Node::Mul(fs))
        }
    }
}

pub(crate) fn make_add(terms: Vec<Expr>) -> Expr {
    let mut acc: BTreeMap<Option<Expr>, BigRational> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        if let Node::Add(xs) = t.node() {
            stack.extend(xs.iter().cloned());
            continue;
        }
        let (c, m) = split_term(&t);
        if c.is_zero() {
            continue;
        }
        let slot = acc.entry(m).or_insert_with(BigRational::zero);
        *slot += c;
    }
    let mut out: Vec<Expr> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, c)| join_term(c, m))
        .collect();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::from_node(Node::Add(out)),
    }
}

/// Writes a canonical sum as `c * s` with `s` primitive.
fn primitive(sum: &Expr) -> (BigRational, Expr) {
    let Node::Add(ts) = sum.node() else {
        return (BigRational::one(), sum.clone());
    };
    let (lead, _) = split_term(ts.last().unwrap());
    if lead.is_zero() {
        return (BigRational::one(), sum.clone());
    }
    if lead.is_one() {
        return (lead, sum.clone());
    }
    let inv = lead.recip();
    let scaled = ts
        .iter()
        .map(|t| {
            let (c, m) = split_term(t);
            join_term(c * &inv, m)
        })
        .collect();
    (lead, Expr::from_node(Node::Add(scaled)))
}

fn power_of(b: Expr, e: i64) -> Expr {
    if e == 1 {
        b
    } else {
        Expr::from_node(Node::Pow(b, e))
    }
}

fn assemble(coef: BigRational, factors: Vec<Expr>) -> Expr {
    if factors.is_empty() {
        return Expr::rational(coef);
    }
    if coef.is_one() && factors.len() == 1 {
        return factors.into_iter().next().unwrap();
    }
    let mut fs = Vec::with_capacity(factors.len() + 1);
    if !coef.is_one() {
        fs.push(Expr::rational(coef));
    }
    fs.extend(factors);
    Expr::from_node(Node::Mul(fs))
}

fn terms_of(e: &Expr) -> Vec<Expr> {
    match e.node() {
        Node::Add(xs) => xs.clone(),
        _ => vec![e.clone()],
    }
}

pub(crate) fn make_mul(factors: Vec<Expr>) -> Expr {
    let mut coef = BigRational::one();
    let mut bases: BTreeMap<Expr, i64> = BTreeMap::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Num(r) => {
                if r.is_zero() {
                    return Expr::zero();
                }
                coef *= r;
            }
            Node::Mul(xs) => stack.extend(xs.iter().cloned()),
            Node::Pow(b, n) => *bases.entry(b.clone()).or_insert(0) += *n,
            Node::Add(_) => {
                let (c, s) = primitive(&f);
                coef *= c;
                *bases.entry(s).or_insert(0) += 1;
            }
            _ => *bases.entry(f.clone()).or_insert(0) += 1,
        }
    }
    let mut plain = Vec::new();
    let mut expand = Vec::new();
    for (b, e) in bases {
        if e == 0 {
            continue;
        }
        if e > 0 && matches!(b.node(), Node::Add(_)) {
            expand.push((b, e));
        } else {
            plain.push(power_of(b, e));
        }
    }
    let mut acc = assemble(coef, plain);
    for (b, e) in expand {
        let bt = terms_of(&b);
        for _ in 0..e {
            let at = terms_of(&acc);
            let mut prod = Vec::with_capacity(at.len() * bt.len());
            for t in &at {
                for s in &bt {
                    prod.push(make_mul(vec![t.clone(), s.clone()]));
                }
            }
            acc = make_add(prod);
        }
    }
    acc
}

fn rational_pow(r: &BigRational, n: i64) -> BigRational {
    let base = if n < 0 { r.recip() } else { r.clone() };
    num_traits::pow(base, n.unsigned_abs() as usize)
}

pub(crate) fn make_pow(b: Expr, n: i64) -> Expr {
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return b;
    }
    match b.node() {
        Node::Num(r) => {
            if r.is_zero() && n < 0 {
                Expr::from_node(Node::Pow(b.clone(), n))
            } else {
                Expr::rational(rational_pow(r, n))
            }
        }
        Node::Pow(inner, m) => match inner.node() {
            Node::Num(_) => Expr::from_node(Node::Pow(b.clone(), n)),
            _ => make_pow(inner.clone(), m * n),
        },
        Node::Mul(fs) => make_mul(fs.iter().map(|f| make_pow(f.clone(), n)).collect()),
        Node::Add(_) if n > 0 => make_mul(vec![b.clone(); n as usize]),
        Node::Add(_) => {
            let (c, s) = primitive(&b);
            make_mul(vec![
                Expr::rational(rational_pow(&c, n)),
                Expr::from_node(Node::Pow(s, n)),
            ])
        }
        _ => Expr::from_node(Node::Pow(b, n)),
    }
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd): (BigInt, BigInt) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

pub(crate) fn make_func(f: Func, arg: Expr) -> Expr {
    if let Some(r) = arg.as_rational() {
        let folded = match f {
            Func::Sin | Func::Tan | Func::Atan if r.is_zero() => Some(Expr::zero()),
            Func::Cos | Func::Exp if r.is_zero() => Some(Expr::one()),
            Func::Log if r.is_one() => Some(Expr::zero()),
            Func::Sqrt => exact_sqrt(r).map(Expr::rational),
            _ => None,
        };
        if let Some(v) = folded {
            return v;
        }
    }
    if arg.has_negative_sign() {
        let neg = make_mul(vec![Expr::int(-1), arg.clone()]);
        match f {
            Func::Sin | Func::Tan | Func::Atan => {
                return make_mul(vec![Expr::int(-1), Expr::from_node(Node::Func(f, neg))]);
            }
            Func::Cos => return Expr::from_node(Node::Func(f, neg)),
            _ => {}
        }
    }
    Expr::from_node(Node::Func(f, arg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::sym(&format!("x{i}"))
    }

    #[test]
    fn collects_like_terms() {
        let e = x(1) + x(2) + x(1);
        assert_eq!(e, Expr::int(2) * x(1) + x(2));
        assert!((x(1) - x(1)).is_zero());
    }

    #[test]
    fn unsimplified_zero_term_in_product() {
        let chart = crate::expr::Chart::states(&["x1", "x2", "x3"]).unwrap();
        let f = crate::expr::parse_expr("(2*x1^2) + (0*x3^1)", &chart).unwrap();
        let g = crate::expr::parse_expr("(0*x1) + (-3*x1*x3)", &chart).unwrap();
        assert_eq!((&f * &g).simplify(), Expr::int(-6) * x(1).pow(3) * x(3));
    }

    #[test]
    fn constant_folding() {
        let e = Expr::int(2) * Expr::frac(-1, 2) + Expr::one();
        assert!(e.is_zero());
    }

    #[test]
    fn expands_positive_powers() {
        let s = x(1) + Expr::one();
        let sq = s.pow(2);
        let expected = x(1).pow(2) + Expr::int(2) * x(1) + Expr::one();
        assert_eq!(sq, expected);
    }

    #[test]
    fn cancels_sum_against_its_inverse() {
        let s = Expr::int(2) * x(1) + Expr::int(2);
        let e = s.clone() * s.recip();
        assert!(e.is_one());
        let t = (x(1) + Expr::one()) / (Expr::int(2) * x(1) + Expr::int(2));
        assert_eq!(t, Expr::frac(1, 2));
    }

    #[test]
    fn parity_of_trig() {
        let a = Expr::func(Func::Sin, -x(1));
        assert_eq!(a + Expr::func(Func::Sin, x(1)), Expr::zero());
        assert_eq!(Expr::func(Func::Cos, -x(1)), Expr::func(Func::Cos, x(1)));
    }

    #[test]
    fn exact_function_values() {
        assert_eq!(Expr::func(Func::Cos, Expr::zero()), Expr::one());
        assert_eq!(Expr::func(Func::Sqrt, Expr::frac(9, 4)), Expr::frac(3, 2));
        assert!(matches!(Expr::func(Func::Sqrt, Expr::int(2)).node(), Node::Func(..)));
    }

    #[test]
    fn idempotent_on_canonical_trees() {
        let e = (x(1) + x(2).recip()) * (x(3) - Expr::frac(1, 3)).pow(-2) + Expr::func(Func::Cos, x(1) * x(2));
        assert_eq!(e.simplify(), e);
    }
}
