//! Differentiation and substitution.

use std::collections::HashMap;

use super::{Expr, Func, Node, Symbol};

/// Partial derivative of `e` with respect to `s`, in canonical form.
pub fn differentiate(e: &Expr, s: &Symbol) -> Expr {
    if !e.depends_on(s) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Var(v) => {
            if v == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(xs) => Expr::sum(xs.iter().map(|x| differentiate(x, s))),
        Node::Mul(xs) => {
            let xs: Vec<Expr> = xs.iter().map(Expr::simplify).collect();
            let mut terms = Vec::new();
            for i in 0..xs.len() {
                let d = differentiate(&xs[i], s);
                if d.is_zero() {
                    continue;
                }
                let mut fs: Vec<Expr> = Vec::with_capacity(xs.len());
                fs.extend(xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()));
                fs.push(d);
                terms.push(Expr::product(fs));
            }
            Expr::sum(terms)
        }
        Node::Div(a, b) => differentiate(&(a.simplify() / b.simplify()), s),
        Node::Pow(b, n) => {
            let b = b.simplify();
            Expr::product([Expr::int(*n), b.pow(n - 1), differentiate(&b, s)])
        }
        Node::Func(f, a) => {
            let a = a.simplify();
            let da = differentiate(&a, s);
            let outer = match f {
                Func::Sin => Expr::func(Func::Cos, a),
                Func::Cos => -Expr::func(Func::Sin, a),
                Func::Tan => Expr::one() + Expr::func(Func::Tan, a).pow(2),
                Func::Exp => Expr::func(Func::Exp, a),
                Func::Log => a.recip(),
                Func::Sqrt => (Expr::int(2) * Expr::func(Func::Sqrt, a)).recip(),
                Func::Atan => (Expr::one() + a.pow(2)).recip(),
            };
            outer * da
        }
    }
}

/// Replaces symbols by expressions and returns the canonical result.
pub fn substitute(e: &Expr, map: &HashMap<Symbol, Expr>) -> Expr {
    match e.node() {
        Node::Num(_) => e.clone(),
        Node::Var(v) => map.get(v).cloned().unwrap_or_else(|| e.clone()),
        Node::Add(xs) => Expr::sum(xs.iter().map(|x| substitute(x, map))),
        Node::Mul(xs) => Expr::product(xs.iter().map(|x| substitute(x, map))),
        Node::Div(a, b) => substitute(a, map) / substitute(b, map),
        Node::Pow(b, n) => substitute(b, map).pow(*n),
        Node::Func(f, a) => Expr::func(*f, substitute(a, map)),
    }
}
