//! Symbolic scalar expressions over a coordinate chart.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Trees produced by
//! [`parse_expr`] are kept exactly as written; every other constructor in
//! this module (arithmetic operators, [`Expr::simplify`], [`differentiate`])
//! returns the canonical form described in the grammar chapter of the guide:
//! expanded polynomial parts, like terms collected, factors ordered, and
//! quotients stored as negative integer powers.

mod diff;
mod eval;
mod parse;
mod print;
mod rational;
mod simplify;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use diff::{differentiate, substitute};
pub use eval::{evaluate, Point, Scalar};
pub use parse::parse_expr;
pub use rational::{is_zero_exact, polynomial_terms, together, PolyTerm};

/// Errors raised by parsing and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("undeclared symbol `{name}` at column {column}")]
    UndeclaredSymbol { name: String, column: usize },
    #[error("no value assigned to `{0}`")]
    MissingAssignment(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("`{0}` evaluated outside its domain")]
    Domain(String),
    #[error("cannot mix exact and floating scalars")]
    ModeMismatch,
}

/// A named coordinate. Ordering is "natural": `x2 < x10`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    /// The `p`-th time derivative of input `i` (1-based), named `u<i>_<p>`.
    pub fn input_jet(input: usize, order: usize) -> Self {
        Symbol::new(&format!("u{input}_{order}"))
    }

    /// The `q`-th derivative of flat output `i` (1-based), named `y<i>_<q>`.
    pub fn output_jet(output: usize, order: usize) -> Self {
        Symbol::new(&format!("y{output}_{order}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Splits `<prefix><i>_<p>` into `(i, p)` when the prefix matches.
    pub fn jet_indices(&self, prefix: char) -> Option<(usize, usize)> {
        let rest = self.0.strip_prefix(prefix)?;
        let (i, p) = rest.split_once('_')?;
        if i.is_empty() || p.is_empty() || !i.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !p.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some((i.parse().ok()?, p.parse().ok()?))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut a, mut b) = (a.as_bytes(), b.as_bytes());
    loop {
        match (a.first(), b.first()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let da = a.iter().take_while(|c| c.is_ascii_digit()).count();
                let db = b.iter().take_while(|c| c.is_ascii_digit()).count();
                let na = trim_zeros(&a[..da]);
                let nb = trim_zeros(&b[..db]);
                let ord = na.len().cmp(&nb.len()).then_with(|| na.cmp(nb)).then(da.cmp(&db));
                if ord != Ordering::Equal {
                    return ord;
                }
                a = &a[da..];
                b = &b[db..];
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(y);
                }
                a = &a[1..];
                b = &b[1..];
            }
        }
    }
}

fn trim_zeros(d: &[u8]) -> &[u8] {
    let z = d.iter().take_while(|&&c| c == b'0').count();
    &d[z.min(d.len().saturating_sub(1))..]
}

/// What a chart coordinate stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolRole {
    State,
    /// `u_input^(order)`, input index 1-based.
    InputJet {
        input: usize,
        order: usize,
    },
    /// Anything else (time, output jets, user parameters).
    Other,
}

/// An ordered list of unique coordinates. The order fixes component indexing
/// for every vector field and one-form on the chart.
#[derive(Clone, PartialEq, Eq)]
pub struct Chart {
    symbols: Vec<Symbol>,
    roles: Vec<SymbolRole>,
    index: HashMap<Symbol, usize>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.symbols).finish()
    }
}

impl Chart {
    pub fn new(entries: Vec<(Symbol, SymbolRole)>) -> Result<Self, ExprError> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut symbols = Vec::with_capacity(entries.len());
        let mut roles = Vec::with_capacity(entries.len());
        for (i, (s, r)) in entries.into_iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(ExprError::Syntax {
                    column: 0,
                    message: format!("duplicate symbol `{s}` in chart"),
                });
            }
            symbols.push(s);
            roles.push(r);
        }
        Ok(Chart { symbols, roles, index })
    }

    /// A chart of state coordinates with the given names.
    pub fn states<S: AsRef<str>>(names: &[S]) -> Result<Self, ExprError> {
        Self::new(
            names
                .iter()
                .map(|n| (Symbol::new(n.as_ref()), SymbolRole::State))
                .collect(),
        )
    }

    /// This chart followed by additional coordinates.
    pub fn extended(&self, extra: Vec<(Symbol, SymbolRole)>) -> Result<Self, ExprError> {
        let mut all: Vec<_> = self.symbols.iter().cloned().zip(self.roles.iter().copied()).collect();
        all.extend(extra);
        Self::new(all)
    }

    pub fn dim(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn role(&self, i: usize) -> SymbolRole {
        self.roles[i]
    }

    pub fn index_of(&self, s: &Symbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index_of(&Symbol::new(name))
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.index.contains_key(s)
    }

    /// Number of state coordinates.
    pub fn state_count(&self) -> usize {
        self.roles.iter().filter(|r| **r == SymbolRole::State).count()
    }
}

/// Unary functions of the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }
}

/// Expression tree nodes. `Div` only appears in parsed (unsimplified) trees.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Num(BigRational),
    Var(Symbol),
    Func(Func, Expr),
    Pow(Expr, i64),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
    Div(Expr, Expr),
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Num(_) => 0,
            Node::Var(_) => 1,
            Node::Func(..) => 2,
            Node::Pow(..) => 3,
            Node::Mul(_) => 4,
            Node::Add(_) => 5,
            Node::Div(..) => 6,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        a.rank().cmp(&b.rank()).then_with(|| match (a, b) {
            (Node::Num(x), Node::Num(y)) => x.cmp(y),
            (Node::Var(x), Node::Var(y)) => x.cmp(y),
            (Node::Func(f, x), Node::Func(g, y)) => x.cmp(y).then(f.cmp(g)),
            (Node::Pow(x, n), Node::Pow(y, m)) => x.cmp(y).then(n.cmp(m)),
            (Node::Mul(x), Node::Mul(y)) | (Node::Add(x), Node::Add(y)) => x.len().cmp(&y.len()).then_with(|| x.cmp(y)),
            (Node::Div(x1, x2), Node::Div(y1, y2)) => x1.cmp(y1).then_with(|| x2.cmp(y2)),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Expr {
    pub(crate) fn from_node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn rational(r: BigRational) -> Self {
        Expr::from_node(Node::Num(r))
    }

    pub fn int(i: i64) -> Self {
        Expr::rational(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn var(s: &Symbol) -> Self {
        Expr::from_node(Node::Var(s.clone()))
    }

    pub fn sym(name: &str) -> Self {
        Expr::var(&Symbol::new(name))
    }

    pub fn func(f: Func, arg: Expr) -> Self {
        simplify::make_func(f, arg)
    }

    pub fn pow(&self, n: i64) -> Self {
        simplify::make_pow(self.clone(), n)
    }

    pub fn recip(&self) -> Self {
        self.pow(-1)
    }

    /// Canonical sum of canonical terms.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Self {
        simplify::make_add(terms.into_iter().collect())
    }

    /// Canonical product of canonical factors.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Self {
        simplify::make_mul(factors.into_iter().collect())
    }

    pub fn simplify(&self) -> Self {
        simplify::simplify(self)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Var(s) => Some(s),
            _ => None,
        }
    }

    /// True for the literal constant 0 (no symbolic zero testing).
    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Num(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Num(r) if r.is_one())
    }

    /// True when the constant is a negative rational or the term carries a
    /// negative leading coefficient.
    pub(crate) fn has_negative_sign(&self) -> bool {
        match self.node() {
            Node::Num(r) => r.is_negative(),
            Node::Mul(fs) => fs.first().is_some_and(|f| f.has_negative_sign()),
            _ => false,
        }
    }

    /// True when no transcendental function occurs in the tree.
    pub fn is_rational_function(&self) -> bool {
        match self.node() {
            Node::Num(_) | Node::Var(_) => true,
            Node::Func(..) => false,
            Node::Pow(b, _) => b.is_rational_function(),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().all(Expr::is_rational_function),
            Node::Div(a, b) => a.is_rational_function() && b.is_rational_function(),
        }
    }

    /// True when the tree is a polynomial in its variables (no functions, no
    /// negative powers, no quotients).
    pub fn is_polynomial(&self) -> bool {
        match self.node() {
            Node::Num(_) | Node::Var(_) => true,
            Node::Func(..) | Node::Div(..) => false,
            Node::Pow(b, n) => *n >= 0 && b.is_polynomial(),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().all(Expr::is_polynomial),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Var(s) => {
                out.insert(s.clone());
            }
            Node::Func(_, a) | Node::Pow(a, _) => a.collect_symbols(out),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Node::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Var(v) => v == s,
            Node::Func(_, a) | Node::Pow(a, _) => a.depends_on(s),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().any(|x| x.depends_on(s)),
            Node::Div(a, b) => a.depends_on(s) || b.depends_on(s),
        }
    }

    /// Fails with the first symbol that the chart does not declare.
    pub fn check_chart(&self, chart: &Chart) -> Result<(), ExprError> {
        match self.free_symbols().into_iter().find(|s| !chart.contains(s)) {
            Some(s) => Err(ExprError::UndeclaredSymbol {
                name: s.name().to_string(),
                column: 0,
            }),
            None => Ok(()),
        }
    }

    /// Number of nodes, used to bound work in tests.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Num(_) | Node::Var(_) => 0,
            Node::Func(_, a) | Node::Pow(a, _) => a.size(),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().map(Expr::size).sum(),
            Node::Div(a, b) => a.size() + b.size(),
        }
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Self {
        Expr::int(i)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        simplify::make_add(vec![self, rhs])
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        simplify::make_add(vec![self.clone(), rhs.clone()])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        simplify::make_add(vec![self, -rhs])
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        simplify::make_add(vec![self.clone(), -rhs.clone()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        simplify::make_mul(vec![self, rhs])
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        simplify::make_mul(vec![self.clone(), rhs.clone()])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        simplify::make_mul(vec![self, rhs.recip()])
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        simplify::make_mul(vec![self.clone(), rhs.recip()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        simplify::make_mul(vec![Expr::int(-1), self])
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}
