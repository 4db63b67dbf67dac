//! Incremental row echelon forms.
//!
//! The exact form keeps primitive integer rows and eliminates without
//! fractions. The floating form keeps an orthonormal basis (modified
//! Gram-Schmidt with one reorthogonalization pass) and rejects residuals
//! below `tol * scale`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Rows;

#[derive(Debug, Clone)]
pub enum Echelon {
    Exact { rows: Vec<(usize, Vec<BigInt>)> },
    Float { basis: Vec<Vec<f64>>, threshold: f64 },
}

fn to_integer_row(row: &[BigRational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for r in row {
        l = l.lcm(r.denom());
    }
    row.iter().map(|r| r.numer() * (&l / r.denom())).collect()
}

fn make_primitive(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in row.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in row.iter_mut() {
        *x = &*x / &g;
    }
}

fn reduce_exact(rows: &[(usize, Vec<BigInt>)], mut r: Vec<BigInt>) -> Vec<BigInt> {
    for (pc, p) in rows {
        if r[*pc].is_zero() {
            continue;
        }
        let a = &p[*pc];
        let b = r[*pc].clone();
        for (x, y) in r.iter_mut().zip(p) {
            *x = &*x * a - &b * y;
        }
        make_primitive(&mut r);
    }
    r
}

fn reduce_float(basis: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    let mut r = r.to_vec();
    for _ in 0..2 {
        for q in basis {
            let d: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in r.iter_mut().zip(q) {
                *x -= d * y;
            }
        }
    }
    r
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Echelon {
    pub fn exact() -> Self {
        Echelon::Exact { rows: Vec::new() }
    }

    /// Floating echelon; residual norms below `tol * scale` count as zero.
    pub fn float(tol: f64, scale: f64) -> Self {
        Echelon::Float {
            basis: Vec::new(),
            threshold: tol * scale.max(f64::MIN_POSITIVE),
        }
    }

    /// An empty echelon in the mode of `rows`.
    pub fn for_rows(rows: &Rows, tol: f64) -> Self {
        match rows {
            Rows::Exact(_) => Self::exact(),
            Rows::Float(_) => Self::float(tol, rows.scale()),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Echelon::Exact { rows } => rows.len(),
            Echelon::Float { basis, .. } => basis.len(),
        }
    }

    pub fn insert_exact(&mut self, row: &[BigRational]) -> bool {
        let Echelon::Exact { rows } = self else {
            panic!("exact row inserted into float echelon");
        };
        let r = reduce_exact(rows, to_integer_row(row));
        match r.iter().position(|x| !x.is_zero()) {
            Some(pc) => {
                let mut r = r;
                if r[pc].is_negative() {
                    r.iter_mut().for_each(|x| *x = -&*x);
                }
                rows.push((pc, r));
                true
            }
            None => false,
        }
    }

    pub fn insert_float(&mut self, row: &[f64]) -> bool {
        let Echelon::Float { basis, threshold } = self else {
            panic!("float row inserted into exact echelon");
        };
        let r = reduce_float(basis, row);
        let n = norm(&r);
        if n > *threshold {
            basis.push(r.into_iter().map(|x| x / n).collect());
            true
        } else {
            false
        }
    }

    /// Inserts row `i` of `rows`; true when it raised the rank.
    pub fn insert_row(&mut self, rows: &Rows, i: usize) -> bool {
        match rows {
            Rows::Exact(r) => self.insert_exact(&r[i]),
            Rows::Float(r) => self.insert_float(&r[i]),
        }
    }

    /// Whether row `i` of `rows` is in the current span.
    pub fn contains_row(&self, rows: &Rows, i: usize) -> bool {
        match (self, rows) {
            (Echelon::Exact { rows: e }, Rows::Exact(r)) => {
                reduce_exact(e, to_integer_row(&r[i])).iter().all(Zero::is_zero)
            }
            (Echelon::Float { basis, threshold }, Rows::Float(r)) => norm(&reduce_float(basis, &r[i])) <= *threshold,
            _ => panic!("row mode does not match echelon mode"),
        }
    }
}

/// Rank of all rows.
pub fn rows_rank(rows: &Rows, tol: f64) -> usize {
    let mut e = Echelon::for_rows(rows, tol);
    for i in 0..rows.len() {
        e.insert_row(rows, i);
    }
    e.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exact_rank() {
        let rows = Rows::Exact(vec![
            vec![q(1, 2), q(1, 3), q(0, 1)],
            vec![q(1, 1), q(2, 3), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(5, 7)],
        ]);
        assert_eq!(rows_rank(&rows, 1e-8), 2);
    }

    #[test]
    fn float_rank_with_threshold() {
        let rows = Rows::Float(vec![vec![1.0, 0.0], vec![1.0, 1e-12], vec![0.0, 1.0]]);
        let mut e = Echelon::for_rows(&rows, 1e-8);
        assert!(e.insert_row(&rows, 0));
        assert!(!e.insert_row(&rows, 1));
        assert!(e.insert_row(&rows, 2));
        assert!(e.contains_row(&rows, 1));
    }
}
