//! Reproducible generic sample points.
//!
//! A coordinate value depends only on the seed, the sample index, the redraw
//! attempt and the coordinate name. Lifting a sample set from the state
//! chart to a prolonged chart therefore keeps the state values unchanged and
//! draws the input-jet coordinates the same way.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{evaluate, is_zero_exact, Chart, Expr, ExprError, Node, Point, Scalar, Symbol};

use super::VectorField;

pub const DEFAULT_SEED: u64 = 0x5eed_f1a7;
pub const DEFAULT_COUNT: usize = 25;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// A seeded family of generic points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub seed: u64,
    pub count: usize,
    /// Coordinates are drawn from `[-bound, bound]`.
    pub bound: i64,
    pub max_denominator: i64,
    pub max_retries: usize,
    /// Relative rank threshold for floating rows.
    pub tol: f64,
    /// Relative threshold for deciding that a floating value is zero.
    pub zero_tol: f64,
}

impl Default for SampleSet {
    fn default() -> Self {
        SampleSet {
            seed: DEFAULT_SEED,
            count: DEFAULT_COUNT,
            bound: 2,
            max_denominator: 64,
            max_retries: 100,
            tol: DEFAULT_TOL,
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Matrix of field components at one sample, one row per field.
#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Exact(Vec<Vec<BigRational>>),
    Float(Vec<Vec<f64>>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Exact(r) => r.len(),
            Rows::Float(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Rows::Exact(_))
    }

    /// Largest Euclidean row norm, used to scale float thresholds.
    pub fn scale(&self) -> f64 {
        match self {
            Rows::Exact(_) => 1.0,
            Rows::Float(r) => r
                .iter()
                .map(|row| row.iter().map(|x| x * x).sum::<f64>().sqrt())
                .fold(0.0, f64::max),
        }
    }
}

impl SampleSet {
    pub fn new(seed: u64, count: usize) -> Self {
        SampleSet {
            seed,
            count,
            ..Default::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// The value of coordinate `s` at sample `index`, redraw `attempt`.
    pub fn value(&self, s: &Symbol, index: usize, attempt: usize) -> BigRational {
        let mix = splitmix(
            splitmix(splitmix(self.seed ^ fnv1a(s.name())).wrapping_add(index as u64)).wrapping_add(attempt as u64),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(mix);
        let d: i64 = rng.gen_range(1..=self.max_denominator);
        let lim = self.bound * d;
        loop {
            let n: i64 = rng.gen_range(-lim..=lim);
            if n != 0 {
                return BigRational::new(BigInt::from(n), BigInt::from(d));
            }
        }
    }

    pub fn point(&self, chart: &Chart, index: usize, attempt: usize) -> Point {
        chart
            .symbols()
            .iter()
            .map(|s| (s.clone(), Scalar::Exact(self.value(s, index, attempt))))
            .collect()
    }

    /// First-attempt points on `chart`.
    pub fn points(&self, chart: &Chart) -> Vec<Point> {
        (0..self.count).map(|i| self.point(chart, i, 0)).collect()
    }

    /// Evaluates `exprs` at sample `index`, redrawing on division by zero or
    /// domain errors. Returns values in a single mode.
    pub fn evaluate_at(&self, chart: &Chart, exprs: &[&Expr], index: usize) -> Result<Vec<Scalar>> {
        'attempt: for attempt in 0..=self.max_retries {
            let p = self.point(chart, index, attempt);
            let mut vals = Vec::with_capacity(exprs.len());
            for e in exprs {
                match evaluate(e, &p) {
                    Ok(v) => vals.push(v),
                    Err(ExprError::DivisionByZero) | Err(ExprError::Domain(_)) => continue 'attempt,
                    Err(other) => return Err(other.into()),
                }
            }
            if vals.iter().all(Scalar::is_exact) {
                return Ok(vals);
            }
            return Ok(vals.into_iter().map(|v| Scalar::Float(v.to_f64())).collect());
        }
        Err(Error::NoValidSamples {
            attempts: self.max_retries + 1,
        })
    }

    /// Component matrix of `fields` at sample `index`.
    pub fn rows(&self, chart: &Arc<Chart>, fields: &[&VectorField], index: usize) -> Result<Rows> {
        let dim = chart.dim();
        let exprs: Vec<&Expr> = fields.iter().flat_map(|f| f.components().iter()).collect();
        let vals = self.evaluate_at(chart, &exprs, index)?;
        let exact = vals.iter().all(Scalar::is_exact);
        let mut it = vals.into_iter();
        Ok(if exact {
            Rows::Exact(
                (0..fields.len())
                    .map(|_| {
                        (&mut it)
                            .take(dim)
                            .map(|v| match v {
                                Scalar::Exact(r) => r,
                                Scalar::Float(_) => unreachable!("mode checked above"),
                            })
                            .collect()
                    })
                    .collect(),
            )
        } else {
            Rows::Float(
                (0..fields.len())
                    .map(|_| (&mut it).take(dim).map(|v| v.to_f64()).collect())
                    .collect(),
            )
        })
    }

    /// Generic zero test of a scalar: exact when the rational engine decides
    /// it, otherwise by evaluation at every sample.
    pub fn is_zero(&self, chart: &Chart, e: &Expr) -> Result<bool> {
        if let Some(z) = is_zero_exact(e) {
            return Ok(z);
        }
        let e = e.simplify();
        let terms: Vec<Expr> = match e.node() {
            Node::Add(ts) => ts.clone(),
            _ => vec![e.clone()],
        };
        let refs: Vec<&Expr> = terms.iter().collect();
        for i in 0..self.count {
            let vals = self.evaluate_at(chart, &refs, i)?;
            if !self.value_list_sums_to_zero(&vals) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub(crate) fn value_list_sums_to_zero(&self, vals: &[Scalar]) -> bool {
        if vals.iter().all(Scalar::is_exact) {
            let s: BigRational = vals.iter().filter_map(Scalar::as_exact).sum();
            return s.is_zero();
        }
        let s: f64 = vals.iter().map(Scalar::to_f64).sum();
        let mag = vals.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max);
        s.abs() <= self.zero_tol * mag
    }

    /// Whether `v` (already evaluated) counts as zero under this set's rules.
    pub fn scalar_is_zero(&self, v: &Scalar, magnitude: f64) -> bool {
        match v {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => x.abs() <= self.zero_tol * magnitude.max(1.0),
        }
    }
}
