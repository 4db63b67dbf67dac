#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use pureflat::cli::sysfile::{Loaded, SystemFile};
use pureflat::expr::{parse_expr, Chart};
use pureflat::geometry::VectorField;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("systems")
        .join(format!("{name}.sys"))
}

pub fn load(name: &str) -> Loaded {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    SystemFile::parse(&text).unwrap().build().unwrap()
}

/// Three-input fixtures on five and six states.
pub const THREE_INPUT: [&str; 14] = [
    "rotor5",
    "rotor5-constant",
    "case2-5",
    "rank4-5",
    "two-pairs-5",
    "first-integral5",
    "chained6",
    "case2-6",
    "case2-6-counter",
    "noninvolutive-fail",
    "case1-x1x5",
    "case1-x1sq",
    "unreachable6",
    "first-integral6",
];

pub const ALL: [&str; 20] = [
    "car",
    "chained4",
    "rotor5",
    "rotor5-constant",
    "rotor5-naive-outputs",
    "case2-5",
    "rank4-5",
    "two-pairs-5",
    "first-integral5",
    "chained6",
    "case2-6",
    "case2-6-counter",
    "noninvolutive-fail",
    "case1-x1x5",
    "case1-x1sq",
    "unreachable6",
    "first-integral6",
    "m4n7",
    "m4n8",
    "m4n8-fail",
];

pub fn chart(n: usize) -> Arc<Chart> {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    Arc::new(Chart::states(&names).unwrap())
}

/// A random polynomial in `x1..xn` with small integer coefficients.
pub fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> String {
    let terms = rng.gen_range(0..=3);
    if terms == 0 {
        return "0".into();
    }
    (0..terms)
        .map(|_| {
            let mut t = rng.gen_range(-3i64..=3).to_string();
            for v in 1..=n {
                let d = rng.gen_range(0..=2);
                if d > 0 {
                    t.push_str(&format!("*x{v}^{d}"));
                }
            }
            format!("({t})")
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn random_field(rng: &mut ChaCha8Rng, chart: &Arc<Chart>) -> VectorField {
    let comps = (0..chart.dim())
        .map(|_| parse_expr(&random_poly(rng, chart.dim()), chart).unwrap())
        .collect();
    VectorField::new(chart, comps).unwrap()
}

/// A field whose components are zero or a single low-degree monomial.
pub fn sparse_field(rng: &mut ChaCha8Rng, chart: &Arc<Chart>) -> VectorField {
    let n = chart.dim();
    let comps = (0..n)
        .map(|_| {
            let src = if rng.gen_bool(0.5) {
                "0".to_string()
            } else {
                let mut t = rng.gen_range(1i64..=2).to_string();
                for _ in 0..rng.gen_range(0..=2) {
                    t.push_str(&format!("*x{}", rng.gen_range(1..=n)));
                }
                t
            };
            parse_expr(&src, chart).unwrap()
        })
        .collect();
    VectorField::new(chart, comps).unwrap()
}
