//! Flat parametrizations written in output jets `y<i>_<q>`.
//!
//! Output jets are replaced by iterated derivatives along the total time
//! derivative `D_t = sum u_i g_i + sum u_i_(p+1) d/du_i_p`, so no numeric
//! differentiation is involved in either check.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{
    differentiate, evaluate, is_zero_exact, parse_expr, substitute, Chart, Expr, ExprError, Point, Scalar, Symbol,
    SymbolRole,
};
use crate::geometry::{SampleSet, VectorField};
use crate::system::ControlSystem;

use super::lie_derivative;

/// One row of a parametrization: `target = expr(y-jets)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry {
    /// A state name or an input jet `u<i>_<p>`.
    pub target: Symbol,
    pub expr: Expr,
}

/// States and inputs as functions of the output jets up to `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametrizationSpec {
    pub outputs: usize,
    pub order: usize,
    pub entries: Vec<ParamEntry>,
}

impl ParametrizationSpec {
    /// The chart of output jets `y<i>_<q>`, `i <= outputs`, `q <= order`.
    pub fn jet_chart(outputs: usize, order: usize) -> Result<Chart> {
        let mut syms = Vec::new();
        for i in 1..=outputs {
            for q in 0..=order {
                syms.push((Symbol::output_jet(i, q), SymbolRole::Other));
            }
        }
        Ok(Chart::new(syms)?)
    }

    pub fn parse(outputs: usize, order: usize, entries: &[(&str, &str)]) -> Result<Self> {
        let chart = Self::jet_chart(outputs, order)?;
        let entries = entries
            .iter()
            .map(|(t, e)| {
                Ok(ParamEntry {
                    target: Symbol::new(t),
                    expr: parse_expr(e, &chart)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ParametrizationSpec {
            outputs,
            order,
            entries,
        })
    }
}

/// Inputs as functions of `t`, an initial state and a fixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub inputs: Vec<Expr>,
    pub x0: Vec<f64>,
    pub t_end: f64,
    pub step: f64,
    pub tol: f64,
}

impl TrajectoryConfig {
    /// The chart the input signals are written on.
    pub fn time_chart() -> Chart {
        Chart::new(vec![(Symbol::new("t"), SymbolRole::Other)]).expect("one symbol")
    }

    pub fn parse(inputs: &[&str], x0: Vec<f64>) -> Result<Self> {
        let chart = Self::time_chart();
        let inputs = inputs
            .iter()
            .map(|e| parse_expr(e, &chart).map_err(Error::from))
            .collect::<Result<_>>()?;
        Ok(TrajectoryConfig {
            inputs,
            x0,
            t_end: 1.0,
            step: 1e-3,
            tol: 1e-6,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    /// The residual is zero as a rational function.
    Identical,
    /// The residual is a nonzero rational function.
    Refuted,
    /// Function atoms remain; the residual vanished at every sample.
    SampleZero,
    /// Function atoms remain; the residual is nonzero at some sample.
    SampleNonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryCheck {
    pub target: String,
    pub status: EntryStatus,
    /// Sup-norm reconstruction error along the trajectory.
    pub max_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericCheck {
    pub steps: usize,
    pub sup_error: f64,
    pub passed: bool,
    /// Time at which a denominator vanished, if the run stopped early.
    pub singular_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParametrizationReport {
    pub entries: Vec<EntryCheck>,
    pub symbolic_passed: bool,
    pub numeric: Option<NumericCheck>,
    /// No entry is refuted, and every `sample_nonzero` entry is reconstructed
    /// within tolerance along the trajectory. Function atoms such as `atan`
    /// and `sqrt` only invert on a branch, which global samples can leave.
    pub passed: bool,
}

struct JetContext {
    chart: Arc<Chart>,
    /// `y<i>_<q>` expanded on `chart`.
    jets: HashMap<Symbol, Expr>,
    depth: usize,
}

fn jet_context(sys: &ControlSystem, outputs: &[Expr], spec: &ParametrizationSpec) -> Result<JetContext> {
    let target_depth = spec
        .entries
        .iter()
        .filter_map(|e| e.target.jet_indices('u').map(|(_, p)| p))
        .max()
        .unwrap_or(0);
    let output_depth = outputs
        .iter()
        .flat_map(|y| y.free_symbols())
        .filter_map(|s| s.jet_indices('u').map(|(_, p)| p))
        .max()
        .unwrap_or(0);
    let depth = spec.order + output_depth.max(target_depth) + 1;
    let mut extra = Vec::new();
    for i in 1..=sys.m() {
        for p in 0..=depth {
            extra.push((Symbol::input_jet(i, p), SymbolRole::InputJet { input: i, order: p }));
        }
    }
    let chart = Arc::new(sys.chart().extended(extra)?);
    let mut dt = VectorField::zero(&chart);
    for (i, g) in sys.fields().iter().enumerate() {
        dt = dt.add(&g.embed(&chart)?.scale(&Expr::var(&Symbol::input_jet(i + 1, 0))))?;
        for p in 0..depth {
            let at = chart.index_of(&Symbol::input_jet(i + 1, p)).unwrap();
            let shift = VectorField::coordinate(&chart, at).scale(&Expr::var(&Symbol::input_jet(i + 1, p + 1)));
            dt = dt.add(&shift)?;
        }
    }
    let mut jets = HashMap::new();
    for (i, y) in outputs.iter().enumerate() {
        y.check_chart(&chart)?;
        let mut cur = y.clone();
        for q in 0..=spec.order {
            if q > 0 {
                cur = lie_derivative(&cur, &dt);
            }
            jets.insert(Symbol::output_jet(i + 1, q), cur.clone());
        }
    }
    for e in &spec.entries {
        if !chart.contains(&e.target) {
            return Err(Error::Precondition(format!(
                "parametrization target `{}` is not a state or input jet",
                e.target
            )));
        }
    }
    Ok(JetContext { chart, jets, depth })
}

/// Symbolic check of every entry, plus a numeric reconstruction along a
/// trajectory when `traj` is given.
pub fn verify_parametrization(
    sys: &ControlSystem,
    outputs: &[Expr],
    spec: &ParametrizationSpec,
    traj: Option<&TrajectoryConfig>,
    s: &SampleSet,
) -> Result<ParametrizationReport> {
    if !sys.is_driftless() {
        return Err(Error::Precondition(
            "parametrization checks need a driftless system".into(),
        ));
    }
    if outputs.len() != spec.outputs {
        return Err(Error::Precondition(format!(
            "{} outputs given, parametrization uses {}",
            outputs.len(),
            spec.outputs
        )));
    }
    let ctx = jet_context(sys, outputs, spec)?;
    let mut entries = Vec::with_capacity(spec.entries.len());
    for e in &spec.entries {
        let residual = substitute(&e.expr, &ctx.jets) - Expr::var(&e.target);
        let status = match is_zero_exact(&residual) {
            Some(true) => EntryStatus::Identical,
            Some(false) => EntryStatus::Refuted,
            None => match s.is_zero(&ctx.chart, &residual) {
                Ok(true) => EntryStatus::SampleZero,
                Ok(false) | Err(Error::NoValidSamples { .. }) => EntryStatus::SampleNonzero,
                Err(other) => return Err(other),
            },
        };
        entries.push(EntryCheck {
            target: e.target.to_string(),
            status,
            max_error: None,
        });
    }
    let symbolic_passed = entries
        .iter()
        .all(|e| matches!(e.status, EntryStatus::Identical | EntryStatus::SampleZero));
    let numeric = match traj {
        Some(t) => Some(numeric_check(sys, spec, &ctx, t, &mut entries)?),
        None => None,
    };
    let passed = match &numeric {
        Some(n) => n.passed && entries.iter().all(|e| e.status != EntryStatus::Refuted),
        None => symbolic_passed,
    };
    Ok(ParametrizationReport {
        entries,
        symbolic_passed,
        numeric,
        passed,
    })
}

fn float_point(chart: &Chart, values: &[f64]) -> Point {
    chart
        .symbols()
        .iter()
        .zip(values)
        .map(|(s, v)| (s.clone(), Scalar::Float(*v)))
        .collect()
}

fn eval_f64(e: &Expr, p: &Point) -> std::result::Result<f64, ExprError> {
    evaluate(e, p).map(|v| v.to_f64())
}

fn numeric_check(
    sys: &ControlSystem,
    spec: &ParametrizationSpec,
    ctx: &JetContext,
    traj: &TrajectoryConfig,
    entries: &mut [EntryCheck],
) -> Result<NumericCheck> {
    let n = sys.n();
    if traj.inputs.len() != sys.m() || traj.x0.len() != n {
        return Err(Error::Precondition(
            "trajectory does not match the system dimensions".into(),
        ));
    }
    if !(traj.step > 0.0 && traj.t_end >= 0.0) {
        return Err(Error::Precondition(
            "trajectory needs a positive step and horizon".into(),
        ));
    }
    let tsym = Symbol::new("t");
    // u_i^(p)(t) for p <= depth.
    let mut signal_jets: Vec<Vec<Expr>> = Vec::with_capacity(sys.m());
    for u in &traj.inputs {
        let mut v = vec![u.clone()];
        for _ in 0..ctx.depth {
            let d = differentiate(v.last().unwrap(), &tsym);
            v.push(d);
        }
        signal_jets.push(v);
    }
    let tchart = TrajectoryConfig::time_chart();
    let at_time = |t: f64| float_point(&tchart, &[t]);
    let inputs_at = |t: f64| -> std::result::Result<Vec<f64>, ExprError> {
        signal_jets.iter().map(|v| eval_f64(&v[0], &at_time(t))).collect()
    };
    let field = |x: &[f64], u: &[f64]| -> std::result::Result<Vec<f64>, ExprError> {
        let p = float_point(sys.chart(), x);
        let mut dx = vec![0.0; n];
        for (g, ui) in sys.fields().iter().zip(u) {
            for (d, c) in dx.iter_mut().zip(g.components()) {
                if !c.is_zero() {
                    *d += ui * eval_f64(c, &p)?;
                }
            }
        }
        Ok(dx)
    };
    let jet_syms: Vec<Symbol> = (1..=spec.outputs)
        .flat_map(|i| (0..=spec.order).map(move |q| Symbol::output_jet(i, q)))
        .collect();
    let jet_exprs: Vec<&Expr> = jet_syms.iter().map(|s| &ctx.jets[s]).collect();

    let steps = (traj.t_end / traj.step).round() as usize;
    let mut x = traj.x0.clone();
    let mut errors = vec![0.0f64; entries.len()];
    let mut singular_at = None;
    for k in 0..=steps {
        let t = k as f64 * traj.step;
        // Full point on the jet chart: states, then input jets.
        let mut values = x.clone();
        let tp = at_time(t);
        let mut bad = false;
        for jets in &signal_jets {
            for e in jets.iter().take(ctx.depth + 1) {
                match eval_f64(e, &tp) {
                    Ok(v) => values.push(v),
                    Err(_) => bad = true,
                }
            }
        }
        let p = float_point(&ctx.chart, &values);
        let ypoint: Option<Point> = (!bad)
            .then(|| {
                jet_syms
                    .iter()
                    .zip(&jet_exprs)
                    .map(|(s, e)| eval_f64(e, &p).map(|v| (s.clone(), Scalar::Float(v))).ok())
                    .collect()
            })
            .flatten();
        let Some(ypoint) = ypoint else {
            singular_at = Some(t);
            break;
        };
        for (err, e) in errors.iter_mut().zip(&spec.entries) {
            let target = match p.get(&e.target) {
                Some(v) => v.to_f64(),
                None => unreachable!("targets checked against the chart"),
            };
            match eval_f64(&e.expr, &ypoint) {
                Ok(v) => *err = err.max((v - target).abs()),
                Err(_) => {
                    singular_at = Some(t);
                    break;
                }
            }
        }
        if singular_at.is_some() || k == steps {
            break;
        }
        let rk = (|| -> std::result::Result<Vec<f64>, ExprError> {
            let h = traj.step;
            let add = |a: &[f64], b: &[f64], c: f64| a.iter().zip(b).map(|(x, y)| x + c * y).collect::<Vec<f64>>();
            let k1 = field(&x, &inputs_at(t)?)?;
            let k2 = field(&add(&x, &k1, h / 2.0), &inputs_at(t + h / 2.0)?)?;
            let k3 = field(&add(&x, &k2, h / 2.0), &inputs_at(t + h / 2.0)?)?;
            let k4 = field(&add(&x, &k3, h), &inputs_at(t + h)?)?;
            Ok((0..n)
                .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        })();
        match rk {
            Ok(next) => x = next,
            Err(_) => {
                singular_at = Some(t);
                break;
            }
        }
    }
    for (e, err) in entries.iter_mut().zip(&errors) {
        e.max_error = Some(*err);
    }
    let sup_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(NumericCheck {
        steps,
        sup_error,
        passed: singular_at.is_none() && sup_error < traj.tol,
        singular_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotor5() -> ControlSystem {
        ControlSystem::parse(
            "rotor5",
            &["x1", "x2", "x3", "x4", "x5"],
            &[
                &["-1/2", "0", "1", "0", "0"],
                &["0", "-1/2", "0", "1", "0"],
                &["-x2/2", "x1/2", "0", "0", "1"],
            ],
        )
        .unwrap()
    }

    fn states(sys: &ControlSystem, ys: &[&str]) -> Vec<Expr> {
        ys.iter().map(|y| parse_expr(y, sys.chart()).unwrap()).collect()
    }

    #[test]
    fn rotor5_table() {
        let sys = rotor5();
        let spec = ParametrizationSpec::parse(
            3,
            2,
            &[
                ("x1", "y3_1/y1_1"),
                ("x2", "-y2_1/y1_1"),
                ("x3", "y2_0 - 2*y3_1/y1_1"),
                ("x4", "y3_0 + 2*y2_1/y1_1"),
                ("x5", "y1_0"),
                ("u3_0", "y1_1"),
                ("u1_0", "y2_1 - 2*(y3_2*y1_1 - y3_1*y1_2)/y1_1^2"),
                ("u2_0", "y3_1 + 2*(y2_2*y1_1 - y2_1*y1_2)/y1_1^2"),
            ],
        )
        .unwrap();
        let traj = TrajectoryConfig::parse(&["sin(t)", "cos(t)", "1 + t^2/4"], vec![0.1, -0.2, 0.3, 0.0, 0.5]).unwrap();
        let r = verify_parametrization(
            &sys,
            &states(&sys, &["x5", "2*x1 + x3", "2*x2 + x4"]),
            &spec,
            Some(&traj),
            &SampleSet::default(),
        )
        .unwrap();
        assert!(r.entries.iter().all(|e| e.status == EntryStatus::Identical), "{r:?}");
        let num = r.numeric.unwrap();
        assert!(num.passed && num.sup_error < 1e-8, "{num:?}");
    }

    #[test]
    fn wrong_entry_is_refuted() {
        let sys = rotor5();
        let spec = ParametrizationSpec::parse(3, 1, &[("x1", "y2_1/y1_1")]).unwrap();
        let traj = TrajectoryConfig::parse(&["sin(t)", "cos(t)", "1 + t^2/4"], vec![0.1, -0.2, 0.3, 0.0, 0.5]).unwrap();
        let r = verify_parametrization(
            &sys,
            &states(&sys, &["x5", "2*x1 + x3", "2*x2 + x4"]),
            &spec,
            Some(&traj),
            &SampleSet::default(),
        )
        .unwrap();
        assert_eq!(r.entries[0].status, EntryStatus::Refuted);
        assert!(!r.numeric.unwrap().passed);
    }

    #[test]
    fn singular_trajectory_is_reported() {
        let sys = rotor5();
        let spec = ParametrizationSpec::parse(3, 1, &[("x1", "y3_1/y1_1")]).unwrap();
        let traj = TrajectoryConfig::parse(&["1", "1", "0"], vec![0.0; 5]).unwrap();
        let r = verify_parametrization(
            &sys,
            &states(&sys, &["x5", "2*x1 + x3", "2*x2 + x4"]),
            &spec,
            Some(&traj),
            &SampleSet::default(),
        )
        .unwrap();
        let num = r.numeric.unwrap();
        assert_eq!(num.singular_at, Some(0.0));
        assert!(!num.passed);
    }
}
