//! Brunovský indices, annihilator one-forms and flat-output checks.

mod param;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{differentiate, is_zero_exact, polynomial_terms, together, Chart, Expr, SymbolRole};
use crate::geometry::{pointwise_rank, Distribution, SampleSet, VectorField};
use crate::prolong::{build_prolonged, check_p2_conditions, P2Report, ProlongationOrder, Tower};
use crate::system::ControlSystem;

pub use param::{
    verify_parametrization, EntryCheck, EntryStatus, NumericCheck, ParamEntry, ParametrizationReport,
    ParametrizationSpec, TrajectoryConfig,
};

/// Rank jumps of the `G_k` tower and the chain lengths they induce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrunovskyIndices {
    pub j: ProlongationOrder,
    /// `rho_0 = rank G_0`, `rho_k = rank G_k - rank G_{k-1}`.
    pub rho: Vec<usize>,
    /// `kappa_k = #{l : rho_l >= k}` for `k = 1..=m`.
    pub kappa: Vec<usize>,
    /// `rank G_{k*}`, equal to the sum of `kappa`.
    pub g_rank: usize,
    /// `rank Delta_{k*}`, equal to `n + m`.
    pub delta_rank: usize,
}

impl BrunovskyIndices {
    pub fn from_report(r: &P2Report) -> Result<Self> {
        if !r.passed() {
            return Err(Error::Precondition(format!(
                "order {} does not pass the P2 conditions",
                r.j
            )));
        }
        let g = r.g_ranks();
        let rho: Vec<usize> = g
            .iter()
            .enumerate()
            .map(|(k, &x)| if k == 0 { x } else { x.saturating_sub(g[k - 1]) })
            .collect();
        let kappa = (1..=r.m).map(|k| rho.iter().filter(|&&p| p >= k).count()).collect();
        let last = r.levels.last().expect("a passing report has levels");
        Ok(BrunovskyIndices {
            j: r.j.clone(),
            rho,
            kappa,
            g_rank: last.g_rank,
            delta_rank: last.delta_rank,
        })
    }

    /// The equivalent linear system, one chain per line.
    pub fn linear_system(&self) -> Vec<String> {
        self.kappa
            .iter()
            .enumerate()
            .map(|(i, k)| format!("y{0}^({k}) = v{0}", i + 1))
            .collect()
    }
}

pub fn brunovsky_indices(sys: &ControlSystem, j: &ProlongationOrder, s: &SampleSet) -> Result<BrunovskyIndices> {
    BrunovskyIndices::from_report(&check_p2_conditions(sys, j, s, None)?)
}

/// A differential one-form: one coefficient per chart coordinate.
#[derive(Clone, PartialEq)]
pub struct OneForm {
    chart: Arc<Chart>,
    coeffs: Vec<Expr>,
}

impl fmt::Debug for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OneForm({self})")
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, s) in self.coeffs.iter().zip(self.chart.symbols()) {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "d{s}")?;
            } else if c.as_rational().is_some() || c.as_symbol().is_some() {
                write!(f, "{c}*d{s}")?;
            } else {
                write!(f, "({c})*d{s}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl OneForm {
    pub fn new(chart: &Arc<Chart>, coeffs: Vec<Expr>) -> Result<Self> {
        if coeffs.len() != chart.dim() {
            return Err(Error::InvalidSystem(format!(
                "one-form has {} coefficients, chart has {}",
                coeffs.len(),
                chart.dim()
            )));
        }
        for c in &coeffs {
            c.check_chart(chart)?;
        }
        Ok(OneForm {
            chart: chart.clone(),
            coeffs: coeffs.into_iter().map(|c| c.simplify()).collect(),
        })
    }

    /// `df`.
    pub fn differential(f: &Expr, chart: &Arc<Chart>) -> Result<Self> {
        f.check_chart(chart)?;
        let coeffs = chart.symbols().iter().map(|s| differentiate(f, s)).collect();
        Ok(OneForm {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coeffs
    }

    /// `<w, v>`.
    pub fn pair(&self, v: &VectorField) -> Result<Expr> {
        if !crate::geometry::same_chart(&self.chart, v.chart()) {
            return Err(Error::ChartMismatch);
        }
        Ok(Expr::sum(self.coeffs.iter().zip(v.components()).map(|(a, b)| a * b)))
    }

    /// The coefficient vector as a field, for rank computations.
    fn as_field(&self) -> VectorField {
        VectorField::new(&self.chart, self.coeffs.clone()).expect("same chart")
    }

    /// `dw = 0`, decided exactly. Forms with function coefficients the
    /// rational engine cannot decide count as not closed.
    pub fn is_closed(&self) -> bool {
        let syms = self.chart.symbols();
        for a in 0..syms.len() {
            for b in a + 1..syms.len() {
                let curl = differentiate(&self.coeffs[b], &syms[a]) - differentiate(&self.coeffs[a], &syms[b]);
                if is_zero_exact(&curl) != Some(true) {
                    return false;
                }
            }
        }
        true
    }

    /// A polynomial potential `f` with `df = w`, for closed forms with
    /// polynomial coefficients. Integrates along rays from the origin.
    pub fn potential(&self) -> Option<Expr> {
        if !self.is_closed() {
            return None;
        }
        let mut terms = Vec::new();
        for (c, s) in self.coeffs.iter().zip(self.chart.symbols()) {
            for t in polynomial_terms(c)? {
                let deg = i64::from(t.degree()) + 1;
                let mono = Expr::product(t.powers.iter().map(|(v, e)| Expr::var(v).pow(i64::from(*e))));
                let coef = Expr::rational(t.coef.clone() / BigRational::from_integer(deg.into()));
                terms.push(coef * mono * Expr::var(s));
            }
        }
        Some(Expr::sum(terms))
    }
}

fn normalize(e: Expr) -> Expr {
    let (n, d) = together(&e);
    if d.is_one() {
        n
    } else {
        n / d
    }
}

/// A basis of the one-forms annihilating `d`, by symbolic Gauss-Jordan
/// elimination. Pivots are taken column by column; among candidate rows the
/// smallest entry wins, ties to the lower index.
pub fn annihilator_basis(d: &Distribution, s: &SampleSet) -> Result<Vec<OneForm>> {
    let chart = d.chart().clone();
    let dim = chart.dim();
    let rank = pointwise_rank(d, s)?.constant_rank("annihilator")?;
    let mut rows: Vec<Vec<Expr>> = d.generators().iter().map(|g| g.components().to_vec()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; rows.len()];
    for c in 0..dim {
        if pivots.len() == rank {
            break;
        }
        let mut best: Option<(usize, usize)> = None;
        for (r, row) in rows.iter().enumerate() {
            if used[r] || row[c].is_zero() || s.is_zero(&chart, &row[c])? {
                continue;
            }
            let size = row[c].size();
            if best.is_none_or(|(_, b)| size < b) {
                best = Some((r, size));
            }
        }
        let Some((r, _)) = best else { continue };
        used[r] = true;
        let inv = rows[r][c].recip();
        rows[r] = rows[r].iter().map(|x| normalize(x * &inv)).collect();
        let pivot_row = rows[r].clone();
        for (q, row) in rows.iter_mut().enumerate() {
            if q == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = normalize(&*x - &(&f * p));
            }
        }
        pivots.push((c, r));
    }
    if pivots.len() != rank {
        return Err(Error::SingularityDetected {
            context: "annihilator elimination".into(),
            ranks: vec![pivots.len(), rank],
        });
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|p| p.0).collect();
    let mut forms = Vec::with_capacity(dim - rank);
    for f in (0..dim).filter(|c| !pivot_cols.contains(c)) {
        let mut coeffs = vec![Expr::zero(); dim];
        coeffs[f] = Expr::one();
        for &(c, r) in &pivots {
            coeffs[c] = -rows[r][f].clone();
        }
        forms.push(OneForm::new(&chart, coeffs)?);
    }
    Ok(forms)
}

/// Polynomial first integrals of an involutive `d`, one per annihilator
/// form, when every form is closed with polynomial coefficients.
pub fn first_integrals(d: &Distribution, s: &SampleSet) -> Result<Option<Vec<Expr>>> {
    Ok(annihilator_basis(d, s)?.iter().map(OneForm::potential).collect())
}

/// `L_v y`.
pub fn lie_derivative(y: &Expr, v: &VectorField) -> Expr {
    v.apply(y).simplify()
}

/// A pairing that broke the ladder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairingWitness {
    /// 1-based output index.
    pub output: usize,
    pub k: usize,
    pub generator: String,
    pub pairing: String,
    /// True when the pairing should have vanished, false when every
    /// pairing at level `k` vanished but one should not have.
    pub expected_zero: bool,
    pub sample: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputCheck {
    pub output: String,
    pub kappa: usize,
    /// First level whose pairing with `dy` does not vanish, plus one.
    pub observed_kappa: Option<usize>,
    /// Input-jet coordinates the output depends on.
    pub input_jets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatOutputReport {
    pub j: ProlongationOrder,
    pub kappa: Vec<usize>,
    pub passed: bool,
    pub outputs: Vec<OutputCheck>,
    pub failure: Option<PairingWitness>,
}

/// Checks `<G_k, dy_i> = 0` for `k <= kappa_i - 2` and `<G_{kappa_i - 1}, dy_i> != 0`.
/// Outputs are matched to `kappa` in the given order, so list them by
/// nonincreasing chain length.
pub fn verify_flat_outputs(
    sys: &ControlSystem,
    j: &ProlongationOrder,
    outputs: &[Expr],
    s: &SampleSet,
) -> Result<FlatOutputReport> {
    let report = check_p2_conditions(sys, j, s, None)?;
    let idx = BrunovskyIndices::from_report(&report)?;
    if outputs.len() != sys.m() {
        return Err(Error::Precondition(format!(
            "{} outputs given for {} inputs",
            outputs.len(),
            sys.m()
        )));
    }
    let ps = build_prolonged(sys, j)?;
    let chart = ps.chart().clone();
    let forms = outputs
        .iter()
        .map(|y| OneForm::differential(y, &chart))
        .collect::<Result<Vec<_>>>()?;
    let dy = Distribution::new(&chart, forms.iter().map(OneForm::as_field).collect())?;
    let r = pointwise_rank(&dy, s)?;
    if !r.constant || r.max < sys.m() {
        return Err(Error::Precondition("candidate differentials are dependent".into()));
    }

    let top = idx.kappa.iter().copied().max().unwrap_or(0);
    let mut tower = Tower::new(&ps, s);
    let mut levels = Vec::with_capacity(top);
    for k in 0..top {
        let l = tower.level(k)?;
        let mut gens: Vec<(VectorField, String)> =
            l.gamma.iter().cloned().zip(l.gamma_labels.iter().cloned()).collect();
        gens.extend(l.delta.generators().iter().cloned().zip(l.delta_labels.iter().cloned()));
        levels.push(gens);
    }

    let mut checks = Vec::with_capacity(outputs.len());
    let mut failure = None;
    for (i, (y, w)) in outputs.iter().zip(&forms).enumerate() {
        let kappa = idx.kappa[i];
        let mut observed = None;
        let mut first_nonzero = None;
        'level: for (k, gens) in levels.iter().enumerate() {
            for (g, label) in gens {
                let p = w.pair(g)?.simplify();
                if !s.is_zero(&chart, &p)? {
                    observed = Some(k + 1);
                    first_nonzero = Some((k, label.clone(), p));
                    break 'level;
                }
            }
        }
        if failure.is_none() {
            failure = ladder_failure(i, kappa, &first_nonzero, &levels, w, &chart, s)?;
        }
        let input_jets = y
            .free_symbols()
            .into_iter()
            .filter(|v| {
                matches!(
                    chart.index_of(v).map(|k| chart.role(k)),
                    Some(SymbolRole::InputJet { .. })
                )
            })
            .map(|v| v.to_string())
            .collect();
        checks.push(OutputCheck {
            output: y.to_string(),
            kappa,
            observed_kappa: observed,
            input_jets,
        });
    }
    Ok(FlatOutputReport {
        j: j.clone(),
        kappa: idx.kappa,
        passed: failure.is_none(),
        outputs: checks,
        failure,
    })
}

fn ladder_failure(
    i: usize,
    kappa: usize,
    first_nonzero: &Option<(usize, String, Expr)>,
    levels: &[Vec<(VectorField, String)>],
    w: &OneForm,
    chart: &Arc<Chart>,
    s: &SampleSet,
) -> Result<Option<PairingWitness>> {
    if let Some((k, label, p)) = first_nonzero {
        if *k + 2 <= kappa {
            let sample = first_nonzero_sample(chart, p, s)?;
            return Ok(Some(PairingWitness {
                output: i + 1,
                k: *k,
                generator: label.clone(),
                pairing: p.to_string(),
                expected_zero: true,
                sample,
            }));
        }
    }
    // Nondegeneracy: at every sample some generator of G_{kappa-1} pairs nonzero.
    let k = kappa - 1;
    let pairs = levels[k]
        .iter()
        .map(|(g, _)| w.pair(g).map(|p| p.simplify()))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Expr> = pairs.iter().collect();
    for idx in 0..s.count {
        let vals = s.evaluate_at(chart, &refs, idx)?;
        let mag = vals.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max);
        if vals.iter().all(|v| s.scalar_is_zero(v, mag)) {
            return Ok(Some(PairingWitness {
                output: i + 1,
                k,
                generator: "G_k".to_string(),
                pairing: "0".to_string(),
                expected_zero: false,
                sample: Some(idx),
            }));
        }
    }
    Ok(None)
}

fn first_nonzero_sample(chart: &Chart, e: &Expr, s: &SampleSet) -> Result<Option<usize>> {
    for i in 0..s.count {
        let v = s.evaluate_at(chart, &[e], i)?;
        if !s.scalar_is_zero(&v[0], 1.0) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

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

    fn car() -> ControlSystem {
        ControlSystem::parse(
            "car",
            &["x1", "x2", "x3"],
            &[&["cos(x3)", "sin(x3)", "0"], &["0", "0", "1"]],
        )
        .unwrap()
    }

    fn exprs(sys: &ControlSystem, j: &ProlongationOrder, ys: &[&str]) -> Vec<Expr> {
        let ps = build_prolonged(sys, j).unwrap();
        ys.iter().map(|y| parse_expr(y, ps.chart()).unwrap()).collect()
    }

    #[test]
    fn annihilator_of_coordinate_plane() {
        let chart = Arc::new(Chart::states(&["x1", "x2", "x3"]).unwrap());
        let d = Distribution::from_fields(vec![
            VectorField::coordinate(&chart, 0),
            VectorField::coordinate(&chart, 1),
        ])
        .unwrap();
        let forms = annihilator_basis(&d, &SampleSet::default()).unwrap();
        assert_eq!(forms.len(), 1);
        assert_eq!(forms[0].to_string(), "dx3");
    }

    #[test]
    fn rotor5_annihilator_and_integrals() {
        let sys = rotor5();
        let s = SampleSet::default();
        let d = Distribution::from_fields(sys.fields()[..2].to_vec()).unwrap();
        let forms = annihilator_basis(&d, &s).unwrap();
        let shown: Vec<String> = forms.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["2*dx1 + dx3", "2*dx2 + dx4", "dx5"]);
        for w in &forms {
            for g in d.generators() {
                assert_eq!(is_zero_exact(&w.pair(g).unwrap()), Some(true));
            }
        }
        let ints = first_integrals(&d, &s).unwrap().unwrap();
        let shown: Vec<String> = ints.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["2*x1 + x3", "2*x2 + x4", "x5"]);
    }

    #[test]
    fn car_annihilator() {
        let sys = car();
        let d = Distribution::from_fields(vec![sys.fields()[1].clone()]).unwrap();
        let forms = annihilator_basis(&d, &SampleSet::default()).unwrap();
        let shown: Vec<String> = forms.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["dx1", "dx2"]);
    }

    #[test]
    fn potential_of_nonconstant_form() {
        let chart = Arc::new(Chart::states(&["x1", "x2"]).unwrap());
        let f = parse_expr("x1^2*x2 + 3*x2", &chart).unwrap();
        let w = OneForm::differential(&f, &chart).unwrap();
        assert_eq!(w.potential().unwrap(), f.simplify());
        let curl = OneForm::new(&chart, vec![Expr::sym("x2"), Expr::int(0)]).unwrap();
        assert!(!curl.is_closed());
        assert_eq!(curl.potential(), None);
    }

    #[test]
    fn indices() {
        let s = SampleSet::default();
        let b = brunovsky_indices(&rotor5(), &ProlongationOrder(vec![0, 0, 1]), &s).unwrap();
        assert_eq!(b.kappa, vec![3, 3, 3]);
        assert_eq!(b.rho[0], 3);
        assert_eq!(b.g_rank, b.kappa.iter().sum::<usize>());
        assert_eq!(b.delta_rank, 8);
        let chart = ControlSystem::parse(
            "id",
            &["x1", "x2", "x3"],
            &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]],
        )
        .unwrap();
        let b = brunovsky_indices(&chart, &ProlongationOrder(vec![0, 0, 0]), &s).unwrap();
        assert_eq!(b.kappa, vec![2, 2, 2]);
        assert!(brunovsky_indices(&rotor5(), &ProlongationOrder(vec![0, 0, 0]), &s).is_err());
    }

    #[test]
    fn lie_derivatives_along_prolonged_drift() {
        let ps = build_prolonged(&rotor5(), &ProlongationOrder(vec![0, 0, 1])).unwrap();
        let y = parse_expr("x5", ps.chart()).unwrap();
        assert_eq!(lie_derivative(&y, ps.drift()), Expr::sym("u3_0"));
        let y = parse_expr("2*x2 + x4", ps.chart()).unwrap();
        assert_eq!(lie_derivative(&y, ps.drift()), Expr::sym("u3_0") * Expr::sym("x1"));
        assert!(lie_derivative(&Expr::int(7), ps.drift()).is_zero());
    }

    #[test]
    fn rotor5_outputs() {
        let sys = rotor5();
        let s = SampleSet::default();
        let j = ProlongationOrder(vec![0, 0, 1]);
        let good = verify_flat_outputs(&sys, &j, &exprs(&sys, &j, &["x5", "2*x1 + x3", "2*x2 + x4"]), &s).unwrap();
        assert!(good.passed, "{good:?}");
        assert!(good.outputs.iter().all(|o| o.observed_kappa == Some(3)));
        let bad = verify_flat_outputs(&sys, &j, &exprs(&sys, &j, &["x1", "x2", "x3"]), &s).unwrap();
        assert!(!bad.passed);
        let w = bad.failure.unwrap();
        // The level-1 generator is [g0, d/du1_0] = -g1, so the pairing is -<dx1, g1> = 1/2.
        assert_eq!(
            (w.output, w.k, w.generator.as_str(), w.pairing.as_str()),
            (1, 1, "[g0, d/du1_0]", "1/2")
        );
        assert!(verify_flat_outputs(&sys, &j, &exprs(&sys, &j, &["x1", "x1", "x3"]), &s).is_err());
    }

    #[test]
    fn car_outputs() {
        let sys = car();
        let s = SampleSet::default();
        let j = ProlongationOrder(vec![1, 0]);
        let r = verify_flat_outputs(&sys, &j, &exprs(&sys, &j, &["x1", "x2"]), &s).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.kappa, vec![3, 3]);
    }
}
