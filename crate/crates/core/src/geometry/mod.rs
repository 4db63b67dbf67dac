//! Vector fields, Lie brackets and distributions evaluated over a sample set.

mod distribution;
mod rank;
mod sample;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{differentiate, Chart, Expr};

pub(crate) use distribution::{basis_subset as distribution_basis, membership as distribution_membership};
pub use distribution::{
    involutive_closure, is_involutive, largest_involutive_input_sub, pointwise_rank, same_span, spans_all,
    spans_member, CaseTag, InvolutivityReport, RankReport,
};
pub use rank::Echelon;
pub use sample::{Rows, SampleSet};

/// A vector field: one component per chart coordinate.
#[derive(Clone, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    comps: Vec<Expr>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.comps).finish()
    }
}

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::InvalidSystem(format!(
                "vector field has {} components, chart has {}",
                comps.len(),
                chart.dim()
            )));
        }
        for c in &comps {
            c.check_chart(chart)?;
        }
        Ok(VectorField {
            chart: chart.clone(),
            comps: comps.into_iter().map(|c| c.simplify()).collect(),
        })
    }

    pub fn zero(chart: &Arc<Chart>) -> Self {
        VectorField {
            chart: chart.clone(),
            comps: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate field `d/d(chart[i])`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Self {
        let mut v = Self::zero(chart);
        v.comps[i] = Expr::one();
        v
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// `L_v e`: the derivative of a scalar along this field.
    pub fn apply(&self, e: &Expr) -> Expr {
        let syms = self.chart.symbols();
        Expr::sum(
            self.comps
                .iter()
                .zip(syms)
                .filter(|(c, s)| !c.is_zero() && e.depends_on(s))
                .map(|(c, s)| c * &differentiate(e, s)),
        )
    }

    pub fn scale(&self, a: &Expr) -> Self {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        if !same_chart(&self.chart, &other.chart) {
            return Err(Error::ChartMismatch);
        }
        Ok(VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        self.scale(&Expr::int(-1))
    }

    /// Re-expresses the field on a chart that contains every coordinate of
    /// the current one; new coordinates get zero components.
    pub fn embed(&self, target: &Arc<Chart>) -> Result<Self> {
        let mut comps = vec![Expr::zero(); target.dim()];
        for (s, c) in self.chart.symbols().iter().zip(&self.comps) {
            let i = target.index_of(s).ok_or(Error::ChartMismatch)?;
            comps[i] = c.clone();
        }
        Ok(VectorField {
            chart: target.clone(),
            comps,
        })
    }
}

/// `[f, g]` with components `f(g_i) - g(f_i)`.
pub fn lie_bracket(f: &VectorField, g: &VectorField) -> Result<VectorField> {
    if !same_chart(&f.chart, &g.chart) {
        return Err(Error::ChartMismatch);
    }
    let comps = (0..f.chart.dim())
        .map(|i| f.apply(&g.comps[i]) - g.apply(&f.comps[i]))
        .collect();
    Ok(VectorField {
        chart: f.chart.clone(),
        comps,
    })
}

/// `ad_f^k g`: the k-fold iterated bracket, `ad_f^0 g = g`.
pub fn ad_power(f: &VectorField, g: &VectorField, k: usize) -> Result<VectorField> {
    let mut acc = g.clone();
    if !same_chart(&f.chart, &g.chart) {
        return Err(Error::ChartMismatch);
    }
    for _ in 0..k {
        acc = lie_bracket(f, &acc)?;
    }
    Ok(acc)
}

/// A finite list of generators on a common chart. Redundancy is allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    chart: Arc<Chart>,
    gens: Vec<VectorField>,
}

impl Distribution {
    pub fn new(chart: &Arc<Chart>, gens: Vec<VectorField>) -> Result<Self> {
        if gens.iter().any(|g| !same_chart(&g.chart, chart)) {
            return Err(Error::ChartMismatch);
        }
        Ok(Distribution {
            chart: chart.clone(),
            gens,
        })
    }

    pub fn from_fields(gens: Vec<VectorField>) -> Result<Self> {
        let chart = gens
            .first()
            .map(|g| g.chart.clone())
            .ok_or_else(|| Error::Precondition("distribution needs at least one generator".into()))?;
        Self::new(&chart, gens)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn push(&mut self, v: VectorField) -> Result<()> {
        if !same_chart(&v.chart, &self.chart) {
            return Err(Error::ChartMismatch);
        }
        self.gens.push(v);
        Ok(())
    }

    pub fn extended(&self, more: &[VectorField]) -> Result<Self> {
        let mut d = self.clone();
        for v in more {
            d.push(v.clone())?;
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, Func};

    fn field(chart: &Arc<Chart>, comps: &[&str]) -> VectorField {
        VectorField::new(chart, comps.iter().map(|c| parse_expr(c, chart).unwrap()).collect()).unwrap()
    }

    #[test]
    fn car_bracket() {
        let chart = Arc::new(Chart::states(&["x1", "x2", "x3"]).unwrap());
        let g1 = field(&chart, &["cos(x3)", "sin(x3)", "0"]);
        let g2 = field(&chart, &["0", "0", "1"]);
        let b = lie_bracket(&g1, &g2).unwrap();
        let x3 = Expr::sym("x3");
        assert_eq!(
            b.components(),
            &[
                Expr::func(Func::Sin, x3.clone()),
                -Expr::func(Func::Cos, x3),
                Expr::zero()
            ]
        );
        let a2 = ad_power(&g2, &g1, 2).unwrap();
        assert_eq!(a2, g1.neg());
        assert_eq!(ad_power(&g2, &g1, 0).unwrap(), g1);
    }

    #[test]
    fn rotor5_brackets() {
        let chart = Arc::new(Chart::states(&["x1", "x2", "x3", "x4", "x5"]).unwrap());
        let g1 = field(&chart, &["-1/2", "0", "1", "0", "0"]);
        let g2 = field(&chart, &["0", "-1/2", "0", "1", "0"]);
        let g3 = field(&chart, &["-x2/2", "x1/2", "0", "0", "1"]);
        assert!(lie_bracket(&g1, &g2).unwrap().is_zero());
        let b = lie_bracket(&g3, &g1).unwrap();
        let expected = field(&chart, &["0", "1/4", "0", "0", "0"]);
        assert_eq!(b, expected);
    }

    #[test]
    fn chart_mismatch() {
        let a = Arc::new(Chart::states(&["x1"]).unwrap());
        let b = Arc::new(Chart::states(&["x2"]).unwrap());
        let f = VectorField::coordinate(&a, 0);
        let g = VectorField::coordinate(&b, 0);
        assert_eq!(lie_bracket(&f, &g), Err(Error::ChartMismatch));
        assert!(VectorField::new(&a, vec![]).is_err());
    }

    #[test]
    fn embedding() {
        let a = Arc::new(Chart::states(&["x1", "x2"]).unwrap());
        let b = Arc::new(Chart::states(&["u1_0", "x1", "x2"]).unwrap());
        let f = field(&a, &["x2", "1"]);
        let e = f.embed(&b).unwrap();
        assert_eq!(e.components()[0], Expr::zero());
        assert_eq!(e.components()[1], Expr::sym("x2"));
    }
}
