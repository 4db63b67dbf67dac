//! Control systems `x' = f(x) + sum u_i g_i(x)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Chart, Expr, Symbol, SymbolRole};
use crate::geometry::VectorField;

/// An input-affine system on a state chart. Driftless systems have no drift.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSystem {
    pub name: String,
    chart: Arc<Chart>,
    fields: Vec<VectorField>,
    drift: Option<VectorField>,
}

impl ControlSystem {
    pub fn new(name: &str, chart: Arc<Chart>, fields: Vec<VectorField>, drift: Option<VectorField>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidSystem("a system needs at least one input".into()));
        }
        for f in fields.iter().chain(drift.iter()) {
            if !crate::geometry::same_chart(f.chart(), &chart) {
                return Err(Error::ChartMismatch);
            }
        }
        for s in chart.symbols() {
            if s.jet_indices('u').is_some() && chart.role(chart.index_of(s).unwrap()) == SymbolRole::State {
                return Err(Error::InvalidSystem(format!(
                    "state name `{s}` collides with the input-jet naming scheme"
                )));
            }
        }
        Ok(ControlSystem {
            name: name.to_string(),
            chart,
            fields,
            drift: drift.filter(|d| !d.is_zero()),
        })
    }

    /// Builds a driftless system from component strings in the expression
    /// grammar.
    pub fn parse(name: &str, states: &[&str], fields: &[&[&str]]) -> Result<Self> {
        let chart = Arc::new(Chart::states(states)?);
        let fs = fields
            .iter()
            .map(|comps| {
                let exprs = comps
                    .iter()
                    .map(|c| parse_expr(c, &chart).map_err(Error::from))
                    .collect::<Result<Vec<_>>>()?;
                VectorField::new(&chart, exprs)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, chart, fs, None)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.chart.dim()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn drift(&self) -> Option<&VectorField> {
        self.drift.as_ref()
    }

    pub fn is_driftless(&self) -> bool {
        self.drift.is_none()
    }

    /// The same system with inputs reordered: input `a` of the result is
    /// input `perm[a]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.m())?;
        Ok(ControlSystem {
            name: self.name.clone(),
            chart: self.chart.clone(),
            fields: perm.iter().map(|&i| self.fields[i].clone()).collect(),
            drift: self.drift.clone(),
        })
    }

    /// The prolonged system written as an input-affine system: the states are
    /// `x` and `u_i^(p)` for `p < j_i`, the inputs are `u_i^(j_i)`.
    pub fn prolonged_affine(&self, j: &[usize]) -> Result<Self> {
        if j.len() != self.m() {
            return Err(Error::Precondition(format!(
                "order has {} entries, system has {} inputs",
                j.len(),
                self.m()
            )));
        }
        let mut extra = Vec::new();
        for (i, &ji) in j.iter().enumerate() {
            for p in 0..ji {
                extra.push((
                    Symbol::input_jet(i + 1, p),
                    SymbolRole::InputJet { input: i + 1, order: p },
                ));
            }
        }
        let chart = Arc::new(self.chart.extended(extra)?);
        let mut drift = match &self.drift {
            Some(d) => d.embed(&chart)?,
            None => VectorField::zero(&chart),
        };
        let mut inputs = Vec::with_capacity(self.m());
        for (i, &ji) in j.iter().enumerate() {
            let g = self.fields[i].embed(&chart)?;
            if ji == 0 {
                inputs.push(g);
                continue;
            }
            drift = drift.add(&g.scale(&Expr::var(&Symbol::input_jet(i + 1, 0))))?;
            for p in 0..ji - 1 {
                let idx = chart.index_of(&Symbol::input_jet(i + 1, p)).unwrap();
                let shift = VectorField::coordinate(&chart, idx).scale(&Expr::var(&Symbol::input_jet(i + 1, p + 1)));
                drift = drift.add(&shift)?;
            }
            let top = chart.index_of(&Symbol::input_jet(i + 1, ji - 1)).unwrap();
            inputs.push(VectorField::coordinate(&chart, top));
        }
        ControlSystem::new(&self.name, chart, inputs, Some(drift))
    }
}

pub(crate) fn check_permutation(perm: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    if perm.len() != m || perm.iter().any(|&i| i >= m || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Precondition(format!(
            "{perm:?} is not a permutation of {m} inputs"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_permute() {
        let s = ControlSystem::parse(
            "car",
            &["x1", "x2", "x3"],
            &[&["cos(x3)", "sin(x3)", "0"], &["0", "0", "1"]],
        )
        .unwrap();
        assert_eq!((s.n(), s.m()), (3, 2));
        let p = s.permuted(&[1, 0]).unwrap();
        assert_eq!(p.fields()[0], s.fields()[1]);
        assert!(s.permuted(&[0, 0]).is_err());
    }

    #[test]
    fn prolonged_affine_car() {
        let s = ControlSystem::parse(
            "car",
            &["x1", "x2", "x3"],
            &[&["cos(x3)", "sin(x3)", "0"], &["0", "0", "1"]],
        )
        .unwrap();
        let p = s.prolonged_affine(&[1, 0]).unwrap();
        assert_eq!(p.n(), 4);
        let d = p.drift().unwrap();
        assert_eq!(
            d.components()[0],
            Expr::sym("u1_0") * Expr::func(crate::expr::Func::Cos, Expr::sym("x3"))
        );
        assert_eq!(p.fields()[0], VectorField::coordinate(p.chart(), 3));
    }

    #[test]
    fn rejects_jet_like_state_names() {
        assert!(ControlSystem::parse("bad", &["u1_0"], &[&["1"]]).is_err());
    }
}
