//! Rank, membership and involutivity of distributions over a sample set.
//!
//! All verdicts are generic: they hold on the open dense set where the
//! sampled ranks are attained. A rank that differs between samples is
//! reported as [`Error::SingularityDetected`] instead of being averaged.

use serde::Serialize;

use crate::error::{Error, Result};

use super::{lie_bracket, rank::rows_rank, same_chart, Distribution, Echelon, SampleSet, VectorField};

/// Rank of a distribution at every sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub ranks: Vec<usize>,
    pub max: usize,
    pub constant: bool,
}

impl RankReport {
    fn from_ranks(ranks: Vec<usize>) -> Self {
        let max = ranks.iter().copied().max().unwrap_or(0);
        let constant = ranks.windows(2).all(|w| w[0] == w[1]);
        RankReport { ranks, max, constant }
    }

    /// The common rank, or a singularity error naming `context`.
    pub fn constant_rank(&self, context: &str) -> Result<usize> {
        if self.constant {
            Ok(self.max)
        } else {
            let mut distinct = self.ranks.clone();
            distinct.sort_unstable();
            distinct.dedup();
            Err(Error::SingularityDetected {
                context: context.to_string(),
                ranks: distinct,
            })
        }
    }
}

/// Outcome of an involutivity test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvolutivityReport {
    pub involutive: bool,
    pub rank: usize,
    /// Generator indices (0-based) whose bracket leaves the span.
    pub witness_pair: Option<(usize, usize)>,
    /// Sample index at which the bracket was seen outside the span.
    pub witness_sample: Option<usize>,
}

fn check_nonempty(s: &SampleSet) -> Result<()> {
    if s.count == 0 {
        return Err(Error::Precondition("sample set is empty".into()));
    }
    Ok(())
}

fn rank_of(fields: &[&VectorField], d: &Distribution, s: &SampleSet) -> Result<RankReport> {
    check_nonempty(s)?;
    let mut ranks = Vec::with_capacity(s.count);
    for i in 0..s.count {
        if fields.is_empty() {
            ranks.push(0);
            continue;
        }
        let rows = s.rows(d.chart(), fields, i)?;
        ranks.push(rows_rank(&rows, s.tol));
    }
    Ok(RankReport::from_ranks(ranks))
}

/// Rank of the generator matrix at each sample.
pub fn pointwise_rank(d: &Distribution, s: &SampleSet) -> Result<RankReport> {
    let gens: Vec<&VectorField> = d.generators().iter().collect();
    rank_of(&gens, d, s)
}

/// Indices of a greedy basis at sample 0 and whether that subset is a basis
/// at every sample. Also returns the (checked constant) rank.
pub(crate) fn basis_subset(d: &Distribution, s: &SampleSet, context: &str) -> Result<(Vec<usize>, bool, usize)> {
    check_nonempty(s)?;
    let gens: Vec<&VectorField> = d.generators().iter().collect();
    if gens.is_empty() {
        return Ok((Vec::new(), true, 0));
    }
    let mut basis = Vec::new();
    let mut ranks = Vec::with_capacity(s.count);
    let mut basis_ok = true;
    for i in 0..s.count {
        let rows = s.rows(d.chart(), &gens, i)?;
        let mut e = Echelon::for_rows(&rows, s.tol);
        if i == 0 {
            for k in 0..rows.len() {
                if e.insert_row(&rows, k) {
                    basis.push(k);
                }
            }
            ranks.push(e.rank());
        } else {
            for &k in &basis {
                e.insert_row(&rows, k);
            }
            let sub = e.rank();
            for k in 0..rows.len() {
                e.insert_row(&rows, k);
            }
            if sub != e.rank() {
                basis_ok = false;
            }
            ranks.push(e.rank());
        }
    }
    let r = RankReport::from_ranks(ranks).constant_rank(context)?;
    Ok((basis, basis_ok, r))
}

/// For each test field, the first sample at which it is outside span `d`.
/// Requires constant rank of `d`.
pub(crate) fn membership(
    d: &Distribution,
    tests: &[&VectorField],
    s: &SampleSet,
    context: &str,
) -> Result<Vec<Option<usize>>> {
    check_nonempty(s)?;
    let gens: Vec<&VectorField> = d.generators().iter().collect();
    let n = gens.len();
    let mut all = gens.clone();
    all.extend_from_slice(tests);
    let mut ranks = Vec::with_capacity(s.count);
    let mut out = vec![None; tests.len()];
    for i in 0..s.count {
        let rows = s.rows(d.chart(), &all, i)?;
        let mut e = Echelon::for_rows(&rows, s.tol);
        for k in 0..n {
            e.insert_row(&rows, k);
        }
        ranks.push(e.rank());
        for (t, slot) in out.iter_mut().enumerate() {
            if slot.is_none() && !e.contains_row(&rows, n + t) {
                *slot = Some(i);
            }
        }
    }
    RankReport::from_ranks(ranks).constant_rank(context)?;
    Ok(out)
}

/// True iff `v` lies in the span of `d` at every sample.
pub fn spans_member(v: &VectorField, d: &Distribution, s: &SampleSet) -> Result<bool> {
    if !same_chart(v.chart(), d.chart()) {
        return Err(Error::ChartMismatch);
    }
    Ok(membership(d, &[v], s, "membership test")?[0].is_none())
}

/// True iff every field of `vs` lies in the span of `d`.
pub fn spans_all(vs: &[VectorField], d: &Distribution, s: &SampleSet) -> Result<bool> {
    if vs.iter().any(|v| !same_chart(v.chart(), d.chart())) {
        return Err(Error::ChartMismatch);
    }
    let refs: Vec<&VectorField> = vs.iter().collect();
    Ok(membership(d, &refs, s, "membership test")?.iter().all(Option::is_none))
}

/// True iff `a` and `b` have the same span at every sample.
pub fn same_span(a: &Distribution, b: &Distribution, s: &SampleSet) -> Result<bool> {
    Ok(spans_all(b.generators(), a, s)? && spans_all(a.generators(), b, s)?)
}

/// Pairs whose brackets must be tested: a basis subset when it is a basis at
/// every sample, all generators otherwise.
fn bracket_pairs(basis: &[usize], basis_ok: bool, len: usize) -> Vec<(usize, usize)> {
    let idx: Vec<usize> = if basis_ok { basis.to_vec() } else { (0..len).collect() };
    let mut pairs = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Involutivity of `d`: every bracket of generators stays in the span.
pub fn is_involutive(d: &Distribution, s: &SampleSet) -> Result<InvolutivityReport> {
    let (basis, ok, rank) = basis_subset(d, s, "involutivity test")?;
    let pairs = bracket_pairs(&basis, ok, d.len());
    let gens = d.generators();
    let brackets = pairs
        .iter()
        .map(|&(i, j)| lie_bracket(&gens[i], &gens[j]))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&VectorField> = brackets.iter().collect();
    let res = membership(d, &refs, s, "involutivity test")?;
    for (k, r) in res.iter().enumerate() {
        if let Some(sample) = r {
            return Ok(InvolutivityReport {
                involutive: false,
                rank,
                witness_pair: Some(pairs[k]),
                witness_sample: Some(*sample),
            });
        }
    }
    Ok(InvolutivityReport {
        involutive: true,
        rank,
        witness_pair: None,
        witness_sample: None,
    })
}

/// Smallest involutive distribution containing `d`, built by appending
/// brackets that raise the rank.
pub fn involutive_closure(d: &Distribution, s: &SampleSet) -> Result<Distribution> {
    let mut cur = d.clone();
    let dim = d.chart().dim();
    for _ in 0..=dim {
        let (basis, ok, rank) = basis_subset(&cur, s, "involutive closure")?;
        if rank == dim {
            return Ok(cur);
        }
        let pairs = bracket_pairs(&basis, ok, cur.len());
        let gens = cur.generators().to_vec();
        let brackets = pairs
            .iter()
            .map(|&(i, j)| lie_bracket(&gens[i], &gens[j]))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&VectorField> = brackets.iter().collect();
        let res = membership(&cur, &refs, s, "involutive closure")?;
        let mut grew = false;
        for (b, r) in brackets.into_iter().zip(res) {
            if r.is_some() {
                cur.push(b)?;
                grew = true;
            }
        }
        if !grew {
            return Ok(cur);
        }
    }
    Ok(cur)
}

/// Which inputs span the largest involutive subdistribution of the input span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseTag {
    /// The pair `perm[0], perm[1]` is involutive; `perm[2]` is the remaining input.
    Pair { perm: [usize; 3] },
    /// No pair is involutive.
    Single { perm: [usize; 3] },
    /// The whole input span is involutive.
    FullInvolutive,
}

/// Case split for three inputs, searching input permutations only.
pub fn largest_involutive_input_sub(g: &[VectorField], s: &SampleSet) -> Result<CaseTag> {
    if g.len() != 3 {
        return Err(Error::Precondition(format!("expected 3 input fields, got {}", g.len())));
    }
    let full = Distribution::from_fields(g.to_vec())?;
    if is_involutive(&full, s)?.involutive {
        return Ok(CaseTag::FullInvolutive);
    }
    let mut found = Vec::new();
    for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let pair = Distribution::from_fields(vec![g[a].clone(), g[b].clone()])?;
        if is_involutive(&pair, s)?.involutive {
            found.push([a, b, c]);
        }
    }
    match found.len() {
        0 => Ok(CaseTag::Single { perm: [0, 1, 2] }),
        1 => Ok(CaseTag::Pair { perm: found[0] }),
        _ => Err(Error::Ambiguous(format!(
            "several input pairs are involutive: {:?}",
            found.iter().map(|p| (p[0] + 1, p[1] + 1)).collect::<Vec<_>>()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::expr::{parse_expr, Chart};

    fn fields(chart: &Arc<Chart>, rows: &[&[&str]]) -> Vec<VectorField> {
        rows.iter()
            .map(|r| VectorField::new(chart, r.iter().map(|c| parse_expr(c, chart).unwrap()).collect()).unwrap())
            .collect()
    }

    fn car() -> Vec<VectorField> {
        let chart = Arc::new(Chart::states(&["x1", "x2", "x3"]).unwrap());
        fields(&chart, &[&["cos(x3)", "sin(x3)", "0"], &["0", "0", "1"]])
    }

    fn rotor5() -> Vec<VectorField> {
        let chart = Arc::new(Chart::states(&["x1", "x2", "x3", "x4", "x5"]).unwrap());
        fields(
            &chart,
            &[
                &["-1/2", "0", "1", "0", "0"],
                &["0", "-1/2", "0", "1", "0"],
                &["-x2/2", "x1/2", "0", "0", "1"],
            ],
        )
    }

    #[test]
    fn car_ranks_and_involutivity() {
        let s = SampleSet::default();
        let g = car();
        let d = Distribution::from_fields(g.clone()).unwrap();
        assert_eq!(pointwise_rank(&d, &s).unwrap().max, 2);
        let b = lie_bracket(&g[0], &g[1]).unwrap();
        assert!(!spans_member(&b, &d, &s).unwrap());
        let d1 = d.extended(&[b]).unwrap();
        let r = pointwise_rank(&d1, &s).unwrap();
        assert_eq!((r.max, r.constant), (3, true));
        let inv = is_involutive(&d, &s).unwrap();
        assert!(!inv.involutive);
        assert_eq!(inv.witness_pair, Some((0, 1)));
        assert_eq!(pointwise_rank(&involutive_closure(&d, &s).unwrap(), &s).unwrap().max, 3);
    }

    #[test]
    fn scaling_does_not_change_rank() {
        let s = SampleSet::default();
        let g = car();
        let d = Distribution::from_fields(vec![g[0].clone(), g[0].scale(&crate::expr::Expr::int(2))]).unwrap();
        assert_eq!(pointwise_rank(&d, &s).unwrap().max, 1);
        assert!(
            is_involutive(&Distribution::from_fields(vec![g[0].clone()]).unwrap(), &s)
                .unwrap()
                .involutive
        );
    }

    #[test]
    fn rotor5_distributions() {
        let s = SampleSet::default();
        let g = rotor5();
        let h02 = Distribution::from_fields(g[..2].to_vec()).unwrap();
        assert!(is_involutive(&h02, &s).unwrap().involutive);
        let b31 = lie_bracket(&g[2], &g[0]).unwrap();
        let b32 = lie_bracket(&g[2], &g[1]).unwrap();
        assert!(!spans_member(&b31, &h02, &s).unwrap());
        assert!(spans_member(&lie_bracket(&g[0], &g[1]).unwrap(), &h02, &s).unwrap());
        let h13 = Distribution::from_fields(vec![g[0].clone(), g[1].clone(), g[2].clone(), b31, b32]).unwrap();
        let r = pointwise_rank(&h13, &s).unwrap();
        assert_eq!((r.max, r.constant), (5, true));
        let all = Distribution::from_fields(g.clone()).unwrap();
        assert_eq!(
            pointwise_rank(&involutive_closure(&all, &s).unwrap(), &s).unwrap().max,
            5
        );
        assert_eq!(
            largest_involutive_input_sub(&g, &s).unwrap(),
            CaseTag::Pair { perm: [0, 1, 2] }
        );
    }

    #[test]
    fn case_split_examples() {
        let s = SampleSet::default();
        let c3 = Arc::new(Chart::states(&["x1", "x2", "x3"]).unwrap());
        let constant = fields(&c3, &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]);
        assert_eq!(
            largest_involutive_input_sub(&constant, &s).unwrap(),
            CaseTag::FullInvolutive
        );
        let c6 = Arc::new(Chart::states(&["x1", "x2", "x3", "x4", "x5", "x6"]).unwrap());
        // [g2, g3] = 0 here, so the pair {g2, g3} is involutive.
        let commuting = fields(
            &c6,
            &[
                &["1", "0", "0", "0", "0", "0"],
                &["0", "1", "x1", "0", "0", "0"],
                &["0", "0", "0", "1", "x1", "0"],
            ],
        );
        assert_eq!(
            largest_involutive_input_sub(&commuting, &s).unwrap(),
            CaseTag::Pair { perm: [1, 2, 0] }
        );
        let single = fields(
            &c6,
            &[
                &["1", "0", "0", "0", "0", "0"],
                &["0", "1", "x1", "0", "0", "0"],
                &["0", "x1", "0", "1", "x2", "x5"],
            ],
        );
        assert!(matches!(
            largest_involutive_input_sub(&single, &s).unwrap(),
            CaseTag::Single { .. }
        ));
    }

    #[test]
    fn singular_rank_is_reported() {
        let r = RankReport::from_ranks(vec![2, 2, 1]);
        assert!(matches!(r.constant_rank("t"), Err(Error::SingularityDetected { .. })));
    }
}
