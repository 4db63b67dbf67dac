//! Pure prolongations and the `Delta_k`, `Gamma_k`, `G_k` towers.
//!
//! The prolonged chart has coordinates `x` and `u<i>_<p>` for
//! `p = 0..=j_i`. On it
//!
//! ```text
//! g0 = sum_i u<i>_0 g_i + sum_i sum_{p < j_i} u<i>_<p+1> d/du<i>_<p>
//! Delta_k = { ad_{g0}^{l - j_p} d/du<p>_0 : l = j_p..=k }
//! Gamma_k = { d/du<i>_<j_i - r> : r = 0..=min(k, j_i - 1) }   (empty if j_i = 0)
//! G_k     = Gamma_k + Delta_k
//! ```
//!
//! The order `j` is P²-flat when every `Delta_k` is involutive with constant
//! rank, `[Gamma_k, Delta_k]` stays in `Delta_k`, and `rank Delta_k` reaches
//! `n + m` for some `k <= n + |j|`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr, Symbol, SymbolRole};
use crate::geometry::{
    involutive_closure, lie_bracket, pointwise_rank, Distribution, InvolutivityReport, SampleSet, VectorField,
};
use crate::system::ControlSystem;

/// A prolongation order `(j_1, ..., j_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ProlongationOrder(pub Vec<usize>);

impl ProlongationOrder {
    pub fn zero(m: usize) -> Self {
        ProlongationOrder(vec![0; m])
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Input indices sorted by increasing order (stable), and the sorted
    /// order itself.
    pub fn normalized(&self) -> (Vec<usize>, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.0.len()).collect();
        perm.sort_by_key(|&i| self.0[i]);
        let sorted = perm.iter().map(|&i| self.0[i]).collect();
        (perm, sorted)
    }
}

impl From<Vec<usize>> for ProlongationOrder {
    fn from(v: Vec<usize>) -> Self {
        ProlongationOrder(v)
    }
}

impl std::fmt::Display for ProlongationOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The prolonged system of order `j`.
#[derive(Debug, Clone)]
pub struct ProlongedSystem {
    base: ControlSystem,
    j: ProlongationOrder,
    chart: Arc<Chart>,
    drift: VectorField,
    inputs: Vec<VectorField>,
}

/// Builds the prolonged chart, drift `g0` and input directions
/// `d/du<i>_<j_i>`.
pub fn build_prolonged(sys: &ControlSystem, j: &ProlongationOrder) -> Result<ProlongedSystem> {
    if j.0.len() != sys.m() {
        return Err(Error::Precondition(format!(
            "order {j} has {} entries, system has {} inputs",
            j.0.len(),
            sys.m()
        )));
    }
    let mut extra = Vec::new();
    for (i, &ji) in j.0.iter().enumerate() {
        for p in 0..=ji {
            extra.push((
                Symbol::input_jet(i + 1, p),
                SymbolRole::InputJet { input: i + 1, order: p },
            ));
        }
    }
    let chart = Arc::new(sys.chart().extended(extra)?);
    let mut drift = match sys.drift() {
        Some(d) => d.embed(&chart)?,
        None => VectorField::zero(&chart),
    };
    for (i, g) in sys.fields().iter().enumerate() {
        let u0 = Expr::var(&Symbol::input_jet(i + 1, 0));
        drift = drift.add(&g.embed(&chart)?.scale(&u0))?;
        for p in 0..j.0[i] {
            let idx = chart.index_of(&Symbol::input_jet(i + 1, p)).unwrap();
            let next = Expr::var(&Symbol::input_jet(i + 1, p + 1));
            drift = drift.add(&VectorField::coordinate(&chart, idx).scale(&next))?;
        }
    }
    let inputs = (0..sys.m())
        .map(|i| {
            let idx = chart.index_of(&Symbol::input_jet(i + 1, j.0[i])).unwrap();
            VectorField::coordinate(&chart, idx)
        })
        .collect();
    Ok(ProlongedSystem {
        base: sys.clone(),
        j: j.clone(),
        chart,
        drift,
        inputs,
    })
}

impl ProlongedSystem {
    pub fn base(&self) -> &ControlSystem {
        &self.base
    }

    pub fn order(&self) -> &ProlongationOrder {
        &self.j
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn drift(&self) -> &VectorField {
        &self.drift
    }

    pub fn inputs(&self) -> &[VectorField] {
        &self.inputs
    }

    /// `d/du<input>_<order>` with 0-based input index.
    pub fn jet_direction(&self, input: usize, order: usize) -> VectorField {
        let idx = self
            .chart
            .index_of(&Symbol::input_jet(input + 1, order))
            .expect("jet coordinate in chart");
        VectorField::coordinate(&self.chart, idx)
    }

    /// Base input field `g_i` on the prolonged chart.
    pub fn base_field(&self, i: usize) -> Result<VectorField> {
        self.base.fields()[i].embed(&self.chart)
    }

    /// `Gamma_k` generators and their labels.
    pub fn gamma(&self, k: usize) -> Vec<(VectorField, String)> {
        let mut out = Vec::new();
        for r in 0..=k {
            for (i, &ji) in self.j.0.iter().enumerate() {
                if ji > 0 && r < ji {
                    let q = ji - r;
                    out.push((self.jet_direction(i, q), format!("d/du{}_{}", i + 1, q)));
                }
            }
        }
        out
    }
}

/// One level of the tower.
#[derive(Debug, Clone)]
pub struct TowerLevel {
    pub k: usize,
    pub delta: Distribution,
    pub delta_labels: Vec<String>,
    pub gamma: Vec<VectorField>,
    pub gamma_labels: Vec<String>,
    pub delta_rank: usize,
    pub gamma_rank: usize,
    pub g_rank: usize,
    pub involutivity: InvolutivityReport,
    /// First `(gamma index, delta index)` whose bracket leaves `Delta_k`.
    pub gamma_witness: Option<(usize, usize)>,
}

impl TowerLevel {
    pub fn gamma_invariant(&self) -> bool {
        self.gamma_witness.is_none()
    }

    pub fn summary(&self) -> LevelSummary {
        LevelSummary {
            k: self.k,
            delta_rank: self.delta_rank,
            gamma_rank: self.gamma_rank,
            g_rank: self.g_rank,
            involutive: self.involutivity.involutive,
            gamma_invariant: self.gamma_invariant(),
        }
    }
}

/// Ranks and verdicts of one level, without the generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSummary {
    pub k: usize,
    pub delta_rank: usize,
    pub gamma_rank: usize,
    pub g_rank: usize,
    pub involutive: bool,
    pub gamma_invariant: bool,
}

/// Incremental tower builder. Generator lists grow by appending, so the
/// bracket cache stays valid from one level to the next.
pub struct Tower<'a> {
    ps: &'a ProlongedSystem,
    s: &'a SampleSet,
    /// `ad_{g0}^r d/du<p>_0` for each input `p`, in increasing `r`.
    ad: Vec<Vec<VectorField>>,
    gens: Vec<VectorField>,
    labels: Vec<String>,
    cache: HashMap<(usize, usize), VectorField>,
    gamma_cache: HashMap<(String, usize), VectorField>,
    next_k: usize,
}

impl<'a> Tower<'a> {
    pub fn new(ps: &'a ProlongedSystem, s: &'a SampleSet) -> Self {
        let m = ps.base.m();
        Tower {
            ps,
            s,
            ad: (0..m).map(|p| vec![ps.jet_direction(p, 0)]).collect(),
            gens: Vec::new(),
            labels: Vec::new(),
            cache: HashMap::new(),
            gamma_cache: HashMap::new(),
            next_k: 0,
        }
    }

    fn ad_iterate(&mut self, p: usize, r: usize) -> Result<VectorField> {
        while self.ad[p].len() <= r {
            let last = self.ad[p].last().unwrap().clone();
            let next = lie_bracket(&self.ps.drift, &last)?;
            self.ad[p].push(next);
        }
        Ok(self.ad[p][r].clone())
    }

    fn extend_to(&mut self, k: usize) -> Result<()> {
        while self.next_k <= k {
            let l = self.next_k;
            for (p, &jp) in self.ps.j.0.clone().iter().enumerate() {
                if l >= jp {
                    let r = l - jp;
                    let v = self.ad_iterate(p, r)?;
                    self.gens.push(v);
                    self.labels.push(match r {
                        0 => format!("d/du{}_0", p + 1),
                        1 => format!("[g0, d/du{}_0]", p + 1),
                        _ => format!("ad_g0^{r} d/du{}_0", p + 1),
                    });
                }
            }
            self.next_k += 1;
        }
        Ok(())
    }

    fn bracket(&mut self, a: usize, b: usize) -> Result<VectorField> {
        if let Some(v) = self.cache.get(&(a, b)) {
            return Ok(v.clone());
        }
        let v = lie_bracket(&self.gens[a], &self.gens[b])?;
        self.cache.insert((a, b), v.clone());
        Ok(v)
    }

    fn gamma_bracket(&mut self, label: &str, gamma: &VectorField, b: usize) -> Result<VectorField> {
        let key = (label.to_string(), b);
        if let Some(v) = self.gamma_cache.get(&key) {
            return Ok(v.clone());
        }
        let v = lie_bracket(gamma, &self.gens[b])?;
        self.gamma_cache.insert(key, v.clone());
        Ok(v)
    }

    /// Computes level `k` with all three verdicts.
    pub fn level(&mut self, k: usize) -> Result<TowerLevel> {
        self.extend_to(k)?;
        let count = self.delta_count(k);
        let chart = self.ps.chart.clone();
        let delta = Distribution::new(&chart, self.gens[..count].to_vec())?;
        let gamma_pairs = self.ps.gamma(k);
        let (gamma, gamma_labels): (Vec<_>, Vec<_>) = gamma_pairs.into_iter().unzip();
        let context = format!("Delta_{k} for j = {}", self.ps.j);
        let (basis, basis_ok, delta_rank) = crate::geometry::distribution_basis(&delta, self.s, &context)?;
        let idx: Vec<usize> = if basis_ok { basis } else { (0..count).collect() };
        let mut pairs = Vec::new();
        let mut tests = Vec::new();
        for (a, &i) in idx.iter().enumerate() {
            for &jx in &idx[a + 1..] {
                pairs.push((i, jx));
                tests.push(self.bracket(i, jx)?);
            }
        }
        let n_inv = tests.len();
        let mut gpairs = Vec::new();
        for (gi, (g, gl)) in gamma.iter().zip(&gamma_labels).enumerate() {
            for &b in &idx {
                gpairs.push((gi, b));
                tests.push(self.gamma_bracket(gl, g, b)?);
            }
        }
        let refs: Vec<&VectorField> = tests.iter().collect();
        let res = crate::geometry::distribution_membership(&delta, &refs, self.s, &context)?;
        let inv_fail = res[..n_inv].iter().position(Option::is_some);
        let involutivity = InvolutivityReport {
            involutive: inv_fail.is_none(),
            rank: delta_rank,
            witness_pair: inv_fail.map(|p| pairs[p]),
            witness_sample: inv_fail.and_then(|p| res[p]),
        };
        let gamma_witness = res[n_inv..].iter().position(Option::is_some).map(|p| gpairs[p]);
        let gamma_rank = if gamma.is_empty() {
            0
        } else {
            let gd = Distribution::new(&chart, gamma.clone())?;
            pointwise_rank(&gd, self.s)?.constant_rank(&format!("Gamma_{k}"))?
        };
        let mut all = gamma.clone();
        all.extend(self.gens[..count].iter().cloned());
        let g_rank = pointwise_rank(&Distribution::new(&chart, all)?, self.s)?.constant_rank(&format!("G_{k}"))?;
        Ok(TowerLevel {
            k,
            delta,
            delta_labels: self.labels[..count].to_vec(),
            gamma,
            gamma_labels,
            delta_rank,
            gamma_rank,
            g_rank,
            involutivity,
            gamma_witness,
        })
    }

    fn delta_count(&self, k: usize) -> usize {
        (0..=k).map(|l| self.ps.j.0.iter().filter(|&&jp| l >= jp).count()).sum()
    }
}

/// Level `k` of the tower computed from scratch.
pub fn tower_level(ps: &ProlongedSystem, k: usize, s: &SampleSet) -> Result<TowerLevel> {
    Tower::new(ps, s).level(k)
}

/// Outcome of the P² test for one order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum P2Verdict {
    Pass,
    Fail,
}

/// First violated condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct P2Failure {
    /// 1: involutivity of `Delta_k`; 2: `[Gamma_k, Delta_k]` in `Delta_k`;
    /// 3: `rank Delta_k` never reaches `n + m`.
    pub condition: u8,
    pub k: usize,
    pub reason: String,
}

/// Per-level evidence and verdict of the P² test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct P2Report {
    pub j: ProlongationOrder,
    pub n: usize,
    pub m: usize,
    pub levels: Vec<LevelSummary>,
    pub verdict: P2Verdict,
    pub k_star: Option<usize>,
    pub failure: Option<P2Failure>,
}

impl P2Report {
    pub fn passed(&self) -> bool {
        self.verdict == P2Verdict::Pass
    }

    /// `rank G_k` for `k = 0..=k_star`.
    pub fn g_ranks(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.g_rank).collect()
    }
}

/// Checks the three P² conditions for order `j`, up to `k_max`
/// (default `n + |j|`).
pub fn check_p2_conditions(
    sys: &ControlSystem,
    j: &ProlongationOrder,
    s: &SampleSet,
    k_max: Option<usize>,
) -> Result<P2Report> {
    if !sys.is_driftless() {
        return Err(Error::Precondition(
            "pure prolongation analysis needs a driftless system".into(),
        ));
    }
    let ps = build_prolonged(sys, j)?;
    let (n, m) = (sys.n(), sys.m());
    let target = n + m;
    let k_max = k_max.unwrap_or(n + j.total());
    let mut tower = Tower::new(&ps, s);
    let mut levels = Vec::new();
    let mut prev_rank = None;
    let fail = |levels: Vec<LevelSummary>, condition: u8, k: usize, reason: String| P2Report {
        j: j.clone(),
        n,
        m,
        levels,
        verdict: P2Verdict::Fail,
        k_star: None,
        failure: Some(P2Failure { condition, k, reason }),
    };
    for k in 0..=k_max {
        let level = tower.level(k)?;
        levels.push(level.summary());
        if let Some((a, b)) = level.involutivity.witness_pair {
            let reason = format!(
                "[{}, {}] is not in Delta_{k}",
                level.delta_labels[a], level.delta_labels[b]
            );
            return Ok(fail(levels, 1, k, reason));
        }
        if let Some((g, b)) = level.gamma_witness {
            let reason = format!(
                "[{}, {}] is not in Delta_{k}",
                level.gamma_labels[g], level.delta_labels[b]
            );
            return Ok(fail(levels, 2, k, reason));
        }
        if level.delta_rank == target {
            return Ok(P2Report {
                j: j.clone(),
                n,
                m,
                levels,
                verdict: P2Verdict::Pass,
                k_star: Some(k),
                failure: None,
            });
        }
        if k >= j.max() && prev_rank == Some(level.delta_rank) {
            let reason = format!("rank Delta_k stabilizes at {} < n + m = {target}", level.delta_rank);
            return Ok(fail(levels, 3, k, reason));
        }
        prev_rank = Some(level.delta_rank);
    }
    let reached = levels.last().map_or(0, |l| l.delta_rank);
    Ok(fail(
        levels,
        3,
        k_max,
        format!("rank Delta_k is {reached} < n + m = {target} at k = {k_max}"),
    ))
}

/// Every order of total `total` with at least one zero entry, in decreasing
/// lexicographic order.
pub fn orders_of_total(m: usize, total: usize) -> Vec<ProlongationOrder> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<ProlongationOrder>) {
        if cur.len() == m - 1 {
            cur.push(left);
            if cur.contains(&0) {
                out.push(ProlongationOrder(cur.clone()));
            }
            cur.pop();
            return;
        }
        for v in (0..=left).rev() {
            cur.push(v);
            rec(m, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    rec(m, total, &mut Vec::with_capacity(m), &mut out);
    out
}

/// One candidate visited by the search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchStep {
    pub j: ProlongationOrder,
    pub verdict: P2Verdict,
    pub failure: Option<P2Failure>,
}

/// Result of the minimal-order search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub max_total: usize,
    /// Rank of the involutive closure of the input fields. Below `n` the
    /// system is not strongly accessible and no order is tried.
    pub accessibility_rank: usize,
    /// The minimal passing order and its report, if any.
    pub found: Option<P2Report>,
    pub steps: Vec<SearchStep>,
}

impl SearchOutcome {
    pub fn minimal_order(&self) -> Option<&ProlongationOrder> {
        self.found.as_ref().map(|r| &r.j)
    }
}

/// Rank of the involutive closure of the input fields.
pub fn accessibility_rank(sys: &ControlSystem, s: &SampleSet) -> Result<usize> {
    let d = Distribution::from_fields(sys.fields().to_vec())?;
    let c = involutive_closure(&d, s)?;
    pointwise_rank(&c, s)?.constant_rank("accessibility closure")
}

/// Searches orders by increasing `|j|`. Among passing orders of the minimal
/// total, the lexicographically largest `j` is returned.
pub fn search_minimal_prolongation(
    sys: &ControlSystem,
    s: &SampleSet,
    max_total: Option<usize>,
) -> Result<SearchOutcome> {
    let max_total = max_total.unwrap_or(2 * sys.n());
    let mut steps = Vec::new();
    let accessibility_rank = accessibility_rank(sys, s)?;
    if accessibility_rank < sys.n() {
        return Ok(SearchOutcome {
            max_total,
            accessibility_rank,
            found: None,
            steps,
        });
    }
    for total in 0..=max_total {
        for j in orders_of_total(sys.m(), total) {
            let rep = check_p2_conditions(sys, &j, s, None)?;
            steps.push(SearchStep {
                j: j.clone(),
                verdict: rep.verdict,
                failure: rep.failure.clone(),
            });
            if rep.passed() {
                return Ok(SearchOutcome {
                    max_total,
                    accessibility_rank,
                    found: Some(rep),
                    steps,
                });
            }
        }
    }
    Ok(SearchOutcome {
        max_total,
        accessibility_rank,
        found: None,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car() -> ControlSystem {
        ControlSystem::parse(
            "car",
            &["x1", "x2", "x3"],
            &[&["cos(x3)", "sin(x3)", "0"], &["0", "0", "1"]],
        )
        .unwrap()
    }

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

    #[test]
    fn orders_enumeration() {
        let o = orders_of_total(3, 2);
        let v: Vec<Vec<usize>> = o.iter().map(|x| x.0.clone()).collect();
        assert_eq!(
            v,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(orders_of_total(2, 0), vec![ProlongationOrder(vec![0, 0])]);
    }

    #[test]
    fn prolonged_car_drift() {
        let ps = build_prolonged(&car(), &ProlongationOrder(vec![1, 0])).unwrap();
        assert_eq!(ps.chart().dim(), 3 + 3);
        let d = ps.drift();
        let u11 = ps.chart().position("u1_0").unwrap();
        assert_eq!(d.components()[u11], Expr::sym("u1_1"));
        assert_eq!(ps.inputs()[0], ps.jet_direction(0, 1));
        assert_eq!(ps.inputs()[1], ps.jet_direction(1, 0));
    }

    #[test]
    fn rotor5_tower_and_search() {
        let s = SampleSet::default();
        let sys = rotor5();
        let ps = build_prolonged(&sys, &ProlongationOrder(vec![0, 0, 1])).unwrap();
        let lvl = tower_level(&ps, 2, &s).unwrap();
        assert_eq!(lvl.delta_rank, 8);
        let rep = check_p2_conditions(&sys, &ProlongationOrder(vec![0, 0, 1]), &s, None).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.k_star, Some(2));
        let zero = check_p2_conditions(&sys, &ProlongationOrder(vec![0, 0, 0]), &s, None).unwrap();
        assert_eq!(zero.failure.as_ref().map(|f| (f.condition, f.k)), Some((1, 1)));
        let out = search_minimal_prolongation(&sys, &s, None).unwrap();
        assert_eq!(out.minimal_order().unwrap().0, vec![0, 0, 1]);
    }

    #[test]
    fn car_search_prolongs_first_input() {
        let s = SampleSet::default();
        let out = search_minimal_prolongation(&car(), &s, None).unwrap();
        assert_eq!(out.minimal_order().unwrap().0, vec![1, 0]);
    }
}
