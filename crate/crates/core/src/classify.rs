//! Closed-form checkers: static feedback linearization, the bracket-rank
//! flatness test for driftless systems, and the P² criteria for two inputs,
//! three inputs on five or six states, and m inputs on 2m-1 or 2m states.
//!
//! The three-input checkers evaluate the stated conditions and report what
//! they imply. When they claim P²-flatness, the stated order is re-checked on
//! the tower and the outcome is recorded in `confirmed`; the verdict itself is
//! left as the criterion gives it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flatout::{annihilator_basis, BrunovskyIndices};
use crate::geometry::{
    distribution_basis, distribution_membership, is_involutive, largest_involutive_input_sub, lie_bracket,
    pointwise_rank, CaseTag, Distribution, SampleSet, VectorField,
};
use crate::prolong::{
    accessibility_rank, check_p2_conditions, search_minimal_prolongation, P2Report, ProlongationOrder, SearchOutcome,
};
use crate::system::{check_permutation, ControlSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    P2Flat,
    NotP2Flat,
    /// Flat by a sufficient criterion.
    FlatSufficient,
    /// Flat by a necessary and sufficient criterion.
    Flat,
    NotFlat,
    StaticLinearizable,
    NotStaticLinearizable,
    Inconclusive,
}

impl Verdict {
    /// Positive verdicts.
    pub fn is_positive(self) -> bool {
        matches!(
            self,
            Verdict::P2Flat | Verdict::FlatSufficient | Verdict::Flat | Verdict::StaticLinearizable
        )
    }

    pub fn is_negative(self) -> bool {
        matches!(
            self,
            Verdict::NotP2Flat | Verdict::NotFlat | Verdict::NotStaticLinearizable
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    StaticFeedback,
    BracketRanks,
    TwoInputs,
    #[serde(rename = "3-inputs-6-states")]
    ThreeInputsSixStates,
    #[serde(rename = "3-inputs-5-states")]
    ThreeInputsFiveStates,
    MInputs,
    Search,
}

/// One distribution consulted by a checker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub name: String,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub involutive: Option<bool>,
}

/// Annihilator one-forms of the distribution the flat outputs must annihilate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatOutputPde {
    pub distribution: String,
    pub forms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub criterion: Criterion,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    /// Minimal order, in the system's own input labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<ProlongationOrder>,
    /// `permutation[a]` is the original input playing role `a + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<usize>>,
    /// Whether the tower passes at `order`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirmed: Option<bool>,
    pub evidence: Vec<Evidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pde: Option<FlatOutputPde>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<P2Report>,
}

impl ClassificationResult {
    /// Criterion name with the case, e.g. `3-inputs-5-states case 1`.
    pub fn label(&self) -> String {
        let name = serde_json::to_value(self.criterion)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        match self.case {
            Some(c) => format!("{name} case {c}"),
            None => name,
        }
    }

    fn new(verdict: Verdict, criterion: Criterion, s: &SampleSet) -> Self {
        ClassificationResult {
            verdict,
            criterion,
            case: None,
            order: None,
            permutation: None,
            kappa: None,
            confirmed: None,
            evidence: Vec::new(),
            pde: None,
            reason: None,
            seed: s.seed,
            report: None,
        }
    }

    fn because(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }
}

fn rank_of(gens: &[VectorField], s: &SampleSet, name: &str) -> Result<usize> {
    let d = Distribution::from_fields(gens.to_vec())?;
    pointwise_rank(&d, s)?.constant_rank(name)
}

fn evidence_rank(ev: &mut Vec<Evidence>, name: &str, gens: &[VectorField], s: &SampleSet) -> Result<usize> {
    let rank = rank_of(gens, s, name)?;
    ev.push(Evidence {
        name: name.to_string(),
        rank,
        involutive: None,
    });
    Ok(rank)
}

fn evidence_involutive(
    ev: &mut Vec<Evidence>,
    name: &str,
    gens: &[VectorField],
    s: &SampleSet,
) -> Result<(usize, bool)> {
    let d = Distribution::from_fields(gens.to_vec())?;
    let r = is_involutive(&d, s)?;
    ev.push(Evidence {
        name: name.to_string(),
        rank: r.rank,
        involutive: Some(r.involutive),
    });
    Ok((r.rank, r.involutive))
}

fn br(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    lie_bracket(a, b)
}

/// Maps an order on permuted inputs back to the original labels.
fn unpermute(perm: &[usize], j: &[usize]) -> ProlongationOrder {
    let mut out = vec![0; j.len()];
    for (a, &p) in perm.iter().enumerate() {
        out[p] = j[a];
    }
    ProlongationOrder(out)
}

/// Rechecks the tower at `j` and records `kappa` when it passes.
fn confirm(res: &mut ClassificationResult, sys: &ControlSystem, j: &ProlongationOrder, s: &SampleSet) -> Result<()> {
    let rep = check_p2_conditions(sys, j, s, None)?;
    res.confirmed = Some(rep.passed());
    if rep.passed() {
        res.kappa = Some(BrunovskyIndices::from_report(&rep)?.kappa);
    }
    res.report = Some(rep);
    Ok(())
}

fn pde(name: &str, gens: &[VectorField], s: &SampleSet) -> Option<FlatOutputPde> {
    let d = Distribution::from_fields(gens.to_vec()).ok()?;
    let forms = annihilator_basis(&d, s).ok()?;
    Some(FlatOutputPde {
        distribution: name.to_string(),
        forms: forms.iter().map(|f| f.to_string()).collect(),
    })
}

/// The distributions `D_i = span{ad_f^k g_j : k <= i}` must have constant
/// rank, be involutive, and reach rank `n`.
pub fn check_static_feedback_linearizable(sys: &ControlSystem, s: &SampleSet) -> Result<ClassificationResult> {
    let n = sys.n();
    let f = sys.drift().cloned().unwrap_or_else(|| VectorField::zero(sys.chart()));
    let mut res = ClassificationResult::new(Verdict::NotStaticLinearizable, Criterion::StaticFeedback, s);
    let mut layer: Vec<VectorField> = sys.fields().to_vec();
    let mut gens = layer.clone();
    for i in 0..n {
        let (rank, involutive) = evidence_involutive(&mut res.evidence, &format!("D{i}"), &gens, s)?;
        if rank == n {
            res.verdict = Verdict::StaticLinearizable;
            return Ok(res);
        }
        if !involutive {
            return Ok(res.because(format!("D{i} is not involutive")));
        }
        layer = layer.iter().map(|g| br(&f, g)).collect::<Result<_>>()?;
        gens.extend(layer.iter().cloned());
    }
    Ok(res.because(format!("D{} has rank below {n}", n - 1)))
}

/// One derived step `D + [D, D]`, keeping only brackets that add rank.
fn derived(d: &Distribution, s: &SampleSet) -> Result<Distribution> {
    let (basis, _, _) = distribution_basis(d, s, "derived distribution")?;
    let gens = d.generators();
    let mut brackets = Vec::new();
    for (a, &i) in basis.iter().enumerate() {
        for &j in &basis[a + 1..] {
            brackets.push(br(&gens[i], &gens[j])?);
        }
    }
    let refs: Vec<&VectorField> = brackets.iter().collect();
    let outside = distribution_membership(d, &refs, s, "derived distribution")?;
    let mut out = d.clone();
    for (b, o) in brackets.into_iter().zip(outside) {
        if o.is_some() {
            out.push(b)?;
        }
    }
    Ok(out)
}

/// Ranks `d_i` of `D_0 = span{g}`, `D_{i+1} = D_i + [D_i, D_i]` must be
/// `m + i` until they reach `n`. Necessary and sufficient for two inputs,
/// sufficient beyond.
pub fn check_mr_flatness(sys: &ControlSystem, s: &SampleSet) -> Result<ClassificationResult> {
    if !sys.is_driftless() {
        return Err(Error::Precondition(
            "the bracket-rank test needs a driftless system".into(),
        ));
    }
    let (n, m) = (sys.n(), sys.m());
    if m >= n {
        return Err(Error::Precondition(format!(
            "the bracket-rank test needs m < n, got m = {m}, n = {n}"
        )));
    }
    let (yes, no) = if m == 2 {
        (Verdict::Flat, Verdict::NotFlat)
    } else {
        (Verdict::FlatSufficient, Verdict::Inconclusive)
    };
    let mut res = ClassificationResult::new(no, Criterion::BracketRanks, s);
    let mut d = Distribution::from_fields(sys.fields().to_vec())?;
    for i in 0..=n - m {
        let rank = pointwise_rank(&d, s)?.constant_rank(&format!("D{i}"))?;
        res.evidence.push(Evidence {
            name: format!("D{i}"),
            rank,
            involutive: None,
        });
        if rank != m + i {
            return Ok(res.because(format!("d{i} = {rank}, expected {}", m + i)));
        }
        if rank == n {
            res.verdict = yes;
            return Ok(res);
        }
        d = derived(&d, s)?;
    }
    unreachable!("the rank reaches n within n - m steps or a check fails first")
}

/// `ad_{a}^k b` for `k = 0..=top`.
fn ad_chain(a: &VectorField, b: &VectorField, top: usize) -> Result<Vec<VectorField>> {
    let mut out = vec![b.clone()];
    for _ in 0..top {
        let next = br(a, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// The two-input criterion, tried in both input orderings.
pub fn classify_two_input(sys: &ControlSystem, s: &SampleSet) -> Result<ClassificationResult> {
    let (n, m) = (sys.n(), sys.m());
    if m != 2 || n < 3 || !sys.is_driftless() {
        return Err(Error::Precondition(format!(
            "the two-input criterion needs a driftless system with m = 2 and n >= 3, got m = {m}, n = {n}"
        )));
    }
    let mut res = ClassificationResult::new(Verdict::NotP2Flat, Criterion::TwoInputs, s);
    let mut reasons = Vec::new();
    for perm in [[0usize, 1], [1, 0]] {
        let g1 = &sys.fields()[perm[0]];
        let g2 = &sys.fields()[perm[1]];
        let tag = format!("g{}/g{}", perm[0] + 1, perm[1] + 1);
        let chain = ad_chain(g2, g1, n - 2)?;
        let mut ok = true;
        for k in 1..=n.saturating_sub(3) {
            let x = &chain[k];
            let v = br(x, &br(x, g2)?)?;
            let d = Distribution::from_fields(chain[..=k].to_vec())?;
            let inside = distribution_membership(&d, &[&v], s, "two-input condition i")?[0].is_none();
            res.evidence.push(Evidence {
                name: format!("{tag}: ad^2 of ad^{k} in span"),
                rank: pointwise_rank(&d, s)?.max,
                involutive: Some(inside),
            });
            if !inside {
                ok = false;
                reasons.push(format!("{tag}: condition i fails at k = {k}"));
                break;
            }
        }
        let mut gens = chain.clone();
        gens.push(g2.clone());
        let rank = evidence_rank(&mut res.evidence, &format!("{tag}: ad chain + g2"), &gens, s)?;
        if rank != n {
            ok = false;
            reasons.push(format!("{tag}: condition ii rank {rank} < {n}"));
        }
        if ok {
            res.verdict = Verdict::P2Flat;
            res.permutation = Some(perm.to_vec());
            return Ok(res);
        }
    }
    Ok(res.because(reasons.join("; ")))
}

/// Shared precondition checks; `Some` ends classification.
fn three_input_gate(
    sys: &ControlSystem,
    n: usize,
    criterion: Criterion,
    s: &SampleSet,
) -> Result<Option<ClassificationResult>> {
    if sys.m() != 3 || sys.n() != n || !sys.is_driftless() {
        return Err(Error::Precondition(format!(
            "this criterion needs a driftless system with m = 3, n = {n}, got m = {}, n = {}",
            sys.m(),
            sys.n()
        )));
    }
    let mut res = ClassificationResult::new(Verdict::Inconclusive, criterion, s);
    let (rank, involutive) = evidence_involutive(&mut res.evidence, "H03", sys.fields(), s)?;
    if rank != 3 {
        return Ok(Some(res.because(format!("input fields have rank {rank}, expected 3"))));
    }
    if involutive {
        return Ok(Some(res.because("the input span is involutive")));
    }
    let acc = accessibility_rank(sys, s)?;
    res.evidence.push(Evidence {
        name: "accessibility closure".into(),
        rank: acc,
        involutive: Some(true),
    });
    if acc < n {
        res.verdict = Verdict::NotP2Flat;
        return Ok(Some(
            res.because(format!("not strongly accessible: closure rank {acc} < {n}")),
        ));
    }
    Ok(None)
}

struct Roles<'a> {
    g1: &'a VectorField,
    g2: &'a VectorField,
    g3: &'a VectorField,
}

fn roles<'a>(sys: &'a ControlSystem, perm: &[usize]) -> Roles<'a> {
    let f = sys.fields();
    Roles {
        g1: &f[perm[0]],
        g2: &f[perm[1]],
        g3: &f[perm[2]],
    }
}

/// `H'_{1,2}` and `H_{2,3}` for the single-field case.
fn single_case_lists(r: &Roles) -> Result<(Vec<VectorField>, Vec<VectorField>)> {
    let b21 = br(r.g2, r.g1)?;
    let b31 = br(r.g3, r.g1)?;
    let b32 = br(r.g3, r.g2)?;
    let h12p = vec![r.g1.clone(), r.g2.clone(), b21.clone(), b31.clone()];
    let h23 = vec![
        r.g1.clone(),
        r.g2.clone(),
        r.g3.clone(),
        b21,
        b32.clone(),
        br(r.g3, &b31)?,
        br(r.g3, &b32)?,
    ];
    Ok((h12p, h23))
}

fn classify_single(
    sys: &ControlSystem,
    n: usize,
    mut res: ClassificationResult,
    s: &SampleSet,
) -> Result<ClassificationResult> {
    res.case = Some(2);
    let mut reasons = Vec::new();
    for perm in permutations3() {
        let tag = perm_tag(&perm);
        let (h12p, h23) = single_case_lists(&roles(sys, &perm))?;
        let (r1, inv) = evidence_involutive(&mut res.evidence, &format!("{tag} H'12"), &h12p, s)?;
        let r2 = evidence_rank(&mut res.evidence, &format!("{tag} H23"), &h23, s)?;
        if inv && r1 == 3 && r2 == n {
            res.verdict = Verdict::P2Flat;
            res.permutation = Some(perm.to_vec());
            res.order = Some(unpermute(&perm, &[0, 1, 2]));
            res.pde = pde("H'12", &h12p, s);
            let j = res.order.clone().unwrap();
            confirm(&mut res, sys, &j, s)?;
            return Ok(res);
        }
        reasons.push(format!("{tag}: H'12 rank {r1} involutive {inv}, H23 rank {r2}"));
    }
    res.verdict = Verdict::NotP2Flat;
    Ok(res.because(reasons.join("; ")))
}

fn permutations3() -> [[usize; 3]; 6] {
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

fn perm_tag(perm: &[usize]) -> String {
    let v: Vec<String> = perm.iter().map(|p| (p + 1).to_string()).collect();
    format!("({})", v.join(","))
}

fn case_split(sys: &ControlSystem, res: &mut ClassificationResult, s: &SampleSet) -> Result<Option<CaseTag>> {
    match largest_involutive_input_sub(sys.fields(), s) {
        Ok(tag) => Ok(Some(tag)),
        Err(Error::Ambiguous(msg)) => {
            res.reason = Some(format!("outside the two-case split: {msg}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Three inputs, six states.
pub fn classify_3_inputs_6_states(sys: &ControlSystem, s: &SampleSet) -> Result<ClassificationResult> {
    let criterion = Criterion::ThreeInputsSixStates;
    if let Some(r) = three_input_gate(sys, 6, criterion, s)? {
        return Ok(r);
    }
    let mut res = ClassificationResult::new(Verdict::Inconclusive, criterion, s);
    let Some(tag) = case_split(sys, &mut res, s)? else {
        return Ok(res);
    };
    match tag {
        CaseTag::FullInvolutive => unreachable!("gate rejects involutive input spans"),
        CaseTag::Single { .. } => classify_single(sys, 6, res, s),
        CaseTag::Pair { perm } => {
            res.case = Some(1);
            res.permutation = Some(perm.to_vec());
            let r = roles(sys, &perm);
            let h12 = vec![r.g1.clone(), r.g2.clone(), br(r.g3, r.g1)?, br(r.g3, r.g2)?];
            let (rank, inv) = evidence_involutive(&mut res.evidence, "H12", &h12, s)?;
            if inv && rank == 4 {
                res.verdict = Verdict::P2Flat;
                res.order = Some(unpermute(&perm, &[0, 0, 2]));
                res.pde = pde("H12", &h12, s);
                let j = res.order.clone().unwrap();
                confirm(&mut res, sys, &j, s)?;
                Ok(res)
            } else {
                res.verdict = Verdict::NotP2Flat;
                Ok(res.because(format!("H12 has rank {rank}, involutive {inv}")))
            }
        }
    }
}

/// Three inputs, five states.
pub fn classify_3_inputs_5_states(sys: &ControlSystem, s: &SampleSet) -> Result<ClassificationResult> {
    let criterion = Criterion::ThreeInputsFiveStates;
    if let Some(r) = three_input_gate(sys, 5, criterion, s)? {
        return Ok(r);
    }
    let mut res = ClassificationResult::new(Verdict::Inconclusive, criterion, s);
    let Some(tag) = case_split(sys, &mut res, s)? else {
        return Ok(res);
    };
    match tag {
        CaseTag::FullInvolutive => unreachable!("gate rejects involutive input spans"),
        CaseTag::Single { .. } => classify_single(sys, 5, res, s),
        CaseTag::Pair { perm } => {
            res.case = Some(1);
            res.permutation = Some(perm.to_vec());
            let r = roles(sys, &perm);
            let h13 = vec![
                r.g1.clone(),
                r.g2.clone(),
                r.g3.clone(),
                br(r.g3, r.g1)?,
                br(r.g3, r.g2)?,
            ];
            let rank = evidence_rank(&mut res.evidence, "H13", &h13, s)?;
            if rank == 5 {
                res.verdict = Verdict::P2Flat;
                res.order = Some(unpermute(&perm, &[0, 0, 1]));
                res.pde = pde("H02", &[r.g1.clone(), r.g2.clone()], s);
                let j = res.order.clone().unwrap();
                confirm(&mut res, sys, &j, s)?;
                Ok(res)
            } else {
                res.verdict = Verdict::NotP2Flat;
                Ok(res.because(format!("H13 has rank {rank}, expected 5")))
            }
        }
    }
}

/// m inputs on `2m - 1` or `2m` states. Sufficient only: failures are
/// inconclusive. Each input is tried as the prolonged one.
pub fn classify_m_inputs(sys: &ControlSystem, s: &SampleSet) -> Result<ClassificationResult> {
    let (n, m) = (sys.n(), sys.m());
    if m < 3 || !(n == 2 * m - 1 || n == 2 * m) || !sys.is_driftless() {
        return Err(Error::Precondition(format!(
            "the m-input criterion needs a driftless system with m >= 3 and n in {{2m-1, 2m}}, got m = {m}, n = {n}"
        )));
    }
    let mut res = ClassificationResult::new(Verdict::Inconclusive, Criterion::MInputs, s);
    res.case = Some(if n == 2 * m - 1 { 1 } else { 2 });
    let mut reasons = Vec::new();
    for last in (0..m).rev() {
        let mut perm: Vec<usize> = (0..m).filter(|&i| i != last).collect();
        perm.push(last);
        check_permutation(&perm, m)?;
        let tag = format!("g{} last", last + 1);
        let f = sys.fields();
        let gm = &f[last];
        let h02: Vec<VectorField> = perm[..m - 1].iter().map(|&i| f[i].clone()).collect();
        let b1: Vec<VectorField> = h02.iter().map(|g| br(gm, g)).collect::<Result<_>>()?;
        let (_, inv02) = evidence_involutive(&mut res.evidence, &format!("{tag}: H02"), &h02, s)?;
        if !inv02 {
            reasons.push(format!("{tag}: H02 not involutive"));
            continue;
        }
        let mut j = vec![0; m];
        let ok = if n == 2 * m - 1 {
            let mut h12p = h02.clone();
            h12p.push(gm.clone());
            h12p.extend(b1.iter().cloned());
            let rank = evidence_rank(&mut res.evidence, &format!("{tag}: H'12"), &h12p, s)?;
            j[m - 1] = 1;
            if rank != n {
                reasons.push(format!("{tag}: H'12 rank {rank} < {n}"));
            }
            rank == n
        } else {
            let mut h12 = h02.clone();
            h12.extend(b1.iter().cloned());
            let (r12, inv12) = evidence_involutive(&mut res.evidence, &format!("{tag}: H12"), &h12, s)?;
            let mut h23 = h02.clone();
            h23.push(gm.clone());
            h23.extend(b1.iter().cloned());
            for b in &b1 {
                h23.push(br(gm, b)?);
            }
            let r23 = evidence_rank(&mut res.evidence, &format!("{tag}: H23"), &h23, s)?;
            j[m - 1] = 2;
            let ok = inv12 && r12 == 2 * m - 2 && r23 == n;
            if !ok {
                reasons.push(format!("{tag}: H12 rank {r12} involutive {inv12}, H23 rank {r23}"));
            }
            ok
        };
        if ok {
            res.verdict = Verdict::P2Flat;
            res.order = Some(unpermute(&perm, &j));
            res.permutation = Some(perm.clone());
            res.pde = pde("H02", &h02, s);
            let j = res.order.clone().unwrap();
            confirm(&mut res, sys, &j, s)?;
            return Ok(res);
        }
    }
    Ok(res.because(reasons.join("; ")))
}

/// The general tower search as a classification.
pub fn classify_by_search(
    sys: &ControlSystem,
    s: &SampleSet,
    max_total: Option<usize>,
) -> Result<ClassificationResult> {
    let out = search_minimal_prolongation(sys, s, max_total)?;
    search_result(sys, &out, s)
}

/// The classification implied by a finished search.
pub fn search_result(sys: &ControlSystem, out: &SearchOutcome, s: &SampleSet) -> Result<ClassificationResult> {
    let mut res = ClassificationResult::new(Verdict::Inconclusive, Criterion::Search, s);
    res.evidence.push(Evidence {
        name: "accessibility closure".into(),
        rank: out.accessibility_rank,
        involutive: Some(true),
    });
    match &out.found {
        Some(rep) => {
            res.verdict = Verdict::P2Flat;
            res.order = Some(rep.j.clone());
            res.kappa = Some(BrunovskyIndices::from_report(rep)?.kappa);
            res.confirmed = Some(true);
            res.report = Some(rep.clone());
        }
        None if out.accessibility_rank < sys.n() => {
            res.verdict = Verdict::NotP2Flat;
            res.reason = Some(format!(
                "not strongly accessible: closure rank {} < {}",
                out.accessibility_rank,
                sys.n()
            ));
        }
        None => {
            res.reason = Some(format!("no order with |j| <= {} passes", out.max_total));
        }
    }
    Ok(res)
}

/// Picks the closed-form checker matching `(m, n)`, if any.
pub fn classify(sys: &ControlSystem, s: &SampleSet) -> Result<Option<ClassificationResult>> {
    let (n, m) = (sys.n(), sys.m());
    Ok(Some(match (m, n) {
        (2, n) if n >= 3 => classify_two_input(sys, s)?,
        (3, 6) => classify_3_inputs_6_states(sys, s)?,
        (3, 5) => classify_3_inputs_5_states(sys, s)?,
        (m, n) if m > 3 && (n == 2 * m - 1 || n == 2 * m) => classify_m_inputs(sys, s)?,
        _ => return Ok(None),
    }))
}
