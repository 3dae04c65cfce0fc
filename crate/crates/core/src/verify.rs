//! Graded-identity checking on truncated models, the quotient and scaling
//! correspondences, support cross-checks and chain witnesses.
//!
//! For a multilinear `f` and pairwise disjoint monomials `m_1, ..., m_n`
//! substituted in variable order, every word evaluates to a sign times
//! `m_1 ... m_n`, and the sign only depends on the length parities of the
//! `m_i`. The search therefore precomputes which parity vectors give a
//! nonzero value and only walks disjoint tuples whose parity prefix can still
//! reach one of them.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exterior::{Element, ExteriorError, Monomial};
use crate::freealg::{
    evaluate, phi_d, pi_d, FreeAlgError, GVar, Grade, GradedPolynomial, GroupTag,
};
use crate::grading::{FiniteModel, GradingError, GradingSpec, QuotientTag, UpperIndex};
use crate::support::{
    classify_cases, full_support_3, gcd_all, subgroup_test, variety_of, SubgroupVerdict,
    SupportError, VarietyTag, DEFAULT_BOUND,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("polynomial is not multilinear: {0}")]
    NotMultilinear(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal check failed: {0}")]
    Defect(String),
    #[error(transparent)]
    FreeAlg(#[from] FreeAlgError),
    #[error(transparent)]
    Grading(#[from] GradingError),
    #[error(transparent)]
    Support(#[from] SupportError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// Bounds of an identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scope {
    /// Rank of models built from a grading spec.
    pub rank: usize,
    /// Per-variable monomial length cap; `None` picks by polynomial degree.
    pub length_cap: Option<usize>,
    pub multilinear_only: bool,
    /// Random substitutions for polynomials that are not multilinear.
    pub samples: usize,
    pub seed: u64,
}

impl Default for Scope {
    fn default() -> Self {
        Scope {
            rank: 10,
            length_cap: None,
            multilinear_only: false,
            samples: 10_000,
            seed: 0,
        }
    }
}

impl Scope {
    /// Length cap used for a polynomial of the given degree.
    pub fn cap_for(&self, degree: usize) -> usize {
        self.length_cap
            .unwrap_or(if degree <= 3 { 4 } else { 3 })
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScopeDescriptor {
    pub rank: usize,
    pub length_cap: usize,
    /// `true` for the exhaustive multilinear search, `false` for sampling.
    pub exhaustive: bool,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No nonzero value within the scope. A bounded claim only.
    HoldsInScope(ScopeDescriptor),
    Counterexample {
        assignment: BTreeMap<GVar, Element>,
        value: Element,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsInScope(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            Verdict::HoldsInScope(d) => json!({
                "status": "holds_in_scope",
                "scope": d,
            }),
            Verdict::Counterexample { assignment, value } => {
                let asg: serde_json::Map<String, Value> = assignment
                    .iter()
                    .map(|(v, e)| (v.to_string(), Value::String(e.to_string())))
                    .collect();
                json!({
                    "status": "counterexample",
                    "assignment": asg,
                    "value": value.to_string(),
                })
            }
        }
    }
}

/// Grade of `w` as seen by a variable of grade `g`.
fn matches_grade(model: &FiniteModel, w: Monomial, g: Grade) -> bool {
    let z = model.degree_unchecked(w);
    match g {
        Grade::Int(t) => z == t,
        Grade::Res { r, d } => z.rem_euclid(d as i64) as u64 == r,
    }
}

fn candidates(model: &FiniteModel, all: &[Monomial], g: Grade) -> Vec<Monomial> {
    all.iter()
        .copied()
        .filter(|&w| matches_grade(model, w, g))
        .collect()
}

fn check_tag(f: &GradedPolynomial) -> Result<(), VerifyError> {
    match f.group_tag()? {
        Some(GroupTag::Zd(d)) => {
            QuotientTag::new(d as i64)?;
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Checks whether `f` vanishes under admissible substitutions into `model`.
/// `Z_d`-graded variables are matched against degrees modulo `d`.
pub fn is_graded_identity(
    f: &GradedPolynomial,
    model: &FiniteModel,
    scope: &Scope,
) -> Result<Verdict, VerifyError> {
    check_tag(f)?;
    let cap = scope.cap_for(f.degree());
    let descriptor = |exhaustive: bool, samples: usize| ScopeDescriptor {
        rank: model.rank(),
        length_cap: cap,
        exhaustive,
        samples,
    };
    if f.is_zero() {
        return Ok(Verdict::HoldsInScope(descriptor(true, 0)));
    }
    if f.is_multilinear() {
        let found = multilinear_search(f, model, cap)?;
        return match found {
            Some(assignment) => counterexample(f, model, assignment),
            None => Ok(Verdict::HoldsInScope(descriptor(true, 0))),
        };
    }
    if scope.multilinear_only {
        return Err(VerifyError::NotMultilinear(f.to_string()));
    }
    let found = sampled_search(f, model, cap, scope.samples, scope.seed)?;
    match found {
        Some((assignment, value)) => Ok(Verdict::Counterexample { assignment, value }),
        None => Ok(Verdict::HoldsInScope(descriptor(false, scope.samples))),
    }
}

fn counterexample(
    f: &GradedPolynomial,
    model: &FiniteModel,
    monomials: Vec<(GVar, Monomial)>,
) -> Result<Verdict, VerifyError> {
    let rank = model.rank();
    let assignment = monomials
        .into_iter()
        .map(|(v, w)| Ok((v, Element::monomial(rank, w)?)))
        .collect::<Result<BTreeMap<_, _>, ExteriorError>>()?;
    let value = evaluate(f, &assignment, model)?;
    if value.is_zero() {
        return Err(VerifyError::Defect(format!(
            "parity prediction for {f} did not re-evaluate to a nonzero value"
        )));
    }
    Ok(Verdict::Counterexample { assignment, value })
}

/// Parity vectors (bit `i` = parity of the value of variable `i`) on which the
/// multilinear `f` does not vanish.
fn bad_parities(f: &GradedPolynomial, vars: &[GVar]) -> Vec<bool> {
    let n = vars.len();
    let index: BTreeMap<GVar, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let words: Vec<(Vec<usize>, &BigRational)> = f
        .terms()
        .map(|(w, c)| (w.iter().map(|v| index[v]).collect(), c))
        .collect();
    (0..1usize << n)
        .map(|mask| {
            let odd = |i: usize| mask >> i & 1 == 1;
            let mut sum = BigRational::zero();
            for (w, c) in &words {
                let mut flips = 0;
                for s in 0..w.len() {
                    for t in s + 1..w.len() {
                        if w[s] > w[t] && odd(w[s]) && odd(w[t]) {
                            flips += 1;
                        }
                    }
                }
                if flips % 2 == 0 {
                    sum += *c;
                } else {
                    sum -= *c;
                }
            }
            !sum.is_zero()
        })
        .collect()
}

struct Search<'a> {
    cands: Vec<Vec<(u64, bool)>>,
    // live[l][prefix mask] for prefixes of length l
    live: Vec<Vec<bool>>,
    monos: &'a [Vec<Monomial>],
}

impl Search<'_> {
    fn dfs(&self, level: usize, used: u64, mask: usize, picks: &mut Vec<usize>) -> bool {
        if level == self.cands.len() {
            return true;
        }
        for (k, &(bits, odd)) in self.cands[level].iter().enumerate() {
            if bits & used != 0 {
                continue;
            }
            let next = mask | (odd as usize) << level;
            if !self.live[level + 1][next] {
                continue;
            }
            picks.push(k);
            if self.dfs(level + 1, used | bits, next, picks) {
                return true;
            }
            picks.pop();
        }
        false
    }
}

/// First disjoint tuple, in canonical order, on which `f` is nonzero.
fn multilinear_search(
    f: &GradedPolynomial,
    model: &FiniteModel,
    cap: usize,
) -> Result<Option<Vec<(GVar, Monomial)>>, VerifyError> {
    let vars: Vec<GVar> = f.variables().into_iter().collect();
    let n = vars.len();
    if n > 16 {
        return Err(VerifyError::Precondition(format!(
            "{n} variables exceed the exhaustive search limit of 16"
        )));
    }
    let bad = bad_parities(f, &vars);
    if !bad.iter().any(|&b| b) {
        return Ok(None);
    }
    let mut live: Vec<Vec<bool>> = (0..=n).map(|l| vec![false; 1 << l]).collect();
    for (mask, _) in bad.iter().enumerate().filter(|(_, &b)| b) {
        for (l, row) in live.iter_mut().enumerate() {
            row[mask & ((1 << l) - 1)] = true;
        }
    }
    let all = model.monomials(cap);
    let monos: Vec<Vec<Monomial>> = vars
        .iter()
        .map(|v| candidates(model, &all, v.grade))
        .collect();
    let search = Search {
        cands: monos
            .iter()
            .map(|c| c.iter().map(|w| (w.bits(), w.parity().is_odd())).collect())
            .collect(),
        live,
        monos: &monos,
    };
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let first = search.cands[0]
        .par_iter()
        .enumerate()
        .find_map_first(|(k, &(bits, odd))| {
            let mask = odd as usize;
            if !search.live[1][mask] {
                return None;
            }
            let mut picks = vec![k];
            search.dfs(1, bits, mask, &mut picks).then_some(picks)
        });
    Ok(first.map(|picks| {
        picks
            .iter()
            .enumerate()
            .map(|(i, &k)| (vars[i], search.monos[i][k]))
            .collect()
    }))
}

type Sample = (BTreeMap<GVar, Element>, Element);

fn sampled_search(
    f: &GradedPolynomial,
    model: &FiniteModel,
    cap: usize,
    samples: usize,
    seed: u64,
) -> Result<Option<Sample>, VerifyError> {
    let rank = model.rank();
    let vars: Vec<GVar> = f.variables().into_iter().collect();
    let all = model.monomials(cap);
    let monos: Vec<Vec<Monomial>> = vars
        .iter()
        .map(|v| candidates(model, &all, v.grade))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut assignment = BTreeMap::new();
        for (v, cands) in vars.iter().zip(&monos) {
            let take = if cands.is_empty() {
                0
            } else {
                rng.gen_range(1..=cands.len().min(3))
            };
            let terms = cands.choose_multiple(&mut rng, take).map(|&w| {
                let mut c = 0i64;
                while c == 0 {
                    c = rng.gen_range(-3..=3);
                }
                (w, BigRational::from_integer(c.into()))
            });
            assignment.insert(*v, Element::from_terms(rank, terms.collect::<Vec<_>>())?);
        }
        let value = evaluate(f, &assignment, model)?;
        if !value.is_zero() {
            return Ok(Some((assignment, value)));
        }
    }
    Ok(None)
}

fn require_multilinear_z(f: &GradedPolynomial) -> Result<(), VerifyError> {
    if !f.is_multilinear() {
        return Err(VerifyError::NotMultilinear(f.to_string()));
    }
    match f.group_tag()? {
        Some(GroupTag::Zd(_)) => Err(FreeAlgError::NotOverZ.into()),
        _ => Ok(()),
    }
}

/// `(a, b, c, k)` when the model's spec reads `(-b, c, a)^(inf, k, inf)`.
fn triple_of(spec: &GradingSpec) -> Option<(i64, i64, i64, UpperIndex)> {
    match (spec.lower(), spec.upper()) {
        ([r1, r2, r3], [UpperIndex::Infinity, k, UpperIndex::Infinity]) if *r1 < 0 && *r3 > 0 => {
            Some((*r3, -r1, *r2, *k))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientReport {
    pub agree: bool,
    pub d: u64,
    /// Generator of the subgroup the grading is central for.
    pub central_modulus: u64,
    pub integral: Verdict,
    pub quotient: Verdict,
}

impl QuotientReport {
    pub fn to_json(&self) -> Value {
        json!({
            "agree": self.agree,
            "d": self.d,
            "central_modulus": self.central_modulus,
            "integral": self.integral.to_json(),
            "quotient": self.quotient.to_json(),
        })
    }
}

/// Compares the verdict for `f` with the verdict for `pi_d(f)` on the same
/// model read modulo `d`. The model must be a full-support grading
/// `(-b, c, a)^(inf, k, inf)` that is central for a divisor of `d`.
pub fn check_quotient(
    f: &GradedPolynomial,
    model: &FiniteModel,
    d: u64,
    scope: &Scope,
) -> Result<QuotientReport, VerifyError> {
    require_multilinear_z(f)?;
    QuotientTag::new(d as i64)?;
    let (a, b, c, k) = triple_of(model.spec()).ok_or_else(|| {
        VerifyError::Precondition(format!(
            "{} is not of the form (-b, c, a)^(inf, k, inf)",
            model.spec()
        ))
    })?;
    if gcd_all([a, b, c]) != 1 || full_support_3(-b, c, a, k)?.is_none() {
        return Err(VerifyError::Precondition(format!(
            "{} is not of full support",
            model.spec()
        )));
    }
    let central = classify_cases(a, b, c, DEFAULT_BOUND)?.centrality.modulus();
    if !d.is_multiple_of(central) {
        return Err(VerifyError::Precondition(format!(
            "grading is {central}-central, {d} is not a multiple"
        )));
    }
    let integral = is_graded_identity(f, model, scope)?;
    let quotient = is_graded_identity(&pi_d(f, d as i64)?, model, scope)?;
    Ok(QuotientReport {
        agree: integral.holds() == quotient.holds(),
        d,
        central_modulus: central,
        integral,
        quotient,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingReport {
    pub agree: bool,
    pub base: Verdict,
    pub scaled: Verdict,
}

impl ScalingReport {
    pub fn to_json(&self) -> Value {
        json!({
            "agree": self.agree,
            "base": self.base.to_json(),
            "scaled": self.scaled.to_json(),
        })
    }
}

/// Compares `f` on the model with lower indices divided by `d` against
/// `Phi_d(f)` on `model`, with equal block sizes.
pub fn check_scaling(
    f: &GradedPolynomial,
    model: &FiniteModel,
    d: i64,
    scope: &Scope,
) -> Result<ScalingReport, VerifyError> {
    require_multilinear_z(f)?;
    let reduced = model.spec().divided_by(d).ok_or_else(|| {
        VerifyError::Precondition(format!(
            "{d} does not divide every lower index of {}",
            model.spec()
        ))
    })?;
    let base_model = FiniteModel::build(reduced, model.counts().to_vec())?;
    let base = is_graded_identity(f, &base_model, scope)?;
    let scaled = is_graded_identity(&phi_d(f, d)?, model, scope)?;
    Ok(ScalingReport {
        agree: base.holds() == scaled.holds(),
        base,
        scaled,
    })
}

/// Degrees of all monomials of length at most `max_length`.
pub fn support_bruteforce(model: &FiniteModel, max_length: usize) -> BTreeSet<i64> {
    model
        .monomials(max_length)
        .into_iter()
        .map(|w| model.degree_unchecked(w))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportComparison {
    pub observed: BTreeSet<i64>,
    pub verdict: SubgroupVerdict,
    pub window: i64,
    /// Predicted degrees in `[-window, window]` that were not realized.
    pub missing: Vec<i64>,
    /// Realized degrees outside the predicted subgroup.
    pub unexpected: Vec<i64>,
    pub agree: bool,
}

/// Compares realized degrees with the subgroup criterion. For a predicted
/// subgroup `<g>`, every realized degree must lie in `<g>` and every multiple
/// of `g` in `[-window, window]` must be realized. For a predicted
/// non-subgroup only the first condition, with `g` the overall gcd, applies.
pub fn compare(
    model: &FiniteModel,
    max_length: usize,
    window: i64,
) -> Result<SupportComparison, VerifyError> {
    let observed = support_bruteforce(model, max_length);
    let verdict = subgroup_test(model.spec())?;
    let in_group = |g: u64, z: i64| if g == 0 { z == 0 } else { z % g as i64 == 0 };
    let (g, check_missing) = match verdict {
        SubgroupVerdict::Subgroup { generator } => (generator, true),
        SubgroupVerdict::NotSubgroup => {
            let spec = model.spec();
            let g = gcd_all(
                spec.lower()
                    .iter()
                    .zip(spec.upper())
                    .filter(|(_, u)| !u.is_empty())
                    .map(|(&r, _)| r),
            );
            (g, false)
        }
    };
    let unexpected: Vec<i64> = observed
        .iter()
        .copied()
        .filter(|&z| !in_group(g, z))
        .collect();
    let missing: Vec<i64> = if check_missing {
        (-window..=window)
            .filter(|&z| in_group(g, z) && !observed.contains(&z))
            .collect()
    } else {
        Vec::new()
    };
    Ok(SupportComparison {
        agree: unexpected.is_empty() && missing.is_empty(),
        observed,
        verdict,
        window,
        missing,
        unexpected,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainWitness {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub poly: GradedPolynomial,
    pub low_model: FiniteModel,
    pub high_model: FiniteModel,
    pub low: Verdict,
    pub high: Verdict,
}

impl ChainWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "triple": [self.a, self.b, self.c],
            "poly": self.poly.to_string(),
            "low_model": self.low_model,
            "high_model": self.high_model,
            "low": self.low.to_json(),
            "high": self.high.to_json(),
        })
    }
}

/// Smallest `a + b` with `gcd(a, b) = d`, `(a/d)(b/d)` even and `-b < c < a`.
fn chain_pair(d: i64, c: i64) -> (i64, i64) {
    (1i64..)
        .flat_map(|s| (1..s).map(move |b| (s - b, b)))
        .map(|(x, y)| (x * d, y * d))
        .find(|&(a, b)| {
            gcd_all([a, b]) == d as u64 && ((a / d) * (b / d)) % 2 == 0 && -b < c && c < a
        })
        .expect("such pairs exist")
}

/// A monomial identity of the `k1` model of the first family that fails on
/// the `k2` model, checked on both before it is returned.
pub fn chain_witness(
    d: u64,
    c: i64,
    k1: u64,
    k2: u64,
    scope: &Scope,
) -> Result<ChainWitness, VerifyError> {
    if d < 2 {
        return Err(VerifyError::Precondition(format!("need d >= 2, got {d}")));
    }
    if k1 >= k2 {
        return Err(VerifyError::Precondition(format!(
            "need k1 < k2, got {k1} and {k2}"
        )));
    }
    if k1 + 1 < d {
        return Err(VerifyError::Precondition(format!(
            "need k1 >= d - 1 = {}",
            d - 1
        )));
    }
    if gcd_all([c, d as i64]) != 1 {
        return Err(VerifyError::Precondition(format!(
            "need gcd(c, d) = 1, got c = {c}"
        )));
    }
    let d = d as i64;
    let (a, b) = chain_pair(d, c);
    let word: Vec<GVar> = (1..=k1 as u32 + 1).map(|id| GVar::int(id, c)).collect();
    let poly = GradedPolynomial::word(word);
    let model_for = |k: u64| -> Result<FiniteModel, VerifyError> {
        let tag = variety_of(a, b, c, UpperIndex::Finite(k))?;
        if !matches!(tag, VarietyTag::V1 { .. }) {
            return Err(VerifyError::Defect(format!(
                "({a}, {b}, {c}) with k = {k} gives {tag}"
            )));
        }
        let spec = GradingSpec::triple(a, b, c, UpperIndex::Finite(k))?;
        Ok(FiniteModel::truncated(spec, scope.rank)?)
    };
    let low_model = model_for(k1)?;
    let high_model = model_for(k2)?;
    let low = is_graded_identity(&poly, &low_model, scope)?;
    let high = is_graded_identity(&poly, &high_model, scope)?;
    if !low.holds() || high.holds() {
        return Err(VerifyError::Defect(format!(
            "{poly} does not separate k = {k1} from k = {k2} at rank {}",
            scope.rank
        )));
    }
    Ok(ChainWitness {
        a,
        b,
        c,
        poly,
        low_model,
        high_model,
        low,
        high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INF: UpperIndex = UpperIndex::Infinity;

    fn p(text: &str) -> GradedPolynomial {
        GradedPolynomial::parse(text).unwrap()
    }

    fn model(lower: &[i64], upper: &[UpperIndex], counts: &[usize]) -> FiniteModel {
        let spec = GradingSpec::new(lower.to_vec(), upper.to_vec()).unwrap();
        FiniteModel::build(spec, counts.to_vec()).unwrap()
    }

    fn triple_model(a: i64, b: i64, c: i64, k: u64, rank: usize) -> FiniteModel {
        let spec = GradingSpec::triple(a, b, c, UpperIndex::Finite(k)).unwrap();
        FiniteModel::truncated(spec, rank).unwrap()
    }

    /// Every tuple of candidate monomials, overlapping ones included,
    /// evaluated through exterior multiplication.
    fn naive_holds(f: &GradedPolynomial, m: &FiniteModel, cap: usize) -> bool {
        let vars: Vec<GVar> = f.variables().into_iter().collect();
        let all = m.monomials(cap);
        let cands: Vec<Vec<Monomial>> = vars.iter().map(|v| candidates(m, &all, v.grade)).collect();
        if cands.iter().any(|c| c.is_empty()) {
            return true;
        }
        let mut idx = vec![0usize; vars.len()];
        loop {
            let asg: BTreeMap<GVar, Element> = vars
                .iter()
                .zip(&idx)
                .zip(&cands)
                .map(|((&v, &i), c)| (v, Element::monomial(m.rank(), c[i]).unwrap()))
                .collect();
            if !evaluate(f, &asg, m).unwrap().is_zero() {
                return false;
            }
            let mut j = 0;
            while j < idx.len() && idx[j] + 1 == cands[j].len() {
                idx[j] = 0;
                j += 1;
            }
            if j == idx.len() {
                return true;
            }
            idx[j] += 1;
        }
    }

    #[test]
    fn commutator_of_even_grade_on_canonical_model() {
        let m = triple_model(3, 1, 1, 2, 10);
        let v = is_graded_identity(&p("[x1@2, x2@0]"), &m, &Scope::default()).unwrap();
        assert!(v.holds());
    }

    #[test]
    fn degree_zero_generators_do_not_commute() {
        let m = triple_model(1, 1, 0, 2, 10);
        let f = p("[x1@0, x2@0]");
        match is_graded_identity(&f, &m, &Scope::default()).unwrap() {
            Verdict::Counterexample { assignment, value } => {
                assert!(!value.is_zero());
                assert_eq!(evaluate(&f, &assignment, &m).unwrap(), value);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn single_c_generator_kills_products() {
        let m = triple_model(6, 10, 3, 1, 10);
        assert!(is_graded_identity(&p("x1@3 x2@3"), &m, &Scope::default())
            .unwrap()
            .holds());
        let m2 = triple_model(6, 10, 3, 2, 10);
        assert!(!is_graded_identity(&p("x1@3 x2@3"), &m2, &Scope::default())
            .unwrap()
            .holds());
    }

    #[test]
    fn non_multilinear_uses_sampling() {
        let m = triple_model(1, 1, 0, 2, 6);
        let scope = Scope {
            samples: 200,
            ..Scope::default()
        };
        // degree-0 elements square to zero only on nilpotent parts
        let v = is_graded_identity(&p("x1@0 x1@0"), &m, &scope).unwrap();
        assert!(!v.holds());
        let odd =
            is_graded_identity(&p("x1@1 x1@1"), &triple_model(3, 1, 1, 2, 6), &scope).unwrap();
        assert!(matches!(
            odd,
            Verdict::HoldsInScope(ScopeDescriptor {
                exhaustive: false,
                ..
            })
        ));
        let strict = Scope {
            multilinear_only: true,
            ..scope
        };
        assert!(matches!(
            is_graded_identity(&p("x1@0 x1@0"), &m, &strict),
            Err(VerifyError::NotMultilinear(_))
        ));
    }

    #[test]
    fn constants_and_zero() {
        let m = triple_model(1, 1, 0, 1, 4);
        assert!(
            is_graded_identity(&GradedPolynomial::zero(), &m, &Scope::default())
                .unwrap()
                .holds()
        );
    }

    #[test]
    fn quotient_examples() {
        let scope = Scope::default();
        let m = triple_model(3, 1, 1, 2, 10);
        for f in ["[x1@2, x2@0]", "x1@1 x2@1 + x2@1 x1@1"] {
            let r = check_quotient(&p(f), &m, 2, &scope).unwrap();
            assert!(r.agree && r.integral.holds(), "{f}");
        }
        let m = triple_model(1, 1, 0, 2, 10);
        let r = check_quotient(&p("[x1@0, x2@0]"), &m, 2, &scope).unwrap();
        assert!(r.agree && !r.integral.holds());
        assert!(matches!(
            check_quotient(&p("[x1@0, x2@0]"), &m, 1, &scope),
            Err(VerifyError::Precondition(_))
        ));
    }

    #[test]
    fn scaling_examples() {
        let scope = Scope::default();
        let m = model(&[-2, 0, 2], &[INF, UpperIndex::Finite(2), INF], &[4, 2, 4]);
        let r = check_scaling(&p("[x1@-1, x2@1]"), &m, 2, &scope).unwrap();
        assert!(r.agree);
        assert!(is_graded_identity(&p("x1@1"), &m, &scope).unwrap().holds());
        let r = check_scaling(&p("[x1@0, x2@0]"), &m, 1, &scope).unwrap();
        assert!(r.agree);
        assert!(check_scaling(&p("x1@1"), &m, 4, &scope).is_err());
    }

    #[test]
    fn support_examples() {
        let m = model(&[-3, 1, 6], &[INF, UpperIndex::Finite(2), INF], &[6, 2, 6]);
        let s = support_bruteforce(&m, 8);
        assert!((-15..=15).all(|z| s.contains(&z)));
        let cmp = compare(&m, 8, 15).unwrap();
        assert!(cmp.agree);

        let even = model(&[-2, 4], &[INF, INF], &[5, 5]);
        assert!(support_bruteforce(&even, 10).iter().all(|z| z % 2 == 0));
        assert!(compare(&even, 10, 10).unwrap().agree);

        let empty = model(&[-1, 1], &[INF, INF], &[0, 0]);
        assert_eq!(support_bruteforce(&empty, 3), BTreeSet::from([0]));
    }

    #[test]
    fn chain_examples() {
        let scope = Scope::default();
        let w = chain_witness(2, 3, 1, 2, &scope).unwrap();
        assert_eq!(w.poly, p("x1@3 x2@3"));
        assert_eq!((w.a, w.b), (4, 2));
        let w = chain_witness(3, 1, 2, 4, &scope).unwrap();
        assert_eq!(w.poly, p("x1@1 x2@1 x3@1"));
        assert_eq!((w.a, w.b), (6, 3));
        assert!(matches!(
            chain_witness(2, 3, 2, 2, &scope),
            Err(VerifyError::Precondition(_))
        ));
    }

    #[test]
    fn bad_parities_of_small_polynomials() {
        let f = p("[x1@0, x2@0]");
        let vars: Vec<GVar> = f.variables().into_iter().collect();
        assert_eq!(bad_parities(&f, &vars), vec![false, false, false, true]);
        let g = p("x1@0 x2@0 + x2@0 x1@0");
        assert_eq!(bad_parities(&g, &vars), vec![true, true, true, false]);
    }

    fn arb_multilinear() -> impl Strategy<Value = GradedPolynomial> {
        (
            1usize..=3,
            prop::collection::vec(-2i64..=2, 3),
            prop::collection::vec((-2i64..=2, 0usize..6), 1..4),
        )
            .prop_map(|(n, grades, terms)| {
                let vars: Vec<GVar> = (0..n).map(|i| GVar::int(i as u32 + 1, grades[i])).collect();
                let perms: Vec<Vec<GVar>> = {
                    use itertools::Itertools;
                    vars.iter().copied().permutations(n).collect()
                };
                let terms = terms.into_iter().map(|(c, k)| {
                    (
                        perms[k % perms.len()].clone(),
                        BigRational::from_integer(c.into()),
                    )
                });
                GradedPolynomial::from_terms(terms).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pruned_search_matches_naive(
            f in arb_multilinear(),
            lower in prop_oneof![Just(vec![-1i64, 0, 1]), Just(vec![-2, 1, 3]), Just(vec![-1, 1, 2])],
            counts in prop::collection::vec(0usize..3, 3),
        ) {
            prop_assume!(!f.is_zero());
            let m = model(&lower, &[INF, INF, INF], &counts);
            let v = is_graded_identity(&f, &m, &Scope { length_cap: Some(3), ..Scope::default() }).unwrap();
            prop_assert_eq!(v.holds(), naive_holds(&f, &m, 3));
        }

        #[test]
        fn quotient_of_degree_two_identities(g1 in -2i64..=2, g2 in -2i64..=2, anti in any::<bool>()) {
            let f = if anti {
                p(&format!("x1@{g1} x2@{g2} + x2@{g2} x1@{g1}"))
            } else {
                p(&format!("[x1@{g1}, x2@{g2}]"))
            };
            let m = triple_model(3, 1, 1, 2, 10);
            let r = check_quotient(&f, &m, 2, &Scope::default()).unwrap();
            prop_assert!(r.agree);
        }
    }
}
