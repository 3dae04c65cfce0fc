//! Supports of n-induced gradings, gcd criteria for full support, parity
//! cases of minimal representations and the variety dispatch table.

use std::collections::BTreeMap;
use std::fmt;

use num::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::grading::{GradingSpec, UpperIndex};

/// Default per-coefficient search bound.
pub const DEFAULT_BOUND: u64 = 40;
/// Default half-width of the support window `[-W, W]`.
pub const DEFAULT_WINDOW: i64 = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupportError {
    #[error("no exact subgroup criterion for {0} non-empty blocks")]
    Unsupported(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no representation of {target} within coefficient bound {bound}")]
    NoSolutionWithinBound { target: i64, bound: u64 },
    #[error("grading (-{b}, {c}, {a}) with k = {k} is not of full support")]
    NotFullSupport {
        a: i64,
        b: i64,
        c: i64,
        k: UpperIndex,
    },
}

pub fn gcd_all(values: impl IntoIterator<Item = i64>) -> u64 {
    values.into_iter().fold(0i64, |g, v| g.gcd(&v)) as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SupportQueryResult {
    /// `sum_j witness[j] * r_j = z` with `witness[j] <= v_j`.
    Yes {
        witness: Vec<u64>,
    },
    NotFoundWithinBound,
    /// Proven absence, with the criterion that proves it.
    ExactNo {
        reason: String,
    },
}

impl SupportQueryResult {
    pub fn is_yes(&self) -> bool {
        matches!(self, SupportQueryResult::Yes { .. })
    }
}

/// Indices of blocks that actually contain generators.
fn nonempty_blocks(spec: &GradingSpec) -> Vec<usize> {
    (0..spec.num_blocks())
        .filter(|&j| !spec.upper()[j].is_empty())
        .collect()
}

/// Decides `z in S` by bounded search, answering `ExactNo` only when a proven
/// criterion excludes `z`.
pub fn support_contains(spec: &GradingSpec, z: i64, bound: u64) -> SupportQueryResult {
    let n = spec.num_blocks();
    let lower = spec.lower();
    let upper = spec.upper();

    // reachable sums, each with the witness of least total, ties lexicographic
    let mut reach: BTreeMap<i64, Vec<u64>> = BTreeMap::new();
    reach.insert(0, vec![0; n]);
    for j in 0..n {
        let cap = upper[j].capped(bound);
        let mut next: BTreeMap<i64, Vec<u64>> = BTreeMap::new();
        for (s, w) in &reach {
            for t in 0..=cap {
                let sum = s + t as i64 * lower[j];
                let mut cand = w.clone();
                cand[j] = t;
                let key = |v: &Vec<u64>| (v.iter().sum::<u64>(), v.clone());
                match next.get(&sum) {
                    Some(old) if key(old) <= key(&cand) => {}
                    _ => {
                        next.insert(sum, cand);
                    }
                }
            }
        }
        reach = next;
    }
    if let Some(witness) = reach.remove(&z) {
        return SupportQueryResult::Yes { witness };
    }
    match exclusion_reason(spec, z, bound) {
        Some(reason) => SupportQueryResult::ExactNo { reason },
        None => SupportQueryResult::NotFoundWithinBound,
    }
}

fn exclusion_reason(spec: &GradingSpec, z: i64, bound: u64) -> Option<String> {
    let blocks = nonempty_blocks(spec);
    let lower = spec.lower();
    let upper = spec.upper();
    let g = gcd_all(blocks.iter().map(|&j| lower[j]));
    if g == 0 {
        return (z != 0).then(|| "every non-empty block has degree 0".to_string());
    }
    if z % g as i64 != 0 {
        return Some(format!("{z} is not a multiple of gcd = {g}"));
    }
    // extremes of the support when one side only has finite blocks
    let neg_inf = blocks
        .iter()
        .any(|&j| lower[j] < 0 && upper[j].is_infinite());
    let pos_inf = blocks
        .iter()
        .any(|&j| lower[j] > 0 && upper[j].is_infinite());
    let sum_side = |pred: &dyn Fn(i64) -> bool| -> i64 {
        blocks
            .iter()
            .filter(|&&j| pred(lower[j]))
            .map(|&j| lower[j] * upper[j].capped(u64::MAX) as i64)
            .sum()
    };
    if !neg_inf {
        let min = sum_side(&|r| r < 0);
        if z < min {
            return Some(format!("{z} is below the least degree {min}"));
        }
    }
    if !pos_inf {
        let max = sum_side(&|r| r > 0);
        if z > max {
            return Some(format!("{z} is above the greatest degree {max}"));
        }
    }
    let exhaustive = blocks.iter().all(|&j| match upper[j] {
        UpperIndex::Finite(v) => v <= bound,
        UpperIndex::Infinity => false,
    });
    exhaustive.then(|| "search over all coefficient vectors was exhaustive".to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubgroupVerdict {
    /// The support equals the subgroup generated by `generator` (0 for `{0}`).
    Subgroup {
        generator: u64,
    },
    NotSubgroup,
}

/// Exact subgroup criterion for gradings with at most three non-empty blocks.
///
/// Blocks with upper index 0 carry no generators and are ignored. For three
/// blocks the criterion is applied to the grading divided by the overall gcd,
/// so the multiplicity condition reads `v >= d'/d - 1`.
pub fn subgroup_test(spec: &GradingSpec) -> Result<SubgroupVerdict, SupportError> {
    let blocks = nonempty_blocks(spec);
    let lower = spec.lower();
    let upper = spec.upper();
    let r = |j: usize| lower[blocks[j]];
    let v = |j: usize| upper[blocks[j]];
    let verdict = match blocks.len() {
        0 => SubgroupVerdict::Subgroup { generator: 0 },
        1 if r(0) == 0 => SubgroupVerdict::Subgroup { generator: 0 },
        1 => SubgroupVerdict::NotSubgroup,
        2 => {
            if v(0).is_infinite() && v(1).is_infinite() && r(0) < 0 && 0 < r(1) {
                SubgroupVerdict::Subgroup {
                    generator: gcd_all([r(0), r(1)]),
                }
            } else {
                SubgroupVerdict::NotSubgroup
            }
        }
        3 => {
            let pair = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .find(|&(i, j)| r(i) < 0 && 0 < r(j) && v(i).is_infinite() && v(j).is_infinite());
            match pair {
                None => SubgroupVerdict::NotSubgroup,
                Some((i, j)) => {
                    let m = 3 - i - j;
                    let d_pair = gcd_all([r(i), r(j)]);
                    let d = gcd_all([r(0), r(1), r(2)]);
                    if r(m) % d_pair as i64 == 0 {
                        SubgroupVerdict::Subgroup { generator: d_pair }
                    } else if v(m).at_least(d_pair / d - 1) {
                        SubgroupVerdict::Subgroup { generator: d }
                    } else {
                        SubgroupVerdict::NotSubgroup
                    }
                }
            }
        }
        n => return Err(SupportError::Unsupported(n)),
    };
    Ok(verdict)
}

/// Sufficient condition for full support, valid for any number of blocks:
/// a coprime pair `r_i < 0 < r_j` with both blocks infinite.
pub fn full_support_sufficient(spec: &GradingSpec) -> bool {
    let lower = spec.lower();
    let upper = spec.upper();
    let n = spec.num_blocks();
    (0..n).any(|i| {
        (0..n).any(|j| {
            lower[i] < 0
                && 0 < lower[j]
                && upper[i].is_infinite()
                && upper[j].is_infinite()
                && gcd_all([lower[i], lower[j]]) == 1
        })
    })
}

/// Necessary condition for the support to be a subgroup, for any number of
/// blocks: some `r_i < 0 < r_j` with both blocks infinite.
pub fn subgroup_necessary(spec: &GradingSpec) -> bool {
    let lower = spec.lower();
    let upper = spec.upper();
    let n = spec.num_blocks();
    (0..n).any(|i| {
        (0..n).any(|j| {
            lower[i] < 0 && 0 < lower[j] && upper[i].is_infinite() && upper[j].is_infinite()
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FullSupportCase {
    /// The outer pair is already coprime.
    A,
    /// The middle block fills the residues modulo `gcd(r_1, r_3)`.
    B,
}

impl fmt::Display for FullSupportCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FullSupportCase::A => write!(f, "A"),
            FullSupportCase::B => write!(f, "B"),
        }
    }
}

/// Full-support criterion for `(r1, r2, r3)^(inf, v2, inf)` with `r1 < 0 < r3`
/// and `gcd(r1, r2, r3) = 1`. Returns the case tag, or `None` when the support
/// is not all of Z.
pub fn full_support_3(
    r1: i64,
    r2: i64,
    r3: i64,
    v2: UpperIndex,
) -> Result<Option<FullSupportCase>, SupportError> {
    if !(r1 < 0 && 0 < r3) {
        return Err(SupportError::Precondition(format!(
            "need r1 < 0 < r3, got r1 = {r1}, r3 = {r3}"
        )));
    }
    if gcd_all([r1, r2, r3]) != 1 {
        return Err(SupportError::Precondition(format!(
            "gcd({r1}, {r2}, {r3}) must be 1"
        )));
    }
    let d_pair = gcd_all([r1, r3]);
    if d_pair == 1 {
        return Ok(Some(FullSupportCase::A));
    }
    // gcd(d', r2) = 1 here, so r2 is never a multiple of d'
    if r2 % d_pair as i64 != 0 && v2.at_least(d_pair - 1) {
        Ok(Some(FullSupportCase::B))
    } else {
        Ok(None)
    }
}

/// `gcd(a, b, c) = 1` while every pairwise gcd exceeds 1.
pub fn satisfies_bhat(a: i64, b: i64, c: i64) -> bool {
    gcd_all([a, b, c]) == 1 && gcd_all([a, b]) != 1 && gcd_all([a, c]) != 1 && gcd_all([b, c]) != 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalRep {
    pub target: i64,
    pub generators: Vec<i64>,
    pub coeffs: Vec<u64>,
    pub total: u64,
}

impl MinimalRep {
    pub fn parity_odd(&self) -> bool {
        self.total % 2 == 1
    }
}

/// Non-negative representation of `target` by `generators` with the least
/// coefficient sum; ties go to the lexicographically least vector.
pub fn minimal_rep(
    generators: &[i64],
    target: i64,
    bound: u64,
) -> Result<MinimalRep, SupportError> {
    let k = generators.len() as u64;
    let mut coeffs = vec![0u64; generators.len()];
    for total in 0..=k * bound {
        if first_with_total(generators, target, bound, total, 0, 0, &mut coeffs) {
            return Ok(MinimalRep {
                target,
                generators: generators.to_vec(),
                coeffs,
                total,
            });
        }
    }
    Err(SupportError::NoSolutionWithinBound { target, bound })
}

// fills coeffs[pos..] with the lexicographically first completion summing to
// `remaining` that hits the target
fn first_with_total(
    gens: &[i64],
    target: i64,
    bound: u64,
    remaining: u64,
    pos: usize,
    acc: i64,
    coeffs: &mut [u64],
) -> bool {
    if pos + 1 == gens.len() {
        if remaining > bound {
            return false;
        }
        coeffs[pos] = remaining;
        return acc + remaining as i64 * gens[pos] == target;
    }
    if pos == gens.len() {
        return remaining == 0 && acc == target;
    }
    let slots_after = (gens.len() - pos - 1) as u64;
    let lo = remaining.saturating_sub(slots_after * bound);
    for t in lo..=remaining.min(bound) {
        coeffs[pos] = t;
        let next = acc + t as i64 * gens[pos];
        if first_with_total(gens, target, bound, remaining - t, pos + 1, next, coeffs) {
            return true;
        }
    }
    false
}

/// Parity case of a pair of minimal representations of `+t` and `-t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParityCase {
    /// both totals even
    One,
    /// `+t` even, `-t` odd
    Two,
    /// `+t` odd, `-t` even
    Three,
    /// both odd
    Four,
}

impl ParityCase {
    pub fn from_totals(plus: &MinimalRep, minus: &MinimalRep) -> Self {
        match (plus.parity_odd(), minus.parity_odd()) {
            (false, false) => ParityCase::One,
            (false, true) => ParityCase::Two,
            (true, false) => ParityCase::Three,
            (true, true) => ParityCase::Four,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ParityCase::One => 1,
            ParityCase::Two => 2,
            ParityCase::Three => 3,
            ParityCase::Four => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "d", rename_all = "snake_case")]
pub enum Centrality {
    /// every component of degree in `<d>` has infinitely many disjoint even monomials
    DCentral(u64),
    /// the same, only for degrees in `<2d>`
    TwoDCentral(u64),
}

impl Centrality {
    /// Generator of the subgroup `H` the grading is central for.
    pub fn modulus(self) -> u64 {
        match self {
            Centrality::DCentral(d) => d,
            Centrality::TwoDCentral(d) => 2 * d,
        }
    }
}

impl fmt::Display for Centrality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Centrality::DCentral(d) => write!(f, "{d}-central"),
            Centrality::TwoDCentral(d) => write!(f, "{}-central (2d, d = {d})", 2 * d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleCase {
    pub case: ParityCase,
    pub plus_one: MinimalRep,
    pub minus_one: MinimalRep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: u64,
    pub bhat: bool,
    pub plus_d: MinimalRep,
    pub minus_d: MinimalRep,
    pub pair_case: ParityCase,
    pub triple: Option<TripleCase>,
    pub centrality: Centrality,
}

/// Parity cases (1')-(4') of the pair `(a, -b)` for `+-d`, `d = gcd(a, b)`,
/// the cases (1)-(4) of `(a, -b, c)` for `+-1` when that triple is coprime,
/// and the resulting centrality.
pub fn classify_cases(a: i64, b: i64, c: i64, bound: u64) -> Result<CaseReport, SupportError> {
    if a <= 0 || b <= 0 {
        return Err(SupportError::Precondition(format!(
            "a and b must be positive, got a = {a}, b = {b}"
        )));
    }
    let d = gcd_all([a, b]);
    let pair = [a, -b];
    let plus_d = minimal_rep(&pair, d as i64, bound)?;
    let minus_d = minimal_rep(&pair, -(d as i64), bound)?;
    let pair_case = ParityCase::from_totals(&plus_d, &minus_d);
    let triple = if gcd_all([a, b, c]) == 1 {
        let gens = [a, -b, c];
        let plus_one = minimal_rep(&gens, 1, bound)?;
        let minus_one = minimal_rep(&gens, -1, bound)?;
        Some(TripleCase {
            case: ParityCase::from_totals(&plus_one, &minus_one),
            plus_one,
            minus_one,
        })
    } else {
        None
    };
    let reduced_product_even = ((a / d as i64) * (b / d as i64)) % 2 == 0;
    let centrality = match pair_case {
        ParityCase::Four if !reduced_product_even => Centrality::TwoDCentral(d),
        _ => Centrality::DCentral(d),
    };
    Ok(CaseReport {
        a,
        b,
        c,
        d,
        bhat: satisfies_bhat(a, b, c),
        plus_d,
        minus_d,
        pair_case,
        triple,
        centrality,
    })
}

/// Variety of Z-graded algebras generated by a full-support grading
/// `(-b, c, a)^(inf, k, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "variety", rename_all = "snake_case")]
pub enum VarietyTag {
    /// Pull-back of the Z_2-identities of `E_k`.
    V101 { k: UpperIndex },
    /// Pull-back of the Z_2-identities of `E_inf`.
    V102 { k: UpperIndex },
    /// Pull-back of the identities of the canonical Z_2-grading.
    Can,
    /// Case B, finite k, `(a/d)(b/d)` even.
    V1 { a: i64, b: i64, c: i64, k: u64 },
    /// Case B, finite k, `(a/d)(b/d)` odd.
    V2 { a: i64, b: i64, c: i64, k: u64 },
}

impl VarietyTag {
    /// `gcd(a, b)` for the case-B families.
    pub fn pair_gcd(&self) -> Option<u64> {
        match *self {
            VarietyTag::V1 { a, b, .. } | VarietyTag::V2 { a, b, .. } => Some(gcd_all([a, b])),
            _ => None,
        }
    }
}

impl fmt::Display for VarietyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarietyTag::V101 { k } => write!(f, "V_(-1,0,1)^(inf,{k},inf)"),
            VarietyTag::V102 { k } => write!(f, "V_(-1,0,2)^(inf,{k},inf)"),
            VarietyTag::Can => write!(f, "V_can"),
            VarietyTag::V1 { k, .. } => write!(f, "V_{{1,{k}}}"),
            VarietyTag::V2 { k, .. } => write!(f, "V_{{2,{k}}}"),
        }
    }
}

pub fn variety_of(a: i64, b: i64, c: i64, k: UpperIndex) -> Result<VarietyTag, SupportError> {
    if a <= 0 || b <= 0 || !(-b < c && c < a) {
        return Err(SupportError::Precondition(format!(
            "need a, b > 0 and -b < c < a, got a = {a}, b = {b}, c = {c}"
        )));
    }
    let not_full = SupportError::NotFullSupport { a, b, c, k };
    if gcd_all([a, b, c]) != 1 {
        return Err(not_full);
    }
    let case = full_support_3(-b, c, a, k)?.ok_or(not_full)?;
    let ab_odd = (a * b) % 2 != 0;
    let abc_odd = ab_odd && c % 2 != 0;
    let tag = match (case, k) {
        (_, _) if abc_odd && (case == FullSupportCase::A || k.is_infinite()) => VarietyTag::Can,
        (FullSupportCase::A, UpperIndex::Finite(_)) if ab_odd => VarietyTag::V101 { k },
        (FullSupportCase::A, _) => VarietyTag::V102 { k },
        (FullSupportCase::B, UpperIndex::Infinity) => VarietyTag::V102 { k },
        (FullSupportCase::B, UpperIndex::Finite(k)) => {
            let d = gcd_all([a, b]) as i64;
            if ((a / d) * (b / d)) % 2 == 0 {
                VarietyTag::V1 { a, b, c, k }
            } else {
                VarietyTag::V2 { a, b, c, k }
            }
        }
    };
    Ok(tag)
}
