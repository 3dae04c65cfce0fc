//! n-induced Z-gradings on truncated Grassmann algebras.
//!
//! A [`GradingSpec`] fixes the lower indices (block degrees) and upper indices
//! (block sizes, possibly infinite). A [`FiniteModel`] realizes it with a finite
//! number of generators per block, numbered block by block.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::{Element, Monomial, MAX_RANK};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradingError {
    #[error("grading needs at least one block")]
    NoBlocks,
    #[error("lower indices must be strictly increasing: {0:?}")]
    LowerNotIncreasing(Vec<i64>),
    #[error("{lower} lower indices but {upper} upper indices")]
    LengthMismatch { lower: usize, upper: usize },
    #[error("{counts} counts for {blocks} blocks")]
    CountsMismatch { counts: usize, blocks: usize },
    #[error("block {block} holds {count} generators but its upper index is {bound}")]
    CountExceedsUpper {
        block: usize,
        count: usize,
        bound: u64,
    },
    #[error("finite blocks need {needed} generators but the rank is {rank}")]
    RankTooSmall { needed: usize, rank: usize },
    #[error("model rank {0} exceeds the supported maximum of {MAX_RANK}")]
    RankTooLarge(usize),
    #[error("monomial uses generator {index} but the model has rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("quotient modulus must be at least 1, got {0}")]
    BadModulus(i64),
    #[error("invalid upper index: {0}")]
    BadUpper(String),
}

/// Block size: a natural number or infinity.
///
/// `Finite(0)` is accepted and denotes an empty block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpperIndex {
    Finite(u64),
    Infinity,
}

impl UpperIndex {
    pub fn is_infinite(self) -> bool {
        self == UpperIndex::Infinity
    }

    pub fn is_empty(self) -> bool {
        self == UpperIndex::Finite(0)
    }

    /// `self >= n`.
    pub fn at_least(self, n: u64) -> bool {
        match self {
            UpperIndex::Finite(v) => v >= n,
            UpperIndex::Infinity => true,
        }
    }

    /// `min(self, cap)` as a finite number.
    pub fn capped(self, cap: u64) -> u64 {
        match self {
            UpperIndex::Finite(v) => v.min(cap),
            UpperIndex::Infinity => cap,
        }
    }
}

impl fmt::Display for UpperIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperIndex::Finite(v) => write!(f, "{v}"),
            UpperIndex::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for UpperIndex {
    type Err = GradingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "∞" | "infinity" => Ok(UpperIndex::Infinity),
            t => t
                .parse::<u64>()
                .map(UpperIndex::Finite)
                .map_err(|_| GradingError::BadUpper(s.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawUpper {
    Num(u64),
    Text(String),
}

impl Serialize for UpperIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            UpperIndex::Finite(v) => RawUpper::Num(*v).serialize(s),
            UpperIndex::Infinity => RawUpper::Text("inf".into()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for UpperIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RawUpper::deserialize(d)? {
            RawUpper::Num(v) => Ok(UpperIndex::Finite(v)),
            RawUpper::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct GradingSpec {
    lower: Vec<i64>,
    upper: Vec<UpperIndex>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    lower: Vec<i64>,
    upper: Vec<UpperIndex>,
}

impl TryFrom<RawSpec> for GradingSpec {
    type Error = GradingError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        GradingSpec::new(raw.lower, raw.upper)
    }
}

impl From<GradingSpec> for RawSpec {
    fn from(spec: GradingSpec) -> Self {
        RawSpec {
            lower: spec.lower,
            upper: spec.upper,
        }
    }
}

impl GradingSpec {
    pub fn new(lower: Vec<i64>, upper: Vec<UpperIndex>) -> Result<Self, GradingError> {
        if lower.is_empty() {
            return Err(GradingError::NoBlocks);
        }
        if lower.len() != upper.len() {
            return Err(GradingError::LengthMismatch {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if lower.iter().tuple_windows().any(|(a, b)| a >= b) {
            return Err(GradingError::LowerNotIncreasing(lower));
        }
        Ok(GradingSpec { lower, upper })
    }

    /// The 3-induced grading `(-b, c, a)^(inf, k, inf)` used throughout the
    /// full-support analysis.
    pub fn triple(a: i64, b: i64, c: i64, k: UpperIndex) -> Result<Self, GradingError> {
        GradingSpec::new(
            vec![-b, c, a],
            vec![UpperIndex::Infinity, k, UpperIndex::Infinity],
        )
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[UpperIndex] {
        &self.upper
    }

    pub fn num_blocks(&self) -> usize {
        self.lower.len()
    }

    /// Same upper indices, every lower index divided by `d`; `None` unless exact.
    pub fn divided_by(&self, d: i64) -> Option<GradingSpec> {
        if d == 0 || self.lower.iter().any(|r| r % d != 0) {
            return None;
        }
        let mut lower: Vec<i64> = self.lower.iter().map(|r| r / d).collect();
        let mut upper = self.upper.clone();
        if d < 0 {
            lower.reverse();
            upper.reverse();
        }
        GradingSpec::new(lower, upper).ok()
    }
}

impl fmt::Display for GradingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})^({})",
            self.lower.iter().join(","),
            self.upper.iter().join(",")
        )
    }
}

/// Modulus of a quotient grading `Z -> Z_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuotientTag(u64);

impl QuotientTag {
    pub fn new(d: i64) -> Result<Self, GradingError> {
        if d < 1 {
            Err(GradingError::BadModulus(d))
        } else {
            Ok(QuotientTag(d as u64))
        }
    }

    pub fn modulus(self) -> u64 {
        self.0
    }

    pub fn reduce(self, z: i64) -> u64 {
        z.rem_euclid(self.0 as i64) as u64
    }
}

/// Degree of a homogeneous element, as reported by [`FiniteModel::is_homogeneous`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogeneity {
    Degree(i64),
    NotHomogeneous,
    /// The zero element lies in every component.
    AllDegrees,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct FiniteModel {
    spec: GradingSpec,
    counts: Vec<usize>,
    // generator degrees, index i holds the degree of e_{i+1}
    degrees: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    spec: GradingSpec,
    counts: Vec<usize>,
}

impl TryFrom<RawModel> for FiniteModel {
    type Error = GradingError;

    fn try_from(raw: RawModel) -> Result<Self, Self::Error> {
        FiniteModel::build(raw.spec, raw.counts)
    }
}

impl From<FiniteModel> for RawModel {
    fn from(m: FiniteModel) -> Self {
        RawModel {
            spec: m.spec,
            counts: m.counts,
        }
    }
}

impl FiniteModel {
    /// Realizes `spec` with `counts[j]` generators in block `j`, assigned contiguously.
    pub fn build(spec: GradingSpec, counts: Vec<usize>) -> Result<Self, GradingError> {
        if counts.len() != spec.num_blocks() {
            return Err(GradingError::CountsMismatch {
                counts: counts.len(),
                blocks: spec.num_blocks(),
            });
        }
        for (block, (&count, upper)) in counts.iter().zip(spec.upper()).enumerate() {
            if let UpperIndex::Finite(bound) = upper {
                if count as u64 > *bound {
                    return Err(GradingError::CountExceedsUpper {
                        block,
                        count,
                        bound: *bound,
                    });
                }
            }
        }
        let rank: usize = counts.iter().sum();
        if rank > MAX_RANK {
            return Err(GradingError::RankTooLarge(rank));
        }
        let degrees = spec
            .lower()
            .iter()
            .zip(&counts)
            .flat_map(|(&r, &n)| std::iter::repeat_n(r, n))
            .collect();
        Ok(FiniteModel {
            spec,
            counts,
            degrees,
        })
    }

    /// Truncation of `spec` to `rank` generators: finite blocks are realized in
    /// full, infinite blocks share what is left (earlier blocks take the excess).
    pub fn truncated(spec: GradingSpec, rank: usize) -> Result<Self, GradingError> {
        let mut counts = vec![0usize; spec.num_blocks()];
        let mut used = 0usize;
        let mut infinite = Vec::new();
        for (j, upper) in spec.upper().iter().enumerate() {
            match upper {
                UpperIndex::Finite(v) => {
                    counts[j] = *v as usize;
                    used += *v as usize;
                }
                UpperIndex::Infinity => infinite.push(j),
            }
        }
        if used > rank {
            return Err(GradingError::RankTooSmall { needed: used, rank });
        }
        let rest = rank - used;
        if !infinite.is_empty() {
            let share = rest / infinite.len();
            let extra = rest % infinite.len();
            for (pos, &j) in infinite.iter().enumerate() {
                counts[j] = share + usize::from(pos < extra);
            }
        }
        FiniteModel::build(spec, counts)
    }

    pub fn spec(&self) -> &GradingSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    /// Degrees of `e_1, ..., e_m` in order.
    pub fn generator_degrees(&self) -> &[i64] {
        &self.degrees
    }

    /// Block owning generator `index` (1-based).
    pub fn block_of(&self, index: usize) -> Option<usize> {
        if index == 0 || index > self.rank() {
            return None;
        }
        let mut end = 0;
        for (j, &n) in self.counts.iter().enumerate() {
            end += n;
            if index <= end {
                return Some(j);
            }
        }
        None
    }

    /// Generators of block `j`, as 1-based indices.
    pub fn block_generators(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.counts[..j].iter().sum();
        start + 1..start + 1 + self.counts[j]
    }

    pub fn degree(&self, w: Monomial) -> Result<i64, GradingError> {
        if w.max_index() > self.rank() {
            return Err(GradingError::IndexOutOfRange {
                index: w.max_index(),
                rank: self.rank(),
            });
        }
        Ok(self.degree_unchecked(w))
    }

    pub(crate) fn degree_unchecked(&self, w: Monomial) -> i64 {
        w.indices().map(|i| self.degrees[i - 1]).sum()
    }

    pub fn quotient_degree(&self, w: Monomial, d: QuotientTag) -> Result<u64, GradingError> {
        Ok(d.reduce(self.degree(w)?))
    }

    /// All monomials of length at most `max_length`, in monomial order.
    pub fn monomials(&self, max_length: usize) -> Vec<Monomial> {
        let rank = self.rank();
        let mut out = Vec::new();
        for len in 0..=max_length.min(rank) {
            for combo in (1..=rank).combinations(len) {
                out.push(Monomial::from_indices(&combo).expect("increasing combination"));
            }
        }
        out
    }

    /// Basis of the degree-`z` component among monomials of length `<= max_length`.
    pub fn component_basis(&self, z: i64, max_length: usize) -> Vec<Monomial> {
        self.monomials(max_length)
            .into_iter()
            .filter(|&w| self.degree_unchecked(w) == z)
            .collect()
    }

    pub fn is_homogeneous(&self, a: &Element) -> Result<Homogeneity, GradingError> {
        let mut degree = None;
        for (w, _) in a.terms() {
            let z = self.degree(*w)?;
            match degree {
                None => degree = Some(z),
                Some(prev) if prev != z => return Ok(Homogeneity::NotHomogeneous),
                _ => {}
            }
        }
        Ok(degree.map_or(Homogeneity::AllDegrees, Homogeneity::Degree))
    }

    /// Like [`is_homogeneous`](Self::is_homogeneous) for the `Z_d` quotient grading.
    pub fn is_quotient_homogeneous(
        &self,
        a: &Element,
        d: QuotientTag,
    ) -> Result<Homogeneity, GradingError> {
        let mut residue = None;
        for (w, _) in a.terms() {
            let r = self.quotient_degree(*w, d)? as i64;
            match residue {
                None => residue = Some(r),
                Some(prev) if prev != r => return Ok(Homogeneity::NotHomogeneous),
                _ => {}
            }
        }
        Ok(residue.map_or(Homogeneity::AllDegrees, Homogeneity::Degree))
    }
}
