//! Free Z- and Z_d-graded noncommutative polynomials.
//!
//! Text grammar, whitespace-insensitive between tokens:
//!
//! ```text
//! poly   := term (('+'|'-') term)*
//! term   := (rat '*')? factor+
//! factor := var | '[' poly (',' poly)+ ']'
//! var    := 'x' NAT '@' INT ('%' NAT)?
//! rat    := INT ('/' NAT)?
//! ```
//!
//! Brackets expand left-normed, `[p, q] = pq - qp`. The literal `0` parses to
//! the zero polynomial.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exterior::{Element, ExteriorError};
use crate::grading::{FiniteModel, GradingError, Homogeneity, QuotientTag, UpperIndex};
use crate::support::{gcd_all, variety_of, SupportError, VarietyTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeAlgError {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("mixed group tags: {0} and {1}")]
    MixedTags(GroupTag, GroupTag),
    #[error("expected a Z-graded polynomial")]
    NotOverZ,
    #[error("modulus must be at least 1, got {0}")]
    BadModulus(i64),
    #[error("scaling factor must be nonzero")]
    ZeroScale,
    #[error("grade {grade} is not a multiple of {d}")]
    NotInSubgroup { grade: i64, d: i64 },
    #[error("no value assigned to {0}")]
    MissingAssignment(GVar),
    #[error("inadmissible substitution for {var}: value is not homogeneous of its degree")]
    Inadmissible { var: GVar },
    #[error("assigned element has rank {found}, model has rank {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("invalid identity family: {0}")]
    InvalidFamily(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Grading(#[from] GradingError),
}

/// Grading group of a polynomial: Z, or Z_d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupTag {
    Z,
    Zd(u64),
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupTag::Z => write!(f, "Z"),
            GroupTag::Zd(d) => write!(f, "Z_{d}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Int(i64),
    /// Residue `r` modulo `d`, `0 <= r < d`.
    Res {
        r: u64,
        d: u64,
    },
}

impl Grade {
    pub fn residue(r: i64, d: u64) -> Result<Self, FreeAlgError> {
        if d == 0 {
            return Err(FreeAlgError::BadModulus(0));
        }
        Ok(Grade::Res {
            r: r.rem_euclid(d as i64) as u64,
            d,
        })
    }

    pub fn tag(self) -> GroupTag {
        match self {
            Grade::Int(_) => GroupTag::Z,
            Grade::Res { d, .. } => GroupTag::Zd(d),
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grade::Int(z) => write!(f, "{z}"),
            Grade::Res { r, d } => write!(f, "{r}%{d}"),
        }
    }
}

/// Graded variable `x_id` of the given grade. Variables with equal ids and
/// different grades are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GVar {
    pub id: u32,
    pub grade: Grade,
}

impl GVar {
    pub fn int(id: u32, z: i64) -> Self {
        GVar {
            id,
            grade: Grade::Int(z),
        }
    }

    pub fn res(id: u32, r: i64, d: u64) -> Result<Self, FreeAlgError> {
        Ok(GVar {
            id,
            grade: Grade::residue(r, d)?,
        })
    }
}

impl fmt::Display for GVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}@{}", self.id, self.grade)
    }
}

pub type Word = Vec<GVar>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedPolynomial {
    terms: BTreeMap<Word, BigRational>,
}

impl GradedPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(v: GVar) -> Self {
        Self::word(vec![v])
    }

    pub fn word(w: Word) -> Self {
        let mut p = Self::zero();
        p.terms.insert(w, BigRational::one());
        p
    }

    /// Builds a polynomial, merging repeated words and checking group tags.
    pub fn from_terms<I>(terms: I) -> Result<Self, FreeAlgError>
    where
        I: IntoIterator<Item = (Word, BigRational)>,
    {
        let mut p = Self::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p.group_tag()?;
        Ok(p)
    }

    fn add_term(&mut self, w: Word, c: BigRational) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn variables(&self) -> BTreeSet<GVar> {
        self.terms.keys().flatten().copied().collect()
    }

    /// Length of the longest word.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Common group tag of all variables, `None` for polynomials without
    /// variables.
    pub fn group_tag(&self) -> Result<Option<GroupTag>, FreeAlgError> {
        let mut tag = None;
        for v in self.terms.keys().flatten() {
            let t = v.grade.tag();
            match tag {
                None => tag = Some(t),
                Some(prev) if prev != t => return Err(FreeAlgError::MixedTags(prev, t)),
                _ => {}
            }
        }
        Ok(tag)
    }

    /// Every word contains every variable of the polynomial exactly once.
    pub fn is_multilinear(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        let vars = self.variables();
        self.terms.keys().all(|w| {
            w.len() == vars.len() && w.iter().copied().collect::<BTreeSet<_>>().len() == w.len()
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (w, c) in &other.terms {
            p.add_term(w.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        GradedPolynomial {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                p.add_term(w, c1 * c2);
            }
        }
        p
    }

    /// Left-normed commutator `[p1, p2, ..., pn]`.
    pub fn commutator(args: &[GradedPolynomial]) -> Self {
        let mut iter = args.iter();
        let mut acc = iter.next().cloned().unwrap_or_default();
        for q in iter {
            acc = acc.mul(q).sub(&q.mul(&acc));
        }
        acc
    }

    pub fn anticommutator(p: &Self, q: &Self) -> Self {
        p.mul(q).add(&q.mul(p))
    }

    /// Substitutes each variable by another variable.
    pub fn rename(&self, f: impl Fn(GVar) -> GVar) -> Self {
        let mut p = Self::zero();
        for (w, c) in &self.terms {
            p.add_term(w.iter().map(|&v| f(v)).collect(), c.clone());
        }
        p
    }

    fn try_rename(
        &self,
        f: impl Fn(GVar) -> Result<GVar, FreeAlgError>,
    ) -> Result<Self, FreeAlgError> {
        let mut p = Self::zero();
        for (w, c) in &self.terms {
            let w = w.iter().map(|&v| f(v)).collect::<Result<Word, _>>()?;
            p.add_term(w, c.clone());
        }
        Ok(p)
    }

    pub fn parse(text: &str) -> Result<Self, FreeAlgError> {
        Parser::new(text).parse_all()
    }
}

impl FromStr for GradedPolynomial {
    type Err = FreeAlgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = c.abs();
            if !abs.is_one() || w.is_empty() {
                write!(f, "{abs}")?;
                if !w.is_empty() {
                    write!(f, "*")?;
                }
            }
            for (j, v) in w.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for GradedPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GradedPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Self::parse(&text).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FreeAlgError> {
        Err(FreeAlgError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), FreeAlgError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn nat(&mut self) -> Result<BigInt, FreeAlgError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digit string"))
    }

    fn small_nat(&mut self) -> Result<u64, FreeAlgError> {
        let start = self.pos;
        let n = self.nat()?;
        u64::try_from(n).or_else(|_| {
            self.pos = start;
            self.err("number too large")
        })
    }

    fn int(&mut self) -> Result<i64, FreeAlgError> {
        let negative = self.eat(b'-');
        let start = self.pos;
        let n = self.nat()?;
        let n = if negative { -n } else { n };
        i64::try_from(n).or_else(|_| {
            self.pos = start;
            self.err("number too large")
        })
    }

    fn parse_all(mut self) -> Result<GradedPolynomial, FreeAlgError> {
        if self.peek() == Some(b'0') {
            let save = self.pos;
            self.pos += 1;
            if self.peek().is_none() {
                return Ok(GradedPolynomial::zero());
            }
            self.pos = save;
        }
        let p = self.poly()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        p.group_tag()?;
        Ok(p)
    }

    fn poly(&mut self) -> Result<GradedPolynomial, FreeAlgError> {
        let mut negative = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let mut acc = GradedPolynomial::zero();
        loop {
            let t = self.term()?;
            acc = if negative { acc.sub(&t) } else { acc.add(&t) };
            if self.eat(b'+') {
                negative = false;
            } else if self.eat(b'-') {
                negative = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<GradedPolynomial, FreeAlgError> {
        let mut coeff = BigRational::one();
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let num = self.nat()?;
            let den = if self.eat(b'/') {
                self.nat()?
            } else {
                BigInt::one()
            };
            if den.is_zero() {
                return self.err("zero denominator");
            }
            coeff = BigRational::new(num, den);
            self.expect(b'*')?;
        }
        let mut acc = GradedPolynomial::word(Vec::new()).scale(&coeff);
        let mut any = false;
        while matches!(self.peek(), Some(b'x') | Some(b'[')) {
            acc = acc.mul(&self.factor()?);
            any = true;
        }
        if !any {
            return self.err("expected a variable or a bracket");
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GradedPolynomial, FreeAlgError> {
        if self.eat(b'[') {
            let mut args = vec![self.poly()?];
            while self.eat(b',') {
                args.push(self.poly()?);
            }
            if args.len() < 2 {
                return self.err("a bracket needs at least two entries");
            }
            self.expect(b']')?;
            return Ok(GradedPolynomial::commutator(&args));
        }
        self.expect(b'x')?;
        let id_pos = self.pos;
        let id = self.small_nat()?;
        let id = u32::try_from(id).or_else(|_| {
            self.pos = id_pos;
            self.err("variable index too large")
        })?;
        if id == 0 {
            self.pos = id_pos;
            return self.err("variable indices start at 1");
        }
        self.expect(b'@')?;
        let z = self.int()?;
        let grade = if self.eat(b'%') {
            let d_pos = self.pos;
            let d = self.small_nat()?;
            if d == 0 {
                self.pos = d_pos;
                return self.err("modulus must be positive");
            }
            Grade::residue(z, d)?
        } else {
            Grade::Int(z)
        };
        Ok(GradedPolynomial::var(GVar { id, grade }))
    }
}

fn require_z(p: &GradedPolynomial) -> Result<(), FreeAlgError> {
    match p.group_tag()? {
        None | Some(GroupTag::Z) => Ok(()),
        Some(_) => Err(FreeAlgError::NotOverZ),
    }
}

/// Reduces every grade modulo `d`.
pub fn pi_d(p: &GradedPolynomial, d: i64) -> Result<GradedPolynomial, FreeAlgError> {
    require_z(p)?;
    if d < 1 {
        return Err(FreeAlgError::BadModulus(d));
    }
    p.try_rename(|v| match v.grade {
        Grade::Int(z) => GVar::res(v.id, z, d as u64),
        Grade::Res { .. } => Err(FreeAlgError::NotOverZ),
    })
}

/// Multiplies every grade by `d`.
pub fn phi_d(p: &GradedPolynomial, d: i64) -> Result<GradedPolynomial, FreeAlgError> {
    require_z(p)?;
    if d == 0 {
        return Err(FreeAlgError::ZeroScale);
    }
    p.try_rename(|v| match v.grade {
        Grade::Int(z) => Ok(GVar::int(v.id, z * d)),
        Grade::Res { .. } => Err(FreeAlgError::NotOverZ),
    })
}

/// Inclusion of `dZ`-graded polynomials into Z-graded ones.
pub fn psi_d(p: &GradedPolynomial, d: i64) -> Result<GradedPolynomial, FreeAlgError> {
    require_z(p)?;
    if d == 0 {
        return Err(FreeAlgError::ZeroScale);
    }
    for v in p.variables() {
        if let Grade::Int(z) = v.grade {
            if z % d != 0 {
                return Err(FreeAlgError::NotInSubgroup { grade: z, d });
            }
        }
    }
    Ok(p.clone())
}

/// Whether `value` may be substituted for `var` in `model`.
pub fn admissible(var: GVar, value: &Element, model: &FiniteModel) -> Result<bool, FreeAlgError> {
    let h = match var.grade {
        Grade::Int(z) => (model.is_homogeneous(value)?, z),
        Grade::Res { r, d } => (
            model.is_quotient_homogeneous(value, QuotientTag::new(d as i64)?)?,
            r as i64,
        ),
    };
    Ok(match h {
        (Homogeneity::AllDegrees, _) => true,
        (Homogeneity::Degree(z), want) => z == want,
        (Homogeneity::NotHomogeneous, _) => false,
    })
}

/// Value of `p` under an admissible substitution into `model`.
pub fn evaluate(
    p: &GradedPolynomial,
    assignment: &BTreeMap<GVar, Element>,
    model: &FiniteModel,
) -> Result<Element, FreeAlgError> {
    let rank = model.rank();
    for v in p.variables() {
        let value = assignment
            .get(&v)
            .ok_or(FreeAlgError::MissingAssignment(v))?;
        if value.rank() != rank {
            return Err(FreeAlgError::RankMismatch {
                expected: rank,
                found: value.rank(),
            });
        }
        if !admissible(v, value, model)? {
            return Err(FreeAlgError::Inadmissible { var: v });
        }
    }
    let mut total = Element::zero(rank)?;
    for (w, c) in p.terms() {
        let mut prod = Element::scalar(rank, c.clone())?;
        for v in w {
            prod = prod.mul(&assignment[v])?;
            if prod.is_zero() {
                break;
            }
        }
        total = total.add(&prod)?;
    }
    Ok(total)
}

/// A family of graded identities whose instances can be enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum IdentityFamily {
    Variety {
        tag: VarietyTag,
    },
    /// `Psi_d(Phi_d(S))` for the instances `S` of `base`, together with the
    /// single variables of grade outside `<d>`.
    Scaled {
        base: VarietyTag,
        d: u64,
    },
}

fn x(id: u32, z: i64) -> GradedPolynomial {
    GradedPolynomial::var(GVar::int(id, z))
}

fn pair_identity(g1: i64, g2: i64, commute: bool) -> GradedPolynomial {
    if commute {
        GradedPolynomial::commutator(&[x(1, g1), x(2, g2)])
    } else {
        GradedPolynomial::anticommutator(&x(1, g1), &x(2, g2))
    }
}

fn pair_identities(
    window: i64,
    commute: impl Fn(i64, i64) -> bool,
    out: &mut Vec<GradedPolynomial>,
) {
    for g1 in -window..=window {
        for g2 in g1..=window {
            out.push(pair_identity(g1, g2, commute(g1, g2)));
        }
    }
}

/// `r` in `[1, d - 1]` with `r c = g (mod d)`, or `None` for `g` in `<d>`.
fn c_residue(g: i64, c: i64, d: i64) -> Option<i64> {
    (1..d).find(|r| (r * c - g).rem_euclid(d) == 0)
}

/// Monomials `u_1 ... u_alpha` with nondecreasing grades outside `<d>` whose
/// residues `r_i` sum past `k`.
fn long_monomials(
    c: i64,
    d: i64,
    k: u64,
    degree_bound: usize,
    window: i64,
    out: &mut Vec<GradedPolynomial>,
) {
    let grades: Vec<(i64, i64)> = (-window..=window)
        .filter_map(|g| c_residue(g, c, d).map(|r| (g, r)))
        .collect();
    fn rec(
        grades: &[(i64, i64)],
        start: usize,
        word: &mut Vec<GVar>,
        rsum: i64,
        k: i64,
        degree_bound: usize,
        out: &mut Vec<GradedPolynomial>,
    ) {
        if !word.is_empty() && rsum > k {
            out.push(GradedPolynomial::word(word.clone()));
        }
        if word.len() == degree_bound {
            return;
        }
        for i in start..grades.len() {
            let (g, r) = grades[i];
            word.push(GVar::int(word.len() as u32 + 1, g));
            rec(grades, i, word, rsum + r, k, degree_bound, out);
            word.pop();
        }
    }
    rec(&grades, 0, &mut Vec::new(), 0, k as i64, degree_bound, out);
}

fn validate_case_b(tag: VarietyTag) -> Result<(i64, i64, i64, u64, i64), FreeAlgError> {
    let (a, b, c, k) = match tag {
        VarietyTag::V1 { a, b, c, k } | VarietyTag::V2 { a, b, c, k } => (a, b, c, k),
        _ => unreachable!("only called for case-B families"),
    };
    match variety_of(a, b, c, UpperIndex::Finite(k)) {
        Ok(t) if t == tag => {}
        Ok(t) => {
            return Err(FreeAlgError::InvalidFamily(format!(
                "(a, b, c, k) = ({a}, {b}, {c}, {k}) generates {t}, not {tag}"
            )))
        }
        Err(e @ SupportError::NotFullSupport { .. }) | Err(e @ SupportError::Precondition(_)) => {
            return Err(FreeAlgError::InvalidFamily(e.to_string()))
        }
        Err(e) => return Err(FreeAlgError::InvalidFamily(e.to_string())),
    }
    let d = gcd_all([a, b]) as i64;
    if (k as i64) < d - 1 {
        return Err(FreeAlgError::InvalidFamily(format!(
            "need k >= d - 1 = {}",
            d - 1
        )));
    }
    Ok((a, b, c, k, d))
}

/// Instances of `family` of degree at most `degree_bound` with every grade in
/// `[-window, window]`.
///
/// Pairs are emitted once with `g1 <= g2`, triple commutators with
/// `g1 <= g2`, and monomials with nondecreasing grades: the omitted instances
/// differ from emitted ones by a relabelling of variables or by a sign under
/// every substitution.
pub fn gen_identities(
    family: &IdentityFamily,
    degree_bound: usize,
    window: i64,
) -> Result<Vec<GradedPolynomial>, FreeAlgError> {
    let window = window.max(0);
    let mut out = Vec::new();
    match *family {
        IdentityFamily::Variety { tag } => match tag {
            VarietyTag::V101 { .. } | VarietyTag::V102 { .. } => {
                return Err(FreeAlgError::InvalidFamily(format!(
                    "{tag} is defined through an external Z_2 basis and has no generator list"
                )))
            }
            VarietyTag::Can => {
                if degree_bound >= 2 {
                    pair_identities(window, |g1, g2| g1 % 2 == 0 || g2 % 2 == 0, &mut out);
                }
            }
            VarietyTag::V1 { .. } => {
                let (_, _, c, k, d) = validate_case_b(tag)?;
                if degree_bound >= 3 {
                    for g1 in -window..=window {
                        for g2 in g1..=window {
                            for g3 in -window..=window {
                                out.push(GradedPolynomial::commutator(&[
                                    x(1, g1),
                                    x(2, g2),
                                    x(3, g3),
                                ]));
                            }
                        }
                    }
                }
                long_monomials(c, d, k, degree_bound, window, &mut out);
            }
            VarietyTag::V2 { .. } => {
                let (_, _, c, k, d) = validate_case_b(tag)?;
                // g = alpha d + beta c with beta in [0, d - 1]
                let central = |g: i64| {
                    let beta = (0..d).find(|b| (g - b * c).rem_euclid(d) == 0).unwrap_or(0);
                    let alpha = (g - beta * c) / d;
                    (alpha - beta).rem_euclid(2) == 0
                };
                if degree_bound >= 2 {
                    pair_identities(window, |g1, g2| central(g1) || central(g2), &mut out);
                }
                long_monomials(c, d, k, degree_bound, window, &mut out);
            }
        },
        IdentityFamily::Scaled { base, d } => {
            if d == 0 {
                return Err(FreeAlgError::ZeroScale);
            }
            let d = d as i64;
            let base_family = IdentityFamily::Variety { tag: base };
            for f in gen_identities(&base_family, degree_bound, window / d)? {
                out.push(psi_d(&phi_d(&f, d)?, d)?);
            }
            if degree_bound >= 1 {
                for g in (-window..=window).filter(|g| g % d != 0) {
                    out.push(x(1, g));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Monomial;
    use crate::grading::GradingSpec;
    use proptest::prelude::*;

    fn p(text: &str) -> GradedPolynomial {
        GradedPolynomial::parse(text).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn parse_commutator_text() {
        let f = p("x1@2 x2@-1 - x2@-1 x1@2");
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f, p("[x1@2, x2@-1]"));
        assert!(f.is_multilinear());
        assert_eq!(f.group_tag().unwrap(), Some(GroupTag::Z));
    }

    #[test]
    fn bracket_sugar_is_left_normed() {
        let f = p("[x1@0, x2@0, x3@0]");
        assert_eq!(f.num_terms(), 4);
        let inner = p("x1@0 x2@0 - x2@0 x1@0");
        let expected = inner.mul(&p("x3@0")).sub(&p("x3@0").mul(&inner));
        assert_eq!(f, expected);
    }

    #[test]
    fn parse_residue_grades() {
        let f = p("x1@1%2 x2@1%2 + x2@1%2 x1@1%2");
        assert_eq!(f.group_tag().unwrap(), Some(GroupTag::Zd(2)));
        assert_eq!(p("x1@-1%3"), p("x1@2%3"));
        assert!(matches!(
            GradedPolynomial::parse("x1@1%2 x2@1%3"),
            Err(FreeAlgError::MixedTags(..))
        ));
        assert!(matches!(
            GradedPolynomial::parse("x1@1 x2@1%3"),
            Err(FreeAlgError::MixedTags(..))
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        match GradedPolynomial::parse("x1@2 + y") {
            Err(FreeAlgError::Parse { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        assert!(GradedPolynomial::parse("[x1@0]").is_err());
        assert!(GradedPolynomial::parse("x0@1").is_err());
        assert!(GradedPolynomial::parse("x1@1%0").is_err());
        assert!(GradedPolynomial::parse("2 x1@1").is_err());
        assert!(GradedPolynomial::parse("").is_err());
    }

    #[test]
    fn coefficients_and_format() {
        let f = p("-3/2*x1@1 x2@0 + 2*x2@0 x1@1 - x1@1 x2@0");
        assert_eq!(f.to_string(), "-5/2*x1@1 x2@0 + 2*x2@0 x1@1");
        assert_eq!(p(&f.to_string()), f);
        assert!(p("x1@1 - x1@1").is_zero());
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p("x1@1 x1@1").degree(), 2);
        assert!(!p("x1@1 x1@1").is_multilinear());
        assert!(!p("x1@1 + x2@1").is_multilinear());
    }

    #[test]
    fn pi_examples() {
        assert_eq!(pi_d(&p("x1@3 x2@4"), 2).unwrap(), p("x1@1%2 x2@0%2"));
        assert_eq!(pi_d(&p("x1@-3"), 3).unwrap(), p("x1@0%3"));
        assert_eq!(pi_d(&p("[x1@5, x2@-7]"), 1).unwrap(), p("[x1@0%1, x2@0%1]"));
        // equal ids with congruent grades collide
        assert_eq!(
            pi_d(&p("x1@1 - x1@3"), 2).unwrap(),
            GradedPolynomial::zero()
        );
        assert!(pi_d(&p("x1@1%2"), 2).is_err());
        assert!(pi_d(&p("x1@1"), 0).is_err());
    }

    #[test]
    fn phi_psi_examples() {
        assert_eq!(phi_d(&p("x1@2"), 3).unwrap(), p("x1@6"));
        let f = p("[x1@-1, x2@1]");
        assert_eq!(phi_d(&f, 1).unwrap(), f);
        assert_eq!(phi_d(&f, 2).unwrap(), p("[x1@-2, x2@2]"));
        assert_eq!(phi_d(&f, 0).unwrap_err(), FreeAlgError::ZeroScale);
        assert_eq!(psi_d(&p("x1@4"), 2).unwrap(), p("x1@4"));
        assert_eq!(
            psi_d(&p("x1@3"), 2).unwrap_err(),
            FreeAlgError::NotInSubgroup { grade: 3, d: 2 }
        );
    }

    fn model(lower: &[i64], upper: &[UpperIndex], counts: &[usize]) -> FiniteModel {
        let spec = GradingSpec::new(lower.to_vec(), upper.to_vec()).unwrap();
        FiniteModel::build(spec, counts.to_vec()).unwrap()
    }

    const INF: UpperIndex = UpperIndex::Infinity;

    #[test]
    fn evaluate_examples() {
        let m = model(&[-1, 0, 1], &[INF, UpperIndex::Finite(2), INF], &[1, 2, 1]);
        let rank = m.rank();
        let (ea, eb) = (
            Element::generator(rank, 2).unwrap(),
            Element::generator(rank, 3).unwrap(),
        );
        let f = p("[x1@0, x2@0]");
        let mut asg = BTreeMap::new();
        asg.insert(GVar::int(1, 0), ea.clone());
        asg.insert(GVar::int(2, 0), eb.clone());
        let value = evaluate(&f, &asg, &m).unwrap();
        let expected = ea.mul(&eb).unwrap().scale(&rat(2));
        assert_eq!(value, expected);

        let zero = Element::zero(rank).unwrap();
        let all_zero: BTreeMap<_, _> = f
            .variables()
            .into_iter()
            .map(|v| (v, zero.clone()))
            .collect();
        assert!(evaluate(&f, &all_zero, &m).unwrap().is_zero());

        // supercommutativity on odd-length monomials
        let g = p("x1@1 x2@1 + x2@1 x1@1");
        let m1 = Element::monomial(rank, Monomial::from_indices(&[4]).unwrap()).unwrap();
        let m2 = Element::monomial(rank, Monomial::from_indices(&[2, 3, 4]).unwrap()).unwrap();
        let mut asg = BTreeMap::new();
        asg.insert(GVar::int(1, 1), m1.clone());
        asg.insert(GVar::int(2, 1), m2);
        assert!(evaluate(&g, &asg, &m).unwrap().is_zero());

        // degree mismatch is an error
        asg.insert(GVar::int(2, 1), ea);
        assert!(matches!(
            evaluate(&g, &asg, &m),
            Err(FreeAlgError::Inadmissible { .. })
        ));
        asg.remove(&GVar::int(2, 1));
        assert!(matches!(
            evaluate(&g, &asg, &m),
            Err(FreeAlgError::MissingAssignment(_))
        ));
    }

    #[test]
    fn evaluate_residue_variables() {
        let m = model(&[-1, 0, 1], &[INF, UpperIndex::Finite(2), INF], &[1, 2, 1]);
        let rank = m.rank();
        let f = p("x1@1%2");
        let mut asg = BTreeMap::new();
        asg.insert(
            GVar::res(1, 1, 2).unwrap(),
            Element::generator(rank, 1).unwrap(),
        );
        assert!(!evaluate(&f, &asg, &m).unwrap().is_zero());
        asg.insert(
            GVar::res(1, 1, 2).unwrap(),
            Element::generator(rank, 2).unwrap(),
        );
        assert!(evaluate(&f, &asg, &m).is_err());
    }

    fn contains(list: &[GradedPolynomial], text: &str) -> bool {
        let f = p(text);
        list.contains(&f)
    }

    #[test]
    fn gen_can() {
        let fam = IdentityFamily::Variety {
            tag: VarietyTag::Can,
        };
        let list = gen_identities(&fam, 2, 6).unwrap();
        assert!(contains(&list, "[x1@2, x2@5]"));
        assert!(contains(&list, "x1@3 x2@5 + x2@5 x1@3"));
        assert!(!contains(&list, "[x1@3, x2@5]"));
        assert_eq!(list.len(), 13 * 14 / 2);
        assert!(gen_identities(&fam, 1, 6).unwrap().is_empty());
    }

    #[test]
    fn gen_v1_monomials() {
        let tag = VarietyTag::V1 {
            a: 20,
            b: 6,
            c: 15,
            k: 1,
        };
        let list = gen_identities(&IdentityFamily::Variety { tag }, 3, 3).unwrap();
        assert!(!contains(&list, "x1@15 x2@15"));
        assert!(contains(&list, "x1@1 x2@3"));
        assert!(contains(&list, "x1@-3 x2@-1 x3@1"));
        assert!(!contains(&list, "x1@1"));
        assert!(!contains(&list, "x1@2 x2@3"));
        assert!(contains(&list, "[x1@0, x2@2, x3@-3]"));
        let wide = gen_identities(&IdentityFamily::Variety { tag }, 2, 15).unwrap();
        assert!(contains(&wide, "x1@15 x2@15"));
    }

    #[test]
    fn gen_v2_parity_rule() {
        let tag = VarietyTag::V2 {
            a: 6,
            b: 10,
            c: 3,
            k: 1,
        };
        let list = gen_identities(&IdentityFamily::Variety { tag }, 2, 4).unwrap();
        // 0 = 0*2 + 0*3 central, 3 = 0*2 + 1*3 anti, 1 = -1*2 + 1*3 central
        assert!(contains(&list, "[x1@0, x2@3]"));
        assert!(contains(&list, "x1@3 x2@3 + x2@3 x1@3"));
        assert!(contains(&list, "[x1@1, x2@3]"));
        assert!(contains(&list, "x1@2 x2@3 + x2@3 x1@2"));
        assert!(contains(&list, "x1@1 x2@3"));
    }

    #[test]
    fn gen_rejects_invalid_families() {
        let bad = VarietyTag::V2 {
            a: 6,
            b: 10,
            c: 3,
            k: 0,
        };
        assert!(gen_identities(&IdentityFamily::Variety { tag: bad }, 3, 3).is_err());
        let wrong = VarietyTag::V1 {
            a: 6,
            b: 10,
            c: 3,
            k: 1,
        };
        assert!(gen_identities(&IdentityFamily::Variety { tag: wrong }, 3, 3).is_err());
        let opaque = VarietyTag::V101 {
            k: UpperIndex::Finite(2),
        };
        assert!(gen_identities(&IdentityFamily::Variety { tag: opaque }, 3, 3).is_err());
    }

    #[test]
    fn gen_scaled() {
        let fam = IdentityFamily::Scaled {
            base: VarietyTag::Can,
            d: 2,
        };
        let list = gen_identities(&fam, 2, 6).unwrap();
        assert!(contains(&list, "x1@3"));
        assert!(contains(&list, "[x1@2, x2@4]"));
        assert!(contains(&list, "x1@2 x2@6 + x2@6 x1@2"));
        assert!(!contains(&list, "x1@4"));
        for f in &list {
            if f.degree() > 1 {
                assert!(f
                    .variables()
                    .iter()
                    .all(|v| matches!(v.grade, Grade::Int(z) if z % 2 == 0)));
            }
        }
    }

    #[test]
    fn emitted_instances_are_multilinear() {
        let fams = [
            IdentityFamily::Variety {
                tag: VarietyTag::Can,
            },
            IdentityFamily::Variety {
                tag: VarietyTag::V1 {
                    a: 20,
                    b: 6,
                    c: 15,
                    k: 2,
                },
            },
            IdentityFamily::Variety {
                tag: VarietyTag::V2 {
                    a: 6,
                    b: 10,
                    c: 3,
                    k: 1,
                },
            },
            IdentityFamily::Scaled {
                base: VarietyTag::Can,
                d: 3,
            },
        ];
        for fam in fams {
            for f in gen_identities(&fam, 4, 4).unwrap() {
                assert!(f.is_multilinear(), "{f}");
            }
        }
    }

    fn arb_poly() -> impl Strategy<Value = GradedPolynomial> {
        let var = (1u32..4, -6i64..6).prop_map(|(id, z)| GVar::int(id, z));
        let word = prop::collection::vec(var, 1..4);
        let term = (word, -5i64..6, 1i64..4)
            .prop_map(|(w, n, d)| (w, BigRational::new(n.into(), d.into())));
        prop::collection::vec(term, 0..4)
            .prop_map(|terms| GradedPolynomial::from_terms(terms).unwrap())
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(f in arb_poly()) {
            prop_assert_eq!(GradedPolynomial::parse(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn pi_is_multiplicative(f in arb_poly(), g in arb_poly(), d in 1i64..6) {
            let lhs = pi_d(&f.mul(&g), d).unwrap();
            let rhs = pi_d(&f, d).unwrap().mul(&pi_d(&g, d).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn psi_after_phi_scales_grades(f in arb_poly(), d in prop_oneof![-4i64..0, 1i64..5]) {
            let scaled = psi_d(&phi_d(&f, d).unwrap(), d).unwrap();
            let expected = f.rename(|v| match v.grade {
                Grade::Int(z) => GVar::int(v.id, z * d),
                g => GVar { id: v.id, grade: g },
            });
            prop_assert_eq!(scaled.num_terms(), f.num_terms());
            prop_assert_eq!(scaled, expected);
        }
    }
}
