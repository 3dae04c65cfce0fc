//! Exact arithmetic in the Grassmann algebra on generators `e_1, ..., e_m`.
//!
//! Basis monomials are packed bit-sets (bit `i - 1` stands for `e_i`), so the
//! rank of a model is capped at [`MAX_RANK`]. Coefficients are arbitrary
//! precision rationals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Largest supported number of generators.
pub const MAX_RANK: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExteriorError {
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("generator index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("rank {0} exceeds the supported maximum of {MAX_RANK}")]
    RankTooLarge(usize),
    #[error("generator indices must be strictly increasing and positive")]
    NotCanonical,
    #[error("commutator needs at least two arguments, got {0}")]
    TooFewArguments(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn to_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u64) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

/// A basis monomial `e_{i_1} ... e_{i_k}` with `i_1 < ... < i_k`.
///
/// Ordered by length first, then lexicographically on the index sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_bits(bits: u64) -> Self {
        Monomial(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn generator(index: usize) -> Result<Self, ExteriorError> {
        if index == 0 || index > MAX_RANK {
            return Err(ExteriorError::IndexOutOfRange {
                index,
                rank: MAX_RANK,
            });
        }
        Ok(Monomial(1u64 << (index - 1)))
    }

    /// Builds a monomial from a strictly increasing list of 1-based indices.
    pub fn from_indices(indices: &[usize]) -> Result<Self, ExteriorError> {
        let mut bits = 0u64;
        let mut last = 0usize;
        for &i in indices {
            if i <= last {
                return Err(ExteriorError::NotCanonical);
            }
            if i > MAX_RANK {
                return Err(ExteriorError::IndexOutOfRange {
                    index: i,
                    rank: MAX_RANK,
                });
            }
            bits |= 1u64 << (i - 1);
            last = i;
        }
        Ok(Monomial(bits))
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(tz + 1)
            }
        })
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Largest generator index, 0 for the unit.
    pub fn max_index(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn is_disjoint(self, other: Monomial) -> bool {
        self.0 & other.0 == 0
    }

    pub fn parity(self) -> Parity {
        length_parity(self)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.len().cmp(&other.len()) {
            Ordering::Equal => {
                let diff = self.0 ^ other.0;
                if diff == 0 {
                    Ordering::Equal
                } else if self.0 & (diff & diff.wrapping_neg()) != 0 {
                    // the smallest index where the sorted sequences differ is ours
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            o => o,
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for i in self.indices() {
            write!(f, "e{i}")?;
        }
        Ok(())
    }
}

/// Number of pairs `(i, j)` with `i` in `left`, `j` in `right` and `i > j`.
pub fn inversions(left: Monomial, right: Monomial) -> u32 {
    let mut count = 0;
    for j in right.indices() {
        // bits of `left` strictly above generator j (bit j - 1)
        count += left.0.checked_shr(j as u32).unwrap_or(0).count_ones();
    }
    count
}

/// Product of two basis monomials: `None` when the supports overlap.
pub fn mono_mul(w1: Monomial, w2: Monomial) -> Option<(Sign, Monomial)> {
    if !w1.is_disjoint(w2) {
        return None;
    }
    let sign = Sign::from_parity(inversions(w1, w2) % 2 == 1);
    Some((sign, Monomial(w1.0 | w2.0)))
}

pub fn length_parity(w: Monomial) -> Parity {
    Parity::of(w.len() as u64)
}

/// A finite linear combination of basis monomials over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    rank: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Element {
    pub fn zero(rank: usize) -> Result<Self, ExteriorError> {
        check_rank(rank)?;
        Ok(Element {
            rank,
            terms: BTreeMap::new(),
        })
    }

    pub fn one(rank: usize) -> Result<Self, ExteriorError> {
        Self::scalar(rank, BigRational::one())
    }

    pub fn scalar(rank: usize, value: BigRational) -> Result<Self, ExteriorError> {
        Self::from_term(rank, Monomial::ONE, value)
    }

    pub fn generator(rank: usize, index: usize) -> Result<Self, ExteriorError> {
        if index == 0 || index > rank {
            return Err(ExteriorError::IndexOutOfRange { index, rank });
        }
        Self::monomial(rank, Monomial::generator(index)?)
    }

    pub fn monomial(rank: usize, w: Monomial) -> Result<Self, ExteriorError> {
        Self::from_term(rank, w, BigRational::one())
    }

    pub fn from_term(rank: usize, w: Monomial, coeff: BigRational) -> Result<Self, ExteriorError> {
        let mut e = Self::zero(rank)?;
        if w.max_index() > rank {
            return Err(ExteriorError::IndexOutOfRange {
                index: w.max_index(),
                rank,
            });
        }
        if !coeff.is_zero() {
            e.terms.insert(w, coeff);
        }
        Ok(e)
    }

    pub fn from_terms<I>(rank: usize, terms: I) -> Result<Self, ExteriorError>
    where
        I: IntoIterator<Item = (Monomial, BigRational)>,
    {
        let mut e = Self::zero(rank)?;
        for (w, c) in terms {
            if w.max_index() > rank {
                return Err(ExteriorError::IndexOutOfRange {
                    index: w.max_index(),
                    rank,
                });
            }
            e.add_term(w, c);
        }
        Ok(e)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: Monomial) -> BigRational {
        self.terms
            .get(&w)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, w: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    fn same_rank(&self, other: &Element) -> Result<(), ExteriorError> {
        if self.rank != other.rank {
            Err(ExteriorError::RankMismatch {
                left: self.rank,
                right: other.rank,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element, ExteriorError> {
        self.same_rank(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(*w, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Element) -> Result<Element, ExteriorError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Element {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, s: &BigRational) -> Element {
        if s.is_zero() {
            return Element {
                rank: self.rank,
                terms: BTreeMap::new(),
            };
        }
        Element {
            rank: self.rank,
            terms: self.terms.iter().map(|(w, c)| (*w, c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Element) -> Result<Element, ExteriorError> {
        self.same_rank(other)?;
        let mut out = Element {
            rank: self.rank,
            terms: BTreeMap::new(),
        };
        for (u, cu) in &self.terms {
            for (v, cv) in &other.terms {
                if let Some((sign, w)) = mono_mul(*u, *v) {
                    let c = cu * cv;
                    out.add_term(w, if sign == Sign::Minus { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Parses the textual rendering produced by `Display`, e.g. `2*e1e2 - 1/3*e3`.
    pub fn parse(text: &str, rank: usize) -> Result<Element, ExteriorError> {
        ElementParser::new(text, rank).parse()
    }
}

fn check_rank(rank: usize) -> Result<(), ExteriorError> {
    if rank > MAX_RANK {
        Err(ExteriorError::RankTooLarge(rank))
    } else {
        Ok(())
    }
}

/// `[a, b] = ab - ba`, extended left-normed: `[a_1, ..., a_n] = [[a_1, ..., a_{n-1}], a_n]`.
pub fn commutator(args: &[Element]) -> Result<Element, ExteriorError> {
    if args.len() < 2 {
        return Err(ExteriorError::TooFewArguments(args.len()));
    }
    let mut acc = args[0].clone();
    for next in &args[1..] {
        acc = acc.mul(next)?.sub(&next.mul(&acc)?)?;
    }
    Ok(acc)
}

pub fn anticommutator(a: &Element, b: &Element) -> Result<Element, ExteriorError> {
    a.mul(b)?.add(&b.mul(a)?)
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (w, c)) in self.terms.iter().enumerate() {
            let magnitude = c.abs();
            match (pos, c.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if w.is_empty() {
                write_rational(f, &magnitude)?;
            } else if magnitude.is_one() {
                write!(f, "{w}")?;
            } else {
                write_rational(f, &magnitude)?;
                write!(f, "*{w}")?;
            }
        }
        Ok(())
    }
}

struct ElementParser<'a> {
    src: &'a [u8],
    pos: usize,
    rank: usize,
}

impl<'a> ElementParser<'a> {
    fn new(text: &'a str, rank: usize) -> Self {
        ElementParser {
            src: text.as_bytes(),
            pos: 0,
            rank,
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T, ExteriorError> {
        Err(ExteriorError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn number(&mut self) -> Result<BigInt, ExteriorError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse as BigInt"))
    }

    fn parse(mut self) -> Result<Element, ExteriorError> {
        let mut out = Element::zero(self.rank)?;
        if self.peek() == Some(b'0') {
            let save = self.pos;
            self.pos += 1;
            if self.peek().is_none() {
                return Ok(out);
            }
            self.pos = save;
        }
        let mut first = true;
        loop {
            let negative = match self.peek() {
                Some(b'+') if !first => {
                    self.pos += 1;
                    false
                }
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                None if !first => break,
                None => return self.err("empty element"),
                _ if first => false,
                _ => return self.err("expected '+' or '-'"),
            };
            let (w, c) = self.term()?;
            out.add_term(w, if negative { -c } else { c });
            first = false;
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Monomial, BigRational), ExteriorError> {
        let mut coeff = BigRational::one();
        let mut has_coeff = false;
        if matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            let numer = self.number()?;
            let denom = if self.peek() == Some(b'/') {
                self.pos += 1;
                let d = self.number()?;
                if d.is_zero() {
                    return self.err("zero denominator");
                }
                d
            } else {
                BigInt::one()
            };
            coeff = BigRational::new(numer, denom);
            has_coeff = true;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok((Monomial::ONE, coeff));
            }
        }
        let mut indices = Vec::new();
        while self.peek() == Some(b'e') {
            self.pos += 1;
            let idx = self.number()?;
            let idx: usize = match idx.try_into() {
                Ok(i) => i,
                Err(_) => return self.err("generator index too large"),
            };
            if idx == 0 || idx > self.rank {
                return Err(ExteriorError::IndexOutOfRange {
                    index: idx,
                    rank: self.rank,
                });
            }
            indices.push(idx);
        }
        if indices.is_empty() {
            return if has_coeff {
                self.err("expected a monomial after '*'")
            } else {
                self.err("expected a coefficient or monomial")
            };
        }
        // generators written out of order are reordered with the matching sign
        let mut w = Monomial::ONE;
        let mut sign = Sign::Plus;
        for idx in indices {
            match mono_mul(w, Monomial::generator(idx)?) {
                Some((s, p)) => {
                    if s == Sign::Minus {
                        sign = sign.flip();
                    }
                    w = p;
                }
                None => return Ok((Monomial::ONE, BigRational::zero())),
            }
        }
        if sign == Sign::Minus {
            coeff = -coeff;
        }
        Ok((w, coeff))
    }
}
