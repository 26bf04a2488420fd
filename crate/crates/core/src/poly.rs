//! Sparse Laurent polynomials `R[x_1, x_1^-1, ..., x_n, x_n^-1]`.
//!
//! Terms are kept in a [`BTreeMap`] ordered by graded-lexicographic
//! comparison of exponent vectors (total degree first, entries
//! lexicographically on ties), with zero coefficients never stored. This
//! gives every polynomial one canonical representation, so equality,
//! printing and serialization are deterministic.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::domain::CoeffDomain;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// A point of `Z^n`: the exponent vector of a Laurent monomial.
///
/// Ordered graded-lexicographically; entries are arbitrary-precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExponentVector(Vec<BigInt>);

impl ExponentVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        ExponentVector(entries)
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        ExponentVector(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// The origin of `Z^rank`.
    pub fn zero(rank: usize) -> Self {
        ExponentVector(vec![BigInt::zero(); rank])
    }

    /// The `i`-th standard basis vector of `Z^rank`.
    pub fn unit(rank: usize, i: usize) -> Self {
        let mut e = Self::zero(rank);
        e.0[i] = BigInt::one();
        e
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn entry(&self, i: usize) -> &BigInt {
        &self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank(), other.rank());
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.rank(), other.rank());
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        ExponentVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        ExponentVector(self.0.iter().map(|a| a * k).collect())
    }

    /// Weighted degree `<weights, self>`.
    pub fn dot(&self, weights: &[BigInt]) -> BigInt {
        assert_eq!(self.rank(), weights.len());
        self.0.iter().zip(weights).map(|(a, w)| a * w).sum()
    }

    /// Sum of the entries.
    pub fn total_degree(&self) -> BigInt {
        self.0.iter().sum()
    }

    /// Appends `extra` zero entries.
    pub fn pad(&self, extra: usize) -> Self {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat_with(BigInt::zero).take(extra));
        ExponentVector(v)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ExponentVector(v)
    }

    /// Splits into the first `at` entries and the rest.
    pub fn split(&self, at: usize) -> (Self, Self) {
        let (l, r) = self.0.split_at(at);
        (ExponentVector(l.to_vec()), ExponentVector(r.to_vec()))
    }

    /// Image under a matrix acting on row vectors: `self * m`.
    pub fn apply_matrix(&self, m: &IntMatrix) -> Self {
        ExponentVector(m.mul_row_vec(&self.0))
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        assert_eq!(self.rank(), other.rank(), "comparing exponents of different rank");
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

/// A sparse Laurent polynomial over a coefficient domain.
#[derive(Clone, PartialEq)]
pub struct LaurentPoly<D: CoeffDomain> {
    domain: D,
    rank: usize,
    terms: BTreeMap<ExponentVector, D::Elem>,
}

impl<D: CoeffDomain> LaurentPoly<D> {
    pub fn zero(domain: D, rank: usize) -> Self {
        LaurentPoly { domain, rank, terms: BTreeMap::new() }
    }

    pub fn one(domain: D, rank: usize) -> Self {
        let c = domain.one();
        Self::constant(domain, rank, c)
    }

    pub fn constant(domain: D, rank: usize, c: D::Elem) -> Self {
        let mut p = Self::zero(domain, rank);
        p.add_term(ExponentVector::zero(rank), c);
        p
    }

    pub fn monomial(domain: D, rank: usize, c: D::Elem, expo: ExponentVector) -> Self {
        assert_eq!(expo.rank(), rank, "monomial exponent rank mismatch");
        let mut p = Self::zero(domain, rank);
        p.add_term(expo, c);
        p
    }

    /// The variable `x_i` as a polynomial.
    pub fn variable(domain: D, rank: usize, i: usize) -> Self {
        assert!(i < rank, "variable index {i} out of range for rank {rank}");
        let c = domain.one();
        Self::monomial(domain, rank, c, ExponentVector::unit(rank, i))
    }

    /// Builds from a term list, merging duplicates and dropping zeros.
    pub fn from_terms(domain: D, rank: usize, terms: Vec<(ExponentVector, D::Elem)>) -> Self {
        let mut p = Self::zero(domain, rank);
        for (e, c) in terms {
            assert_eq!(e.rank(), rank, "term exponent rank mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &D::Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ExponentVector) -> Option<&D::Elem> {
        self.terms.get(e)
    }

    /// Rebuilds the polynomial over another domain value of the same type
    /// (e.g. after localizing the integers); coefficients are reused as-is.
    pub fn with_domain(&self, domain: D) -> Self {
        LaurentPoly { domain, rank: self.rank, terms: self.terms.clone() }
    }

    fn add_term(&mut self, e: ExponentVector, c: D::Elem) {
        if self.domain.is_zero(&c) {
            return;
        }
        match self.terms.remove(&e) {
            None => {
                self.terms.insert(e, c);
            }
            Some(old) => {
                let merged = self.domain.add(&old, &c);
                if !self.domain.is_zero(&merged) {
                    self.terms.insert(e, merged);
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: other.rank });
        }
        assert!(self.domain == other.domain, "coefficient domains differ");
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.domain.neg(c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.domain.clone(), self.rank);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), self.domain.mul(ca, cb));
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &D::Elem) -> Self {
        let mut out = Self::zero(self.domain.clone(), self.rank);
        for (e, a) in &self.terms {
            out.add_term(e.clone(), self.domain.mul(a, c));
        }
        out
    }

    /// `self^k` for any integer `k`; negative powers require a unit base.
    /// `p^0 = 1` by convention.
    pub fn pow(&self, k: &BigInt) -> Result<Self> {
        if k.is_zero() {
            return Ok(Self::one(self.domain.clone(), self.rank));
        }
        let base = if k.is_negative() { self.invert_unit_poly()? } else { self.clone() };
        let mag = k.magnitude();
        let mut acc = Self::one(self.domain.clone(), self.rank);
        for i in (0..mag.bits()).rev() {
            acc = acc.mul(&acc)?;
            if mag.bit(i) {
                acc = acc.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `self^k` where negative powers only require the single coefficient
    /// to be invertible in the fraction field, not in the domain itself
    /// (e.g. `(2t)^-1 = 1/2 * t^-1` over the integers). For fields this is
    /// the same as [`pow`](Self::pow).
    pub fn pow_fraction(&self, k: &BigInt) -> Result<Self> {
        if !k.is_negative() {
            return self.pow(k);
        }
        if self.terms.len() != 1 {
            return Err(Error::NotAUnit(format!("{self:?} is not a monomial")));
        }
        let (e, c) = self.terms.iter().next().unwrap();
        let inv = self.domain.fraction_inverse(c).ok_or(Error::ZeroElement)?;
        Self::monomial(self.domain.clone(), self.rank, inv, e.neg()).pow(&-k)
    }

    /// [`substitute`](Self::substitute) with negative powers resolved via
    /// [`pow_fraction`](Self::pow_fraction) instead of domain-unit
    /// inversion.
    pub fn substitute_fraction(&self, images: &[Self]) -> Result<Self> {
        if images.len() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: images.len() });
        }
        let target_rank = images.first().map_or(0, |p| p.rank);
        for im in images {
            if im.rank != target_rank {
                return Err(Error::RankMismatch { expected: target_rank, found: im.rank });
            }
        }
        let mut out = Self::zero(self.domain.clone(), target_rank);
        for (e, c) in &self.terms {
            let mut prod = Self::constant(self.domain.clone(), target_rank, c.clone());
            for (i, k) in e.entries().iter().enumerate() {
                if k.is_zero() {
                    continue;
                }
                prod = prod.mul(&images[i].pow_fraction(k)?)?;
            }
            out = out.add(&prod)?;
        }
        Ok(out)
    }

    /// Classifies `self` as a unit of the Laurent ring.
    ///
    /// In a Laurent polynomial ring over an integral domain the units are
    /// exactly the products `r * x^d` with `r` a unit of the coefficient
    /// domain, so this only has to inspect single-term polynomials.
    pub fn is_unit_poly(&self) -> Option<(D::Elem, ExponentVector)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next().unwrap();
        self.domain.is_unit(c).then(|| (c.clone(), e.clone()))
    }

    /// Inverse of a unit, i.e. `r^-1 * x^-d` for `self = r * x^d`.
    pub fn invert_unit_poly(&self) -> Result<Self> {
        let (c, e) = self
            .is_unit_poly()
            .ok_or_else(|| Error::NotAUnit(format!("{self:?} is not a unit")))?;
        let inv = self.domain.invert_unit(&c).expect("unit coefficient inverts");
        Ok(Self::monomial(self.domain.clone(), self.rank, inv, e.neg()))
    }

    /// Substitutes `images[i]` for variable `i`. All images must share a
    /// rank; variables occurring with negative exponents must map to units
    /// of the target ring.
    pub fn substitute(&self, images: &[Self]) -> Result<Self> {
        if images.len() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: images.len() });
        }
        let target_rank = images.first().map_or(0, |p| p.rank);
        for im in images {
            if im.rank != target_rank {
                return Err(Error::RankMismatch { expected: target_rank, found: im.rank });
            }
        }
        let mut out = Self::zero(self.domain.clone(), target_rank);
        for (e, c) in &self.terms {
            let mut prod = Self::constant(self.domain.clone(), target_rank, c.clone());
            for (i, k) in e.entries().iter().enumerate() {
                if k.is_zero() {
                    continue;
                }
                prod = prod.mul(&images[i].pow(k)?)?;
            }
            out = out.add(&prod)?;
        }
        Ok(out)
    }

    /// Renders with the given variable names, terms in descending
    /// graded-lexicographic order. This is the canonical text form accepted
    /// back by the parser.
    pub fn to_string_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.rank, "need one name per variable");
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let rendered = self.domain.format_elem(c);
            let (sign_neg, magnitude) = match rendered.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, rendered),
            };
            if idx == 0 {
                if sign_neg {
                    out.push('-');
                }
            } else if sign_neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            if magnitude != "1" || e.is_zero() {
                factors.push(magnitude);
            }
            for (i, k) in e.entries().iter().enumerate() {
                if k.is_zero() {
                    continue;
                }
                if k.is_one() {
                    factors.push(names[i].clone());
                } else {
                    factors.push(format!("{}^{}", names[i], k));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl<D: CoeffDomain> fmt::Debug for LaurentPoly<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.rank).map(|i| format!("x{}", i + 1)).collect();
        write!(f, "{}", self.to_string_with(&names))
    }
}
