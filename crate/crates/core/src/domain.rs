//! Coefficient domains for Laurent polynomials.
//!
//! Everything downstream is generic over [`CoeffDomain`], which captures the
//! arithmetic of an integral domain together with exact unit recognition.
//! Three families are provided: the rationals, prime fields, and the
//! integers with an optional inverted multiplicative set (so that localizing
//! at a constant stays inside the same type).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::ext_gcd;

/// An integral domain with decidable unit recognition.
///
/// The domain value itself carries runtime data (the prime of a prime field,
/// the inverted set of a localization), so operations take `&self`.
pub trait CoeffDomain: Clone + fmt::Debug + PartialEq {
    type Elem: Clone + fmt::Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// Whether `a` is invertible in the domain.
    fn is_unit(&self, a: &Self::Elem) -> bool;

    /// The inverse of `a`, or `None` when `a` is not a unit.
    fn invert_unit(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Embeds an integer.
    fn from_integer(&self, n: &BigInt) -> Self::Elem;

    /// Interprets a fraction `a/b`; fails when the quotient does not lie in
    /// the domain (for example `1/3` over the integers).
    fn from_ratio(&self, a: &BigInt, b: &BigInt) -> Result<Self::Elem>;

    /// True for fields, where every nonzero element is a unit.
    fn is_field(&self) -> bool;

    /// Short tag for display and reports, e.g. `QQ` or `F7`.
    fn name(&self) -> String;

    /// Canonical rendering of an element.
    fn format_elem(&self, a: &Self::Elem) -> String;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// Inverse of `a` in the fraction field, when representable in `Elem`.
    /// Every domain here either is a field or stores its elements as exact
    /// rationals, so this only fails on zero.
    fn fraction_inverse(&self, a: &Self::Elem) -> Option<Self::Elem> {
        self.invert_unit(a)
    }

    /// `a^k` for any integer `k`; negative exponents require `a` to be a
    /// unit. By convention `a^0 = 1`.
    fn pow_int(&self, a: &Self::Elem, k: &BigInt) -> Result<Self::Elem> {
        let base = if k.is_negative() {
            self.invert_unit(a).ok_or_else(|| {
                Error::NotAUnit(format!(
                    "{} cannot be raised to the negative power {k}",
                    self.format_elem(a)
                ))
            })?
        } else {
            a.clone()
        };
        let mag = k.magnitude();
        let mut acc = self.one();
        for i in (0..mag.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if mag.bit(i) {
                acc = self.mul(&acc, &base);
            }
        }
        Ok(acc)
    }
}

/// The field of rational numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rationals;

impl CoeffDomain for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn is_unit(&self, a: &BigRational) -> bool {
        !a.is_zero()
    }

    fn invert_unit(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }

    fn from_integer(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }

    fn from_ratio(&self, a: &BigInt, b: &BigInt) -> Result<BigRational> {
        if b.is_zero() {
            return Err(Error::MalformedPresentation("division by zero in coefficient".into()));
        }
        Ok(BigRational::new(a.clone(), b.clone()))
    }

    fn is_field(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "QQ".into()
    }

    fn format_elem(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
}

/// The prime field `F_p` for a machine-sized prime `p`.
///
/// Elements are kept reduced into `0..p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Builds `F_p`; fails when `p` is not prime.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::MalformedPresentation(format!("{p} is not prime")));
        }
        let mut d = 2u64;
        while d * d <= p {
            if p % d == 0 {
                return Err(Error::MalformedPresentation(format!("{p} is not prime")));
            }
            d += 1;
        }
        Ok(PrimeField { p })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    fn reduce_bigint(&self, n: &BigInt) -> u64 {
        let m = n.mod_floor(&BigInt::from(self.p));
        let (_, digits) = m.to_u64_digits();
        digits.first().copied().unwrap_or(0)
    }
}

impl CoeffDomain for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.p
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn is_unit(&self, a: &u64) -> bool {
        *a != 0
    }

    fn invert_unit(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        let (g, m, _) = ext_gcd(&BigInt::from(*a), &BigInt::from(self.p));
        debug_assert!(g.is_one());
        Some(self.reduce_bigint(&m))
    }

    fn from_integer(&self, n: &BigInt) -> u64 {
        self.reduce_bigint(n)
    }

    fn from_ratio(&self, a: &BigInt, b: &BigInt) -> Result<u64> {
        let bb = self.reduce_bigint(b);
        let inv = self.invert_unit(&bb).ok_or_else(|| {
            Error::MalformedPresentation(format!("{b} is not invertible mod {}", self.p))
        })?;
        Ok(self.mul(&self.from_integer(a), &inv))
    }

    fn is_field(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("F{}", self.p)
    }

    fn format_elem(&self, a: &u64) -> String {
        a.to_string()
    }
}

/// The integers, optionally localized at a finite set of nonzero constants.
///
/// Elements are stored as exact rationals whose denominators only involve
/// primes dividing the inverted set; with an empty set this is plain `Z`.
/// Units are recognized by stripping every factor shared with the inverted
/// set and checking that `+-1` remains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Integers {
    inverted: Vec<BigInt>,
}

impl Integers {
    /// Plain `Z`.
    pub fn new() -> Self {
        Integers { inverted: Vec::new() }
    }

    /// `Z` with the given constants inverted.
    pub fn localized(inverted: Vec<BigInt>) -> Result<Self> {
        let mut z = Integers::new();
        for r in inverted {
            z = z.localize(&r)?;
        }
        Ok(z)
    }

    /// The multiplicative set generators, each `> 1`.
    pub fn inverted(&self) -> &[BigInt] {
        &self.inverted
    }

    /// Returns the localization of this ring at `r`. The multiplicative set
    /// is stored through the prime factors of `r`, so `Z` localized at 8
    /// and at 2 give the same ring with the same name.
    pub fn localize(&self, r: &BigInt) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut out = self.clone();
        let residual = out.strip_inverted(&r.abs());
        for p in prime_factors(&residual) {
            if out.strip_inverted(&p).is_one() {
                continue;
            }
            out.inverted.push(p);
            out.inverted.sort();
        }
        Ok(out)
    }

    /// Divides out of `n` every factor it shares with the inverted set.
    fn strip_inverted(&self, n: &BigInt) -> BigInt {
        let mut n = n.abs();
        if n.is_zero() {
            return n;
        }
        loop {
            let mut progress = false;
            for r in &self.inverted {
                loop {
                    let g = n.gcd(r);
                    if g.is_one() {
                        break;
                    }
                    n /= &g;
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        n
    }

    /// Whether the rational `q` lies in this ring (denominator supported on
    /// the inverted set).
    pub fn contains_ratio(&self, q: &BigRational) -> bool {
        self.strip_inverted(q.denom()).is_one()
    }
}

impl Default for Integers {
    fn default() -> Self {
        Integers::new()
    }
}

/// Factors `|n|` by trial division. Localization constants stay small in
/// practice, so this is not a bottleneck.
fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n <= BigInt::one() {
        return out;
    }
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            while (&n % &d).is_zero() {
                n /= &d;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

impl CoeffDomain for Integers {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn is_unit(&self, a: &BigRational) -> bool {
        !a.is_zero() && self.strip_inverted(a.numer()).is_one() && self.contains_ratio(a)
    }

    fn invert_unit(&self, a: &BigRational) -> Option<BigRational> {
        self.is_unit(a).then(|| a.recip())
    }

    fn fraction_inverse(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }

    fn from_integer(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }

    fn from_ratio(&self, a: &BigInt, b: &BigInt) -> Result<BigRational> {
        if b.is_zero() {
            return Err(Error::MalformedPresentation("division by zero in coefficient".into()));
        }
        let q = BigRational::new(a.clone(), b.clone());
        if !self.contains_ratio(&q) {
            return Err(Error::MalformedPresentation(format!(
                "{}/{} does not lie in {}",
                a,
                b,
                self.name()
            )));
        }
        Ok(q)
    }

    fn is_field(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        if self.inverted.is_empty() {
            "ZZ".into()
        } else {
            let parts: Vec<String> = self.inverted.iter().map(|r| format!("1/{r}")).collect();
            format!("ZZ[{}]", parts.join(","))
        }
    }

    fn format_elem(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn rationals_units_are_the_nonzero_elements() {
        let q = Rationals;
        assert!(!q.is_unit(&q.zero()));
        assert!(q.is_unit(&rat(-3, 7)));
        assert_eq!(q.invert_unit(&rat(-3, 7)), Some(rat(-7, 3)));
    }

    #[test]
    fn prime_field_arithmetic() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.from_integer(&BigInt::from(-1)), 6);
        assert_eq!(f7.invert_unit(&3), Some(5));
        assert_eq!(f7.mul(&3, &5), 1);
        assert!(PrimeField::new(6).is_err());
        assert!(PrimeField::new(1).is_err());
    }

    #[test]
    fn prime_field_ratio_coefficients() {
        let f5 = PrimeField::new(5).unwrap();
        // 1/3 = 2 mod 5.
        assert_eq!(f5.from_ratio(&BigInt::from(1), &BigInt::from(3)).unwrap(), 2);
        assert!(f5.from_ratio(&BigInt::from(1), &BigInt::from(5)).is_err());
    }

    #[test]
    fn integer_units_are_signs() {
        let z = Integers::new();
        assert!(z.is_unit(&rat(-1, 1)));
        assert!(!z.is_unit(&rat(2, 1)));
        assert!(z.from_ratio(&BigInt::from(1), &BigInt::from(3)).is_err());
    }

    #[test]
    fn localized_integers_recognize_units() {
        let z2 = Integers::new().localize(&BigInt::from(2)).unwrap();
        assert!(z2.is_unit(&rat(8, 1)));
        assert!(z2.is_unit(&rat(-1, 4)));
        assert!(!z2.is_unit(&rat(6, 1)));
        assert!(z2.from_ratio(&BigInt::from(3), &BigInt::from(4)).is_ok());
        assert!(z2.from_ratio(&BigInt::from(1), &BigInt::from(6)).is_err());
        assert_eq!(z2.name(), "ZZ[1/2]");
    }

    #[test]
    fn localizing_at_a_composite_inverts_its_prime_factors() {
        let z6 = Integers::new().localize(&BigInt::from(6)).unwrap();
        assert!(z6.is_unit(&rat(2, 1)));
        assert!(z6.is_unit(&rat(9, 1)));
        assert!(!z6.is_unit(&rat(5, 1)));
    }

    #[test]
    fn localizing_twice_at_the_same_constant_is_stable() {
        let z2 = Integers::new().localize(&BigInt::from(2)).unwrap();
        let z22 = z2.localize(&BigInt::from(4)).unwrap();
        assert_eq!(z2, z22);
    }

    #[test]
    fn localizing_at_zero_is_rejected() {
        assert_eq!(Integers::new().localize(&BigInt::zero()), Err(Error::ZeroElement));
    }

    #[test]
    fn integer_powers_with_negative_exponents() {
        let z2 = Integers::new().localize(&BigInt::from(2)).unwrap();
        let two = rat(2, 1);
        assert_eq!(z2.pow_int(&two, &BigInt::from(-3)).unwrap(), rat(1, 8));
        let z = Integers::new();
        assert!(z.pow_int(&two, &BigInt::from(-1)).is_err());
        assert_eq!(z.pow_int(&two, &BigInt::from(0)).unwrap(), rat(1, 1));
    }
}
