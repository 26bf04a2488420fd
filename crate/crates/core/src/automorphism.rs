//! Monomial automorphisms of a Laurent polynomial torus.
//!
//! An automorphism here sends each variable to a scalar multiple of a
//! Laurent monomial: `y_i -> a_i * prod_j y_j^{E[i][j]}` with `E` a
//! unimodular integer matrix and each `a_i` a unit of the coefficient
//! domain. These maps form a group — the semidirect product of `GL_n(Z)`
//! with the torus of scalar tuples — and every ring automorphism fixing the
//! coefficients and preserving the monomial structure is of this shape.

use num_traits::Zero;

use crate::domain::CoeffDomain;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::poly::{ExponentVector, LaurentPoly};

/// An automorphism `y_i -> a_i * y^{E_i}` of `R[y_1^{+-1}, ..., y_n^{+-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialAutomorphism<D: CoeffDomain> {
    domain: D,
    matrix: IntMatrix,
    scalars: Vec<D::Elem>,
}

impl<D: CoeffDomain> MonomialAutomorphism<D> {
    /// Builds the automorphism with exponent matrix `matrix` (row `i` is the
    /// image exponent of `y_i`) and unit scalars `scalars`. Fails when the
    /// matrix is not unimodular or a scalar is not a unit.
    pub fn new(domain: D, matrix: IntMatrix, scalars: Vec<D::Elem>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != scalars.len() {
            return Err(Error::RankMismatch { expected: matrix.rows(), found: scalars.len() });
        }
        // Reject non-unimodular matrices up front; the inverse is not needed
        // yet but existence is part of being an automorphism.
        matrix.invert_unimodular()?;
        for a in &scalars {
            if !domain.is_unit(a) {
                return Err(Error::NotAUnit(format!(
                    "scalar {} is not a unit of {}",
                    domain.format_elem(a),
                    domain.name()
                )));
            }
        }
        Ok(MonomialAutomorphism { domain, matrix, scalars })
    }

    /// The identity automorphism of rank `n`.
    pub fn identity(domain: D, n: usize) -> Self {
        let scalars = vec![domain.one(); n];
        MonomialAutomorphism { domain, matrix: IntMatrix::identity(n), scalars }
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn scalars(&self) -> &[D::Elem] {
        &self.scalars
    }

    /// The image of `y_i` as a one-term Laurent polynomial.
    pub fn image_of_variable(&self, i: usize) -> LaurentPoly<D> {
        LaurentPoly::monomial(
            self.domain.clone(),
            self.rank(),
            self.scalars[i].clone(),
            ExponentVector::new(self.matrix.row(i).to_vec()),
        )
    }

    /// Applies the automorphism to a polynomial, term by term:
    /// `c * y^e -> c * prod_i a_i^{e_i} * y^{e E}`.
    pub fn apply(&self, p: &LaurentPoly<D>) -> Result<LaurentPoly<D>> {
        if p.rank() != self.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), found: p.rank() });
        }
        let mut terms = Vec::new();
        for (e, c) in p.terms() {
            let mut coeff = c.clone();
            for (i, k) in e.entries().iter().enumerate() {
                if k.is_zero() {
                    continue;
                }
                coeff = self.domain.mul(&coeff, &self.domain.pow_int(&self.scalars[i], k)?);
            }
            terms.push((e.apply_matrix(&self.matrix), coeff));
        }
        Ok(LaurentPoly::from_terms(self.domain.clone(), p.rank(), terms))
    }

    /// The composite "this, then `next`" (i.e. `next` after `self`): its
    /// matrix is `E_self * E_next` and its scalar at `i` is
    /// `a_i * prod_j b_j^{E_self[i][j]}`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if self.rank() != next.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), found: next.rank() });
        }
        let matrix = self.matrix.mul(&next.matrix);
        let mut scalars = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let mut s = self.scalars[i].clone();
            for j in 0..self.rank() {
                let k = &self.matrix[(i, j)];
                if k.is_zero() {
                    continue;
                }
                s = self.domain.mul(&s, &self.domain.pow_int(&next.scalars[j], k)?);
            }
            scalars.push(s);
        }
        Ok(MonomialAutomorphism { domain: self.domain.clone(), matrix, scalars })
    }

    /// The inverse automorphism: matrix `D = E^{-1}`, scalars
    /// `c_j = prod_k a_k^{-D[j][k]}`.
    pub fn inverse(&self) -> Result<Self> {
        let inv = self.matrix.invert_unimodular()?;
        let mut scalars = Vec::with_capacity(self.rank());
        for j in 0..self.rank() {
            let mut c = self.domain.one();
            for k in 0..self.rank() {
                let d = &inv[(j, k)];
                if d.is_zero() {
                    continue;
                }
                c = self.domain.mul(&c, &self.domain.pow_int(&self.scalars[k], &-d)?);
            }
            scalars.push(c);
        }
        Ok(MonomialAutomorphism { domain: self.domain.clone(), matrix: inv, scalars })
    }
}

/// A random product of elementary transvections, permutations and sign
/// flips, with random unit scalars.
#[cfg(test)]
pub(crate) fn random_automorphism(
    rng: &mut rand_chacha::ChaCha8Rng,
    n: usize,
) -> MonomialAutomorphism<crate::domain::Rationals> {
    use num_bigint::BigInt;
    use rand::Rng;

    let q = |v: i64| num_rational::BigRational::from_integer(BigInt::from(v));
    let mut m = IntMatrix::identity(n);
    for _ in 0..rng.gen_range(1..=4) {
        let kind = rng.gen_range(0..3);
        let mut e = IntMatrix::identity(n);
        match kind {
            0 => {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n);
                while j == i {
                    j = rng.gen_range(0..n);
                }
                e[(i, j)] = BigInt::from(rng.gen_range(-2..=2i64));
            }
            1 => {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    e[(i, i)] = BigInt::zero();
                    e[(j, j)] = BigInt::zero();
                    e[(i, j)] = BigInt::from(1);
                    e[(j, i)] = BigInt::from(1);
                }
            }
            _ => {
                let i = rng.gen_range(0..n);
                e[(i, i)] = BigInt::from(-1);
            }
        }
        m = m.mul(&e);
    }
    let scalars = (0..n)
        .map(|_| {
            let mut v = 0;
            while v == 0 {
                v = rng.gen_range(-3..=3i64);
            }
            q(v)
        })
        .collect();
    MonomialAutomorphism::new(crate::domain::Rationals, m, scalars).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Rationals;
    use crate::parse::parse_poly;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn shear() -> MonomialAutomorphism<Rationals> {
        // y1 -> 2 y1 y2, y2 -> y2.
        MonomialAutomorphism::new(
            Rationals,
            IntMatrix::from_i64(&[&[1, 1], &[0, 1]]),
            vec![q(2), q(1)],
        )
        .unwrap()
    }

    #[test]
    fn construction_validates_inputs() {
        assert!(matches!(
            MonomialAutomorphism::new(
                Rationals,
                IntMatrix::from_i64(&[&[2, 0], &[0, 1]]),
                vec![q(1), q(1)],
            ),
            Err(Error::NotUnimodular(_))
        ));
        assert!(matches!(
            MonomialAutomorphism::new(
                Rationals,
                IntMatrix::from_i64(&[&[1, 0], &[0, 1]]),
                vec![q(0), q(1)],
            ),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn applies_to_variables_and_polynomials() {
        let f = shear();
        let ns = vec!["y1".to_string(), "y2".to_string()];
        assert_eq!(
            f.image_of_variable(0),
            parse_poly("2*y1*y2", &ns, &Rationals).unwrap()
        );
        let p = parse_poly("y1 + y2^-1", &ns, &Rationals).unwrap();
        assert_eq!(
            f.apply(&p).unwrap(),
            parse_poly("2*y1*y2 + y2^-1", &ns, &Rationals).unwrap()
        );
    }

    #[test]
    fn application_is_a_ring_homomorphism() {
        let f = shear();
        let ns = vec!["y1".to_string(), "y2".to_string()];
        let p = parse_poly("y1^2*y2^-1 + 3", &ns, &Rationals).unwrap();
        let q_ = parse_poly("y1 - y2", &ns, &Rationals).unwrap();
        let lhs = f.apply(&p.mul(&q_).unwrap()).unwrap();
        let rhs = f.apply(&p).unwrap().mul(&f.apply(&q_).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let lhs = f.apply(&p.add(&q_).unwrap()).unwrap();
        let rhs = f.apply(&p).unwrap().add(&f.apply(&q_).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_undoes_the_map() {
        let f = shear();
        let ns = vec!["y1".to_string(), "y2".to_string()];
        let inv = f.inverse().unwrap();
        assert_eq!(f.then(&inv).unwrap(), MonomialAutomorphism::identity(Rationals, 2));
        assert_eq!(inv.then(&f).unwrap(), MonomialAutomorphism::identity(Rationals, 2));
        let p = parse_poly("5*y1^3*y2^-2 + y1", &ns, &Rationals).unwrap();
        assert_eq!(inv.apply(&f.apply(&p).unwrap()).unwrap(), p);
        assert_eq!(inv.inverse().unwrap(), f);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let ns = vec!["y1".to_string(), "y2".to_string(), "y3".to_string()];
        for _ in 0..100 {
            let f = random_automorphism(&mut rng, 3);
            let g = random_automorphism(&mut rng, 3);
            let fg = f.then(&g).unwrap();
            let p = random_poly(&mut rng);
            assert_eq!(
                fg.apply(&p).unwrap(),
                g.apply(&f.apply(&p).unwrap()).unwrap(),
                "composite of {f:?} then {g:?} on {}",
                p.to_string_with(&ns)
            );
            // Group laws.
            let id = MonomialAutomorphism::identity(Rationals, 3);
            assert_eq!(f.then(&id).unwrap(), f);
            assert_eq!(id.then(&f).unwrap(), f);
            assert_eq!(f.then(&f.inverse().unwrap()).unwrap(), id);
            let h = random_automorphism(&mut rng, 3);
            assert_eq!(
                f.then(&g).unwrap().then(&h).unwrap(),
                f.then(&g.then(&h).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn units_map_to_units() {
        let f = shear();
        let u = LaurentPoly::monomial(Rationals, 2, q(7), ExponentVector::from_i64(&[3, -2]));
        let image = f.apply(&u).unwrap();
        assert!(image.is_unit_poly().is_some());
    }

    fn random_poly(rng: &mut rand_chacha::ChaCha8Rng) -> LaurentPoly<Rationals> {
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let e = ExponentVector::from_i64(&[
                rng.gen_range(-2..=2),
                rng.gen_range(-2..=2),
                rng.gen_range(-2..=2),
            ]);
            terms.push((e, q(rng.gen_range(1..=5))));
        }
        LaurentPoly::from_terms(Rationals, 3, terms)
    }
}
