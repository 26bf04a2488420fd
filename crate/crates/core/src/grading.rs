//! Integer gradings of Laurent polynomial rings and presented algebras.
//!
//! A [`Grading`] is a weight vector: the degree of a monomial is the dot
//! product of its exponent with the weights, and a polynomial decomposes
//! into homogeneous components along distinct degrees. For a presented
//! algebra the admissible gradings — weight assignments to the generators
//! making every relation homogeneous and the base subring degree zero —
//! form a lattice, computed here as an integer kernel. An algebra whose
//! only admissible grading is trivial is called *neutral*; neutrality of
//! every declared unit is one of the cancellation hypotheses checked by the
//! dispatch routine.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::algebra::AlgebraPresentation;
use crate::domain::CoeffDomain;
use crate::error::{Error, Result};
use crate::lattice::{integer_kernel, LatticeBasis};
use crate::matrix::IntMatrix;
use crate::poly::{ExponentVector, LaurentPoly};

/// A `Z`-grading of a Laurent polynomial ring, given by one integer weight
/// per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    weights: Vec<BigInt>,
}

impl Grading {
    pub fn new(weights: Vec<BigInt>) -> Self {
        Grading { weights }
    }

    pub fn from_i64(weights: &[i64]) -> Self {
        Grading { weights: weights.iter().map(|&w| BigInt::from(w)).collect() }
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    /// Degree of a monomial exponent.
    pub fn weight(&self, e: &ExponentVector) -> BigInt {
        assert_eq!(e.rank(), self.weights.len(), "exponent rank mismatch");
        e.dot(&self.weights)
    }

    /// Appends weights for adjoined variables.
    pub fn extend(&self, extra: &[BigInt]) -> Grading {
        let mut weights = self.weights.clone();
        weights.extend_from_slice(extra);
        Grading { weights }
    }

    /// Restricts to the first `n` variables.
    pub fn restrict(&self, n: usize) -> Grading {
        Grading { weights: self.weights[..n].to_vec() }
    }

    /// The set of degrees carried by the terms of `p`.
    pub fn support<D: CoeffDomain>(&self, p: &LaurentPoly<D>) -> BTreeSet<BigInt> {
        p.terms().map(|(e, _)| self.weight(e)).collect()
    }

    /// Splits `p` into its homogeneous components, keyed by degree.
    pub fn homogeneous_components<D: CoeffDomain>(
        &self,
        p: &LaurentPoly<D>,
    ) -> BTreeMap<BigInt, LaurentPoly<D>> {
        let mut parts: BTreeMap<BigInt, Vec<(ExponentVector, D::Elem)>> = BTreeMap::new();
        for (e, c) in p.terms() {
            parts.entry(self.weight(e)).or_default().push((e.clone(), c.clone()));
        }
        parts
            .into_iter()
            .map(|(d, terms)| {
                (d, LaurentPoly::from_terms(p.domain().clone(), p.rank(), terms))
            })
            .collect()
    }

    /// Whether all terms of `p` share one degree (zero counts as
    /// homogeneous).
    pub fn is_homogeneous<D: CoeffDomain>(&self, p: &LaurentPoly<D>) -> bool {
        self.support(p).len() <= 1
    }

    /// The highest-degree homogeneous component of `p` together with its
    /// degree; fails on the zero polynomial.
    pub fn leading_form<D: CoeffDomain>(
        &self,
        p: &LaurentPoly<D>,
    ) -> Result<(BigInt, LaurentPoly<D>)> {
        self.homogeneous_components(p)
            .into_iter()
            .next_back()
            .ok_or(Error::ZeroPolynomial)
    }
}

/// The top-degree part of an algebraic relation `sum h_i a^i = 0`.
///
/// Produced by [`top_form_relation`]: the indices attaining the maximal
/// degree among the nonzero summands, with the leading forms of their
/// coefficients. Those leading forms satisfy the same relation with `a`
/// replaced by its own leading form — the workhorse for transferring
/// algebraic dependence to homogeneous elements.
#[derive(Debug, Clone, PartialEq)]
pub struct TopFormRelation<D: CoeffDomain> {
    /// `(i, leading form of h_i)` for every index of maximal degree.
    pub terms: Vec<(usize, LaurentPoly<D>)>,
    /// Leading form of `a` itself.
    pub leading: LaurentPoly<D>,
    /// The shared maximal degree `deg(h_i) + i * deg(a)`.
    pub degree: BigInt,
}

/// Extracts the top-form relation from `sum coeffs[i] * a^i = 0`.
///
/// Fails with [`Error::ZeroPolynomial`] when `a` is zero, and with
/// [`Error::NotARelation`] when the sum does not vanish or all coefficients
/// are zero. The returned leading forms are re-verified to satisfy
/// `sum lf(h_i) * lf(a)^i = 0` over the maximal-degree indices.
pub fn top_form_relation<D: CoeffDomain>(
    g: &Grading,
    coeffs: &[LaurentPoly<D>],
    a: &LaurentPoly<D>,
) -> Result<TopFormRelation<D>> {
    if a.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if coeffs.iter().all(LaurentPoly::is_zero) {
        return Err(Error::NotARelation("all relation coefficients vanish".into()));
    }
    let mut sum = LaurentPoly::zero(a.domain().clone(), a.rank());
    for (i, h) in coeffs.iter().enumerate() {
        let term = h.mul(&a.pow(&BigInt::from(i))?)?;
        sum = sum.add(&term)?;
    }
    if !sum.is_zero() {
        return Err(Error::NotARelation(format!(
            "sum of coefficients times powers is {:?}, not zero",
            sum
        )));
    }
    let (deg_a, lf_a) = g.leading_form(a)?;
    let mut degrees: Vec<Option<BigInt>> = Vec::with_capacity(coeffs.len());
    for (i, h) in coeffs.iter().enumerate() {
        if h.is_zero() {
            degrees.push(None);
        } else {
            let (d, _) = g.leading_form(h)?;
            degrees.push(Some(d + BigInt::from(i) * &deg_a));
        }
    }
    let max = degrees.iter().flatten().max().cloned().expect("nonzero coefficient exists");
    let terms: Vec<(usize, LaurentPoly<D>)> = degrees
        .iter()
        .enumerate()
        .filter(|(_, d)| d.as_ref() == Some(&max))
        .map(|(i, _)| Ok((i, g.leading_form(&coeffs[i])?.1)))
        .collect::<Result<_>>()?;
    assert!(
        terms.len() >= 2,
        "a single maximal-degree term cannot cancel in an integral domain"
    );
    // The leading forms inherit the relation; check it.
    let mut top_sum = LaurentPoly::zero(a.domain().clone(), a.rank());
    for (i, lf) in &terms {
        top_sum = top_sum.add(&lf.mul(&lf_a.pow(&BigInt::from(*i))?)?)?;
    }
    assert!(top_sum.is_zero(), "leading forms must satisfy the top-degree relation");
    Ok(TopFormRelation { terms, leading: lf_a, degree: max })
}

/// All admissible generator gradings of a presented algebra, as a lattice
/// inside `Z^num_gens`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradingLattice {
    pub gen_names: Vec<String>,
    pub lattice: LatticeBasis,
}

impl GradingLattice {
    /// Whether the weight assignment `d` is admissible.
    pub fn admits(&self, d: &[BigInt]) -> bool {
        self.lattice.contains(d)
    }
}

/// Computes the lattice of weight vectors making every relation homogeneous
/// and every base-ring generator degree zero.
///
/// Each relation contributes, for every pair of distinct monomials in it,
/// the constraint that their degrees agree; the kernel of the stacked
/// constraint matrix is the answer. Relations hidden behind non-monomial
/// algebra (anything a presentation cannot see) cannot shrink the lattice
/// further, so this is exact for the declared presentation.
pub fn grading_lattice<D: CoeffDomain>(p: &AlgebraPresentation<D>) -> GradingLattice {
    let n = p.num_gens();
    let mut rows: Vec<BigInt> = Vec::new();
    let mut nrows = 0;
    for rel in p.relations() {
        let monomials: Vec<&ExponentVector> = rel.terms().map(|(e, _)| e).collect();
        for i in 0..monomials.len() {
            for j in (i + 1)..monomials.len() {
                let diff = monomials[i].sub(monomials[j]);
                rows.extend(diff.into_entries());
                nrows += 1;
            }
        }
    }
    for i in 0..n {
        if p.is_in_base(i) {
            rows.extend(ExponentVector::unit(n, i).into_entries());
            nrows += 1;
        }
    }
    let constraints = IntMatrix::new(nrows, n, rows);
    GradingLattice {
        gen_names: p.gen_names().to_vec(),
        lattice: integer_kernel(&constraints),
    }
}

/// Neutrality report for a presented algebra: which generators are forced
/// to degree zero by every admissible grading, and whether all of them are
/// (in which case only the trivial grading exists).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeutralReport {
    pub lattice: GradingLattice,
    /// Per generator: degree zero under every admissible grading.
    pub gen_neutral: Vec<bool>,
    /// All generators neutral, i.e. the grading lattice is trivial.
    pub algebra_neutral: bool,
}

/// Decides neutrality of each generator and of the whole presentation.
pub fn presentation_neutral<D: CoeffDomain>(p: &AlgebraPresentation<D>) -> NeutralReport {
    let gl = grading_lattice(p);
    let n = p.num_gens();
    let gen_neutral: Vec<bool> = (0..n)
        .map(|i| gl.lattice.basis_rows().iter().all(|row| row[i].is_zero()))
        .collect();
    let algebra_neutral = gl.lattice.is_empty();
    debug_assert_eq!(algebra_neutral, gen_neutral.iter().all(|&b| b));
    NeutralReport { lattice: gl, gen_neutral, algebra_neutral }
}
