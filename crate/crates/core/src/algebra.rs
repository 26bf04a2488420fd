//! Algebra models: finite presentations and monomial subalgebras of a
//! Laurent torus.
//!
//! Two complementary views of an algebra are supported. A
//! [`AlgebraPresentation`] is the syntactic view — named generators,
//! declared unit pairs, relation polynomials, and hypothesis flags the user
//! asserts but the machine cannot check. A [`MonomialSubalgebra`] is the
//! exact view — generators are scalar multiples of Laurent monomials inside
//! a torus, so units, transcendence degree and algebraic closures reduce to
//! lattice computations. A ring may carry both views at once; procedures
//! record which view certified each hypothesis.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::domain::CoeffDomain;
use crate::error::{Error, Result};
use crate::lattice::{coordinates_in_rows, saturate, LatticeBasis};
use crate::matrix::IntMatrix;
use crate::poly::{ExponentVector, LaurentPoly};

/// Hypotheses the user asserts about a presented algebra; they cannot be
/// decided from a presentation alone.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssertedFlags {
    /// The coefficient ring is algebraically closed in the algebra.
    pub base_alg_closed: bool,
    /// Transcendence degree over the coefficient ring, if asserted.
    pub trdeg: Option<u64>,
}

/// A finitely presented algebra `R[g_1, ..., g_k] / (relations)`.
///
/// Unit pairs declare `g_i * g_j = 1`; the pair relation is added to the
/// relation list automatically if missing. Elements are Laurent polynomials
/// in the generator symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraPresentation<D: CoeffDomain> {
    domain: D,
    gens: Vec<String>,
    inverse_partner: Vec<Option<usize>>,
    in_base: Vec<bool>,
    relations: Vec<LaurentPoly<D>>,
    asserted: AssertedFlags,
}

impl<D: CoeffDomain> AlgebraPresentation<D> {
    pub fn new(
        domain: D,
        gens: Vec<String>,
        unit_pairs: Vec<(usize, usize)>,
        in_base: Vec<usize>,
        relations: Vec<LaurentPoly<D>>,
        asserted: AssertedFlags,
    ) -> Result<Self> {
        let n = gens.len();
        for (i, g) in gens.iter().enumerate() {
            if gens[..i].contains(g) {
                return Err(Error::MalformedPresentation(format!("duplicate generator '{g}'")));
            }
        }
        let mut inverse_partner = vec![None; n];
        for &(a, b) in &unit_pairs {
            if a >= n || b >= n || a == b {
                return Err(Error::MalformedPresentation(format!(
                    "invalid unit pair ({a}, {b})"
                )));
            }
            if inverse_partner[a].is_some() || inverse_partner[b].is_some() {
                return Err(Error::MalformedPresentation(format!(
                    "generator in more than one unit pair: ({a}, {b})"
                )));
            }
            inverse_partner[a] = Some(b);
            inverse_partner[b] = Some(a);
        }
        let mut base_flags = vec![false; n];
        for &i in &in_base {
            if i >= n {
                return Err(Error::MalformedPresentation(format!(
                    "base generator index {i} out of range"
                )));
            }
            if inverse_partner[i].is_some() {
                return Err(Error::MalformedPresentation(format!(
                    "generator '{}' cannot lie in the base ring and in a unit pair",
                    gens[i]
                )));
            }
            base_flags[i] = true;
        }
        let mut all_relations = Vec::new();
        for r in relations {
            if r.is_zero() {
                return Err(Error::MalformedPresentation("zero relation polynomial".into()));
            }
            if r.rank() != n {
                return Err(Error::MalformedPresentation(format!(
                    "relation uses {} symbols, presentation has {n}",
                    r.rank()
                )));
            }
            for (e, _) in r.terms() {
                for (i, k) in e.entries().iter().enumerate() {
                    if k.is_negative() && inverse_partner[i].is_none() {
                        return Err(Error::MalformedPresentation(format!(
                            "negative power of '{}' in a relation, but it has no declared inverse",
                            gens[i]
                        )));
                    }
                }
            }
            all_relations.push(r);
        }
        let mut out = AlgebraPresentation {
            domain,
            gens,
            inverse_partner,
            in_base: base_flags,
            relations: all_relations,
            asserted,
        };
        // Make sure every declared pair carries its defining relation.
        for &(a, b) in &unit_pairs {
            let pair_rel = out.pair_relation(a, b);
            if !out.relations.contains(&pair_rel) {
                out.relations.push(pair_rel);
            }
        }
        Ok(out)
    }

    fn pair_relation(&self, a: usize, b: usize) -> LaurentPoly<D> {
        let n = self.gens.len();
        let e = ExponentVector::unit(n, a).add(&ExponentVector::unit(n, b));
        LaurentPoly::from_terms(
            self.domain.clone(),
            n,
            vec![
                (e, self.domain.one()),
                (ExponentVector::zero(n), self.domain.neg(&self.domain.one())),
            ],
        )
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_names(&self) -> &[String] {
        &self.gens
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    pub fn inverse_partner(&self, i: usize) -> Option<usize> {
        self.inverse_partner[i]
    }

    pub fn is_in_base(&self, i: usize) -> bool {
        self.in_base[i]
    }

    pub fn relations(&self) -> &[LaurentPoly<D>] {
        &self.relations
    }

    pub fn asserted(&self) -> &AssertedFlags {
        &self.asserted
    }

    /// Indices of generators opening a unit pair (the partner with the
    /// smaller index is taken as the primary symbol).
    pub fn primary_unit_gens(&self) -> Vec<usize> {
        (0..self.gens.len())
            .filter(|&i| matches!(self.inverse_partner[i], Some(j) if i < j))
            .collect()
    }

    /// True when the presentation declares no units beyond the scalars.
    pub fn has_no_declared_units(&self) -> bool {
        self.inverse_partner.iter().all(Option::is_none)
    }

    /// Rewrites secondary pair symbols as negative powers of the primary
    /// symbol, e.g. `yinv^2 -> y^-2`. On the image, syntactic equality is
    /// sound for deciding equality of monomial expressions in the algebra.
    pub fn reduce(&self, p: &LaurentPoly<D>) -> LaurentPoly<D> {
        let n = self.gens.len();
        assert_eq!(p.rank(), n, "element has wrong symbol rank");
        let mut terms = Vec::new();
        for (e, c) in p.terms() {
            let mut entries = e.entries().to_vec();
            for i in 0..n {
                if let Some(j) = self.inverse_partner[i] {
                    if i < j && !entries[j].is_zero() {
                        let k = std::mem::replace(&mut entries[j], BigInt::zero());
                        entries[i] -= k;
                    }
                }
            }
            terms.push((ExponentVector::new(entries), c.clone()));
        }
        LaurentPoly::from_terms(self.domain.clone(), n, terms)
    }

    /// The reduced-symbol monomial view: each primary generator becomes a
    /// monomial generator in the symbol torus `Z^num_gens`, with unit flags
    /// on the declared pairs. Secondary pair symbols are dropped (they are
    /// negative powers of their partners after [`reduce`](Self::reduce)).
    ///
    /// Relations other than the pair relations are not visible to this view;
    /// it is exact only for monomial reasoning (units, unit lattices).
    pub fn symbol_subalgebra(&self) -> MonomialSubalgebra<D> {
        let n = self.gens.len();
        let mut gens = Vec::new();
        for i in 0..n {
            match self.inverse_partner[i] {
                Some(j) if j < i => continue, // secondary symbol
                partner => {
                    gens.push(MonoGen {
                        name: self.gens[i].clone(),
                        coeff: self.domain.one(),
                        expo: ExponentVector::unit(n, i),
                        unit: partner.is_some(),
                    });
                }
            }
        }
        MonomialSubalgebra::new(self.domain.clone(), n, gens, Vec::new())
            .expect("symbol view is well formed")
    }

    /// Rebuilds the presentation over another domain value of the same type
    /// (used when localizing the coefficient ring).
    fn with_domain(&self, domain: D) -> Self {
        AlgebraPresentation {
            domain: domain.clone(),
            gens: self.gens.clone(),
            inverse_partner: self.inverse_partner.clone(),
            in_base: self.in_base.clone(),
            relations: self.relations.iter().map(|r| r.with_domain(domain.clone())).collect(),
            asserted: self.asserted.clone(),
        }
    }
}

/// Result of localizing a presented algebra at an element.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedAlgebra<D: CoeffDomain> {
    /// The localized presentation.
    pub presentation: AlgebraPresentation<D>,
    /// The inverted element, as an expression in the original generators.
    pub inverted: LaurentPoly<D>,
    /// Index of the fresh inverse generator; `None` when the localization
    /// happened in the coefficients (constant element) or was trivial.
    pub inverse_gen: Option<usize>,
}

impl<D: CoeffDomain> LocalizedAlgebra<D> {
    /// Extends a grading vector of the original presentation to the
    /// localized one. Requires the inverted element to be homogeneous; the
    /// fresh inverse generator receives the opposite degree. Returns `None`
    /// when the element is not homogeneous under `d`.
    pub fn extend_grading(&self, d: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut degrees = self
            .inverted
            .terms()
            .map(|(e, _)| e.dot(d));
        let first = degrees.next()?;
        if degrees.any(|x| x != first) {
            return None;
        }
        let mut out = d.to_vec();
        if self.inverse_gen.is_some() {
            out.push(-first);
        }
        Some(out)
    }
}

/// Localizes a presented algebra at a nonzero element `r`.
///
/// * `r` a constant unit: nothing to do.
/// * `r` a non-unit constant: the coefficient domain itself is localized
///   (only meaningful over the integers).
/// * otherwise: a fresh generator `<name>_inv` with the relation
///   `r * r_inv = 1` is adjoined; when `r` is a single generator symbol the
///   pair is declared as a unit pair.
pub fn localize<D: LocalizableDomain>(
    p: &AlgebraPresentation<D>,
    r: &LaurentPoly<D>,
) -> Result<LocalizedAlgebra<D>> {
    if r.is_zero() {
        return Err(Error::ZeroElement);
    }
    if r.rank() != p.num_gens() {
        return Err(Error::RankMismatch { expected: p.num_gens(), found: r.rank() });
    }
    // Constant elements localize the coefficient ring.
    if r.num_terms() == 1 {
        let (e, c) = r.terms().next().unwrap();
        if e.is_zero() {
            if p.domain().is_unit(c) {
                return Ok(LocalizedAlgebra {
                    presentation: p.clone(),
                    inverted: r.clone(),
                    inverse_gen: None,
                });
            }
            let localized = p.domain().localize_at(c)?;
            return Ok(LocalizedAlgebra {
                presentation: p.with_domain(localized),
                inverted: r.clone(),
                inverse_gen: None,
            });
        }
    }
    let single_gen = single_generator_symbol(r);
    let n = p.num_gens();
    let mut gens = p.gens.clone();
    let base_name = match single_gen {
        Some(i) => p.gens[i].clone(),
        None => "loc".to_string(),
    };
    let mut inv_name = format!("{base_name}_inv");
    while gens.contains(&inv_name) {
        inv_name.push('_');
    }
    gens.push(inv_name);
    let mut unit_pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        if let Some(j) = p.inverse_partner[i] {
            if i < j {
                unit_pairs.push((i, j));
            }
        }
    }
    if let Some(i) = single_gen {
        if p.inverse_partner[i].is_some() {
            // Already invertible; localization is trivial.
            return Ok(LocalizedAlgebra {
                presentation: p.clone(),
                inverted: r.clone(),
                inverse_gen: None,
            });
        }
        unit_pairs.push((i, n));
    }
    let in_base: Vec<usize> = (0..n).filter(|&i| p.in_base[i]).collect();
    let mut relations: Vec<LaurentPoly<D>> = p
        .relations
        .iter()
        .map(|rel| pad_poly(rel, 1))
        .collect();
    // r * r_inv - 1 = 0 in the extended symbols.
    let r_ext = pad_poly(r, 1);
    let inv_var = LaurentPoly::variable(p.domain.clone(), n + 1, n);
    let one = LaurentPoly::one(p.domain.clone(), n + 1);
    relations.push(r_ext.mul(&inv_var)?.sub(&one)?);
    let presentation = AlgebraPresentation::new(
        p.domain.clone(),
        gens,
        unit_pairs,
        in_base,
        relations,
        p.asserted.clone(),
    )?;
    Ok(LocalizedAlgebra {
        presentation,
        inverted: r.clone(),
        inverse_gen: Some(n),
    })
}

/// Domains that can invert one of their constants in place.
pub trait LocalizableDomain: CoeffDomain {
    /// Returns the domain with `c` inverted, or an error when that is not
    /// expressible (e.g. a non-unit constant over a field cannot happen, and
    /// prime fields have nothing to invert).
    fn localize_at(&self, c: &Self::Elem) -> Result<Self>;

    /// The constant of the domain whose inversion makes `c` a unit. A
    /// fraction outside the domain needs both its numerator and denominator
    /// inverted; over a field every nonzero constant is already a unit.
    fn inverting_constant(&self, c: &Self::Elem) -> Self::Elem {
        c.clone()
    }

    /// Whether `c` lies in the domain. Element values live in the fraction
    /// field, so this can fail only for domains that are not fields.
    fn contains(&self, _c: &Self::Elem) -> bool {
        true
    }
}

impl LocalizableDomain for crate::domain::Rationals {
    fn localize_at(&self, c: &Self::Elem) -> Result<Self> {
        if self.is_zero(c) {
            return Err(Error::ZeroElement);
        }
        Ok(crate::domain::Rationals)
    }
}

impl LocalizableDomain for crate::domain::PrimeField {
    fn localize_at(&self, c: &Self::Elem) -> Result<Self> {
        if self.is_zero(c) {
            return Err(Error::ZeroElement);
        }
        Ok(self.clone())
    }
}

impl LocalizableDomain for crate::domain::Integers {
    fn localize_at(&self, c: &Self::Elem) -> Result<Self> {
        if self.is_zero(c) {
            return Err(Error::ZeroElement);
        }
        if !self.contains_ratio(c) {
            return Err(Error::MalformedPresentation(format!(
                "{} does not lie in {}",
                self.format_elem(c),
                self.name()
            )));
        }
        self.localize(c.numer())
    }

    fn inverting_constant(&self, c: &Self::Elem) -> Self::Elem {
        num_rational::BigRational::from_integer((c.numer() * c.denom()).abs())
    }

    fn contains(&self, c: &Self::Elem) -> bool {
        self.contains_ratio(c)
    }
}

/// Appends `extra` fresh symbols to a polynomial's variable space.
pub fn pad_poly<D: CoeffDomain>(p: &LaurentPoly<D>, extra: usize) -> LaurentPoly<D> {
    LaurentPoly::from_terms(
        p.domain().clone(),
        p.rank() + extra,
        p.terms().map(|(e, c)| (e.pad(extra), c.clone())).collect(),
    )
}

fn single_generator_symbol<D: CoeffDomain>(r: &LaurentPoly<D>) -> Option<usize> {
    if r.num_terms() != 1 {
        return None;
    }
    let (e, c) = r.terms().next().unwrap();
    if !r.domain().is_one(c) {
        return None;
    }
    let mut idx = None;
    for (i, k) in e.entries().iter().enumerate() {
        if k.is_zero() {
            continue;
        }
        if !k.is_one() || idx.is_some() {
            return None;
        }
        idx = Some(i);
    }
    idx
}

/// One monomial generator of a [`MonomialSubalgebra`]: the element
/// `coeff * y^expo` of the ambient torus, optionally declared invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoGen<D: CoeffDomain> {
    pub name: String,
    pub coeff: D::Elem,
    pub expo: ExponentVector,
    pub unit: bool,
}

/// An element `scalar * prod gens[i]^k_i` of a monomial subalgebra, with the
/// exponent word recorded explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitElement<D: CoeffDomain> {
    /// Total coefficient of the element (as an element of the fraction
    /// field when generator coefficients are not units of the domain).
    pub coeff: D::Elem,
    /// Ambient exponent vector.
    pub expo: ExponentVector,
    /// Expression over generator indices: `prod gens[i]^k_i` times a scalar.
    pub word: Vec<(usize, BigInt)>,
}

/// Decomposition of a unit as `scalar * prod gens[i]^k_i` with `scalar` a
/// unit of the coefficient domain.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitExpression<D: CoeffDomain> {
    pub scalar: D::Elem,
    pub word: Vec<(usize, BigInt)>,
}

/// A subalgebra of the Laurent torus `R[y_1^{+-1}, ..., y_s^{+-1}]`
/// generated by scalar multiples of monomials, together with an optional
/// monomial base subring.
///
/// The unit group modulo scalars is the lattice spanned by the exponents of
/// the generators flagged `unit`; `A*/R*` is torsion free automatically, so
/// lattice ranks translate directly into unit-group ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialSubalgebra<D: CoeffDomain> {
    domain: D,
    ambient_rank: usize,
    gens: Vec<MonoGen<D>>,
    base_gens: Vec<MonoGen<D>>,
}

impl<D: CoeffDomain> MonomialSubalgebra<D> {
    pub fn new(
        domain: D,
        ambient_rank: usize,
        gens: Vec<MonoGen<D>>,
        base_gens: Vec<MonoGen<D>>,
    ) -> Result<Self> {
        for g in gens.iter().chain(&base_gens) {
            if g.expo.rank() != ambient_rank {
                return Err(Error::RankMismatch {
                    expected: ambient_rank,
                    found: g.expo.rank(),
                });
            }
            if domain.is_zero(&g.coeff) {
                return Err(Error::MalformedPresentation(format!(
                    "generator '{}' has zero coefficient",
                    g.name
                )));
            }
        }
        for (i, g) in gens.iter().enumerate() {
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::MalformedPresentation(format!(
                    "duplicate generator '{}'",
                    g.name
                )));
            }
        }
        Ok(MonomialSubalgebra { domain, ambient_rank, gens, base_gens })
    }

    /// The full torus `R[y_1^{+-1}, ..., y_rank^{+-1}]` with invertible
    /// coordinate generators named after `names` (or `y1, y2, ...`).
    pub fn full_torus(domain: D, rank: usize, names: Option<Vec<String>>) -> Self {
        let names =
            names.unwrap_or_else(|| (1..=rank).map(|i| format!("y{i}")).collect());
        assert_eq!(names.len(), rank);
        let gens = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| MonoGen {
                name,
                coeff: domain.one(),
                expo: ExponentVector::unit(rank, i),
                unit: true,
            })
            .collect();
        MonomialSubalgebra::new(domain, rank, gens, Vec::new()).expect("torus is well formed")
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn gens(&self) -> &[MonoGen<D>] {
        &self.gens
    }

    pub fn gen(&self, i: usize) -> &MonoGen<D> {
        &self.gens[i]
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn base_gens(&self) -> &[MonoGen<D>] {
        &self.base_gens
    }

    /// Replaces the coefficient domain, keeping all generators. Used when a
    /// localization enlarges the domain without changing the element type.
    pub fn with_domain(mut self, domain: D) -> Self {
        self.domain = domain;
        self
    }

    /// Replaces the base subring generators.
    pub fn with_base_gens(mut self, base_gens: Vec<MonoGen<D>>) -> Result<Self> {
        for g in &base_gens {
            if g.expo.rank() != self.ambient_rank {
                return Err(Error::RankMismatch {
                    expected: self.ambient_rank,
                    found: g.expo.rank(),
                });
            }
        }
        self.base_gens = base_gens;
        Ok(self)
    }

    fn unit_gen_indices(&self) -> Vec<usize> {
        (0..self.gens.len()).filter(|&i| self.gens[i].unit).collect()
    }

    fn unit_exponent_matrix(&self) -> IntMatrix {
        let rows: Vec<Vec<BigInt>> = self
            .unit_gen_indices()
            .iter()
            .map(|&i| self.gens[i].expo.entries().to_vec())
            .collect();
        IntMatrix::new(rows.len(), self.ambient_rank, rows.into_iter().flatten().collect())
    }

    /// The lattice `A*/R*` spanned by the exponents of the invertible
    /// generators. Independent of generator order and scalars.
    pub fn unit_lattice(&self) -> LatticeBasis {
        LatticeBasis::from_span_matrix(&self.unit_exponent_matrix())
    }

    /// The lattice spanned by all generator exponents (units or not).
    pub fn generator_lattice(&self) -> LatticeBasis {
        LatticeBasis::from_rows(
            self.ambient_rank,
            self.gens.iter().map(|g| g.expo.entries().to_vec()).collect(),
        )
    }

    /// The lattice spanned by the base subring generators.
    pub fn base_lattice(&self) -> LatticeBasis {
        LatticeBasis::from_rows(
            self.ambient_rank,
            self.base_gens.iter().map(|g| g.expo.entries().to_vec()).collect(),
        )
    }

    /// Transcendence degree over the base: monomials are algebraically
    /// independent exactly when their exponents are linearly independent,
    /// so this is a difference of lattice ranks.
    pub fn transcendence_degree(&self) -> usize {
        let total = LatticeBasis::from_rows(
            self.ambient_rank,
            self.gens
                .iter()
                .chain(&self.base_gens)
                .map(|g| g.expo.entries().to_vec())
                .collect(),
        );
        total.rank() - self.base_lattice().rank()
    }

    /// Whether the base subring is algebraically closed in the subalgebra:
    /// no generator with nonzero exponent may fall into the saturation of
    /// the base exponent lattice (such a generator would have a power inside
    /// the fraction field of the base).
    pub fn base_algebraically_closed(&self) -> bool {
        let closed_region = saturate(&self.base_lattice());
        self.gens
            .iter()
            .filter(|g| !g.expo.is_zero())
            .all(|g| !closed_region.contains(g.expo.entries()))
    }

    /// Whether the unit lattice is all of the ambient `Z^rank`.
    pub fn is_full_torus(&self) -> bool {
        self.unit_lattice().rank() == self.ambient_rank
    }

    /// Canonical units realizing the Hermite basis of the unit lattice:
    /// element `i` has exponent equal to basis vector `i`, and its word over
    /// the unit generators comes from the unimodular transform of the
    /// Hermite reduction. Generates `A*` over `R*` by construction.
    pub fn units_mod_scalars(&self) -> Result<Vec<UnitElement<D>>> {
        let unit_idx = self.unit_gen_indices();
        let m = self.unit_exponent_matrix();
        let (h, u) = m.hermite_normal_form();
        let mut out = Vec::new();
        for i in 0..h.rows() {
            if h.row(i).iter().all(Zero::is_zero) {
                continue;
            }
            let mut word = Vec::new();
            let mut coeff = self.domain.one();
            for (j, &gi) in unit_idx.iter().enumerate() {
                let k = u[(i, j)].clone();
                if k.is_zero() {
                    continue;
                }
                coeff = self
                    .domain
                    .mul(&coeff, &pow_in_fraction_field(&self.domain, &self.gens[gi].coeff, &k)?);
                word.push((gi, k));
            }
            out.push(UnitElement {
                coeff,
                expo: ExponentVector::new(h.row(i).to_vec()),
                word,
            });
        }
        Ok(out)
    }

    /// Writes the torus element `coeff * y^expo` as
    /// `scalar * prod gens[i]^k_i` with `scalar` a unit of the domain, if it
    /// is a unit of the subalgebra; `None` otherwise.
    pub fn classify_unit(&self, coeff: &D::Elem, expo: &ExponentVector) -> Option<UnitExpression<D>> {
        if self.domain.is_zero(coeff) {
            return None;
        }
        let unit_idx = self.unit_gen_indices();
        let m = self.unit_exponent_matrix();
        let x = coordinates_in_rows(&m, expo.entries())?;
        let mut word_coeff = self.domain.one();
        let mut word = Vec::new();
        for (j, &gi) in unit_idx.iter().enumerate() {
            if x[j].is_zero() {
                continue;
            }
            word_coeff = self
                .domain
                .mul(
                    &word_coeff,
                    &pow_in_fraction_field(&self.domain, &self.gens[gi].coeff, &x[j]).ok()?,
                );
            word.push((gi, x[j].clone()));
        }
        let scalar = self
            .domain
            .mul(coeff, &invert_in_fraction_field(&self.domain, &word_coeff)?);
        self.domain.is_unit(&scalar).then_some(UnitExpression { scalar, word })
    }

    /// Whether `coeff * y^expo` is a unit of the subalgebra.
    pub fn is_unit_element(&self, coeff: &D::Elem, expo: &ExponentVector) -> bool {
        self.classify_unit(coeff, expo).is_some()
    }

    /// The algebraic closure of `R[u, u^-1]` in the subalgebra for a unit
    /// `u = coeff * y^expo`: the subalgebra spanned by every generator whose
    /// exponent lies on the rational line through `expo`, together with the
    /// canonical unit `w` realizing it as `R[w, w^-1]` when the closure's
    /// unit lattice has rank one.
    pub fn algebraic_closure_of_unit(
        &self,
        coeff: &D::Elem,
        expo: &ExponentVector,
    ) -> Result<(MonomialSubalgebra<D>, Option<UnitElement<D>>)> {
        if expo.is_zero() {
            return Err(Error::ZeroExponent(
                "closure of a scalar unit is the whole base".into(),
            ));
        }
        if self.classify_unit(coeff, expo).is_none() {
            return Err(Error::NotAUnit(format!(
                "{} * y^{:?} is not a unit of the subalgebra",
                self.domain.format_elem(coeff),
                expo
            )));
        }
        let line = saturate(&LatticeBasis::from_rows(
            self.ambient_rank,
            vec![expo.entries().to_vec()],
        ));
        let gens: Vec<MonoGen<D>> = self
            .gens
            .iter()
            .filter(|g| line.contains(g.expo.entries()))
            .cloned()
            .collect();
        let base_gens: Vec<MonoGen<D>> = self
            .base_gens
            .iter()
            .filter(|g| line.contains(g.expo.entries()))
            .cloned()
            .collect();
        let closure =
            MonomialSubalgebra::new(self.domain.clone(), self.ambient_rank, gens, base_gens)?;
        let w = if closure.unit_lattice().rank() == 1 {
            Some(closure.units_mod_scalars()?.remove(0))
        } else {
            None
        };
        Ok((closure, w))
    }

    /// The Laurent extension `A[y_1^{+-1}, ..., y_extra^{+-1}]` as a
    /// monomial subalgebra of the enlarged torus: original generators are
    /// padded and `extra` fresh invertible coordinates are appended.
    pub fn extend(&self, extra: usize, names: &[String]) -> Self {
        assert_eq!(names.len(), extra);
        let rank = self.ambient_rank + extra;
        let mut gens: Vec<MonoGen<D>> = self
            .gens
            .iter()
            .map(|g| MonoGen {
                name: g.name.clone(),
                coeff: g.coeff.clone(),
                expo: g.expo.pad(extra),
                unit: g.unit,
            })
            .collect();
        for (i, name) in names.iter().enumerate() {
            gens.push(MonoGen {
                name: name.clone(),
                coeff: self.domain.one(),
                expo: ExponentVector::unit(rank, self.ambient_rank + i),
                unit: true,
            });
        }
        let base_gens = self
            .base_gens
            .iter()
            .map(|g| MonoGen {
                name: g.name.clone(),
                coeff: g.coeff.clone(),
                expo: g.expo.pad(extra),
                unit: g.unit,
            })
            .collect();
        MonomialSubalgebra {
            domain: self.domain.clone(),
            ambient_rank: rank,
            gens,
            base_gens,
        }
    }

    /// Evaluates a word `prod gens[i]^k_i` to a torus element
    /// `(coeff, expo)`.
    pub fn eval_word(&self, word: &[(usize, BigInt)]) -> Result<(D::Elem, ExponentVector)> {
        let mut coeff = self.domain.one();
        let mut expo = ExponentVector::zero(self.ambient_rank);
        for (i, k) in word {
            let g = &self.gens[*i];
            coeff = self.domain.mul(&coeff, &pow_in_fraction_field(&self.domain, &g.coeff, k)?);
            expo = expo.add(&g.expo.scale(k));
        }
        Ok((coeff, expo))
    }
}

/// `a^k` allowing negative exponents for any nonzero `a`, staying inside the
/// element type (which embeds the fraction field for the integer domains).
pub fn pow_in_fraction_field<D: CoeffDomain>(
    domain: &D,
    a: &D::Elem,
    k: &BigInt,
) -> Result<D::Elem> {
    if !k.is_negative() {
        return domain.pow_int(a, k);
    }
    let inv = invert_in_fraction_field(domain, a).ok_or_else(|| {
        Error::NotAUnit(format!("{} has no inverse", domain.format_elem(a)))
    })?;
    domain.pow_int(&inv, &-k)
}

fn invert_in_fraction_field<D: CoeffDomain>(domain: &D, a: &D::Elem) -> Option<D::Elem> {
    domain.fraction_inverse(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Integers, Rationals};
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn mono(name: &str, coeff: i64, expo: &[i64], unit: bool) -> MonoGen<Rationals> {
        MonoGen {
            name: name.into(),
            coeff: q(coeff),
            expo: ExponentVector::from_i64(expo),
            unit,
        }
    }

    fn cubic() -> AlgebraPresentation<Rationals> {
        // QQ[x, y] / (x^2 - y^3 - 1)
        let names = vec!["x".to_string(), "y".to_string()];
        let rel = crate::parse::parse_poly("x^2 - y^3 - 1", &names, &Rationals).unwrap();
        AlgebraPresentation::new(
            Rationals,
            names,
            vec![],
            vec![],
            vec![rel],
            AssertedFlags { base_alg_closed: true, trdeg: Some(1) },
        )
        .unwrap()
    }

    fn hyperbola() -> AlgebraPresentation<Rationals> {
        // QQ[x, y] / (x*y - 1) with x:y a unit pair.
        let names = vec!["x".to_string(), "y".to_string()];
        let rel = crate::parse::parse_poly("x*y - 1", &names, &Rationals).unwrap();
        AlgebraPresentation::new(
            Rationals,
            names,
            vec![(0, 1)],
            vec![],
            vec![rel],
            AssertedFlags { base_alg_closed: true, trdeg: Some(1) },
        )
        .unwrap()
    }

    #[test]
    fn unit_pairs_get_their_relation_automatically() {
        let names = vec!["y".to_string(), "yinv".to_string()];
        let p = AlgebraPresentation::new(
            Rationals,
            names.clone(),
            vec![(0, 1)],
            vec![],
            vec![],
            AssertedFlags::default(),
        )
        .unwrap();
        assert_eq!(p.relations().len(), 1);
        let rel = crate::parse::parse_poly("y*yinv - 1", &names, &Rationals).unwrap();
        assert_eq!(p.relations()[0], rel);
        // Declaring it explicitly does not duplicate it.
        assert_eq!(hyperbola().relations().len(), 1);
    }

    #[test]
    fn reduce_folds_inverse_symbols() {
        let p = hyperbola();
        let names = p.gen_names().to_vec();
        let e = crate::parse::parse_poly("x^2*y^3 + y", &names, &Rationals).unwrap();
        let reduced = p.reduce(&e);
        let expect = crate::parse::parse_poly("x^-1 + x^-1", &names, &Rationals).unwrap();
        assert_eq!(reduced, expect);
    }

    #[test]
    fn symbol_view_of_a_unit_pair_is_a_laurent_line() {
        let p = hyperbola();
        let view = p.symbol_subalgebra();
        assert_eq!(view.num_gens(), 1);
        assert!(view.gen(0).unit);
        assert_eq!(view.gen(0).name, "x");
        assert_eq!(view.unit_lattice().rank(), 1);
        let c = cubic();
        let view = c.symbol_subalgebra();
        assert_eq!(view.num_gens(), 2);
        assert!(view.unit_lattice().is_empty());
    }

    #[test]
    fn malformed_presentations_are_rejected() {
        let names = vec!["x".to_string(), "x".to_string()];
        assert!(matches!(
            AlgebraPresentation::new(Rationals, names, vec![], vec![], vec![], AssertedFlags::default()),
            Err(Error::MalformedPresentation(_))
        ));
        let names = vec!["x".to_string(), "y".to_string()];
        let zero = LaurentPoly::zero(Rationals, 2);
        assert!(matches!(
            AlgebraPresentation::new(
                Rationals,
                names.clone(),
                vec![],
                vec![],
                vec![zero],
                AssertedFlags::default()
            ),
            Err(Error::MalformedPresentation(_))
        ));
        // Negative power of a generator without a declared inverse.
        let bad = crate::parse::parse_poly("x^-1 - y", &names, &Rationals).unwrap();
        assert!(matches!(
            AlgebraPresentation::new(
                Rationals,
                names,
                vec![],
                vec![],
                vec![bad],
                AssertedFlags::default()
            ),
            Err(Error::MalformedPresentation(_))
        ));
    }

    #[test]
    fn unit_lattice_of_a_disguised_line() {
        // u = t^2 and v = t^3, both invertible, inside QQ[t^{+-1}].
        let a = MonomialSubalgebra::new(
            Rationals,
            1,
            vec![mono("u", 1, &[2], true), mono("v", 1, &[3], true)],
            vec![],
        )
        .unwrap();
        let l = a.unit_lattice();
        assert_eq!(l.basis_rows(), vec![vec![BigInt::one()]]);
        // Generator order does not matter.
        let b = MonomialSubalgebra::new(
            Rationals,
            1,
            vec![mono("v", 1, &[3], true), mono("u", 1, &[2], true)],
            vec![],
        )
        .unwrap();
        assert_eq!(b.unit_lattice(), l);
    }

    #[test]
    fn units_mod_scalars_realizes_the_hermite_basis() {
        let a = MonomialSubalgebra::new(
            Rationals,
            1,
            vec![mono("u", 1, &[2], true), mono("v", 1, &[3], true)],
            vec![],
        )
        .unwrap();
        let units = a.units_mod_scalars().unwrap();
        assert_eq!(units.len(), 1);
        let w = &units[0];
        assert_eq!(w.expo, ExponentVector::from_i64(&[1]));
        // The word evaluates back to the recorded element.
        let (c, e) = a.eval_word(&w.word).unwrap();
        assert_eq!((c, e), (w.coeff.clone(), w.expo.clone()));
    }

    #[test]
    fn unit_classification_with_scalars() {
        let a = MonomialSubalgebra::new(
            Rationals,
            2,
            vec![mono("u", 2, &[1, 1], true), mono("v", 1, &[0, 1], false)],
            vec![],
        )
        .unwrap();
        // 6 * y1^2 y2^2 = (3/2) * u^2.
        let expr = a.classify_unit(&q(6), &ExponentVector::from_i64(&[2, 2])).unwrap();
        assert_eq!(expr.word, vec![(0, BigInt::from(2))]);
        assert_eq!(expr.scalar, BigRational::new(BigInt::from(3), BigInt::from(2)));
        // v's direction is not invertible.
        assert!(a.classify_unit(&q(1), &ExponentVector::from_i64(&[0, 1])).is_none());
    }

    #[test]
    fn unit_classification_over_the_integers() {
        let z = Integers::new();
        let two = BigRational::from_integer(BigInt::from(2));
        let a = MonomialSubalgebra::new(
            z.clone(),
            1,
            vec![MonoGen {
                name: "u".into(),
                coeff: two.clone(),
                expo: ExponentVector::from_i64(&[2]),
                unit: true,
            }],
            vec![],
        )
        .unwrap();
        // u itself is a unit of A even though 2 is not a unit of Z.
        assert!(a.is_unit_element(&two, &ExponentVector::from_i64(&[2])));
        // 3 * t^2 = (3/2) * u has non-unit residual scalar.
        let three = BigRational::from_integer(BigInt::from(3));
        assert!(!a.is_unit_element(&three, &ExponentVector::from_i64(&[2])));
    }

    #[test]
    fn closure_of_a_unit_inside_the_line() {
        let a = MonomialSubalgebra::new(
            Rationals,
            1,
            vec![mono("t", 1, &[1], true)],
            vec![],
        )
        .unwrap();
        let (closure, w) = a
            .algebraic_closure_of_unit(&q(1), &ExponentVector::from_i64(&[2]))
            .unwrap();
        assert_eq!(closure.num_gens(), 1);
        let w = w.unwrap();
        assert_eq!(w.expo, ExponentVector::from_i64(&[1]));
        // Idempotent: the closure of w inside the closure is the closure.
        let (closure2, _) = closure
            .algebraic_closure_of_unit(&w.coeff, &w.expo)
            .unwrap();
        assert_eq!(closure2, closure);
    }

    #[test]
    fn closure_rejects_scalars_and_non_units() {
        let a = MonomialSubalgebra::new(
            Rationals,
            2,
            vec![mono("u", 1, &[1, 0], true), mono("v", 1, &[0, 1], false)],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            a.algebraic_closure_of_unit(&q(1), &ExponentVector::from_i64(&[0, 0])),
            Err(Error::ZeroExponent(_))
        ));
        assert!(matches!(
            a.algebraic_closure_of_unit(&q(1), &ExponentVector::from_i64(&[0, 1])),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn base_closure_and_transcendence_degree() {
        // The base k[u^-1 v^2] inside k[u^{+-1}, v].
        let a = MonomialSubalgebra::new(
            Rationals,
            2,
            vec![mono("u", 1, &[1, 0], true), mono("v", 1, &[0, 1], false)],
            vec![mono("r", 1, &[-1, 2], false)],
        )
        .unwrap();
        assert!(a.base_algebraically_closed());
        assert_eq!(a.transcendence_degree(), 1);
        // A generator inside the saturation of the base is algebraic.
        let b = MonomialSubalgebra::new(
            Rationals,
            1,
            vec![mono("s", 1, &[-2], false)],
            vec![mono("r", 1, &[2], false)],
        )
        .unwrap();
        assert!(!b.base_algebraically_closed());
    }

    #[test]
    fn extension_appends_invertible_coordinates() {
        let a = MonomialSubalgebra::new(
            Rationals,
            1,
            vec![mono("v", 1, &[1], false)],
            vec![],
        )
        .unwrap();
        let ext = a.extend(2, &["p".to_string(), "q".to_string()]);
        assert_eq!(ext.ambient_rank(), 3);
        assert_eq!(ext.num_gens(), 3);
        assert_eq!(ext.unit_lattice().rank(), 2);
        assert_eq!(a.unit_lattice().rank(), 0);
    }

    #[test]
    fn localize_at_a_generator_symbol() {
        let names = vec!["x".to_string()];
        let p = AlgebraPresentation::new(
            Rationals,
            names.clone(),
            vec![],
            vec![],
            vec![],
            AssertedFlags::default(),
        )
        .unwrap();
        let x = LaurentPoly::variable(Rationals, 1, 0);
        let loc = localize(&p, &x).unwrap();
        assert_eq!(loc.inverse_gen, Some(1));
        assert_eq!(loc.presentation.gen_names(), &["x".to_string(), "x_inv".to_string()]);
        assert_eq!(loc.presentation.inverse_partner(0), Some(1));
        // Grading extension gives the fresh symbol the opposite degree.
        assert_eq!(
            loc.extend_grading(&[BigInt::from(3)]),
            Some(vec![BigInt::from(3), BigInt::from(-3)])
        );
    }

    #[test]
    fn localize_at_a_constant_localizes_the_coefficients() {
        let z = Integers::new();
        let names = vec!["y".to_string()];
        let p = AlgebraPresentation::new(
            z.clone(),
            names,
            vec![],
            vec![],
            vec![],
            AssertedFlags::default(),
        )
        .unwrap();
        let two = LaurentPoly::constant(z, 1, BigRational::from_integer(BigInt::from(2)));
        let loc = localize(&p, &two).unwrap();
        assert_eq!(loc.inverse_gen, None);
        assert_eq!(loc.presentation.domain().name(), "ZZ[1/2]");
        // The grading is unchanged by a coefficient localization.
        assert_eq!(loc.extend_grading(&[BigInt::one()]), Some(vec![BigInt::one()]));
    }

    #[test]
    fn localize_at_zero_is_rejected() {
        let p = cubic();
        let zero = LaurentPoly::zero(Rationals, 2);
        assert!(matches!(localize(&p, &zero), Err(Error::ZeroElement)));
    }

    #[test]
    fn localize_at_an_inhomogeneous_element_blocks_grading_extension() {
        let names = vec!["x".to_string(), "y".to_string()];
        let p = AlgebraPresentation::new(
            Rationals,
            names.clone(),
            vec![],
            vec![],
            vec![],
            AssertedFlags::default(),
        )
        .unwrap();
        let r = crate::parse::parse_poly("x + y^2", &names, &Rationals).unwrap();
        let loc = localize(&p, &r).unwrap();
        assert_eq!(loc.inverse_gen, Some(2));
        assert_eq!(loc.extend_grading(&[BigInt::one(), BigInt::one()]), None);
        assert_eq!(
            loc.extend_grading(&[BigInt::from(2), BigInt::one()]),
            Some(vec![BigInt::from(2), BigInt::one(), BigInt::from(-2)])
        );
    }
}
