//! Laurent extensions `A[y_1^{+-1}, ..., y_n^{+-1}]` of presented algebras
//! and homomorphisms between them.
//!
//! The adjoined variables are honest Laurent variables: negative exponents
//! on them are stored natively, while negative exponents on base symbols
//! are only legal for generators with a declared inverse partner (after
//! folding via [`LaurentExtension::reduce`]). A [`LaurentHom`] records one
//! image per source symbol — partners get the inverted image automatically
//! — plus an optional independent set of images for an alleged inverse.
//! Application is substitution; no quotient-ring normalization happens, so
//! identity checks downstream compare canonical reduced forms.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::algebra::{AlgebraPresentation, MonomialSubalgebra, UnitExpression};
use crate::domain::CoeffDomain;
use crate::error::{Error, Result};
use crate::poly::{ExponentVector, LaurentPoly};

/// The ring `A[y_1^{+-1}, ..., y_n^{+-1}]` over a presented algebra `A`.
///
/// Elements are Laurent polynomials in `base.num_gens() + n` symbols, base
/// symbols first.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentExtension<D: CoeffDomain> {
    base: AlgebraPresentation<D>,
    adjoined: Vec<String>,
}

impl<D: CoeffDomain> LaurentExtension<D> {
    pub fn new(base: AlgebraPresentation<D>, adjoined: Vec<String>) -> Result<Self> {
        for (i, name) in adjoined.iter().enumerate() {
            if base.gen_index(name).is_some() || adjoined[..i].contains(name) {
                return Err(Error::MalformedPresentation(format!(
                    "adjoined variable '{name}' collides with an existing symbol"
                )));
            }
        }
        Ok(LaurentExtension { base, adjoined })
    }

    /// The extension with no adjoined variables (the algebra itself).
    pub fn trivial(base: AlgebraPresentation<D>) -> Self {
        LaurentExtension { base, adjoined: Vec::new() }
    }

    pub fn base(&self) -> &AlgebraPresentation<D> {
        &self.base
    }

    pub fn num_adjoined(&self) -> usize {
        self.adjoined.len()
    }

    pub fn adjoined_names(&self) -> &[String] {
        &self.adjoined
    }

    pub fn total_rank(&self) -> usize {
        self.base.num_gens() + self.adjoined.len()
    }

    pub fn domain(&self) -> &D {
        self.base.domain()
    }

    /// All symbol names, base generators first.
    pub fn symbol_names(&self) -> Vec<String> {
        let mut names = self.base.gen_names().to_vec();
        names.extend(self.adjoined.iter().cloned());
        names
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbol_names().iter().position(|n| n == name)
    }

    /// Folds secondary pair symbols into negative powers of their partners,
    /// leaving adjoined coordinates untouched.
    pub fn reduce(&self, p: &LaurentPoly<D>) -> LaurentPoly<D> {
        assert_eq!(p.rank(), self.total_rank(), "element has wrong symbol rank");
        let n = self.base.num_gens();
        let mut terms = Vec::new();
        for (e, c) in p.terms() {
            let mut entries = e.entries().to_vec();
            for i in 0..n {
                if let Some(j) = self.base.inverse_partner(i) {
                    if i < j && !entries[j].is_zero() {
                        let k = std::mem::replace(&mut entries[j], BigInt::zero());
                        entries[i] -= k;
                    }
                }
            }
            terms.push((ExponentVector::new(entries), c.clone()));
        }
        LaurentPoly::from_terms(self.domain().clone(), p.rank(), terms)
    }

    /// Whether the reduced form of `p` only uses negative exponents on
    /// invertible symbols (paired base generators or adjoined variables).
    pub fn is_valid_element(&self, p: &LaurentPoly<D>) -> bool {
        let n = self.base.num_gens();
        self.reduce(p).terms().all(|(e, _)| {
            e.entries().iter().enumerate().all(|(i, k)| {
                !k.is_negative() || i >= n || self.base.inverse_partner(i).is_some()
            })
        })
    }

    /// The monomial view of the extension: the base symbol view with the
    /// adjoined variables appended as invertible generators.
    pub fn monomial_view(&self) -> MonomialSubalgebra<D> {
        self.base
            .symbol_subalgebra()
            .extend(self.adjoined.len(), &self.adjoined)
    }

    /// Splits a symbol exponent into its base part and its adjoined part.
    pub fn split_exponent(&self, e: &ExponentVector) -> (ExponentVector, ExponentVector) {
        e.split(self.base.num_gens())
    }

    /// Embeds an element of the base algebra (rank `num_gens`).
    pub fn embed_base(&self, p: &LaurentPoly<D>) -> LaurentPoly<D> {
        assert_eq!(p.rank(), self.base.num_gens(), "base element has wrong rank");
        crate::algebra::pad_poly(p, self.adjoined.len())
    }

    /// Classifies a unit of the extension, returning its coefficient,
    /// reduced exponent and its word over the invertible symbols.
    pub fn classify_unit(
        &self,
        p: &LaurentPoly<D>,
    ) -> Option<(D::Elem, ExponentVector, UnitExpression<D>)> {
        let reduced = self.reduce(p);
        if reduced.num_terms() != 1 {
            return None;
        }
        let (e, c) = reduced.terms().next().unwrap();
        let expr = self.monomial_view().classify_unit(c, e)?;
        Some((c.clone(), e.clone(), expr))
    }
}

/// A homomorphism between Laurent extensions, given by symbol images.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentHom<D: CoeffDomain> {
    source: LaurentExtension<D>,
    target: LaurentExtension<D>,
    images: Vec<LaurentPoly<D>>,
    inverse_images: Option<Vec<LaurentPoly<D>>>,
}

impl<D: CoeffDomain> LaurentHom<D> {
    /// Builds a homomorphism from named images of the primary source
    /// symbols (every base generator that is not the second member of a
    /// unit pair, plus every adjoined variable). Secondary pair symbols
    /// receive the inverted image automatically; adjoined variables must
    /// map to units of the target.
    pub fn new(
        source: LaurentExtension<D>,
        target: LaurentExtension<D>,
        named_images: Vec<(String, LaurentPoly<D>)>,
    ) -> Result<Self> {
        let names = source.symbol_names();
        let nbase = source.base().num_gens();
        let mut provided: Vec<Option<LaurentPoly<D>>> = vec![None; names.len()];
        for (name, image) in named_images {
            let idx = source.symbol_index(&name).ok_or_else(|| {
                Error::MalformedPresentation(format!("unknown source symbol '{name}'"))
            })?;
            if provided[idx].is_some() {
                return Err(Error::MalformedPresentation(format!(
                    "duplicate image for '{name}'"
                )));
            }
            if image.rank() != target.total_rank() {
                return Err(Error::RankMismatch {
                    expected: target.total_rank(),
                    found: image.rank(),
                });
            }
            if !target.is_valid_element(&image) {
                return Err(Error::MalformedPresentation(format!(
                    "image of '{name}' uses a negative power of a non-invertible symbol"
                )));
            }
            provided[idx] = Some(target.reduce(&image));
        }
        let mut images: Vec<Option<LaurentPoly<D>>> = vec![None; names.len()];
        for i in 0..names.len() {
            let secondary = i < nbase
                && matches!(source.base().inverse_partner(i), Some(j) if j < i);
            if secondary {
                if provided[i].is_some() {
                    return Err(Error::MalformedPresentation(format!(
                        "'{}' is the inverse of '{}'; its image is derived, not given",
                        names[i],
                        names[source.base().inverse_partner(i).unwrap()]
                    )));
                }
                continue;
            }
            let image = provided[i].take().ok_or_else(|| {
                Error::MissingHypothesis(format!("no image given for '{}'", names[i]))
            })?;
            let invertible = target.classify_unit(&image).is_some();
            if (i >= nbase || source.base().inverse_partner(i).is_some()) && !invertible {
                return Err(Error::NotAUnit(format!(
                    "'{}' is invertible but its image {} is not a unit of the target",
                    names[i],
                    image.to_string_with(&target.symbol_names())
                )));
            }
            images[i] = Some(image);
        }
        // Derive the secondary images by inversion.
        for i in 0..nbase {
            if let Some(j) = source.base().inverse_partner(i) {
                if j < i {
                    let primary = images[j].clone().expect("primary image present");
                    images[i] = Some(primary.pow_fraction(&BigInt::from(-1))?);
                }
            }
        }
        Ok(LaurentHom {
            source,
            target,
            images: images.into_iter().map(Option::unwrap).collect(),
            inverse_images: None,
        })
    }

    /// Attaches images for an alleged inverse homomorphism (named images of
    /// the primary target symbols, as expressions in the source symbols).
    pub fn with_inverse(
        mut self,
        named_images: Vec<(String, LaurentPoly<D>)>,
    ) -> Result<Self> {
        let reversed =
            LaurentHom::new(self.target.clone(), self.source.clone(), named_images)?;
        self.inverse_images = Some(reversed.images);
        Ok(self)
    }

    pub fn source(&self) -> &LaurentExtension<D> {
        &self.source
    }

    pub fn target(&self) -> &LaurentExtension<D> {
        &self.target
    }

    /// Image of source symbol `i`, in reduced target form.
    pub fn image(&self, i: usize) -> &LaurentPoly<D> {
        &self.images[i]
    }

    pub fn images(&self) -> &[LaurentPoly<D>] {
        &self.images
    }

    pub fn has_inverse_images(&self) -> bool {
        self.inverse_images.is_some()
    }

    /// Image of target symbol `i` under the recorded inverse.
    pub fn inverse_image(&self, i: usize) -> Result<&LaurentPoly<D>> {
        self.inverse_images
            .as_ref()
            .map(|v| &v[i])
            .ok_or_else(|| Error::MissingHypothesis("no inverse images recorded".into()))
    }

    /// Applies the homomorphism by substitution.
    pub fn apply(&self, p: &LaurentPoly<D>) -> Result<LaurentPoly<D>> {
        if p.rank() != self.source.total_rank() {
            return Err(Error::RankMismatch {
                expected: self.source.total_rank(),
                found: p.rank(),
            });
        }
        self.source.reduce(p).substitute_fraction(&self.images)
    }

    /// Applies the recorded inverse by substitution.
    pub fn apply_inverse(&self, p: &LaurentPoly<D>) -> Result<LaurentPoly<D>> {
        let inv = self
            .inverse_images
            .as_ref()
            .ok_or_else(|| Error::MissingHypothesis("no inverse images recorded".into()))?;
        if p.rank() != self.target.total_rank() {
            return Err(Error::RankMismatch {
                expected: self.target.total_rank(),
                found: p.rank(),
            });
        }
        self.target.reduce(p).substitute_fraction(inv)
    }

    /// The reversed homomorphism built from the inverse images. Its own
    /// inverse images are this map's forward images.
    pub fn reversed(&self) -> Result<LaurentHom<D>> {
        let inv = self
            .inverse_images
            .clone()
            .ok_or_else(|| Error::MissingHypothesis("no inverse images recorded".into()))?;
        Ok(LaurentHom {
            source: self.target.clone(),
            target: self.source.clone(),
            images: inv,
            inverse_images: Some(self.images.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AssertedFlags;
    use crate::domain::Rationals;
    use crate::parse::parse_poly;

    fn hyperbola_ext(adjoined: &[&str]) -> LaurentExtension<Rationals> {
        let names = vec!["x".to_string(), "y".to_string()];
        let rel = parse_poly("x*y - 1", &names, &Rationals).unwrap();
        let base = AlgebraPresentation::new(
            Rationals,
            names,
            vec![(0, 1)],
            vec![],
            vec![rel],
            AssertedFlags::default(),
        )
        .unwrap();
        LaurentExtension::new(base, adjoined.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn poly_in(ext: &LaurentExtension<Rationals>, src: &str) -> LaurentPoly<Rationals> {
        parse_poly(src, &ext.symbol_names(), &Rationals).unwrap()
    }

    #[test]
    fn extension_reduces_and_validates_elements() {
        let ext = hyperbola_ext(&["z"]);
        assert_eq!(ext.total_rank(), 3);
        let p = poly_in(&ext, "x*y^2*z + y");
        let reduced = ext.reduce(&p);
        assert_eq!(reduced, poly_in(&ext, "x^-1*z + x^-1"));
        assert!(ext.is_valid_element(&p));
        assert!(ext.is_valid_element(&poly_in(&ext, "x^-3*z^-2")));
        // A free (unpaired) symbol cannot occur with negative exponent.
        let names = vec!["v".to_string()];
        let free = AlgebraPresentation::new(
            Rationals,
            names,
            vec![],
            vec![],
            vec![],
            AssertedFlags::default(),
        )
        .unwrap();
        let free_ext = LaurentExtension::new(free, vec!["z".to_string()]).unwrap();
        assert!(free_ext.is_valid_element(&poly_in(&free_ext, "v*z^-1")));
        assert!(!free_ext.is_valid_element(&poly_in(&free_ext, "v^-1*z")));
    }

    #[test]
    fn extension_classifies_units() {
        let ext = hyperbola_ext(&["z"]);
        let u = poly_in(&ext, "3*x*y^3*z^-2");
        let (c, e, expr) = ext.classify_unit(&u).unwrap();
        assert_eq!(c, parse_poly("3", &[], &Rationals).unwrap().coeff(&ExponentVector::zero(0)).unwrap().clone());
        assert_eq!(e, ExponentVector::from_i64(&[-2, 0, -2]));
        assert_eq!(Rationals.format_elem(&expr.scalar), "3");
        assert!(ext.classify_unit(&poly_in(&ext, "x + z")).is_none());
    }

    #[test]
    fn hom_derives_partner_images_and_applies() {
        let ext = hyperbola_ext(&["z"]);
        // x -> x, z -> x*z; then y is forced to x^-1.
        let f = LaurentHom::new(
            ext.clone(),
            ext.clone(),
            vec![
                ("x".to_string(), poly_in(&ext, "x")),
                ("z".to_string(), poly_in(&ext, "x*z")),
            ],
        )
        .unwrap();
        assert_eq!(f.image(1), &poly_in(&ext, "x^-1"));
        let p = poly_in(&ext, "y*z^2 + 5");
        assert_eq!(f.apply(&p).unwrap(), poly_in(&ext, "x*z^2 + 5"));
    }

    #[test]
    fn hom_round_trips_with_inverse_images() {
        let ext = hyperbola_ext(&["z"]);
        let f = LaurentHom::new(
            ext.clone(),
            ext.clone(),
            vec![
                ("x".to_string(), poly_in(&ext, "x")),
                ("z".to_string(), poly_in(&ext, "x*z")),
            ],
        )
        .unwrap()
        .with_inverse(vec![
            ("x".to_string(), poly_in(&ext, "x")),
            ("z".to_string(), poly_in(&ext, "x^-1*z")),
        ])
        .unwrap();
        let p = poly_in(&ext, "x^2*z^-3 + y + 7");
        let round = f.apply_inverse(&f.apply(&p).unwrap()).unwrap();
        assert_eq!(round, ext.reduce(&p));
        let rev = f.reversed().unwrap();
        assert_eq!(rev.apply(&f.apply(&p).unwrap()).unwrap(), ext.reduce(&p));
    }

    #[test]
    fn hom_construction_rejects_bad_inputs() {
        let ext = hyperbola_ext(&["z"]);
        // Missing image for z.
        assert!(matches!(
            LaurentHom::new(
                ext.clone(),
                ext.clone(),
                vec![("x".to_string(), poly_in(&ext, "x"))],
            ),
            Err(Error::MissingHypothesis(_))
        ));
        // Adjoined variable must land on a unit.
        assert!(matches!(
            LaurentHom::new(
                ext.clone(),
                ext.clone(),
                vec![
                    ("x".to_string(), poly_in(&ext, "x")),
                    ("z".to_string(), poly_in(&ext, "x + z")),
                ],
            ),
            Err(Error::NotAUnit(_))
        ));
        // The secondary pair symbol has no independent image.
        assert!(matches!(
            LaurentHom::new(
                ext.clone(),
                ext.clone(),
                vec![
                    ("x".to_string(), poly_in(&ext, "x")),
                    ("y".to_string(), poly_in(&ext, "y")),
                    ("z".to_string(), poly_in(&ext, "z")),
                ],
            ),
            Err(Error::MalformedPresentation(_))
        ));
    }
}
