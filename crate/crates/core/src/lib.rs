//! Exact computer algebra for Laurent polynomial rings.
//!
//! The crate provides the pieces needed to reason about rings of the form
//! `R[x_1, x_1^-1, ..., x_n, x_n^-1]` with exact arithmetic throughout:
//!
//! * [`matrix`] / [`lattice`] — integer matrices with arbitrary-precision
//!   entries, Hermite and Smith normal forms, kernels, and saturated
//!   sublattices of `Z^n`.
//! * [`domain`] — coefficient domains (rationals, prime fields, integers and
//!   their localizations) behind a single trait.
//! * [`poly`] — sparse Laurent polynomials with a canonical term order, unit
//!   classification and substitution.
//! * [`grading`] — Z-gradings by weight vectors, homogeneous decomposition,
//!   and the lattice of gradings admitted by a finite presentation.
//! * [`automorphism`] — monomial automorphisms `y_i -> a_i * prod y_j^e_ij`
//!   with exact composition and inversion.
//! * [`algebra`] — finitely presented algebras and monomial subalgebras of a
//!   Laurent torus, unit lattices, and localization.
//! * [`hom`] / [`cancel`] — homomorphisms between Laurent extensions and the
//!   unit-driven cancellation procedures: isomorphism reconstruction, unit
//!   normalization, the Laurent-line characterization, and the cancellation
//!   dispatcher.
//!
//! All computations are deterministic: collections iterate in a fixed order
//! and every normal form has a canonical representative.

pub mod algebra;
pub mod automorphism;
pub mod cancel;
pub mod domain;
pub mod error;
pub mod grading;
pub mod hom;
pub mod lattice;
pub mod matrix;
pub mod parse;
pub mod poly;
pub mod report;

pub use error::Error;
pub use matrix::IntMatrix;
pub use lattice::LatticeBasis;
pub use poly::{ExponentVector, LaurentPoly};
