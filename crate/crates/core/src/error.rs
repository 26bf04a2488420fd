//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Everything that can go wrong in this crate, by name.
///
/// The variant name doubles as a stable machine-readable kind (see
/// [`Error::kind`]); the CLI maps kinds onto exit codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two objects that must share a rank (number of Laurent variables) do not.
    #[error("RankMismatch: expected rank {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    /// An element that had to be a unit is not one.
    #[error("NotAUnit: {0}")]
    NotAUnit(String),

    /// A square integer matrix with determinant outside {1, -1}.
    #[error("NotUnimodular: {0}")]
    NotUnimodular(String),

    /// The zero polynomial where a nonzero one is required.
    #[error("ZeroPolynomial: the zero polynomial has no leading form")]
    ZeroPolynomial,

    /// A claimed dependence relation does not actually sum to zero.
    #[error("NotARelation: {0}")]
    NotARelation(String),

    /// A presentation that violates its own declarations.
    #[error("MalformedPresentation: {0}")]
    MalformedPresentation(String),

    /// Localization at zero.
    #[error("ZeroElement: cannot localize at zero")]
    ZeroElement,

    /// A unit with exponent vector zero where a nonscalar unit is required.
    #[error("ZeroExponent: {0}")]
    ZeroExponent(String),

    /// Input data contradicts a hypothesis of the procedure being run.
    #[error("HypothesisFailed: {0}")]
    HypothesisFailed(String),

    /// The unit lattice has rank at least two, which the transcendence
    /// degree one hypothesis rules out.
    #[error("NotRankOne: unit lattice has rank {0}, expected at most 1")]
    NotRankOne(usize),

    /// An image could not be written as unit-times-monomial as required.
    #[error("DecompositionFailed: {0}")]
    DecompositionFailed(String),

    /// A hypothesis that can be neither verified nor found among the
    /// asserted flags.
    #[error("MissingHypothesis: {0}")]
    MissingHypothesis(String),

    /// None of the cancellation branches applies to the given data.
    #[error("NoBranchApplies: no cancellation branch applies to the given data")]
    NoBranchApplies,
}

impl Error {
    /// Stable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RankMismatch { .. } => "RankMismatch",
            Error::NotAUnit(_) => "NotAUnit",
            Error::NotUnimodular(_) => "NotUnimodular",
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::NotARelation(_) => "NotARelation",
            Error::MalformedPresentation(_) => "MalformedPresentation",
            Error::ZeroElement => "ZeroElement",
            Error::ZeroExponent(_) => "ZeroExponent",
            Error::HypothesisFailed(_) => "HypothesisFailed",
            Error::NotRankOne(_) => "NotRankOne",
            Error::DecompositionFailed(_) => "DecompositionFailed",
            Error::MissingHypothesis(_) => "MissingHypothesis",
            Error::NoBranchApplies => "NoBranchApplies",
        }
    }

    /// True for errors that report a violated or unverifiable hypothesis
    /// rather than malformed input or an internal failure.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::HypothesisFailed(_)
                | Error::MissingHypothesis(_)
                | Error::NoBranchApplies
                | Error::NotRankOne(_)
        )
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
