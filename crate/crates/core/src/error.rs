//! Error type shared across the crate.
//!
//! Truncated exact arithmetic has to fail loudly whenever a result would
//! depend on coefficients beyond a series horizon; most variants here exist
//! to make those refusals precise instead of silently guessing.

use thiserror::Error;

use crate::rational::Rat;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A truncated series does not determine the requested quantity
    /// (all-zero truncation where a valuation or principal coefficient
    /// is needed, or a cancellation unresolved below the horizon).
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    /// The principal coefficient has no square root in the rationals.
    #[error("principal coefficient {0} is not a rational square")]
    NotASquare(String),

    /// Family parameters with v(eps*r - epsbar*s) unresolved at truncation.
    #[error("degenerate parameters: v(eps*r - epsbar*s) not Known at truncation")]
    DegenerateParams,

    /// delta = v(r+s) - v(r-s) is undefined because one of the valuations
    /// is not Known at truncation.
    #[error("delta undefined: {0}")]
    UndefinedDelta(String),

    /// A tropical operation needed a coefficient valuation that is only
    /// bounded (AtLeast) and the bound does not decide the comparison.
    #[error("unknown coefficient valuation: {0}")]
    UnknownCoefficientValuation(String),

    /// The bounded part of the tropical curve is a tree.
    #[error("tropical curve has no bounded cycle")]
    NoCycle,

    /// The two independent smoothness checkers disagree; this signals an
    /// implementation fault, never a legal state.
    #[error("smoothness checkers disagree: table1={table1}, subdivision={subdivision}")]
    DisagreementBug { table1: bool, subdivision: bool },

    /// The cycle parameter u (or u - 1/2) lies in the exceptional set Xi.
    #[error("exceptional parameter u = {0}")]
    ExceptionalParameter(Rat),

    /// A Tate point coordinate has a denominator with unresolved valuation.
    #[error("point lands on a pole: {0}")]
    PolarPoint(String),

    /// No theta-factor offset pair is consistent with the leading terms of
    /// the logarithmic derivative.
    #[error("theta factor offsets inconsistent: {0}")]
    OffsetMismatch(String),

    /// The series truncation order is too low to solve for the requested
    /// number of fit coefficients, or the two factors are confluent.
    #[error("underdetermined theta-factor fit: {0}")]
    UnderdeterminedFit(String),

    /// The end set does not span a full q^8 period.
    #[error("incomplete fundamental domain: {0}")]
    IncompleteFundamentalDomain(String),

    /// Metric-graph comparison refused because the tropical curve is not
    /// smooth.
    #[error("tropical curve is not smooth; comparison refused")]
    NotSmooth,

    /// Expression or JSON input failed to parse.
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A JSON document does not match any recognized report schema.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 precision, 3 degenerate or
    /// refused input, 4 parse errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InsufficientPrecision(_)
            | Error::UnknownCoefficientValuation(_)
            | Error::UnderdeterminedFit(_) => 2,
            Error::Parse { .. } | Error::SchemaMismatch(_) => 4,
            _ => 3,
        }
    }
}
