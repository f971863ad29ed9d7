//! Exact-arithmetic tropical geometry of a two-parameter family of plane
//! Edwards elliptic curves over a Puiseux-series field.
//!
//! The family is cut out by a symmetric bivariate polynomial
//!
//! ```text
//! f_{r,s}(x,y) = d12 (x + y) + d34 (x^2 + y^2) + d5 xy
//!              + d67 (x^2 y + y^2 x) + d8 x^2 y^2
//! ```
//!
//! whose coefficients are explicit polynomials in the Euler products
//! eps(q) = prod (1 + q^n), epsbar(q) = eps(-q) and two parameters
//! r, s from the field of Puiseux series. The crate computes, with exact
//! rational arithmetic throughout:
//!
//! - truncated Puiseux-series arithmetic over Q ([`series`]);
//! - the family coefficients, their valuations, the Edwards parameter
//!   a^2, the j-invariant q-expansion, and Tate-parametrized points
//!   ([`edwards`]);
//! - the tropicalization: min-plus evaluation, the dual regular
//!   subdivision of the Newton polygon, the tropical curve with its
//!   balancing data, cycle measurement, and two independent smoothness
//!   checkers ([`tropcurve`]);
//! - the ultradiscrete-theta parametrization of the cycle, the shape
//!   classifier in delta = v(r+s) - v(r-s), and the valuation formulas
//!   for points ([`thetaparam`]);
//! - the Bruhat-Tits subtree spanned by the zero and pole divisors of
//!   the coordinate functions, theta-factor fitting, cross-ratio edge
//!   lengths, and the quotient metric graph compared against the
//!   tropical curve ([`bttree`]);
//! - a CLI surface: expression parsing, JSON reports, SVG figures
//!   ([`expr`], [`report`], [`svg`]).

pub mod bivariate;
pub mod bttree;
pub mod edwards;
pub mod error;
pub mod expr;
pub mod pipeline;
pub mod rational;
pub mod report;
pub mod series;
pub mod svg;
pub mod thetaparam;
pub mod tropcurve;

pub use error::{Error, Result};
pub use rational::{Coeff, Rat};
pub use series::{PuiseuxSeries, Valuation};

/// Default truncation horizon in q-exponent units.
pub const DEFAULT_HORIZON: i64 = 24;

/// Default Laurent-in-t degree bound for bivariate series generators.
pub const DEFAULT_T_BOUND: i64 = 10;
