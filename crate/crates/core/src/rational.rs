//! Exact rational scalar types.
//!
//! Exponents and valuations are small rationals (`Rat`); series
//! coefficients are arbitrary-precision rationals (`Coeff`). No floating
//! point appears anywhere in the kernel.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};

/// Exponent / valuation scalar: rationals with machine-word parts.
pub type Rat = Rational64;

/// Series coefficient scalar: arbitrary-precision rationals.
pub type Coeff = BigRational;

/// Shorthand rational constructor.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den)
}

/// Integer coefficient.
pub fn coeff_int(n: i64) -> Coeff {
    Coeff::from_integer(BigInt::from(n))
}

/// Rational coefficient from machine integers.
pub fn coeff(num: i64, den: i64) -> Coeff {
    Coeff::new(BigInt::from(num), BigInt::from(den))
}

/// Exact square root of a nonnegative rational, if one exists in Q.
///
/// Requires the reduced numerator and denominator to both be perfect
/// squares; returns the nonnegative root.
pub fn coeff_sqrt(c: &Coeff) -> Option<Coeff> {
    if c.is_negative() {
        return None;
    }
    if c.is_zero() {
        return Some(Coeff::zero());
    }
    let num = c.numer();
    let den = c.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(Coeff::new(sn, sd))
    } else {
        None
    }
}

/// Floor of a rational as an integer.
pub fn rat_floor(r: Rat) -> i64 {
    r.floor().to_integer()
}

/// Representative of `r` modulo `m` inside the half-open window
/// `[lo, lo + m)`.
pub fn rat_mod_into(r: Rat, m: Rat, lo: Rat) -> Rat {
    let k = ((r - lo) / m).floor();
    r - k * m
}

/// Convert an exponent-grade rational to a big rational coefficient.
pub fn rat_to_coeff(r: Rat) -> Coeff {
    Coeff::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// True if the big rational is the square of a rational; used for
/// branch-existence checks before `coeff_sqrt`.
pub fn is_rational_square(c: &Coeff) -> bool {
    coeff_sqrt(c).is_some()
}

/// Greatest common divisor on machine integers (nonnegative result).
pub fn gcd_i64(a: i64, b: i64) -> i64 {
    num_integer::gcd(a, b)
}

/// Least common multiple on machine integers.
pub fn lcm_i64(a: i64, b: i64) -> i64 {
    num_integer::lcm(a, b)
}

/// One as a `Coeff`.
pub fn coeff_one() -> Coeff {
    Coeff::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_perfect_square() {
        assert_eq!(coeff_sqrt(&coeff(9, 4)), Some(coeff(3, 2)));
        assert_eq!(coeff_sqrt(&coeff(2, 1)), None);
        assert_eq!(coeff_sqrt(&coeff(-1, 1)), None);
        assert_eq!(coeff_sqrt(&coeff(0, 1)), Some(Coeff::zero()));
    }

    #[test]
    fn mod_window() {
        assert_eq!(rat_mod_into(rat(-3, 2), rat(4, 1), rat(-1, 2)), rat(5, 2));
        assert_eq!(rat_mod_into(rat(17, 2), rat(8, 1), rat(0, 1)), rat(1, 2));
        assert_eq!(rat_mod_into(rat(-1, 2), rat(4, 1), rat(-1, 2)), rat(-1, 2));
    }
}
