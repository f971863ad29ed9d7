//! Truncated Puiseux series over the rationals.
//!
//! A series lives in Q((q^(1/N))) for a ramification index N >= 1 and is
//! stored sparsely as a map from scaled exponents to nonzero rational
//! coefficients, together with a horizon T: every exponent strictly below
//! T is stored exactly, everything at or above T is unknown. Arithmetic
//! propagates horizons honestly; in particular an all-zero truncation is
//! reported as `Valuation::AtLeast(horizon)`, never as infinity, because
//! truncated arithmetic cannot distinguish zero from small.
//!
//! The normalization v(q) = 1 is fixed throughout.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{coeff_sqrt, gcd_i64, lcm_i64, rat, Coeff, Rat};

/// Valuation of a truncated series.
///
/// `Known(v)` is witnessed by a stored nonzero term at exponent `v` with
/// none below; `AtLeast(b)` means every stored term vanishes and `b` is
/// the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Known(Rat),
    AtLeast(Rat),
}

impl Valuation {
    pub fn known(&self) -> Option<Rat> {
        match self {
            Valuation::Known(v) => Some(*v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// Lower bound valid in both cases.
    pub fn bound(&self) -> Rat {
        match self {
            Valuation::Known(v) | Valuation::AtLeast(v) => *v,
        }
    }

    pub fn is_known(&self) -> bool {
        matches!(self, Valuation::Known(_))
    }

    pub fn expect_known(&self, what: &str) -> Result<Rat> {
        self.known().ok_or_else(|| {
            Error::InsufficientPrecision(format!(
                "{what}: valuation only bounded below by {}",
                self.bound()
            ))
        })
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Known(v) => write!(f, "{v}"),
            Valuation::AtLeast(b) => write!(f, ">={b}"),
        }
    }
}

/// Truncated Puiseux series. Exponents are `key / ram`; all stored keys
/// lie strictly below the horizon key and no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq)]
pub struct PuiseuxSeries {
    ram: i64,
    terms: BTreeMap<i64, Coeff>,
    horizon: i64,
}

impl PuiseuxSeries {
    /// Canonical constructor: drops zero coefficients and terms at or
    /// beyond the horizon, then reduces the ramification index.
    fn new_raw(ram: i64, terms: BTreeMap<i64, Coeff>, horizon: i64) -> Self {
        debug_assert!(ram >= 1);
        let mut terms: BTreeMap<i64, Coeff> = terms
            .into_iter()
            .filter(|(k, c)| *k < horizon && !c.is_zero())
            .collect();
        // Reduce ram by the gcd of every key and the horizon key so that
        // structurally equal series compare equal.
        let mut g = gcd_i64(ram, horizon);
        for k in terms.keys() {
            g = gcd_i64(g, *k);
            if g == 1 {
                break;
            }
        }
        let g = g.max(1);
        let (ram, horizon) = (ram / g, horizon / g);
        if g > 1 {
            terms = terms.into_iter().map(|(k, c)| (k / g, c)).collect();
        }
        PuiseuxSeries { ram, terms, horizon }
    }

    /// Zero truncation with the given horizon.
    pub fn zero(horizon: Rat) -> Self {
        PuiseuxSeries::new_raw(*horizon.denom(), BTreeMap::new(), *horizon.numer())
    }

    /// The constant series `c + O(q^horizon)`.
    pub fn constant(c: Coeff, horizon: Rat) -> Self {
        Self::monomial(c, rat(0, 1), horizon)
    }

    pub fn one(horizon: Rat) -> Self {
        Self::constant(Coeff::one(), horizon)
    }

    /// The monomial `c * q^e` truncated at `horizon`.
    pub fn monomial(c: Coeff, e: Rat, horizon: Rat) -> Self {
        let ram = lcm_i64(*e.denom(), *horizon.denom());
        let key = e.numer() * (ram / e.denom());
        let hkey = horizon.numer() * (ram / horizon.denom());
        let mut terms = BTreeMap::new();
        terms.insert(key, c);
        PuiseuxSeries::new_raw(ram, terms, hkey)
    }

    /// `q` itself.
    pub fn q(horizon: Rat) -> Self {
        Self::monomial(Coeff::one(), rat(1, 1), horizon)
    }

    /// Build from explicit `(exponent, coefficient)` pairs.
    pub fn from_terms(pairs: &[(Rat, Coeff)], horizon: Rat) -> Self {
        let mut ram = *horizon.denom();
        for (e, _) in pairs {
            ram = lcm_i64(ram, *e.denom());
        }
        let mut terms: BTreeMap<i64, Coeff> = BTreeMap::new();
        for (e, c) in pairs {
            let key = e.numer() * (ram / e.denom());
            let entry = terms.entry(key).or_insert_with(Coeff::zero);
            *entry += c;
        }
        let hkey = horizon.numer() * (ram / horizon.denom());
        PuiseuxSeries::new_raw(ram, terms, hkey)
    }

    pub fn ram(&self) -> i64 {
        self.ram
    }

    pub fn horizon(&self) -> Rat {
        rat(self.horizon, self.ram)
    }

    /// Iterate stored terms as `(exponent, coefficient)` in increasing
    /// exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Rat, &Coeff)> {
        let ram = self.ram;
        self.terms.iter().map(move |(k, c)| (rat(*k, ram), c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// True if no term is stored (the truncation is indistinguishable
    /// from zero).
    pub fn is_zero_truncation(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient at exponent `e`; exact (possibly zero) below the
    /// horizon, error at or beyond it.
    pub fn coeff_at(&self, e: Rat) -> Result<Coeff> {
        if e >= self.horizon() {
            return Err(Error::InsufficientPrecision(format!(
                "coefficient at q^{e} requested but horizon is {}",
                self.horizon()
            )));
        }
        let scaled = e * rat(self.ram, 1);
        if !scaled.is_integer() {
            return Ok(Coeff::zero()); // exponent off this series' grid
        }
        Ok(self
            .terms
            .get(&scaled.to_integer())
            .cloned()
            .unwrap_or_else(Coeff::zero))
    }

    /// Valuation: least stored exponent, or `AtLeast(horizon)`.
    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(k) => Valuation::Known(rat(*k, self.ram)),
            None => Valuation::AtLeast(self.horizon()),
        }
    }

    /// Valuation lower bound: `v` when known, horizon otherwise.
    fn vbound_key(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(self.horizon)
    }

    /// Coefficient of the least stored exponent.
    pub fn principal_coefficient(&self) -> Result<Coeff> {
        self.terms
            .values()
            .next()
            .cloned()
            .ok_or_else(|| {
                Error::InsufficientPrecision(format!(
                    "principal coefficient of an all-zero truncation (horizon {})",
                    self.horizon()
                ))
            })
    }

    /// Lift to ramification index `ram * m`.
    fn lift(&self, m: i64) -> Self {
        debug_assert!(m >= 1);
        if m == 1 {
            return self.clone();
        }
        PuiseuxSeries {
            ram: self.ram * m,
            terms: self.terms.iter().map(|(k, c)| (k * m, c.clone())).collect(),
            horizon: self.horizon * m,
        }
    }

    /// Lift both operands to the lcm of their ramification indices.
    fn align(&self, other: &Self) -> (Self, Self) {
        if self.ram == other.ram {
            (self.clone(), other.clone())
        } else {
            let l = lcm_i64(self.ram, other.ram);
            (self.lift(l / self.ram), other.lift(l / other.ram))
        }
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            ram: self.ram,
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
            horizon: self.horizon,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let horizon = a.horizon.min(b.horizon);
        let mut terms = a.terms;
        for (k, c) in b.terms {
            let entry = terms.entry(k).or_insert_with(Coeff::zero);
            *entry += c;
        }
        PuiseuxSeries::new_raw(a.ram, terms, horizon)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return PuiseuxSeries {
                ram: self.ram,
                terms: BTreeMap::new(),
                horizon: self.horizon,
            };
        }
        PuiseuxSeries {
            ram: self.ram,
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
            horizon: self.horizon,
        }
    }

    /// Cauchy product truncated at `min(v(a) + horizon_b, v(b) + horizon_a)`
    /// with the valuation bound standing in for `v` on all-zero truncations.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let horizon = (a.vbound_key() + b.horizon).min(b.vbound_key() + a.horizon);
        let mut terms: BTreeMap<i64, Coeff> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let k = ka + kb;
                if k >= horizon {
                    break; // b iterates in increasing key order
                }
                let entry = terms.entry(k).or_insert_with(Coeff::zero);
                *entry += ca * cb;
            }
        }
        PuiseuxSeries::new_raw(a.ram, terms, horizon)
    }

    /// Multiply by the monomial `c * q^e` (exact shift, no precision loss).
    pub fn mul_monomial(&self, c: &Coeff, e: Rat) -> Self {
        let l = lcm_i64(self.ram, *e.denom());
        let a = self.lift(l / self.ram);
        let shift = e.numer() * (l / e.denom());
        PuiseuxSeries::new_raw(
            l,
            a.terms.iter().map(|(k, v)| (k + shift, v * c)).collect(),
            a.horizon + shift,
        )
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            return PuiseuxSeries::one(self.horizon());
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse; requires a Known valuation. The result
    /// horizon is `horizon - 2 v(a)`.
    pub fn invert(&self) -> Result<Self> {
        let (vkey, lead) = match self.terms.iter().next() {
            Some((k, c)) => (*k, c.clone()),
            None => {
                return Err(Error::InsufficientPrecision(format!(
                    "cannot invert an all-zero truncation (horizon {})",
                    self.horizon()
                )))
            }
        };
        // a = lead * q^v * (1 + u), u = tail with positive keys, known below
        // horizon - v. Solve s * (1 + u) = 1 coefficientwise.
        let prec = self.horizon - vkey; // keys of u run in (0, prec)
        let inv_lead = Coeff::one() / &lead;
        let u: BTreeMap<i64, Coeff> = self
            .terms
            .iter()
            .skip(1)
            .map(|(k, c)| (k - vkey, c * &inv_lead))
            .collect();
        let mut s: BTreeMap<i64, Coeff> = BTreeMap::new();
        s.insert(0, Coeff::one());
        // Iterate keys in increasing order; only keys reachable as sums of
        // u-keys can be nonzero, so walk a worklist of candidate keys.
        let mut candidates: std::collections::BTreeSet<i64> = u.keys().copied().collect();
        while let Some(k) = candidates.iter().next().copied() {
            candidates.remove(&k);
            if k >= prec {
                continue;
            }
            // s_k = -sum_{0 < e <= k} u_e * s_{k-e}
            let mut acc = Coeff::zero();
            for (e, ue) in u.range(1..=k) {
                if let Some(se) = s.get(&(k - e)) {
                    acc += ue * se;
                }
            }
            if !acc.is_zero() {
                let v = -acc;
                s.insert(k, v);
                for e in u.keys() {
                    let nk = k + e;
                    if nk < prec {
                        candidates.insert(nk);
                    }
                }
            }
        }
        let terms: BTreeMap<i64, Coeff> = s
            .into_iter()
            .map(|(k, c)| (k - vkey, c * &inv_lead))
            .collect();
        Ok(PuiseuxSeries::new_raw(self.ram, terms, prec - vkey))
    }

    /// Exact division `self / other`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.invert()?))
    }

    /// Square root with positive rational principal coefficient.
    ///
    /// The valuation must be Known and become even after an optional
    /// ramification lift; the principal coefficient must be a rational
    /// square. The result horizon is `horizon - v/2`.
    pub fn sqrt(&self) -> Result<Self> {
        self.valuation().expect_known("sqrt")?;
        let lead = self.principal_coefficient()?;
        let root_lead = coeff_sqrt(&lead)
            .ok_or_else(|| Error::NotASquare(format!("{lead}")))?;
        // Lift so the valuation key is even.
        let a = if self.vbound_key() % 2 == 0 {
            self.clone()
        } else {
            self.lift(2)
        };
        let vkey = a.vbound_key();
        debug_assert!(vkey % 2 == 0);
        let prec = a.horizon - vkey; // u known on keys (0, prec)
        let inv_lead = Coeff::one() / &lead;
        let u: BTreeMap<i64, Coeff> = a
            .terms
            .iter()
            .skip(1)
            .map(|(k, c)| (k - vkey, c * &inv_lead))
            .collect();
        // Solve s^2 = 1 + u, s_0 = 1:
        //   2 s_k = u_k - sum_{0 < j < k} s_j s_{k-j}
        let mut s: BTreeMap<i64, Coeff> = BTreeMap::new();
        s.insert(0, Coeff::one());
        let mut candidates: std::collections::BTreeSet<i64> = u.keys().copied().collect();
        while let Some(k) = candidates.iter().next().copied() {
            candidates.remove(&k);
            if k >= prec || k == 0 {
                continue;
            }
            let mut acc = u.get(&k).cloned().unwrap_or_else(Coeff::zero);
            for (j, sj) in s.range(1..k) {
                if let Some(sk) = s.get(&(k - j)) {
                    acc -= sj * sk;
                }
            }
            if !acc.is_zero() {
                let val = acc / Coeff::from_integer(2.into());
                s.insert(k, val);
                // New nonzero s_k creates candidate sums with u-keys and
                // with other s-keys.
                let skeys: Vec<i64> = s.keys().copied().filter(|j| *j > 0).collect();
                for e in u.keys().copied().chain(skeys) {
                    let nk = k + e;
                    if nk < prec {
                        candidates.insert(nk);
                    }
                }
            }
        }
        let terms: BTreeMap<i64, Coeff> = s
            .into_iter()
            .map(|(k, c)| (k + vkey / 2, c * &root_lead))
            .collect();
        Ok(PuiseuxSeries::new_raw(a.ram, terms, prec + vkey / 2))
    }

    /// Restrict to a smaller horizon.
    pub fn truncate(&self, new_horizon: Rat) -> Self {
        if new_horizon >= self.horizon() {
            return self.clone();
        }
        let l = lcm_i64(self.ram, *new_horizon.denom());
        let a = self.lift(l / self.ram);
        let hkey = new_horizon.numer() * (l / new_horizon.denom());
        PuiseuxSeries::new_raw(l, a.terms, hkey.min(a.horizon))
    }

    /// Substitute `q -> -q`: negate coefficients of odd exponents.
    /// Requires integral exponents on the stored grid.
    pub fn twist_q_sign(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| {
                // exponent k/ram; for ram == 1 parity of k decides the sign
                let e = rat(*k, self.ram);
                let sign_flip = e.is_integer() && e.to_integer() % 2 != 0;
                (*k, if sign_flip { -c.clone() } else { c.clone() })
            })
            .collect();
        PuiseuxSeries {
            ram: self.ram,
            terms,
            horizon: self.horizon,
        }
    }

    /// Substitute `q -> q^c` for positive rational c (exact rescaling of
    /// exponents; horizon scales accordingly).
    pub fn stretch(&self, c: Rat) -> Self {
        assert!(c > rat(0, 1));
        let l = lcm_i64(self.ram * c.denom(), 1);
        let factor_num = *c.numer();
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| (k * factor_num, v.clone()))
            .collect();
        PuiseuxSeries::new_raw(l, terms, self.horizon * factor_num)
    }
}

impl fmt::Debug for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "O(q^{})", self.horizon())?;
            return Ok(());
        }
        for (i, (e, c)) in self.terms().enumerate() {
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if e.is_zero() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "q^{e}")?;
            } else {
                write!(f, "{mag}*q^{e}")?;
            }
        }
        write!(f, " + O(q^{})", self.horizon())
    }
}

impl std::ops::Add for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn add(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
        PuiseuxSeries::add(self, rhs)
    }
}

impl std::ops::Sub for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn sub(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
        PuiseuxSeries::sub(self, rhs)
    }
}

impl std::ops::Mul for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn mul(self, rhs: &PuiseuxSeries) -> PuiseuxSeries {
        PuiseuxSeries::mul(self, rhs)
    }
}

impl std::ops::Neg for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        PuiseuxSeries::neg(self)
    }
}

/// Euler's generating function eps(q) = prod_{n>=1} (1 + q^n), counting
/// partitions into distinct parts: 1 + q + q^2 + 2q^3 + ...
pub fn euler_epsilon(horizon: Rat) -> PuiseuxSeries {
    assert!(horizon >= rat(1, 1), "horizon must be at least 1");
    let mut acc = PuiseuxSeries::one(horizon);
    let mut n = 1;
    while rat(n, 1) < horizon {
        let factor = PuiseuxSeries::from_terms(
            &[(rat(0, 1), Coeff::one()), (rat(n, 1), Coeff::one())],
            horizon,
        );
        acc = acc.mul(&factor);
        n += 1;
    }
    acc
}

/// epsbar(q) := eps(-q) = 1 - q + q^2 - 2q^3 + ...
pub fn epsilon_bar(horizon: Rat) -> PuiseuxSeries {
    euler_epsilon(horizon).twist_q_sign()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{coeff, coeff_int};

    fn h(n: i64) -> Rat {
        rat(n, 1)
    }

    fn poly(pairs: &[(i64, i64, i64, i64)], horizon: Rat) -> PuiseuxSeries {
        // (coeff_num, coeff_den, exp_num, exp_den)
        let terms: Vec<(Rat, Coeff)> = pairs
            .iter()
            .map(|(cn, cd, en, ed)| (rat(*en, *ed), coeff(*cn, *cd)))
            .collect();
        PuiseuxSeries::from_terms(&terms, horizon)
    }

    #[test]
    fn add_cancels() {
        // (1+q) + (-1+q) = 2q
        let a = poly(&[(1, 1, 0, 1), (1, 1, 1, 1)], h(10));
        let b = poly(&[(-1, 1, 0, 1), (1, 1, 1, 1)], h(10));
        let s = &a + &b;
        assert_eq!(s, poly(&[(2, 1, 1, 1)], h(10)));
        assert_eq!(s.valuation(), Valuation::Known(rat(1, 1)));
    }

    #[test]
    fn add_identity() {
        let a = poly(&[(3, 2, 1, 2)], h(7));
        let z = PuiseuxSeries::zero(h(7));
        assert_eq!(&a + &z, a);
    }

    #[test]
    fn mul_basic() {
        // (1+q)(1-q) = 1 - q^2
        let a = poly(&[(1, 1, 0, 1), (1, 1, 1, 1)], h(10));
        let b = poly(&[(1, 1, 0, 1), (-1, 1, 1, 1)], h(10));
        assert_eq!(&a * &b, poly(&[(1, 1, 0, 1), (-1, 1, 2, 1)], h(10)));
    }

    #[test]
    fn mul_ramification_lift() {
        // q^(1/2) * q^(1/2) = q
        let a = PuiseuxSeries::monomial(Coeff::one(), rat(1, 2), h(5));
        let b = a.clone();
        let p = &a * &b;
        assert_eq!(p.valuation(), Valuation::Known(rat(1, 1)));
        assert_eq!(p.coeff_at(rat(1, 1)).unwrap(), coeff_int(1));
        // after reduction the product lives on the integer grid
        assert_eq!(p.ram(), 2); // horizon 11/2 keeps ram 2
    }

    #[test]
    fn mul_horizon_rule() {
        // v(a)=1, horizon_a=5 ; v(b)=0, horizon_b=3 ->
        // product horizon = min(1+3, 0+5) = 4
        let a = poly(&[(1, 1, 1, 1)], h(5));
        let b = poly(&[(1, 1, 0, 1)], h(3));
        assert_eq!((&a * &b).horizon(), rat(4, 1));
    }

    #[test]
    fn invert_geometric() {
        // 1/(1-q) = 1 + q + q^2 + ...
        let a = poly(&[(1, 1, 0, 1), (-1, 1, 1, 1)], h(6));
        let inv = a.invert().unwrap();
        for k in 0..6 {
            assert_eq!(inv.coeff_at(rat(k, 1)).unwrap(), coeff_int(1));
        }
        let round = &a * &inv;
        let residual = &round - &PuiseuxSeries::one(h(6));
        assert!(residual.is_zero_truncation());
    }

    #[test]
    fn invert_monomial() {
        // 1/(2q) = (1/2) q^-1, horizon 6 - 2*1 = 4
        let a = poly(&[(2, 1, 1, 1)], h(6));
        let inv = a.invert().unwrap();
        assert_eq!(inv.valuation(), Valuation::Known(rat(-1, 1)));
        assert_eq!(inv.coeff_at(rat(-1, 1)).unwrap(), coeff(1, 2));
        assert_eq!(inv.horizon(), rat(4, 1));
    }

    #[test]
    fn invert_zero_truncation_refused() {
        let z = PuiseuxSeries::zero(h(5));
        assert!(matches!(z.invert(), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn sqrt_perfect_square_poly() {
        // sqrt(1 + 2q + q^2) = 1 + q
        let a = poly(&[(1, 1, 0, 1), (2, 1, 1, 1), (1, 1, 2, 1)], h(9));
        let s = a.sqrt().unwrap();
        let expect = poly(&[(1, 1, 0, 1), (1, 1, 1, 1)], h(9));
        for k in 0..9 {
            assert_eq!(
                s.coeff_at(rat(k, 1)).unwrap(),
                expect.coeff_at(rat(k, 1)).unwrap()
            );
        }
        let res = &(&s * &s) - &a;
        assert!(res.is_zero_truncation());
    }

    #[test]
    fn sqrt_of_q_squared() {
        let a = poly(&[(1, 1, 2, 1)], h(8));
        let s = a.sqrt().unwrap();
        assert_eq!(s.valuation(), Valuation::Known(rat(1, 1)));
        assert_eq!(s.principal_coefficient().unwrap(), coeff_int(1));
    }

    #[test]
    fn sqrt_lifts_ramification() {
        // sqrt(q) = q^(1/2)
        let a = PuiseuxSeries::q(h(6));
        let s = a.sqrt().unwrap();
        assert_eq!(s.valuation(), Valuation::Known(rat(1, 2)));
    }

    #[test]
    fn sqrt_not_a_square() {
        let a = poly(&[(2, 1, 0, 1)], h(5));
        assert!(matches!(a.sqrt(), Err(Error::NotASquare(_))));
        let b = poly(&[(-1, 1, 0, 1)], h(5));
        assert!(matches!(b.sqrt(), Err(Error::NotASquare(_))));
    }

    #[test]
    fn valuation_cases() {
        assert_eq!(
            poly(&[(-2, 1, 1, 1)], h(9)).valuation(),
            Valuation::Known(rat(1, 1))
        );
        assert_eq!(
            poly(&[(2, 1, 3, 2)], h(9)).valuation(),
            Valuation::Known(rat(3, 2))
        );
        assert_eq!(
            PuiseuxSeries::zero(h(5)).valuation(),
            Valuation::AtLeast(rat(5, 1))
        );
    }

    #[test]
    fn epsilon_expansion() {
        // eps = 1 + q + q^2 + 2q^3 + 2q^4 + 3q^5 + 4q^6 + ...
        let eps = euler_epsilon(h(10));
        let expect = [1i64, 1, 1, 2, 2, 3, 4, 5, 6, 8];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(
                eps.coeff_at(rat(k as i64, 1)).unwrap(),
                coeff_int(*e),
                "coefficient of q^{k}"
            );
        }
    }

    #[test]
    fn epsilon_bar_expansion() {
        // epsbar = 1 - q + q^2 - 2q^3 + ...
        let eb = epsilon_bar(h(6));
        let expect = [1i64, -1, 1, -2, 2, -3];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(eb.coeff_at(rat(k as i64, 1)).unwrap(), coeff_int(*e));
        }
    }

    /// Brute-force count of partitions of n into distinct parts; the
    /// independent oracle for the epsilon coefficient list.
    fn distinct_partitions(n: usize) -> i64 {
        // dp over parts 1..=n
        let mut dp = vec![0i64; n + 1];
        dp[0] = 1;
        for part in 1..=n {
            for total in (part..=n).rev() {
                dp[total] += dp[total - part];
            }
        }
        dp[n]
    }

    #[test]
    fn epsilon_matches_partition_oracle() {
        let hz = 16;
        let eps = euler_epsilon(h(hz));
        let eb = epsilon_bar(h(hz));
        for n in 0..hz as usize {
            let count = distinct_partitions(n);
            assert_eq!(eps.coeff_at(rat(n as i64, 1)).unwrap(), coeff_int(count));
            let sign = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(
                eb.coeff_at(rat(n as i64, 1)).unwrap(),
                coeff_int(sign * count)
            );
        }
        // partitions of 6 into distinct parts: 6, 5+1, 4+2, 3+2+1
        assert_eq!(eps.coeff_at(rat(6, 1)).unwrap(), coeff_int(4));
    }

    #[test]
    fn eps_sum_and_product_structure() {
        let hz = h(12);
        let eps = euler_epsilon(hz);
        let eb = epsilon_bar(hz);
        // eps + epsbar = 2 + 2q^2 + 0q^3 + ... : odd coefficients vanish
        let sum = &eps + &eb;
        for k in 0..12 {
            let c = sum.coeff_at(rat(k, 1)).unwrap();
            if k % 2 == 1 {
                assert!(c.is_zero(), "odd coefficient q^{k} of eps+epsbar");
            }
        }
        assert_eq!(sum.coeff_at(rat(0, 1)).unwrap(), coeff_int(2));
        assert_eq!(sum.coeff_at(rat(2, 1)).unwrap(), coeff_int(2));
        // eps * epsbar is an even series
        let prod = &eps * &eb;
        for k in 0..12 {
            if k % 2 == 1 {
                assert!(
                    prod.coeff_at(rat(k, 1)).unwrap().is_zero(),
                    "odd coefficient q^{k} of eps*epsbar"
                );
            }
        }
        assert_eq!(prod.coeff_at(rat(0, 1)).unwrap(), coeff_int(1));
    }

    #[test]
    fn invert_and_sqrt_round_trip_horizons() {
        let a = poly(&[(4, 1, 2, 1), (4, 1, 3, 1), (1, 1, 4, 1)], h(12));
        let inv = a.invert().unwrap();
        assert_eq!(inv.horizon(), rat(8, 1)); // 12 - 2*v, v = 2
        // a * inv - 1 vanishes below the propagated horizon
        // mul horizon: min(v_a + h_inv, v_inv + h_a) = min(2+8, -2+12) = 10
        let res = &(&a * &inv) - &PuiseuxSeries::one(h(12));
        assert!(res.is_zero_truncation());
        assert_eq!(res.valuation(), Valuation::AtLeast(rat(10, 1)));
        let s = a.sqrt().unwrap();
        assert_eq!(s.horizon(), rat(11, 1)); // 12 - v/2
        let res2 = &(&s * &s) - &a;
        assert!(res2.is_zero_truncation());
        assert_eq!(res2.valuation(), Valuation::AtLeast(rat(12, 1)));
    }

    #[test]
    fn display_round_trip_shape() {
        let a = poly(&[(1, 1, 0, 1), (-3, 1, 1, 1)], h(24));
        assert_eq!(format!("{a}"), "1 - 3*q^1 + O(q^24)");
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<PuiseuxSeries>();
        assert_send_sync::<Valuation>();
        assert_send_sync::<crate::bivariate::BivariateSeries>();
        assert_send_sync::<crate::bttree::End>();
        assert_send_sync::<crate::bttree::MetricGraph>();
        assert_send_sync::<crate::tropcurve::TropicalCurve>();
    }
}
