//! Bivariate series: truncated q-series whose coefficients are Laurent
//! polynomials in a symbol t.
//!
//! These carry the reduced theta series
//!
//! ```text
//! th1(t,-q^2) = t sum (-1)^n q^(2n^2+2n) t^(2n)
//! th2(t,-q^2) = t sum        q^(2n^2+2n) t^(2n)
//! th3(t,-q^2) =   sum (-1)^n q^(2n^2)    t^(2n)
//! th4(t,-q^2) =   sum        q^(2n^2)    t^(2n)
//! ```
//!
//! and the pole-locating series Delta = -s th3 + r th4, together with the
//! logarithmic-derivative machinery used to fit theta factors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{lcm_i64, rat, Coeff, Rat};
use crate::series::{PuiseuxSeries, Valuation};

/// Sparse Laurent polynomial in t with rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Coeff>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn monomial(c: Coeff, degree: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(degree, c);
        }
        LaurentPoly { coeffs }
    }

    pub fn one() -> Self {
        Self::monomial(Coeff::one(), 0)
    }

    pub fn from_pairs(pairs: &[(i64, Coeff)]) -> Self {
        let mut p = LaurentPoly::zero();
        for (d, c) in pairs {
            p.add_term(*d, c.clone());
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, degree: i64) -> Coeff {
        self.coeffs.get(&degree).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Coeff)> {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    pub fn degree_range(&self) -> Option<(i64, i64)> {
        let lo = *self.coeffs.keys().next()?;
        let hi = *self.coeffs.keys().next_back()?;
        Some((lo, hi))
    }

    fn add_term(&mut self, degree: i64, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(degree).or_insert_with(Coeff::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&degree);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in &other.coeffs {
            out.add_term(*d, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(d, c)| (*d, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = LaurentPoly::zero();
        for (da, ca) in &self.coeffs {
            for (db, cb) in &other.coeffs {
                out.add_term(da + db, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(d, v)| (*d, v * c)).collect(),
        }
    }

    /// Formal derivative in t.
    pub fn derivative(&self) -> Self {
        let mut out = LaurentPoly::zero();
        for (d, c) in &self.coeffs {
            if *d != 0 {
                out.add_term(d - 1, c * Coeff::from_integer((*d).into()));
            }
        }
        out
    }

    /// A Laurent polynomial is a unit iff it is a single monomial.
    pub fn as_monomial(&self) -> Option<(i64, &Coeff)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(d, c)| (*d, c))
        } else {
            None
        }
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(d, c)| match d {
                0 => format!("{c}"),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{d}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Truncated series in q with Laurent-polynomial coefficients in t.
/// Same exponent discipline as [`PuiseuxSeries`]: keys are q-exponents
/// scaled by the ramification index, all strictly below the horizon key.
#[derive(Clone, PartialEq, Eq)]
pub struct BivariateSeries {
    ram: i64,
    terms: BTreeMap<i64, LaurentPoly>,
    horizon: i64,
}

impl BivariateSeries {
    fn new_raw(ram: i64, terms: BTreeMap<i64, LaurentPoly>, horizon: i64) -> Self {
        let mut terms: BTreeMap<i64, LaurentPoly> = terms
            .into_iter()
            .filter(|(k, p)| *k < horizon && !p.is_zero())
            .collect();
        let mut g = num_integer::gcd(ram, horizon);
        for k in terms.keys() {
            g = num_integer::gcd(g, *k);
            if g == 1 {
                break;
            }
        }
        let g = g.max(1);
        if g > 1 {
            terms = terms.into_iter().map(|(k, p)| (k / g, p)).collect();
        }
        BivariateSeries {
            ram: ram / g,
            terms,
            horizon: horizon / g,
        }
    }

    pub fn zero(horizon: Rat) -> Self {
        BivariateSeries::new_raw(*horizon.denom(), BTreeMap::new(), *horizon.numer())
    }

    pub fn from_term(q_exp: Rat, poly: LaurentPoly, horizon: Rat) -> Self {
        let ram = lcm_i64(*q_exp.denom(), *horizon.denom());
        let mut terms = BTreeMap::new();
        terms.insert(q_exp.numer() * (ram / q_exp.denom()), poly);
        BivariateSeries::new_raw(ram, terms, horizon.numer() * (ram / horizon.denom()))
    }

    /// Embed a univariate series times the monomial t^degree.
    pub fn from_puiseux(s: &PuiseuxSeries, degree: i64) -> Self {
        let ram = s.ram();
        let terms = s
            .terms()
            .map(|(e, c)| {
                (
                    e.numer() * (ram / e.denom()),
                    LaurentPoly::monomial(c.clone(), degree),
                )
            })
            .collect();
        let h = s.horizon();
        BivariateSeries::new_raw(ram, terms, h.numer() * (ram / h.denom()))
    }

    pub fn horizon(&self) -> Rat {
        rat(self.horizon, self.ram)
    }

    pub fn ram(&self) -> i64 {
        self.ram
    }

    pub fn is_zero_truncation(&self) -> bool {
        self.terms.is_empty()
    }

    /// q-valuation with the same semantics as the univariate case.
    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(k) => Valuation::Known(rat(*k, self.ram)),
            None => Valuation::AtLeast(self.horizon()),
        }
    }

    fn vbound_key(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(self.horizon)
    }

    /// Laurent coefficient of q^e (zero below the horizon, error beyond).
    pub fn coeff_at(&self, e: Rat) -> Result<LaurentPoly> {
        if e >= self.horizon() {
            return Err(Error::InsufficientPrecision(format!(
                "bivariate coefficient at q^{e} requested but horizon is {}",
                self.horizon()
            )));
        }
        let scaled = e * rat(self.ram, 1);
        if !scaled.is_integer() {
            return Ok(LaurentPoly::zero());
        }
        Ok(self
            .terms
            .get(&scaled.to_integer())
            .cloned()
            .unwrap_or_else(LaurentPoly::zero))
    }

    /// Iterate stored terms as `(q-exponent, Laurent poly)`.
    pub fn terms(&self) -> impl Iterator<Item = (Rat, &LaurentPoly)> {
        let ram = self.ram;
        self.terms.iter().map(move |(k, p)| (rat(*k, ram), p))
    }

    fn lift(&self, m: i64) -> Self {
        if m == 1 {
            return self.clone();
        }
        BivariateSeries {
            ram: self.ram * m,
            terms: self.terms.iter().map(|(k, p)| (k * m, p.clone())).collect(),
            horizon: self.horizon * m,
        }
    }

    fn align(&self, other: &Self) -> (Self, Self) {
        if self.ram == other.ram {
            (self.clone(), other.clone())
        } else {
            let l = lcm_i64(self.ram, other.ram);
            (self.lift(l / self.ram), other.lift(l / other.ram))
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let horizon = a.horizon.min(b.horizon);
        let mut terms = a.terms;
        for (k, p) in b.terms {
            let entry = terms.entry(k).or_insert_with(LaurentPoly::zero);
            *entry = entry.add(&p);
        }
        BivariateSeries::new_raw(a.ram, terms, horizon)
    }

    pub fn neg(&self) -> Self {
        BivariateSeries {
            ram: self.ram,
            terms: self.terms.iter().map(|(k, p)| (*k, p.neg())).collect(),
            horizon: self.horizon,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let horizon = (a.vbound_key() + b.horizon).min(b.vbound_key() + a.horizon);
        let mut terms: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
        for (ka, pa) in &a.terms {
            for (kb, pb) in &b.terms {
                let k = ka + kb;
                if k >= horizon {
                    break;
                }
                let entry = terms.entry(k).or_insert_with(LaurentPoly::zero);
                *entry = entry.add(&pa.mul(pb));
            }
        }
        BivariateSeries::new_raw(a.ram, terms, horizon)
    }

    /// Multiply by a univariate series (t-free).
    pub fn mul_puiseux(&self, s: &PuiseuxSeries) -> Self {
        self.mul(&BivariateSeries::from_puiseux(s, 0))
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        BivariateSeries::new_raw(
            self.ram,
            self.terms.iter().map(|(k, p)| (*k, p.scale(c))).collect(),
            self.horizon,
        )
    }

    /// Formal derivative in t, exact.
    pub fn derivative_t(&self) -> Self {
        BivariateSeries::new_raw(
            self.ram,
            self.terms
                .iter()
                .map(|(k, p)| (*k, p.derivative()))
                .collect(),
            self.horizon,
        )
    }

    /// Multiplicative inverse. The lowest q-order Laurent coefficient must
    /// be a monomial in t; otherwise the inverse is not a Laurent-poly
    /// series and the division is undefined at this truncation.
    pub fn invert(&self) -> Result<Self> {
        let (vkey, lead) = match self.terms.iter().next() {
            Some((k, p)) => (*k, p.clone()),
            None => {
                return Err(Error::InsufficientPrecision(format!(
                    "cannot invert an all-zero bivariate truncation (horizon {})",
                    self.horizon()
                )))
            }
        };
        let (lead_deg, lead_coeff) = lead.as_monomial().ok_or_else(|| {
            Error::InsufficientPrecision(
                "bivariate inverse undefined: lowest q-coefficient is not a t-monomial"
                    .to_string(),
            )
        })?;
        let inv_lead = LaurentPoly::monomial(Coeff::one() / lead_coeff, -lead_deg);
        // a = lead * q^v * (1 + u); solve s(1+u) = 1 coefficientwise in q.
        let prec = self.horizon - vkey;
        let u: BTreeMap<i64, LaurentPoly> = self
            .terms
            .iter()
            .skip(1)
            .map(|(k, p)| (k - vkey, p.mul(&inv_lead)))
            .collect();
        let mut s: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
        s.insert(0, LaurentPoly::one());
        let mut candidates: BTreeSet<i64> = u.keys().copied().collect();
        while let Some(k) = candidates.iter().next().copied() {
            candidates.remove(&k);
            if k >= prec || k == 0 {
                continue;
            }
            let mut acc = LaurentPoly::zero();
            for (e, ue) in u.range(1..=k) {
                if let Some(se) = s.get(&(k - e)) {
                    acc = acc.add(&ue.mul(se));
                }
            }
            if !acc.is_zero() {
                s.insert(k, acc.neg());
                for e in u.keys() {
                    let nk = k + e;
                    if nk < prec {
                        candidates.insert(nk);
                    }
                }
            }
        }
        let terms: BTreeMap<i64, LaurentPoly> = s
            .into_iter()
            .map(|(k, p)| (k - vkey, p.mul(&inv_lead)))
            .collect();
        Ok(BivariateSeries::new_raw(self.ram, terms, prec - vkey))
    }

    /// Logarithmic derivative (d/dt a) / a.
    pub fn log_derivative_t(&self) -> Result<Self> {
        Ok(self.derivative_t().mul(&self.invert()?))
    }

    /// Substitute t -> c * t for a univariate series c with Known
    /// valuation.
    ///
    /// When v(c) != 0 the horizon degrades by the most unfavourable shift
    /// over the stored t-degrees. Callers generate inputs with headroom;
    /// for the theta-type series the omitted tail (q-exponent at or above
    /// the horizon) has t-degrees whose shifted exponents stay above the
    /// returned horizon.
    pub fn substitute_t_scale(&self, c: &PuiseuxSeries) -> Result<Self> {
        let vc = c
            .valuation()
            .expect_known("substitute_t_scale scaling series")?;
        let mut degrees: BTreeSet<i64> = BTreeSet::new();
        for p in self.terms.values() {
            for (d, _) in p.terms() {
                degrees.insert(d);
            }
        }
        if degrees.is_empty() {
            return Ok(self.clone());
        }
        let c_inv = if degrees.iter().any(|d| *d < 0) {
            Some(c.invert()?)
        } else {
            None
        };
        let mut powers: BTreeMap<i64, PuiseuxSeries> = BTreeMap::new();
        for d in &degrees {
            let p = if *d >= 0 {
                c.pow(*d as u32)
            } else {
                c_inv.as_ref().unwrap().pow((-d) as u32)
            };
            powers.insert(*d, p);
        }
        // Stored terms contribute exactly; the result is valid below
        // h + min(0, min_d d*v(c)) and below each contribution's own
        // precision (valuation bound of self + horizon of c^d).
        let vb = self.valuation().bound();
        let mut horizon = self.horizon()
            + degrees
                .iter()
                .map(|d| rat(*d, 1) * vc)
                .fold(rat(0, 1), |m, x| m.min(x));
        for p in powers.values() {
            horizon = horizon.min(p.horizon() + vb);
        }
        let mut acc = BivariateSeries::zero(horizon);
        for (k, poly) in self.terms() {
            for (d, coeff) in poly.terms() {
                let shifted = powers[&d].mul_monomial(coeff, k);
                acc = acc.add(&BivariateSeries::from_puiseux(&shifted, d));
            }
        }
        Ok(acc.truncate(horizon))
    }

    pub fn truncate(&self, new_horizon: Rat) -> Self {
        if new_horizon >= self.horizon() {
            return self.clone();
        }
        let l = lcm_i64(self.ram, *new_horizon.denom());
        let a = self.lift(l / self.ram);
        let hkey = new_horizon.numer() * (l / new_horizon.denom());
        BivariateSeries::new_raw(l, a.terms, hkey.min(a.horizon))
    }

    /// Extract as a univariate series if every Laurent coefficient is
    /// t-free.
    pub fn as_puiseux(&self) -> Option<PuiseuxSeries> {
        let mut pairs: Vec<(Rat, Coeff)> = Vec::new();
        for (e, p) in self.terms() {
            match p.as_monomial() {
                Some((0, c)) => pairs.push((e, c.clone())),
                _ => return None,
            }
        }
        Some(PuiseuxSeries::from_terms(&pairs, self.horizon()))
    }
}

impl fmt::Debug for BivariateSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "O(q^{})", self.horizon());
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(e, p)| format!("({:?})*q^{e}", p))
            .collect();
        write!(f, "{} + O(q^{})", parts.join(" + "), self.horizon())
    }
}

/// The four reduced theta series of the Tate parametrization, truncated
/// at the given q-horizon and |t|-degree bound.
pub fn theta_bar(index: u8, q_horizon: Rat, t_bound: i64) -> BivariateSeries {
    assert!((1..=4).contains(&index), "theta index must be 1..4");
    assert!(q_horizon > rat(0, 1) && t_bound > 0);
    let ram = *q_horizon.denom();
    let hkey = *q_horizon.numer();
    // All n with q-exponent below the horizon satisfy 2n^2 - 2|n| < horizon.
    let mut nmax = 1i64;
    while rat(2 * nmax * nmax - 2 * nmax, 1) < q_horizon {
        nmax += 1;
    }
    let mut terms: BTreeMap<i64, LaurentPoly> = BTreeMap::new();
    for n in -nmax..=nmax {
        let (q_exp, t_deg) = match index {
            1 | 2 => (2 * n * n + 2 * n, 2 * n + 1),
            _ => (2 * n * n, 2 * n),
        };
        if t_deg.abs() > t_bound || rat(q_exp, 1) >= q_horizon {
            continue;
        }
        let sign = if matches!(index, 1 | 3) && n.rem_euclid(2) == 1 {
            -Coeff::one()
        } else {
            Coeff::one()
        };
        let entry = terms.entry(q_exp * ram).or_insert_with(LaurentPoly::zero);
        *entry = entry.add(&LaurentPoly::monomial(sign, t_deg));
    }
    BivariateSeries::new_raw(ram, terms, hkey)
}
