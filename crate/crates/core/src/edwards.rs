//! The two-parameter family f_{r,s} and its Edwards-curve identities.
//!
//! For parameters r, s with eps*r != epsbar*s the family polynomial is
//!
//! ```text
//! f_{r,s}(x,y) = d12 (x+y) + d34 (x^2+y^2) + d5 xy + d67 (x^2 y + y^2 x)
//!              + d8 x^2 y^2
//! d12 = 2 e eb (e^4 - eb^4)(eb s - e r)
//! d34 = (e^4 - eb^4)(eb^2 s^2 - e^2 r^2)
//! d5  = 8 e eb (e r - eb s)(eb^3 r - e^3 s)
//! d67 = 2 (e r - eb s) [ (eb^4 - e^4) r s + 2 e eb (eb^2 r^2 - e^2 s^2) ]
//! d8  = 2 (e^2 s^2 - eb^2 r^2)(eb^2 s^2 - e^2 r^2)
//! ```
//!
//! with e = eps(q), eb = epsbar(q). The curve is birationally an Edwards
//! curve x^2 + y^2 = a^2 (1 + x^2 y^2) with a^2 = 2 e^2 eb^2 / (e^4 + eb^4),
//! and its j-invariant equals the standard j-series evaluated at q^8; both
//! facts are computable here and checked exactly at truncation.

use num_traits::{One, Zero};

use crate::bivariate::theta_bar;
use crate::error::{Error, Result};
use crate::rational::{coeff_int, rat, Coeff, Rat};
use crate::series::{epsilon_bar, euler_epsilon, PuiseuxSeries, Valuation};

/// Family parameters (r, s) with the non-degeneracy v(eps r - epsbar s)
/// Known at truncation, plus the Euler units at the working horizon.
#[derive(Clone, Debug)]
pub struct FamilyParams {
    r: PuiseuxSeries,
    s: PuiseuxSeries,
    eps: PuiseuxSeries,
    epsbar: PuiseuxSeries,
}

impl FamilyParams {
    pub fn new(r: PuiseuxSeries, s: PuiseuxSeries) -> Result<Self> {
        let horizon = r.horizon().min(s.horizon());
        if horizon < rat(1, 1) {
            return Err(Error::InsufficientPrecision(format!(
                "family horizon {horizon} below 1"
            )));
        }
        let eps = euler_epsilon(horizon);
        let epsbar = epsilon_bar(horizon);
        let nondeg = &(&eps * &r) - &(&epsbar * &s);
        if !nondeg.valuation().is_known() {
            return Err(Error::DegenerateParams);
        }
        Ok(FamilyParams { r, s, eps, epsbar })
    }

    pub fn r(&self) -> &PuiseuxSeries {
        &self.r
    }

    pub fn s(&self) -> &PuiseuxSeries {
        &self.s
    }

    pub fn eps(&self) -> &PuiseuxSeries {
        &self.eps
    }

    pub fn epsbar(&self) -> &PuiseuxSeries {
        &self.epsbar
    }

    pub fn horizon(&self) -> Rat {
        self.r.horizon().min(self.s.horizon())
    }

    /// v(r + s); UndefinedDelta when the truncation does not decide it.
    pub fn v_plus(&self) -> Result<Rat> {
        (&self.r + &self.s)
            .valuation()
            .known()
            .ok_or_else(|| Error::UndefinedDelta("v(r+s) not Known at truncation".into()))
    }

    /// v(r - s); UndefinedDelta when the truncation does not decide it.
    pub fn v_minus(&self) -> Result<Rat> {
        (&self.r - &self.s)
            .valuation()
            .known()
            .ok_or_else(|| Error::UndefinedDelta("v(r-s) not Known at truncation".into()))
    }

    /// delta = v(r+s) - v(r-s), the single shape parameter of the family.
    pub fn delta(&self) -> Result<Rat> {
        Ok(self.v_plus()? - self.v_minus()?)
    }

    /// Principal coefficient of r + s (the smoothness discriminator at
    /// delta = 1).
    pub fn principal_r_plus_s(&self) -> Result<Coeff> {
        (&self.r + &self.s).principal_coefficient()
    }
}

/// The five family coefficients and the Edwards parameter a^2.
#[derive(Clone, Debug)]
pub struct EdwardsCoefficients {
    pub d12: PuiseuxSeries,
    pub d34: PuiseuxSeries,
    pub d5: PuiseuxSeries,
    pub d67: PuiseuxSeries,
    pub d8: PuiseuxSeries,
    pub a_squared: PuiseuxSeries,
}

/// Valuations of the five coefficients, in support order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropCoefficientVector {
    pub u12: Valuation,
    pub u34: Valuation,
    pub u5: Valuation,
    pub u67: Valuation,
    pub u8: Valuation,
}

impl TropCoefficientVector {
    pub fn all_known(&self) -> bool {
        [self.u12, self.u34, self.u5, self.u67, self.u8]
            .iter()
            .all(|v| v.is_known())
    }
}

/// a^2 = 2 eps^2 epsbar^2 / (eps^4 + epsbar^4), principal term 1.
pub fn edwards_a_squared(horizon: Rat) -> PuiseuxSeries {
    assert!(horizon >= rat(4, 1), "a^2 needs horizon >= 4");
    let eps = euler_epsilon(horizon);
    let epsbar = epsilon_bar(horizon);
    a_squared_from(&eps, &epsbar)
}

fn a_squared_from(eps: &PuiseuxSeries, epsbar: &PuiseuxSeries) -> PuiseuxSeries {
    let e2 = eps.pow(2);
    let eb2 = epsbar.pow(2);
    let num = (&e2 * &eb2).scale(&coeff_int(2));
    let den = &e2.pow(2) + &eb2.pow(2);
    num.div(&den).expect("eps^4 + epsbar^4 is a unit")
}

/// Constant term of the substituted Edwards equation with alpha = epsbar,
/// beta = eps: d0 = 2 alpha^2 beta^2 - a^2 (alpha^4 + beta^4). Vanishes
/// identically, so the truncation must be all-zero.
pub fn edwards_d0(horizon: Rat) -> PuiseuxSeries {
    let eps = euler_epsilon(horizon);
    let epsbar = epsilon_bar(horizon);
    let a2 = a_squared_from(&eps, &epsbar);
    let alpha2 = epsbar.pow(2);
    let beta2 = eps.pow(2);
    let lhs = (&alpha2 * &beta2).scale(&coeff_int(2));
    let rhs = &a2 * &(&alpha2.pow(2) + &beta2.pow(2));
    &lhs - &rhs
}

/// The five closed-form coefficients of f_{r,s}, expanded exactly.
pub fn family_coefficients(params: &FamilyParams) -> Result<EdwardsCoefficients> {
    let (r, s) = (&params.r, &params.s);
    let (e, eb) = (&params.eps, &params.epsbar);
    let er_ebs = &(e * r) - &(eb * s);
    if !er_ebs.valuation().is_known() {
        return Err(Error::DegenerateParams);
    }
    let e2 = e.pow(2);
    let eb2 = eb.pow(2);
    let e4 = e2.pow(2);
    let eb4 = eb2.pow(2);
    let eeb = e * eb;
    let r2 = r.pow(2);
    let s2 = s.pow(2);
    let e4_m_eb4 = &e4 - &eb4;

    let d12 = (&(&eeb * &e4_m_eb4) * &er_ebs.neg()).scale(&coeff_int(2));
    let d34 = &e4_m_eb4 * &(&(&eb2 * &s2) - &(&e2 * &r2));
    let d5 = (&(&eeb * &er_ebs) * &(&(&(&eb2 * eb) * r) - &(&(&e2 * e) * s))).scale(&coeff_int(8));
    let inner = &(&e4_m_eb4.neg() * &(r * s))
        + &(&eeb * &(&(&eb2 * &r2) - &(&e2 * &s2))).scale(&coeff_int(2));
    let d67 = (&er_ebs * &inner).scale(&coeff_int(2));
    let d8 = (&(&(&e2 * &s2) - &(&eb2 * &r2)) * &(&(&eb2 * &s2) - &(&e2 * &r2)))
        .scale(&coeff_int(2));
    let a_squared = a_squared_from(e, eb);
    Ok(EdwardsCoefficients {
        d12,
        d34,
        d5,
        d67,
        d8,
        a_squared,
    })
}

/// Componentwise valuations; AtLeast entries are propagated, not guessed.
pub fn trop_valuations(coeffs: &EdwardsCoefficients) -> TropCoefficientVector {
    TropCoefficientVector {
        u12: coeffs.d12.valuation(),
        u34: coeffs.d34.valuation(),
        u5: coeffs.d5.valuation(),
        u67: coeffs.d67.valuation(),
        u8: coeffs.d8.valuation(),
    }
}

/// Evaluate f_{r,s} at a pair of series.
pub fn f_eval(
    c: &EdwardsCoefficients,
    xx: &PuiseuxSeries,
    yy: &PuiseuxSeries,
) -> PuiseuxSeries {
    let x2 = xx.pow(2);
    let y2 = yy.pow(2);
    let mut acc = &c.d12 * &(xx + yy);
    acc = &acc + &(&c.d34 * &(&x2 + &y2));
    acc = &acc + &(&c.d5 * &(xx * yy));
    acc = &acc + &(&c.d67 * &(&(&x2 * yy) + &(&y2 * xx)));
    acc = &acc + &(&c.d8 * &(&x2 * &y2));
    acc
}

/// Report of one exact identity check.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub identity: String,
    pub pass: bool,
    pub first_mismatch_exponent: Option<Rat>,
    pub horizon: Rat,
}

impl IdentityReport {
    pub fn from_residual(identity: &str, residual: &PuiseuxSeries) -> Self {
        IdentityReport {
            identity: identity.to_string(),
            pass: residual.is_zero_truncation(),
            first_mismatch_exponent: residual.valuation().known(),
            horizon: residual.horizon(),
        }
    }
}

/// j(E_a) as a q-series, resolved exactly on exponents below `window`.
///
/// The closed form is j = 16 (a^8 + 14 a^4 + 1)^3 / (a^4 (a^4 - 1)^4);
/// the denominator has valuation 8, so the Euler units are generated at
/// window + 16 internally to leave the requested window intact.
pub fn j_invariant_series(window: Rat) -> PuiseuxSeries {
    assert!(window >= rat(1, 1));
    let gen_h = window + rat(16, 1);
    let eps = euler_epsilon(gen_h);
    let epsbar = epsilon_bar(gen_h);
    let a2 = a_squared_from(&eps, &epsbar);
    let a4 = a2.pow(2);
    let a8 = a4.pow(2);
    let one = PuiseuxSeries::one(gen_h);
    let num = (&(&a8 + &a4.scale(&coeff_int(14))) + &one)
        .pow(3)
        .scale(&coeff_int(16));
    let den = &a4 * &(&a4 - &one).pow(4);
    num.div(&den).expect("a^4 (a^4-1)^4 has Known valuation")
}

/// The standard j-series evaluated at q^8, derived independently from
/// E4^3 / Delta with E4 = 1 + 240 sum sigma_3(n) w^n and
/// Delta = w prod (1 - w^n)^24.
pub fn standard_j_q8(window: Rat) -> PuiseuxSeries {
    let wh = (window / rat(8, 1)).ceil() + rat(3, 1);
    let mut e4_terms: Vec<(Rat, Coeff)> = vec![(rat(0, 1), Coeff::one())];
    let mut n = 1i64;
    while rat(n, 1) < wh {
        let sigma3: i64 = (1..=n).filter(|d| n % d == 0).map(|d| d * d * d).sum();
        e4_terms.push((rat(n, 1), coeff_int(240 * sigma3)));
        n += 1;
    }
    let e4 = PuiseuxSeries::from_terms(&e4_terms, wh);
    let mut eta24 = PuiseuxSeries::one(wh);
    let mut m = 1i64;
    while rat(m, 1) < wh {
        let factor = PuiseuxSeries::from_terms(
            &[(rat(0, 1), Coeff::one()), (rat(m, 1), -Coeff::one())],
            wh,
        );
        eta24 = &eta24 * &factor.pow(24);
        m += 1;
    }
    let delta = eta24.mul_monomial(&Coeff::one(), rat(1, 1));
    let j_w = e4.pow(3).div(&delta).expect("Delta has valuation 1");
    j_w.stretch(rat(8, 1))
}

/// Compare the computed j(E_a) with the standard j-series at q^8 over the
/// common window and report the first mismatch, if any.
///
/// Requires window >= 17 so the q^8 coefficient is resolved.
pub fn j_invariant_check(window: Rat) -> Result<IdentityReport> {
    if window < rat(17, 1) {
        return Err(Error::InsufficientPrecision(format!(
            "j-invariant check needs window >= 17, got {window}"
        )));
    }
    let ours = j_invariant_series(window);
    let reference = standard_j_q8(window);
    let cmp_h = ours.horizon().min(reference.horizon()).min(window);
    let diff = (&ours - &reference).truncate(cmp_h);
    Ok(IdentityReport::from_residual("j(E_a) = j(q^8)", &diff))
}

/// A Tate-parametrized point: t = unit * q^(2u), Edwards coordinates
/// (x, y) and transformed affine coordinates (xx, yy) on f_{r,s} = 0.
#[derive(Clone, Debug)]
pub struct TatePoint {
    pub u: Rat,
    pub unit: PuiseuxSeries,
    pub x: PuiseuxSeries,
    pub y: PuiseuxSeries,
    pub xx: PuiseuxSeries,
    pub yy: PuiseuxSeries,
}

impl TatePoint {
    /// The tightest horizon among the stored coordinate series.
    pub fn effective_horizon(&self) -> Rat {
        self.x
            .horizon()
            .min(self.y.horizon())
            .min(self.xx.horizon())
            .min(self.yy.horizon())
    }
}

/// Reduced theta series evaluated at t = unit * q^(2u), as a univariate
/// series. Exact below e_min + horizon(unit) where e_min is the least
/// exponent of the evaluated sum.
fn theta_series_at(index: u8, u: Rat, unit: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    let exponent_of = |n: i64| -> Rat {
        let (base, tdeg) = match index {
            1 | 2 => (2 * n * n + 2 * n, 2 * n + 1),
            _ => (2 * n * n, 2 * n),
        };
        rat(base, 1) + rat(2, 1) * u * rat(tdeg, 1)
    };
    // The exponent is a convex quadratic in n; scan a window around its
    // minimum, widening until both sides clear the cutoff.
    let center = -u.floor().to_integer();
    let mut span = 8i64;
    let e_min = loop {
        let lo = center - span;
        let hi = center + span;
        let e_min = (lo..=hi).map(exponent_of).min().unwrap();
        if exponent_of(lo) > e_min + unit.horizon()
            && exponent_of(hi) > e_min + unit.horizon()
        {
            break e_min;
        }
        span *= 2;
        if span > 1 << 20 {
            return Err(Error::InsufficientPrecision(
                "theta evaluation window did not stabilize".into(),
            ));
        }
    };
    let cutoff = e_min + unit.horizon();
    // include (n, t-degree, exponent) for every surviving summand
    let included: Vec<(i64, i64, Rat)> = ((center - span)..=(center + span))
        .filter_map(|n| {
            let e = exponent_of(n);
            if e >= cutoff {
                return None;
            }
            let tdeg = match index {
                1 | 2 => 2 * n + 1,
                _ => 2 * n,
            };
            Some((n, tdeg, e))
        })
        .collect();
    let mut acc = PuiseuxSeries::zero(cutoff);
    if included.is_empty() {
        return Ok(acc);
    }
    // unit powers walk the (sorted, even-stepped) degree range
    // incrementally: u^(d + 2k) = u^d * (u^2)^k
    let unit_sq = unit * unit;
    let d0 = included[0].1;
    let mut upow = if d0 >= 0 {
        unit.pow(d0 as u32)
    } else {
        unit.invert()?.pow((-d0) as u32)
    };
    let mut current_deg = d0;
    for (n, tdeg, e) in included {
        while current_deg < tdeg {
            upow = &upow * &unit_sq;
            current_deg += 2;
        }
        debug_assert_eq!(current_deg, tdeg);
        let sign = if matches!(index, 1 | 3) && n.rem_euclid(2) == 1 {
            -Coeff::one()
        } else {
            Coeff::one()
        };
        acc = &acc + &upow.mul_monomial(&sign, e);
    }
    Ok(acc.truncate(cutoff))
}

/// Construct the Tate point for t = unit * q^(2u).
///
/// The unit must have valuation 0. Fails with PolarPoint when a required
/// denominator is an all-zero truncation (t lands on a pole).
pub fn tate_point(u: Rat, unit: &PuiseuxSeries, params: &FamilyParams) -> Result<TatePoint> {
    match unit.valuation() {
        Valuation::Known(v) if v.is_zero() => {}
        v => {
            return Err(Error::InsufficientPrecision(format!(
                "tate point unit must have valuation 0, got {v}"
            )))
        }
    }
    let th1 = theta_series_at(1, u, unit)?;
    let th2 = theta_series_at(2, u, unit)?;
    let th3 = theta_series_at(3, u, unit)?;
    let th4 = theta_series_at(4, u, unit)?;
    let div = |num: &PuiseuxSeries, den: &PuiseuxSeries, what: &str| -> Result<PuiseuxSeries> {
        if den.is_zero_truncation() {
            return Err(Error::PolarPoint(format!(
                "{what} denominator vanishes at truncation (valuation {})",
                den.valuation()
            )));
        }
        num.div(den)
    };
    let x = div(&th1.neg(), &th2, "x(t)")?;
    let y = div(&th3, &th4, "y(t)")?;
    let (e, eb) = (&params.eps, &params.epsbar);
    let (r, s) = (&params.r, &params.s);
    let xx = div(&(&(e * &x) - eb), &(&(&s.neg() * &x) + r), "xx(t)")?;
    let yy = div(&(&(e * &y) - eb), &(&(&s.neg() * &y) + r), "yy(t)")?;
    Ok(TatePoint {
        u,
        unit: unit.clone(),
        x,
        y,
        xx,
        yy,
    })
}

/// Residual of the Edwards equation x^2 + y^2 - a^2 (1 + x^2 y^2) at a
/// Tate point; an all-zero truncation certifies curve membership.
pub fn edwards_equation_residual(p: &TatePoint, a_squared: &PuiseuxSeries) -> PuiseuxSeries {
    let x2 = p.x.pow(2);
    let y2 = p.y.pow(2);
    let one = PuiseuxSeries::one(a_squared.horizon());
    let lhs = &x2 + &y2;
    let rhs = a_squared * &(&one + &(&x2 * &y2));
    &lhs - &rhs
}

/// The four theta shift identities at truncation, as reports:
/// th1(t) = t th3(tq), th2(t) = t th4(tq), th3(t) = -tq th1(tq),
/// th4(t) = tq th2(tq).
pub fn theta_shift_reports(horizon: Rat) -> Vec<IdentityReport> {
    use crate::bivariate::{BivariateSeries, LaurentPoly};
    let slack = rat(24, 1);
    let hgen = horizon + slack;
    let q = PuiseuxSeries::q(hgen);
    let mut t_bound = 2i64;
    while rat(2 * t_bound * t_bound, 4) < hgen {
        t_bound += 2;
    }
    t_bound += 3;
    let shifted = |i: u8| {
        theta_bar(i, hgen, t_bound)
            .substitute_t_scale(&q)
            .expect("q has Known valuation")
    };
    let tmono = |d: i64| {
        BivariateSeries::from_term(rat(0, 1), LaurentPoly::monomial(Coeff::one(), d), hgen)
    };
    let qt = BivariateSeries::from_puiseux(&q, 1);
    let cases: Vec<(&str, BivariateSeries, BivariateSeries)> = vec![
        ("th1(t) = t th3(tq)", theta_bar(1, horizon, t_bound), shifted(3).mul(&tmono(1))),
        ("th2(t) = t th4(tq)", theta_bar(2, horizon, t_bound), shifted(4).mul(&tmono(1))),
        ("th3(t) = -tq th1(tq)", theta_bar(3, horizon, t_bound), shifted(1).mul(&qt).neg()),
        ("th4(t) = tq th2(tq)", theta_bar(4, horizon, t_bound), shifted(2).mul(&qt)),
    ];
    cases
        .into_iter()
        .map(|(name, lhs, rhs)| {
            let h = lhs.horizon().min(rhs.horizon()).min(horizon);
            let diff = lhs.truncate(h).sub(&rhs.truncate(h));
            IdentityReport {
                identity: name.to_string(),
                pass: diff.is_zero_truncation(),
                first_mismatch_exponent: diff.valuation().known(),
                horizon: h,
            }
        })
        .collect()
}
