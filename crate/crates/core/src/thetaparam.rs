//! Ultradiscrete theta functions and the one-parameter cycle
//! parametrization.
//!
//! The two piecewise-quadratic functions
//!
//! ```text
//! Th_odd(u)  = -2 (2 floor(u/2) + 1 - u)^2
//! Th_even(u) = -2 (2 floor((u+1)/2) - u)^2
//! ```
//!
//! measure (minus twice the square of) the distance from u to the nearest
//! odd resp. even integer. The cycle part of the tropical curve is the
//! locus of (-X(u), -Y(u)) with
//!
//! ```text
//! Y(u) = max(Th_odd(u), -1 + Th_even(u))
//!      - max(-v(r-s) + Th_even(u), -v(r+s) + Th_odd(u))
//! X(u) = Y(u - 1/2)
//! ```
//!
//! and the same quantities arise as the coordinate valuations of
//! Tate-parametrized points away from the exceptional set Xi.

use num_traits::Zero;

use crate::edwards::{family_coefficients, trop_valuations, FamilyParams};
use crate::error::{Error, Result};
use crate::rational::{rat, Rat};
use crate::tropcurve::{trop_eval, PolygonKind, TropPolynomial};

/// -2 (2 floor(u/2) + 1 - u)^2: minus twice the squared distance to the
/// nearest odd integer.
pub fn theta_odd(u: Rat) -> Rat {
    let k = (u / rat(2, 1)).floor().to_integer();
    let d = rat(2 * k + 1, 1) - u;
    rat(-2, 1) * d * d
}

/// -2 (2 floor((u+1)/2) - u)^2: minus twice the squared distance to the
/// nearest even integer.
pub fn theta_even(u: Rat) -> Rat {
    let k = ((u + rat(1, 1)) / rat(2, 1)).floor().to_integer();
    let d = rat(2 * k, 1) - u;
    rat(-2, 1) * d * d
}

/// Valuations v(r+s), v(r-s) and their difference delta.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleParam {
    pub v_plus: Rat,
    pub v_minus: Rat,
    pub delta: Rat,
}

impl CycleParam {
    pub fn new(params: &FamilyParams) -> Result<Self> {
        let v_plus = params.v_plus()?;
        let v_minus = params.v_minus()?;
        Ok(CycleParam {
            v_plus,
            v_minus,
            delta: v_plus - v_minus,
        })
    }

    pub fn from_valuations(v_plus: Rat, v_minus: Rat) -> Self {
        CycleParam {
            v_plus,
            v_minus,
            delta: v_plus - v_minus,
        }
    }
}

fn y_of(cp: &CycleParam, u: Rat) -> Rat {
    let a = theta_odd(u).max(rat(-1, 1) + theta_even(u));
    let b = (-cp.v_minus + theta_even(u)).max(-cp.v_plus + theta_odd(u));
    a - b
}

/// The cycle point (-X(u), -Y(u)).
pub fn cycle_point(cp: &CycleParam, u: Rat) -> (Rat, Rat) {
    let x = y_of(cp, u - rat(1, 2));
    let y = y_of(cp, u);
    (-x, -y)
}

/// Membership test for the exceptional set Xi: the integers, plus the
/// simultaneous tie of both min-expressions (which requires delta = -1).
pub fn is_exceptional(cp: &CycleParam, u: Rat) -> bool {
    if u.is_integer() {
        return true;
    }
    let tie_numerator = rat(1, 1) - theta_even(u) == -theta_odd(u);
    let tie_denominator =
        cp.v_minus - theta_even(u) == cp.v_plus - theta_odd(u);
    tie_numerator && tie_denominator
}

/// Coordinate valuations (v(xx(t)), v(yy(t))) for v(t) = 2u via the
/// min-expressions; exact for u with both u and u - 1/2 outside Xi.
pub fn point_valuations(cp: &CycleParam, u: Rat) -> Result<(Rat, Rat)> {
    if is_exceptional(cp, u) {
        return Err(Error::ExceptionalParameter(u));
    }
    let half = u - rat(1, 2);
    if is_exceptional(cp, half) {
        return Err(Error::ExceptionalParameter(half));
    }
    let v_at = |w: Rat| -> Rat {
        let a = (rat(1, 1) - theta_even(w)).min(-theta_odd(w));
        let b = (cp.v_minus - theta_even(w)).min(cp.v_plus - theta_odd(w));
        a - b
    };
    Ok((v_at(half), v_at(u)))
}

/// Predicted cycle shape as a function of delta alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapePrediction {
    pub kind: PolygonKind,
    /// Lattice length of the predicted cycle (polygonal kinds only).
    pub cycle_length: Option<Rat>,
    /// Length of each of the two degenerate segments (delta <= -1 only).
    pub segment_length: Option<Rat>,
}

/// Shape of the cycle part by the value of delta: pentagon of length 8
/// for delta >= 2, heptagon of length 8 for 1 < delta < 2, square of
/// length 4(delta+1) for -1 < delta <= 1, and for delta <= -1 the locus
/// collapses to two segments of length min(1, -delta-1).
pub fn delta_shape(delta: Rat) -> ShapePrediction {
    if delta >= rat(2, 1) {
        ShapePrediction {
            kind: PolygonKind::Pentagon,
            cycle_length: Some(rat(8, 1)),
            segment_length: None,
        }
    } else if delta > rat(1, 1) {
        ShapePrediction {
            kind: PolygonKind::Heptagon,
            cycle_length: Some(rat(8, 1)),
            segment_length: None,
        }
    } else if delta > rat(-1, 1) {
        ShapePrediction {
            kind: PolygonKind::Square,
            cycle_length: Some(rat(4, 1) * (delta + rat(1, 1))),
            segment_length: None,
        }
    } else {
        ShapePrediction {
            kind: PolygonKind::Degenerate,
            cycle_length: None,
            segment_length: Some(rat(1, 1).min(-delta - rat(1, 1))),
        }
    }
}

/// A maximal straight piece of the sampled locus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub a: (Rat, Rat),
    pub b: (Rat, Rat),
    pub lattice_length: Rat,
}

/// Exact reconstruction of the sampled locus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocusReconstruction {
    /// The locus collapses to a single point (delta = -1).
    Point((Rat, Rat)),
    /// A simple closed polygon with its corners in traversal order.
    Polygon {
        corners: Vec<(Rat, Rat)>,
        lattice_perimeter: Rat,
    },
    /// A folded locus: the distinct support segments (delta <= -1).
    Segments {
        segments: Vec<Segment>,
        total_lattice_length: Rat,
    },
}

/// Sweep of the parametrization over one period plus membership report.
#[derive(Clone, Debug)]
pub struct CycleSampleReport {
    pub step: Rat,
    pub offset: Rat,
    pub cp: CycleParam,
    /// (u, point) pairs over u in offset + step * {0, .., 4/step - 1}.
    pub samples: Vec<(Rat, (Rat, Rat))>,
    /// Some(true) iff every sample sits on the tropical curve (argmin
    /// size >= 2); None when a coefficient valuation is only bounded.
    pub on_curve: Option<bool>,
    pub locus: LocusReconstruction,
    /// Cross-check: every sampled point lies on the reconstructed locus.
    pub samples_on_locus: bool,
    /// True when the default half-step offset had to be moved off Xi.
    pub offset_adjusted: bool,
}

fn primitive_dir(dx: Rat, dy: Rat) -> (i64, i64) {
    if dx.is_zero() && dy.is_zero() {
        return (0, 0);
    }
    let den = num_integer::lcm(*dx.denom(), *dy.denom());
    let ix = (dx * rat(den, 1)).to_integer();
    let iy = (dy * rat(den, 1)).to_integer();
    let g = num_integer::gcd(ix.abs(), iy.abs());
    (ix / g, iy / g)
}

fn lattice_length(a: (Rat, Rat), b: (Rat, Rat)) -> Rat {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let d = primitive_dir(dx, dy);
    if d == (0, 0) {
        return rat(0, 1);
    }
    if d.0 != 0 {
        dx / rat(d.0, 1)
    } else {
        dy / rat(d.1, 1)
    }
}

/// Line through two distinct points as (a, b, c) with a x + b y = c,
/// (a, b) primitive with positive leading entry.
fn line_through(p: (Rat, Rat), q: (Rat, Rat)) -> (i64, i64, Rat) {
    let d = primitive_dir(q.0 - p.0, q.1 - p.1);
    let (a, b) = (-d.1, d.0);
    let (a, b) = if a < 0 || (a == 0 && b < 0) {
        (-a, -b)
    } else {
        (a, b)
    };
    let c = rat(a, 1) * p.0 + rat(b, 1) * p.1;
    (a, b, c)
}

/// Exact reconstruction of the locus from the parametrization's
/// breakpoint structure. The map u -> (-X(u), -Y(u)) is piecewise linear
/// with period 2; its direction can only change where a max-expression
/// switches branch or a theta function kinks, and all such u are exactly
/// computable: the integers and quarter-integers together with the two
/// solutions of Th_odd - Th_even = -delta, all shifted by 0 and 1/2.
pub fn exact_locus(cp: &CycleParam) -> LocusReconstruction {
    use std::collections::BTreeSet;
    let period = rat(2, 1);
    let mut base: Vec<Rat> = vec![rat(0, 1), rat(1, 1), rat(1, 4), rat(7, 4)];
    // numerator tie Th_odd = -1 + Th_even: Th_odd - Th_even = -1, solved
    // by u = 1/4 and 7/4 above; denominator tie needs Th_odd - Th_even =
    // +delta, with Th_odd - Th_even = 4u - 2 on [0,1] and 6 - 4u on [1,2]
    let delta = cp.delta;
    if delta >= rat(-2, 1) && delta <= rat(2, 1) {
        base.push((rat(2, 1) + delta) / rat(4, 1));
        base.push((rat(6, 1) - delta) / rat(4, 1));
    }
    let mut bps: BTreeSet<Rat> = BTreeSet::new();
    for b in base {
        for shift in [rat(0, 1), rat(1, 2)] {
            bps.insert(crate::rational::rat_mod_into(b + shift, period, rat(0, 1)));
        }
    }
    let bps: Vec<Rat> = bps.into_iter().collect();
    let m = bps.len();
    // piecewise-linear segments between consecutive breakpoints
    let mut pieces: Vec<Piece> = Vec::new();
    for i in 0..m {
        let a = bps[i];
        let b = if i + 1 < m { bps[i + 1] } else { bps[0] + period };
        let pa = cycle_point(cp, a);
        let pb = cycle_point(cp, b);
        if pa != pb {
            pieces.push((pa, pb));
        }
    }
    if pieces.is_empty() {
        return LocusReconstruction::Point(cycle_point(cp, bps[0]));
    }
    let dirs: Vec<(i64, i64)> = pieces
        .iter()
        .map(|(a, b)| primitive_dir(b.0 - a.0, b.1 - a.1))
        .collect();
    let n = pieces.len();
    let folded = (0..n).any(|i| {
        let d1 = dirs[i];
        let d2 = dirs[(i + 1) % n];
        d1 == (-d2.0, -d2.1)
    });
    if folded {
        return reconstruct_segments(&pieces);
    }
    // closed polygon: merge consecutive collinear pieces
    let mut corners: Vec<(Rat, Rat)> = Vec::new();
    for i in 0..n {
        if dirs[i] != dirs[(i + n - 1) % n] {
            corners.push(pieces[i].0);
        }
    }
    if corners.len() < 3 {
        return reconstruct_segments(&pieces);
    }
    let mut perim = rat(0, 1);
    for k in 0..corners.len() {
        perim += lattice_length(corners[k], corners[(k + 1) % corners.len()]);
    }
    LocusReconstruction::Polygon {
        corners,
        lattice_perimeter: perim,
    }
}

/// A (start, end) pair of one maximal parametrization interval.
type Piece = ((Rat, Rat), (Rat, Rat));

fn reconstruct_segments(pieces: &[Piece]) -> LocusReconstruction {
    use std::collections::BTreeMap;
    let mut by_line: BTreeMap<(i64, i64, Rat), Vec<(Rat, Rat)>> = BTreeMap::new();
    for (a, b) in pieces {
        if a == b {
            continue;
        }
        let l = line_through(*a, *b);
        let entry = by_line.entry(l).or_default();
        entry.push(*a);
        entry.push(*b);
    }
    let mut segments: Vec<Segment> = Vec::new();
    let mut total = rat(0, 1);
    for ((la, lb, _), ps) in by_line {
        // order along the line direction (lb, -la)
        let key = |p: &(Rat, Rat)| rat(lb, 1) * p.0 - rat(la, 1) * p.1;
        let lo = ps.iter().min_by_key(|p| key(p)).copied().unwrap();
        let hi = ps.iter().max_by_key(|p| key(p)).copied().unwrap();
        let len = lattice_length(lo, hi);
        total += len;
        segments.push(Segment {
            a: lo,
            b: hi,
            lattice_length: len,
        });
    }
    LocusReconstruction::Segments {
        segments,
        total_lattice_length: total,
    }
}

/// True if p lies on the reconstructed locus.
pub fn locus_contains(locus: &LocusReconstruction, p: (Rat, Rat)) -> bool {
    let on_segment = |a: (Rat, Rat), b: (Rat, Rat)| -> bool {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let (px, py) = (p.0 - a.0, p.1 - a.1);
        if dx * py - dy * px != rat(0, 1) {
            return false;
        }
        let t = if !dx.is_zero() { px / dx } else { py / dy };
        t >= rat(0, 1) && t <= rat(1, 1)
    };
    match locus {
        LocusReconstruction::Point(q) => *q == p,
        LocusReconstruction::Polygon { corners, .. } => (0..corners.len())
            .any(|k| on_segment(corners[k], corners[(k + 1) % corners.len()])),
        LocusReconstruction::Segments { segments, .. } => {
            segments.iter().any(|s| on_segment(s.a, s.b))
        }
    }
}

/// Sample the parametrized cycle over one full period u in [offset,
/// offset + 4), verify curve membership pointwise, and reconstruct the
/// locus exactly.
///
/// The step must be 1/(positive integer); the default offset step/2 is
/// moved off the exceptional set automatically when necessary.
pub fn sample_cycle(params: &FamilyParams, step: Rat) -> Result<CycleSampleReport> {
    if *step.numer() != 1 || *step.denom() < 1 {
        return Err(Error::ExceptionalParameter(step));
    }
    let cp = CycleParam::new(params)?;
    let count = (rat(4, 1) / step).to_integer();
    let mut offset = step / rat(2, 1);
    let mut offset_adjusted = false;
    'search: for _ in 0..6 {
        for k in 0..count {
            let u = offset + step * rat(k, 1);
            if is_exceptional(&cp, u) || is_exceptional(&cp, u - rat(1, 2)) {
                offset /= rat(2, 1);
                offset_adjusted = true;
                continue 'search;
            }
        }
        // clean grid found
        let samples: Vec<(Rat, (Rat, Rat))> = (0..count)
            .map(|k| {
                let u = offset + step * rat(k, 1);
                (u, cycle_point(&cp, u))
            })
            .collect();
        let on_curve = match family_coefficients(params)
            .map(|c| trop_valuations(&c))
            .and_then(TropPolynomial::new)
        {
            Ok(f) => {
                let mut all = true;
                for (_, p) in &samples {
                    match trop_eval(&f, p.0, p.1) {
                        Ok((_, argmin)) => {
                            if argmin.len() < 2 {
                                all = false;
                            }
                        }
                        Err(_) => {
                            all = false;
                        }
                    }
                }
                Some(all)
            }
            Err(_) => None,
        };
        let locus = exact_locus(&cp);
        let samples_on_locus = samples.iter().all(|(_, p)| locus_contains(&locus, *p));
        return Ok(CycleSampleReport {
            step,
            offset,
            cp,
            samples,
            on_curve,
            locus,
            samples_on_locus,
            offset_adjusted,
        });
    }
    Err(Error::ExceptionalParameter(offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;
    use crate::series::PuiseuxSeries;

    fn fam(r: &str, s: &str) -> FamilyParams {
        let h = rat(24, 1);
        FamilyParams::new(
            expr::parse_series(r, h).unwrap(),
            expr::parse_series(s, h).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn theta_values_at_integers() {
        assert_eq!(theta_odd(rat(0, 1)), rat(-2, 1));
        assert_eq!(theta_even(rat(0, 1)), rat(0, 1));
        assert_eq!(theta_odd(rat(1, 1)), rat(0, 1));
        assert_eq!(theta_even(rat(1, 1)), rat(-2, 1));
    }

    #[test]
    fn theta_shift_evenness_period() {
        let samples = [
            rat(1, 4),
            rat(7, 3),
            rat(-5, 2),
            rat(13, 16),
            rat(-3, 8),
            rat(5, 7),
        ];
        for &u in &samples {
            // Th_even(u+1) = Th_odd(u), and the +-u +-1 variants
            assert_eq!(theta_even(u + rat(1, 1)), theta_odd(u));
            assert_eq!(theta_even(-u + rat(1, 1)), theta_odd(u));
            assert_eq!(theta_even(u - rat(1, 1)), theta_odd(u));
            // evenness and period 2
            assert_eq!(theta_odd(-u), theta_odd(u));
            assert_eq!(theta_even(-u), theta_even(u));
            assert_eq!(theta_odd(u + rat(2, 1)), theta_odd(u));
            assert_eq!(theta_even(u + rat(2, 1)), theta_even(u));
            // range within [-2, 0]
            for v in [theta_odd(u), theta_even(u)] {
                assert!(v <= rat(0, 1) && v >= rat(-2, 1));
            }
        }
    }

    #[test]
    fn square_case_point_at_zero() {
        // (v+, v-) = (1, 0): (-X(0), -Y(0)) = (0, 1)
        let cp = CycleParam::from_valuations(rat(1, 1), rat(0, 1));
        assert_eq!(cycle_point(&cp, rat(0, 1)), (rat(0, 1), rat(1, 1)));
    }

    #[test]
    fn period_four_in_u() {
        let cp = CycleParam::from_valuations(rat(3, 2), rat(0, 1));
        for k in 0..20 {
            let u = rat(2 * k + 1, 13);
            assert_eq!(cycle_point(&cp, u + rat(4, 1)), cycle_point(&cp, u));
        }
    }

    #[test]
    fn translation_by_common_scale() {
        // scaling (r, s) by q^c moves the locus by -c along the diagonal
        let base = CycleParam::from_valuations(rat(1, 1), rat(0, 1));
        let moved = CycleParam::from_valuations(rat(2, 1), rat(1, 1));
        for k in 0..9 {
            let u = rat(3 * k + 1, 16);
            let (x0, y0) = cycle_point(&base, u);
            let (x1, y1) = cycle_point(&moved, u);
            assert_eq!(x1, x0 - rat(1, 1));
            assert_eq!(y1, y0 - rat(1, 1));
        }
    }

    #[test]
    fn exceptional_set_membership() {
        // integers always exceptional
        let cp = CycleParam::from_valuations(rat(1, 1), rat(0, 1));
        assert!(is_exceptional(&cp, rat(3, 1)));
        assert!(!is_exceptional(&cp, rat(1, 4)));
        assert!(matches!(
            point_valuations(&cp, rat(2, 1)),
            Err(Error::ExceptionalParameter(_))
        ));
        // u - 1/2 integral is rejected too
        assert!(matches!(
            point_valuations(&cp, rat(5, 2)),
            Err(Error::ExceptionalParameter(_))
        ));
        // the double-tie branch requires delta = -1
        let cp2 = CycleParam::from_valuations(rat(0, 1), rat(1, 1));
        // on [0,1]: Th_odd - Th_even = 4u - 2 = -1 at u = 1/4
        assert!(is_exceptional(&cp2, rat(1, 4)));
        assert!(!is_exceptional(&cp2, rat(1, 3)));
    }

    #[test]
    fn point_valuations_equal_cycle_point() {
        // the min-min expression agrees with the max-max route
        for (vp, vm) in [(rat(1, 1), rat(0, 1)), (rat(3, 2), rat(0, 1)), (rat(1, 2), rat(1, 4))] {
            let cp = CycleParam::from_valuations(vp, vm);
            for k in 0..32 {
                let u = rat(1, 32) + rat(k, 16);
                if is_exceptional(&cp, u) || is_exceptional(&cp, u - rat(1, 2)) {
                    continue;
                }
                let pv = point_valuations(&cp, u).unwrap();
                let cpnt = cycle_point(&cp, u);
                assert_eq!(pv, cpnt, "at u = {u}");
            }
        }
    }

    #[test]
    fn delta_shape_cases() {
        assert_eq!(
            delta_shape(rat(1, 1)),
            ShapePrediction {
                kind: PolygonKind::Square,
                cycle_length: Some(rat(8, 1)),
                segment_length: None
            }
        );
        assert_eq!(delta_shape(rat(3, 2)).kind, PolygonKind::Heptagon);
        assert_eq!(delta_shape(rat(2, 1)).kind, PolygonKind::Pentagon);
        assert_eq!(delta_shape(rat(9, 4)).kind, PolygonKind::Pentagon);
        assert_eq!(
            delta_shape(rat(1, 2)).cycle_length,
            Some(rat(6, 1))
        );
        let d = delta_shape(rat(-3, 2));
        assert_eq!(d.kind, PolygonKind::Degenerate);
        assert_eq!(d.segment_length, Some(rat(1, 2)));
        // min(1, -delta-1) saturates at 1
        assert_eq!(delta_shape(rat(-5, 2)).segment_length, Some(rat(1, 1)));
    }

    #[test]
    fn sample_square_case() {
        let p = fam("1-3q", "-1+q");
        let rep = sample_cycle(&p, rat(1, 8)).unwrap();
        assert_eq!(rep.samples.len(), 32);
        assert_eq!(rep.on_curve, Some(true));
        match rep.locus {
            LocusReconstruction::Polygon {
                ref corners,
                lattice_perimeter,
            } => {
                assert_eq!(corners.len(), 4);
                assert_eq!(lattice_perimeter, rat(8, 1));
            }
            ref other => panic!("expected polygon, got {other:?}"),
        }
    }

    #[test]
    fn sample_heptagon_case() {
        let p = fam("1+q^(3/2)", "-1+q^(3/2)");
        let rep = sample_cycle(&p, rat(1, 16)).unwrap();
        assert_eq!(rep.on_curve, Some(true));
        match rep.locus {
            LocusReconstruction::Polygon {
                ref corners,
                lattice_perimeter,
            } => {
                assert_eq!(corners.len(), 7, "heptagon corners");
                assert_eq!(lattice_perimeter, rat(8, 1));
            }
            ref other => panic!("expected polygon, got {other:?}"),
        }
    }

    #[test]
    fn sample_degenerate_case() {
        let p = fam("1+q^(3/2)", "1+2*q^(3/2)");
        let rep = sample_cycle(&p, rat(1, 16)).unwrap();
        match rep.locus {
            LocusReconstruction::Segments {
                ref segments,
                total_lattice_length,
            } => {
                assert_eq!(segments.len(), 2, "two segments: {segments:?}");
                for s in segments {
                    assert_eq!(s.lattice_length, rat(1, 2));
                }
                assert_eq!(total_lattice_length, rat(1, 1));
            }
            ref other => panic!("expected segments, got {other:?}"),
        }
    }

    #[test]
    fn sample_coarse_step_triggers_auto_offset() {
        // delta = -1 makes u = 1/4 exceptional; step 1/2 with offset 1/4
        // hits it, so the offset must move
        let r = expr::parse_series("1+q", rat(24, 1)).unwrap();
        let s = PuiseuxSeries::from_terms(
            &[(rat(0, 1), crate::rational::coeff_int(1)), (rat(2, 1), crate::rational::coeff_int(1))],
            rat(24, 1),
        );
        // v(r+s) = 0, v(r-s) = v(q - q^2) = 1 -> delta = -1
        let p = FamilyParams::new(r, s).unwrap();
        let rep = sample_cycle(&p, rat(1, 2)).unwrap();
        assert!(rep.offset_adjusted);
        assert!(rep.offset < rat(1, 4));
    }
}
