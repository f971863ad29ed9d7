//! Tropicalization of the family polynomial: min-plus evaluation, the
//! dual regular subdivision of the Newton polygon, the tropical curve,
//! cycle measurement, and two independent smoothness checkers.
//!
//! The support is fixed to the eight monomials of f_{r,s} with the
//! symmetric identifications u(1,0)=u(0,1), u(2,0)=u(0,2),
//! u(2,1)=u(1,2); there is no constant term (d0 vanishes identically).
//! The Newton polygon is the pentagon conv{(1,0),(2,0),(2,2),(0,2),(0,1)}
//! with boundary lattice length 7.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::edwards::{family_coefficients, trop_valuations, FamilyParams, TropCoefficientVector};
use crate::error::{Error, Result};
use crate::rational::{gcd_i64, rat, Rat};
use crate::series::Valuation;
use crate::thetaparam::{delta_shape, ShapePrediction};

/// The eight support points in a fixed order.
pub const SUPPORT: [(i64, i64); 8] = [
    (1, 0),
    (0, 1),
    (2, 0),
    (0, 2),
    (1, 1),
    (2, 1),
    (1, 2),
    (2, 2),
];

/// Cycle polygon kinds. `Degenerate` is the delta <= -1 collapse of the
/// parametrized locus; `NoCycleKind` means the bounded part is a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygonKind {
    Triangle,
    Square,
    Pentagon,
    Hexagon,
    Heptagon,
    Degenerate,
    NoCycleKind,
}

impl PolygonKind {
    pub fn from_corner_count(n: usize) -> Option<PolygonKind> {
        match n {
            3 => Some(PolygonKind::Triangle),
            4 => Some(PolygonKind::Square),
            5 => Some(PolygonKind::Pentagon),
            6 => Some(PolygonKind::Hexagon),
            7 => Some(PolygonKind::Heptagon),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolygonKind::Triangle => "triangle",
            PolygonKind::Square => "square",
            PolygonKind::Pentagon => "pentagon",
            PolygonKind::Hexagon => "hexagon",
            PolygonKind::Heptagon => "heptagon",
            PolygonKind::Degenerate => "degenerate",
            PolygonKind::NoCycleKind => "none",
        }
    }
}

/// The tropical polynomial: the fixed support with coefficient
/// valuations under the symmetric identifications.
#[derive(Clone, Debug)]
pub struct TropPolynomial {
    u: TropCoefficientVector,
}

impl TropPolynomial {
    pub fn new(u: TropCoefficientVector) -> Result<Self> {
        let known = [u.u12, u.u34, u.u5, u.u67, u.u8]
            .iter()
            .filter(|v| v.is_known())
            .count();
        if known < 3 {
            return Err(Error::UnknownCoefficientValuation(format!(
                "only {known} of 5 coefficient valuations Known; need at least 3"
            )));
        }
        Ok(TropPolynomial { u })
    }

    /// Convenience constructor from plain rationals (all Known).
    pub fn from_rationals(u12: Rat, u34: Rat, u5: Rat, u67: Rat, u8v: Rat) -> Self {
        TropPolynomial {
            u: TropCoefficientVector {
                u12: Valuation::Known(u12),
                u34: Valuation::Known(u34),
                u5: Valuation::Known(u5),
                u67: Valuation::Known(u67),
                u8: Valuation::Known(u8v),
            },
        }
    }

    pub fn u(&self) -> &TropCoefficientVector {
        &self.u
    }

    /// Valuation attached to a support point.
    pub fn weight(&self, p: (i64, i64)) -> Valuation {
        match p {
            (1, 0) | (0, 1) => self.u.u12,
            (2, 0) | (0, 2) => self.u.u34,
            (1, 1) => self.u.u5,
            (2, 1) | (1, 2) => self.u.u67,
            (2, 2) => self.u.u8,
            _ => unreachable!("point outside the fixed support"),
        }
    }

    /// All eight lifted heights; errors if any is merely bounded.
    pub fn known_heights(&self) -> Result<Vec<((i64, i64), Rat)>> {
        SUPPORT
            .iter()
            .map(|p| {
                self.weight(*p).known().map(|v| (*p, v)).ok_or_else(|| {
                    Error::UnknownCoefficientValuation(format!(
                        "coefficient valuation at {:?} is only bounded ({})",
                        p,
                        self.weight(*p)
                    ))
                })
            })
            .collect()
    }
}

/// Exact min-plus evaluation. Returns the min value and the argmin set;
/// the point lies on the tropical curve iff the argmin has size >= 2.
///
/// AtLeast entries are tolerated only when their bound already exceeds
/// the minimum of the Known terms at (X, Y).
pub fn trop_eval(f: &TropPolynomial, x: Rat, y: Rat) -> Result<(Rat, Vec<(i64, i64)>)> {
    let mut min: Option<Rat> = None;
    let mut argmin: Vec<(i64, i64)> = Vec::new();
    for p in SUPPORT {
        let lin = rat(p.0, 1) * x + rat(p.1, 1) * y;
        if let Valuation::Known(v) = f.weight(p) {
            let val = v + lin;
            match min {
                None => {
                    min = Some(val);
                    argmin = vec![p];
                }
                Some(m) if val < m => {
                    min = Some(val);
                    argmin = vec![p];
                }
                Some(m) if val == m => argmin.push(p),
                _ => {}
            }
        }
    }
    let m = min.expect("at least 3 Known entries");
    // any AtLeast entry whose bound could reach the minimum makes the
    // evaluation a guess
    for p in SUPPORT {
        if let Valuation::AtLeast(b) = f.weight(p) {
            let lin = rat(p.0, 1) * x + rat(p.1, 1) * y;
            if b + lin <= m {
                return Err(Error::UnknownCoefficientValuation(format!(
                    "AtLeast({b}) entry at {p:?} could affect the min at ({x}, {y})"
                )));
            }
        }
    }
    Ok((m, argmin))
}

/// A cell of the regular subdivision: the full equality set of one lower
/// facet plus its counterclockwise hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub members: Vec<(i64, i64)>,
    pub hull: Vec<(i64, i64)>,
}

impl Cell {
    /// Twice the Euclidean area of the hull (shoelace).
    pub fn area2(&self) -> i64 {
        let h = &self.hull;
        let n = h.len();
        let mut acc = 0i64;
        for k in 0..n {
            let (x1, y1) = h[k];
            let (x2, y2) = h[(k + 1) % n];
            acc += x1 * y2 - x2 * y1;
        }
        acc.abs()
    }

    pub fn is_unimodular_triangle(&self) -> bool {
        self.hull.len() == 3 && self.members.len() == 3 && self.area2() == 1
    }
}

/// The regular subdivision induced by the lifted heights.
#[derive(Clone, Debug)]
pub struct Subdivision {
    pub cells: Vec<Cell>,
    pub heights: Vec<((i64, i64), Rat)>,
}

fn convex_hull_ccw(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| -> i64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Project the lower faces of the lifted point set. Coplanar point sets
/// are kept as single polygonal cells; no arbitrary triangulation is
/// introduced.
pub fn regular_subdivision(f: &TropPolynomial) -> Result<Subdivision> {
    let heights = f.known_heights()?;
    let n = heights.len();
    let mut seen: BTreeSet<Vec<(i64, i64)>> = BTreeSet::new();
    let mut cells: Vec<Cell> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let ((x1, y1), h1) = heights[a];
                let ((x2, y2), h2) = heights[b];
                let ((x3, y3), h3) = heights[c];
                let det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
                if det == 0 {
                    continue;
                }
                let det = rat(det, 1);
                let alpha = ((h2 - h1) * rat(y3 - y1, 1) - (h3 - h1) * rat(y2 - y1, 1)) / det;
                let beta = (rat(x2 - x1, 1) * (h3 - h1) - rat(x3 - x1, 1) * (h2 - h1)) / det;
                let gamma = h1 - alpha * rat(x1, 1) - beta * rat(y1, 1);
                let mut lower = true;
                let mut equality: Vec<(i64, i64)> = Vec::new();
                for &((x, y), h) in &heights {
                    let plane = alpha * rat(x, 1) + beta * rat(y, 1) + gamma;
                    if h < plane {
                        lower = false;
                        break;
                    }
                    if h == plane {
                        equality.push((x, y));
                    }
                }
                if !lower {
                    continue;
                }
                equality.sort();
                if seen.insert(equality.clone()) {
                    let hull = convex_hull_ccw(&equality);
                    if hull.len() >= 3 {
                        cells.push(Cell {
                            members: equality,
                            hull,
                        });
                    }
                }
            }
        }
    }
    // The cells must tile the Newton pentagon (area 7/2).
    let total: i64 = cells.iter().map(|c| c.area2()).sum();
    if total != 7 {
        return Err(Error::UnknownCoefficientValuation(format!(
            "subdivision cells cover area {total}/2 instead of 7/2"
        )));
    }
    Ok(Subdivision { cells, heights })
}

/// Bounded edge of a tropical curve; `dir` is the primitive direction
/// from `from` to `to` and `weight` its multiplicity.
#[derive(Clone, Debug)]
pub struct CurveEdge {
    pub from: usize,
    pub to: usize,
    pub weight: i64,
    pub dir: (i64, i64),
    pub lattice_length: Rat,
}

/// Unbounded ray with primitive direction and multiplicity.
#[derive(Clone, Debug)]
pub struct CurveRay {
    pub at: usize,
    pub dir: (i64, i64),
    pub weight: i64,
}

/// The tropical curve dual to a regular subdivision.
#[derive(Clone, Debug)]
pub struct TropicalCurve {
    pub vertices: Vec<(Rat, Rat)>,
    pub edges: Vec<CurveEdge>,
    pub rays: Vec<CurveRay>,
}

fn primitive(v: (i64, i64)) -> (i64, i64) {
    let g = gcd_i64(v.0.abs(), v.1.abs());
    if g == 0 {
        (0, 0)
    } else {
        (v.0 / g, v.1 / g)
    }
}

/// Rational direction reduced to a primitive integer vector plus the
/// positive rational stretch factor (the lattice length).
fn rational_dir(dx: Rat, dy: Rat) -> ((i64, i64), Rat) {
    if dx.is_zero() && dy.is_zero() {
        return ((0, 0), rat(0, 1));
    }
    let den = num_integer::lcm(*dx.denom(), *dy.denom());
    let ix = (dx * rat(den, 1)).to_integer();
    let iy = (dy * rat(den, 1)).to_integer();
    let p = primitive((ix, iy));
    let mu = if p.0 != 0 {
        dx / rat(p.0, 1)
    } else {
        dy / rat(p.1, 1)
    };
    (p, mu)
}

/// Build the dual tropical curve: one vertex per 2-cell, bounded edges
/// across interior subdivision edges (weight = lattice length of the
/// dual edge), rays across boundary edges. Balancing is verified.
pub fn dual_curve(sub: &Subdivision, _f: &TropPolynomial) -> Result<TropicalCurve> {
    let heights: BTreeMap<(i64, i64), Rat> = sub.heights.iter().cloned().collect();
    let mut vertices: Vec<(Rat, Rat)> = Vec::new();
    for cell in &sub.cells {
        let (p1, p2, p3) = {
            let h = &cell.hull;
            (h[0], h[1], h[2])
        };
        let (h1, h2, h3) = (heights[&p1], heights[&p2], heights[&p3]);
        // u1 + i1 X + j1 Y = u2 + i2 X + j2 Y = u3 + i3 X + j3 Y
        let a11 = rat(p2.0 - p1.0, 1);
        let a12 = rat(p2.1 - p1.1, 1);
        let a21 = rat(p3.0 - p1.0, 1);
        let a22 = rat(p3.1 - p1.1, 1);
        let b1 = h1 - h2;
        let b2 = h1 - h3;
        let det = a11 * a22 - a12 * a21;
        let x = (b1 * a22 - b2 * a12) / det;
        let y = (a11 * b2 - a21 * b1) / det;
        vertices.push((x, y));
    }
    // Edge identification: each hull edge keyed by its sorted endpoint pair.
    type EdgeKey = ((i64, i64), (i64, i64));
    let mut edge_owners: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (ci, cell) in sub.cells.iter().enumerate() {
        let h = &cell.hull;
        for k in 0..h.len() {
            let a = h[k];
            let b = h[(k + 1) % h.len()];
            let key = if a < b { (a, b) } else { (b, a) };
            edge_owners.entry(key).or_default().push(ci);
        }
    }
    let mut edges: Vec<CurveEdge> = Vec::new();
    let mut rays: Vec<CurveRay> = Vec::new();
    for ((a, b), owners) in &edge_owners {
        let seg = (b.0 - a.0, b.1 - a.1);
        let weight = gcd_i64(seg.0.abs(), seg.1.abs());
        match owners.len() {
            2 => {
                let (c1, c2) = (owners[0], owners[1]);
                let (v1, v2) = (vertices[c1], vertices[c2]);
                let (dir, mu) = rational_dir(v2.0 - v1.0, v2.1 - v1.1);
                if mu.is_zero() {
                    return Err(Error::UnknownCoefficientValuation(
                        "adjacent cells share a dual vertex".into(),
                    ));
                }
                edges.push(CurveEdge {
                    from: c1,
                    to: c2,
                    weight,
                    dir,
                    lattice_length: mu,
                });
            }
            1 => {
                // boundary edge: ray direction d with <p, d> minimized on
                // the edge over the whole support
                let perp = primitive((a.1 - b.1, b.0 - a.0));
                let candidates = [perp, (-perp.0, -perp.1)];
                let value = |p: (i64, i64), d: (i64, i64)| p.0 * d.0 + p.1 * d.1;
                let mut chosen = None;
                'outer: for d in candidates {
                    let m = value(*a, d);
                    if value(*b, d) != m {
                        continue;
                    }
                    for p in SUPPORT {
                        if value(p, d) < m {
                            continue 'outer;
                        }
                    }
                    chosen = Some(d);
                    break;
                }
                let d = chosen.ok_or_else(|| {
                    Error::UnknownCoefficientValuation(format!(
                        "no outward ray direction for boundary edge {a:?}-{b:?}"
                    ))
                })?;
                rays.push(CurveRay {
                    at: owners[0],
                    dir: d,
                    weight,
                });
            }
            k => {
                return Err(Error::UnknownCoefficientValuation(format!(
                    "subdivision edge {a:?}-{b:?} bounds {k} cells"
                )))
            }
        }
    }
    let curve = TropicalCurve {
        vertices,
        edges,
        rays,
    };
    verify_balancing(&curve)?;
    Ok(curve)
}

/// Balancing: at every vertex the weighted primitive directions of all
/// incident edges and rays, oriented outward, sum to zero.
pub fn verify_balancing(curve: &TropicalCurve) -> Result<()> {
    for (vi, _) in curve.vertices.iter().enumerate() {
        let mut sum = (0i64, 0i64);
        for e in &curve.edges {
            if e.from == vi {
                sum = (sum.0 + e.weight * e.dir.0, sum.1 + e.weight * e.dir.1);
            }
            if e.to == vi {
                sum = (sum.0 - e.weight * e.dir.0, sum.1 - e.weight * e.dir.1);
            }
        }
        for r in &curve.rays {
            if r.at == vi {
                sum = (sum.0 + r.weight * r.dir.0, sum.1 + r.weight * r.dir.1);
            }
        }
        if sum != (0, 0) {
            return Err(Error::UnknownCoefficientValuation(format!(
                "balancing fails at vertex {vi}: residual {sum:?}"
            )));
        }
    }
    Ok(())
}

/// Exact membership test against the constructed edge/ray set.
pub fn curve_contains_point(curve: &TropicalCurve, p: (Rat, Rat)) -> bool {
    let between = |a: (Rat, Rat), b: (Rat, Rat)| -> bool {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let (px, py) = (p.0 - a.0, p.1 - a.1);
        if dx * py - dy * px != rat(0, 1) {
            return false;
        }
        let t = if !dx.is_zero() { px / dx } else { py / dy };
        t >= rat(0, 1) && t <= rat(1, 1)
    };
    for e in &curve.edges {
        if between(curve.vertices[e.from], curve.vertices[e.to]) {
            return true;
        }
    }
    for r in &curve.rays {
        let a = curve.vertices[r.at];
        let (dx, dy) = (rat(r.dir.0, 1), rat(r.dir.1, 1));
        let (px, py) = (p.0 - a.0, p.1 - a.1);
        if dx * py - dy * px != rat(0, 1) {
            continue;
        }
        let t = if !dx.is_zero() { px / dx } else { py / dy };
        if t >= rat(0, 1) {
            return true;
        }
    }
    false
}

/// Geometry of the unique bounded cycle.
#[derive(Clone, Debug)]
pub struct CycleGeometry {
    /// Vertex indices in cyclic order.
    pub vertices: Vec<usize>,
    pub lattice_length: Rat,
    /// Corner count = number of direction changes around the cycle.
    pub corners: usize,
    /// Corner coordinates in cyclic order.
    pub corner_points: Vec<(Rat, Rat)>,
}

/// Find the unique bounded cycle and measure it in the lattice metric
/// (Euclidean length over the Euclidean norm of the primitive direction).
pub fn cycle_measure(curve: &TropicalCurve) -> Result<CycleGeometry> {
    let n = curve.vertices.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (edge idx, other vertex)
    for (ei, e) in curve.edges.iter().enumerate() {
        adj[e.from].push((ei, e.to));
        adj[e.to].push((ei, e.from));
    }
    let mut alive_edge = vec![true; curve.edges.len()];
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut queue: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = queue.pop() {
        for &(ei, w) in &adj[v] {
            if alive_edge[ei] {
                alive_edge[ei] = false;
                degree[v] -= 1;
                degree[w] -= 1;
                if degree[w] == 1 {
                    queue.push(w);
                }
            }
        }
    }
    let cycle_edges: Vec<usize> = (0..curve.edges.len()).filter(|&e| alive_edge[e]).collect();
    if cycle_edges.is_empty() {
        return Err(Error::NoCycle);
    }
    // Remaining graph must be a single 2-regular cycle.
    let start = curve.edges[cycle_edges[0]].from;
    let mut order: Vec<usize> = vec![start];
    let mut prev_edge = usize::MAX;
    let mut here = start;
    loop {
        let mut next = None;
        for &(ei, w) in &adj[here] {
            if alive_edge[ei] && ei != prev_edge {
                next = Some((ei, w));
                break;
            }
        }
        let (ei, w) = next.ok_or(Error::NoCycle)?;
        if w == start {
            if order.len() != cycle_edges.len() {
                return Err(Error::NoCycle);
            }
            break;
        }
        order.push(w);
        prev_edge = ei;
        here = w;
    }
    let mut length = rat(0, 1);
    let mut dirs: Vec<(i64, i64)> = Vec::new();
    let k = order.len();
    for i in 0..k {
        let a = curve.vertices[order[i]];
        let b = curve.vertices[order[(i + 1) % k]];
        let (dir, mu) = rational_dir(b.0 - a.0, b.1 - a.1);
        length += mu;
        dirs.push(dir);
    }
    let mut corners = 0usize;
    let mut corner_points = Vec::new();
    for i in 0..k {
        let prev = dirs[(i + k - 1) % k];
        if dirs[i] != prev {
            corners += 1;
            corner_points.push(curve.vertices[order[i]]);
        }
    }
    Ok(CycleGeometry {
        vertices: order,
        lattice_length: length,
        corners,
        corner_points,
    })
}

/// Smoothness by the inequality table, one row per polygon kind. The
/// entries may be AtLeast bounds; an inequality is used only when the
/// bound already decides it.
pub fn table1_smoothness(u: &TropCoefficientVector, kind: PolygonKind) -> Result<bool> {
    // rows as coefficient vectors over (u12, u34, u5, u67, u8)
    let rows: &[[i64; 5]] = match kind {
        PolygonKind::Triangle => &[[0, -1, 0, 2, -1], [1, 0, -1, -1, 1], [-2, 0, 3, 0, -1]],
        PolygonKind::Square => &[[0, 0, -1, 2, -1], [-1, 0, 2, -1, 0], [1, -1, -1, 1, 0]],
        PolygonKind::Pentagon => &[[0, 0, 1, -2, 1], [-1, 0, 1, 1, -1], [1, -1, -1, 1, 0]],
        PolygonKind::Hexagon => &[[0, 0, -1, 2, -1], [0, -1, 1, 0, 0], [-1, 1, 1, -1, 0]],
        PolygonKind::Heptagon => &[[0, 0, 1, -2, 1], [0, -1, 0, 2, -1], [-1, 1, 1, -1, 0]],
        other => {
            return Err(Error::UnknownCoefficientValuation(format!(
                "no smoothness row for cycle kind {}",
                other.name()
            )))
        }
    };
    let vals = [u.u12, u.u34, u.u5, u.u67, u.u8];
    let mut all_true = true;
    for row in rows {
        // L = sum c_i u_i < 0 with u_i in [bound, infinity) for AtLeast
        let mut lo = rat(0, 1);
        let mut lo_minus_inf = false;
        let mut hi = rat(0, 1);
        let mut hi_plus_inf = false;
        for (c, v) in row.iter().zip(vals.iter()) {
            if *c == 0 {
                continue;
            }
            match v {
                Valuation::Known(x) => {
                    lo += rat(*c, 1) * *x;
                    hi += rat(*c, 1) * *x;
                }
                Valuation::AtLeast(b) => {
                    if *c > 0 {
                        lo += rat(*c, 1) * *b;
                        hi_plus_inf = true;
                    } else {
                        hi += rat(*c, 1) * *b;
                        lo_minus_inf = true;
                    }
                }
            }
        }
        let decided_true = !hi_plus_inf && hi < rat(0, 1);
        let decided_false = !lo_minus_inf && lo >= rat(0, 1);
        if decided_false {
            return Ok(false);
        }
        if !decided_true {
            all_true = false;
        }
    }
    if all_true {
        Ok(true)
    } else {
        Err(Error::UnknownCoefficientValuation(
            "a smoothness inequality is undecided by the AtLeast bounds".into(),
        ))
    }
}

/// Smoothness by the subdivision: every cell a triangle of area 1/2.
pub fn subdivision_smoothness(sub: &Subdivision) -> bool {
    sub.cells.iter().all(|c| c.is_unimodular_triangle())
}

/// Classifier verdict for one family instance.
#[derive(Clone, Debug)]
pub struct CycleReport {
    pub polygon_kind: PolygonKind,
    pub lattice_length: Option<Rat>,
    pub delta: Rat,
    pub smooth_by_table1: bool,
    pub smooth_by_subdivision: bool,
}

/// Full classification output: verdict plus the geometric artifacts.
#[derive(Clone, Debug)]
pub struct Classification {
    pub u: TropCoefficientVector,
    pub delta: Rat,
    pub predicted: ShapePrediction,
    pub report: CycleReport,
    pub subdivision: Subdivision,
    pub curve: TropicalCurve,
    pub cycle: Option<CycleGeometry>,
}

/// Classify a family instance: build the curve, measure the cycle, run
/// both smoothness checkers, and assert agreement with the
/// delta-prediction. Checker disagreement signals an implementation
/// fault, never a legal state.
pub fn classify(params: &FamilyParams) -> Result<Classification> {
    let coeffs = family_coefficients(params)?;
    let u = trop_valuations(&coeffs);
    let delta = params.delta()?;
    let predicted = delta_shape(delta);
    let f = TropPolynomial::new(u.clone())?;
    let sub = regular_subdivision(&f)?;
    let curve = dual_curve(&sub, &f)?;
    let cycle = match cycle_measure(&curve) {
        Ok(c) => Some(c),
        Err(Error::NoCycle) => None,
        Err(e) => return Err(e),
    };
    let smooth_sub = subdivision_smoothness(&sub);
    let (kind, length, smooth_t1) = match &cycle {
        Some(c) => {
            let kind = PolygonKind::from_corner_count(c.corners).ok_or_else(|| {
                Error::UnknownCoefficientValuation(format!(
                    "cycle with {} corners is not a supported polygon",
                    c.corners
                ))
            })?;
            let t1 = table1_smoothness(&u, kind)?;
            (kind, Some(c.lattice_length), t1)
        }
        None => (PolygonKind::Degenerate, None, false),
    };
    if cycle.is_some() && smooth_t1 != smooth_sub {
        return Err(Error::DisagreementBug {
            table1: smooth_t1,
            subdivision: smooth_sub,
        });
    }
    if cycle.is_none() && smooth_sub {
        // a unimodular subdivision always uses the interior point (1,1),
        // forcing a cycle
        return Err(Error::DisagreementBug {
            table1: false,
            subdivision: true,
        });
    }
    // Predicted shape must match the measured one.
    let consistent = match predicted.kind {
        PolygonKind::Degenerate => kind == PolygonKind::Degenerate,
        k => kind == k && length == predicted.cycle_length,
    };
    if !consistent {
        return Err(Error::UnknownCoefficientValuation(format!(
            "shape prediction {} (length {:?}) disagrees with measured {} (length {:?})",
            predicted.kind.name(),
            predicted.cycle_length,
            kind.name(),
            length
        )));
    }
    Ok(Classification {
        u,
        delta,
        predicted,
        report: CycleReport {
            polygon_kind: kind,
            lattice_length: length,
            delta,
            smooth_by_table1: smooth_t1,
            smooth_by_subdivision: smooth_sub,
        },
        subdivision: sub,
        curve,
        cycle,
    })
}

/// Boundary lattice length of the fixed Newton pentagon; equals the
/// total ray weight of every curve in the family.
pub fn newton_boundary_lattice_length() -> i64 {
    let hull = [(1, 0), (2, 0), (2, 2), (0, 2), (0, 1)];
    let mut acc = 0;
    for k in 0..hull.len() {
        let (x1, y1): (i64, i64) = hull[k];
        let (x2, y2) = hull[(k + 1) % hull.len()];
        acc += gcd_i64((x2 - x1).abs(), (y2 - y1).abs());
    }
    acc
}
