//! The tropical curve as a quotient of a Bruhat-Tits subtree.
//!
//! The coordinate functions of the family, composed with the Tate
//! parametrization, have explicit zero and pole divisors in t:
//!
//! ```text
//! Z_y = { +-q^(+-1/2 + 4n) },   Z = Z_y u q Z_y,
//! Delta = -s th3(t,-q^2) + r th4(t,-q^2) ~ Theta_{xi,a} Theta_{eta,b},
//! P_y = { +-sqrt(-1/xi) q^(-a/2+4n), +-sqrt(-1/eta) q^(-b/2+4n) },
//! ```
//!
//! where the units xi, eta and offsets a, b are solved order by order
//! from the logarithmic derivative of Delta. The subtree of the
//! Bruhat-Tits tree spanned by Z u P together with the central road
//! [0, inf] is built exactly: an end z attaches to the road at height
//! v(z) and two ends share the branch above their common height up to
//! v(z - z'), which reproduces every cross-ratio length |v(c(w,x:y,z))|.
//! Squaring the ends realizes the quotient by -1 (doubling the central
//! metric), and wrapping the road modulo q^8 yields a Betti-1 metric
//! graph compared with the tropical curve through exact canonical forms.
//!
//! A fitted unit can fail to be a rational square (principal part -1);
//! its square root is then a purely imaginary rational series, carried
//! by a quarter-turn phase on the end. Squared ends are rational again,
//! exactly as the quotient labels require.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::bivariate::{theta_bar, BivariateSeries};
use crate::edwards::FamilyParams;
use crate::error::{Error, Result};
use crate::rational::{coeff_int, rat, rat_mod_into, Coeff, Rat};
use crate::series::{PuiseuxSeries, Valuation};
use crate::tropcurve::{Classification, TropicalCurve};

/// Quarter-turn phase of an end: z = phase * unit * q^exponent with the
/// unit a positive-principal rational series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    One,
    MinusOne,
    I,
    MinusI,
}

impl Phase {
    pub fn is_imaginary(&self) -> bool {
        matches!(self, Phase::I | Phase::MinusI)
    }

    /// Sign of the real or imaginary part.
    fn sign(&self) -> i64 {
        match self {
            Phase::One | Phase::I => 1,
            Phase::MinusOne | Phase::MinusI => -1,
        }
    }

    pub fn negate(&self) -> Phase {
        match self {
            Phase::One => Phase::MinusOne,
            Phase::MinusOne => Phase::One,
            Phase::I => Phase::MinusI,
            Phase::MinusI => Phase::I,
        }
    }

    pub fn square(&self) -> Phase {
        match self {
            Phase::One | Phase::MinusOne => Phase::One,
            Phase::I | Phase::MinusI => Phase::MinusOne,
        }
    }

    fn prefix(&self) -> &'static str {
        match self {
            Phase::One => "",
            Phase::MinusOne => "-",
            Phase::I => "i*",
            Phase::MinusI => "-i*",
        }
    }
}

/// A point of K^x used as an end of the Bruhat-Tits subtree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct End {
    pub phase: Phase,
    pub unit: PuiseuxSeries,
    pub exponent: Rat,
    /// Display name; carries the unit symbol, not its expansion.
    pub name: String,
    pub label: String,
}

impl End {
    /// `name` is the unit symbol with a trailing `*` (or empty for unit 1).
    pub fn new(phase: Phase, unit: PuiseuxSeries, exponent: Rat, name: &str) -> Result<Self> {
        match unit.valuation() {
            Valuation::Known(v) if v.is_zero() => {}
            v => {
                return Err(Error::InsufficientPrecision(format!(
                    "end unit must have valuation 0, got {v}"
                )))
            }
        }
        if unit.principal_coefficient()?.is_negative() {
            return Err(Error::InsufficientPrecision(
                "end unit must have positive principal coefficient; fold the sign into the phase"
                    .into(),
            ));
        }
        let label = format!("{}{}q^({})", phase.prefix(), name, exponent);
        Ok(End {
            phase,
            unit,
            exponent,
            name: name.to_string(),
            label,
        })
    }

    /// Height at which the end attaches to the central road.
    pub fn valuation(&self) -> Rat {
        self.exponent
    }

    /// Identity as a point of K^x (label-independent).
    pub fn same_point(&self, other: &End) -> bool {
        self.phase == other.phase && self.exponent == other.exponent && self.unit == other.unit
    }

    pub fn negate(&self) -> End {
        End::new(self.phase.negate(), self.unit.clone(), self.exponent, &self.name)
            .expect("negation preserves the unit")
    }

    /// The image under t -> t^2; always a rational (real-phase) end.
    pub fn square(&self) -> End {
        let unit = &self.unit * &self.unit;
        let name = if self.name.is_empty() {
            String::new()
        } else {
            format!("{}^2*", self.name.trim_end_matches('*'))
        };
        End::new(self.phase.square(), unit, self.exponent * rat(2, 1), &name)
            .expect("square of a unit is a unit")
    }

    /// Multiply by q^k (the deck translation).
    pub fn shift(&self, k: Rat) -> End {
        End::new(self.phase, self.unit.clone(), self.exponent + k, &self.name)
            .expect("shift preserves the unit")
    }
}

/// A point of P^1(K): an end, 0, or infinity. In the disc model the end
/// 0 sits at height +infinity on the central road and infinity at
/// height -infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum ProjPoint {
    Zero,
    Infinity,
    Finite(End),
}

impl ProjPoint {
    pub fn label(&self) -> String {
        match self {
            ProjPoint::Zero => "0".into(),
            ProjPoint::Infinity => "inf".into(),
            ProjPoint::Finite(e) => e.label.clone(),
        }
    }
}

/// v(a - b) for two distinct ends. Real and imaginary parts cannot
/// cancel, so mixed phases give the min of the valuations; matching
/// phases reduce to an exact series difference.
pub fn end_diff_valuation(a: &End, b: &End) -> Result<Rat> {
    if a.phase.is_imaginary() != b.phase.is_imaginary() {
        return Ok(a.exponent.min(b.exponent));
    }
    let sa = coeff_int(a.phase.sign());
    let sb = coeff_int(b.phase.sign());
    let fa = a.unit.mul_monomial(&sa, a.exponent);
    let fb = b.unit.mul_monomial(&sb, b.exponent);
    (&fa - &fb).valuation().expect_known(&format!(
        "v({} - {}) unresolved at truncation",
        a.label, b.label
    ))
}

fn proj_diff_valuation(p: &ProjPoint, q: &ProjPoint) -> Result<Rat> {
    match (p, q) {
        (ProjPoint::Finite(a), ProjPoint::Finite(b)) => end_diff_valuation(a, b),
        (ProjPoint::Zero, ProjPoint::Finite(e)) | (ProjPoint::Finite(e), ProjPoint::Zero) => {
            Ok(e.exponent)
        }
        _ => Err(Error::InsufficientPrecision(
            "difference valuation undefined for this pair".into(),
        )),
    }
}

/// |v(c(w,x : y,z))| with c = (w-y)(x-z) / ((w-z)(x-y)). Factors
/// containing infinity cancel in the limit. All four points must be
/// pairwise distinct.
pub fn cross_ratio_length(
    w: &ProjPoint,
    x: &ProjPoint,
    y: &ProjPoint,
    z: &ProjPoint,
) -> Result<Rat> {
    let pts = [w, x, y, z];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if pts[i] == pts[j] {
                return Err(Error::InsufficientPrecision(format!(
                    "cross ratio requires distinct points; {} repeats",
                    pts[i].label()
                )));
            }
        }
    }
    let d = |p: &ProjPoint, q: &ProjPoint| -> Result<Rat> {
        if matches!(p, ProjPoint::Infinity) || matches!(q, ProjPoint::Infinity) {
            Ok(rat(0, 1))
        } else {
            proj_diff_valuation(p, q)
        }
    };
    let v = d(w, y)? + d(x, z)? - d(w, z)? - d(x, y)?;
    Ok(if v < rat(0, 1) { -v } else { v })
}

/// Finite weighted graph with marked infinite ends; the common carrier
/// for the subtree, its quotients, and the tropical curve.
#[derive(Clone, Debug, Default)]
pub struct MetricGraph {
    /// Optional central-road height per node (None for branch nodes).
    pub node_heights: Vec<Option<Rat>>,
    pub edges: Vec<(usize, usize, Rat)>,
    /// (attachment node, label).
    pub ends: Vec<(usize, String)>,
}

impl MetricGraph {
    fn add_node(&mut self, height: Option<Rat>) -> usize {
        self.node_heights.push(height);
        self.node_heights.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.node_heights.len()
    }

    /// First Betti number assuming the graph is connected.
    pub fn betti(&self) -> i64 {
        self.edges.len() as i64 - self.node_count() as i64 + 1
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.node_count()];
        for (ei, (a, b, _)) in self.edges.iter().enumerate() {
            adj[*a].push((ei, *b));
            adj[*b].push((ei, *a));
        }
        adj
    }

    /// Unique edge path between two nodes of a tree.
    fn tree_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(from);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &(ei, w) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((ei, v));
                    queue.push_back(w);
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut path = Vec::new();
        let mut here = to;
        while let Some((ei, p)) = prev[here] {
            path.push(ei);
            here = p;
        }
        path.reverse();
        Some(path)
    }

    /// Length of the common part of the end-to-end paths [e1, e2] and
    /// [e3, e4] (arguments index into `ends`).
    pub fn shared_path_length(&self, e1: usize, e2: usize, e3: usize, e4: usize) -> Result<Rat> {
        let p1 = self
            .tree_path(self.ends[e1].0, self.ends[e2].0)
            .ok_or_else(|| Error::InsufficientPrecision("disconnected graph".into()))?;
        let p2 = self
            .tree_path(self.ends[e3].0, self.ends[e4].0)
            .ok_or_else(|| Error::InsufficientPrecision("disconnected graph".into()))?;
        let set: std::collections::BTreeSet<usize> = p1.into_iter().collect();
        let mut acc = rat(0, 1);
        for ei in p2 {
            if set.contains(&ei) {
                acc += self.edges[ei].2;
            }
        }
        Ok(acc)
    }
}

/// The subtree with its bookkeeping: which graph end realizes each input
/// end, plus the two central markers.
#[derive(Clone, Debug)]
pub struct BtTree {
    pub graph: MetricGraph,
    /// Graph end index of each input end, in input order.
    pub end_index: Vec<usize>,
    /// Graph end index of the end 0 (top of the central road).
    pub zero_end: usize,
    /// Graph end index of the end infinity (bottom of the central road).
    pub infinity_end: usize,
}

/// Separation levels for a same-height group, by index pair.
struct SepTable {
    sep: BTreeMap<(usize, usize), Rat>,
}

impl SepTable {
    fn build(ends: &[End], group: &[usize]) -> Result<SepTable> {
        let mut sep = BTreeMap::new();
        for a in 0..group.len() {
            for b in (a + 1)..group.len() {
                let (i, j) = (group[a].min(group[b]), group[a].max(group[b]));
                let v = end_diff_valuation(&ends[i], &ends[j])?;
                sep.insert((i, j), v);
            }
        }
        Ok(SepTable { sep })
    }

    fn get(&self, i: usize, j: usize) -> Rat {
        self.sep[&(i.min(j), i.max(j))]
    }
}

fn cluster_group(
    ends: &[End],
    table: &SepTable,
    graph: &mut MetricGraph,
    end_index: &mut [usize],
    members: &[usize],
    level: Rat,
    node: usize,
) {
    if members.len() == 1 {
        graph.ends.push((node, ends[members[0]].label.clone()));
        end_index[members[0]] = graph.ends.len() - 1;
        return;
    }
    // partition into sub-clusters that stay together strictly above level
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'outer: for &m in members {
        for g in groups.iter_mut() {
            if table.get(g[0], m) > level {
                g.push(m);
                continue 'outer;
            }
        }
        groups.push(vec![m]);
    }
    if groups.len() == 1 {
        // all together: climb to the least separation level and split there
        let g = &groups[0];
        let mut next: Option<Rat> = None;
        for a in 0..g.len() {
            for b in (a + 1)..g.len() {
                let s = table.get(g[a], g[b]);
                next = Some(match next {
                    None => s,
                    Some(x) if s < x => s,
                    Some(x) => x,
                });
            }
        }
        let next = next.expect("group of two or more has a separation level");
        debug_assert!(next > level);
        let upper = graph.add_node(None);
        graph.edges.push((node, upper, next - level));
        cluster_group(ends, table, graph, end_index, g, next, upper);
    } else {
        for g in groups {
            cluster_group(ends, table, graph, end_index, &g, level, node);
        }
    }
}

/// Build the subtree spanned by the ends and the central road [0, inf].
///
/// Each end attaches to the road at height v(z); ends of equal height
/// cluster above it, two ends sharing the branch up to height v(z - z').
pub fn build_tree(ends: &[End]) -> Result<BtTree> {
    if ends.is_empty() {
        return Err(Error::IncompleteFundamentalDomain("no ends given".into()));
    }
    for i in 0..ends.len() {
        for j in (i + 1)..ends.len() {
            if ends[i].same_point(&ends[j]) {
                return Err(Error::InsufficientPrecision(format!(
                    "duplicate end {}",
                    ends[i].label
                )));
            }
        }
    }
    let mut graph = MetricGraph::default();
    let mut end_index = vec![usize::MAX; ends.len()];
    let mut by_height: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
    for (i, e) in ends.iter().enumerate() {
        by_height.entry(e.valuation()).or_default().push(i);
    }
    let heights: Vec<Rat> = by_height.keys().copied().collect();
    let road: Vec<usize> = heights.iter().map(|h| graph.add_node(Some(*h))).collect();
    for k in 1..road.len() {
        graph
            .edges
            .push((road[k - 1], road[k], heights[k] - heights[k - 1]));
    }
    // 0 lies above the top of the road (discs shrink toward 0), infinity
    // below the bottom
    graph.ends.push((road[road.len() - 1], "0".into()));
    let zero_end = graph.ends.len() - 1;
    graph.ends.push((road[0], "inf".into()));
    let infinity_end = graph.ends.len() - 1;
    for (k, h) in heights.iter().enumerate() {
        let group = by_height[h].clone();
        let table = SepTable::build(ends, &group)?;
        cluster_group(ends, &table, &mut graph, &mut end_index, &group, *h, road[k]);
    }
    debug_assert!(end_index.iter().all(|&i| i != usize::MAX));
    Ok(BtTree {
        graph,
        end_index,
        zero_end,
        infinity_end,
    })
}

/// Verify the tree metric against cross ratios: for 4-subsets of the
/// ends (capped), the shared path length of [w,x] and [y,z] must equal
/// |v(c(w,x:y,z))|. Returns the number of subsets checked.
pub fn verify_cross_ratio_consistency(tree: &BtTree, ends: &[End], cap: usize) -> Result<usize> {
    let mut pts: Vec<(usize, ProjPoint)> = vec![
        (tree.zero_end, ProjPoint::Zero),
        (tree.infinity_end, ProjPoint::Infinity),
    ];
    for (i, e) in ends.iter().enumerate() {
        pts.push((tree.end_index[i], ProjPoint::Finite(e.clone())));
    }
    let n = pts.len();
    let mut checked = 0usize;
    'all: for a in 0..n {
        for b in (a + 1)..n {
            for c in 0..n {
                for d in (c + 1)..n {
                    if a == c || a == d || b == c || b == d {
                        continue;
                    }
                    let expected =
                        cross_ratio_length(&pts[a].1, &pts[b].1, &pts[c].1, &pts[d].1)?;
                    let got =
                        tree.graph
                            .shared_path_length(pts[a].0, pts[b].0, pts[c].0, pts[d].0)?;
                    if expected != got {
                        return Err(Error::InsufficientPrecision(format!(
                            "tree metric {got} disagrees with cross ratio {expected} on ({}, {} : {}, {})",
                            pts[a].1.label(),
                            pts[b].1.label(),
                            pts[c].1.label(),
                            pts[d].1.label()
                        )));
                    }
                    checked += 1;
                    if checked >= cap {
                        break 'all;
                    }
                }
            }
        }
    }
    Ok(checked)
}

/// The zero divisor Z_y of y o wp: representatives +-q^(1/2), +-q^(-1/2)
/// modulo the deck action (image of cardinality 2 in the quotient).
pub fn zero_divisor_y(horizon: Rat) -> Vec<End> {
    let mut out = Vec::new();
    for e in [rat(1, 2), rat(-1, 2)] {
        for sign in [Phase::One, Phase::MinusOne] {
            out.push(End::new(sign, PuiseuxSeries::one(horizon), e, "").unwrap());
        }
    }
    out
}

/// All of Z = Z_y u q Z_y with exponents in the fundamental window
/// [-1/2, 15/2): classes -1/2, 1/2, 3/2 modulo 4, both signs.
pub fn zero_divisor_window(horizon: Rat) -> Vec<End> {
    let mut out: Vec<End> = Vec::new();
    for base in [rat(-1, 2), rat(1, 2), rat(3, 2)] {
        for n in 0..2 {
            let e = base + rat(4 * n, 1);
            for sign in [Phase::One, Phase::MinusOne] {
                let end = End::new(sign, PuiseuxSeries::one(horizon), e, "").unwrap();
                if !out.iter().any(|x| x.same_point(&end)) {
                    out.push(end);
                }
            }
        }
    }
    out
}

/// Delta = -s th3(t, -q^2) + r th4(t, -q^2).
pub fn delta_series(params: &FamilyParams, q_horizon: Rat) -> BivariateSeries {
    let t_bound = 2 * (1..).find(|n| rat(2 * n * n, 1) >= q_horizon).unwrap() + 2;
    let th3 = theta_bar(3, q_horizon, t_bound);
    let th4 = theta_bar(4, q_horizon, t_bound);
    th3.mul_puiseux(&params.s().neg())
        .add(&th4.mul_puiseux(params.r()))
}

/// One fitted theta factor Theta_{xi, a}.
#[derive(Clone, Debug)]
pub struct ThetaFactor {
    pub xi: PuiseuxSeries,
    /// Offset a, normalized into (0, 8].
    pub offset: Rat,
}

/// Result of fitting Delta ~ Theta_{xi,a} Theta_{eta,b} up to K^x.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub factor_a: ThetaFactor,
    pub factor_b: ThetaFactor,
    /// The overall unit c with Delta = c Theta Theta below the bound.
    pub constant: PuiseuxSeries,
    /// Certified lower bound for v(Delta - c Theta Theta).
    pub residual_bound: Rat,
}

/// d/dt log Theta_{xi,a} as an exact bivariate series below `horizon`.
fn dlog_theta(xi: &PuiseuxSeries, offset: Rat, horizon: Rat) -> Result<BivariateSeries> {
    let mut acc = BivariateSeries::zero(horizon);
    let xi_inv = xi.invert()?;
    // positive factors (1 + xi q^e t^2), e = offset + 8n
    let mut e = offset;
    while e < horizon {
        let mut k = 1i64;
        while rat(k, 1) * e < horizon {
            // 2 (-1)^(k+1) xi^k q^(ek) t^(2k-1)
            let sign = if k % 2 == 1 { 2 } else { -2 };
            let term = xi.pow(k as u32).mul_monomial(&coeff_int(sign), e * rat(k, 1));
            acc = acc.add(&BivariateSeries::from_puiseux(&term, 2 * k - 1));
            k += 1;
        }
        e += rat(8, 1);
    }
    // negative factors (1 + xi^-1 q^e t^-2), e = (8 - offset) + 8n
    let mut e = rat(8, 1) - offset;
    while e < horizon {
        let mut k = 1i64;
        while rat(k, 1) * e < horizon {
            // 2 (-1)^k xi^-k q^(ek) t^-(2k+1)
            let sign = if k % 2 == 1 { -2 } else { 2 };
            let term = xi_inv
                .pow(k as u32)
                .mul_monomial(&coeff_int(sign), e * rat(k, 1));
            acc = acc.add(&BivariateSeries::from_puiseux(&term, -(2 * k + 1)));
            k += 1;
        }
        e += rat(8, 1);
    }
    Ok(acc.truncate(horizon))
}

/// Theta_{xi, a} as a finite product below the q-horizon.
pub fn theta_factor_series(f: &ThetaFactor, horizon: Rat) -> Result<BivariateSeries> {
    let one = BivariateSeries::from_puiseux(&PuiseuxSeries::one(horizon), 0);
    let xi_inv = f.xi.invert()?;
    let mut acc = one.clone();
    let mut e = f.offset;
    while e < horizon {
        let factor = one.add(&BivariateSeries::from_puiseux(
            &f.xi.mul_monomial(&Coeff::one(), e),
            2,
        ));
        acc = acc.mul(&factor);
        e += rat(8, 1);
    }
    let mut e = rat(8, 1) - f.offset;
    while e < horizon {
        let factor = one.add(&BivariateSeries::from_puiseux(
            &xi_inv.mul_monomial(&Coeff::one(), e),
            -2,
        ));
        acc = acc.mul(&factor);
        e += rat(8, 1);
    }
    Ok(acc)
}

/// Fit Delta ~ Theta_{xi,a} Theta_{eta,b}: detect (a, b) from the lowest
/// order of d/dt log Delta (or validate supplied offsets), then solve
/// the unit series order by order. Every q-order is verified as a full
/// Laurent-polynomial identity, and the residual Delta - c Theta Theta
/// is certified at the end.
pub fn fit_pole_factors(
    delta: &BivariateSeries,
    offsets: Option<(Rat, Rat)>,
    fit_order: i64,
) -> Result<FitResult> {
    let ld = delta.log_derivative_t()?;
    let e0 = match ld.valuation() {
        Valuation::Known(v) => v,
        Valuation::AtLeast(b) => {
            return Err(Error::UnderdeterminedFit(format!(
                "log derivative vanishes below {b}"
            )))
        }
    };
    let lead = ld.coeff_at(e0)?;
    let c1 = lead.coeff(1);
    let c3 = lead.coeff(-3);
    let clean = lead.terms().all(|(d, _)| d == 1 || d == -3);
    if c1.is_zero() || c3.is_zero() || !clean {
        return Err(Error::OffsetMismatch(format!(
            "leading coefficient at q^{e0} is not of the form c1 t + c3 t^-3: {lead:?}"
        )));
    }
    let a = {
        let m = rat_mod_into(e0, rat(8, 1), rat(0, 1));
        if m.is_zero() {
            rat(8, 1)
        } else {
            m
        }
    };
    let b = rat(8, 1) - a;
    if let Some((sa, sb)) = offsets {
        let norm = |x: Rat| {
            let m = rat_mod_into(x, rat(8, 1), rat(0, 1));
            if m.is_zero() {
                rat(8, 1)
            } else {
                m
            }
        };
        if norm(sa) != a || norm(sb) != b {
            return Err(Error::OffsetMismatch(format!(
                "supplied offsets ({sa}, {sb}) inconsistent with detected ({a}, {b})"
            )));
        }
    }
    if a == b {
        return Err(Error::UnderdeterminedFit(format!(
            "confluent offsets a = b = {a}"
        )));
    }
    let grid = rat(1, num_integer::lcm(ld.ram(), *a.denom()));
    let fit_horizon = e0 + rat(fit_order, 1);
    if ld.horizon() < fit_horizon {
        return Err(Error::UnderdeterminedFit(format!(
            "log derivative known below {} but the fit needs {}",
            ld.horizon(),
            fit_horizon
        )));
    }
    let xi0 = c1 / coeff_int(2);
    let eta0 = coeff_int(-2) / c3;
    let unit_h = rat(fit_order, 1);
    let mut xi = PuiseuxSeries::constant(xi0, unit_h);
    let mut eta = PuiseuxSeries::constant(eta0.clone(), unit_h);
    let eta0_sq = &eta0 * &eta0;
    let mut e = e0 + grid;
    while e < fit_horizon {
        let theta_side = dlog_theta(&xi, a, e + grid)?.add(&dlog_theta(&eta, b, e + grid)?);
        let resid = ld.coeff_at(e)?.sub(&theta_side.coeff_at(e)?);
        let j = e - a;
        if j >= rat(0, 1) && j < unit_h {
            let r1 = resid.coeff(1);
            if !r1.is_zero() {
                xi = &xi + &PuiseuxSeries::monomial(r1 / coeff_int(2), j, unit_h);
            }
            let r3 = resid.coeff(-3);
            if !r3.is_zero() {
                eta = &eta + &PuiseuxSeries::monomial(&eta0_sq * &r3 / coeff_int(2), j, unit_h);
            }
        }
        // full verification at this order
        let theta_side = dlog_theta(&xi, a, e + grid)?.add(&dlog_theta(&eta, b, e + grid)?);
        let diff = ld.coeff_at(e)?.sub(&theta_side.coeff_at(e)?);
        if !diff.is_zero() {
            return Err(Error::OffsetMismatch(format!(
                "log-derivative mismatch at q^{e}: residual {diff:?}"
            )));
        }
        e += grid;
    }
    let fa = ThetaFactor { xi, offset: a };
    let fb = ThetaFactor { xi: eta, offset: b };
    let prod =
        theta_factor_series(&fa, fit_horizon)?.mul(&theta_factor_series(&fb, fit_horizon)?);
    let ratio = delta.truncate(fit_horizon).mul(&prod.invert()?);
    let constant = ratio.as_puiseux().ok_or_else(|| {
        Error::OffsetMismatch("Delta / (Theta Theta) is not t-free at truncation".into())
    })?;
    let residual = delta
        .truncate(fit_horizon)
        .sub(&prod.mul_puiseux(&constant));
    let residual_bound = match residual.valuation() {
        Valuation::AtLeast(bound) => bound,
        Valuation::Known(v) => {
            return Err(Error::OffsetMismatch(format!(
                "fit residual has a nonzero term at q^{v}"
            )))
        }
    };
    Ok(FitResult {
        factor_a: fa,
        factor_b: fb,
        constant,
        residual_bound,
    })
}

/// Square root of -1/xi as (positive-principal unit, imaginary flag);
/// NotASquare when |principal| is not a rational square.
pub fn sqrt_neg_inverse(xi: &PuiseuxSeries) -> Result<(PuiseuxSeries, bool)> {
    let neg_inv = xi.invert()?.neg();
    let lead = neg_inv.principal_coefficient()?;
    if lead.is_positive() {
        Ok((neg_inv.sqrt()?, false))
    } else {
        Ok((neg_inv.neg().sqrt()?, true))
    }
}

/// The pole divisor P = P_y u q P_y with exponents in the fundamental
/// window [-1/2, 15/2): P_y = { +-xibar q^(-a/2+4n), +-etabar q^(-b/2+4n) }.
pub fn pole_divisor(factor_a: &ThetaFactor, factor_b: &ThetaFactor) -> Result<Vec<End>> {
    let mut out: Vec<End> = Vec::new();
    for (f, name) in [(factor_a, "xibar*"), (factor_b, "etabar*")] {
        let (unit, imaginary) = sqrt_neg_inverse(&f.xi)?;
        let base_exp = -f.offset / rat(2, 1);
        for qshift in [rat(0, 1), rat(1, 1)] {
            let e = rat_mod_into(base_exp + qshift, rat(4, 1), rat(-1, 2));
            for translate in [rat(0, 1), rat(4, 1)] {
                let exponent = e + translate;
                let phases = if imaginary {
                    [Phase::I, Phase::MinusI]
                } else {
                    [Phase::One, Phase::MinusOne]
                };
                for phase in phases {
                    let end = End::new(phase, unit.clone(), exponent, name)?;
                    if !out.iter().any(|x| x.same_point(&end)) {
                        out.push(end);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Map the end set through t -> t^2 (the quotient by -1), build the tree
/// on the squared ends, and verify the metric statement: attachment
/// heights double while the branch separations obey
/// v(z^2 - z'^2) = v(z - z') + v(z + z').
pub fn square_quotient(ends: &[End]) -> Result<(Vec<End>, BtTree)> {
    for e in ends {
        let neg = e.negate();
        if !ends.iter().any(|x| x.same_point(&neg)) {
            return Err(Error::IncompleteFundamentalDomain(format!(
                "end set not symmetric under negation: missing -({})",
                e.label
            )));
        }
    }
    let mut squared: Vec<End> = Vec::new();
    for e in ends {
        let w = e.square();
        if !squared.iter().any(|x| x.same_point(&w)) {
            squared.push(w);
        }
    }
    let tree = build_tree(&squared)?;
    for i in 0..ends.len() {
        for j in (i + 1)..ends.len() {
            let (a, b) = (&ends[i], &ends[j]);
            if a.exponent != b.exponent {
                continue;
            }
            let wa = a.square();
            let wb = b.square();
            if wa.same_point(&wb) {
                continue; // the identified pair z, -z
            }
            let lhs = end_diff_valuation(&wa, &wb)?;
            let d1 = end_diff_valuation(a, b)?;
            let d2 = end_diff_valuation(a, &b.negate())?;
            if lhs != d1 + d2 {
                return Err(Error::InsufficientPrecision(format!(
                    "square quotient metric check failed for {} and {}: {lhs} vs {d1} + {d2}",
                    a.label, b.label
                )));
            }
        }
    }
    Ok((squared, tree))
}

/// Attach the ultrametric clustering of same-height ends above a node.
fn attach_cluster(graph: &mut MetricGraph, group: &[End], level: Rat, node: usize) -> Result<()> {
    if group.len() == 1 {
        graph.ends.push((node, group[0].label.clone()));
        return Ok(());
    }
    let mut partition: Vec<Vec<usize>> = Vec::new();
    'outer: for m in 0..group.len() {
        for g in partition.iter_mut() {
            if end_diff_valuation(&group[g[0]], &group[m])? > level {
                g.push(m);
                continue 'outer;
            }
        }
        partition.push(vec![m]);
    }
    if partition.len() == 1 {
        let mut next: Option<Rat> = None;
        for a in 0..group.len() {
            for b in (a + 1)..group.len() {
                let s = end_diff_valuation(&group[a], &group[b])?;
                next = Some(match next {
                    None => s,
                    Some(x) if s < x => s,
                    Some(x) => x,
                });
            }
        }
        let next = next.unwrap();
        let upper = graph.add_node(None);
        graph.edges.push((node, upper, next - level));
        let members: Vec<End> = group.to_vec();
        attach_cluster(graph, &members, next, upper)
    } else {
        for g in partition {
            let members: Vec<End> = g.iter().map(|&i| group[i].clone()).collect();
            attach_cluster(graph, &members, level, node)?;
        }
        Ok(())
    }
}

/// Wrap the central road modulo q^8. The squared ends must cover two
/// full periods (the window [-1, 15)); each class keeps one
/// representative in [-1, 7), the road becomes a cycle of circumference
/// 8, and the attached trees are carried along. The result has first
/// Betti number 1.
pub fn mod_q8_quotient(squared_ends: &[End]) -> Result<MetricGraph> {
    let period = rat(8, 1);
    let lo = rat(-1, 1);
    let mut reps: Vec<End> = Vec::new();
    let mut matched: Vec<bool> = Vec::new();
    for e in squared_ends {
        if rat_mod_into(e.exponent, period, lo) == e.exponent {
            reps.push(e.clone());
            matched.push(false);
        }
    }
    if reps.is_empty() {
        return Err(Error::IncompleteFundamentalDomain(
            "no end exponents in [-1, 7)".into(),
        ));
    }
    for e in squared_ends {
        let class_exp = rat_mod_into(e.exponent, period, lo);
        let found = reps
            .iter()
            .position(|r| r.exponent == class_exp && r.unit == e.unit && r.phase == e.phase);
        match found {
            Some(k) => {
                if e.exponent != class_exp {
                    matched[k] = true;
                }
            }
            None => {
                return Err(Error::IncompleteFundamentalDomain(format!(
                    "end {} has no class representative in [-1, 7)",
                    e.label
                )))
            }
        }
    }
    if !matched.iter().all(|m| *m) {
        return Err(Error::IncompleteFundamentalDomain(
            "the end set does not span a full q^8 period".into(),
        ));
    }
    let mut graph = MetricGraph::default();
    let mut by_height: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
    for (i, e) in reps.iter().enumerate() {
        by_height.entry(e.valuation()).or_default().push(i);
    }
    let heights: Vec<Rat> = by_height.keys().copied().collect();
    let road: Vec<usize> = heights.iter().map(|h| graph.add_node(Some(*h))).collect();
    if road.len() == 1 {
        graph.edges.push((road[0], road[0], period));
    } else {
        for k in 1..road.len() {
            graph
                .edges
                .push((road[k - 1], road[k], heights[k] - heights[k - 1]));
        }
        let wrap = heights[0] + period - heights[heights.len() - 1];
        graph.edges.push((road[road.len() - 1], road[0], wrap));
    }
    for (k, h) in heights.iter().enumerate() {
        let group: Vec<End> = by_height[h].iter().map(|&i| reps[i].clone()).collect();
        attach_cluster(&mut graph, &group, *h, road[k])?;
    }
    Ok(graph)
}

/// Convert a tropical curve into a metric graph in the lattice metric.
pub fn curve_to_metric_graph(curve: &TropicalCurve) -> MetricGraph {
    let mut g = MetricGraph::default();
    for _ in &curve.vertices {
        g.add_node(None);
    }
    for e in &curve.edges {
        g.edges.push((e.from, e.to, e.lattice_length));
    }
    for r in &curve.rays {
        g.ends
            .push((r.at, format!("ray({},{})x{}", r.dir.0, r.dir.1, r.weight)));
    }
    g
}

/// Canonical form of a connected Betti-1 metric graph with hanging trees
/// and marked infinite ends, up to isometry: the cycle length plus the
/// cyclically minimal sequence of (hanging-tree shape, gap) descriptors
/// over both orientations.
pub fn canonical_cycle_form(g: &MetricGraph) -> Result<String> {
    if g.betti() != 1 {
        return Err(Error::NoCycle);
    }
    let n = g.node_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ei, (a, b, _)) in g.edges.iter().enumerate() {
        adj[*a].push((ei, *b));
        adj[*b].push((ei, *a));
    }
    // strip leaves to expose the cycle core (marked ends do not protect
    // a node from stripping; they belong to the hanging trees)
    let mut alive = vec![true; g.edges.len()];
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = stack.pop() {
        for &(ei, w) in &adj[v] {
            if alive[ei] && degree[v] == 1 {
                alive[ei] = false;
                degree[v] -= 1;
                degree[w] -= 1;
                if degree[w] == 1 {
                    stack.push(w);
                }
            }
        }
    }
    let start = (0..n)
        .find(|&v| adj[v].iter().any(|&(ei, _)| alive[ei]))
        .ok_or(Error::NoCycle)?;
    // walk the cycle (self-loops allowed)
    let mut cycle_nodes = vec![start];
    let mut cycle_edges: Vec<usize> = Vec::new();
    let mut here = start;
    let mut prev_edge = usize::MAX;
    loop {
        let next = adj[here]
            .iter()
            .copied()
            .find(|&(ei, _)| alive[ei] && ei != prev_edge)
            .or_else(|| {
                // a self-loop is traversed once
                adj[here]
                    .iter()
                    .copied()
                    .find(|&(ei, w)| alive[ei] && w == here)
            })
            .ok_or(Error::NoCycle)?;
        let (ei, w) = next;
        cycle_edges.push(ei);
        if w == start {
            break;
        }
        cycle_nodes.push(w);
        here = w;
        prev_edge = ei;
    }
    fn tree_shape(
        g: &MetricGraph,
        adj: &[Vec<(usize, usize)>],
        alive_cycle: &[bool],
        node: usize,
        parent_edge: usize,
    ) -> String {
        let mut items: Vec<String> = Vec::new();
        for &(ei, w) in &adj[node] {
            if ei == parent_edge || alive_cycle[ei] {
                continue;
            }
            let sub = tree_shape(g, adj, alive_cycle, w, ei);
            items.push(format!("({}:{})", g.edges[ei].2, sub));
        }
        for _ in g.ends.iter().filter(|(at, _)| *at == node) {
            items.push("*".into());
        }
        items.sort();
        items.concat()
    }
    let descriptors: Vec<(String, Rat)> = (0..cycle_nodes.len())
        .map(|k| {
            let v = cycle_nodes[k];
            let gap_after = g.edges[cycle_edges[k]].2;
            let shape = tree_shape(g, &adj, &alive, v, usize::MAX);
            (shape, gap_after)
        })
        .collect();
    let render = |seq: &[(String, Rat)]| -> String {
        let total: Rat = seq.iter().map(|(_, gp)| *gp).sum();
        let parts: Vec<String> = seq.iter().map(|(s, gp)| format!("[{s}]{gp};")).collect();
        format!("cycle({total}){}", parts.concat())
    };
    let m = descriptors.len();
    let mut best: Option<String> = None;
    for rot in 0..m {
        let fwd: Vec<(String, Rat)> = (0..m).map(|k| descriptors[(rot + k) % m].clone()).collect();
        let cand = render(&fwd);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
        // reversed orientation: node order reversed; the gap after a node
        // is the gap that previously preceded it
        let rev: Vec<(String, Rat)> = (0..m)
            .map(|k| {
                let node_idx = (rot + m - k) % m;
                let gap_idx = (node_idx + m - 1) % m;
                (descriptors[node_idx].0.clone(), descriptors[gap_idx].1)
            })
            .collect();
        let cand = render(&rev);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    Ok(best.unwrap())
}

/// Isometry comparison between a quotient metric graph and the tropical
/// curve. Refused unless the curve is tropically smooth.
#[derive(Clone, Debug)]
pub struct IsometryReport {
    pub isometric: bool,
    pub canonical_graph: String,
    pub canonical_curve: String,
}

pub fn compare_isometry(graph: &MetricGraph, cls: &Classification) -> Result<IsometryReport> {
    if !cls.report.smooth_by_subdivision || !cls.report.smooth_by_table1 {
        return Err(Error::NotSmooth);
    }
    let curve_graph = curve_to_metric_graph(&cls.curve);
    let canonical_graph = canonical_cycle_form(graph)?;
    let canonical_curve = canonical_cycle_form(&curve_graph)?;
    Ok(IsometryReport {
        isometric: canonical_graph == canonical_curve,
        canonical_graph,
        canonical_curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;
    use crate::rational::coeff;
    use crate::tropcurve::classify;

    fn h(n: i64) -> Rat {
        rat(n, 1)
    }

    fn fam(r: &str, s: &str) -> FamilyParams {
        FamilyParams::new(
            expr::parse_series(r, h(24)).unwrap(),
            expr::parse_series(s, h(24)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_divisor_shapes() {
        let zy = zero_divisor_y(h(10));
        assert_eq!(zy.len(), 4);
        // image under the projection modulo +-q^4 has cardinality 2
        let mut classes: Vec<Rat> = zy
            .iter()
            .map(|e| rat_mod_into(e.exponent, rat(4, 1), rat(0, 1)))
            .collect();
        classes.sort();
        classes.dedup();
        assert_eq!(classes.len(), 2);
        let z = zero_divisor_window(h(10));
        assert_eq!(z.len(), 12); // 3 classes x 2 translates x 2 signs
        assert!(z.iter().all(|e| e.exponent >= rat(-1, 2) && e.exponent < rat(15, 2)));
    }

    #[test]
    fn square_case_log_derivative_expansion() {
        // d/dt log Delta = (-2t^4+2)/t^3 q^3 + (-4t^4+4)/t^3 q^4 + ...
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(16));
        let ld = delta.log_derivative_t().unwrap();
        let q3 = ld.coeff_at(rat(3, 1)).unwrap();
        assert_eq!(q3.coeff(1), coeff_int(-2));
        assert_eq!(q3.coeff(-3), coeff_int(2));
        let q6 = ld.coeff_at(rat(6, 1)).unwrap();
        assert_eq!(q6.coeff(3), coeff_int(-2));
        assert_eq!(q6.coeff(1), coeff_int(-16));
        assert_eq!(q6.coeff(-3), coeff_int(16));
        assert_eq!(q6.coeff(-5), coeff_int(2));
    }

    #[test]
    fn heptagon_log_derivative_lowest_term() {
        // lowest term (2t^4 - 2)/t^3 at q^(7/2)
        let p = fam("1+q^(3/2)", "-1+q^(3/2)");
        let delta = delta_series(&p, h(12));
        let ld = delta.log_derivative_t().unwrap();
        assert_eq!(ld.valuation(), Valuation::Known(rat(7, 2)));
        let lead = ld.coeff_at(rat(7, 2)).unwrap();
        assert_eq!(lead.coeff(1), coeff_int(2));
        assert_eq!(lead.coeff(-3), coeff_int(-2));
        assert_eq!(lead.terms().count(), 2);
    }

    #[test]
    fn square_case_fit_reference_values() {
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(16));
        let fit = fit_pole_factors(&delta, None, 8).unwrap();
        assert_eq!(fit.factor_a.offset, rat(3, 1));
        assert_eq!(fit.factor_b.offset, rat(5, 1));
        let xi_expect: [i64; 8] = [-1, -2, -3, -10, -15, -38, -51, -162];
        let eta_expect: [i64; 8] = [-1, 2, -1, 6, -14, 28, -84, 232];
        for k in 0..8 {
            assert_eq!(
                fit.factor_a.xi.coeff_at(rat(k, 1)).unwrap(),
                coeff_int(xi_expect[k as usize]),
                "xi coefficient q^{k}"
            );
            assert_eq!(
                fit.factor_b.xi.coeff_at(rat(k, 1)).unwrap(),
                coeff_int(eta_expect[k as usize]),
                "eta coefficient q^{k}"
            );
        }
        assert!(fit.residual_bound >= rat(8, 1));
        // eta = 1/xi (the t <-> 1/t symmetry of Delta)
        let prod = (&fit.factor_a.xi * &fit.factor_b.xi)
            .sub(&PuiseuxSeries::one(h(8)));
        assert!(prod.is_zero_truncation());
    }

    #[test]
    fn square_case_pole_units() {
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(16));
        let fit = fit_pole_factors(&delta, None, 8).unwrap();
        let (xibar, im_a) = sqrt_neg_inverse(&fit.factor_a.xi).unwrap();
        let (etabar, im_b) = sqrt_neg_inverse(&fit.factor_b.xi).unwrap();
        assert!(!im_a && !im_b);
        let xibar_expect: [(i64, i64); 8] =
            [(1, 1), (-1, 1), (0, 1), (-3, 1), (4, 1), (-10, 1), (55, 2), (-153, 2)];
        let etabar_expect: [(i64, i64); 8] =
            [(1, 1), (1, 1), (1, 1), (4, 1), (3, 1), (12, 1), (5, 2), (109, 2)];
        for k in 0..8 {
            assert_eq!(
                xibar.coeff_at(rat(k, 1)).unwrap(),
                coeff(xibar_expect[k as usize].0, xibar_expect[k as usize].1),
                "xibar coefficient q^{k}"
            );
            assert_eq!(
                etabar.coeff_at(rat(k, 1)).unwrap(),
                coeff(etabar_expect[k as usize].0, etabar_expect[k as usize].1),
                "etabar coefficient q^{k}"
            );
        }
    }

    #[test]
    fn heptagon_fit_values() {
        // the triple-verified corrected values: xi = eta^-1 with
        // eta = 1 + q + 2q^2 + 5q^3 + 14q^4 + 42q^5 + 132q^6 + 428q^7
        let p = fam("1+q^(3/2)", "-1+q^(3/2)");
        let delta = delta_series(&p, h(20));
        let fit = fit_pole_factors(&delta, None, 8).unwrap();
        assert_eq!(fit.factor_a.offset, rat(7, 2));
        assert_eq!(fit.factor_b.offset, rat(9, 2));
        let xi_expect: [i64; 8] = [1, -1, -1, -2, -5, -14, -42, -131];
        let eta_expect: [i64; 8] = [1, 1, 2, 5, 14, 42, 132, 428];
        for k in 0..8 {
            assert_eq!(
                fit.factor_a.xi.coeff_at(rat(k, 1)).unwrap(),
                coeff_int(xi_expect[k as usize]),
                "xi coefficient q^{k}"
            );
            assert_eq!(
                fit.factor_b.xi.coeff_at(rat(k, 1)).unwrap(),
                coeff_int(eta_expect[k as usize]),
                "eta coefficient q^{k}"
            );
        }
        // the pole units are imaginary here
        let (_, im_a) = sqrt_neg_inverse(&fit.factor_a.xi).unwrap();
        let (_, im_b) = sqrt_neg_inverse(&fit.factor_b.xi).unwrap();
        assert!(im_a && im_b);
    }

    #[test]
    fn cross_ratio_quoted_lengths() {
        // length([0, xibar q^(-1/2)] ^ [etabar q^(5/2), inf]) = 3 and
        // length([xibar q^(-1/2), xibar q^(5/2)] ^ [etabar q^(5/2), inf]) = 4
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(16));
        let fit = fit_pole_factors(&delta, None, 8).unwrap();
        let (xibar, _) = sqrt_neg_inverse(&fit.factor_a.xi).unwrap();
        let (etabar, _) = sqrt_neg_inverse(&fit.factor_b.xi).unwrap();
        let xe = |e: Rat| ProjPoint::Finite(End::new(Phase::One, xibar.clone(), e, "xibar*").unwrap());
        let ee = |e: Rat| ProjPoint::Finite(End::new(Phase::One, etabar.clone(), e, "etabar*").unwrap());
        let l1 = cross_ratio_length(&ProjPoint::Zero, &xe(rat(-1, 2)), &ee(rat(5, 2)), &ProjPoint::Infinity)
            .unwrap();
        assert_eq!(l1, rat(3, 1));
        let l2 = cross_ratio_length(&xe(rat(-1, 2)), &xe(rat(5, 2)), &ee(rat(5, 2)), &ProjPoint::Infinity)
            .unwrap();
        assert_eq!(l2, rat(4, 1));
        // degenerate: repeated point rejected
        assert!(cross_ratio_length(&ProjPoint::Zero, &xe(rat(-1, 2)), &ProjPoint::Zero, &ProjPoint::Infinity)
            .is_err());
    }

    #[test]
    fn square_case_tree_and_quotients() {
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(16));
        let fit = fit_pole_factors(&delta, None, 8).unwrap();
        let mut ends = zero_divisor_window(h(16));
        ends.extend(pole_divisor(&fit.factor_a, &fit.factor_b).unwrap());
        let tree = build_tree(&ends).unwrap();
        assert_eq!(tree.graph.betti(), 0);
        // branch pair {q^(7/2), xibar q^(7/2)}: v(1 - xibar) = 1 gives a
        // shared branch of length 1
        let q72 = ends
            .iter()
            .position(|e| e.exponent == rat(7, 2) && e.phase == Phase::One && e.name.is_empty())
            .unwrap();
        let x72 = ends
            .iter()
            .position(|e| e.exponent == rat(7, 2) && e.phase == Phase::One && e.name == "xibar*")
            .unwrap();
        let shared = tree
            .graph
            .shared_path_length(
                tree.end_index[q72],
                tree.zero_end,
                tree.end_index[x72],
                tree.zero_end,
            )
            .unwrap();
        assert!(shared >= rat(1, 1));
        let sep = end_diff_valuation(&ends[q72], &ends[x72]).unwrap();
        assert_eq!(sep - rat(7, 2), rat(1, 1));
        // 4-point consistency on a healthy sample of subsets
        let checked = verify_cross_ratio_consistency(&tree, &ends, 400).unwrap();
        assert!(checked >= 400);
        // quotients
        let (squared, _gbar) = square_quotient(&ends).unwrap();
        // v(1 - xibar^2) = v(1-xibar) + v(1+xibar) = 1
        let q7 = squared
            .iter()
            .find(|e| e.exponent == rat(7, 1) && e.name.is_empty())
            .unwrap();
        let x7 = squared
            .iter()
            .find(|e| e.exponent == rat(7, 1) && !e.name.is_empty())
            .unwrap();
        assert_eq!(end_diff_valuation(q7, x7).unwrap(), rat(8, 1));
        let quotient = mod_q8_quotient(&squared).unwrap();
        assert_eq!(quotient.betti(), 1);
        // 7 infinite ends per period
        assert_eq!(quotient.ends.len(), 7);
        // isometric to the tropical curve
        let cls = classify(&p).unwrap();
        let rep = compare_isometry(&quotient, &cls).unwrap();
        assert!(
            rep.isometric,
            "graph {} vs curve {}",
            rep.canonical_graph, rep.canonical_curve
        );
    }

    #[test]
    fn heptagon_tree_and_isometry() {
        let p = fam("1+q^(3/2)", "-1+q^(3/2)");
        let delta = delta_series(&p, h(20));
        let fit = fit_pole_factors(&delta, None, 8).unwrap();
        let mut ends = zero_divisor_window(h(16));
        ends.extend(pole_divisor(&fit.factor_a, &fit.factor_b).unwrap());
        let tree = build_tree(&ends).unwrap();
        verify_cross_ratio_consistency(&tree, &ends, 300).unwrap();
        // no internal edges off the central road in this case: every tree
        // edge joins two road nodes
        assert!(tree
            .graph
            .edges
            .iter()
            .all(|(a, b, _)| tree.graph.node_heights[*a].is_some()
                && tree.graph.node_heights[*b].is_some()));
        let (squared, _) = square_quotient(&ends).unwrap();
        let quotient = mod_q8_quotient(&squared).unwrap();
        assert_eq!(quotient.betti(), 1);
        assert_eq!(quotient.ends.len(), 7);
        // zero heights {-1, 1, 3} and pole heights {7/2, 9/2, 11/2, 13/2}
        let mut heights: Vec<Rat> = quotient
            .node_heights
            .iter()
            .flatten()
            .copied()
            .collect();
        heights.sort();
        assert_eq!(
            heights,
            vec![
                rat(-1, 1),
                rat(1, 1),
                rat(3, 1),
                rat(7, 2),
                rat(9, 2),
                rat(11, 2),
                rat(13, 2)
            ]
        );
        let cls = classify(&p).unwrap();
        let rep = compare_isometry(&quotient, &cls).unwrap();
        assert!(
            rep.isometric,
            "graph {} vs curve {}",
            rep.canonical_graph, rep.canonical_curve
        );
    }

    #[test]
    fn quarter_grid_heptagon_isometry() {
        // a third smooth instance away from the worked examples: the
        // offsets land on the quarter-integer grid and the fitted unit
        // on the half-integer grid
        let p = fam("1+q^(5/4)", "-1+q^(5/4)");
        let delta = delta_series(&p, h(20));
        let fit = fit_pole_factors(&delta, None, 8).unwrap();
        assert_eq!(fit.factor_a.offset, rat(13, 4));
        assert_eq!(fit.factor_b.offset, rat(19, 4));
        let mut ends = zero_divisor_window(h(16));
        ends.extend(pole_divisor(&fit.factor_a, &fit.factor_b).unwrap());
        let (squared, _) = square_quotient(&ends).unwrap();
        let quotient = mod_q8_quotient(&squared).unwrap();
        let cls = classify(&p).unwrap();
        let rep = compare_isometry(&quotient, &cls).unwrap();
        assert!(rep.isometric);
    }

    #[test]
    fn non_smooth_comparison_refused() {
        let p = fam("1+q^2", "-1+q^2");
        let cls = classify(&p).unwrap();
        let g = MetricGraph::default();
        assert!(matches!(
            compare_isometry(&g, &cls),
            Err(Error::NotSmooth)
        ));
    }

    #[test]
    fn fit_rejects_insufficient_order() {
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(6));
        assert!(matches!(
            fit_pole_factors(&delta, None, 8),
            Err(Error::UnderdeterminedFit(_))
        ));
    }

    #[test]
    fn fit_rejects_wrong_offsets() {
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(16));
        assert!(matches!(
            fit_pole_factors(&delta, Some((rat(1, 1), rat(7, 1))), 8),
            Err(Error::OffsetMismatch(_))
        ));
    }

    #[test]
    fn mod_q8_requires_a_full_period() {
        // ends in [-1/2, 7/2) only: squared exponents cover [-1, 7) but
        // not their q^8 translates
        let horizon = h(10);
        let mut ends = Vec::new();
        for e in [rat(-1, 2), rat(1, 2), rat(3, 2)] {
            for sign in [Phase::One, Phase::MinusOne] {
                ends.push(End::new(sign, PuiseuxSeries::one(horizon), e, "").unwrap());
            }
        }
        let (squared, _) = square_quotient(&ends).unwrap();
        assert!(matches!(
            mod_q8_quotient(&squared),
            Err(Error::IncompleteFundamentalDomain(_))
        ));
    }

    #[test]
    fn fit_accepts_supplied_offsets_up_to_period() {
        let p = fam("1-3q", "-1+q");
        let delta = delta_series(&p, h(16));
        // consistent offsets, including non-normalized representatives
        for (a, b) in [(rat(3, 1), rat(5, 1)), (rat(-5, 1), rat(13, 1))] {
            let fit = fit_pole_factors(&delta, Some((a, b)), 8).unwrap();
            assert_eq!(fit.factor_a.offset, rat(3, 1));
            assert_eq!(fit.factor_b.offset, rat(5, 1));
        }
    }
}
