//! Deterministic SVG emission.
//!
//! All geometry stays rational until the final coordinate formatting,
//! which renders exactly 6 decimal digits with round-half-even. The
//! mod-q^8 metric graphs are laid out on a square of perimeter 8 (the
//! cycle circumference), keeping the layout itself exact.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::Value;

use crate::bttree::MetricGraph;
use crate::error::{Error, Result};
use crate::rational::{rat, rat_mod_into, Rat};
use crate::report::{point_from_json, rat_from_json};
use crate::thetaparam::LocusReconstruction;

/// A rational point of the plane.
pub type Point2 = (Rat, Rat);
use crate::tropcurve::{Classification, TropicalCurve};

/// Fixed-point decimal with 6 digits, round-half-even; the only place
/// rationals become decimals.
pub fn fmt6(r: Rat) -> String {
    let num = BigInt::from(*r.numer());
    let den = BigInt::from(*r.denom());
    let scale = BigInt::from(1_000_000i64);
    let scaled_num = &num * &scale;
    let q = &scaled_num / &den;
    let rem = &scaled_num % &den;
    let mut q = q;
    if !rem.is_zero() {
        let twice = rem.abs() * BigInt::from(2);
        let den_abs = den.abs();
        let round_up = match twice.cmp(&den_abs) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => (&q % 2i32).abs() == BigInt::from(1), // to even
        };
        if round_up {
            if num.is_negative() {
                q -= 1;
            } else {
                q += 1;
            }
        }
    }
    let negative = q.is_negative();
    let q = q.abs();
    let million = BigInt::from(1_000_000i64);
    let whole = &q / &million;
    let frac = &q % &million;
    format!(
        "{}{}.{:06}",
        if negative { "-" } else { "" },
        whole,
        frac
    )
}

pub struct Canvas {
    body: String,
    min_x: Rat,
    min_y: Rat,
    max_x: Rat,
    max_y: Rat,
}

impl Canvas {
    fn new() -> Self {
        Canvas {
            body: String::new(),
            min_x: rat(0, 1),
            min_y: rat(0, 1),
            max_x: rat(1, 1),
            max_y: rat(1, 1),
        }
    }

    fn grow(&mut self, p: (Rat, Rat)) {
        self.min_x = self.min_x.min(p.0);
        self.min_y = self.min_y.min(p.1);
        self.max_x = self.max_x.max(p.0);
        self.max_y = self.max_y.max(p.1);
    }

    fn line(&mut self, a: (Rat, Rat), b: (Rat, Rat), class: &str) {
        self.grow(a);
        self.grow(b);
        self.body.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" class=\"{class}\"/>\n",
            fmt6(a.0),
            fmt6(-a.1),
            fmt6(b.0),
            fmt6(-b.1)
        ));
    }

    fn circle(&mut self, c: (Rat, Rat), r: &str, class: &str) {
        self.grow(c);
        self.body.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{r}\" class=\"{class}\"/>\n",
            fmt6(c.0),
            fmt6(-c.1)
        ));
    }

    fn text(&mut self, c: (Rat, Rat), s: &str) {
        self.grow(c);
        self.body.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" class=\"lbl\">{}</text>\n",
            fmt6(c.0),
            fmt6(-c.1),
            xml_escape(s)
        ));
    }

    fn finish(self, title: &str) -> String {
        let pad = rat(1, 1);
        let min_x = self.min_x - pad;
        let max_x = self.max_x + pad;
        let min_y = self.min_y - pad;
        let max_y = self.max_y + pad;
        let w = max_x - min_x;
        let h = max_y - min_y;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"640\" height=\"640\">\n<title>{}</title>\n<style>\n.edge {{ stroke: #1f3a5f; stroke-width: 0.06; }}\n.ray {{ stroke: #3a7d44; stroke-width: 0.04; stroke-dasharray: 0.15 0.1; }}\n.cycle {{ stroke: #a33; stroke-width: 0.08; fill: none; }}\n.cell {{ stroke: #888; stroke-width: 0.02; fill: none; }}\n.sample {{ fill: #a33; }}\n.node {{ fill: #1f3a5f; }}\n.lbl {{ font-size: 0.28px; font-family: monospace; fill: #333; }}\nline, circle {{ vector-effect: non-scaling-stroke; }}\n</style>\n{}</svg>\n",
            fmt6(min_x),
            fmt6(-max_y),
            fmt6(w),
            fmt6(h),
            xml_escape(title),
            self.body
        )
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tropical curve with rays, plus the dual subdivision inset beside it.
pub fn svg_curve(cls: &Classification) -> String {
    let mut c = Canvas::new();
    draw_curve(&mut c, &cls.curve, (rat(0, 1), rat(0, 1)));
    // subdivision inset, shifted to the right of the curve bbox
    let shift = c.max_x + rat(3, 1);
    for cell in &cls.subdivision.cells {
        let hull = &cell.hull;
        for k in 0..hull.len() {
            let a = hull[k];
            let b = hull[(k + 1) % hull.len()];
            c.line(
                (rat(a.0, 1) + shift, rat(a.1, 1)),
                (rat(b.0, 1) + shift, rat(b.1, 1)),
                "cell",
            );
        }
    }
    c.text(
        (shift, rat(-1, 2)),
        &format!(
            "{} cells, smooth={}",
            cls.subdivision.cells.len(),
            cls.report.smooth_by_subdivision
        ),
    );
    c.finish(&format!(
        "tropical curve: {} cycle, delta = {}",
        cls.report.polygon_kind.name(),
        cls.delta
    ))
}

fn draw_curve(c: &mut Canvas, curve: &TropicalCurve, offset: (Rat, Rat)) {
    let ray_reach = rat(2, 1);
    let off = |p: (Rat, Rat)| (p.0 + offset.0, p.1 + offset.1);
    for e in &curve.edges {
        c.line(off(curve.vertices[e.from]), off(curve.vertices[e.to]), "edge");
    }
    for r in &curve.rays {
        let a = curve.vertices[r.at];
        let b = (
            a.0 + rat(r.dir.0, 1) * ray_reach,
            a.1 + rat(r.dir.1, 1) * ray_reach,
        );
        c.line(off(a), off(b), "ray");
    }
    for v in &curve.vertices {
        c.circle(off(*v), "0.08", "node");
    }
}

/// Sampled cycle locus with the exact reconstruction drawn underneath.
pub fn svg_cycle(
    samples: &[(Rat, Rat)],
    locus: &LocusReconstruction,
    title: &str,
    offset: (Rat, Rat),
    c: &mut Canvas,
) {
    let off = |p: (Rat, Rat)| (p.0 + offset.0, p.1 + offset.1);
    match locus {
        LocusReconstruction::Point(p) => c.circle(off(*p), "0.12", "cycle"),
        LocusReconstruction::Polygon { corners, .. } => {
            for k in 0..corners.len() {
                c.line(
                    off(corners[k]),
                    off(corners[(k + 1) % corners.len()]),
                    "cycle",
                );
            }
        }
        LocusReconstruction::Segments { segments, .. } => {
            for s in segments {
                c.line(off(s.a), off(s.b), "cycle");
            }
        }
    }
    for p in samples {
        c.circle(off(*p), "0.05", "sample");
    }
    let anchor = (offset.0, offset.1 - rat(5, 2));
    c.text(anchor, title);
}

pub fn svg_cycle_figure(samples: &[(Rat, Rat)], locus: &LocusReconstruction, title: &str) -> String {
    let mut c = Canvas::new();
    svg_cycle(samples, locus, title, (rat(0, 1), rat(0, 1)), &mut c);
    c.finish(title)
}

/// Lay the mod-q^8 graph out on a square of perimeter 8: arc position
/// p in [0, 8) maps exactly onto the square boundary, and hanging trees
/// grow along the outward normal.
pub fn svg_quotient_graph(g: &MetricGraph, title: &str) -> String {
    let mut c = Canvas::new();
    // position on the square of side 2 centred at the origin
    let on_square = |p: Rat| -> (Point2, Point2) {
        let p = rat_mod_into(p, rat(8, 1), rat(0, 1));
        let side = (p / rat(2, 1)).floor().to_integer();
        let t = p - rat(2 * side, 1);
        match side {
            0 => (((t - rat(1, 1)), rat(1, 1)), (rat(0, 1), rat(1, 1))),
            1 => ((rat(1, 1), rat(1, 1) - t), (rat(1, 1), rat(0, 1))),
            2 => ((rat(1, 1) - t, rat(-1, 1)), (rat(0, 1), rat(-1, 1))),
            _ => ((rat(-1, 1), t - rat(1, 1)), (rat(-1, 1), rat(0, 1))),
        }
    };
    // cycle outline
    let corners = [
        (rat(-1, 1), rat(1, 1)),
        (rat(1, 1), rat(1, 1)),
        (rat(1, 1), rat(-1, 1)),
        (rat(-1, 1), rat(-1, 1)),
    ];
    for k in 0..4 {
        c.line(corners[k], corners[(k + 1) % 4], "cycle");
    }
    // nodes with heights sit on the square; hanging trees grow outward
    let mut positions: Vec<Option<(Point2, Point2)>> = vec![None; g.node_count()];
    let base = g
        .node_heights
        .iter()
        .flatten()
        .copied()
        .fold(None::<Rat>, |m, h| Some(m.map_or(h, |x| x.min(h))))
        .unwrap_or(rat(0, 1));
    for (i, h) in g.node_heights.iter().enumerate() {
        if let Some(h) = h {
            let (p, n) = on_square(*h - base);
            positions[i] = Some((p, n));
            c.circle(p, "0.07", "node");
            c.text((p.0 + n.0 * rat(1, 4), p.1 + n.1 * rat(1, 4)), &format!("{h}"));
        }
    }
    // place branch nodes by walking tree edges outward from the cycle
    let mut changed = true;
    while changed {
        changed = false;
        for (a, b, len) in &g.edges {
            let (known, unknown) = match (positions[*a].is_some(), positions[*b].is_some()) {
                (true, false) => (*a, *b),
                (false, true) => (*b, *a),
                _ => continue,
            };
            let (p, n) = positions[known].unwrap();
            let np = (p.0 + n.0 * *len, p.1 + n.1 * *len);
            c.line(p, np, "edge");
            c.circle(np, "0.05", "node");
            positions[unknown] = Some((np, n));
            changed = true;
        }
    }
    // ends as short outward dashes with labels
    for (at, label) in &g.ends {
        if let Some((p, n)) = positions[*at] {
            let tip = (p.0 + n.0 * rat(3, 4), p.1 + n.1 * rat(3, 4));
            c.line(p, tip, "ray");
            c.text((tip.0 + n.0 * rat(1, 4), tip.1 + n.1 * rat(1, 4)), label);
        }
    }
    c.finish(title)
}

/// Render a recognized report JSON to SVG: classify output, cycle
/// output, bt output, or {"panels": [cycle outputs...]}.
pub fn render_json(v: &Value) -> Result<String> {
    if let Some(panels) = v.get("panels").and_then(Value::as_array) {
        let mut c = Canvas::new();
        let mut dx = rat(0, 1);
        for panel in panels {
            let (samples, locus, title) = cycle_parts(panel)?;
            svg_cycle(&samples, &locus, &title, (dx, rat(0, 1)), &mut c);
            dx += rat(7, 1);
        }
        return Ok(c.finish("cycle sweep"));
    }
    match v.get("command").and_then(Value::as_str) {
        Some("classify") => {
            let curve = curve_from_json(v.get("curve").ok_or_else(|| {
                Error::SchemaMismatch("classify report missing curve".into())
            })?)?;
            let mut c = Canvas::new();
            draw_curve(&mut c, &curve, (rat(0, 1), rat(0, 1)));
            Ok(c.finish("tropical curve"))
        }
        Some("cycle") => {
            let (samples, locus, title) = cycle_parts(v)?;
            Ok(svg_cycle_figure(&samples, &locus, &title))
        }
        Some("bt") => {
            let g = graph_from_json(v.get("quotient").ok_or_else(|| {
                Error::SchemaMismatch("bt report missing quotient".into())
            })?)?;
            Ok(svg_quotient_graph(&g, "mod-q^8 quotient graph"))
        }
        _ => Err(Error::SchemaMismatch(
            "unrecognized report: expected classify, cycle, bt, or panels".into(),
        )),
    }
}

type CycleParts = (Vec<Point2>, LocusReconstruction, String);

fn cycle_parts(v: &Value) -> Result<CycleParts> {
    let samples = v
        .get("samples")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("cycle report missing samples".into()))?
        .iter()
        .map(point_from_json)
        .collect::<Result<Vec<_>>>()?;
    let delta = v
        .get("delta")
        .map(rat_from_json)
        .transpose()?
        .map(|d| format!("delta = {d}"))
        .unwrap_or_default();
    let locus = if let Some(poly) = v.get("reconstructed_polygon").and_then(Value::as_array) {
        let corners = poly
            .iter()
            .map(point_from_json)
            .collect::<Result<Vec<_>>>()?;
        let perim = v
            .get("lattice_perimeter")
            .map(rat_from_json)
            .transpose()?
            .unwrap_or(rat(0, 1));
        LocusReconstruction::Polygon {
            corners,
            lattice_perimeter: perim,
        }
    } else if let Some(segs) = v.get("reconstructed_segments").and_then(Value::as_array) {
        let mut segments = Vec::new();
        let mut total = rat(0, 1);
        for s in segs {
            let a = point_from_json(
                s.get("a")
                    .ok_or_else(|| Error::SchemaMismatch("segment missing a".into()))?,
            )?;
            let b = point_from_json(
                s.get("b")
                    .ok_or_else(|| Error::SchemaMismatch("segment missing b".into()))?,
            )?;
            let len = rat_from_json(
                s.get("lattice_length")
                    .ok_or_else(|| Error::SchemaMismatch("segment missing length".into()))?,
            )?;
            total += len;
            segments.push(crate::thetaparam::Segment {
                a,
                b,
                lattice_length: len,
            });
        }
        LocusReconstruction::Segments {
            segments,
            total_lattice_length: total,
        }
    } else if let Some(p) = v.get("point") {
        LocusReconstruction::Point(point_from_json(p)?)
    } else {
        return Err(Error::SchemaMismatch(
            "cycle report missing reconstruction".into(),
        ));
    };
    Ok((samples, locus, delta))
}

fn curve_from_json(v: &Value) -> Result<TropicalCurve> {
    let vertices = v
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("curve missing vertices".into()))?
        .iter()
        .map(point_from_json)
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    for e in v
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("curve missing edges".into()))?
    {
        let get_usize = |k: &str| -> Result<usize> {
            e.get(k)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::SchemaMismatch(format!("edge missing {k}")))
        };
        let dir = e
            .get("dir")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::SchemaMismatch("edge missing dir".into()))?;
        edges.push(crate::tropcurve::CurveEdge {
            from: get_usize("from")?,
            to: get_usize("to")?,
            weight: e.get("weight").and_then(Value::as_i64).unwrap_or(1),
            dir: (
                dir[0].as_i64().unwrap_or(0),
                dir[1].as_i64().unwrap_or(0),
            ),
            lattice_length: e
                .get("lattice_length")
                .map(rat_from_json)
                .transpose()?
                .unwrap_or(rat(1, 1)),
        });
    }
    let mut rays = Vec::new();
    for r in v
        .get("rays")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("curve missing rays".into()))?
    {
        let dir = r
            .get("dir")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::SchemaMismatch("ray missing dir".into()))?;
        rays.push(crate::tropcurve::CurveRay {
            at: r
                .get("at")
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::SchemaMismatch("ray missing at".into()))?,
            dir: (
                dir[0].as_i64().unwrap_or(0),
                dir[1].as_i64().unwrap_or(0),
            ),
            weight: r.get("weight").and_then(Value::as_i64).unwrap_or(1),
        });
    }
    Ok(TropicalCurve {
        vertices,
        edges,
        rays,
    })
}

fn graph_from_json(v: &Value) -> Result<MetricGraph> {
    let nodes = v
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("graph missing nodes".into()))?;
    let mut g = MetricGraph::default();
    for _ in nodes {
        g.node_heights.push(None);
    }
    if let Some(heights) = v.get("heights").and_then(Value::as_array) {
        for entry in heights {
            let pair = entry
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::SchemaMismatch("height entry must be [id, rat]".into()))?;
            let id = pair[0]
                .as_u64()
                .ok_or_else(|| Error::SchemaMismatch("height id".into()))? as usize;
            if id >= g.node_heights.len() {
                return Err(Error::SchemaMismatch("height id out of range".into()));
            }
            g.node_heights[id] = Some(rat_from_json(&pair[1])?);
        }
    }
    for e in v
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("graph missing edges".into()))?
    {
        let a = e
            .get("a")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::SchemaMismatch("graph edge missing a".into()))? as usize;
        let b = e
            .get("b")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::SchemaMismatch("graph edge missing b".into()))? as usize;
        let len = rat_from_json(
            e.get("len")
                .ok_or_else(|| Error::SchemaMismatch("graph edge missing len".into()))?,
        )?;
        g.edges.push((a, b, len));
    }
    for end in v
        .get("ends")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("graph missing ends".into()))?
    {
        let at = end
            .get("at")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::SchemaMismatch("graph end missing at".into()))? as usize;
        let label = end
            .get("label")
            .and_then(Value::as_str)
            .unwrap_or("")
            .to_string();
        g.ends.push((at, label));
    }
    Ok(g)
}
