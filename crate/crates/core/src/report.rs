//! JSON report emission and parsing.
//!
//! Every numeric value is an exact rational pair [num, den]; decimals
//! never appear in JSON. Objects use sorted keys and series terms are
//! sorted by exponent, so reports are byte-deterministic given the
//! inputs and the configuration.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::bttree::{End, FitResult, IsometryReport, MetricGraph};
use crate::edwards::{EdwardsCoefficients, IdentityReport, TropCoefficientVector};
use crate::error::{Error, Result};
use crate::rational::{rat, Coeff, Rat};
use crate::series::{PuiseuxSeries, Valuation};
use crate::thetaparam::{CycleSampleReport, LocusReconstruction, ShapePrediction};
use crate::tropcurve::{Classification, Subdivision, TropicalCurve};

pub fn rat_pair(r: Rat) -> Value {
    json!([*r.numer(), *r.denom()])
}

fn bigint_value(b: &BigInt) -> Value {
    match i64::try_from(b) {
        Ok(v) => json!(v),
        // beyond machine range: decimal string, still exact and
        // deterministic
        Err(_) => json!(b.to_string()),
    }
}

pub fn coeff_pair(c: &Coeff) -> Value {
    Value::Array(vec![bigint_value(c.numer()), bigint_value(c.denom())])
}

pub fn valuation_json(v: Valuation) -> Value {
    match v {
        Valuation::Known(x) => json!({ "known": rat_pair(x) }),
        Valuation::AtLeast(b) => json!({ "at_least": rat_pair(b) }),
    }
}

/// {ram, horizon, terms: [[num, den, exp_num, exp_den], ...]} sorted by
/// exponent.
pub fn series_json(s: &PuiseuxSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(e, c)| {
            Value::Array(vec![
                bigint_value(c.numer()),
                bigint_value(c.denom()),
                json!(*e.numer()),
                json!(*e.denom()),
            ])
        })
        .collect();
    json!({
        "ram": s.ram(),
        "horizon": rat_pair(s.horizon()),
        "terms": terms,
    })
}

/// Inverse of [`series_json`].
pub fn series_from_json(v: &Value) -> Result<PuiseuxSeries> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::SchemaMismatch("series must be an object".into()))?;
    let horizon = rat_from_json(
        obj.get("horizon")
            .ok_or_else(|| Error::SchemaMismatch("series missing horizon".into()))?,
    )?;
    let terms = obj
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::SchemaMismatch("series missing terms".into()))?;
    let mut pairs: Vec<(Rat, Coeff)> = Vec::new();
    for t in terms {
        let a = t
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::SchemaMismatch("series term must be a 4-array".into()))?;
        let big = |v: &Value| -> Result<BigInt> {
            if let Some(i) = v.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(s) = v.as_str() {
                s.parse()
                    .map_err(|_| Error::SchemaMismatch(format!("bad integer literal {s}")))
            } else {
                Err(Error::SchemaMismatch("expected integer".into()))
            }
        };
        let cn = big(&a[0])?;
        let cd = big(&a[1])?;
        let en = a[2]
            .as_i64()
            .ok_or_else(|| Error::SchemaMismatch("exponent numerator".into()))?;
        let ed = a[3]
            .as_i64()
            .ok_or_else(|| Error::SchemaMismatch("exponent denominator".into()))?;
        pairs.push((rat(en, ed), Coeff::new(cn, cd)));
    }
    Ok(PuiseuxSeries::from_terms(&pairs, horizon))
}

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::SchemaMismatch("rational must be [num, den]".into()))?;
    let n = arr[0]
        .as_i64()
        .ok_or_else(|| Error::SchemaMismatch("rational numerator".into()))?;
    let d = arr[1]
        .as_i64()
        .ok_or_else(|| Error::SchemaMismatch("rational denominator".into()))?;
    if d == 0 {
        return Err(Error::SchemaMismatch("zero denominator".into()));
    }
    Ok(rat(n, d))
}

pub fn point_json(p: (Rat, Rat)) -> Value {
    json!([rat_pair(p.0), rat_pair(p.1)])
}

pub fn point_from_json(v: &Value) -> Result<(Rat, Rat)> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::SchemaMismatch("point must be [x, y]".into()))?;
    Ok((rat_from_json(&arr[0])?, rat_from_json(&arr[1])?))
}

fn u_vector_json(u: &TropCoefficientVector) -> Value {
    json!({
        "u12": valuation_json(u.u12),
        "u34": valuation_json(u.u34),
        "u5": valuation_json(u.u5),
        "u67": valuation_json(u.u67),
        "u8": valuation_json(u.u8),
    })
}

fn prediction_json(p: &ShapePrediction) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), json!(p.kind.name()));
    if let Some(l) = p.cycle_length {
        m.insert("length".into(), rat_pair(l));
    }
    if let Some(l) = p.segment_length {
        m.insert("segment_length".into(), rat_pair(l));
    }
    Value::Object(m)
}

/// {vertices, edges, rays, subdivision} per the curve schema.
pub fn curve_json(curve: &TropicalCurve, sub: &Subdivision) -> Value {
    let vertices: Vec<Value> = curve.vertices.iter().map(|p| point_json(*p)).collect();
    let edges: Vec<Value> = curve
        .edges
        .iter()
        .map(|e| {
            json!({
                "from": e.from,
                "to": e.to,
                "weight": e.weight,
                "dir": [e.dir.0, e.dir.1],
                "lattice_length": rat_pair(e.lattice_length),
            })
        })
        .collect();
    let rays: Vec<Value> = curve
        .rays
        .iter()
        .map(|r| json!({ "at": r.at, "dir": [r.dir.0, r.dir.1], "weight": r.weight }))
        .collect();
    let cells: Vec<Value> = sub
        .cells
        .iter()
        .map(|c| {
            Value::Array(
                c.hull
                    .iter()
                    .map(|(i, j)| json!([i, j]))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    json!({
        "vertices": vertices,
        "edges": edges,
        "rays": rays,
        "subdivision": { "cells": cells },
    })
}

/// Output of the `family` command.
pub fn family_report(
    coeffs: &EdwardsCoefficients,
    u: &TropCoefficientVector,
    delta: std::result::Result<Rat, &Error>,
) -> Value {
    let delta_value = match delta {
        Ok(d) => rat_pair(d),
        Err(e) => json!({ "undefined": e.to_string() }),
    };
    json!({
        "command": "family",
        "d12": series_json(&coeffs.d12),
        "d34": series_json(&coeffs.d34),
        "d5": series_json(&coeffs.d5),
        "d67": series_json(&coeffs.d67),
        "d8": series_json(&coeffs.d8),
        "a_squared": series_json(&coeffs.a_squared),
        "u": u_vector_json(u),
        "delta": delta_value,
    })
}

/// Output of the `classify` command.
pub fn classify_report(cls: &Classification) -> Value {
    let measured = {
        let mut m = Map::new();
        m.insert("kind".into(), json!(cls.report.polygon_kind.name()));
        if let Some(l) = cls.report.lattice_length {
            m.insert("length".into(), rat_pair(l));
        }
        Value::Object(m)
    };
    json!({
        "command": "classify",
        "delta": rat_pair(cls.delta),
        "predicted": prediction_json(&cls.predicted),
        "measured": measured,
        "smooth_by_table1": cls.report.smooth_by_table1,
        "smooth_by_subdivision": cls.report.smooth_by_subdivision,
        "u": u_vector_json(&cls.u),
        "curve": curve_json(&cls.curve, &cls.subdivision),
    })
}

fn locus_json(locus: &LocusReconstruction) -> (Value, Value) {
    match locus {
        LocusReconstruction::Point(p) => (json!("point"), json!({ "point": point_json(*p) })),
        LocusReconstruction::Polygon {
            corners,
            lattice_perimeter,
        } => (
            json!("polygon"),
            json!({
                "reconstructed_polygon": corners.iter().map(|p| point_json(*p)).collect::<Vec<_>>(),
                "lattice_perimeter": rat_pair(*lattice_perimeter),
            }),
        ),
        LocusReconstruction::Segments {
            segments,
            total_lattice_length,
        } => (
            json!("segments"),
            json!({
                "reconstructed_segments": segments
                    .iter()
                    .map(|s| json!({
                        "a": point_json(s.a),
                        "b": point_json(s.b),
                        "lattice_length": rat_pair(s.lattice_length),
                    }))
                    .collect::<Vec<_>>(),
                "total_lattice_length": rat_pair(*total_lattice_length),
            }),
        ),
    }
}

/// Output of the `cycle` command.
pub fn cycle_report(rep: &CycleSampleReport, predicted: &ShapePrediction) -> Value {
    let samples: Vec<Value> = rep.samples.iter().map(|(_, p)| point_json(*p)).collect();
    let us: Vec<Value> = rep.samples.iter().map(|(u, _)| rat_pair(*u)).collect();
    let (locus_kind, locus_detail) = locus_json(&rep.locus);
    let mut m = Map::new();
    m.insert("command".into(), json!("cycle"));
    m.insert("delta".into(), rat_pair(rep.cp.delta));
    m.insert("v_plus".into(), rat_pair(rep.cp.v_plus));
    m.insert("v_minus".into(), rat_pair(rep.cp.v_minus));
    m.insert("predicted".into(), prediction_json(predicted));
    m.insert("step".into(), rat_pair(rep.step));
    m.insert("offset".into(), rat_pair(rep.offset));
    m.insert("offset_adjusted".into(), json!(rep.offset_adjusted));
    m.insert("samples".into(), Value::Array(samples));
    m.insert("sample_parameters".into(), Value::Array(us));
    m.insert(
        "on_curve".into(),
        match rep.on_curve {
            Some(b) => json!(b),
            None => Value::Null,
        },
    );
    m.insert("samples_on_locus".into(), json!(rep.samples_on_locus));
    m.insert("locus_kind".into(), locus_kind);
    if let Value::Object(detail) = locus_detail {
        for (k, v) in detail {
            m.insert(k, v);
        }
    }
    Value::Object(m)
}

pub fn identity_json(rep: &IdentityReport) -> Value {
    let mut m = Map::new();
    m.insert("identity".into(), json!(rep.identity));
    m.insert(
        "status".into(),
        json!(if rep.pass { "pass" } else { "fail" }),
    );
    if let Some(e) = rep.first_mismatch_exponent {
        m.insert("first_mismatch_exponent".into(), rat_pair(e));
    }
    m.insert("horizon".into(), rat_pair(rep.horizon));
    Value::Object(m)
}

/// Output of the `verify` command.
pub fn verify_report(reps: &[IdentityReport]) -> Value {
    json!({
        "command": "verify",
        "identities": reps.iter().map(identity_json).collect::<Vec<_>>(),
        "all_pass": reps.iter().all(|r| r.pass),
    })
}

/// {nodes, edges, ends, cycle_len} per the metric-graph schema, plus a
/// supplementary height table for nodes on the central road.
pub fn graph_json(g: &MetricGraph, cycle_len: Option<Rat>) -> Value {
    let nodes: Vec<Value> = (0..g.node_count()).map(|i| json!(i)).collect();
    let heights: Vec<Value> = (0..g.node_count())
        .filter_map(|i| g.node_heights[i].map(|h| json!([json!(i), rat_pair(h)])))
        .collect();
    let edges: Vec<Value> = g
        .edges
        .iter()
        .map(|(a, b, len)| json!({ "a": a, "b": b, "len": rat_pair(*len) }))
        .collect();
    let ends: Vec<Value> = g
        .ends
        .iter()
        .map(|(at, label)| json!({ "at": at, "label": label }))
        .collect();
    let mut m = Map::new();
    m.insert("nodes".into(), Value::Array(nodes));
    m.insert("heights".into(), Value::Array(heights));
    m.insert("edges".into(), Value::Array(edges));
    m.insert("ends".into(), Value::Array(ends));
    if let Some(l) = cycle_len {
        m.insert("cycle_len".into(), rat_pair(l));
    }
    Value::Object(m)
}

fn end_json(e: &End) -> Value {
    json!({
        "label": e.label,
        "exponent": rat_pair(e.exponent),
        "imaginary": e.phase.is_imaginary(),
    })
}

/// Output of the `bt` command.
#[allow(clippy::too_many_arguments)]
pub fn bt_report(
    fit: &FitResult,
    zeros: &[End],
    poles: &[End],
    cross_ratios: &[(String, Rat)],
    gamma: &MetricGraph,
    gamma_bar: &MetricGraph,
    quotient: &MetricGraph,
    isometry: &IsometryReport,
) -> Value {
    json!({
        "command": "bt",
        "xi": {
            "offset": rat_pair(fit.factor_a.offset),
            "series": series_json(&fit.factor_a.xi),
        },
        "eta": {
            "offset": rat_pair(fit.factor_b.offset),
            "series": series_json(&fit.factor_b.xi),
        },
        "fit_constant": series_json(&fit.constant),
        "fit_residual_bound": rat_pair(fit.residual_bound),
        "zeros": zeros.iter().map(end_json).collect::<Vec<_>>(),
        "poles": poles.iter().map(end_json).collect::<Vec<_>>(),
        "cross_ratios": cross_ratios
            .iter()
            .map(|(what, l)| json!({ "intersection": what, "length": rat_pair(*l) }))
            .collect::<Vec<_>>(),
        "gamma": graph_json(gamma, None),
        "gamma_bar": graph_json(gamma_bar, None),
        "quotient": graph_json(quotient, Some(rat(8, 1))),
        "isometric": isometry.isometric,
        "canonical_graph": isometry.canonical_graph,
        "canonical_curve": isometry.canonical_curve,
    })
}

/// Serialize with sorted keys (serde_json's default map is ordered) and
/// a trailing newline.
pub fn to_string_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON serialization cannot fail");
    s.push('\n');
    s
}

/// Sanity helper shared by tests: exact equality of emitted and reparsed
/// series.
pub fn series_round_trips(s: &PuiseuxSeries) -> bool {
    match series_from_json(&series_json(s)) {
        Ok(t) => t == *s,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;

    #[test]
    fn series_json_round_trip() {
        let s = expr::parse_series("1 - 3*q + 1/2*q^(7/2)", rat(24, 1)).unwrap();
        assert!(series_round_trips(&s));
        let v = series_json(&s);
        // terms sorted by exponent
        let terms = v["terms"].as_array().unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(terms[0][2], json!(0));
        assert_eq!(terms[2][2], json!(7));
        assert_eq!(terms[2][3], json!(2));
    }

    #[test]
    fn deterministic_emission() {
        let s = expr::parse_series("1+q", rat(9, 1)).unwrap();
        let a = to_string_pretty(&series_json(&s));
        let b = to_string_pretty(&series_json(&s));
        assert_eq!(a, b);
    }

    #[test]
    fn rational_pairs_only() {
        let v = rat_pair(rat(-3, 2));
        assert_eq!(v, json!([-3, 2]));
        assert_eq!(rat_from_json(&v).unwrap(), rat(-3, 2));
    }
}
