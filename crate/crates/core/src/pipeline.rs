//! Shared command pipelines behind the CLI and the C ABI.

use serde_json::Value;

use crate::bttree::{
    build_tree, compare_isometry, cross_ratio_length, delta_series, fit_pole_factors,
    mod_q8_quotient, pole_divisor, square_quotient, verify_cross_ratio_consistency,
    zero_divisor_window, BtTree, End, FitResult, IsometryReport, MetricGraph, ProjPoint,
};
use crate::edwards::{
    edwards_d0, family_coefficients, j_invariant_check, theta_shift_reports, trop_valuations,
    FamilyParams, IdentityReport,
};
use crate::error::{Error, Result};
use crate::expr::parse_series;
use crate::rational::{rat, Rat};
use crate::report;
use crate::thetaparam::{delta_shape, sample_cycle, CycleSampleReport, ShapePrediction};
use crate::tropcurve::{classify, Classification};

pub fn load_params(r_expr: &str, s_expr: &str, horizon: Rat) -> Result<FamilyParams> {
    let r = parse_series(r_expr, horizon)?;
    let s = parse_series(s_expr, horizon)?;
    FamilyParams::new(r, s)
}

pub fn family_json(r_expr: &str, s_expr: &str, horizon: Rat) -> Result<Value> {
    let params = load_params(r_expr, s_expr, horizon)?;
    let coeffs = family_coefficients(&params)?;
    let u = trop_valuations(&coeffs);
    let delta = params.delta();
    Ok(report::family_report(&coeffs, &u, delta.as_ref().copied()))
}

pub fn classify_full(r_expr: &str, s_expr: &str, horizon: Rat) -> Result<Classification> {
    let params = load_params(r_expr, s_expr, horizon)?;
    classify(&params)
}

pub fn classify_json(r_expr: &str, s_expr: &str, horizon: Rat) -> Result<Value> {
    Ok(report::classify_report(&classify_full(r_expr, s_expr, horizon)?))
}

pub fn cycle_full(
    r_expr: &str,
    s_expr: &str,
    horizon: Rat,
    step: Rat,
) -> Result<(CycleSampleReport, ShapePrediction)> {
    let params = load_params(r_expr, s_expr, horizon)?;
    let rep = sample_cycle(&params, step)?;
    let predicted = delta_shape(rep.cp.delta);
    Ok((rep, predicted))
}

pub fn cycle_json(r_expr: &str, s_expr: &str, horizon: Rat, step: Rat) -> Result<Value> {
    let (rep, predicted) = cycle_full(r_expr, s_expr, horizon, step)?;
    Ok(report::cycle_report(&rep, &predicted))
}

pub fn verify_reports(horizon: Rat) -> Result<Vec<IdentityReport>> {
    let mut reports: Vec<IdentityReport> = Vec::new();
    let d0 = edwards_d0(horizon);
    reports.push(IdentityReport::from_residual(
        "d0 = 2 epsbar^2 eps^2 - a^2 (epsbar^4 + eps^4)",
        &d0,
    ));
    reports.extend(theta_shift_reports(horizon));
    reports.push(j_invariant_check(horizon.max(rat(17, 1)))?);
    Ok(reports)
}

pub fn verify_json(horizon: Rat) -> Result<Value> {
    Ok(report::verify_report(&verify_reports(horizon)?))
}

/// Everything the Bruhat-Tits pipeline produces.
pub struct BtOutput {
    pub cls: Classification,
    pub fit: FitResult,
    pub zeros: Vec<End>,
    pub poles: Vec<End>,
    pub cross_ratios: Vec<(String, Rat)>,
    pub tree: BtTree,
    pub gamma_bar: BtTree,
    pub quotient: MetricGraph,
    pub isometry: IsometryReport,
}

pub fn bt_full(r_expr: &str, s_expr: &str, horizon: Rat, fit_order: i64) -> Result<BtOutput> {
    let params = load_params(r_expr, s_expr, horizon)?;
    let cls = classify(&params)?;
    if !cls.report.smooth_by_subdivision {
        return Err(Error::NotSmooth);
    }
    // the fit reads orders up to (lowest log-derivative order) + fit_order
    let delta_h = horizon.max(rat(fit_order, 1) + rat(12, 1));
    let dlt = delta_series(&params, delta_h);
    let fit = fit_pole_factors(&dlt, None, fit_order)?;
    let zeros = zero_divisor_window(horizon);
    let poles = pole_divisor(&fit.factor_a, &fit.factor_b)?;
    let mut ends = zeros.clone();
    ends.extend(poles.clone());
    let tree = build_tree(&ends)?;
    verify_cross_ratio_consistency(&tree, &ends, 200)?;
    let mut cross_ratios: Vec<(String, Rat)> = Vec::new();
    let xibar = poles
        .iter()
        .find(|e| e.name.starts_with("xibar") && !e.phase.is_imaginary())
        .cloned();
    let etabar = poles
        .iter()
        .find(|e| e.name.starts_with("etabar") && !e.phase.is_imaginary())
        .cloned();
    if let (Some(xe), Some(ee)) = (xibar, etabar) {
        let x_at = |e: Rat| ProjPoint::Finite(xe.shift(e - xe.exponent));
        let e_at = |e: Rat| ProjPoint::Finite(ee.shift(e - ee.exponent));
        if let Ok(l) = cross_ratio_length(
            &ProjPoint::Zero,
            &x_at(rat(-1, 2)),
            &e_at(rat(5, 2)),
            &ProjPoint::Infinity,
        ) {
            cross_ratios.push(("[0, xibar q^(-1/2)] ^ [etabar q^(5/2), inf]".into(), l));
        }
        if let Ok(l) = cross_ratio_length(
            &x_at(rat(-1, 2)),
            &x_at(rat(5, 2)),
            &e_at(rat(5, 2)),
            &ProjPoint::Infinity,
        ) {
            cross_ratios.push((
                "[xibar q^(-1/2), xibar q^(5/2)] ^ [etabar q^(5/2), inf]".into(),
                l,
            ));
        }
    }
    let (squared, gamma_bar) = square_quotient(&ends)?;
    let quotient = mod_q8_quotient(&squared)?;
    let isometry = compare_isometry(&quotient, &cls)?;
    Ok(BtOutput {
        cls,
        fit,
        zeros,
        poles,
        cross_ratios,
        tree,
        gamma_bar,
        quotient,
        isometry,
    })
}

pub fn bt_json(out: &BtOutput) -> Value {
    report::bt_report(
        &out.fit,
        &out.zeros,
        &out.poles,
        &out.cross_ratios,
        &out.tree.graph,
        &out.gamma_bar.graph,
        &out.quotient,
        &out.isometry,
    )
}
