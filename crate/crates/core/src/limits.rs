//! Limit extrapolation and the verification experiments built on the
//! space-time functionals.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::functionals::{
    boundary_term_batch, flux_batch, morawetz_lhs_schedule, profiles, remainder_terms, sandwich, Profiles,
};
use crate::model::{LimitEstimate, QuadraturePlan, ReportRow, ScheduleParam, VerificationReport, WavePacketSum};
use crate::propagator::dispersive_error;
use crate::spectral::hs_norm_sq;
use crate::weights::{make_psi_k, RadialWeight};

/// Extrapolation model for [`estimate_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitModel {
    /// `v(p) = L + c p^{-α}` with `α > 0` fitted.
    #[default]
    ConstantPlusPower,
    /// Last value, with the last increment as error.
    RawLast,
}

const ALPHA_MIN: f64 = 0.05;
const ALPHA_MAX: f64 = 8.0;
/// Points used by the power fit, counted from the end of the schedule.
const FIT_TAIL: usize = 6;

/// Least-squares `(L, c, residual sum of squares)` for a fixed exponent.
fn fit_fixed(points: &[(f64, f64)], alpha: f64) -> (f64, f64, f64) {
    let p_ref = points[points.len() - 1].0;
    let xs: Vec<f64> = points.iter().map(|(p, _)| (p / p_ref).powf(-alpha)).collect();
    let m = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = points.iter().map(|(_, v)| v).sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, (_, v)) in xs.iter().zip(points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (v - my);
    }
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let l = my - c * mx;
    let sse = xs.iter().zip(points).map(|(x, (_, v))| (v - l - c * x).powi(2)).sum();
    (l, c, sse)
}

/// Best exponent by a log-spaced scan refined with golden-section search.
fn fit_power(points: &[(f64, f64)]) -> (f64, f64) {
    const SCAN: usize = 160;
    let grid: Vec<f64> = (0..=SCAN)
        .map(|i| ALPHA_MIN * (ALPHA_MAX / ALPHA_MIN).powf(i as f64 / SCAN as f64))
        .collect();
    let sse = |a: f64| fit_fixed(points, a).2;
    let best = (0..=SCAN)
        .min_by(|&i, &j| sse(grid[i]).total_cmp(&sse(grid[j])))
        .unwrap_or(0);
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(SCAN)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sse(x2);
        }
    }
    let alpha = if f1 <= f2 { x1 } else { x2 };
    (fit_fixed(points, alpha).0, alpha)
}

/// Limit of `v(p)` as `p → ∞` from an increasing schedule of at least three points.
pub fn estimate_limit(values: &[(f64, f64)], model: LimitModel) -> Result<LimitEstimate> {
    if values.len() < 3 {
        return Err(invalid("schedule", "limit estimation needs at least three points"));
    }
    if values.iter().any(|(p, v)| !p.is_finite() || !v.is_finite()) {
        return Err(invalid("schedule", "non-finite schedule entry"));
    }
    if values.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid("schedule", "parameters must be strictly increasing"));
    }
    let last = values[values.len() - 1].1;
    let scale = values.iter().fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
    let spread = values.iter().fold(0.0_f64, |m, (_, v)| m.max((v - last).abs()));
    if spread <= 4.0 * f64::EPSILON * scale {
        return Ok(LimitEstimate {
            limit: last,
            error: spread,
            exponent: None,
        });
    }

    let tail = &values[values.len().saturating_sub(4)..];
    let steps: Vec<f64> = tail
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .filter(|d| d.abs() > 4.0 * f64::EPSILON * scale)
        .collect();
    if steps.iter().any(|d| d.signum() != steps[0].signum()) {
        return Err(LabError::NonConvergent(format!(
            "tail increments change sign: {:?}",
            tail.windows(2).map(|w| w[1].1 - w[0].1).collect::<Vec<_>>()
        )));
    }

    match model {
        LimitModel::RawLast => Ok(LimitEstimate {
            limit: last,
            error: (last - values[values.len() - 2].1).abs(),
            exponent: None,
        }),
        LimitModel::ConstantPlusPower => {
            if values.iter().any(|(p, _)| *p <= 0.0) {
                return Err(invalid("schedule", "power-law extrapolation needs positive parameters"));
            }
            let pts = &values[values.len().saturating_sub(FIT_TAIL)..];
            let (limit, alpha) = fit_power(pts);
            if !limit.is_finite() || alpha <= ALPHA_MIN * (1.0 + 1e-6) {
                return Err(LabError::NonConvergent(format!(
                    "power fit degenerate: limit {limit}, exponent {alpha}"
                )));
            }
            let error = if pts.len() >= 4 {
                let (prev, _) = fit_power(&pts[..pts.len() - 1]);
                let rms = (fit_fixed(pts, alpha).2 / pts.len() as f64).sqrt();
                (limit - prev).abs() + rms
            } else {
                (limit - last).abs()
            };
            Ok(LimitEstimate {
                limit,
                error,
                exponent: Some(alpha),
            })
        }
    }
}

fn datum_norm(f: &WavePacketSum) -> Result<f64> {
    hs_norm_sq(f, 0.5)
}

fn check_schedule(name: &'static str, s: &[f64]) -> Result<()> {
    if s.is_empty() || s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid(name, "schedule entries must be positive and finite"));
    }
    if s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(name, "schedule must be strictly increasing"));
    }
    Ok(())
}

fn finish(mut report: VerificationReport) -> VerificationReport {
    report.pass = report.rows.iter().all(|r| r.pass);
    report
}

/// Row whose pass flag is decided by the caller.
fn row(param: ScheduleParam, lhs: f64, rhs: f64, floor: f64, pass: bool) -> ReportRow {
    ReportRow {
        pass,
        ..ReportRow::compare(param, lhs, rhs, floor, f64::INFINITY)
    }
}

/// Finite-horizon identity `bulk(T) = ½[flux(T) - flux(-T)]` for each
/// weight and horizon; one report per weight.
pub fn verify_identity(
    f: &WavePacketSum,
    label: &str,
    ws: &[RadialWeight],
    horizons: &[f64],
    plan: &QuadraturePlan,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    check_schedule("T", horizons)?;
    let norm = datum_norm(f)?;
    let lhs = morawetz_lhs_schedule(f, ws, horizons, plan)?;
    let rhs = horizons
        .par_iter()
        .map(|&t| boundary_term_batch(f, ws, t, plan))
        .collect::<Result<Vec<_>>>()?;
    Ok(ws
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut report = VerificationReport::new("identity", f.dimension(), label, &w.label(), tolerance);
            for (j, &t) in horizons.iter().enumerate() {
                report.rows.push(ReportRow::compare(
                    ScheduleParam::Value(t),
                    lhs[j][i],
                    rhs[j][i],
                    norm,
                    tolerance,
                ));
            }
            finish(report)
        })
        .collect())
}

/// Tolerances of a limit experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitTolerances {
    /// Relative tolerance of finite-schedule identities.
    pub identity: f64,
    /// Relative tolerance of the extrapolated limit against its target.
    pub limit: f64,
}

impl Default for LimitTolerances {
    fn default() -> Self {
        Self {
            identity: 1e-6,
            limit: 0.02,
        }
    }
}

/// `∫_{-T}^{T}` bulk term along the schedule, extrapolated to `2πψ′(∞)‖f‖²_{Ḣ^{1/2}}`.
pub fn verify_theorem_main(
    f: &WavePacketSum,
    label: &str,
    w: &RadialWeight,
    horizons: &[f64],
    plan: &QuadraturePlan,
    tol: LimitTolerances,
    model: LimitModel,
) -> Result<VerificationReport> {
    check_schedule("T", horizons)?;
    w.check_decay_hypotheses(f.dimension())?;
    let norm = datum_norm(f)?;
    let target = 2.0 * PI * w.slope_at_infinity() * norm;
    let ws = std::slice::from_ref(w);
    let lhs: Vec<f64> = morawetz_lhs_schedule(f, ws, horizons, plan)?
        .into_iter()
        .map(|v| v[0])
        .collect();
    let rhs: Vec<f64> = horizons
        .par_iter()
        .map(|&t| boundary_term_batch(f, ws, t, plan).map(|v| v[0]))
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new("theorem-limit", f.dimension(), label, &w.label(), tol.limit);
    for (i, &t) in horizons.iter().enumerate() {
        report.rows.push(ReportRow::compare(
            ScheduleParam::Value(t),
            lhs[i],
            rhs[i],
            norm,
            tol.identity,
        ));
    }
    let seq: Vec<(f64, f64)> = horizons.iter().copied().zip(lhs).collect();
    push_limit(&mut report, &seq, target, norm, tol.limit, model, ScheduleParam::Limit);
    Ok(finish(report))
}

/// Extrapolates `seq` and appends the limit row; a non-convergent sequence
/// becomes a failing row with the diagnostics in the notes.
fn push_limit(
    report: &mut VerificationReport,
    seq: &[(f64, f64)],
    target: f64,
    floor: f64,
    tolerance: f64,
    model: LimitModel,
    param: ScheduleParam,
) -> Option<LimitEstimate> {
    match estimate_limit(seq, model) {
        Ok(est) => {
            report
                .rows
                .push(ReportRow::compare(param, est.limit, target, floor, tolerance));
            if report.limit.is_none() {
                report.limit = Some(est);
            }
            Some(est)
        }
        Err(e) => {
            report.notes.push(format!("{param}: {e}"));
            report.rows.push(row(param, f64::NAN, target, floor, false));
            None
        }
    }
}

fn profiles_over(f: &WavePacketSum, radii: &[f64], plan: &QuadraturePlan) -> Result<Vec<Profiles>> {
    radii.par_iter().map(|&r| profiles(f, r, plan)).collect()
}

/// Radial profile along an `R` schedule extrapolated to `2π‖f‖²_{Ḣ^{1/2}}`,
/// with the supremum of the full profile as a lower-bound check.
pub fn verify_corollary(
    f: &WavePacketSum,
    label: &str,
    radii: &[f64],
    plan: &QuadraturePlan,
    tolerance: f64,
    model: LimitModel,
) -> Result<VerificationReport> {
    check_schedule("R", radii)?;
    let norm = datum_norm(f)?;
    let target = 2.0 * PI * norm;
    let values = profiles_over(f, radii, plan)?;
    let mut report = VerificationReport::new("corollary-limit", f.dimension(), label, "ball", tolerance);
    for (r, p) in radii.iter().zip(&values) {
        // pointwise |∂_r u|² ≤ |∇u|²
        let ordered = p.radial <= p.full * (1.0 + 1e-9) + 1e-15;
        report
            .rows
            .push(row(ScheduleParam::Value(*r), p.radial, target, target, ordered));
    }
    let seq: Vec<(f64, f64)> = radii.iter().zip(&values).map(|(r, p)| (*r, p.radial)).collect();
    push_limit(
        &mut report,
        &seq,
        target,
        target,
        tolerance,
        model,
        ScheduleParam::Limit,
    );
    let sup = values.iter().fold(0.0_f64, |m, p| m.max(p.full));
    report.rows.push(row(
        ScheduleParam::Supremum,
        sup,
        target,
        target,
        sup >= target * (1.0 - tolerance),
    ));
    Ok(finish(report))
}

/// Flux at `±t` along the schedule, extrapolated to `±2πψ′(∞)‖f‖²_{Ḣ^{1/2}}`.
pub fn verify_flux(
    f: &WavePacketSum,
    label: &str,
    w: &RadialWeight,
    times: &[f64],
    plan: &QuadraturePlan,
    tolerance: f64,
    model: LimitModel,
) -> Result<VerificationReport> {
    check_schedule("t", times)?;
    let norm = datum_norm(f)?;
    let target = 2.0 * PI * w.slope_at_infinity() * norm;
    let ws = std::slice::from_ref(w);
    let forward: Vec<f64> = times
        .par_iter()
        .map(|&t| flux_batch(f, ws, t, plan).map(|v| v[0]))
        .collect::<Result<_>>()?;
    // u(-t) = conj u(t) for real data, so the flux is odd in t.
    let backward: Vec<f64> = if f.is_real() {
        forward.iter().map(|v| -v).collect()
    } else {
        times
            .par_iter()
            .map(|&t| flux_batch(f, ws, -t, plan).map(|v| v[0]))
            .collect::<Result<_>>()?
    };
    let mut report = VerificationReport::new("flux-limit", f.dimension(), label, &w.label(), tolerance);
    for (i, &t) in times.iter().enumerate() {
        report
            .rows
            .push(row(ScheduleParam::Value(t), forward[i], target, norm, true));
        report
            .rows
            .push(row(ScheduleParam::Value(-t), backward[i], -target, norm, true));
    }
    let fwd: Vec<(f64, f64)> = times.iter().copied().zip(forward).collect();
    let bwd: Vec<(f64, f64)> = times.iter().copied().zip(backward).collect();
    push_limit(&mut report, &fwd, target, norm, tolerance, model, ScheduleParam::Limit);
    push_limit(
        &mut report,
        &bwd,
        -target,
        norm,
        tolerance,
        model,
        ScheduleParam::NegativeLimit,
    );
    Ok(finish(report))
}

/// Tolerances of the sandwich experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichTolerances {
    /// Slack of the bracket `lower ≤ middle ≤ upper`, relative to `upper`.
    pub bracket: f64,
    /// Relative tolerance of the all-time identity for `ψ_{k,R}`.
    pub identity: f64,
    /// Allowed excess of the limit ratio over `(k+1)/k`.
    pub ratio: f64,
}

impl Default for SandwichTolerances {
    fn default() -> Self {
        Self {
            bracket: 1e-8,
            identity: 1e-6,
            ratio: 1e-3,
        }
    }
}

/// At each `R`: `(1/R)∫∫_{B_R}|∂_r u|² ≤ ∫∫ψ″_{k,R}|∂_r u|² ≤ (1/R)∫∫_{B_{(k+1)R/k}}|∂_r u|²`
/// and the all-time identity for `ψ_{k,R}`; in the limit, the ratio of the
/// middle to the lower term is at most `(k+1)/k`.
pub fn verify_sandwich(
    f: &WavePacketSum,
    label: &str,
    k: u32,
    radii: &[f64],
    plan: &QuadraturePlan,
    tol: SandwichTolerances,
    model: LimitModel,
) -> Result<VerificationReport> {
    check_schedule("R", radii)?;
    let slope = make_psi_k(k)?.slope_at_infinity();
    let norm = datum_norm(f)?;
    let target = 2.0 * PI * slope * norm;
    let values = radii
        .par_iter()
        .map(|&r| sandwich(f, k, r, plan))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("sandwich", f.dimension(), label, &format!("psi_k({k})"), tol.ratio);
    for (r, s) in radii.iter().zip(&values) {
        let slack = tol.bracket * s.upper.abs() + 1e-15;
        let bracket = s.lower <= s.middle + slack && s.middle <= s.upper + slack;
        let identity = ReportRow::compare(ScheduleParam::Value(*r), s.bulk(), target, norm, tol.identity);
        if !bracket {
            report.notes.push(format!(
                "R = {r}: bracket violated, lower {:.6e} middle {:.6e} upper {:.6e}",
                s.lower, s.middle, s.upper
            ));
        }
        report.rows.push(ReportRow {
            pass: identity.pass && bracket,
            ..identity
        });
    }
    let lower: Vec<(f64, f64)> = radii.iter().zip(&values).map(|(r, s)| (*r, s.lower)).collect();
    let middle: Vec<(f64, f64)> = radii.iter().zip(&values).map(|(r, s)| (*r, s.middle)).collect();
    let bound = (k as f64 + 1.0) / k as f64;
    match (estimate_limit(&lower, model), estimate_limit(&middle, model)) {
        (Ok(lo), Ok(mid)) => {
            let ratio = if lo.limit > 0.0 { mid.limit / lo.limit } else { 1.0 };
            report.limit = Some(mid);
            report.notes.push(format!(
                "limits: lower {:.10e}, middle {:.10e}, ratio {ratio:.10e}, bound {bound:.10e}",
                lo.limit, mid.limit
            ));
            report
                .rows
                .push(row(ScheduleParam::Limit, ratio, bound, 1.0, ratio <= bound + tol.ratio));
        }
        (lo, mid) => {
            for e in [lo.err(), mid.err()].into_iter().flatten() {
                report.notes.push(e.to_string());
            }
            report.rows.push(row(ScheduleParam::Limit, f64::NAN, bound, 1.0, false));
        }
    }
    Ok(finish(report))
}

/// Remainder terms of the rescaled identity along an `R` schedule; the last
/// value of each must be at most `ratio` times the first. Returns one report
/// for the tangential and one for the bilaplacian remainder.
pub fn verify_remainder_decay(
    f: &WavePacketSum,
    label: &str,
    w_base: &RadialWeight,
    radii: &[f64],
    plan: &QuadraturePlan,
    ratio: f64,
) -> Result<Vec<VerificationReport>> {
    check_schedule("R", radii)?;
    if radii.len() < 2 {
        return Err(invalid("R", "decay needs at least two radii"));
    }
    let values = radii
        .par_iter()
        .map(|&r| remainder_terms(f, w_base, r, plan))
        .collect::<Result<Vec<_>>>()?;
    let series = [
        ("tangential", values.iter().map(|v| v.tangential).collect::<Vec<_>>()),
        ("bilaplacian", values.iter().map(|v| v.bilaplacian).collect::<Vec<_>>()),
    ];
    Ok(series
        .into_iter()
        .map(|(name, vals)| {
            let weight = format!("{}:{name}", w_base.label());
            let mut report = VerificationReport::new("remainder-decay", f.dimension(), label, &weight, ratio);
            let first = vals[0];
            for (i, (&r, &v)) in radii.iter().zip(&vals).enumerate() {
                let pass = i + 1 < vals.len() || v <= ratio * first;
                report.rows.push(row(ScheduleParam::Value(r), v, first, 0.0, pass));
            }
            finish(report)
        })
        .collect())
}

/// `L²` distance between `u(t)` and its dispersive approximant: strictly
/// decreasing along the schedule, and the last value at most `ratio` times the first.
pub fn verify_asymptotics(f: &WavePacketSum, label: &str, times: &[f64], ratio: f64) -> Result<VerificationReport> {
    check_schedule("t", times)?;
    let errors = times
        .iter()
        .map(|&t| dispersive_error(f, t))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("asymptotics", f.dimension(), label, "none", ratio);
    let first = errors[0];
    for (i, (&t, &e)) in times.iter().zip(&errors).enumerate() {
        let decreasing = i == 0 || e < errors[i - 1];
        let last_ok = i + 1 < errors.len() || e <= ratio * first;
        report
            .rows
            .push(row(ScheduleParam::Value(t), e, first, 0.0, decreasing && last_ok));
    }
    Ok(finish(report))
}

/// `F_f(R)` along an `R` schedule. Radii beyond `threshold_factor · extent(f)`
/// must satisfy `F_f(R) ≥ fraction · 2π‖f‖²_{Ḣ^{1/2}}`; the observed
/// `sup F_f / ‖f‖²_{Ḣ^{1/2}}` is reported without a claim about the optimal constant.
pub fn verify_smoothing_bound(
    f: &WavePacketSum,
    label: &str,
    radii: &[f64],
    plan: &QuadraturePlan,
    fraction: f64,
    threshold_factor: f64,
) -> Result<VerificationReport> {
    check_schedule("R", radii)?;
    let norm = datum_norm(f)?;
    let target = 2.0 * PI * norm;
    let threshold = threshold_factor * f.extent();
    let values = profiles_over(f, radii, plan)?;
    let mut report = VerificationReport::new("smoothing-bound", f.dimension(), label, "ball", fraction);
    report.notes.push(format!("liminf threshold R >= {threshold:.6e}"));
    for (&r, p) in radii.iter().zip(&values) {
        let pass = r < threshold || p.full >= fraction * target;
        report
            .rows
            .push(row(ScheduleParam::Value(r), p.full, target, target, pass));
    }
    if !radii.iter().any(|&r| r >= threshold) {
        report.notes.push("no scheduled radius reaches the threshold".into());
    }
    let sup = values.iter().fold(0.0_f64, |m, p| m.max(p.full));
    if norm > 0.0 {
        report
            .notes
            .push(format!("observed sup F_f / |f|^2_(1/2) = {:.10e}", sup / norm));
    }
    report
        .rows
        .push(row(ScheduleParam::Supremum, sup, target, target, true));
    Ok(finish(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WavePacket;
    use crate::weights::{constant_weight, make_psi_eps};

    #[test]
    fn constant_sequence() {
        let v = [(1.0, 5.0), (2.0, 5.0), (3.0, 5.0), (4.0, 5.0)];
        for m in [LimitModel::ConstantPlusPower, LimitModel::RawLast] {
            let e = estimate_limit(&v, m).unwrap();
            assert_eq!((e.limit, e.error), (5.0, 0.0));
        }
    }

    #[test]
    fn synthetic_power_law() {
        let v: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&p| (p, 3.0 + 2.0 / p))
            .collect();
        let e = estimate_limit(&v, LimitModel::ConstantPlusPower).unwrap();
        assert!((e.limit - 3.0).abs() <= 1e-8, "{e:?}");
        assert!((e.exponent.unwrap() - 1.0).abs() < 1e-6);
        assert!(e.error < 1e-7);
        let raw = estimate_limit(&v, LimitModel::RawLast).unwrap();
        assert_eq!(raw.limit, 3.0 + 2.0 / 64.0);
        assert!((raw.error - 2.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn three_point_fit() {
        let v: Vec<(f64, f64)> = [2.0_f64, 4.0, 8.0].iter().map(|&p| (p, 1.0 - p.powf(-1.5))).collect();
        let e = estimate_limit(&v, LimitModel::ConstantPlusPower).unwrap();
        assert!((e.limit - 1.0).abs() < 1e-9);
    }

    #[test]
    fn alternating_sequence_is_flagged() {
        let v: Vec<(f64, f64)> = (1..=6)
            .map(|i| (i as f64, if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        for m in [LimitModel::ConstantPlusPower, LimitModel::RawLast] {
            assert!(matches!(estimate_limit(&v, m), Err(LabError::NonConvergent(_))));
        }
    }

    #[test]
    fn divergent_sequence_is_flagged() {
        let v: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&p| (p, p)).collect();
        assert!(matches!(
            estimate_limit(&v, LimitModel::ConstantPlusPower),
            Err(LabError::NonConvergent(_))
        ));
    }

    #[test]
    fn schedule_validation() {
        assert!(estimate_limit(&[(1.0, 1.0), (2.0, 1.0)], LimitModel::RawLast).is_err());
        assert!(estimate_limit(&[(1.0, 1.0), (1.0, 1.0), (2.0, 1.0)], LimitModel::RawLast).is_err());
    }

    fn gaussian() -> WavePacketSum {
        WavePacketSum::single(WavePacket::centered(1, 1.0).unwrap())
    }

    #[test]
    fn constant_weight_theorem_is_trivial() {
        let plan = QuadraturePlan::default();
        let r = verify_theorem_main(
            &gaussian(),
            "g",
            &constant_weight(1.0),
            &[1.0, 2.0, 4.0],
            &plan,
            LimitTolerances::default(),
            LimitModel::ConstantPlusPower,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.limit.unwrap().limit, 0.0);
    }

    #[test]
    fn zero_datum_corollary() {
        let plan = QuadraturePlan::default();
        let r = verify_corollary(
            &WavePacketSum::zero(2),
            "zero",
            &[4.0, 8.0, 16.0],
            &plan,
            0.02,
            LimitModel::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn flux_of_real_datum_is_symmetric() {
        let plan = QuadraturePlan::default();
        let w = make_psi_eps(1.0).unwrap();
        let r = verify_flux(
            &gaussian(),
            "g",
            &w,
            &[8.0, 16.0, 32.0, 64.0],
            &plan,
            0.02,
            LimitModel::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        let vals: Vec<f64> = r.rows.iter().map(|x| x.lhs).collect();
        assert_eq!(vals[0], -vals[1]);
    }

    #[test]
    fn asymptotics_of_a_packet() {
        let f = WavePacketSum::single(
            WavePacket::new(num_complex::Complex64::new(1.0, 0.0), 1.0, vec![0.3], vec![0.1]).unwrap(),
        );
        let r = verify_asymptotics(&f, "p", &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0], 0.1).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
