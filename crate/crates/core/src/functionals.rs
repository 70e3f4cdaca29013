//! Space-time quadrature of the smoothing profile, the Morawetz bulk term,
//! fluxes and the remainder terms.
//!
//! Space integrals run radially, `∫₀^ρ r^{n-1} K(r, S(r)) dr`, where `S(r)` is
//! the vector of sphere integrals `∫_{S^{n-1}} [|u|², |∂_r u|², |∇_τ u|², Im ū∂_r u](rω) dω`.
//! Every kernel `K` only sees `S`, so balls and radial weights need no
//! Cartesian grid.

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::model::{QuadraturePlan, SpatialTruncation, WavePacketSum};
use crate::propagator::{evolve_analytic, Evaluator};
use crate::quad::{clip_breaks, geometric_refine, sphere_integral, Adaptive, Compactified, Tolerance};
use crate::weights::{laplacians, make_psi_k, RadialWeight};

/// Sphere integrals of `|u|², |∂_r u|², |∇_τ u|², Im ū∂_r u` at one radius.
pub type Shell = [f64; 4];

const MASS: usize = 0;
const RADIAL: usize = 1;
const TANGENTIAL: usize = 2;
const FLUX: usize = 3;

type Kernel<'a> = Box<dyn Fn(f64, &Shell) -> f64 + Sync + 'a>;

/// Radial kernels integrated together, with their outer radius and extra panel breaks.
struct Kernels<'a> {
    list: Vec<Kernel<'a>>,
    cap: f64,
    breaks: Vec<f64>,
}

impl<'a> Kernels<'a> {
    fn new() -> Self {
        Self {
            list: Vec::new(),
            cap: f64::INFINITY,
            breaks: Vec::new(),
        }
    }

    fn push(&mut self, k: impl Fn(f64, &Shell) -> f64 + Sync + 'a) -> usize {
        self.list.push(Box::new(k));
        self.list.len() - 1
    }

    fn len(&self) -> usize {
        self.list.len()
    }
}

fn validate(plan: &QuadraturePlan, f: &WavePacketSum) -> Result<()> {
    plan.validate()?;
    if f.dimension() > 3 {
        return Err(LabError::DimensionMismatch {
            expected: 3,
            found: f.dimension(),
        });
    }
    Ok(())
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(crate::error::invalid(name, format!("must be positive, got {v}")))
    }
}

fn space_integrals(ev: &Evaluator, plan: &QuadraturePlan, kernels: &Kernels) -> Result<Vec<f64>> {
    let n = ev.dimension();
    let width = kernels.len();
    let sigmas = plan.envelope_sigmas();
    let envelopes: Vec<(f64, f64)> = ev.envelopes().collect();
    if envelopes.is_empty() {
        return Ok(vec![0.0; width]);
    }
    let reach = match plan.truncation {
        SpatialTruncation::TailMass(_) => envelopes.iter().fold(0.0_f64, |m, &(c, s)| m.max(c + sigmas * s)),
        SpatialTruncation::FixedRadius(rho) => rho,
    };
    let hi = reach.min(kernels.cap);
    if hi <= 0.0 {
        return Ok(vec![0.0; width]);
    }
    let mut candidates = kernels.breaks.clone();
    for &(c, s) in &envelopes {
        for m in [-sigmas, 0.0, sigmas] {
            candidates.push(c + m * s);
        }
    }
    let breaks = geometric_refine(&clip_breaks(candidates, 0.0, hi), 4.0);
    let sphere_rel = plan.space_rel * 1e-2;
    let sphere_abs = plan.space_rel * 1e-4 * ev.density_scale();
    let rule = Adaptive::new(
        plan.nodes_per_panel,
        Tolerance {
            rel: plan.space_rel,
            floor: plan.space_rel * 1e-2,
            abs: 0.0,
        },
        plan.max_panels,
        plan.summation,
    );
    rule.integrate(
        |r| {
            let shell: Shell = sphere_integral::<4>(n, r, ev.angular_nodes(r, sigmas), sphere_rel, sphere_abs, |x| {
                let d = ev.densities(x);
                [d.mass, d.radial, d.tangential, d.flux]
            })?;
            let jac = r.powi(n as i32 - 1);
            Ok(kernels.list.iter().map(|k| jac * k(r, &shell)).collect())
        },
        &breaks,
    )
}

/// Time range of a space-time integral.
#[derive(Debug, Clone, Copy)]
enum TimeRange {
    Interval(f64, f64),
    /// The whole line, compactified with the given time scale.
    Line(f64),
}

/// Characteristic dynamical time of `f` as seen from the ball of radius `radius`.
fn time_scale(f: &WavePacketSum, radius: f64) -> f64 {
    f.packets()
        .iter()
        .map(|p| {
            let a = p.width;
            let c = p.center.iter().map(|x| x * x).sum::<f64>().sqrt();
            (radius + c) / (2.0 * a.sqrt()) + 0.25 / a
        })
        .fold(0.0, f64::max)
}

/// Panel breaks in `t` that resolve the early-time dynamics near `t = 0`.
fn time_breaks(f: &WavePacketSum, a: f64, b: f64, panels: usize) -> Vec<f64> {
    let amax = f.packets().iter().fold(0.0_f64, |m, p| m.max(p.width));
    let mut candidates: Vec<f64> = (0..=panels).map(|j| a + (b - a) * j as f64 / panels as f64).collect();
    candidates.push(0.0);
    if amax > 0.0 {
        let mut t = 0.25 / amax;
        while t < b.abs().max(a.abs()) {
            candidates.push(t);
            candidates.push(-t);
            t *= 2.0;
        }
    }
    clip_breaks(candidates, a, b)
}

/// `∫ dt ∫ r^{n-1} K_i dr` over `range`.
fn space_time_integrals(
    f: &WavePacketSum,
    plan: &QuadraturePlan,
    kernels: &Kernels,
    range: TimeRange,
) -> Result<Vec<f64>> {
    let width = kernels.len();
    if f.is_zero() {
        return Ok(vec![0.0; width]);
    }
    let rule = Adaptive::new(
        plan.nodes_per_panel,
        Tolerance {
            rel: plan.time_rel,
            floor: plan.time_rel * 1e-2,
            abs: 0.0,
        },
        plan.max_panels,
        plan.summation,
    );
    match range {
        TimeRange::Interval(a, b) => {
            if b <= a {
                return Ok(vec![0.0; width]);
            }
            let breaks = time_breaks(f, a, b, plan.time_panels);
            rule.integrate(|t| space_integrals(&evolve_analytic(f, t), plan, kernels), &breaks)
        }
        TimeRange::Line(scale) => {
            let map = Compactified { scale };
            let horizon = 64.0 * scale;
            let breaks: Vec<f64> = time_breaks(f, -horizon, horizon, plan.time_panels)
                .into_iter()
                .map(|t| map.inverse(t))
                .chain([-1.0, 1.0])
                .collect();
            let breaks = clip_breaks(breaks, -1.0, 1.0);
            rule.integrate(
                |s| {
                    let (t, dt) = map.map(s);
                    let mut v = space_integrals(&evolve_analytic(f, t), plan, kernels)?;
                    v.iter_mut().for_each(|x| *x *= dt);
                    Ok(v)
                },
                &breaks,
            )
        }
    }
}

/// `(1/R)∫∫_{B_R}|∇u|²` and `(1/R)∫∫_{B_R}|∂_r u|²` over all time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profiles {
    pub full: f64,
    pub radial: f64,
}

/// Both smoothing profiles from one space-time pass.
pub fn profiles(f: &WavePacketSum, radius: f64, plan: &QuadraturePlan) -> Result<Profiles> {
    validate(plan, f)?;
    positive("R", radius)?;
    let mut k = Kernels::new();
    k.cap = radius;
    let full = k.push(|_, s| s[RADIAL] + s[TANGENTIAL]);
    let radial = k.push(|_, s| s[RADIAL]);
    let tau = plan.horizon * time_scale(f, radius);
    let v = space_time_integrals(f, plan, &k, TimeRange::Line(tau))?;
    Ok(Profiles {
        full: v[full] / radius,
        radial: v[radial] / radius,
    })
}

/// `F_f(R) = (1/R)∫_ℝ∫_{B_R}|∇u|² dx dt`.
pub fn smoothing_profile(f: &WavePacketSum, radius: f64, plan: &QuadraturePlan) -> Result<f64> {
    Ok(profiles(f, radius, plan)?.full)
}

/// `(1/R)∫_ℝ∫_{B_R}|∂_r u|² dx dt`.
pub fn radial_profile(f: &WavePacketSum, radius: f64, plan: &QuadraturePlan) -> Result<f64> {
    Ok(profiles(f, radius, plan)?.radial)
}

fn morawetz_kernel(w: &RadialWeight, n: usize) -> impl Fn(f64, &Shell) -> f64 + Sync + '_ {
    move |r, s| {
        let d = w.derivatives(r);
        let (_, bil) = laplacians(&d, r, n);
        d[2] * s[RADIAL] + d[1] / r * s[TANGENTIAL] - 0.25 * bil * s[MASS]
    }
}

fn weight_breaks(ws: &[RadialWeight]) -> Vec<f64> {
    ws.iter().flat_map(|w| w.breakpoints()).collect()
}

/// `∫_{-T}^{T}∫[ψ″|∂_r u|² + (ψ′/r)|∇_τ u|² - ¼|u|²Δ²ψ] dx dt`.
pub fn morawetz_lhs(f: &WavePacketSum, w: &RadialWeight, horizon: f64, plan: &QuadraturePlan) -> Result<f64> {
    Ok(morawetz_lhs_batch(f, std::slice::from_ref(w), horizon, plan)?[0])
}

/// [`morawetz_lhs`] for several weights sharing one space-time pass.
pub fn morawetz_lhs_batch(
    f: &WavePacketSum,
    ws: &[RadialWeight],
    horizon: f64,
    plan: &QuadraturePlan,
) -> Result<Vec<f64>> {
    Ok(morawetz_lhs_schedule(f, ws, &[horizon], plan)?.remove(0))
}

/// Values at each `T` of an increasing schedule, one entry per weight, built
/// from consecutive time slabs `T_{i-1} ≤ |t| ≤ T_i`.
pub fn morawetz_lhs_schedule(
    f: &WavePacketSum,
    ws: &[RadialWeight],
    horizons: &[f64],
    plan: &QuadraturePlan,
) -> Result<Vec<Vec<f64>>> {
    validate(plan, f)?;
    for &t in horizons {
        positive("T", t)?;
    }
    if horizons.windows(2).any(|p| p[1] <= p[0]) {
        return Err(crate::error::invalid("T", "schedule must be strictly increasing"));
    }
    let n = f.dimension();
    let mut k = Kernels::new();
    for w in ws {
        k.push(morawetz_kernel(w, n));
    }
    k.breaks = weight_breaks(ws);
    let slabs = (0..horizons.len())
        .into_par_iter()
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { horizons[i - 1] };
            let hi = horizons[i];
            let upper = space_time_integrals(f, plan, &k, TimeRange::Interval(lo, hi))?;
            let lower = space_time_integrals(f, plan, &k, TimeRange::Interval(-hi, -lo))?;
            Ok(upper.iter().zip(&lower).map(|(a, b)| a + b).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = vec![0.0; ws.len()];
    Ok(slabs
        .into_iter()
        .map(|slab| {
            acc.iter_mut().zip(&slab).for_each(|(a, s)| *a += s);
            acc.clone()
        })
        .collect())
}

/// `Im∫ū ψ′(r) ∂_r u dx` at time `t`.
pub fn flux(f: &WavePacketSum, w: &RadialWeight, t: f64, plan: &QuadraturePlan) -> Result<f64> {
    Ok(flux_batch(f, std::slice::from_ref(w), t, plan)?[0])
}

/// [`flux`] for several weights sharing one spatial pass.
pub fn flux_batch(f: &WavePacketSum, ws: &[RadialWeight], t: f64, plan: &QuadraturePlan) -> Result<Vec<f64>> {
    validate(plan, f)?;
    if !t.is_finite() {
        return Err(crate::error::invalid("t", "must be finite"));
    }
    let mut k = Kernels::new();
    for w in ws {
        k.push(move |r, s| w.derivatives(r)[1] * s[FLUX]);
    }
    k.breaks = weight_breaks(ws);
    space_integrals(&evolve_analytic(f, t), plan, &k)
}

/// `½[flux(T) - flux(-T)]`, the right side of the finite-time identity.
pub fn boundary_term(f: &WavePacketSum, w: &RadialWeight, horizon: f64, plan: &QuadraturePlan) -> Result<f64> {
    Ok(boundary_term_batch(f, std::slice::from_ref(w), horizon, plan)?[0])
}

pub fn boundary_term_batch(
    f: &WavePacketSum,
    ws: &[RadialWeight],
    horizon: f64,
    plan: &QuadraturePlan,
) -> Result<Vec<f64>> {
    positive("T", horizon)?;
    let plus = flux_batch(f, ws, horizon, plan)?;
    let minus = flux_batch(f, ws, -horizon, plan)?;
    Ok(plus.iter().zip(&minus).map(|(p, m)| 0.5 * (p - m)).collect())
}

/// Remainders of the rescaled identity, integrated over all time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Remainders {
    /// `∫∫ |∂_rφ_R| |∇_τ u|² / r`
    pub tangential: f64,
    /// `∫∫ |Δ²φ_R| |u|²`
    pub bilaplacian: f64,
}

pub fn remainder_terms(
    f: &WavePacketSum,
    w_base: &RadialWeight,
    radius: f64,
    plan: &QuadraturePlan,
) -> Result<Remainders> {
    validate(plan, f)?;
    positive("R", radius)?;
    let n = f.dimension();
    w_base.check_decay_hypotheses(n)?;
    let w = w_base.rescale(radius)?;
    let mut k = Kernels::new();
    k.breaks = w.breakpoints();
    let tan = k.push(|r, s| w.derivatives(r)[1].abs() / r * s[TANGENTIAL]);
    let bil = k.push(|r, s| laplacians(&w.derivatives(r), r, n).1.abs() * s[MASS]);
    let tau = plan.horizon * time_scale(f, w.scale());
    let v = space_time_integrals(f, plan, &k, TimeRange::Line(tau))?;
    Ok(Remainders {
        tangential: v[tan],
        bilaplacian: v[bil],
    })
}

/// The bracket `lower ≤ middle ≤ upper` for the weight `ψ_{k,R}`, with the
/// pieces of the all-time identity for the same weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    /// `(1/R)∫∫_{B_R}|∂_r u|²`
    pub lower: f64,
    /// `∫∫ψ″_{k,R}|∂_r u|²`
    pub middle: f64,
    /// `(1/R)∫∫_{B_{(k+1)R/k}}|∂_r u|²`
    pub upper: f64,
    /// `∫∫(ψ′_{k,R}/r)|∇_τ u|²`
    pub tangential: f64,
    /// `∫∫|u|²Δ²ψ_{k,R}`, signed
    pub bilaplacian: f64,
}

impl Sandwich {
    /// Full bulk term; equals `2πψ′(∞)‖f‖²_{Ḣ^{1/2}}` over all time.
    pub fn bulk(&self) -> f64 {
        self.middle + self.tangential - 0.25 * self.bilaplacian
    }
}

pub fn sandwich(f: &WavePacketSum, k: u32, radius: f64, plan: &QuadraturePlan) -> Result<Sandwich> {
    validate(plan, f)?;
    positive("R", radius)?;
    let n = f.dimension();
    let w = make_psi_k(k)?.rescale(radius)?;
    let outer = radius * (k as f64 + 1.0) / k as f64;
    let mut ks = Kernels::new();
    ks.breaks = vec![radius, outer];
    let lower = ks.push(move |r, s| if r < radius { s[RADIAL] } else { 0.0 });
    let upper = ks.push(move |r, s| if r < outer { s[RADIAL] } else { 0.0 });
    let middle = ks.push(|r, s| w.derivatives(r)[2] * s[RADIAL]);
    let tan = ks.push(|r, s| w.derivatives(r)[1] / r * s[TANGENTIAL]);
    let bil = ks.push(|r, s| laplacians(&w.derivatives(r), r, n).1 * s[MASS]);
    let tau = plan.horizon * time_scale(f, outer);
    let v = space_time_integrals(f, plan, &ks, TimeRange::Line(tau))?;
    Ok(Sandwich {
        lower: v[lower] / radius,
        middle: v[middle],
        upper: v[upper] / radius,
        tangential: v[tan],
        bilaplacian: v[bil],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WavePacket;
    use crate::weights::{constant_weight, make_psi_eps};
    use num_complex::Complex64;

    fn gaussian(n: usize) -> WavePacketSum {
        WavePacketSum::single(WavePacket::centered(n, 1.0).unwrap())
    }

    fn moving_1d() -> WavePacketSum {
        WavePacketSum::new(
            1,
            vec![
                WavePacket::new(Complex64::new(1.0, 0.3), 1.2, vec![0.4], vec![0.15]).unwrap(),
                WavePacket::new(Complex64::new(-0.5, 0.2), 0.8, vec![-0.7], vec![-0.1]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_datum_gives_zero() {
        let plan = QuadraturePlan::default();
        let z = WavePacketSum::zero(2);
        let w = make_psi_eps(1.0).unwrap();
        assert_eq!(smoothing_profile(&z, 2.0, &plan).unwrap(), 0.0);
        assert_eq!(morawetz_lhs(&z, &w, 1.0, &plan).unwrap(), 0.0);
        assert_eq!(flux(&z, &w, 1.0, &plan).unwrap(), 0.0);
        let r = remainder_terms(&z, &make_psi_k(2).unwrap(), 4.0, &plan).unwrap();
        assert_eq!((r.tangential, r.bilaplacian), (0.0, 0.0));
    }

    #[test]
    fn constant_weight_has_no_bulk() {
        let plan = QuadraturePlan::default();
        let v = morawetz_lhs(&moving_1d(), &constant_weight(3.0), 0.5, &plan).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn flux_of_real_data() {
        let plan = QuadraturePlan::default();
        let f = gaussian(1);
        let w = make_psi_eps(1.0).unwrap();
        assert_eq!(flux(&f, &w, 0.0, &plan).unwrap(), 0.0);
        let p = flux(&f, &w, 1.3, &plan).unwrap();
        let m = flux(&f, &w, -1.3, &plan).unwrap();
        assert!(p > 0.0);
        assert!((p + m).abs() <= 1e-14 * p);
    }

    #[test]
    fn flux_matches_line_quadrature() {
        // Independent oracle: plain trapezoid on a fine line grid.
        let plan = QuadraturePlan::default();
        let f = moving_1d();
        let w = make_psi_eps(1.0).unwrap();
        let t = 0.8;
        let ev = evolve_analytic(&f, t);
        let h = 1e-3;
        let mut g = [Complex64::new(0.0, 0.0); 1];
        let q: f64 = (-40_000..=40_000)
            .map(|i| {
                let x = i as f64 * h;
                let u = ev.value_and_gradient(&[x], &mut g);
                let slope = x / (1.0 + x * x).sqrt();
                (u.conj() * g[0]).im * slope * h
            })
            .sum();
        let v = flux(&f, &w, t, &plan).unwrap();
        assert!((v - q).abs() < 1e-10 * q.abs().max(1e-3), "{v} vs {q}");
    }

    #[test]
    fn identity_in_one_dimension() {
        let plan = QuadraturePlan::default();
        let f = moving_1d();
        let w = make_psi_eps(1.0).unwrap();
        let lhs = morawetz_lhs(&f, &w, 2.0, &plan).unwrap();
        let rhs = boundary_term(&f, &w, 2.0, &plan).unwrap();
        assert!((lhs - rhs).abs() <= 1e-7 * lhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn schedule_accumulates_slabs() {
        let plan = QuadraturePlan::default();
        let f = moving_1d();
        let ws = [make_psi_eps(1.0).unwrap(), make_psi_k(2).unwrap()];
        let sched = morawetz_lhs_schedule(&f, &ws, &[0.5, 1.5], &plan).unwrap();
        let direct = morawetz_lhs_batch(&f, &ws, 1.5, &plan).unwrap();
        for i in 0..2 {
            assert!((sched[1][i] - direct[i]).abs() <= 1e-8 * direct[i].abs());
        }
        assert!(morawetz_lhs_schedule(&f, &ws, &[1.0, 1.0], &plan).is_err());
    }

    #[test]
    fn one_dimensional_profiles_coincide() {
        let plan = QuadraturePlan::default();
        let p = profiles(&moving_1d(), 3.0, &plan).unwrap();
        assert_eq!(p.full, p.radial);
    }

    #[test]
    fn radial_datum_has_no_tangential_part() {
        let plan = QuadraturePlan::default();
        let p = profiles(&gaussian(2), 2.0, &plan).unwrap();
        assert!((p.full - p.radial).abs() <= 1e-12 * p.full);
    }

    #[test]
    fn one_dimensional_remainder_has_no_tangential_part() {
        let plan = QuadraturePlan::default();
        // odd datum: f̂(0) = 0 keeps the absolute bilaplacian term finite in 1D
        let f = WavePacketSum::new(
            1,
            vec![
                WavePacket::new(Complex64::new(1.0, 0.0), 1.0, vec![0.5], vec![0.0]).unwrap(),
                WavePacket::new(Complex64::new(-1.0, 0.0), 1.0, vec![-0.5], vec![0.0]).unwrap(),
            ],
        )
        .unwrap();
        let r = remainder_terms(&f, &make_psi_k(2).unwrap(), 2.0, &plan).unwrap();
        assert_eq!(r.tangential, 0.0);
        assert!(r.bilaplacian > 0.0);
    }
}
