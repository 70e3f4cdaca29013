//! Radial multipliers ψ(|x|) with analytic radial derivatives through order four.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, LabError, Result};
use crate::quad::GaussLegendre;

/// A radial profile `r ↦ ψ(r)`, `r ≥ 0`, with its first four derivatives.
pub trait RadialProfile: Send + Sync + fmt::Debug {
    /// `[ψ, ψ′, ψ″, ψ‴, ψ⁗]` at `r`.
    fn derivatives(&self, r: f64) -> [f64; 5];

    /// `lim_{r→∞} ψ′(r)`.
    fn slope_at_infinity(&self) -> f64;

    /// Radii where the profile changes character; used to seed quadrature panels.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn label(&self) -> String;
}

/// A radial profile composed with the scaling `ψ_R(r) = R ψ(r/R)`.
#[derive(Clone)]
pub struct RadialWeight {
    profile: Arc<dyn RadialProfile>,
    scale: f64,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialWeight")
            .field("label", &self.label())
            .field("scale", &self.scale)
            .finish()
    }
}

impl RadialWeight {
    pub fn from_profile(profile: Arc<dyn RadialProfile>) -> Self {
        Self { profile, scale: 1.0 }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn label(&self) -> String {
        if self.scale == 1.0 {
            self.profile.label()
        } else {
            format!("{}@R={}", self.profile.label(), self.scale)
        }
    }

    pub fn derivatives(&self, r: f64) -> [f64; 5] {
        let s = self.scale;
        let d = self.profile.derivatives(r / s);
        [d[0] * s, d[1], d[2] / s, d[3] / (s * s), d[4] / (s * s * s)]
    }

    pub fn slope_at_infinity(&self) -> f64 {
        self.profile.slope_at_infinity()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.profile.breakpoints().into_iter().map(|b| b * self.scale).collect()
    }

    /// `R ψ(r/R)`; composes multiplicatively with earlier rescalings.
    pub fn rescale(&self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("R", format!("rescale radius must be positive, got {radius}")));
        }
        Ok(Self {
            profile: self.profile.clone(),
            scale: self.scale * radius,
        })
    }

    /// `(Δψ, Δ²ψ)` of `ψ(|x|)` in `ℝⁿ` at radius `r > 0`.
    pub fn radial_laplacians(&self, r: f64, n: usize) -> Result<(f64, f64)> {
        if r <= 0.0 {
            return Err(LabError::OriginSingularity);
        }
        Ok(laplacians(&self.derivatives(r), r, n))
    }

    /// Checks `∂_rψ ≤ C` and `|Δ²ψ| ≤ C/(1+r)³` on a logarithmic lattice.
    pub fn check_decay_hypotheses(&self, n: usize) -> Result<()> {
        let lattice: Vec<f64> = (0..=120)
            .map(|i| 10f64.powf(-2.0 + 8.0 * i as f64 / 120.0) * self.scale)
            .collect();
        let slope: Vec<f64> = lattice.iter().map(|&r| self.derivatives(r)[1]).collect();
        let bil: Vec<f64> = lattice
            .iter()
            .map(|&r| {
                let (_, b) = laplacians(&self.derivatives(r), r, n);
                b.abs() * (1.0 + r / self.scale).powi(3) * self.scale.powi(3)
            })
            .collect();
        let fail = |reason: String| LabError::InvalidWeight {
            label: self.label(),
            reason,
        };
        if slope.iter().chain(&bil).any(|v| !v.is_finite()) {
            return Err(fail("non-finite derivative on the check lattice".into()));
        }
        // Bounded means the last decade does not exceed the earlier maximum.
        let split = lattice.len() - 16;
        let head = |v: &[f64]| v[..split].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let tail = |v: &[f64]| v[split..].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if tail(&slope) > 2.0 * head(&slope) + 1e-12 {
            return Err(fail("radial derivative is unbounded".into()));
        }
        if tail(&bil) > 2.0 * head(&bil) + 1e-12 {
            return Err(fail("bilaplacian decays slower than (1+r)^-3".into()));
        }
        Ok(())
    }
}

pub(crate) fn laplacians(d: &[f64; 5], r: f64, n: usize) -> (f64, f64) {
    let m = n as f64 - 1.0;
    let lap = d[2] + m * d[1] / r;
    let c = m * (n as f64 - 3.0);
    let bil = d[4] + 2.0 * m * d[3] / r + c * (d[2] * r - d[1]) / (r * r * r);
    (lap, bil)
}

/// `ψ_ε(r) = √(ε² + r²)`.
#[derive(Debug, Clone, Copy)]
pub struct SoftenedDistance {
    eps: f64,
}

impl RadialProfile for SoftenedDistance {
    fn derivatives(&self, r: f64) -> [f64; 5] {
        let e2 = self.eps * self.eps;
        let s2 = e2 + r * r;
        let s = s2.sqrt();
        let s3 = s2 * s;
        let s5 = s3 * s2;
        let s7 = s5 * s2;
        [
            s,
            r / s,
            e2 / s3,
            -3.0 * e2 * r / s5,
            3.0 * e2 * (4.0 * r * r - e2) / s7,
        ]
    }

    fn slope_at_infinity(&self) -> f64 {
        1.0
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.eps]
    }

    fn label(&self) -> String {
        format!("psi_eps({})", self.eps)
    }
}

pub fn make_psi_eps(eps: f64) -> Result<RadialWeight> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("psi_eps parameter must be positive, got {eps}")));
    }
    Ok(RadialWeight::from_profile(Arc::new(SoftenedDistance { eps })))
}

/// Constant weight: every derivative vanishes.
#[derive(Debug, Clone, Copy)]
pub struct ConstantProfile {
    value: f64,
}

impl RadialProfile for ConstantProfile {
    fn derivatives(&self, _r: f64) -> [f64; 5] {
        [self.value, 0.0, 0.0, 0.0, 0.0]
    }

    fn slope_at_infinity(&self) -> f64 {
        0.0
    }

    fn label(&self) -> String {
        format!("constant({})", self.value)
    }
}

pub fn constant_weight(value: f64) -> RadialWeight {
    RadialWeight::from_profile(Arc::new(ConstantProfile { value }))
}

/// Smooth step `q: [0,1] → [0,1]`, `q = B(1-s) / (B(s) + B(1-s))`, `B(s) = e^{-1/s}`.
/// Returns `(q, q′, q″)`.
pub fn transition(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = 1.0 - s;
    let g = 1.0 / u - 1.0 / s;
    let q = 1.0 / (1.0 + g.exp());
    // q(1-q) = 1 / (4 cosh²(g/2)), finite for any g.
    let ch = (0.5 * g).cosh();
    let p = 0.25 / (ch * ch);
    let g1 = 1.0 / (u * u) + 1.0 / (s * s);
    let g2 = 2.0 / (u * u * u) - 2.0 / (s * s * s);
    let q1 = -p * g1;
    let q2 = if p == 0.0 {
        0.0
    } else {
        p * (g1 * g1 * (0.5 * g).tanh() - g2)
    };
    (q, q1, q2)
}

const BAND_PANELS: usize = 128;
const BAND_ORDER: usize = 16;

/// `h_k` together with cached cumulative integrals over its transition band.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    k: u32,
    rule: Arc<GaussLegendre>,
    /// `∫_0^{e/P} q` at panel edges `e = 0..=P`.
    cum_q: Vec<f64>,
    /// `∫_0^{e/P} τ q(τ) dτ` at panel edges.
    cum_tq: Vec<f64>,
}

impl BumpProfile {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "bump index must be at least 1"));
        }
        let rule = GaussLegendre::cached(BAND_ORDER);
        let mut cum_q = vec![0.0; BAND_PANELS + 1];
        let mut cum_tq = vec![0.0; BAND_PANELS + 1];
        let h = 1.0 / BAND_PANELS as f64;
        for e in 0..BAND_PANELS {
            let (a, b) = (e as f64 * h, (e + 1) as f64 * h);
            cum_q[e + 1] = cum_q[e] + rule.integrate(a, b, |s| transition(s).0);
            cum_tq[e + 1] = cum_tq[e] + rule.integrate(a, b, |s| s * transition(s).0);
        }
        Ok(Self { k, rule, cum_q, cum_tq })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Outer edge `(k+1)/k` of the support.
    pub fn support(&self) -> f64 {
        1.0 + 1.0 / self.k as f64
    }

    /// `h_k(r)`, even in `r`.
    pub fn value(&self, r: f64) -> f64 {
        transition(self.k as f64 * (r.abs() - 1.0)).0
    }

    /// `∫_0^σ q` and `∫_0^σ τ q(τ) dτ` for `σ ∈ [0, 1]`.
    fn band_integrals(&self, sigma: f64) -> (f64, f64) {
        let h = 1.0 / BAND_PANELS as f64;
        let e = ((sigma / h).floor() as usize).min(BAND_PANELS);
        let lo = e as f64 * h;
        let mut q = self.cum_q[e];
        let mut tq = self.cum_tq[e];
        if sigma > lo {
            q += self.rule.integrate(lo, sigma, |s| transition(s).0);
            tq += self.rule.integrate(lo, sigma, |s| s * transition(s).0);
        }
        (q, tq)
    }

    /// `∫_0^∞ h_k = 1 + 1/(2k)`, exact because `q(s) + q(1-s) = 1`.
    pub fn mass(&self) -> f64 {
        1.0 + 0.5 / self.k as f64
    }
}

impl RadialProfile for BumpProfile {
    fn derivatives(&self, r: f64) -> [f64; 5] {
        let k = self.k as f64;
        if r <= 1.0 {
            return [0.5 * r * r, r, 1.0, 0.0, 0.0];
        }
        let edge = self.support();
        if r >= edge {
            let (_, tq) = self.band_integrals(1.0);
            let psi_edge = 0.5 + 1.0 / k + (0.5 - tq) / (k * k);
            let slope = self.mass();
            return [psi_edge + slope * (r - edge), slope, 0.0, 0.0, 0.0];
        }
        let sigma = k * (r - 1.0);
        let (q, q1, q2) = transition(sigma);
        let (cq, ctq) = self.band_integrals(sigma);
        // ∫_0^σ ∫_0^τ q = σ Q(σ) - ∫_0^σ τ q(τ) dτ
        let double = sigma * cq - ctq;
        [0.5 + (r - 1.0) + double / (k * k), 1.0 + cq / k, q, k * q1, k * k * q2]
    }

    fn slope_at_infinity(&self) -> f64 {
        self.mass()
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![1.0, self.support()]
    }

    fn label(&self) -> String {
        format!("psi_k({})", self.k)
    }
}

/// `ψ_k(r) = ∫_0^r (r-s) h_k(s) ds`.
pub fn make_psi_k(k: u32) -> Result<RadialWeight> {
    Ok(RadialWeight::from_profile(Arc::new(BumpProfile::new(k)?)))
}

pub fn rescale(w: &RadialWeight, radius: f64) -> Result<RadialWeight> {
    w.rescale(radius)
}

pub fn radial_laplacians(w: &RadialWeight, r: f64, n: usize) -> Result<(f64, f64)> {
    w.radial_laplacians(r, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn psi_eps_values() {
        let w = make_psi_eps(1.0).unwrap();
        let d = w.derivatives(0.0);
        assert_eq!((d[0], d[1], d[2]), (1.0, 0.0, 1.0));
        let d = w.derivatives(3.0);
        assert!(rel(d[0], 10f64.sqrt()) < 1e-15);
        assert!(rel(d[1], 3.0 / 10f64.sqrt()) < 1e-15);
        assert_eq!(w.slope_at_infinity(), 1.0);
        assert!(make_psi_eps(0.0).is_err());
        assert!(make_psi_eps(-1.0).is_err());
    }

    #[test]
    fn psi_k_inside_unit_ball() {
        for k in [1, 2, 5] {
            let d = make_psi_k(k).unwrap().derivatives(0.5);
            assert_eq!(d, [0.125, 0.5, 1.0, 0.0, 0.0]);
        }
        assert!(make_psi_k(0).is_err());
    }

    #[test]
    fn psi_k_slope_bounds() {
        for k in [1, 2, 3, 8] {
            let w = make_psi_k(k).unwrap();
            let s = w.slope_at_infinity();
            assert!(s >= 1.0 && s <= (k as f64 + 1.0) / k as f64);
            assert_eq!(w.derivatives(5.0)[1], s);
        }
    }

    #[test]
    fn band_cache_matches_symmetry() {
        let b = BumpProfile::new(3).unwrap();
        let (q, _) = b.band_integrals(1.0);
        assert!((q - 0.5).abs() < 1e-15);
        // ψ is continuous across both band edges.
        for edge in [1.0, b.support()] {
            let lo = b.derivatives(edge - 1e-12);
            let hi = b.derivatives(edge + 1e-12);
            for j in 0..3 {
                assert!((lo[j] - hi[j]).abs() < 1e-10, "edge {edge} order {j}");
            }
        }
    }

    #[test]
    fn transition_is_a_partition() {
        for i in 1..100 {
            let s = i as f64 / 100.0;
            let (a, a1, _) = transition(s);
            let (b, b1, _) = transition(1.0 - s);
            assert!((a + b - 1.0).abs() < 1e-15);
            assert!((a1 - b1).abs() < 1e-10 * a1.abs().max(1.0));
        }
        assert_eq!(transition(0.0), (1.0, 0.0, 0.0));
        assert_eq!(transition(1.0), (0.0, 0.0, 0.0));
        let (_, d1, d2) = transition(1e-6);
        assert!(d1.is_finite() && d2.is_finite());
    }

    #[test]
    fn psi_k_second_derivative_matches_difference() {
        let w = make_psi_k(2).unwrap();
        let h = 1e-4;
        let fd = (w.derivatives(1.2 + h)[1] - w.derivatives(1.2 - h)[1]) / (2.0 * h);
        assert!(rel(fd, w.derivatives(1.2)[2]) <= 1e-5);
    }

    #[test]
    fn rescale_identity_and_homogeneity() {
        let w = make_psi_k(2).unwrap();
        let same = w.rescale(1.0).unwrap();
        for r in [0.3, 1.2, 4.0] {
            assert_eq!(w.derivatives(r), same.derivatives(r));
        }
        let eps = make_psi_eps(0.5).unwrap().rescale(3.0).unwrap();
        let direct = make_psi_eps(1.5).unwrap();
        for r in [0.0, 0.7, 2.0, 40.0] {
            let (a, b) = (eps.derivatives(r), direct.derivatives(r));
            for j in 0..5 {
                assert!((a[j] - b[j]).abs() <= 1e-14 * a[j].abs().max(1.0), "r {r} j {j}");
            }
        }
        for radius in [1.0, 10.0, 100.0] {
            assert_eq!(w.rescale(radius).unwrap().slope_at_infinity(), w.slope_at_infinity());
        }
        assert!(w.rescale(0.0).is_err());
        assert!(w.rescale(-2.0).is_err());
    }

    #[test]
    fn bilaplacian_tail_of_psi_k() {
        let w = make_psi_k(2).unwrap();
        let s = w.slope_at_infinity();
        for n in 1..=3usize {
            for r in [2.0, 3.5, 10.0] {
                let (_, b) = w.radial_laplacians(r, n).unwrap();
                let c = -s * (n as f64 - 1.0) * (n as f64 - 3.0);
                assert!((b - c / r.powi(3)).abs() < 1e-14, "n {n} r {r}");
            }
        }
        assert_eq!(w.radial_laplacians(0.0, 2), Err(LabError::OriginSingularity));
    }

    #[test]
    fn bilaplacian_matches_cartesian_stencil() {
        // 4th-order five-point Laplacian applied twice to √(1+|x|²) in 2D.
        let f = |x: f64, y: f64| (1.0 + x * x + y * y).sqrt();
        let h = 1e-2;
        let lap = |g: &dyn Fn(f64, f64) -> f64, x: f64, y: f64| {
            let d2 = |p: &dyn Fn(f64) -> f64| {
                (-p(2.0 * h) + 16.0 * p(h) - 30.0 * p(0.0) + 16.0 * p(-h) - p(-2.0 * h)) / (12.0 * h * h)
            };
            d2(&|s| g(x + s, y)) + d2(&|s| g(x, y + s))
        };
        let lap_f = |x: f64, y: f64| lap(&f, x, y);
        let stencil = lap(&lap_f, 1.0, 0.0);
        let w = make_psi_eps(1.0).unwrap();
        let (lp, bil) = w.radial_laplacians(1.0, 2).unwrap();
        assert!(rel(lap_f(1.0, 0.0), lp) < 1e-8);
        assert!(rel(stencil, bil) <= 1e-4, "stencil {stencil} analytic {bil}");
    }

    #[test]
    fn decay_hypotheses() {
        for n in 1..=3 {
            make_psi_k(2).unwrap().check_decay_hypotheses(n).unwrap();
            make_psi_eps(1.0).unwrap().check_decay_hypotheses(n).unwrap();
        }
        #[derive(Debug)]
        struct Quartic;
        impl RadialProfile for Quartic {
            fn derivatives(&self, r: f64) -> [f64; 5] {
                [r.powi(4) / 4.0, r.powi(3), 3.0 * r * r, 6.0 * r, 6.0]
            }
            fn slope_at_infinity(&self) -> f64 {
                f64::INFINITY
            }
            fn label(&self) -> String {
                "quartic".into()
            }
        }
        let bad = RadialWeight::from_profile(Arc::new(Quartic));
        assert!(matches!(
            bad.check_decay_hypotheses(2),
            Err(LabError::InvalidWeight { .. })
        ));
    }
}
