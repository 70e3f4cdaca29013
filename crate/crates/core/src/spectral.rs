//! Discrete Fourier transforms normalized to approximate the continuous
//! transform, homogeneous Sobolev norms, and the spectral free propagator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{invalid, Result};
use crate::model::{GridField, SummationMode, WavePacketSum};
use crate::propagator::evolve_analytic;
use crate::quad::{clip_breaks, ordered_sum, sphere_integral, Adaptive, Tolerance};

/// Spectrum on `ξ ∈ (1/2L)·{-N/2, …, N/2-1}^n`, centered order, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumField {
    dimension: usize,
    half_width: f64,
    points: usize,
    samples: Vec<Complex64>,
    time: f64,
}

impl SpectrumField {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Frequency spacing `1/(2L)`.
    pub fn spacing(&self) -> f64 {
        0.5 / self.half_width
    }

    /// Frequency of centered index `i` along any axis.
    pub fn frequency(&self, i: usize) -> f64 {
        (i as f64 - (self.points / 2) as f64) * self.spacing()
    }

    /// Value at the frequency with centered multi-index `idx`.
    pub fn at(&self, idx: &[usize]) -> Complex64 {
        let flat = idx.iter().fold(0, |acc, &i| acc * self.points + i);
        self.samples[flat]
    }

    fn squared_frequency(&self, flat: usize) -> f64 {
        let mut rest = flat;
        let mut s = 0.0;
        for _ in 0..self.dimension {
            let xi = self.frequency(rest % self.points);
            s += xi * xi;
            rest /= self.points;
        }
        s
    }

    /// Discrete `Σ |f̂|² Δξⁿ`.
    pub fn l2_norm_sq(&self) -> f64 {
        let cell = self.spacing().powi(self.dimension as i32);
        ordered_sum(self.samples.iter().map(|z| z.norm_sqr()), SummationMode::Compensated) * cell
    }
}

/// In-place n-dimensional FFT over a row-major cube of side `points`.
fn fft_nd(data: &mut [Complex64], dimension: usize, points: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(points, direction);
    let mut line = vec![Complex64::new(0.0, 0.0); points];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dimension {
        let stride = points.pow((dimension - 1 - axis) as u32);
        let block = stride * points;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }
}

/// Multi-index of a flat row-major offset, first axis first.
fn unflatten(mut flat: usize, dimension: usize, points: usize, out: &mut [usize]) {
    for d in (0..dimension).rev() {
        out[d] = flat % points;
        flat /= points;
    }
}

/// Continuous-convention transform of grid samples:
/// `f̂(ξ_m) ≈ hⁿ Σ_j f(x_j) exp(-2πi x_j·ξ_m)` with `x_j = -L + j h`.
pub fn forward_transform(g: &GridField, aliasing_threshold: f64) -> Result<SpectrumField> {
    g.check_aliasing(aliasing_threshold)?;
    let (n, p) = (g.dimension, g.points);
    let mut data = g.samples.clone();
    fft_nd(&mut data, n, p, FftDirection::Forward);
    // exp(-2πi (-L) ξ_m) = (-1)^m per axis, then reorder m = -N/2.. into centered slots.
    let h = g.spacing();
    let weight = h.powi(n as i32);
    let half = p / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    let mut idx = vec![0usize; n];
    for (flat, v) in data.iter().enumerate() {
        unflatten(flat, n, p, &mut idx);
        let mut target = 0;
        let mut parity = 0;
        for &k in idx.iter() {
            let centered = (k + half) % p;
            target = target * p + centered;
            parity += k;
        }
        let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
        out[target] = *v * (sign * weight);
    }
    Ok(SpectrumField {
        dimension: n,
        half_width: g.half_width,
        points: p,
        samples: out,
        time: g.time,
    })
}

/// Inverse of [`forward_transform`].
pub fn inverse_transform(s: &SpectrumField) -> Result<GridField> {
    let (n, p) = (s.dimension, s.points);
    let half = p / 2;
    let dxi = s.spacing();
    let weight = dxi.powi(n as i32);
    let mut data = vec![Complex64::new(0.0, 0.0); s.samples.len()];
    let mut idx = vec![0usize; n];
    for (flat, v) in s.samples.iter().enumerate() {
        unflatten(flat, n, p, &mut idx);
        let mut target = 0;
        let mut parity = 0;
        for &c in idx.iter() {
            let k = (c + half) % p;
            target = target * p + k;
            parity += k;
        }
        let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
        data[target] = *v * (sign * weight);
    }
    fft_nd(&mut data, n, p, FftDirection::Inverse);
    GridField::new(n, s.half_width, p, data, s.time)
}

/// Free evolution for a duration `t` by the multiplier `exp(-4π² i |ξ|² t)`;
/// the timestamp advances by `t`.
pub fn evolve_spectral(g: &GridField, t: f64, aliasing_threshold: f64) -> Result<GridField> {
    let mut spec = forward_transform(g, aliasing_threshold)?;
    for flat in 0..spec.samples.len() {
        let xi2 = spec.squared_frequency(flat);
        spec.samples[flat] *= Complex64::from_polar(1.0, -4.0 * PI * PI * xi2 * t);
    }
    spec.time = g.time + t;
    let out = inverse_transform(&spec)?;
    out.check_aliasing(aliasing_threshold)?;
    Ok(out)
}

impl GridField {
    /// Samples of the exact solution `u(t)` for packet data.
    pub fn from_datum(f: &WavePacketSum, half_width: f64, points: usize, t: f64) -> Result<Self> {
        let n = f.dimension();
        if !(1..=3).contains(&n) {
            return Err(invalid("dimension", "grids support n = 1, 2, 3"));
        }
        let ev = evolve_analytic(f, t);
        let h = 2.0 * half_width / points as f64;
        let total = points.pow(n as u32);
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let samples = (0..total)
            .map(|flat| {
                unflatten(flat, n, points, &mut idx);
                for d in 0..n {
                    x[d] = -half_width + idx[d] as f64 * h;
                }
                ev.value(&x)
            })
            .collect();
        GridField::new(n, half_width, points, samples, t)
    }

    /// Discrete `L²` distance to another grid of identical layout.
    pub fn l2_distance(&self, other: &GridField) -> f64 {
        let cell = self.spacing().powi(self.dimension as i32);
        let s = ordered_sum(
            self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm_sqr()),
            SummationMode::Compensated,
        );
        (s * cell).sqrt()
    }
}

fn check_order(s: f64, n: usize) -> Result<()> {
    if !(s.is_finite() && s > -(n as f64) / 2.0) {
        return Err(invalid(
            "s",
            format!(
                "Sobolev order must exceed -n/2 = {} for integrability, got {s}",
                -(n as f64) / 2.0
            ),
        ));
    }
    Ok(())
}

/// `‖f‖²_{Ḣˢ} = ∫|f̂(ξ)|² |ξ|^{2s} dξ` for packet sums, by adaptive radial
/// quadrature of the closed-form spectrum over spherical shells.
pub fn hs_norm_sq(f: &WavePacketSum, s: f64) -> Result<f64> {
    let n = f.dimension();
    check_order(s, n)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    if n > 3 {
        return Err(invalid("dimension", "packet Sobolev norms are implemented for n ≤ 3"));
    }
    // |f̂_j|² ∝ exp(-|ξ - v|²/(2σ²)) with σ = √a / (2π).
    let k = 12.0;
    let mut breaks = Vec::new();
    let mut outer: f64 = 0.0;
    let mut sigma_min = f64::INFINITY;
    let mut peak = 0.0;
    for p in f.packets() {
        let sigma = p.width.sqrt() / (2.0 * PI);
        let c = p.momentum.iter().map(|v| v * v).sum::<f64>().sqrt();
        breaks.extend([c - k * sigma, c - 2.0 * sigma, c, c + 2.0 * sigma]);
        outer = outer.max(c + k * sigma);
        sigma_min = sigma_min.min(sigma);
        peak += p.amplitude.norm() * (PI / p.width).powf(0.5 * n as f64);
    }
    let breaks = clip_breaks(breaks, 0.0, outer);
    let gamma = 2.0 * s + n as f64 - 1.0;
    let rel = 1e-13;
    let abs = 1e-15 * peak * peak;
    let shell = |rho: f64| -> Result<f64> {
        let feature = sigma_min;
        let initial = angular_resolution(
            rho,
            feature,
            f.packets()
                .iter()
                .map(|p| p.momentum.iter().map(|v| v * v).sum::<f64>().sqrt()),
        );
        let v = sphere_integral(n, rho, initial, rel, abs, |xi| [f.transform(xi).norm_sqr()])?;
        Ok(v[0])
    };
    let adaptive = Adaptive::new(12, Tolerance::relative(1e-13), 4000, SummationMode::Compensated);
    // First panel: substitute ρ = b w^p so the ρ^γ endpoint behaviour becomes w^1.
    let b = breaks[1];
    let power = if gamma < 0.0 { 2.0 / (gamma + 1.0) } else { 1.0 };
    let head = adaptive.integrate(
        |w| {
            let rho = b * w.powf(power);
            let jac = b * power * w.powf(power - 1.0);
            Ok(vec![rho.powf(gamma) * shell(rho)? * jac])
        },
        &[0.0, 1.0],
    )?;
    let tail = if breaks.len() > 2 {
        adaptive.integrate(|rho| Ok(vec![rho.powf(gamma) * shell(rho)?]), &breaks[1..])?[0]
    } else {
        0.0
    };
    Ok(head[0] + tail)
}

/// Starting angular resolution for a shell of radius `r` when features of
/// size `feature` sit at distances `offsets` from the origin.
pub(crate) fn angular_resolution(r: f64, feature: f64, offsets: impl Iterator<Item = f64>) -> usize {
    let mut m: f64 = 16.0;
    for c in offsets {
        m = m.max(6.0 * 2.0 * PI * (r * c).sqrt() / feature);
    }
    (m.min(4096.0).ceil() as usize).next_power_of_two()
}

/// `Σ |f̂(ξ)|² |ξ|^{2s} Δξⁿ`; the `ξ = 0` bin is dropped for `s < 0` and weighs `0^{2s}` otherwise.
pub fn hs_norm_sq_spectrum(spec: &SpectrumField, s: f64) -> Result<f64> {
    check_order(s, spec.dimension)?;
    let cell = spec.spacing().powi(spec.dimension as i32);
    let terms = spec.samples.iter().enumerate().map(|(flat, z)| {
        let xi2 = spec.squared_frequency(flat);
        if xi2 == 0.0 {
            if s == 0.0 {
                z.norm_sqr()
            } else {
                0.0
            }
        } else {
            z.norm_sqr() * xi2.powf(s)
        }
    });
    Ok(ordered_sum(terms, SummationMode::Compensated) * cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WavePacket;

    fn gaussian_1d(l: f64, n: usize) -> GridField {
        let f = WavePacketSum::single(WavePacket::centered(1, 1.0).unwrap());
        GridField::from_datum(&f, l, n, 0.0).unwrap()
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = GridField::new(1, 5.0, 16, vec![Complex64::new(0.0, 0.0); 16], 0.0).unwrap();
        let s = forward_transform(&g, 1e-6).unwrap();
        assert!(s.samples().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gaussian_spectrum_at_origin() {
        let g = gaussian_1d(20.0, 1024);
        let s = forward_transform(&g, 1e-6).unwrap();
        let v = s.at(&[512]);
        assert_eq!(s.frequency(512), 0.0);
        assert!((v.re - PI.sqrt()).abs() <= 1e-10 && v.im.abs() < 1e-10);
        // Closed form √π exp(-π² ξ²) at a nonzero bin.
        let xi = s.frequency(530);
        assert!((s.at(&[530]).re - PI.sqrt() * (-PI * PI * xi * xi).exp()).abs() < 1e-12);
    }

    #[test]
    fn parseval_and_roundtrip() {
        let f = WavePacketSum::new(
            2,
            vec![
                WavePacket::new(Complex64::new(1.0, 0.5), 1.0, vec![0.5, -1.0], vec![0.2, 0.1]).unwrap(),
                WavePacket::new(Complex64::new(-0.3, 0.0), 2.0, vec![-1.0, 0.0], vec![0.0, -0.3]).unwrap(),
            ],
        )
        .unwrap();
        let g = GridField::from_datum(&f, 12.0, 64, 0.0).unwrap();
        let s = forward_transform(&g, 1e-6).unwrap();
        assert!((s.l2_norm_sq() - g.l2_norm_sq()).abs() <= 1e-12 * g.l2_norm_sq());
        let back = inverse_transform(&s).unwrap();
        assert!(back.l2_distance(&g) < 1e-13);
    }

    #[test]
    fn aliasing_is_reported() {
        let g = gaussian_1d(3.0, 64);
        assert!(matches!(
            forward_transform(&g, 1e-6),
            Err(crate::LabError::BoundaryMass { .. })
        ));
    }

    #[test]
    fn evolution_identity_and_unitarity() {
        let g = gaussian_1d(30.0, 512);
        let same = evolve_spectral(&g, 0.0, 1e-6).unwrap();
        assert!(same.l2_distance(&g) <= 1e-13);
        let later = evolve_spectral(&g, 0.8, 1e-6).unwrap();
        assert!((later.l2_norm_sq() - g.l2_norm_sq()).abs() <= 1e-13 * g.l2_norm_sq());
        assert_eq!(later.time(), 0.8);
    }

    #[test]
    fn spectral_matches_analytic_1d() {
        let f = WavePacketSum::single(WavePacket::centered(1, 1.0).unwrap());
        let g = GridField::from_datum(&f, 40.0, 4096, 0.0).unwrap();
        let evolved = evolve_spectral(&g, 0.7, 1e-6).unwrap();
        let exact = GridField::from_datum(&f, 40.0, 4096, 0.7).unwrap();
        assert!(evolved.l2_distance(&exact) <= 1e-8);
    }

    #[test]
    fn sobolev_half_of_gaussian() {
        for a in [0.5, 1.0, 3.0] {
            let f = WavePacketSum::single(WavePacket::centered(1, a).unwrap());
            let v = hs_norm_sq(&f, 0.5).unwrap();
            assert!((v - 0.5 / PI).abs() <= 1e-8 * 0.5 / PI, "a {a}: {v}");
        }
    }

    #[test]
    fn sobolev_order_validation() {
        let f = WavePacketSum::single(WavePacket::centered(2, 1.0).unwrap());
        assert!(hs_norm_sq(&f, -1.0).is_err());
        assert!(hs_norm_sq(&f, -0.5).is_ok());
    }

    #[test]
    fn negative_order_in_one_dimension() {
        // ∫|ξ|^{-1/2} (π/a) e^{-2π²ξ²/a} dξ = (π/a) Γ(1/4) (2π²/a)^{-1/4}
        let f = WavePacketSum::single(WavePacket::centered(1, 1.0).unwrap());
        let v = hs_norm_sq(&f, -0.25).unwrap();
        let gamma_quarter = 3.625_609_908_221_908;
        let exact = PI * gamma_quarter * (2.0 * PI * PI).powf(-0.25);
        assert!((v - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
    }
}
