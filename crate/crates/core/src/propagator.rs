//! Closed-form free evolution of packet sums, the radial/tangential gradient
//! split, and the large-time dispersive approximant.
//!
//! A packet `A exp(-a|x-x₀|² + i k·x)` with `k = 2πv` evolves to
//! `A β^{-n/2} exp(-a|y|²/β + i k·x - i|k|² t)`, `β = 1 + 4iat`,
//! `y = x - x₀ - 2kt`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, LabError, Result};
use crate::model::WavePacketSum;

/// `c · exp(-α|x|² + b·x)` with `Re α > 0`, stored through `ln c`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussTerm {
    pub log_coeff: Complex64,
    pub alpha: Complex64,
    pub linear: Vec<Complex64>,
}

impl GaussTerm {
    pub fn value(&self, x: &[f64]) -> Complex64 {
        let mut e = self.log_coeff;
        let mut r2 = 0.0;
        for (xi, bi) in x.iter().zip(&self.linear) {
            r2 += xi * xi;
            e += bi * xi;
        }
        (e - self.alpha * r2).exp()
    }

    /// `∫ g₁ conj(g₂) dx = c₁ c̄₂ (π/P)^{n/2} exp(B·B / 4P)`, `P = α₁ + ᾱ₂`, `B = b₁ + b̄₂`.
    pub fn inner(&self, other: &GaussTerm) -> Complex64 {
        let n = self.linear.len() as f64;
        let p = self.alpha + other.alpha.conj();
        let bb: Complex64 = self
            .linear
            .iter()
            .zip(&other.linear)
            .map(|(a, b)| {
                let s = a + b.conj();
                s * s
            })
            .sum();
        let log = self.log_coeff + other.log_coeff.conj() + bb / (4.0 * p) + 0.5 * n * (PI / p).ln();
        log.exp()
    }
}

/// `‖Σ terms‖²` from pairwise closed-form inner products.
pub fn gauss_norm_sq(terms: &[GaussTerm]) -> f64 {
    let mut acc = crate::quad::NeumaierSum::default();
    for a in terms {
        for b in terms {
            acc.add(a.inner(b).re);
        }
    }
    acc.total().max(0.0)
}

/// `‖Σ a - Σ b‖²` in closed form.
pub fn gauss_distance_sq(a: &[GaussTerm], b: &[GaussTerm]) -> f64 {
    let mut acc = crate::quad::NeumaierSum::default();
    for x in a {
        for y in a {
            acc.add(x.inner(y).re);
        }
        for y in b {
            acc.add(-2.0 * x.inner(y).re);
        }
    }
    for x in b {
        for y in b {
            acc.add(x.inner(y).re);
        }
    }
    acc.total().max(0.0)
}

/// Precomputed parameters of one evolved packet.
#[derive(Debug, Clone)]
struct EvolvedPacket {
    /// `A β^{-n/2} e^{i k·x₀}`.
    prefactor: Complex64,
    /// `a / β`.
    alpha: Complex64,
    /// Envelope center `x₀ + 2kt`.
    center: Vec<f64>,
    /// `k = 2πv`.
    wave: Vec<f64>,
    /// Standard deviation of `|u|²` per axis, `|β| / (2√a)`.
    sigma: f64,
    width: f64,
    origin: Vec<f64>,
    inv_beta: Complex64,
    /// `1/|β|²`
    inv_mod2: f64,
}

/// Pointwise evaluator of `u(t, ·)` for packet data.
#[derive(Debug, Clone)]
pub struct Evaluator {
    dimension: usize,
    time: f64,
    /// `1/4t` once every packet has spread, else `None`. The common chirp
    /// `e^{i|x|²/4t}` is then factored out of every packet so that relative
    /// phases stay accurate at large `|x|` and `|t|`.
    chirp: Option<f64>,
    packets: Vec<EvolvedPacket>,
    terms: Vec<GaussTerm>,
}

/// Exact solution operator at time `t` for packet data.
pub fn evolve_analytic(f: &WavePacketSum, t: f64) -> Evaluator {
    let n = f.dimension();
    let nf = n as f64;
    let mut packets = Vec::with_capacity(f.packets().len());
    let mut terms = Vec::with_capacity(f.packets().len());
    let mut amin = f64::INFINITY;
    for p in f.packets().iter().filter(|p| p.amplitude.norm() > 0.0) {
        let a = p.width;
        amin = amin.min(a);
        let beta = Complex64::new(1.0, 4.0 * a * t);
        let wave: Vec<f64> = p.momentum.iter().map(|v| 2.0 * PI * v).collect();
        let k2: f64 = wave.iter().map(|k| k * k).sum();
        let kx0: f64 = wave.iter().zip(&p.center).map(|(k, c)| k * c).sum();
        let center: Vec<f64> = p.center.iter().zip(&wave).map(|(c, k)| c + 2.0 * k * t).collect();
        let alpha = a / beta;
        let log_amp = p.amplitude.ln() - 0.5 * nf * beta.ln();
        let m2: f64 = center.iter().map(|c| c * c).sum();
        let linear = center
            .iter()
            .zip(&wave)
            .map(|(c, k)| 2.0 * alpha * c + Complex64::new(0.0, *k))
            .collect();
        terms.push(GaussTerm {
            log_coeff: log_amp + Complex64::new(0.0, -k2 * t) - alpha * m2,
            alpha,
            linear,
        });
        packets.push(EvolvedPacket {
            prefactor: (log_amp + Complex64::new(0.0, kx0)).exp(),
            alpha,
            center,
            wave,
            sigma: beta.norm() / (2.0 * a.sqrt()),
            width: a,
            origin: p.center.clone(),
            inv_beta: beta.inv(),
            inv_mod2: 1.0 / beta.norm_sqr(),
        });
    }
    let chirp = (4.0 * amin * t.abs() >= 1.0).then(|| 0.25 / t);
    Evaluator {
        dimension: n,
        time: t,
        chirp,
        packets,
        terms,
    }
}

/// Pointwise field data at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Densities {
    /// `|u|²`
    pub mass: f64,
    /// `|∂_r u|²`
    pub radial: f64,
    /// `|∇_τ u|²`
    pub tangential: f64,
    /// `Im(ū ∂_r u)`
    pub flux: f64,
}

impl Evaluator {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let mut u = Complex64::new(0.0, 0.0);
        for p in &self.packets {
            u += self.packet_value(p, x);
        }
        u * self.chirp_factor(x)
    }

    fn chirp_factor(&self, x: &[f64]) -> Complex64 {
        match self.chirp {
            Some(c) => Complex64::from_polar(1.0, c * x.iter().map(|v| v * v).sum::<f64>()),
            None => Complex64::new(1.0, 0.0),
        }
    }

    /// One packet at `x`, divided by the chirp when one is factored out.
    ///
    /// With `z = x - x₀`, `y = z - 2kt`, the exponent is `-a|y|²/|β|²` plus `i`
    /// times `(4a²t|z|² + k·z - |k|²t)/|β|² + k·x₀`; subtracting `|x|²/4t`
    /// leaves `(|x₀|² - 2x·x₀)/4t - |z|²/(4t|β|²) + (k·z - |k|²t)/|β|² + k·x₀`.
    #[allow(clippy::needless_range_loop)]
    fn packet_value(&self, p: &EvolvedPacket, x: &[f64]) -> Complex64 {
        let t = self.time;
        let a = p.width;
        let (mut y2, mut z2, mut kz, mut k2, mut xx0, mut x02) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..self.dimension {
            let y = x[i] - p.center[i];
            let z = x[i] - p.origin[i];
            y2 += y * y;
            z2 += z * z;
            kz += p.wave[i] * z;
            k2 += p.wave[i] * p.wave[i];
            xx0 += x[i] * p.origin[i];
            x02 += p.origin[i] * p.origin[i];
        }
        let re = -a * y2 * p.inv_mod2;
        let im = match self.chirp {
            Some(c) => c * (x02 - 2.0 * xx0) - c * z2 * p.inv_mod2 + (kz - k2 * t) * p.inv_mod2,
            None => (4.0 * a * a * t * z2 + kz - k2 * t) * p.inv_mod2,
        };
        p.prefactor * Complex64::new(re, im).exp()
    }

    /// `u(x)`; writes `∇u(x)` into `grad`.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [Complex64]) -> Complex64 {
        let n = self.dimension;
        grad[..n].fill(Complex64::new(0.0, 0.0));
        let mut u = Complex64::new(0.0, 0.0);
        for p in &self.packets {
            let v = self.packet_value(p, x);
            u += v;
            // ∇u/u = ik - 2αy, rewritten as (ik - 2a(x - x₀))/β to avoid
            // cancellation far from the envelope center.
            for i in 0..n {
                let z = x[i] - p.origin[i];
                grad[i] += v * Complex64::new(-2.0 * p.width * z, p.wave[i]) * p.inv_beta;
            }
        }
        let phase = self.chirp_factor(x);
        grad[..n].iter_mut().for_each(|g| *g *= phase);
        u * phase
    }

    /// `(∂_r u, |∇_τ u|²)` at `x ≠ 0`.
    pub fn gradient_split(&self, x: &[f64]) -> Result<(Complex64, f64)> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(LabError::OriginSingularity);
        }
        let d = self.densities_full(x, r);
        Ok((d.1 * self.chirp_factor(x), d.0.tangential))
    }

    fn densities_full(&self, x: &[f64], r: f64) -> (Densities, Complex64) {
        let n = self.dimension;
        let zero = Complex64::new(0.0, 0.0);
        let mut u = zero;
        let mut dr = zero;
        // (x ∧ ∇u)_{ij} for i < j: (0,1), (0,2), (1,2). Per packet this is
        // v·(x ∧ (ik + 2a x₀))/β, free of the radial part.
        let mut wedge = [zero; 3];
        for p in &self.packets {
            let v = self.packet_value(p, x);
            u += v;
            let mut radial = zero;
            let mut w = [zero; 3];
            for i in 0..n {
                let z = x[i] - p.origin[i];
                radial += Complex64::new(-2.0 * p.width * z, p.wave[i]) * x[i];
                w[i] = Complex64::new(2.0 * p.width * p.origin[i], p.wave[i]);
            }
            let vb = v * p.inv_beta;
            dr += vb * radial / r;
            if n >= 2 {
                wedge[0] += vb * (w[1] * x[0] - w[0] * x[1]);
            }
            if n == 3 {
                wedge[1] += vb * (w[2] * x[0] - w[0] * x[2]);
                wedge[2] += vb * (w[2] * x[1] - w[1] * x[2]);
            }
        }
        let tangential = wedge.iter().map(|c| c.norm_sqr()).sum::<f64>() / (r * r);
        (
            Densities {
                mass: u.norm_sqr(),
                radial: dr.norm_sqr(),
                tangential,
                flux: (u.conj() * dr).im,
            },
            dr,
        )
    }

    /// Mass, radial, tangential and flux densities at `x ≠ 0`. These are
    /// invariant under the common chirp, which is therefore never applied.
    pub(crate) fn densities(&self, x: &[f64]) -> Densities {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.densities_full(x, r).0
    }

    /// Closed-form Gaussian terms whose sum is `u(t, ·)`.
    pub fn gauss_terms(&self) -> &[GaussTerm] {
        &self.terms
    }

    /// `∫|u(t)|²` from overlap formulas.
    pub fn l2_norm_sq(&self) -> f64 {
        gauss_norm_sq(&self.terms)
    }

    /// `(|center_j|, σ_j)` for each packet envelope.
    pub(crate) fn envelopes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.packets.iter().map(|p| {
            let c = p.center.iter().map(|v| v * v).sum::<f64>().sqrt();
            (c, p.sigma)
        })
    }

    /// Starting trapezoid count for sphere integrals of the densities at
    /// radius `r`: enough nodes for each envelope, spread over `sigmas` widths,
    /// plus the oscillation of every pairwise interference term.
    ///
    /// Packet `j` has phase gradient `A_j x + b_j` with `A_j = 8a²t/|β|²`,
    /// `b_j = (k - 8a²t x₀)/|β|²`; the common chirp cancels in the densities.
    pub(crate) fn angular_nodes(&self, r: f64, sigmas: f64) -> usize {
        let mut envelope: f64 = 0.0;
        let lin: Vec<(f64, Vec<f64>)> = self
            .packets
            .iter()
            .map(|p| {
                envelope = envelope.max(0.5 * sigmas * r / p.sigma);
                let s = 8.0 * p.width * p.width * self.time * p.inv_mod2;
                let b = p
                    .wave
                    .iter()
                    .zip(&p.origin)
                    .map(|(k, x0)| k * p.inv_mod2 - s * x0)
                    .collect();
                (s, b)
            })
            .collect();
        let mut wave: f64 = 0.0;
        for (j, (aj, bj)) in lin.iter().enumerate() {
            for (al, bl) in &lin[j + 1..] {
                let db = bj.iter().zip(bl).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                wave = wave.max((aj - al).abs() * r + db);
            }
        }
        let m = 8.0 + envelope + 1.25 * wave * r;
        (m.min(4096.0).ceil() as usize).next_power_of_two()
    }

    /// Rough peak of `|u|² + |∇u|²`, used for absolute quadrature floors.
    pub(crate) fn density_scale(&self) -> f64 {
        let amp: f64 = self.packets.iter().map(|p| p.prefactor.norm()).sum();
        let grad = self
            .packets
            .iter()
            .map(|p| {
                let k = p.wave.iter().map(|v| v * v).sum::<f64>().sqrt();
                k + p.alpha.norm() * 2.0 * p.sigma
            })
            .fold(0.0, f64::max);
        amp * amp * (1.0 + grad * grad)
    }
}

/// Free function form of [`Evaluator::gradient_split`].
pub fn gradient_split(ev: &Evaluator, x: &[f64]) -> Result<(Complex64, f64)> {
    ev.gradient_split(x)
}

/// `e^{∓inπ/4} e^{±i|x|²/4|t|} (4π|t|)^{-n/2} f̂(±x / 4π|t|)`, upper signs for `t > 0`.
#[derive(Debug, Clone)]
pub struct DispersiveApprox {
    datum: WavePacketSum,
    time: f64,
    terms: Vec<GaussTerm>,
}

pub fn dispersive_approx(f: &WavePacketSum, t: f64) -> Result<DispersiveApprox> {
    if t == 0.0 || !t.is_finite() {
        return Err(invalid("t", "dispersive approximant needs a nonzero finite time"));
    }
    let n = f.dimension() as f64;
    let sign = t.signum();
    let tau = t.abs();
    let kappa = sign / (4.0 * PI * tau);
    let mut terms = Vec::with_capacity(f.packets().len());
    for p in f.packets().iter().filter(|p| p.amplitude.norm() > 0.0) {
        let a = p.width;
        // exponent of f̂ at ξ = κx plus the chirp ±i|x|²/4τ
        let alpha = Complex64::new(PI * PI * kappa * kappa / a, -sign / (4.0 * tau));
        let linear = p
            .center
            .iter()
            .zip(&p.momentum)
            .map(|(c, v)| Complex64::new(2.0 * PI * PI * kappa * v / a, -2.0 * PI * kappa * c))
            .collect();
        let v2: f64 = p.momentum.iter().map(|v| v * v).sum();
        let vc: f64 = p.momentum.iter().zip(&p.center).map(|(v, c)| v * c).sum();
        let log_coeff = p.amplitude.ln() + 0.5 * n * (PI / a).ln() - 0.5 * n * (4.0 * PI * tau).ln()
            + Complex64::new(-PI * PI * v2 / a, 2.0 * PI * vc - sign * n * PI / 4.0);
        terms.push(GaussTerm {
            log_coeff,
            alpha,
            linear,
        });
    }
    Ok(DispersiveApprox {
        datum: f.clone(),
        time: t,
        terms,
    })
}

impl DispersiveApprox {
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Direct evaluation from the closed-form transform.
    pub fn value(&self, x: &[f64]) -> Complex64 {
        let n = self.datum.dimension() as f64;
        let sign = self.time.signum();
        let tau = self.time.abs();
        let xi: Vec<f64> = x.iter().map(|v| sign * v / (4.0 * PI * tau)).collect();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let phase = Complex64::new(0.0, -sign * n * PI / 4.0 + sign * r2 / (4.0 * tau)).exp();
        phase * (4.0 * PI * tau).powf(-0.5 * n) * self.datum.transform(&xi)
    }

    pub fn gauss_terms(&self) -> &[GaussTerm] {
        &self.terms
    }
}

/// `‖u(t) - approximant(t)‖₂` in closed form.
pub fn dispersive_error(f: &WavePacketSum, t: f64) -> Result<f64> {
    let approx = dispersive_approx(f, t)?;
    let exact = evolve_analytic(f, t);
    Ok(gauss_distance_sq(exact.gauss_terms(), approx.gauss_terms()).sqrt())
}
