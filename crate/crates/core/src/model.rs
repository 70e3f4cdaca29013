//! Domain types shared by every module: initial data, grid snapshots,
//! quadrature plans and verification reports.
//!
//! Fourier convention used throughout the crate:
//! `f̂(ξ) = ∫ exp(-2πi x·ξ) f(x) dx`, so `‖f‖²_{Ḣˢ} = ∫ |f̂(ξ)|² |ξ|^{2s} dξ`
//! and the free propagator acts on spectra by `exp(-4π² i |ξ|² t)`.
//! Packet momenta are frequencies in this convention.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, LabError, Result};

/// `amplitude · exp(-a|x - x₀|² + 2πi v·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub amplitude: Complex64,
    pub width: f64,
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl WavePacket {
    pub fn new(amplitude: Complex64, width: f64, center: Vec<f64>, momentum: Vec<f64>) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(invalid("width", format!("must be positive and finite, got {width}")));
        }
        if center.is_empty() {
            return Err(invalid("center", "dimension must be at least 1"));
        }
        if center.len() != momentum.len() {
            return Err(LabError::DimensionMismatch {
                expected: center.len(),
                found: momentum.len(),
            });
        }
        if !amplitude.re.is_finite()
            || !amplitude.im.is_finite()
            || center.iter().chain(&momentum).any(|v| !v.is_finite())
        {
            return Err(invalid("packet", "non-finite parameter"));
        }
        Ok(Self {
            amplitude,
            width,
            center,
            momentum,
        })
    }

    /// Real unit-amplitude packet centered at the origin at rest.
    pub fn centered(n: usize, width: f64) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), width, vec![0.0; n], vec![0.0; n])
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let mut d2 = 0.0;
        let mut phase = 0.0;
        for ((xi, ci), vi) in x.iter().zip(&self.center).zip(&self.momentum) {
            d2 += (xi - ci) * (xi - ci);
            phase += vi * xi;
        }
        self.amplitude * Complex64::new(-self.width * d2, 2.0 * PI * phase).exp()
    }

    /// Closed-form transform `A (π/a)^{n/2} exp(-π²|ξ-v|²/a - 2πi (ξ-v)·x₀)`.
    pub fn transform(&self, xi: &[f64]) -> Complex64 {
        let n = self.dimension() as f64;
        let mut d2 = 0.0;
        let mut phase = 0.0;
        for ((x, v), c) in xi.iter().zip(&self.momentum).zip(&self.center) {
            d2 += (x - v) * (x - v);
            phase += (x - v) * c;
        }
        self.amplitude
            * (PI / self.width).powf(0.5 * n)
            * Complex64::new(-PI * PI * d2 / self.width, -2.0 * PI * phase).exp()
    }
}

/// Superposition of Gaussian wave packets: the initial datum `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacketSum {
    dimension: usize,
    packets: Vec<WavePacket>,
}

impl WavePacketSum {
    pub fn new(dimension: usize, packets: Vec<WavePacket>) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        for p in &packets {
            if p.dimension() != dimension {
                return Err(LabError::DimensionMismatch {
                    expected: dimension,
                    found: p.dimension(),
                });
            }
        }
        Ok(Self { dimension, packets })
    }

    pub fn single(packet: WavePacket) -> Self {
        Self {
            dimension: packet.dimension(),
            packets: vec![packet],
        }
    }

    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            packets: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn packets(&self) -> &[WavePacket] {
        &self.packets
    }

    pub fn is_zero(&self) -> bool {
        self.packets.iter().all(|p| p.amplitude.norm() == 0.0)
    }

    /// Every amplitude real and every momentum zero, so `u(-t) = conj u(t)`.
    pub fn is_real(&self) -> bool {
        self.packets
            .iter()
            .all(|p| p.amplitude.im == 0.0 && p.momentum.iter().all(|&v| v == 0.0))
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        self.packets.iter().map(|p| p.value(x)).sum()
    }

    pub fn transform(&self, xi: &[f64]) -> Complex64 {
        self.packets.iter().map(|p| p.transform(xi)).sum()
    }

    /// `∫|f|²` from pairwise Gaussian overlap integrals.
    pub fn l2_norm_sq(&self) -> f64 {
        let n = self.dimension as f64;
        let mut total = crate::quad::NeumaierSum::default();
        for pj in &self.packets {
            for pl in &self.packets {
                let p = pj.width + pl.width;
                let mut sep2 = 0.0;
                let mut q2 = 0.0;
                let mut qm = 0.0;
                for i in 0..self.dimension {
                    let dx = pj.center[i] - pl.center[i];
                    sep2 += dx * dx;
                    let q = 2.0 * PI * (pj.momentum[i] - pl.momentum[i]);
                    let m = (pj.width * pj.center[i] + pl.width * pl.center[i]) / p;
                    q2 += q * q;
                    qm += q * m;
                }
                let mag = (PI / p).powf(0.5 * n) * (-(pj.width * pl.width / p) * sep2 - q2 / (4.0 * p)).exp();
                let overlap = pj.amplitude * pl.amplitude.conj() * Complex64::from_polar(mag, qm);
                total.add(overlap.re);
            }
        }
        total.total().max(0.0)
    }

    fn map_packets(&self, f: impl Fn(&WavePacket) -> WavePacket) -> Self {
        Self {
            dimension: self.dimension,
            packets: self.packets.iter().map(f).collect(),
        }
    }

    /// `f(x - shift)`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        self.map_packets(|p| {
            let phase: f64 = p.momentum.iter().zip(shift).map(|(v, s)| v * s).sum();
            WavePacket {
                amplitude: p.amplitude * Complex64::from_polar(1.0, -2.0 * PI * phase),
                center: p.center.iter().zip(shift).map(|(c, s)| c + s).collect(),
                ..p.clone()
            }
        })
    }

    /// `exp(2πi dv·x) f(x)`.
    pub fn boosted(&self, dv: &[f64]) -> Self {
        self.map_packets(|p| WavePacket {
            momentum: p.momentum.iter().zip(dv).map(|(v, d)| v + d).collect(),
            ..p.clone()
        })
    }

    /// `f(λx)`.
    pub fn dilated(&self, lambda: f64) -> Self {
        self.map_packets(|p| WavePacket {
            width: p.width * lambda * lambda,
            center: p.center.iter().map(|c| c / lambda).collect(),
            momentum: p.momentum.iter().map(|v| v * lambda).collect(),
            amplitude: p.amplitude,
        })
    }

    /// `c · f(x)`.
    pub fn scaled(&self, c: Complex64) -> Self {
        self.map_packets(|p| WavePacket {
            amplitude: p.amplitude * c,
            ..p.clone()
        })
    }

    /// Smallest radius containing the bulk of every packet envelope at `t = 0`.
    pub fn extent(&self) -> f64 {
        self.packets
            .iter()
            .map(|p| {
                let c = p.center.iter().map(|x| x * x).sum::<f64>().sqrt();
                c + 3.0 / (2.0 * p.width).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Samples of a complex field on the periodic box `[-L, L)^n`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub(crate) dimension: usize,
    pub(crate) half_width: f64,
    pub(crate) points: usize,
    pub(crate) samples: Vec<Complex64>,
    pub(crate) time: f64,
}

impl GridField {
    pub fn new(dimension: usize, half_width: f64, points: usize, samples: Vec<Complex64>, time: f64) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(invalid(
                "dimension",
                format!("grids support n = 1, 2, 3, not {dimension}"),
            ));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid("half_width", "must be positive"));
        }
        if points == 0 || !points.is_multiple_of(2) {
            return Err(invalid(
                "points",
                format!("must be a positive even integer, got {points}"),
            ));
        }
        let expected = points.pow(dimension as u32);
        if samples.len() != expected {
            return Err(invalid(
                "samples",
                format!("expected {expected} samples, found {}", samples.len()),
            ));
        }
        Ok(Self {
            dimension,
            half_width,
            points,
            samples,
            time,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
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

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Coordinate of grid index `j` along any axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Discrete `∫|u|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        let cell = self.spacing().powi(self.dimension as i32);
        crate::quad::ordered_sum(self.samples.iter().map(|z| z.norm_sqr()), SummationMode::Compensated) * cell
    }

    /// Fraction of the mass lying within `L/2` of the box boundary.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let total: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let n = self.points;
        let inner = 0.5 * self.half_width;
        let outer: f64 = self
            .samples
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                let mut rest = *idx;
                (0..self.dimension).any(|_| {
                    let j = rest % n;
                    rest /= n;
                    self.coordinate(j).abs() >= inner
                })
            })
            .map(|(_, z)| z.norm_sqr())
            .sum();
        outer / total
    }

    /// Fails with [`LabError::BoundaryMass`] when the boundary mass exceeds `threshold`.
    pub fn check_aliasing(&self, threshold: f64) -> Result<()> {
        let mass = self.boundary_mass_fraction();
        if mass > threshold {
            return Err(LabError::BoundaryMass { mass, threshold });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummationMode {
    #[default]
    Compensated,
    Ordered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialTruncation {
    /// Integrate over the ball of this radius only.
    FixedRadius(f64),
    /// Grow the radius with the packet envelopes until the neglected mass is below the tolerance.
    TailMass(f64),
}

/// Truncation radii, time panels, node counts and tolerances for every space-time integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePlan {
    pub truncation: SpatialTruncation,
    pub horizon: f64,
    pub time_panels: usize,
    pub nodes_per_panel: usize,
    pub tail_exponent_guess: f64,
    pub aliasing_threshold: f64,
    pub summation: SummationMode,
    pub space_rel: f64,
    pub time_rel: f64,
    pub max_panels: usize,
}

impl Default for QuadraturePlan {
    fn default() -> Self {
        Self {
            truncation: SpatialTruncation::TailMass(1e-10),
            horizon: 2.0,
            time_panels: 2,
            nodes_per_panel: 10,
            tail_exponent_guess: 1.0,
            aliasing_threshold: 1e-6,
            summation: SummationMode::Compensated,
            space_rel: 1e-10,
            time_rel: 1e-8,
            max_panels: 2000,
        }
    }
}

impl QuadraturePlan {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        match self.truncation {
            SpatialTruncation::FixedRadius(r) => positive("truncation_radius", r)?,
            SpatialTruncation::TailMass(t) => positive("tail_mass", t)?,
        }
        positive("horizon", self.horizon)?;
        positive("tail_exponent_guess", self.tail_exponent_guess)?;
        positive("aliasing_threshold", self.aliasing_threshold)?;
        positive("space_rel", self.space_rel)?;
        positive("time_rel", self.time_rel)?;
        if self.nodes_per_panel < 2 {
            return Err(invalid("nodes_per_panel", "must be at least 2"));
        }
        if self.time_panels < 1 {
            return Err(invalid("time_panels", "must be at least 1"));
        }
        if self.max_panels < self.time_panels {
            return Err(invalid("max_panels", "must be at least time_panels"));
        }
        Ok(())
    }

    /// Envelope multiple beyond which the neglected mass is below the tail tolerance.
    pub(crate) fn envelope_sigmas(&self) -> f64 {
        match self.truncation {
            SpatialTruncation::TailMass(tau) => (2.0 * (1.0 / tau.min(0.1)).ln()).sqrt() + 3.0,
            SpatialTruncation::FixedRadius(_) => 10.0,
        }
    }
}

/// Least-squares or raw limit estimate of a sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate {
    pub limit: f64,
    pub error: f64,
    /// Fitted decay exponent, when a power-law model was used.
    pub exponent: Option<f64>,
}

/// Schedule parameter of one report row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleParam {
    Value(f64),
    /// Extrapolated limit as the parameter tends to `+∞`.
    Limit,
    /// Extrapolated limit as the parameter tends to `-∞`.
    NegativeLimit,
    /// Supremum over the schedule.
    Supremum,
}

impl fmt::Display for ScheduleParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleParam::Value(v) => write!(f, "{v:.16e}"),
            ScheduleParam::Limit => f.write_str("inf"),
            ScheduleParam::NegativeLimit => f.write_str("-inf"),
            ScheduleParam::Supremum => f.write_str("sup"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub param: ScheduleParam,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub pass: bool,
}

impl ReportRow {
    /// Row with residual `|L-R| / max(|L|, |R|, floor)`; `floor = 0` and a zero
    /// pair yields relative residual 0.
    pub fn compare(param: ScheduleParam, lhs: f64, rhs: f64, floor: f64, tolerance: f64) -> Self {
        let abs_residual = (lhs - rhs).abs();
        let denom = lhs.abs().max(rhs.abs()).max(floor);
        let rel_residual = if denom > 0.0 { abs_residual / denom } else { 0.0 };
        Self {
            param,
            lhs,
            rhs,
            abs_residual,
            rel_residual,
            pass: rel_residual <= tolerance,
        }
    }
}

/// Per-experiment record of both sides of an identity along a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub experiment: String,
    pub dimension: usize,
    pub datum: String,
    pub weight: String,
    pub rows: Vec<ReportRow>,
    pub limit: Option<LimitEstimate>,
    pub tolerance: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(experiment: &str, dimension: usize, datum: &str, weight: &str, tolerance: f64) -> Self {
        Self {
            experiment: experiment.to_string(),
            dimension,
            datum: datum.to_string(),
            weight: weight.to_string(),
            rows: Vec::new(),
            limit: None,
            tolerance,
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn failing_rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}
