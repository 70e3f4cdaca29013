//! Quadrature building blocks: Gauss–Legendre rules, a globally adaptive
//! vector-valued integrator, the compactified real line, and sphere rules.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{LabError, Result};
use crate::model::SummationMode;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..order {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let m = order as f64;
    let dp = m * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        if order == 1 {
            return Self {
                nodes,
                weights: vec![2.0],
            };
        }
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(order, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(order, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared rule of the given order; rules are built once per process.
    pub fn cached(order: usize) -> Arc<GaussLegendre> {
        type Cache = Mutex<Vec<(usize, Arc<GaussLegendre>)>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((_, rule)) = guard.iter().find(|(o, _)| *o == order) {
            return rule.clone();
        }
        let rule = Arc::new(GaussLegendre::new(order));
        guard.push((order, rule.clone()));
        rule
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = NeumaierSum::default();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.total()
    }
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    carry: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sums `values` in slice order using the requested mode.
pub fn ordered_sum(values: impl IntoIterator<Item = f64>, mode: SummationMode) -> f64 {
    match mode {
        SummationMode::Compensated => {
            let mut acc = NeumaierSum::default();
            for v in values {
                acc.add(v);
            }
            acc.total()
        }
        SummationMode::Ordered => values.into_iter().sum(),
    }
}

/// Accuracy request for [`Adaptive`]. Component `i` is accepted once its
/// summed error is below `max(rel |I_i|, floor max_j |I_j|, abs, NOISE ∫|f_i|)`;
/// the last term is the roundoff level of a cancelling integrand.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub floor: f64,
    pub abs: f64,
}

const NOISE: f64 = 1e-13;

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            floor: rel * 1e-3,
            abs: 0.0,
        }
    }

    fn target(&self, total: &[f64], magnitude: &[f64], i: usize) -> f64 {
        let peak = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        (self.rel * total[i].abs())
            .max(self.floor * peak)
            .max(self.abs)
            .max(NOISE * magnitude[i])
    }
}

struct Panel {
    a: f64,
    b: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    magnitude: Vec<f64>,
    err: Vec<f64>,
}

/// Rule values `∫f` and `∫|f|` over one interval.
struct RuleValue {
    value: Vec<f64>,
    magnitude: Vec<f64>,
}

/// Globally adaptive composite Gauss–Legendre integration of vector-valued
/// integrands. Each panel carries its own rule value and the value of the two
/// half panels; the difference is the panel error estimate.
#[derive(Debug, Clone)]
pub struct Adaptive {
    rule: Arc<GaussLegendre>,
    tol: Tolerance,
    max_panels: usize,
    mode: SummationMode,
}

impl Adaptive {
    pub fn new(order: usize, tol: Tolerance, max_panels: usize, mode: SummationMode) -> Self {
        Self {
            rule: GaussLegendre::cached(order.max(2)),
            tol,
            max_panels,
            mode,
        }
    }

    fn rule_value<F>(&self, f: &mut F, a: f64, b: f64) -> Result<RuleValue>
    where
        F: FnMut(f64) -> Result<Vec<f64>>,
    {
        let mut acc: Vec<NeumaierSum> = Vec::new();
        let mut plain: Vec<f64> = Vec::new();
        let mut magnitude: Vec<f64> = Vec::new();
        for (x, w) in self.rule.mapped(a, b) {
            let v = f(x)?;
            if magnitude.is_empty() {
                acc = vec![NeumaierSum::default(); v.len()];
                plain = vec![0.0; v.len()];
                magnitude = vec![0.0; v.len()];
            }
            for (i, vi) in v.iter().enumerate() {
                magnitude[i] += w * vi.abs();
                match self.mode {
                    SummationMode::Compensated => acc[i].add(w * vi),
                    SummationMode::Ordered => plain[i] += w * vi,
                }
            }
        }
        let value = match self.mode {
            SummationMode::Compensated => acc.iter().map(NeumaierSum::total).collect(),
            SummationMode::Ordered => plain,
        };
        Ok(RuleValue { value, magnitude })
    }

    fn panel<F>(&self, f: &mut F, a: f64, b: f64, whole: Vec<f64>) -> Result<Panel>
    where
        F: FnMut(f64) -> Result<Vec<f64>>,
    {
        let mid = 0.5 * (a + b);
        let left = self.rule_value(f, a, mid)?;
        let right = self.rule_value(f, mid, b)?;
        let err = whole
            .iter()
            .zip(left.value.iter().zip(&right.value))
            .map(|(w, (l, r))| (w - (l + r)).abs())
            .collect();
        let magnitude = left
            .magnitude
            .iter()
            .zip(&right.magnitude)
            .map(|(l, r)| l + r)
            .collect();
        Ok(Panel {
            a,
            b,
            left: left.value,
            right: right.value,
            magnitude,
            err,
        })
    }

    /// Integrates `f` over `[breaks[0], breaks.last()]`, starting from the
    /// partition given by `breaks` (sorted ascending, at least two entries).
    pub fn integrate<F>(&self, mut f: F, breaks: &[f64]) -> Result<Vec<f64>>
    where
        F: FnMut(f64) -> Result<Vec<f64>>,
    {
        let mut panels = Vec::with_capacity(breaks.len());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b > a {
                let whole = self.rule_value(&mut f, a, b)?;
                panels.push(self.panel(&mut f, a, b, whole.value)?);
            }
        }
        if panels.is_empty() {
            return Ok(Vec::new());
        }
        let dim = panels[0].err.len();
        loop {
            let total: Vec<f64> = (0..dim)
                .map(|i| ordered_sum(panels.iter().map(|p| p.left[i] + p.right[i]), self.mode))
                .collect();
            let errors: Vec<f64> = (0..dim).map(|i| panels.iter().map(|p| p.err[i]).sum()).collect();
            let magnitude: Vec<f64> = (0..dim).map(|i| panels.iter().map(|p| p.magnitude[i]).sum()).collect();
            let targets: Vec<f64> = (0..dim).map(|i| self.tol.target(&total, &magnitude, i)).collect();
            if (0..dim).all(|i| errors[i] <= targets[i]) {
                return Ok(total);
            }
            // Split the panel contributing most to the worst component.
            let worst = (0..dim)
                .max_by(|&i, &j| {
                    let ri = errors[i] / targets[i].max(f64::MIN_POSITIVE);
                    let rj = errors[j] / targets[j].max(f64::MIN_POSITIVE);
                    ri.total_cmp(&rj)
                })
                .unwrap_or(0);
            let (idx, _) =
                panels.iter().enumerate().fold(
                    (0, -1.0),
                    |(bi, be), (k, p)| {
                        if p.err[worst] > be {
                            (k, p.err[worst])
                        } else {
                            (bi, be)
                        }
                    },
                );
            let p = &panels[idx];
            let width = p.b - p.a;
            if panels.len() >= self.max_panels || width <= 1e-13 * p.a.abs().max(p.b.abs()).max(1e-300) {
                return Err(LabError::ToleranceNotMet {
                    estimate: total[worst],
                    error: errors[worst],
                    panels: panels.len(),
                });
            }
            let Panel { a, b, left, right, .. } = panels.remove(idx);
            let mid = 0.5 * (a + b);
            let lp = self.panel(&mut f, a, mid, left)?;
            let rp = self.panel(&mut f, mid, b, right)?;
            panels.insert(idx, rp);
            panels.insert(idx, lp);
        }
    }
}

/// Compactification `t = scale * s / (1 - s^2)` of the real line onto `(-1, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct Compactified {
    pub scale: f64,
}

impl Compactified {
    /// Returns `(t, dt/ds)`.
    pub fn map(&self, s: f64) -> (f64, f64) {
        let d = 1.0 - s * s;
        (self.scale * s / d, self.scale * (1.0 + s * s) / (d * d))
    }

    pub fn inverse(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let tau = self.scale;
        (-tau + (tau * tau + 4.0 * t * t).sqrt()) / (2.0 * t)
    }
}

/// Splits every interval whose endpoint ratio exceeds `ratio` geometrically,
/// so panels match the local length scale.
pub fn geometric_refine(breaks: &[f64], ratio: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len() * 2);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(a);
        if a > 0.0 && b / a > ratio {
            let steps = ((b / a).ln() / ratio.ln()).ceil() as usize;
            let q = (b / a).powf(1.0 / steps as f64);
            let mut x = a;
            for _ in 1..steps {
                x *= q;
                out.push(x);
            }
        }
    }
    if let Some(&last) = breaks.last() {
        out.push(last);
    }
    out
}

/// Sorted, deduplicated breakpoints restricted to `[lo, hi]`, endpoints included.
pub fn clip_breaks(candidates: impl IntoIterator<Item = f64>, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = candidates
        .into_iter()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    v
}

/// Integral of `f` over the unit sphere `S^{n-1}` scaled to radius `r`,
/// i.e. `∫_{S^{n-1}} f(r ω) dω`, refined by doubling until every channel has
/// settled relative to the summed channel magnitude.
///
/// `initial` is the starting angular resolution (trapezoid nodes for `n = 2`,
/// polar Gauss nodes for `n = 3`); ignored for `n = 1`.
pub fn sphere_integral<const C: usize>(
    n: usize,
    r: f64,
    initial: usize,
    rel: f64,
    abs: f64,
    mut f: impl FnMut(&[f64]) -> [f64; C],
) -> Result<[f64; C]> {
    const MAX_NODES: usize = 1 << 14;
    let converged = |a: &[f64; C], b: &[f64; C]| {
        let scale: f64 = b.iter().map(|v| v.abs()).sum();
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * scale + abs)
    };
    match n {
        1 => {
            let p = f(&[r]);
            let m = f(&[-r]);
            let mut out = [0.0; C];
            for i in 0..C {
                out[i] = p[i] + m[i];
            }
            Ok(out)
        }
        2 => {
            let mut m = initial.max(8);
            let mut sum = [0.0; C];
            for j in 0..m {
                let th = 2.0 * PI * j as f64 / m as f64;
                let v = f(&[r * th.cos(), r * th.sin()]);
                for i in 0..C {
                    sum[i] += v[i];
                }
            }
            let mut prev = sum.map(|s| s * 2.0 * PI / m as f64);
            loop {
                for j in 0..m {
                    let th = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                    let v = f(&[r * th.cos(), r * th.sin()]);
                    for i in 0..C {
                        sum[i] += v[i];
                    }
                }
                m *= 2;
                let cur = sum.map(|s| s * 2.0 * PI / m as f64);
                if converged(&prev, &cur) {
                    return Ok(cur);
                }
                if m >= MAX_NODES {
                    return Err(LabError::ToleranceNotMet {
                        estimate: cur[0],
                        error: (cur[0] - prev[0]).abs(),
                        panels: m,
                    });
                }
                prev = cur;
            }
        }
        3 => {
            let mut p = initial.max(6);
            let mut prev = sphere3(r, p, &mut f);
            loop {
                p *= 2;
                let cur = sphere3(r, p, &mut f);
                if converged(&prev, &cur) {
                    return Ok(cur);
                }
                if p >= MAX_NODES / 16 {
                    return Err(LabError::ToleranceNotMet {
                        estimate: cur[0],
                        error: (cur[0] - prev[0]).abs(),
                        panels: p,
                    });
                }
                prev = cur;
            }
        }
        _ => Err(crate::error::invalid(
            "dimension",
            format!("sphere rules exist for n = 1, 2, 3, not {n}"),
        )),
    }
}

// Gauss–Legendre in cos(polar) times trapezoid in azimuth.
fn sphere3<const C: usize>(r: f64, p: usize, f: &mut impl FnMut(&[f64]) -> [f64; C]) -> [f64; C] {
    let rule = GaussLegendre::cached(p);
    let naz = 2 * p;
    let mut out = [0.0; C];
    for (&mu, &w) in rule.nodes().iter().zip(rule.weights()) {
        let st = (1.0 - mu * mu).max(0.0).sqrt();
        for j in 0..naz {
            let ph = 2.0 * PI * j as f64 / naz as f64;
            let v = f(&[r * st * ph.cos(), r * st * ph.sin(), r * mu]);
            for i in 0..C {
                out[i] += w * v[i];
            }
        }
    }
    let dphi = 2.0 * PI / naz as f64;
    out.map(|x| x * dphi)
}
