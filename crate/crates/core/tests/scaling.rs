mod common;

use common::rel;
use num_complex::Complex64;
use smoothing_lab::functionals::profiles;
use smoothing_lab::spectral::hs_norm_sq;
use smoothing_lab::{QuadraturePlan, WavePacket, WavePacketSum};

fn datum(n: usize) -> WavePacketSum {
    let c = |re, im| Complex64::new(re, im);
    let packets = if n == 1 {
        vec![
            WavePacket::new(c(1.0, 0.3), 1.0, vec![0.4], vec![0.1]).unwrap(),
            WavePacket::new(c(-0.5, 0.2), 1.7, vec![-0.6], vec![-0.15]).unwrap(),
        ]
    } else {
        vec![
            WavePacket::new(c(1.0, 0.3), 1.0, vec![0.4, -0.2], vec![0.1, 0.05]).unwrap(),
            WavePacket::new(c(-0.5, 0.2), 1.7, vec![-0.6, 0.3], vec![-0.15, 0.0]).unwrap(),
        ]
    };
    WavePacketSum::new(n, packets).unwrap()
}

/// With `u_λ(t,x) = u(λ²t, λx)` the substitution `(t,x) → (λ²t, λx)` gives
/// `F_{f(λ·)}(R) = λ^{1-n} F_f(λR)`; the `L²`-normalized dilation
/// `λ^{n/2} f(λ·)` turns the factor into `λ`.
#[test]
fn smoothing_profile_scaling() {
    let plan = QuadraturePlan::default();
    for (n, lambda, r) in [(1, 2.0, 1.5), (1, 0.5, 3.0), (2, 1.5, 2.0)] {
        let f = datum(n);
        let plain = f.dilated(lambda);
        let normalized = plain.scaled(Complex64::new(lambda.powf(n as f64 / 2.0), 0.0));
        let base = profiles(&f, lambda * r, &plan).unwrap();
        let p = profiles(&plain, r, &plan).unwrap();
        let q = profiles(&normalized, r, &plan).unwrap();
        let factor = lambda.powi(1 - n as i32);
        assert!(
            rel(p.full, factor * base.full) <= 1e-6,
            "n={n}: {} vs {}",
            p.full,
            factor * base.full
        );
        assert!(rel(p.radial, factor * base.radial) <= 1e-6);
        assert!(rel(q.full, lambda * base.full) <= 1e-6);
    }
}

#[test]
fn sobolev_dilation_law() {
    for n in [1usize, 2] {
        let f = datum(n);
        for s in [0.0, 0.5, 1.0] {
            for lambda in [0.5, 3.0] {
                let scaled = hs_norm_sq(&f.dilated(lambda), s).unwrap();
                let expected = lambda.powf(2.0 * s - n as f64) * hs_norm_sq(&f, s).unwrap();
                assert!(rel(scaled, expected) <= 1e-8, "n={n} s={s} λ={lambda}");
            }
        }
    }
}
