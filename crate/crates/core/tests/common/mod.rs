#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smoothing_lab::{WavePacket, WavePacketSum};

pub fn packet(n: usize) -> impl Strategy<Value = WavePacket> {
    (
        -1.0..1.0f64,
        -1.0..1.0f64,
        0.5..2.0f64,
        prop::collection::vec(-1.0..1.0f64, n),
        prop::collection::vec(-0.3..0.3f64, n),
    )
        .prop_filter("non-zero amplitude", |(re, im, ..)| re.abs() + im.abs() > 0.1)
        .prop_map(|(re, im, a, c, v)| WavePacket::new(Complex64::new(re, im), a, c, v).unwrap())
}

pub fn datum(n: usize) -> impl Strategy<Value = WavePacketSum> {
    prop::collection::vec(packet(n), 1..=3).prop_map(move |ps| WavePacketSum::new(n, ps).unwrap())
}

/// Real-valued data: real amplitudes and zero momenta.
pub fn real_datum(n: usize) -> impl Strategy<Value = WavePacketSum> {
    prop::collection::vec(
        (-1.0..1.0f64, 0.5..2.0f64, prop::collection::vec(-1.0..1.0f64, n)),
        1..=3,
    )
    .prop_map(move |ps| {
        let packets = ps
            .into_iter()
            .map(|(re, a, c)| WavePacket::new(Complex64::new(re, 0.0), a, c, vec![0.0; n]).unwrap())
            .collect();
        WavePacketSum::new(n, packets).unwrap()
    })
}

/// Reproducible packet sums: 1 to 3 packets each, drawn from a seeded ChaCha stream.
pub fn seeded_suite(n: usize, count: usize, seed: u64) -> Vec<WavePacketSum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(1..=3);
            let packets = (0..m)
                .map(|_| {
                    let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    let a = rng.random_range(0.5..2.0);
                    let c = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let v = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
                    WavePacket::new(amp, a, c, v).unwrap()
                })
                .collect();
            WavePacketSum::new(n, packets).unwrap()
        })
        .collect()
}

pub fn unit_gaussian(n: usize) -> WavePacketSum {
    WavePacketSum::single(WavePacket::centered(n, 1.0).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    let d = a.abs().max(b.abs());
    if d == 0.0 {
        0.0
    } else {
        (a - b).abs() / d
    }
}
