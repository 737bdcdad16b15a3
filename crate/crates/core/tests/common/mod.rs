#![allow(dead_code)]

use jchsim::model::*;
use jchsim::propagator::{propagate, EvolveOptions};
use jchsim::StateVector;
use num_complex::Complex64 as C64;

/// `J_l(x)` from its power series; fine for `x` up to ~20 in f64.
pub fn bessel_j(l: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=l).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    for m in 1..200 {
        term *= -half * half / (m as f64 * (m + l) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Max deviation of a photon launched at site 0 of a free chain from
/// `i^l J_l(2 t)`.
pub fn free_chain_bessel_deviation(n: usize, t: f64) -> f64 {
    let p = ModelParams::spin(n, 1.0, 0.0).unwrap();
    let b = Basis::enumerate(n, Sector::One, ModelKind::Spin);
    let h = build_spin_hamiltonian(&p, &b).unwrap();
    let mut psi = StateVector::zeros(b.dim());
    psi[b.index_of(&Config::Photon(0)).unwrap()] = C64::new(1.0, 0.0);
    let out = propagate(&h, &psi, t, &EvolveOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    for l in -(n as i32)..=(n as i32) {
        let j = bessel_j(l.unsigned_abs(), 2.0 * t) * if l < 0 && l % 2 != 0 { -1.0 } else { 1.0 };
        let exact = C64::i().powi(l) * j;
        worst = worst.max((out[b.index_of(&Config::Photon(l)).unwrap()] - exact).norm());
    }
    worst
}
