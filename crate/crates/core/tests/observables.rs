use std::f64::consts::PI;

use jchsim::analytic::{bound_state, Branch};
use jchsim::model::*;
use jchsim::observables::*;
use jchsim::propagator::{evolve_streaming, propagate, EvolveOptions};
use proptest::prelude::*;

fn spin(n: usize, lambda: f64, sector: Sector) -> (ModelParams, Basis, SparseOperator) {
    let p = ModelParams::spin(n, 1.0, lambda).unwrap();
    let b = Basis::enumerate(n, sector, ModelKind::Spin);
    let h = build_spin_hamiltonian(&p, &b).unwrap();
    (p, b, h)
}

#[test]
fn packet_moves_at_the_group_velocity() {
    let (_, b, h) = spin(100, 2.0, Sector::One);
    let psi = gaussian_packet(&PacketSpec::new(-40, PI / 2.0, 0.3), &b).unwrap().state;
    let t = 10.0;
    let out = propagate(&h, &psi, t, &EvolveOptions::default()).unwrap();
    let d = photon_density(&b, &out);
    let mean: f64 = (0..201).map(|i| (i as f64 - 100.0) * d[i]).sum::<f64>() / d[..201].iter().sum::<f64>();
    assert!((mean - (-40.0 + 2.0 * t)).abs() < 0.5, "{mean}");
}

#[test]
fn unperturbed_polariton_does_not_emit() {
    let (p, b, h) = spin(40, 2.0, Sector::One);
    let phi = bound_state(&p, Branch::Minus, &b).unwrap();
    let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
    let mut hist = DensityHistory::new(40);
    evolve_streaming(&h, &phi, &times, &EvolveOptions::default(), |_, t, s| {
        hist.push(t, photon_density(&b, s));
        Ok(())
    })
    .unwrap();
    let g = gamma_emission(&hist, 9, &GammaWindow { start: 0.0, end: 10.0, limit: 10.0 }).unwrap();
    assert!((-1e-6..1e-6).contains(&g), "{g}");
}

#[test]
fn window_past_the_boundary_return_is_refused() {
    let w = GammaWindow::for_packet(100, &PacketSpec::new(-40, 2.3, 0.3), 9, 1.0);
    assert!((w.limit - 98.2).abs() < 0.1);
    let too_long = GammaWindow { end: w.limit + 1.0, ..w };
    assert!(matches!(too_long.validate(), Err(jchsim::Error::WindowTooLong { .. })));
}

#[test]
fn split_of_a_single_photon_adds_to_one() {
    let (_, b, h) = spin(60, 2.0, Sector::One);
    let psi = gaussian_packet(&PacketSpec::new(-25, 1.2, 0.4), &b).unwrap().state;
    let out = propagate(&h, &psi, 20.0, &EvolveOptions::default()).unwrap();
    let mut hist = DensityHistory::new(60);
    hist.push(20.0, photon_density(&b, &out));
    let tr = transmission_reflection(&hist, 20.0, 5).unwrap();
    assert!((tr.left + tr.right + tr.center - 1.0).abs() < 1e-12);
    assert!(tr.right > 0.05 && tr.left > 0.05);
}

#[test]
fn polariton_times_scattering_mode_is_pure_c1() {
    let p = ModelParams::spin(20, 1.0, 2.0).unwrap();
    let modes = SingleParticleModes::new(&p).unwrap();
    let b2 = Basis::enumerate(20, Sector::Two, ModelKind::Spin);
    let minus = modes.bound_index(Branch::Minus).unwrap();
    let k_mode = modes.scattering_near(-2.0 * 1.0f64.cos(), 1)[0];
    let c = compose_two_excitation(&modes.mode(minus), &modes.mode(k_mode), &b2).unwrap();
    let d = channel_decomposition(&modes, &b2, &c.state, &ChannelOptions::default()).unwrap();
    let hit = d.c1.iter().find(|a| a.mode == k_mode && a.branch == Branch::Minus).unwrap();
    assert!(hit.amp.norm_sqr() >= 1.0 - 2.0 * c.drop_weight - 1e-12, "{} drop {}", hit.amp.norm_sqr(), c.drop_weight);
    assert!(d.c2_weight() <= 2.0 * c.drop_weight + 1e-12);
    assert_eq!(d.gram_condition, 1.0);
}

#[test]
fn two_free_photons_are_pure_c2() {
    let p = ModelParams::spin(20, 1.0, 2.0).unwrap();
    let modes = SingleParticleModes::new(&p).unwrap();
    let b2 = Basis::enumerate(20, Sector::Two, ModelKind::Spin);
    let ks = modes.scattering_near(0.3, 2);
    let c = compose_two_excitation(&modes.mode(ks[0]), &modes.mode(ks[1]), &b2).unwrap();
    let d = channel_decomposition(&modes, &b2, &c.state, &ChannelOptions::default()).unwrap();
    assert!(d.c2_weight() > 1.0 - 2.0 * c.drop_weight - 1e-12);
    assert!(d.c1_weight() < 2.0 * c.drop_weight + 1e-12);
}

#[test]
fn energy_mismatch_examples() {
    let p = ModelParams::spin(10, 1.0, 2.0).unwrap();
    assert!((energy_mismatch(PI / 2.0, PI / 2.0, &p) - 0.54404).abs() < 1e-4);
    let p0 = p.with_lambda(0.0);
    assert_eq!(energy_mismatch(PI / 2.0, PI / 2.0, &p0), 0.0);
    let a = energy_mismatch(PI / 2.0, PI / 2.0 + 1e-6, &p);
    assert!((a - energy_mismatch(PI / 2.0, PI / 2.0, &p)).abs() < 1e-5);
}

#[test]
fn witness_is_zero_without_atom_weight() {
    let mut hist = DensityHistory::new(2);
    for i in 0..10 {
        hist.push(i as f64, vec![0.2, 0.2, 0.2, 0.2, 0.2, 0.0]);
    }
    let (atom, avg) = polariton_witness(&hist, 3.0);
    assert!(atom.values.iter().chain(&avg.values).all(|v| *v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn densities_sum_to_two_and_compose_is_symmetric(
        c1 in -18i32..-6, c2 in 6i32..18, k1 in -3.0f64..3.0, k2 in -3.0f64..3.0, t in 0.0f64..6.0
    ) {
        let (_, b1, _) = spin(25, 2.0, Sector::One);
        let (_, b2, h) = spin(25, 2.0, Sector::Two);
        let u = gaussian_packet(&PacketSpec::new(c1, k1, 0.8), &b1).unwrap().state;
        let v = gaussian_packet(&PacketSpec::new(c2, k2, 0.8), &b1).unwrap().state;
        let a = compose_two_excitation(&u, &v, &b2).unwrap().state;
        let r = compose_two_excitation(&v, &u, &b2).unwrap().state;
        prop_assert!(a.max_abs_diff(&r) == 0.0);
        let d0 = photon_density(&b2, &a);
        let (du, dv) = (photon_density(&b1, &u), photon_density(&b1, &v));
        for i in 0..d0.len() {
            prop_assert!((d0[i] - du[i] - dv[i]).abs() < 1e-10);
        }
        let out = propagate(&h, &a, t, &EvolveOptions::default()).unwrap();
        let s: f64 = photon_density(&b2, &out).iter().sum();
        prop_assert!((s - 2.0).abs() < 1e-10);
    }

    #[test]
    fn channel_residual_is_the_reconstruction_error(t in 0.0f64..8.0, keep in 5usize..30) {
        let p = ModelParams::spin(40, 1.0, 2.0).unwrap();
        let (_, b1, _) = spin(40, 2.0, Sector::One);
        let (_, b2, h) = spin(40, 2.0, Sector::Two);
        let phi = bound_state(&p, Branch::Minus, &b1).unwrap();
        let u = gaussian_packet(&PacketSpec::new(-20, 1.5, 0.9), &b1).unwrap().state;
        let psi = compose_two_excitation(&u, &phi, &b2).unwrap().state;
        let psi = propagate(&h, &psi, t, &EvolveOptions::default()).unwrap();
        let modes = SingleParticleModes::new(&p).unwrap();
        let d = channel_decomposition(&modes, &b2, &psi, &ChannelOptions { max_modes: Some(keep), shell_energy: 0.0 }).unwrap();
        let x = pair_matrix(&b2, &psi).unwrap();
        let err: f64 = (x - d.reconstruct_pair_matrix(&modes)).iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((err - d.residual_weight).abs() < 1e-8);
    }
}
