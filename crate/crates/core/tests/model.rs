use jchsim::invariants::spin_hubbard_mismatch;
use jchsim::model::*;

#[test]
fn two_excitation_dimensions_at_n12() {
    // 25 sites: 325 photon pairs, plus 25 photon+atom, plus (Hubbard) one doubly excited atom
    let spin = Basis::enumerate(12, Sector::Two, ModelKind::Spin);
    let hub = Basis::enumerate(12, Sector::Two, ModelKind::Hubbard);
    assert_eq!(spin.dim(), 350);
    assert_eq!(hub.dim(), 351);
    let photons_only = spin.states().iter().filter(|c| matches!(c, Config::Pair(..))).count();
    assert_eq!(photons_only, 325);
}

#[test]
fn spin_model_is_the_hardcore_hubbard_model() {
    for lambda in [0.3, 2.0] {
        let p = ModelParams::spin(6, 1.0, lambda).unwrap();
        for u in [0.0, 1.0, 10.0, -7.5, 1e6] {
            assert_eq!(spin_hubbard_mismatch(&p, u).unwrap(), 0.0, "lambda {lambda} u {u}");
        }
    }
}

#[test]
fn hubbard_double_occupancy_row() {
    let p = ModelParams::hubbard(3, 1.0, 1.5, 10.0).unwrap();
    let b = Basis::enumerate(3, Sector::Two, ModelKind::Hubbard);
    let h = build_hubbard_hamiltonian(&p, &b).unwrap();
    let ee = b.index_of(&Config::DoubleExcited).unwrap();
    let e0 = b.index_of(&Config::PhotonExcited(0)).unwrap();
    assert_eq!(h.get(ee, ee), -10.0);
    assert!((h.get(ee, e0) - 2f64.sqrt() * 1.5).abs() < 1e-15);
    assert_eq!(h.row(ee).count(), 2);
}

#[test]
fn one_excitation_u_is_invisible() {
    let b = Basis::enumerate(5, Sector::One, ModelKind::Hubbard);
    let a = build_hubbard_hamiltonian(&ModelParams::hubbard(5, 1.0, 2.0, 0.0).unwrap(), &b).unwrap();
    let c = build_hubbard_hamiltonian(&ModelParams::hubbard(5, 1.0, 2.0, 99.0).unwrap(), &b).unwrap();
    assert_eq!(a.triplets(), c.triplets());
}

#[test]
fn symmetries_commute_with_h() {
    for kind in [ModelKind::Spin, ModelKind::Hubbard] {
        let p = ModelParams::hubbard(8, 0.7, 1.9, 4.0).unwrap();
        let p = if kind == ModelKind::Spin { p.with_u(HubbardU::Infinite) } else { p };
        for sector in [Sector::One, Sector::Two] {
            let b = Basis::enumerate(8, sector, kind);
            let h = build_hamiltonian(&p, &b).unwrap();
            assert!(h.is_hermitian());
            assert_eq!(h.commutator_max_abs(&parity_operator(&b)), 0.0);
            assert_eq!(h.commutator_max_abs(&total_excitation_operator(&b)), 0.0);
        }
    }
}

#[test]
fn open_chain_spectrum_without_atom() {
    // lambda = 0: photon energies -2 kappa cos(n pi / (M + 1)), plus the bare atom at 0
    let n = 10;
    let p = ModelParams::spin(n, 1.0, 0.0).unwrap();
    let b = Basis::enumerate(n, Sector::One, ModelKind::Spin);
    let h = build_spin_hamiltonian(&p, &b).unwrap();
    let e = jchsim::propagator::DenseSpectrum::new(&h, 100).unwrap().sorted_energies();
    let m = 2 * n + 1;
    let mut expect: Vec<f64> =
        (1..=m).map(|k| -2.0 * (k as f64 * std::f64::consts::PI / (m + 1) as f64).cos()).collect();
    expect.push(0.0);
    expect.sort_by(f64::total_cmp);
    for (a, b) in e.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn wrong_basis_is_rejected() {
    let p = ModelParams::spin(5, 1.0, 1.0).unwrap();
    let b = Basis::enumerate(6, Sector::One, ModelKind::Spin);
    assert!(matches!(build_spin_hamiltonian(&p, &b), Err(jchsim::Error::BasisMismatch(_))));
    let hb = Basis::enumerate(5, Sector::Two, ModelKind::Hubbard);
    assert!(build_hubbard_hamiltonian(&p, &hb).is_err());
}
