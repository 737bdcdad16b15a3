//! Hamiltonian construction in second quantization.
//!
//! All three models share the chain hopping `-kappa (a_l^+ a_{l+1} + h.c.)`
//! with open ends and the link `lambda (a_0^+ A + h.c.)`, where `A` lowers the
//! atom (spin) or annihilates a boson on `e` (Hubbard). With at most one
//! excitation on `e` the two coincide; they differ only in whether `e` may be
//! doubly occupied.

use super::basis::{Basis, Config, ModeList, ModelKind, Sector};
use super::operator::SparseOperator;
use super::params::{HubbardU, ModelParams};
use crate::error::{Error, Result};
use crate::propagator::PulseSpec;

fn check_half_length(params: &ModelParams, basis: &Basis) -> Result<()> {
    params.validate()?;
    if params.half_length != basis.half_length() {
        return Err(Error::BasisMismatch(format!(
            "params half_length {} != basis half_length {}",
            params.half_length,
            basis.half_length()
        )));
    }
    Ok(())
}

/// Hopping bonds `(mode_a, mode_b, amplitude)`, one entry per bond.
fn bonds(params: &ModelParams, basis: &Basis) -> Vec<(usize, usize, f64)> {
    let m = basis.sites();
    let mut b: Vec<_> = (0..m - 1).map(|i| (i, i + 1, -params.kappa)).collect();
    b.push((params.half_length, basis.e_mode(), params.lambda));
    b
}

/// Hopping part plus an optional diagonal `onsite(n_e)`.
fn assemble(params: &ModelParams, basis: &Basis, onsite: impl Fn(usize) -> f64) -> SparseOperator {
    let n = basis.half_length();
    let e = basis.e_mode();
    let cap = basis.e_capacity();
    let mut t = Vec::new();
    for (col, cfg) in basis.states().iter().enumerate() {
        let modes = cfg.modes(n);
        let d = onsite(modes.count(e));
        if d != 0.0 {
            t.push((col, col, d));
        }
        for &(a, b, amp) in &bonds(params, basis) {
            if amp == 0.0 {
                continue;
            }
            for (from, to) in [(a, b), (b, a)] {
                if let Some(row) = hop_element(&modes, from, to, e, cap) {
                    let (target, factor) = row;
                    let r = basis.index_of(&Config::from_modes(&target, n)).expect("hop stays inside the sector");
                    t.push((r, col, amp * factor));
                }
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), &t, basis.tag())
}

/// `a_to^+ a_from` on an occupation list: target and bosonic factor
/// `sqrt(n_from) sqrt(n_to + 1)`. The hardcore cap on `e` enters only as a
/// forbidden target; below the cap the spin and boson factors agree.
fn hop_element(modes: &ModeList, from: usize, to: usize, e: usize, cap: usize) -> Option<(ModeList, f64)> {
    let n_from = modes.count(from);
    if n_from == 0 {
        return None;
    }
    let n_to = modes.count(to);
    if to == e && n_to + 1 > cap {
        return None;
    }
    let target = modes.hop(from, to)?;
    Some((target, ((n_from * (n_to + 1)) as f64).sqrt()))
}

/// Two-level-atom model.
pub fn build_spin_hamiltonian(params: &ModelParams, basis: &Basis) -> Result<SparseOperator> {
    check_half_length(params, basis)?;
    basis.require(None, Some(ModelKind::Spin))?;
    Ok(assemble(params, basis, |_| 0.0))
}

/// Diagonal interaction on `e`, `(U/2) n (1 - n)`: zero for `n <= 1`, `-U`
/// for a doubly occupied `e`.
pub fn hubbard_onsite(u: f64, n_e: usize) -> f64 {
    let n = n_e as f64;
    0.5 * u * n * (1.0 - n)
}

/// Auxiliary-site (Hubbard) model with finite `U`.
pub fn build_hubbard_hamiltonian(params: &ModelParams, basis: &Basis) -> Result<SparseOperator> {
    check_half_length(params, basis)?;
    basis.require(None, Some(ModelKind::Hubbard))?;
    let u = params.hubbard_u.finite().ok_or_else(|| {
        Error::BasisMismatch("Hubbard Hamiltonian needs finite U; use the spin model for U = INFINITE".into())
    })?;
    Ok(assemble(params, basis, |n| hubbard_onsite(u, n)))
}

/// Dispatches on the basis kind: spin basis for `U = INFINITE`, Hubbard
/// basis for finite `U`.
pub fn build_hamiltonian(params: &ModelParams, basis: &Basis) -> Result<SparseOperator> {
    match (basis.kind(), params.hubbard_u) {
        (ModelKind::Spin, HubbardU::Infinite) => build_spin_hamiltonian(params, basis),
        (ModelKind::Hubbard, HubbardU::Finite(_)) => build_hubbard_hamiltonian(params, basis),
        (k, u) => Err(Error::BasisMismatch(format!("{k:?} basis cannot represent U = {u:?}"))),
    }
}

/// Single-particle model kicked by a rectangular potential on `e`:
/// `H(t) = H0 + V(t)`, `V(t) = (U0 / w) |e><e|` for `tau < t < tau + w`.
#[derive(Clone, Debug)]
pub struct KickedHamiltonian {
    pub h0: SparseOperator,
    pub pulse: PulseSpec,
    e_index: usize,
}

impl KickedHamiltonian {
    pub fn e_index(&self) -> usize {
        self.e_index
    }

    /// Strength of `V(t)` on `|e><e|`.
    pub fn potential_at(&self, t: f64) -> f64 {
        let p = &self.pulse;
        if t > p.tau && t - p.tau < p.width {
            p.amplitude()
        } else {
            0.0
        }
    }

    /// `H0 + (U0 / w) |e><e|`.
    pub fn pulsed_operator(&self) -> SparseOperator {
        self.h0.with_diagonal_shift(self.e_index, self.pulse.amplitude())
    }
}

pub fn build_kicked_hamiltonian(params: &ModelParams, pulse: PulseSpec, basis: &Basis) -> Result<KickedHamiltonian> {
    check_half_length(params, basis)?;
    basis.require(Some(Sector::One), None)?;
    pulse.validate()?;
    let h0 = assemble(params, basis, |_| 0.0);
    let e_index = basis.index_of(&Config::Excited).expect("one-excitation basis holds |e>");
    Ok(KickedHamiltonian { h0, pulse, e_index })
}

/// Site reflection `l -> -l` as a permutation matrix.
pub fn parity_operator(basis: &Basis) -> SparseOperator {
    let t: Vec<_> = basis
        .states()
        .iter()
        .enumerate()
        .map(|(i, c)| (basis.index_of(&c.mirrored()).expect("basis closed under parity"), i, 1.0))
        .collect();
    SparseOperator::from_triplets(basis.dim(), &t, basis.tag())
}

/// Photon number plus atom excitation; constant on a fixed-sector basis.
pub fn total_excitation_operator(basis: &Basis) -> SparseOperator {
    let n = basis.half_length();
    let diag: Vec<f64> = basis.states().iter().map(|c| c.modes(n).as_slice().len() as f64).collect();
    SparseOperator::diagonal(&diag, basis.tag())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn sorted_eigs(h: &SparseOperator) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn three_site_chain_spectrum() {
        let p = ModelParams::spin(1, 1.0, 0.0).unwrap();
        let b = Basis::enumerate(1, Sector::One, ModelKind::Spin);
        let e = sorted_eigs(&build_spin_hamiltonian(&p, &b).unwrap());
        let want = [-2f64.sqrt(), 0.0, 0.0, 2f64.sqrt()];
        for (a, w) in e.iter().zip(want) {
            assert!((a - w).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn atom_link_elements() {
        let p = ModelParams::spin(2, 1.0, 0.7).unwrap();
        let b1 = Basis::enumerate(2, Sector::One, ModelKind::Spin);
        let h1 = build_spin_hamiltonian(&p, &b1).unwrap();
        let i0 = b1.index_of(&Config::Photon(0)).unwrap();
        let ie = b1.index_of(&Config::Excited).unwrap();
        assert_eq!(h1.get(i0, ie), 0.7);

        let b2 = Basis::enumerate(2, Sector::Two, ModelKind::Spin);
        let h2 = build_spin_hamiltonian(&p, &b2).unwrap();
        let i00 = b2.index_of(&Config::Pair(0, 0)).unwrap();
        let i0e = b2.index_of(&Config::PhotonExcited(0)).unwrap();
        assert!((h2.get(i00, i0e) - 2f64.sqrt() * 0.7).abs() < 1e-15);
        // doubly occupied neighbour hop carries sqrt(2) as well
        let i01 = b2.index_of(&Config::Pair(0, 1)).unwrap();
        assert!((h2.get(i00, i01) + 2f64.sqrt()).abs() < 1e-15);
        for i in 0..b2.dim() {
            assert_eq!(h2.get(i, i), 0.0);
        }
    }

    #[test]
    fn hubbard_double_occupancy_diagonal() {
        let p = ModelParams::hubbard(2, 1.0, 1.0, 10.0).unwrap();
        let b = Basis::enumerate(2, Sector::Two, ModelKind::Hubbard);
        let h = build_hubbard_hamiltonian(&p, &b).unwrap();
        let iee = b.index_of(&Config::DoubleExcited).unwrap();
        assert_eq!(h.get(iee, iee), -10.0);
        let i0e = b.index_of(&Config::PhotonExcited(0)).unwrap();
        assert_eq!(h.get(i0e, i0e), 0.0);
        assert!((h.get(iee, i0e) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hubbard_u0_one_excitation_matches_spin() {
        let b_s = Basis::enumerate(5, Sector::One, ModelKind::Spin);
        let b_h = Basis::enumerate(5, Sector::One, ModelKind::Hubbard);
        let hs = build_spin_hamiltonian(&ModelParams::spin(5, 1.0, 1.3).unwrap(), &b_s).unwrap();
        let hh = build_hubbard_hamiltonian(&ModelParams::hubbard(5, 1.0, 1.3, 0.0).unwrap(), &b_h).unwrap();
        assert_eq!(hs.triplets(), hh.triplets());
    }

    #[test]
    fn mismatches_are_rejected() {
        let p = ModelParams::spin(3, 1.0, 1.0).unwrap();
        let b = Basis::enumerate(2, Sector::One, ModelKind::Spin);
        assert!(matches!(build_spin_hamiltonian(&p, &b), Err(Error::BasisMismatch(_))));
        let bh = Basis::enumerate(3, Sector::Two, ModelKind::Hubbard);
        assert!(matches!(build_spin_hamiltonian(&p, &bh), Err(Error::BasisMismatch(_))));
        assert!(matches!(build_hubbard_hamiltonian(&p, &bh), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn invalid_pulse() {
        let p = ModelParams::spin(3, 1.0, 1.0).unwrap();
        let b = Basis::enumerate(3, Sector::One, ModelKind::Hubbard);
        let pulse = PulseSpec { u0: 1.0, tau: 0.0, width: 0.0 };
        assert!(matches!(build_kicked_hamiltonian(&p, pulse, &b), Err(Error::InvalidPulse(_))));
    }

    #[test]
    fn kicked_pulse_integrates_to_u0() {
        let p = ModelParams::spin(3, 1.0, 0.8).unwrap();
        let b = Basis::enumerate(3, Sector::One, ModelKind::Hubbard);
        let pulse = PulseSpec { u0: 2.0, tau: 1.0, width: 2e-5 };
        let k = build_kicked_hamiltonian(&p, pulse, &b).unwrap();
        let steps = 20_000;
        let (a, z) = (0.9, 1.1);
        let dt = (z - a) / steps as f64;
        let integral: f64 = (0..steps).map(|i| k.potential_at(a + (i as f64 + 0.5) * dt) * dt).sum();
        assert!((integral - 2.0).abs() < 1e-6, "{integral}");
        assert_eq!(k.potential_at(0.5), 0.0);
        let hp = k.pulsed_operator();
        assert!((hp.get(k.e_index(), k.e_index()) - 1e5).abs() < 1e-9);
    }

    #[test]
    fn parity_and_excitation_commute() {
        for kind in [ModelKind::Spin, ModelKind::Hubbard] {
            for sector in [Sector::One, Sector::Two] {
                let b = Basis::enumerate(3, sector, kind);
                let p = match kind {
                    ModelKind::Spin => ModelParams::spin(3, 1.0, 1.7).unwrap(),
                    ModelKind::Hubbard => ModelParams::hubbard(3, 1.0, 1.7, 4.0).unwrap(),
                };
                let h = build_hamiltonian(&p, &b).unwrap();
                assert!(h.is_hermitian());
                let par = parity_operator(&b);
                assert!(par.matmul(&par).triplets().iter().all(|&(i, j, v)| i == j && v == 1.0));
                assert_eq!(par.matmul(&par).nnz(), b.dim());
                assert!(par.commutator_max_abs(&h) < 1e-12);
                let nop = total_excitation_operator(&b);
                let want = sector.excitations() as f64;
                assert!((0..b.dim()).all(|i| nop.get(i, i) == want));
                assert!(nop.commutator_max_abs(&h) < 1e-12);
            }
        }
    }
}
