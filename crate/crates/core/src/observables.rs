//! Initial states and measured quantities.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analytic::{bound_energies, Branch};
use crate::error::{Error, Result};
use crate::model::{build_spin_hamiltonian, Basis, Config, ModelKind, ModelParams, Sector};
use crate::state::StateVector;

pub const DEFAULT_L0: usize = 9;
pub const EDGE_TOL: f64 = 1e-8;
pub const LOSSY_COMPOSE_TOL: f64 = 1e-6;

/// Gaussian photon packet `exp(-(alpha^2/2)(l - center)^2) exp(i k0 l)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub center: i32,
    pub k0: f64,
    pub alpha: f64,
}

impl PacketSpec {
    pub fn new(center: i32, k0: f64, alpha: f64) -> Self {
        PacketSpec { center, k0, alpha }
    }

    /// Half width `2 sqrt(ln 2) / alpha`, in sites.
    pub fn half_width(&self) -> f64 {
        2.0 * std::f64::consts::LN_2.sqrt() / self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::validation("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if !(self.k0.is_finite() && self.k0.abs() < std::f64::consts::PI) {
            return Err(Error::validation("k0", format!("must lie in (-pi, pi), got {}", self.k0)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Packet {
    pub state: StateVector,
    /// Weight on the outermost sites `l = +-N` before normalisation.
    pub edge_weight: f64,
}

impl Packet {
    pub fn clipped(&self) -> bool {
        self.edge_weight > EDGE_TOL
    }
}

pub fn gaussian_packet(spec: &PacketSpec, basis: &Basis) -> Result<Packet> {
    basis.require(Some(Sector::One), None)?;
    spec.validate()?;
    if spec.half_width() > 0.5 * spec.center.unsigned_abs() as f64 {
        log::warn!("packet half width {:.2} not small against |center| = {}", spec.half_width(), spec.center);
    }
    let n = basis.half_length() as i32;
    let a2 = spec.alpha * spec.alpha;
    let mut psi = StateVector::zeros(basis.dim());
    for (i, c) in basis.states().iter().enumerate() {
        if let Config::Photon(l) = *c {
            let d = (l - spec.center) as f64;
            psi[i] = C64::from_polar((-0.5 * a2 * d * d).exp(), spec.k0 * l as f64);
        }
    }
    let total = psi.norm_sqr();
    let edge =
        [-n, n].iter().map(|l| psi[basis.index_of(&Config::Photon(*l)).unwrap()].norm_sqr()).sum::<f64>() / total;
    if edge > EDGE_TOL {
        log::warn!("EDGE_CLIPPING: packet weight {edge:.2e} at the chain ends");
    }
    psi.normalize();
    Ok(Packet { state: psi, edge_weight: edge })
}

#[derive(Clone, Debug)]
pub struct Composed {
    pub state: StateVector,
    /// Fraction of the symmetrised product's weight dropped with the
    /// forbidden doubly excited atom term (spin basis only).
    pub drop_weight: f64,
}

impl Composed {
    pub fn lossy(&self) -> bool {
        self.drop_weight > LOSSY_COMPOSE_TOL
    }
}

/// Bosonic product `a_u^+ a_v^+ |0>` of two one-excitation states, written in
/// a two-excitation basis and normalised. On a spin basis the `u_e v_e` term
/// has nowhere to go and is dropped.
pub fn compose_two_excitation(u: &StateVector, v: &StateVector, basis: &Basis) -> Result<Composed> {
    basis.require(Some(Sector::Two), None)?;
    let modes = basis.sites() + 1;
    if u.len() != modes || v.len() != modes {
        return Err(Error::BasisMismatch(format!(
            "one-excitation vectors of length {} and {} for {} modes",
            u.len(),
            v.len(),
            modes
        )));
    }
    let n = basis.half_length();
    let sqrt2 = std::f64::consts::SQRT_2;
    let amp = |a: usize, b: usize| if a == b { u[a] * v[a] * sqrt2 } else { u[a] * v[b] + u[b] * v[a] };
    let mut psi = StateVector::zeros(basis.dim());
    for (i, c) in basis.states().iter().enumerate() {
        let m = c.modes(n);
        let s = m.as_slice();
        psi[i] = amp(s[0], s[1]);
    }
    let e = basis.e_mode();
    let kept = psi.norm_sqr();
    let dropped = if basis.kind() == ModelKind::Spin { amp(e, e).norm_sqr() } else { 0.0 };
    let total = kept + dropped;
    if total == 0.0 {
        return Err(Error::InvalidParams("product state vanishes".into()));
    }
    let drop_weight = dropped / total;
    if drop_weight > LOSSY_COMPOSE_TOL {
        log::warn!("LOSSY_COMPOSE: dropped weight {drop_weight:.2e}");
    }
    psi.normalize();
    Ok(Composed { state: psi, drop_weight })
}

/// Expected photon number per site (index `l + N`) followed by the atom
/// excitation probability (last entry).
pub fn photon_density(basis: &Basis, state: &[C64]) -> Vec<f64> {
    let n = basis.half_length();
    let mut d = vec![0.0; basis.sites() + 1];
    for (c, a) in basis.states().iter().zip(state) {
        let w = a.norm_sqr();
        for &m in c.modes(n).as_slice() {
            d[m] += w;
        }
    }
    d
}

/// Densities sampled along a trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityHistory {
    pub half_length: usize,
    pub times: Vec<f64>,
    /// `values[t][l + N]`, atom last.
    pub values: Vec<Vec<f64>>,
}

impl DensityHistory {
    pub fn new(half_length: usize) -> Self {
        DensityHistory { half_length, ..Default::default() }
    }

    pub fn from_trajectory(basis: &Basis, traj: &crate::propagator::Trajectory) -> Self {
        let mut h = Self::new(basis.half_length());
        for (t, s) in traj.times.iter().zip(&traj.states) {
            h.push(*t, photon_density(basis, s));
        }
        h
    }

    pub fn push(&mut self, t: f64, density: Vec<f64>) {
        self.times.push(t);
        self.values.push(density);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn site(&self, sample: usize, l: i32) -> f64 {
        self.values[sample][(l + self.half_length as i32) as usize]
    }

    pub fn atom(&self, sample: usize) -> f64 {
        *self.values[sample].last().unwrap()
    }

    pub fn total(&self, sample: usize) -> f64 {
        self.values[sample].iter().sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(name: impl Into<String>) -> Self {
        ObservableSeries { name: name.into(), ..Default::default() }
    }

    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn min_in(&self, start: f64, end: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= start && **t <= end)
            .map(|(_, v)| *v)
            .reduce(f64::min)
    }

    pub fn mean_in(&self, start: f64, end: f64) -> Option<f64> {
        let v: Vec<f64> =
            self.times.iter().zip(&self.values).filter(|(t, _)| **t >= start && **t <= end).map(|(_, v)| *v).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Weight on `e` and on sites `|l| <= l0`.
pub fn p_res_of(density: &[f64], half_length: usize, l0: usize) -> f64 {
    let n = half_length;
    let l0 = l0.min(n);
    density[n - l0..=n + l0].iter().sum::<f64>() + density[2 * n + 1]
}

pub fn p_res(history: &DensityHistory, l0: usize) -> ObservableSeries {
    let mut s = ObservableSeries::new("p_res");
    for (t, d) in history.times.iter().zip(&history.values) {
        s.push(*t, p_res_of(d, history.half_length, l0));
    }
    s
}

/// Time interval over which `P_res` is minimised, with the earliest time at
/// which boundary-reflected light can re-enter `[-l0, l0]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaWindow {
    pub start: f64,
    pub end: f64,
    pub limit: f64,
}

impl GammaWindow {
    /// Earliest re-entry time for a packet centred at `center` heading for the
    /// atom. Light moves at most `2 kappa`; the packet's leading edge
    /// (`3` half widths ahead of its centre) reaches `-l0` no earlier than
    /// `(|center| - 3 hw - l0) / 2kappa`, and whatever it throws back still has
    /// to travel out to the wall and back (`2 (N - l0)`).
    pub fn boundary_limit(half_length: usize, packet: &PacketSpec, l0: usize, kappa: f64) -> f64 {
        let n = half_length as f64;
        let l0 = l0 as f64;
        let lead = (packet.center.unsigned_abs() as f64 - 3.0 * packet.half_width() - l0).max(0.0);
        (lead + 2.0 * (n - l0)) / (2.0 * kappa)
    }

    pub fn for_packet(half_length: usize, packet: &PacketSpec, l0: usize, kappa: f64) -> Self {
        let limit = Self::boundary_limit(half_length, packet, l0, kappa);
        GammaWindow { start: 0.0, end: limit, limit }
    }

    pub fn validate(&self) -> Result<()> {
        if self.end > self.limit {
            return Err(Error::WindowTooLong { requested: self.end, limit: self.limit });
        }
        if self.start.partial_cmp(&self.end).is_none_or(|o| o.is_gt()) {
            return Err(Error::validation("window", "start must not exceed end"));
        }
        Ok(())
    }
}

/// `Gamma = 1 - min P_res(t)` over the window.
pub fn gamma_emission(history: &DensityHistory, l0: usize, window: &GammaWindow) -> Result<f64> {
    window.validate()?;
    gamma_from_series(&p_res(history, l0), window)
}

pub fn gamma_from_series(p_res: &ObservableSeries, window: &GammaWindow) -> Result<f64> {
    window.validate()?;
    let min = p_res
        .min_in(window.start, window.end)
        .ok_or_else(|| Error::validation("window", "no samples inside the window"))?;
    Ok(1.0 - min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionReflection {
    pub time: f64,
    /// Photon weight on `l > l0`.
    pub right: f64,
    /// Photon weight on `l < -l0`.
    pub left: f64,
    /// Weight on `|l| <= l0` and `e`.
    pub center: f64,
}

/// Split of the density at the last sample not after `t_final`.
pub fn transmission_reflection(history: &DensityHistory, t_final: f64, l0: usize) -> Result<TransmissionReflection> {
    let idx = history
        .times
        .iter()
        .rposition(|t| *t <= t_final + 1e-12)
        .ok_or_else(|| Error::validation("t_final", "before the first sample"))?;
    let d = &history.values[idx];
    let n = history.half_length;
    let l0 = l0.min(n);
    Ok(TransmissionReflection {
        time: history.times[idx],
        right: d[n + l0 + 1..2 * n + 1].iter().sum(),
        left: d[..n - l0].iter().sum(),
        center: p_res_of(d, n, l0),
    })
}

/// Atom excitation probability and its trailing average over `avg_window`.
pub fn polariton_witness(history: &DensityHistory, avg_window: f64) -> (ObservableSeries, ObservableSeries) {
    let mut atom = ObservableSeries::new("atom_excitation");
    let mut avg = ObservableSeries::new("atom_excitation_trailing_avg");
    let mut start = 0;
    let mut sum = 0.0;
    for (i, t) in history.times.iter().enumerate() {
        let a = history.atom(i);
        atom.push(*t, a);
        sum += a;
        while history.times[start] < t - avg_window {
            sum -= history.atom(start);
            start += 1;
        }
        avg.push(*t, sum / (i + 1 - start) as f64);
    }
    (atom, avg)
}

/// Distance between the two-photon energy `-2k cos k - 2k cos k'` and the
/// nearest photon-plus-polariton energy `-2k cos k'' + eps_+-`. Positive
/// means exact conversion is forbidden by energy conservation.
pub fn energy_mismatch(k: f64, k_prime: f64, params: &ModelParams) -> f64 {
    let kap = params.kappa;
    let e2 = -2.0 * kap * k.cos() - 2.0 * kap * k_prime.cos();
    let (ep, em) = bound_energies(params);
    [ep, em]
        .iter()
        .map(|eps| {
            let (lo, hi) = (eps - 2.0 * kap, eps + 2.0 * kap);
            if e2 < lo {
                lo - e2
            } else if e2 > hi {
                e2 - hi
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModeLabel {
    Bound { branch: Branch },
    Scattering { k: f64, even: bool },
}

/// Exact single-excitation eigenmodes of the finite spin chain.
#[derive(Clone, Debug)]
pub struct SingleParticleModes {
    pub half_length: usize,
    pub energies: Vec<f64>,
    /// Columns are modes, ordered by energy; rows are `l + N` then `e`.
    pub vectors: DMatrix<f64>,
    pub labels: Vec<ModeLabel>,
}

impl SingleParticleModes {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let basis = Basis::enumerate(params.half_length, Sector::One, ModelKind::Spin);
        let h = build_spin_hamiltonian(&params.with_u(crate::model::HubbardU::Infinite), &basis)?;
        let eig = SymmetricEigen::new(h.to_dense());
        let mut order: Vec<usize> = (0..basis.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(basis.dim(), basis.dim());
        let n = params.half_length;
        for (col, &src) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(src).into_owned();
            // fix the sign: first clearly nonzero component positive
            if let Some(x) = v.iter().find(|x| x.abs() > 1e-8) {
                if *x < 0.0 {
                    v.neg_mut();
                }
            }
            vectors.set_column(col, &v);
        }
        let band = 2.0 * params.kappa;
        let labels = (0..basis.dim())
            .map(|c| {
                let e = energies[c];
                if e > band + 1e-9 {
                    ModeLabel::Bound { branch: Branch::Plus }
                } else if e < -band - 1e-9 {
                    ModeLabel::Bound { branch: Branch::Minus }
                } else {
                    let k = (-e / band).clamp(-1.0, 1.0).acos();
                    // even modes are symmetric under l -> -l
                    let even = vectors[(n + 1, c)] * vectors[(n - 1, c)] >= 0.0
                        && (vectors[(n + 1, c)] - vectors[(n - 1, c)]).abs() < 1e-8;
                    ModeLabel::Scattering { k, even }
                }
            })
            .collect();
        Ok(SingleParticleModes { half_length: n, energies, vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn mode(&self, c: usize) -> StateVector {
        StateVector::from_real(self.vectors.column(c).as_slice())
    }

    pub fn bound_index(&self, branch: Branch) -> Option<usize> {
        self.labels.iter().position(|l| *l == ModeLabel::Bound { branch })
    }

    /// Scattering modes whose energy lies closest to `shell`, at most `max`.
    pub fn scattering_near(&self, shell: f64, max: usize) -> Vec<usize> {
        let mut idx: Vec<usize> =
            (0..self.len()).filter(|&c| matches!(self.labels[c], ModeLabel::Scattering { .. })).collect();
        idx.sort_by(|&a, &b| (self.energies[a] - shell).abs().total_cmp(&(self.energies[b] - shell).abs()));
        idx.truncate(max);
        idx.sort_unstable();
        idx
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolaritonPhotonAmp {
    pub branch: Branch,
    pub k: f64,
    pub mode: usize,
    pub amp: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonPairAmp {
    pub k: f64,
    pub k_prime: f64,
    pub modes: (usize, usize),
    pub amp: C64,
}

/// Expansion of a two-excitation state over normalised bosonic products of
/// single-particle eigenmodes.
#[derive(Clone, Debug)]
pub struct ChannelDecomposition {
    /// Polariton + photon, `|phi^sigma>|phi^k>`.
    pub c1: Vec<PolaritonPhotonAmp>,
    /// Two photons, `|phi^k>|phi^k'>`.
    pub c2: Vec<PhotonPairAmp>,
    /// Two polaritons, `|phi^sigma>|phi^sigma'>`.
    pub bound_pair_weight: f64,
    /// `||psi||^2 - sum |C1|^2 - sum |C2|^2`.
    pub residual_weight: f64,
    /// Condition number of the Gram matrix of the kept products.
    pub gram_condition: f64,
    coefficients: DMatrix<C64>,
    kept: Vec<bool>,
}

impl ChannelDecomposition {
    pub fn c1_weight(&self) -> f64 {
        self.c1.iter().map(|c| c.amp.norm_sqr()).sum()
    }

    pub fn c2_weight(&self) -> f64 {
        self.c2.iter().map(|c| c.amp.norm_sqr()).sum()
    }

    /// `sum C |product>` for the kept C1 and C2 terms, as the symmetric
    /// two-boson amplitude matrix over modes (sites then `e`).
    pub fn reconstruct_pair_matrix(&self, modes: &SingleParticleModes) -> DMatrix<C64> {
        let m = self.coefficients.nrows();
        let mut y = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                let bound_a = matches!(modes.labels[a], ModeLabel::Bound { .. });
                let bound_b = matches!(modes.labels[b], ModeLabel::Bound { .. });
                if self.kept[a] && self.kept[b] && !(bound_a && bound_b) {
                    y[(a, b)] = self.coefficients[(a, b)];
                }
            }
        }
        let u = modes.vectors.map(|x| C64::new(x, 0.0));
        &u * y * u.transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelOptions {
    /// Keep only this many scattering modes nearest `shell_energy`.
    pub max_modes: Option<usize>,
    pub shell_energy: f64,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        ChannelOptions { max_modes: None, shell_energy: 0.0 }
    }
}

/// Symmetric amplitude matrix `X` with `|psi> = (1/sqrt2) sum_ij X_ij a_i^+ a_j^+ |0>`
/// over modes (sites then `e`); a spin-basis state has `X_ee = 0`.
pub fn pair_matrix(basis: &Basis, state: &[C64]) -> Result<DMatrix<C64>> {
    basis.require(Some(Sector::Two), None)?;
    let n = basis.half_length();
    let m = basis.sites() + 1;
    let mut x = DMatrix::zeros(m, m);
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    for (c, a) in basis.states().iter().zip(state) {
        let modes = c.modes(n);
        let s = modes.as_slice();
        if s[0] == s[1] {
            x[(s[0], s[0])] = *a;
        } else {
            x[(s[0], s[1])] = a * inv;
            x[(s[1], s[0])] = a * inv;
        }
    }
    Ok(x)
}

/// Projects onto products of finite-chain eigenmodes. The products are
/// orthonormal in the two-boson space that also allows a doubly excited atom,
/// and a spin-model state lives in that space with zero amplitude there, so
/// the coefficients are plain inner products and `residual_weight` equals the
/// squared reconstruction error.
pub fn channel_decomposition(
    modes: &SingleParticleModes,
    basis: &Basis,
    state: &[C64],
    opts: &ChannelOptions,
) -> Result<ChannelDecomposition> {
    if modes.half_length != basis.half_length() {
        return Err(Error::BasisMismatch("modes and basis differ in half_length".into()));
    }
    let x = pair_matrix(basis, state)?;
    let u = modes.vectors.map(|v| C64::new(v, 0.0));
    let y = u.transpose() * x * &u;
    let m = modes.len();

    let mut kept = vec![true; m];
    if let Some(max) = opts.max_modes {
        let near = modes.scattering_near(opts.shell_energy, max);
        for (c, k) in kept.iter_mut().enumerate() {
            if matches!(modes.labels[c], ModeLabel::Scattering { .. }) {
                *k = near.binary_search(&c).is_ok();
            }
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let coef = |a: usize, b: usize| if a == b { y[(a, a)] } else { y[(a, b)] * sqrt2 };

    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    let mut bound_pair_weight = 0.0;
    for a in 0..m {
        for b in a..m {
            match (modes.labels[a], modes.labels[b]) {
                (ModeLabel::Bound { .. }, ModeLabel::Bound { .. }) => bound_pair_weight += coef(a, b).norm_sqr(),
                (ModeLabel::Bound { branch }, ModeLabel::Scattering { k, .. })
                | (ModeLabel::Scattering { k, .. }, ModeLabel::Bound { branch }) => {
                    let s = if matches!(modes.labels[a], ModeLabel::Scattering { .. }) { a } else { b };
                    if kept[s] {
                        c1.push(PolaritonPhotonAmp { branch, k, mode: s, amp: coef(a, b) });
                    }
                }
                (ModeLabel::Scattering { k, .. }, ModeLabel::Scattering { k: kp, .. }) => {
                    if kept[a] && kept[b] {
                        c2.push(PhotonPairAmp { k, k_prime: kp, modes: (a, b), amp: coef(a, b) });
                    }
                }
            }
        }
    }
    let norm2: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    let mut d = ChannelDecomposition {
        c1,
        c2,
        bound_pair_weight,
        residual_weight: 0.0,
        gram_condition: 1.0,
        coefficients: y,
        kept,
    };
    d.residual_weight = (norm2 - d.c1_weight() - d.c2_weight()).max(0.0);
    Ok(d)
}
