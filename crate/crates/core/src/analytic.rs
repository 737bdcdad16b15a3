//! Closed-form single-excitation eigenstates of the spin model on the
//! infinite chain, evaluated on the finite basis.
//!
//! Bound polaritons `|phi+->` sit outside the band at `+-2 kappa cosh(beta)`
//! and decay as `exp(-beta |l|)`. Even-parity scattering states carry
//! `A_k e^{ik|l|} + B_k e^{-ik|l|}` away from the atom; odd-parity states are
//! plain `sin(k l)` modes that never see the atom.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Basis, Config, ModelParams, Sector, SparseOperator};
use crate::state::StateVector;

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// `beta` from `e^{2 beta} = sqrt((lambda / (sqrt2 kappa))^4 + 1) + (lambda / (sqrt2 kappa))^2`.
pub fn solve_beta(lambda: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParams(format!("kappa must be > 0, got {kappa}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!("lambda must be >= 0, got {lambda}")));
    }
    let x2 = lambda * lambda / (2.0 * kappa * kappa);
    Ok(0.5 * ((x2 * x2 + 1.0).sqrt() + x2).ln())
}

/// Residuals of `e^{2 beta} = sqrt(x^2 + 1) + x` with `x = lambda^2 / 2kappa^2`,
/// and of `lambda^2 = kappa^2 (e^{2 beta} - e^{-2 beta})`.
pub fn beta_identity_residuals(lambda: f64, kappa: f64, beta: f64) -> (f64, f64) {
    let x = lambda * lambda / (2.0 * kappa * kappa);
    let e2 = (2.0 * beta).exp();
    let defining = (e2 - ((x * x + 1.0).sqrt() + x)).abs();
    let lambda_sq = (lambda * lambda - kappa * kappa * (e2 - 1.0 / e2)).abs();
    (defining, lambda_sq)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundStateParams {
    pub beta: f64,
    /// Normalisation `Omega = (2 kappa / lambda)^2 sinh^2 beta + coth beta`.
    pub omega_norm: f64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    /// Atom weight `|<e|phi+->|^2 = (2 kappa / lambda)^2 sinh^2(beta) / Omega`.
    pub atom_weight: f64,
}

impl BoundStateParams {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if params.lambda == 0.0 {
            return Err(Error::InvalidParams("no bound state at lambda = 0".into()));
        }
        let beta = solve_beta(params.lambda, params.kappa)?;
        let r = 2.0 * params.kappa / params.lambda * beta.sinh();
        let omega_norm = r * r + 1.0 / beta.tanh();
        let (energy_plus, energy_minus) = bound_energies(params);
        Ok(BoundStateParams { beta, omega_norm, energy_plus, energy_minus, atom_weight: r * r / omega_norm })
    }

    pub fn energy(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.energy_plus,
            Branch::Minus => self.energy_minus,
        }
    }
}

/// `(eps+, eps-) = (+2 kappa cosh beta, -2 kappa cosh beta)`.
pub fn bound_energies(params: &ModelParams) -> (f64, f64) {
    let beta = solve_beta(params.lambda, params.kappa).unwrap_or(0.0);
    let e = 2.0 * params.kappa * beta.cosh();
    (e, -e)
}

fn require_one_exc(basis: &Basis, params: &ModelParams) -> Result<()> {
    basis.require(Some(Sector::One), None)?;
    if basis.half_length() != params.half_length {
        return Err(Error::BasisMismatch(format!(
            "params half_length {} != basis half_length {}",
            params.half_length,
            basis.half_length()
        )));
    }
    Ok(())
}

/// `|phi+->` with atom amplitude `+-(2 kappa / (lambda sqrt Omega)) sinh beta`
/// and photon amplitudes `(-+1)^{|l|} e^{-beta |l|} / sqrt Omega`. Amplitudes
/// are the infinite-chain values (no renormalisation on the finite chain).
pub fn bound_state(params: &ModelParams, branch: Branch, basis: &Basis) -> Result<StateVector> {
    bound_state_with_tol(params, branch, basis, DEFAULT_BOUNDARY_TOL)
}

pub fn bound_state_with_tol(
    params: &ModelParams,
    branch: Branch,
    basis: &Basis,
    boundary_tol: f64,
) -> Result<StateVector> {
    require_one_exc(basis, params)?;
    let bp = BoundStateParams::new(params)?;
    let tail = (-bp.beta * params.half_length as f64).exp();
    if tail >= boundary_tol {
        return Err(Error::TruncationTooCoarse { tail, tol: boundary_tol });
    }
    let s = branch.sign();
    let inv = 1.0 / bp.omega_norm.sqrt();
    let mut psi = StateVector::zeros(basis.dim());
    for (i, c) in basis.states().iter().enumerate() {
        let amp = match *c {
            Config::Photon(l) => {
                let sign = if l.unsigned_abs() % 2 == 1 { -s } else { 1.0 };
                sign * (-bp.beta * l.unsigned_abs() as f64).exp() * inv
            }
            Config::Excited => s * 2.0 * params.kappa / params.lambda * bp.beta.sinh() * inv,
            _ => unreachable!("one-excitation basis"),
        };
        psi[i] = C64::new(amp, 0.0);
    }
    Ok(psi)
}

/// Which closed form to use for the even scattering coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatteringConvention {
    /// `A_k`, `B_k` from solving the four matching conditions.
    Matched,
    /// The `varsigma_+-` combination carrying an extra `(lambda^2 - eps_k^2)`
    /// on the first term.
    Varsigma,
}

/// Coefficients of the even scattering state with `g_k = 1` (before
/// normalisation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringStateParams {
    pub k: f64,
    pub epsilon_k: f64,
    pub g: C64,
    pub f: C64,
    pub a: C64,
    pub b: C64,
    /// Squared norm of the unnormalised vector on the finite chain.
    pub lambda_norm: f64,
}

impl ScatteringStateParams {
    pub fn new(k: f64, params: &ModelParams, convention: ScatteringConvention) -> Result<Self> {
        params.validate()?;
        let sin_k = k.sin();
        if !(k > 0.0 && k < PI) || sin_k.abs() < 1e-12 {
            return Err(Error::SingularK(k));
        }
        if params.lambda == 0.0 {
            return Err(Error::InvalidParams("even scattering coefficients need lambda > 0".into()));
        }
        let (kap, lam) = (params.kappa, params.lambda);
        let eps = -2.0 * kap * k.cos();
        let g = C64::new(1.0, 0.0);
        let f = g * eps / lam;
        let i = C64::i();
        let denom = 4.0 * i * kap * lam * sin_k;
        let mix = lam * lam - eps * eps;
        let eik = C64::from_polar(1.0, k);
        let (a, b) = match convention {
            ScatteringConvention::Matched => {
                (-g / denom * (2.0 * kap * eps * eik.conj() - mix), g / denom * (2.0 * kap * eps * eik - mix))
            }
            ScatteringConvention::Varsigma => {
                ((mix * 2.0 * kap * eps * eik.conj() - mix) / denom, -(mix * 2.0 * kap * eps * eik + mix) / denom)
            }
        };
        Ok(ScatteringStateParams { k, epsilon_k: eps, g, f, a, b, lambda_norm: f64::NAN })
    }

    /// Residuals of the four matching conditions (dispersion, site 1, site 0,
    /// atom); all vanish for an exact solution.
    pub fn matching_residuals(&self, params: &ModelParams) -> [f64; 4] {
        let (kap, lam, k, eps) = (params.kappa, params.lambda, self.k, self.epsilon_k);
        let e = |x: f64| C64::from_polar(1.0, x);
        let (a, b, f, g) = (self.a, self.b, self.f, self.g);
        [
            (eps + kap * (e(k) + e(-k))).norm(),
            (eps * (a * e(k) + b * e(-k)) + kap * (a * e(2.0 * k) + b * e(-2.0 * k) + f)).norm(),
            (eps * f + 2.0 * kap * (a * e(k) + b * e(-k)) - lam * g).norm(),
            (eps * g - lam * f).norm(),
        ]
    }

    fn amplitude(&self, c: &Config) -> C64 {
        match *c {
            Config::Excited => self.g,
            Config::Photon(0) => self.f,
            Config::Photon(l) => {
                let x = self.k * l.unsigned_abs() as f64;
                self.a * C64::from_polar(1.0, x) + self.b * C64::from_polar(1.0, -x)
            }
            _ => unreachable!("one-excitation basis"),
        }
    }
}

/// Even-parity scattering state at momentum `k`, normalised on the finite
/// chain. Uses the [`ScatteringConvention::Matched`] coefficients.
pub fn scattering_state(k: f64, params: &ModelParams, basis: &Basis) -> Result<StateVector> {
    Ok(scattering_state_with(k, params, basis, ScatteringConvention::Matched)?.0)
}

pub fn scattering_state_with(
    k: f64,
    params: &ModelParams,
    basis: &Basis,
    convention: ScatteringConvention,
) -> Result<(StateVector, ScatteringStateParams)> {
    require_one_exc(basis, params)?;
    let mut sp = ScatteringStateParams::new(k, params, convention)?;
    let mut psi = StateVector::from_vec(basis.states().iter().map(|c| sp.amplitude(c)).collect());
    sp.lambda_norm = psi.norm_sqr();
    psi.normalize();
    Ok((psi, sp))
}

/// Largest `|(H psi - E psi)_i|` over rows whose stencil stays away from the
/// chain ends (`|l| < N - 1`) plus the atom row.
pub fn interior_residual(h: &SparseOperator, basis: &Basis, psi: &[C64], energy: f64) -> f64 {
    let hp = h.apply_new(psi);
    let n = basis.half_length() as i32;
    basis
        .states()
        .iter()
        .enumerate()
        .filter(|(_, c)| match c {
            Config::Photon(l) => l.abs() < n - 1,
            Config::Excited => true,
            _ => false,
        })
        .map(|(i, _)| (hp[i] - psi[i] * energy).norm())
        .fold(0.0, f64::max)
}

/// `max_i |(H psi - E psi)_i|` over the whole basis.
pub fn eigen_residual(h: &SparseOperator, psi: &[C64], energy: f64) -> f64 {
    let hp = h.apply_new(psi);
    hp.iter().zip(psi).map(|(a, b)| (a - b * energy).norm()).fold(0.0, f64::max)
}

/// Builds both coefficient conventions and returns the one with the smaller
/// interior residual against `h`, with both residuals.
pub fn preferred_convention(
    k: f64,
    params: &ModelParams,
    basis: &Basis,
    h: &SparseOperator,
) -> Result<(ScatteringConvention, f64, f64)> {
    let eps = -2.0 * params.kappa * k.cos();
    let (m, _) = scattering_state_with(k, params, basis, ScatteringConvention::Matched)?;
    let (t, _) = scattering_state_with(k, params, basis, ScatteringConvention::Varsigma)?;
    let rm = interior_residual(h, basis, &m, eps);
    let rt = interior_residual(h, basis, &t, eps);
    let best = if rt < rm { ScatteringConvention::Varsigma } else { ScatteringConvention::Matched };
    Ok((best, rm, rt))
}

/// Odd-parity mode `sin(k l)`, zero on site 0 and on the atom. Exact on the
/// open chain when `k = n pi / (N + 1)`.
pub fn odd_parity_state(k: f64, basis: &Basis) -> Result<StateVector> {
    basis.require(Some(Sector::One), None)?;
    let mut psi = StateVector::zeros(basis.dim());
    for (i, c) in basis.states().iter().enumerate() {
        if let Config::Photon(l) = *c {
            psi[i] = C64::new((k * l as f64).sin(), 0.0);
        }
    }
    if psi.norm() == 0.0 {
        return Err(Error::SingularK(k));
    }
    Ok(psi.normalized())
}

/// `k = n pi / (N + 1)`, `n = 1..=N`.
pub fn quantized_odd_k(n: usize, half_length: usize) -> f64 {
    n as f64 * PI / (half_length as f64 + 1.0)
}

/// `<phi^mu|e><e|phi^nu>`: `+|p|` for `mu = nu`, `-|p|` otherwise, with
/// `|p| = (4 kappa^2 / (lambda^2 Omega)) sinh^2 beta`.
pub fn overlap_p(params: &ModelParams, mu: Branch, nu: Branch) -> Result<f64> {
    if params.lambda == 0.0 {
        return Ok(0.0);
    }
    let bp = BoundStateParams::new(params)?;
    let sign = if mu == nu { 1.0 } else { -1.0 };
    Ok(sign * bp.atom_weight)
}

/// Second-order transition probabilities for a kick of strength `U0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transitions {
    /// `U0^2 p^2 (1 + U0^2)`
    pub t_plus_minus: f64,
    /// `(1 - U0^2 p)^2 + (U0 p)^2`
    pub t_diag: f64,
    /// `1 - T_diag - T_+- = 2 U0^2 p (1 - p - U0^2 p)`
    pub escape: f64,
    /// False when `escape < 0`, i.e. outside the perturbative regime.
    pub valid: bool,
}

pub fn perturbative_transitions(u0: f64, p: f64) -> Transitions {
    let u2 = u0 * u0;
    let t_plus_minus = u2 * p * p * (1.0 + u2);
    let t_diag = (1.0 - u2 * p).powi(2) + (u0 * p).powi(2);
    let escape = 2.0 * u2 * p * (1.0 - p - u2 * p);
    if escape < 0.0 {
        log::warn!("perturbative escape {escape:.3e} < 0 at U0 = {u0}, p = {p}: outside validity");
    }
    Transitions { t_plus_minus, t_diag, escape, valid: escape >= 0.0 }
}
