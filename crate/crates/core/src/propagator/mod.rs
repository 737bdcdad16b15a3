//! Time evolution under static and rectangular-pulsed Hamiltonians.
//!
//! [`evolve`] is the workhorse (adaptive Lanczos, local error below
//! `tol` per substep, fixed summation order so reruns are bit-identical).
//! [`full_diag_reference`] is the dense spectral oracle it is checked against.

mod dense;
mod krylov;

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use dense::{full_diag_reference, DenseSpectrum, DEFAULT_DENSE_CAP};
pub use krylov::{KrylovConfig, KrylovStepper};

use crate::error::{Error, Result};
use crate::model::{KickedHamiltonian, SparseOperator};
use crate::state::StateVector;

/// Rectangular stand-in for `U0 delta(t - tau)`: height `U0 / width` on
/// `tau < t < tau + width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub u0: f64,
    pub tau: f64,
    pub width: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidPulse(self.width));
        }
        if !self.u0.is_finite() || !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParams(format!("pulse u0/tau must be finite, tau >= 0: {self:?}")));
        }
        Ok(())
    }

    pub fn amplitude(&self) -> f64 {
        self.u0 / self.width
    }

    pub fn end(&self) -> f64 {
        self.tau + self.width
    }

    pub fn with_width(self, width: f64) -> Self {
        PulseSpec { width, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub krylov: KrylovConfig,
    /// Abort on norm or energy drift.
    pub check_invariants: bool,
    pub norm_tol: f64,
    /// Energy drift bound relative to `||H||_inf`.
    pub energy_rel_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { krylov: KrylovConfig::default(), check_invariants: true, norm_tol: 1e-8, energy_rel_tol: 1e-8 }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        EvolveOptions { krylov: KrylovConfig { tol, ..KrylovConfig::default() }, ..Default::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&StateVector> {
        self.states.last()
    }

    /// Worst `| ||psi(t)|| - 1 |` over stored states.
    pub fn max_norm_error(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.states.iter().zip(&other.states).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvolveStats {
    pub matvecs: usize,
    pub max_norm_error: f64,
    pub max_energy_drift: f64,
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    for (i, t) in times.iter().enumerate() {
        if !t.is_finite() || *t < 0.0 {
            return Err(Error::validation("t_grid", format!("time {t} at index {i} must be finite and >= 0")));
        }
        if i > 0 && *t <= times[i - 1] {
            return Err(Error::validation("t_grid", "times must be strictly increasing"));
        }
    }
    Ok(())
}

fn check_dims(h: &SparseOperator, psi0: &[C64]) -> Result<()> {
    if h.dim() != psi0.len() {
        return Err(Error::BasisMismatch(format!("operator dim {} vs state dim {}", h.dim(), psi0.len())));
    }
    Ok(())
}

fn check_norm(psi0: &[C64], tol: f64) -> Result<()> {
    let n = crate::state::inner(psi0, psi0).re.sqrt();
    if (n - 1.0).abs() > tol {
        return Err(Error::InvariantViolation { name: "initial_norm".into(), detail: format!("||psi0|| = {n}") });
    }
    Ok(())
}

/// `exp(-i H dt) psi`, `dt` of either sign.
pub fn propagate(h: &SparseOperator, psi: &StateVector, dt: f64, opts: &EvolveOptions) -> Result<StateVector> {
    check_dims(h, psi)?;
    h.check_hermitian()?;
    let mut out = psi.clone();
    KrylovStepper::new(opts.krylov).advance(h, &mut out, dt)?;
    Ok(out)
}

/// Evolves `psi0` from `t = 0` and calls `observe(i, t_i, psi(t_i))` at each
/// sample time, without storing states.
pub fn evolve_streaming<F>(
    h: &SparseOperator,
    psi0: &StateVector,
    times: &[f64],
    opts: &EvolveOptions,
    observe: F,
) -> Result<EvolveStats>
where
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    let schedule = [Segment { end: f64::INFINITY, op: h }];
    evolve_segments(&schedule, psi0, times, opts, true, observe)
}

/// Stored-state variant of [`evolve_streaming`].
pub fn evolve(h: &SparseOperator, psi0: &StateVector, times: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    evolve_streaming(h, psi0, times, opts, |_, t, psi| {
        traj.times.push(t);
        traj.states.push(psi.clone());
        Ok(())
    })?;
    Ok(traj)
}

/// Piece of a piecewise-constant schedule, valid up to `end`.
#[derive(Clone, Copy)]
pub struct Segment<'a> {
    pub end: f64,
    pub op: &'a SparseOperator,
}

/// Evolution under a piecewise-constant Hamiltonian, splitting exactly at
/// segment boundaries. Energy is checked only when there is one segment.
pub fn evolve_segments<F>(
    schedule: &[Segment<'_>],
    psi0: &StateVector,
    times: &[f64],
    opts: &EvolveOptions,
    static_energy: bool,
    mut observe: F,
) -> Result<EvolveStats>
where
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    validate_times(times)?;
    if schedule.is_empty() {
        return Err(Error::validation("schedule", "empty schedule"));
    }
    for seg in schedule {
        check_dims(seg.op, psi0)?;
        seg.op.check_hermitian()?;
    }
    check_norm(psi0, opts.norm_tol)?;

    let check_energy = opts.check_invariants && static_energy && schedule.len() == 1;
    let h_static = schedule[0].op;
    let h_scale = h_static.norm_inf().max(1.0);
    let e0 = if check_energy { h_static.expectation(psi0) } else { 0.0 };

    let mut stepper = KrylovStepper::new(opts.krylov);
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut seg = 0;
    let mut stats = EvolveStats::default();
    for (i, &ts) in times.iter().enumerate() {
        while t < ts {
            while seg + 1 < schedule.len() && schedule[seg].end <= t {
                seg += 1;
            }
            let stop = ts.min(schedule[seg].end);
            stepper.advance(schedule[seg].op, &mut psi, stop - t)?;
            t = stop;
        }
        let norm_err = (psi.norm() - 1.0).abs();
        stats.max_norm_error = stats.max_norm_error.max(norm_err);
        if opts.check_invariants && norm_err > opts.norm_tol {
            return Err(Error::InvariantViolation {
                name: "norm".into(),
                detail: format!("| ||psi|| - 1 | = {norm_err:.3e} at t = {ts}"),
            });
        }
        if check_energy {
            let drift = (h_static.expectation(&psi) - e0).abs();
            stats.max_energy_drift = stats.max_energy_drift.max(drift);
            if drift > opts.energy_rel_tol * h_scale {
                return Err(Error::InvariantViolation {
                    name: "energy".into(),
                    detail: format!("|<H>(t) - <H>(0)| = {drift:.3e} at t = {ts}"),
                });
            }
        }
        observe(i, ts, &psi)?;
    }
    stats.matvecs = stepper.matvecs();
    Ok(stats)
}

/// `H0 -> H0 + (U0/w)|e><e| -> H0`, split exactly at `tau` and `tau + w`.
pub fn evolve_pulsed_streaming<F>(
    kicked: &KickedHamiltonian,
    psi0: &StateVector,
    times: &[f64],
    opts: &EvolveOptions,
    observe: F,
) -> Result<EvolveStats>
where
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    kicked.pulse.validate()?;
    let pulsed = kicked.pulsed_operator();
    let schedule = [
        Segment { end: kicked.pulse.tau, op: &kicked.h0 },
        Segment { end: kicked.pulse.end(), op: &pulsed },
        Segment { end: f64::INFINITY, op: &kicked.h0 },
    ];
    evolve_segments(&schedule, psi0, times, opts, false, observe)
}

pub fn evolve_pulsed(
    kicked: &KickedHamiltonian,
    psi0: &StateVector,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    evolve_pulsed_streaming(kicked, psi0, times, opts, |_, t, psi| {
        traj.times.push(t);
        traj.states.push(psi.clone());
        Ok(())
    })?;
    Ok(traj)
}

/// Outcome of repeatedly halving the pulse width.
#[derive(Clone, Debug)]
pub struct PulseConvergence {
    pub widths: Vec<f64>,
    /// Max density change against the previous width (first entry NaN).
    pub max_changes: Vec<f64>,
    pub converged: bool,
    /// Trajectory at the last (narrowest) width.
    pub trajectory: Trajectory,
}

impl PulseConvergence {
    pub fn final_width(&self) -> f64 {
        *self.widths.last().expect("at least one width")
    }
}

/// Halves the pulse width (fixed `U0`) until the largest change of
/// `|psi_i(t)|^2` over all samples drops below `w_conv_tol`.
pub fn converge_pulse_width(
    kicked: &KickedHamiltonian,
    psi0: &StateVector,
    times: &[f64],
    opts: &EvolveOptions,
    w_conv_tol: f64,
    max_halvings: usize,
) -> Result<PulseConvergence> {
    let density = |tr: &Trajectory| -> Vec<Vec<f64>> {
        tr.states.iter().map(|s| s.iter().map(|a| a.norm_sqr()).collect()).collect()
    };
    let mut k = kicked.clone();
    let mut traj = evolve_pulsed(&k, psi0, times, opts)?;
    let mut widths = vec![k.pulse.width];
    let mut max_changes = vec![f64::NAN];
    let mut prev = density(&traj);
    for _ in 0..max_halvings {
        k.pulse = k.pulse.with_width(k.pulse.width * 0.5);
        traj = evolve_pulsed(&k, psi0, times, opts)?;
        let cur = density(&traj);
        let change = prev.iter().flatten().zip(cur.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        widths.push(k.pulse.width);
        max_changes.push(change);
        prev = cur;
        if change < w_conv_tol {
            return Ok(PulseConvergence { widths, max_changes, converged: true, trajectory: traj });
        }
    }
    Ok(PulseConvergence { widths, max_changes, converged: false, trajectory: traj })
}
