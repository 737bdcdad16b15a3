//! Short-iterate Lanczos propagation `psi <- exp(-i H dt) psi`.
//!
//! Local error estimate: `beta_m |[exp(-i T_m dt) e_1]_m| ||psi||`, with
//! `T_m` the Lanczos tridiagonal matrix and `beta_m` the next off-diagonal.
//! The Krylov basis does not depend on `dt`, so when `max_dim` vectors are
//! not enough the step is halved on the existing basis.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::SparseOperator;
use crate::state::inner;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovConfig {
    /// Local error bound per substep.
    pub tol: f64,
    pub max_dim: usize,
    pub max_halvings: u32,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig { tol: 1e-9, max_dim: 40, max_halvings: 40 }
    }
}

struct Tridiag {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl Tridiag {
    fn new(alpha: &[f64], beta: &[f64]) -> Self {
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        Tridiag { eig: SymmetricEigen::new(t) }
    }

    /// `exp(-i T dt) e_1`
    fn exp_e1(&self, dt: f64) -> Vec<C64> {
        let q = &self.eig.eigenvectors;
        let m = q.nrows();
        let phase: Vec<C64> = (0..m).map(|k| C64::from_polar(1.0, -self.eig.eigenvalues[k] * dt) * q[(0, k)]).collect();
        (0..m).map(|i| (0..m).fold(ZERO, |acc, k| acc + phase[k] * q[(i, k)])).collect()
    }
}

pub struct KrylovStepper {
    cfg: KrylovConfig,
    basis: Vec<Vec<C64>>,
    w: Vec<C64>,
    matvecs: usize,
}

impl KrylovStepper {
    pub fn new(cfg: KrylovConfig) -> Self {
        KrylovStepper { cfg, basis: Vec::new(), w: Vec::new(), matvecs: 0 }
    }

    pub fn matvecs(&self) -> usize {
        self.matvecs
    }

    /// Advances `psi` by `dt` (either sign), substepping as needed.
    pub fn advance(&mut self, h: &SparseOperator, psi: &mut [C64], dt: f64) -> Result<()> {
        let mut remaining = dt;
        let mut substeps = 0usize;
        while remaining.abs() > 1e-15 * dt.abs() {
            remaining -= self.substep(h, psi, remaining)?;
            substeps += 1;
            if substeps > 1_000_000 {
                return Err(Error::ConvergenceFailure("more than 1e6 substeps within one sample".into()));
            }
        }
        Ok(())
    }

    /// One Krylov projection; returns the time actually advanced.
    fn substep(&mut self, h: &SparseOperator, psi: &mut [C64], dt: f64) -> Result<f64> {
        let dim = psi.len();
        let norm = inner(psi, psi).re.sqrt();
        if norm == 0.0 {
            return Ok(dt);
        }
        let max_m = self.cfg.max_dim.min(dim).max(1);
        if self.basis.len() < max_m {
            self.basis.resize_with(max_m, Vec::new);
        }
        self.w.resize(dim, ZERO);
        let mut alpha = Vec::with_capacity(max_m);
        let mut beta: Vec<f64> = Vec::with_capacity(max_m);

        let v0 = &mut self.basis[0];
        v0.clear();
        v0.extend(psi.iter().map(|a| a / norm));

        let breakdown = 1e-13 * h.norm_inf().max(1e-300);
        let mut step = dt;
        let tri = loop {
            let m = alpha.len();
            h.apply(&self.basis[m], &mut self.w);
            self.matvecs += 1;
            alpha.push(inner(&self.basis[m], &self.w).re);
            // full reorthogonalisation, two passes
            for _ in 0..2 {
                for v in &self.basis[..=m] {
                    let c = inner(v, &self.w);
                    self.w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let b = inner(&self.w, &self.w).re.sqrt();
            let tri = Tridiag::new(&alpha, &beta);
            if b <= breakdown {
                // invariant subspace: projection is exact
                break tri;
            }
            let last = alpha.len() - 1;
            let err = |tau: f64| b * tri.exp_e1(tau)[last].norm() * norm;
            if err(dt) <= self.cfg.tol {
                break tri;
            }
            if alpha.len() == max_m {
                let mut tau = dt;
                let mut ok = false;
                for _ in 0..self.cfg.max_halvings {
                    tau *= 0.5;
                    if err(tau) <= self.cfg.tol {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Err(Error::ConvergenceFailure(format!(
                        "local error above {:.1e} after {} halvings at Krylov dim {max_m}",
                        self.cfg.tol, self.cfg.max_halvings
                    )));
                }
                step = tau;
                break tri;
            }
            beta.push(b);
            let inv = 1.0 / b;
            let next = &mut self.basis[alpha.len()];
            next.clear();
            next.extend(self.w.iter().map(|x| x * inv));
        };

        let y = tri.exp_e1(step);
        psi.iter_mut().for_each(|p| *p = ZERO);
        for (k, yk) in y.iter().enumerate() {
            let c = yk * norm;
            psi.iter_mut().zip(&self.basis[k]).for_each(|(p, v)| *p += c * v);
        }
        Ok(step)
    }
}
