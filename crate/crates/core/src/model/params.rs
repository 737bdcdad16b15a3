use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-site interaction at the auxiliary site `e`. `Infinite` is the hardcore
/// limit, which is the two-level-atom (spin) model itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HubbardU {
    Finite(f64),
    Infinite,
}

impl HubbardU {
    pub fn finite(self) -> Option<f64> {
        match self {
            HubbardU::Finite(u) => Some(u),
            HubbardU::Infinite => None,
        }
    }
}

/// Chain with sites `l = -N..=N` (open ends), hopping `kappa`, atom coupling
/// `lambda` at site 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub half_length: usize,
    pub kappa: f64,
    pub lambda: f64,
    pub hubbard_u: HubbardU,
}

impl ModelParams {
    pub fn new(half_length: usize, kappa: f64, lambda: f64, hubbard_u: HubbardU) -> Result<Self> {
        let p = ModelParams { half_length, kappa, lambda, hubbard_u };
        p.validate()?;
        Ok(p)
    }

    /// Spin model (`U = INFINITE`).
    pub fn spin(half_length: usize, kappa: f64, lambda: f64) -> Result<Self> {
        Self::new(half_length, kappa, lambda, HubbardU::Infinite)
    }

    pub fn hubbard(half_length: usize, kappa: f64, lambda: f64, u: f64) -> Result<Self> {
        Self::new(half_length, kappa, lambda, HubbardU::Finite(u))
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_length < 1 {
            return Err(Error::InvalidParams("half_length must be >= 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParams(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if let HubbardU::Finite(u) = self.hubbard_u {
            if !u.is_finite() {
                return Err(Error::InvalidParams("finite hubbard_u must be a finite number".into()));
            }
        }
        Ok(())
    }

    /// Number of cavities `M = 2N + 1`.
    pub fn sites(&self) -> usize {
        2 * self.half_length + 1
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        ModelParams { lambda, ..self }
    }

    pub fn with_u(self, hubbard_u: HubbardU) -> Self {
        ModelParams { hubbard_u, ..self }
    }
}
