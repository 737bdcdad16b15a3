//! Photon and polariton scattering in a one-dimensional coupled-cavity array
//! with a single two-level atom at the central cavity.
//!
//! Dynamics run in the one- and two-excitation sectors of either the
//! two-level-atom (spin) model or its auxiliary-site Hubbard form, with
//! adaptive Krylov propagation on sparse Hamiltonians.

pub mod analytic;
pub mod error;
pub mod invariants;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod scenario;
pub mod state;

pub use error::{Error, Result};
pub use model::{Basis, Config, HubbardU, ModelKind, ModelParams, Sector, SparseOperator};
pub use propagator::{PulseSpec, Trajectory};
pub use state::StateVector;
