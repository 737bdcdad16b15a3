//! Bases and sparse Hamiltonians for the cavity chain with one atom.

mod basis;
mod hamiltonian;
mod operator;
mod params;

pub use basis::{Basis, BasisTag, Config, ModeList, ModelKind, Sector};
pub use hamiltonian::{
    build_hamiltonian, build_hubbard_hamiltonian, build_kicked_hamiltonian, build_spin_hamiltonian, hubbard_onsite,
    parity_operator, total_excitation_operator, KickedHamiltonian,
};
pub use operator::SparseOperator;
pub use params::{HubbardU, ModelParams};
