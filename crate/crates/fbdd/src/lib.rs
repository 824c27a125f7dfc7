//! Simulation of single-qubit open-loop dynamical decoupling and
//! single-bit feedback control protocols, with the algebraic
//! correctability checks, average-Hamiltonian analysis, fidelity
//! benchmarking and adaptive Hamiltonian estimation built on top.

pub mod conditions;
pub mod cxmat;
pub mod decoupling;
pub mod error;
pub mod estimate;
pub mod feedback;
pub mod fidelity;
pub mod magnus;
pub mod model;
pub mod pauli;
pub mod protocols;
pub mod randmat;

pub use cxmat::{CMatrix, CVector};
pub use error::{Error, Result};
pub use model::{OpenSystemModel, QubitErrorModel};
