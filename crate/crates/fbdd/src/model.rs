//! System-environment Hamiltonian models.
//!
//! The joint drift is `H_S ⊗ I_E + I_S ⊗ H_E + Σ_i S_i ⊗ B_i`, with the
//! system-side coupling operators traceless. An environment dimension of 1
//! encodes a closed system. Units are ħ = 1, with frequencies expressed in
//! units of the nominal qubit splitting.

use num_complex::Complex64 as C64;

use crate::cxmat::{
    basis_vector, density, expm, fro_norm, identity, is_hermitian, kron, trace, zeros, CMatrix,
    CVector,
};
use crate::error::{Error, Result};
use crate::pauli;

/// Open-system model with explicit system, environment and coupling blocks.
#[derive(Debug, Clone)]
pub struct OpenSystemModel {
    pub ds: usize,
    pub de: usize,
    pub h_s: CMatrix,
    pub h_e: CMatrix,
    pub couplings: Vec<(CMatrix, CMatrix)>,
    env_state: CVector,
}

impl OpenSystemModel {
    pub fn new(
        ds: usize,
        de: usize,
        h_s: CMatrix,
        h_e: CMatrix,
        couplings: Vec<(CMatrix, CMatrix)>,
    ) -> Result<Self> {
        if h_s.nrows() != ds || h_s.ncols() != ds {
            return Err(Error::Dimension(format!(
                "system block is {}x{}, expected {0}x{0} with ds = {2}",
                h_s.nrows(),
                h_s.ncols(),
                ds
            )));
        }
        if h_e.nrows() != de || h_e.ncols() != de {
            return Err(Error::Dimension(format!(
                "environment block is {}x{}, expected de = {}",
                h_e.nrows(),
                h_e.ncols(),
                de
            )));
        }
        if !is_hermitian(&h_s, 1e-12) || !is_hermitian(&h_e, 1e-12) {
            return Err(Error::Precondition("model blocks must be Hermitian".into()));
        }
        for (i, (s, b)) in couplings.iter().enumerate() {
            if s.nrows() != ds || b.nrows() != de {
                return Err(Error::Dimension(format!(
                    "coupling {} has dimensions {}x{}",
                    i,
                    s.nrows(),
                    b.nrows()
                )));
            }
            if !is_hermitian(s, 1e-12) || !is_hermitian(b, 1e-12) {
                return Err(Error::Precondition(format!(
                    "coupling {} blocks must be Hermitian",
                    i
                )));
            }
            if trace(s).norm() > 1e-12 * fro_norm(s).max(1.0) {
                return Err(Error::Precondition(format!(
                    "system-side coupling operator {} must be traceless",
                    i
                )));
            }
        }
        Ok(OpenSystemModel {
            ds,
            de,
            h_s,
            h_e,
            couplings,
            env_state: basis_vector(de, 0),
        })
    }

    /// Closed system: environment dimension 1, no couplings.
    pub fn closed(h_s: CMatrix) -> Result<Self> {
        let ds = h_s.nrows();
        Self::new(ds, 1, h_s, zeros(1, 1), Vec::new())
    }

    /// Replace the default |0…0⟩ environment state.
    pub fn with_env_state(mut self, xi: CVector) -> Result<Self> {
        if xi.len() != self.de {
            return Err(Error::Dimension(format!(
                "environment state has length {}, expected {}",
                xi.len(),
                self.de
            )));
        }
        let nrm: f64 = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition("environment state must be normalized".into()));
        }
        self.env_state = xi;
        Ok(self)
    }

    pub fn env_state(&self) -> &CVector {
        &self.env_state
    }

    pub fn env_density(&self) -> CMatrix {
        density(&self.env_state)
    }

    pub fn joint_dim(&self) -> usize {
        self.ds * self.de
    }

    /// Assemble the joint Hamiltonian on the system ⊗ environment space.
    pub fn total_hamiltonian(&self) -> CMatrix {
        let mut h = kron(&self.h_s, &identity(self.de)) + kron(&identity(self.ds), &self.h_e);
        for (s, b) in &self.couplings {
            h = h + kron(s, b);
        }
        h
    }

    /// Joint propagator exp(−i H t).
    pub fn propagator(&self, t: f64) -> Result<CMatrix> {
        if t < 0.0 {
            return Err(Error::Precondition("evolution time must be nonnegative".into()));
        }
        if t == 0.0 {
            return Ok(identity(self.joint_dim()));
        }
        expm(&self.total_hamiltonian(), C64::new(0.0, -t))
    }
}

/// Single-qubit Hamiltonian split into an estimated z component and error
/// components along all three axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitErrorModel {
    pub omega_z: f64,
    pub eps_x: f64,
    pub eps_y: f64,
    pub eps_z: f64,
}

impl QubitErrorModel {
    pub fn new(omega_z: f64, eps_x: f64, eps_y: f64, eps_z: f64) -> Self {
        QubitErrorModel {
            omega_z,
            eps_x,
            eps_y,
            eps_z,
        }
    }

    /// ω_z σ_z + ε_x σ_x + ε_y σ_y + ε_z σ_z.
    pub fn total_hamiltonian(&self) -> CMatrix {
        let mut h = zeros(2, 2);
        h = h + pauli::sz().mapv(|z| z * C64::new(self.omega_z + self.eps_z, 0.0));
        h = h + pauli::sx().mapv(|z| z * C64::new(self.eps_x, 0.0));
        h = h + pauli::sy().mapv(|z| z * C64::new(self.eps_y, 0.0));
        h
    }

    pub fn error_vector(&self) -> [f64; 3] {
        [self.eps_x, self.eps_y, self.eps_z]
    }

    pub fn to_open_system(&self) -> OpenSystemModel {
        OpenSystemModel::closed(self.total_hamiltonian()).expect("qubit Hamiltonian is Hermitian")
    }
}
