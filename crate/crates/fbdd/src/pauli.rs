//! Qubit operator constants and composite-gate builders on the fixed
//! ancilla ⊗ system ⊗ environment factor ordering.

use ndarray::array;
use num_complex::Complex64 as C64;

use crate::cxmat::{identity, is_unitary, kron, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn si() -> CMatrix {
    identity(2)
}

pub fn sx() -> CMatrix {
    array![[ZERO, ONE], [ONE, ZERO]]
}

/// σ_y = [[0, −i], [i, 0]].
pub fn sy() -> CMatrix {
    array![
        [ZERO, C64::new(0.0, -1.0)],
        [C64::new(0.0, 1.0), ZERO]
    ]
}

pub fn sz() -> CMatrix {
    array![[ONE, ZERO], [ZERO, -ONE]]
}

pub fn hadamard() -> CMatrix {
    let h = C64::new(SQRT_HALF, 0.0);
    array![[h, h], [h, -h]]
}

/// Ancilla state (|0⟩ + |1⟩)/√2 used by every feedback protocol.
pub fn plus_state() -> ndarray::Array1<C64> {
    ndarray::arr1(&[C64::new(SQRT_HALF, 0.0), C64::new(SQRT_HALF, 0.0)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix(self) -> CMatrix {
        match self {
            PauliAxis::X => sx(),
            PauliAxis::Y => sy(),
            PauliAxis::Z => sz(),
        }
    }

    pub fn label(self) -> char {
        match self {
            PauliAxis::X => 'x',
            PauliAxis::Y => 'y',
            PauliAxis::Z => 'z',
        }
    }
}

/// Pauli-group element labels used to spell out maximal decoupling paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub fn matrix(self) -> CMatrix {
        match self {
            PauliLabel::I => si(),
            PauliLabel::X => sx(),
            PauliLabel::Y => sy(),
            PauliLabel::Z => sz(),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'i' => Some(PauliLabel::I),
            'x' => Some(PauliLabel::X),
            'y' => Some(PauliLabel::Y),
            'z' => Some(PauliLabel::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            PauliLabel::I => 'i',
            PauliLabel::X => 'x',
            PauliLabel::Y => 'y',
            PauliLabel::Z => 'z',
        }
    }
}

/// Named single-qubit gate.
#[derive(Debug, Clone)]
pub struct QubitGate {
    pub label: &'static str,
    pub matrix: CMatrix,
}

impl QubitGate {
    pub fn i() -> Self {
        QubitGate { label: "I", matrix: si() }
    }
    pub fn x() -> Self {
        QubitGate { label: "X", matrix: sx() }
    }
    pub fn y() -> Self {
        QubitGate { label: "Y", matrix: sy() }
    }
    pub fn z() -> Self {
        QubitGate { label: "Z", matrix: sz() }
    }
    pub fn h() -> Self {
        QubitGate { label: "H", matrix: hadamard() }
    }
}

/// Conditional gate |0⟩⟨0|_A ⊗ I_S + |1⟩⟨1|_A ⊗ U_S on ancilla ⊗ system.
pub fn conditional_gate(u_s: &CMatrix) -> Result<CMatrix> {
    let ds = u_s.nrows();
    if !is_unitary(u_s, 1e-10) {
        return Err(Error::Precondition(
            "conditional gate payload must be unitary".into(),
        ));
    }
    let mut out = identity(2 * ds);
    for i in 0..ds {
        for j in 0..ds {
            out[[ds + i, ds + j]] = u_s[[i, j]];
        }
    }
    Ok(out)
}

/// Tensor `op` into factor `slot` of a product space with the given factor
/// dimensions, identities everywhere else.
pub fn embed(op: &CMatrix, slot: usize, dims: &[usize]) -> Result<CMatrix> {
    if slot >= dims.len() {
        return Err(Error::Dimension(format!(
            "slot {} out of range for {} factors",
            slot,
            dims.len()
        )));
    }
    if op.nrows() != dims[slot] || op.ncols() != dims[slot] {
        return Err(Error::Dimension(format!(
            "operator dimension {}x{} does not match factor dimension {}",
            op.nrows(),
            op.ncols(),
            dims[slot]
        )));
    }
    let mut out = identity(1);
    for (k, &d) in dims.iter().enumerate() {
        out = if k == slot {
            kron(&out, op)
        } else {
            kron(&out, &identity(d))
        };
    }
    Ok(out)
}
