//! Qubit channel extraction and fidelity measures against the identity
//! target: average fidelity from the Pauli-basis action, entanglement
//! fidelity, and the |tr U|²/d² shortcut for unitary evolutions.

use num_complex::Complex64 as C64;

use crate::cxmat::{
    dagger, density, hs_inner, identity, kron, partial_trace, trace, CMatrix,
};
use crate::error::{Error, Result};
use crate::feedback::FeedbackCycle;
use crate::model::OpenSystemModel;
use crate::pauli;

/// Linear map on qubit operators, stored as its action on {I, σx, σy, σz}.
#[derive(Debug, Clone)]
pub struct Channel {
    images: [CMatrix; 4],
}

fn pauli_basis() -> [CMatrix; 4] {
    [identity(2), pauli::sx(), pauli::sy(), pauli::sz()]
}

impl Channel {
    pub fn new(images: [CMatrix; 4]) -> Self {
        Channel { images }
    }

    pub fn identity_map() -> Self {
        Channel { images: pauli_basis() }
    }

    pub fn images(&self) -> &[CMatrix; 4] {
        &self.images
    }

    /// Apply to an arbitrary qubit operator by Pauli expansion.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let basis = pauli_basis();
        let mut out = crate::cxmat::zeros(2, 2);
        for (sigma, image) in basis.iter().zip(self.images.iter()) {
            let coeff = hs_inner(sigma, x) / C64::new(2.0, 0.0);
            out = out + image.mapv(|z| z * coeff);
        }
        out
    }

    /// self ∘ inner (first `inner`, then `self`).
    pub fn compose(&self, inner: &Channel) -> Channel {
        let images = [
            self.apply(&inner.images[0]),
            self.apply(&inner.images[1]),
            self.apply(&inner.images[2]),
            self.apply(&inner.images[3]),
        ];
        Channel { images }
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        (trace(&self.images[0]).re - 2.0).abs() + trace(&self.images[0]).im.abs()
    }
}

/// Channel of a system-only unitary, T(σ) = U σ U†.
pub fn channel_from_unitary(u: &CMatrix) -> Result<Channel> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::Dimension("unitary channel extraction needs a 2x2 matrix".into()));
    }
    let ud = dagger(u);
    let images = pauli_basis().map(|sigma| u.dot(&sigma).dot(&ud));
    Ok(Channel { images })
}

/// Channel of a joint system ⊗ environment unitary with the environment
/// prepared in a fixed state and traced out afterwards.
pub fn channel_from_joint_unitary(u_se: &CMatrix, env: &CMatrix) -> Result<Channel> {
    let de = env.nrows();
    if u_se.nrows() != 2 * de {
        return Err(Error::Dimension(format!(
            "joint unitary of dimension {} does not match environment dimension {}",
            u_se.nrows(),
            de
        )));
    }
    let ud = dagger(u_se);
    let mut images = Vec::with_capacity(4);
    for sigma in pauli_basis() {
        let joint = kron(&sigma, env);
        let pushed = u_se.dot(&joint).dot(&ud);
        images.push(partial_trace(&pushed, &[2, de], &[0])?);
    }
    Ok(Channel {
        images: images.try_into().expect("four Pauli images"),
    })
}

/// Ensemble channel of one feedback cycle: both measurement branches with
/// their corrections, ancilla and environment prepared fresh and traced
/// out. The feedback loop makes this map linear and trace preserving.
pub fn channel_of_feedback_cycle(
    model: &OpenSystemModel,
    cycle: &FeedbackCycle,
) -> Result<Channel> {
    if model.ds != 2 {
        return Err(Error::Dimension("feedback channel extraction needs a qubit system".into()));
    }
    let de = model.de;
    let dse = model.joint_dim();
    let u = crate::feedback::cycle_unitary_for_channel(model, cycle)?;
    let ud = dagger(&u);
    let reset = kron(&cycle.reset_operator(), &identity(de));
    let reset_d = dagger(&reset);
    let ancilla = density(&pauli::plus_state());
    let env = model.env_density();

    let mut images = Vec::with_capacity(4);
    for sigma in pauli_basis() {
        let joint = kron(&ancilla, &kron(&sigma, &env));
        let pushed = u.dot(&joint).dot(&ud);
        // Measurement blocks on the ancilla.
        let mut block0 = crate::cxmat::zeros(2 * dse, 2 * dse);
        let mut block1 = crate::cxmat::zeros(2 * dse, 2 * dse);
        for i in 0..dse {
            for j in 0..dse {
                block0[[i, j]] = pushed[[i, j]];
                block1[[dse + i, dse + j]] = pushed[[dse + i, dse + j]];
            }
        }
        let corrected = reset.dot(&block1).dot(&reset_d);
        let summed = block0 + corrected;
        images.push(partial_trace(&summed, &[2, 2, de], &[1])?);
    }
    Ok(Channel {
        images: images.try_into().expect("four Pauli images"),
    })
}

/// F̄ = 1/2 + (1/12) Σ_{j=x,y,z} tr(σ_j T(σ_j)).
pub fn average_fidelity(ch: &Channel) -> f64 {
    let acc: f64 = pauli_basis()
        .iter()
        .zip(ch.images())
        .skip(1)
        .map(|(sigma, image)| hs_inner(sigma, image).re)
        .sum();
    0.5 + acc / 12.0
}

/// Entanglement fidelity F = ((d+1)F̄ − 1)/d for d = 2.
pub fn entanglement_fidelity(ch: &Channel) -> f64 {
    (3.0 * average_fidelity(ch) - 1.0) / 2.0
}

pub use crate::protocols::channel_of_protocol;

/// |tr U|² / d² for a unitary acting on the system alone.
pub fn unitary_fidelity(u: &CMatrix) -> Result<f64> {
    if u.nrows() != u.ncols() {
        return Err(Error::NotSquare { rows: u.nrows(), cols: u.ncols() });
    }
    let d = u.nrows() as f64;
    Ok(trace(u).norm_sqr() / (d * d))
}
