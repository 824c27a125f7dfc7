//! Single-bit feedback engine on the ancilla ⊗ system ⊗ environment space.
//!
//! One cycle entangles the system with a two-level ancilla through a
//! conditional gate, lets the joint system-environment propagator act,
//! undoes the conditional gate, rotates the ancilla by a Hadamard and
//! measures it. The measurement splits the joint propagator into the
//! symmetric and antisymmetric combinations
//! A± = (U_SE ± (U_S† ⊗ I) U_SE (U_S ⊗ I)) / 2; outcome 1 triggers a fast
//! reset that flips the ancilla back and applies the correction unitary to
//! the system.

use num_complex::Complex64 as C64;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cxmat::{
    dagger, density, expm, identity, is_unitary, kron, trace, zeros, CMatrix,
};
use crate::decoupling::{evolve_n_cycles, sel_dd, PulseSequence};
use crate::error::{Error, Result};
use crate::model::{OpenSystemModel, QubitErrorModel};
use crate::pauli::{self, conditional_gate, PauliAxis};

/// Evolution inserted between the conditional gates.
#[derive(Debug, Clone)]
pub enum InnerEvolution {
    /// Free evolution under the model Hamiltonian for the given duration.
    Free(f64),
    /// `repeats` consecutive cycles of a pulse sequence on the system.
    Cycles { seq: PulseSequence, repeats: usize },
}

impl InnerEvolution {
    pub fn duration(&self) -> f64 {
        match self {
            InnerEvolution::Free(t) => *t,
            InnerEvolution::Cycles { seq, repeats } => seq.cycle_time() * *repeats as f64,
        }
    }
}

/// Unintended unitary drift on the ancilla, parametrized by the initial
/// rates of the polar and azimuthal angles. The drift over a time t is
/// exp(−i t (θ̇ σ_y + (φ̇/2)(I − σ_z))), which reproduces the rotating
/// ancilla basis to first order in t while remaining exactly unitary.
#[derive(Debug, Clone, Copy)]
pub struct AncillaDrift {
    pub theta_rate: f64,
    pub phi_rate: f64,
}

impl AncillaDrift {
    pub fn unitary(&self, t: f64) -> Result<CMatrix> {
        let gen = pauli::sy().mapv(|z| z * C64::new(self.theta_rate, 0.0))
            + (identity(2) - pauli::sz()).mapv(|z| z * C64::new(self.phi_rate / 2.0, 0.0));
        expm(&gen, C64::new(0.0, -t))
    }
}

/// Control data for one feedback cycle.
#[derive(Debug, Clone)]
pub struct FeedbackCycle {
    /// Payload of the conditional gate (U_S).
    pub system_unitary: CMatrix,
    /// Correction applied to the system when the ancilla reads 1 (U_fb).
    pub correction: CMatrix,
    /// Reset on ancilla ⊗ system applied on outcome 1; defaults to
    /// σ_x ⊗ correction.
    pub reset: Option<CMatrix>,
    pub inner: InnerEvolution,
    pub drift: Option<AncillaDrift>,
}

impl FeedbackCycle {
    pub fn new(system_unitary: CMatrix, correction: CMatrix, inner: InnerEvolution) -> Result<Self> {
        if !is_unitary(&system_unitary, 1e-8) || !is_unitary(&correction, 1e-8) {
            return Err(Error::Precondition(
                "feedback cycle operators must be unitary".into(),
            ));
        }
        Ok(FeedbackCycle {
            system_unitary,
            correction,
            reset: None,
            inner,
            drift: None,
        })
    }

    pub fn with_drift(mut self, drift: AncillaDrift) -> Self {
        self.drift = Some(drift);
        self
    }

    pub fn with_reset(mut self, reset: CMatrix) -> Self {
        self.reset = Some(reset);
        self
    }

    /// Reset operator on ancilla ⊗ system.
    pub fn reset_operator(&self) -> CMatrix {
        match &self.reset {
            Some(r) => r.clone(),
            None => kron(&pauli::sx(), &self.correction),
        }
    }
}

/// One measurement branch: outcome bit, its probability, and the joint
/// ancilla ⊗ system ⊗ environment density operator after correction and
/// ancilla reset. A branch with (numerically) zero probability carries a
/// zero matrix as its post state.
#[derive(Debug, Clone)]
pub struct BranchOutcome {
    pub bit: u8,
    pub probability: f64,
    pub post_state: CMatrix,
}

/// Branch operators A± = (U_SE ± (U_S ⊗ I_E)† U_SE (U_S ⊗ I_E)) / 2 acting
/// on the system ⊗ environment space.
pub fn branch_operators(u_se: &CMatrix, u_s: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let dim = u_se.nrows();
    let ds = u_s.nrows();
    if !dim.is_multiple_of(ds) {
        return Err(Error::Dimension(format!(
            "system dimension {} does not divide joint dimension {}",
            ds, dim
        )));
    }
    let de = dim / ds;
    let u_s_full = kron(u_s, &identity(de));
    let conjugated = dagger(&u_s_full).dot(u_se).dot(&u_s_full);
    let half = C64::new(0.5, 0.0);
    let plus = (u_se + &conjugated).mapv(|z| z * half);
    let minus = (u_se - &conjugated).mapv(|z| z * half);
    Ok((plus, minus))
}

/// Joint propagator for the inner evolution of a cycle.
fn inner_propagator(model: &OpenSystemModel, inner: &InnerEvolution) -> Result<CMatrix> {
    match inner {
        InnerEvolution::Free(t) => model.propagator(*t),
        InnerEvolution::Cycles { seq, repeats } => {
            evolve_n_cycles(&model.total_hamiltonian(), seq, *repeats)
        }
    }
}

/// The unitary implementing steps (I)-(IV) of one cycle on the full
/// ancilla ⊗ system ⊗ environment space, measurement excluded.
pub(crate) fn cycle_unitary_for_channel(
    model: &OpenSystemModel,
    cycle: &FeedbackCycle,
) -> Result<CMatrix> {
    cycle_unitary(model, cycle)
}

fn cycle_unitary(model: &OpenSystemModel, cycle: &FeedbackCycle) -> Result<CMatrix> {
    let de = model.de;
    let dse = model.joint_dim();
    let u_se = inner_propagator(model, &cycle.inner)?;

    let entangle = kron(&conditional_gate(&cycle.system_unitary)?, &identity(de));
    let disentangle = kron(&conditional_gate(&dagger(&cycle.system_unitary))?, &identity(de));
    let evolve = match &cycle.drift {
        Some(d) => kron(&d.unitary(cycle.inner.duration())?, &u_se),
        None => kron(&identity(2), &u_se),
    };
    let rotate = kron(&pauli::hadamard(), &identity(dse));

    Ok(rotate.dot(&disentangle).dot(&evolve).dot(&entangle))
}

/// Split a joint density operator by the ancilla measurement; returns the
/// unnormalized blocks for outcomes 0 and 1.
fn project_ancilla(rho: &CMatrix, dse: usize) -> (CMatrix, CMatrix) {
    let mut block0 = zeros(2 * dse, 2 * dse);
    let mut block1 = zeros(2 * dse, 2 * dse);
    for i in 0..dse {
        for j in 0..dse {
            block0[[i, j]] = rho[[i, j]];
            block1[[dse + i, dse + j]] = rho[[dse + i, dse + j]];
        }
    }
    (block0, block1)
}

/// Run one feedback cycle on a system ⊗ environment density operator. The
/// ancilla is prepared in (|0⟩ + |1⟩)/√2, the cycle unitary applied, the
/// ancilla measured; outcome 1 additionally applies the reset operator.
fn cycle_on_joint(
    model: &OpenSystemModel,
    cycle: &FeedbackCycle,
    rho_se: &CMatrix,
) -> Result<(BranchOutcome, BranchOutcome)> {
    let dse = model.joint_dim();
    let u = cycle_unitary(model, cycle)?;

    let rho0 = kron(&density(&pauli::plus_state()), rho_se);
    let rho_pre = u.dot(&rho0).dot(&dagger(&u));
    let (raw0, raw1) = project_ancilla(&rho_pre, dse);

    let p0 = trace(&raw0).re;
    let p1 = trace(&raw1).re;

    let post0 = if p0 > 1e-14 {
        raw0.mapv(|z| z / C64::new(p0, 0.0))
    } else {
        zeros(2 * dse, 2 * dse)
    };

    let reset = kron(&cycle.reset_operator(), &identity(model.de));
    let corrected = reset.dot(&raw1).dot(&dagger(&reset));
    let post1 = if p1 > 1e-14 {
        corrected.mapv(|z| z / C64::new(p1, 0.0))
    } else {
        zeros(2 * dse, 2 * dse)
    };

    Ok((
        BranchOutcome { bit: 0, probability: p0, post_state: post0 },
        BranchOutcome { bit: 1, probability: p1, post_state: post1 },
    ))
}

/// One feedback cycle starting from a system state, with the environment
/// taken from the model.
pub fn fdd_cycle(
    model: &OpenSystemModel,
    cycle: &FeedbackCycle,
    rho_s: &CMatrix,
) -> Result<(BranchOutcome, BranchOutcome)> {
    if rho_s.nrows() != model.ds {
        return Err(Error::Dimension(format!(
            "system state dimension {} does not match model ds = {}",
            rho_s.nrows(),
            model.ds
        )));
    }
    let rho_se = kron(rho_s, &model.env_density());
    cycle_on_joint(model, cycle, &rho_se)
}

/// Deterministic or sampled repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Exact,
    Sampled,
}

/// Outcome record of a repeated feedback run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Measured bits, one per cycle (all zero in exact mode).
    pub outcomes: Vec<u8>,
    /// Conditional probability of outcome 0 at each cycle along the
    /// all-zero branch.
    pub per_cycle_p0: Vec<f64>,
    /// Joint probability of reading 0 in every cycle.
    pub joint_zero_probability: f64,
    /// Final system ⊗ environment state along the followed path.
    pub final_state: CMatrix,
}

/// Iterate the feedback cycle `n` times from the model's fiducial states.
///
/// Exact mode follows the all-zero measurement record and accumulates its
/// probability. Sampled mode draws each outcome with a seeded generator,
/// applies the per-outcome correction, and still reports the exact
/// all-zero-branch probability alongside.
pub fn fdd_repeated(
    model: &OpenSystemModel,
    cycle: &FeedbackCycle,
    rho_s: &CMatrix,
    n: usize,
    mode: RunMode,
    seed: u64,
) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::Precondition("repetition count must be at least 1".into()));
    }
    let dse = model.joint_dim();
    let u = cycle_unitary(model, cycle)?;
    let reset = kron(&cycle.reset_operator(), &identity(model.de));
    let plus = density(&pauli::plus_state());

    // Unnormalized all-zero branch for the joint probability.
    let mut zero_branch = kron(rho_s, &model.env_density());
    // Normalized state along the followed path (sampled mode only).
    let mut followed = zero_branch.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut outcomes = Vec::with_capacity(n);
    let mut per_cycle_p0 = Vec::with_capacity(n);
    let mut joint = 1.0;

    for _ in 0..n {
        // All-zero branch update.
        let w = trace(&zero_branch).re;
        if w > 1e-300 {
            let joint_rho = kron(&plus, &zero_branch);
            let rho_pre = u.dot(&joint_rho).dot(&dagger(&u));
            let (raw0, _) = project_ancilla(&rho_pre, dse);
            let p0 = trace(&raw0).re / w;
            per_cycle_p0.push(p0);
            joint *= p0.max(0.0);
            zero_branch = crate::cxmat::partial_trace(&raw0, &[2, dse], &[1])?;
        } else {
            per_cycle_p0.push(0.0);
            joint = 0.0;
        }

        match mode {
            RunMode::Exact => outcomes.push(0),
            RunMode::Sampled => {
                let joint_rho = kron(&plus, &followed);
                let rho_pre = u.dot(&joint_rho).dot(&dagger(&u));
                let (raw0, raw1) = project_ancilla(&rho_pre, dse);
                let p0 = trace(&raw0).re;
                let bit = if rng.gen::<f64>() < p0 { 0u8 } else { 1u8 };
                outcomes.push(bit);
                let kept = if bit == 0 {
                    raw0
                } else {
                    reset.dot(&raw1).dot(&dagger(&reset))
                };
                let w = trace(&kept).re;
                let normalized = kept.mapv(|z| z / C64::new(w, 0.0));
                followed = crate::cxmat::partial_trace(&normalized, &[2, dse], &[1])?;
            }
        }
    }

    let final_state = match mode {
        RunMode::Exact => {
            let w = trace(&zero_branch).re;
            if w > 1e-300 {
                zero_branch.mapv(|z| z / C64::new(w, 0.0))
            } else {
                zero_branch
            }
        }
        RunMode::Sampled => followed,
    };

    Ok(Trajectory {
        outcomes,
        per_cycle_p0,
        joint_zero_probability: joint,
        final_state,
    })
}

/// Feedback-enhanced decoupling cycle: conditional σ_z gates wrapped
/// around `t_c / (2 Δt)` cycles of the {I, σ_x} selective sequence
/// (symmetrized by default), with the σ_x ⊗ σ_x reset on outcome 1.
pub fn fed_cycle_spec(t_c: f64, dt: f64, symmetrized: bool) -> Result<FeedbackCycle> {
    let repeats = inner_repeats(t_c, dt)?;
    let seq = sel_dd(PauliAxis::X, 2.0 * dt, symmetrized)?;
    FeedbackCycle::new(
        pauli::sz(),
        pauli::sx(),
        InnerEvolution::Cycles { seq, repeats },
    )
}

/// Decoupling-enhanced feedback cycle: conditional σ_x gates around
/// symmetrized {I, σ_z} selective decoupling, with the σ_x ⊗ σ_z reset on
/// outcome 1. The symmetric arrangement keeps the residual transverse
/// error at second order in the pulse spacing; the plain arrangement
/// leaks a first-order σ_x component that neither control layer sees.
pub fn def_cycle_spec(t_c: f64, dt: f64) -> Result<FeedbackCycle> {
    let repeats = inner_repeats(t_c, dt)?;
    let seq = sel_dd(PauliAxis::Z, 2.0 * dt, true)?;
    FeedbackCycle::new(
        pauli::sx(),
        pauli::sz(),
        InnerEvolution::Cycles { seq, repeats },
    )
}

fn inner_repeats(t_c: f64, dt: f64) -> Result<usize> {
    if t_c <= 0.0 || dt <= 0.0 {
        return Err(Error::Precondition("cycle time and pulse spacing must be positive".into()));
    }
    let ratio = t_c / (2.0 * dt);
    let repeats = ratio.round();
    if repeats < 1.0 || (ratio - repeats).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Precondition(format!(
            "cycle time {} is not an integer multiple of one inner cycle 2Δt = {}",
            t_c,
            2.0 * dt
        )));
    }
    Ok(repeats as usize)
}

/// One cycle of feedback-enhanced decoupling on a closed qubit model,
/// starting from |0⟩⟨0|.
pub fn fed_cycle(
    model: &QubitErrorModel,
    t_c: f64,
    dt: f64,
) -> Result<(BranchOutcome, BranchOutcome)> {
    let open = model.to_open_system();
    let cycle = fed_cycle_spec(t_c, dt, true)?;
    fdd_cycle(&open, &cycle, &density(&crate::cxmat::basis_vector(2, 0)))
}

/// One cycle of decoupling-enhanced feedback on a closed qubit model.
pub fn def_cycle(
    model: &QubitErrorModel,
    t_c: f64,
    dt: f64,
) -> Result<(BranchOutcome, BranchOutcome)> {
    let open = model.to_open_system();
    let cycle = def_cycle_spec(t_c, dt)?;
    fdd_cycle(&open, &cycle, &density(&crate::cxmat::basis_vector(2, 0)))
}

/// Fidelity ⟨ψ|ρ_S|ψ⟩ of the reduced system state of a joint
/// ancilla ⊗ system ⊗ environment density operator against a pure state.
pub fn system_fidelity(
    joint: &CMatrix,
    model: &OpenSystemModel,
    psi: &crate::cxmat::CVector,
) -> Result<f64> {
    let rho_s = crate::cxmat::partial_trace(joint, &[2, model.ds, model.de], &[1])?;
    let mut f = C64::new(0.0, 0.0);
    for i in 0..model.ds {
        for j in 0..model.ds {
            f += psi[i].conj() * rho_s[[i, j]] * psi[j];
        }
    }
    Ok(f.re)
}
