//! Adaptive Hamiltonian estimation: invert the correction statistics of
//! the two concatenated feedback protocols to estimate the transverse and
//! longitudinal error components, then iteratively re-aim the control
//! frame at the updated estimate.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cxmat::{dagger, expm, CMatrix};
use crate::error::{Error, Result};
use crate::feedback::{def_cycle, fed_cycle, RunMode};
use crate::magnus::pauli_components;
use crate::model::QubitErrorModel;
use crate::pauli;

/// One tuning iteration: measured correction frequencies, derived error
/// estimates, the sign in use and the distance to the true Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub p1_x: f64,
    pub p1_z: f64,
    pub est_eps_x: f64,
    pub est_eps_z: f64,
    pub sign_x: f64,
    pub error_norm: f64,
}

/// Running state of the estimation loop. The estimate is the Pauli vector
/// of the current Hamiltonian guess; the weights stay in (0, 1].
#[derive(Debug, Clone)]
pub struct EstimationState {
    pub estimate: [f64; 3],
    pub eta_x: f64,
    pub eta_z: f64,
    pub sign_x: f64,
    pub history: Vec<IterationRecord>,
}

impl EstimationState {
    pub fn new(estimate: [f64; 3], eta_x: f64, eta_z: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_x) || eta_x == 0.0 || !(0.0..=1.0).contains(&eta_z) || eta_z == 0.0
        {
            return Err(Error::Precondition("weights must lie in (0, 1]".into()));
        }
        Ok(EstimationState {
            estimate,
            eta_x,
            eta_z,
            sign_x: 1.0,
            history: Vec::new(),
        })
    }

    pub fn with_sign(mut self, sign: f64) -> Self {
        self.sign_x = sign.signum();
        self
    }

    pub fn estimate_matrix(&self) -> CMatrix {
        pauli::sx().mapv(|z| z * C64::new(self.estimate[0], 0.0))
            + pauli::sy().mapv(|z| z * C64::new(self.estimate[1], 0.0))
            + pauli::sz().mapv(|z| z * C64::new(self.estimate[2], 0.0))
    }

    pub fn error_norm(&self, truth: &QubitErrorModel) -> f64 {
        let dx = self.estimate[0] - truth.eps_x;
        let dy = self.estimate[1] - truth.eps_y;
        let dz = self.estimate[2] - (truth.omega_z + truth.eps_z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Parameters shared by the estimators and the tuning loop.
#[derive(Debug, Clone, Copy)]
pub struct TuneConfig {
    pub t_c: f64,
    pub dt: f64,
    pub trials: usize,
    pub mode: RunMode,
    pub iterations: usize,
    /// Early stop once both derived error estimates drop below this floor.
    pub p1_floor: f64,
}

impl TuneConfig {
    pub fn exact(t_c: f64, dt: f64, iterations: usize) -> Self {
        TuneConfig {
            t_c,
            dt,
            trials: 0,
            mode: RunMode::Exact,
            iterations,
            p1_floor: 1e-6,
        }
    }
}

fn observed_p1(exact_p1: f64, trials: usize, mode: RunMode, rng: &mut ChaCha8Rng) -> f64 {
    match mode {
        RunMode::Exact => exact_p1,
        RunMode::Sampled => {
            let mut hits = 0usize;
            for _ in 0..trials {
                if rng.gen::<f64>() < exact_p1 {
                    hits += 1;
                }
            }
            hits as f64 / trials.max(1) as f64
        }
    }
}

fn invert_sin2(p1: f64, t_c: f64) -> f64 {
    p1.clamp(0.0, 1.0).sqrt().asin() / t_c
}

/// |ε_x| from the transverse correction frequency p₁ = sin²(ε_x T_c).
pub fn estimate_eps_x(
    model: &QubitErrorModel,
    t_c: f64,
    dt: f64,
    trials: usize,
    mode: RunMode,
    seed: u64,
) -> Result<f64> {
    let (_, b1) = fed_cycle(model, t_c, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1 = observed_p1(b1.probability, trials, mode, &mut rng);
    Ok(invert_sin2(p1, t_c))
}

/// Signed ε_z relative to the unit estimated strength, from the
/// longitudinal correction frequency p₁ = sin²((1 + ε_z) T_c).
pub fn estimate_eps_z(
    model: &QubitErrorModel,
    t_c: f64,
    dt: f64,
    trials: usize,
    mode: RunMode,
    seed: u64,
) -> Result<f64> {
    let (_, b1) = def_cycle(model, t_c, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1 = observed_p1(b1.probability, trials, mode, &mut rng);
    Ok(invert_sin2(p1, t_c) - 1.0)
}

/// Rotation taking σ_z to the current estimate direction (x-z plane).
fn frame_rotation(estimate: &[f64; 3]) -> Result<CMatrix> {
    let theta = estimate[0].atan2(estimate[2]);
    expm(&pauli::sy(), C64::new(0.0, -theta / 2.0))
}

/// Pauli vector of the true Hamiltonian expressed in the estimate frame.
fn frame_components(truth: &QubitErrorModel, w: &CMatrix) -> [f64; 3] {
    let h = truth.total_hamiltonian();
    let rotated = dagger(w).dot(&h).dot(w);
    let c = pauli_components(&rotated);
    [c[1], c[2], c[3]]
}

/// Iterate the estimate-measure-update loop against a fixed true model.
///
/// Each iteration runs the transverse and longitudinal protocols in the
/// frame aligned with the current estimate, inverts the correction
/// frequencies, updates the estimate with the configured weights, and
/// flips the transverse sign whenever its correction frequency went up
/// compared to the previous iteration.
pub fn tune(
    mut state: EstimationState,
    truth: &QubitErrorModel,
    cfg: &TuneConfig,
    seed: u64,
) -> Result<EstimationState> {
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let mut prev_p1x: Option<f64> = None;

    for iteration in 0..cfg.iterations {
        let w = frame_rotation(&state.estimate)?;
        let h_frame = frame_components(truth, &w);
        let frame_model = QubitErrorModel::new(0.0, h_frame[0], h_frame[1], h_frame[2]);
        let omega_hat = (state.estimate[0].powi(2)
            + state.estimate[1].powi(2)
            + state.estimate[2].powi(2))
        .sqrt();

        // Transverse stage: selective decoupling keeps only the in-frame
        // x component, the feedback corrections count its rotations.
        let (_, fed_b1) = fed_cycle(&frame_model, cfg.t_c, cfg.dt)?;
        let mut rng_x = ChaCha8Rng::seed_from_u64(seeder.gen());
        let p1_x = observed_p1(fed_b1.probability, cfg.trials, cfg.mode, &mut rng_x);
        let est_eps_x = invert_sin2(p1_x, cfg.t_c);

        // Longitudinal stage: the feedback loop measures the full in-frame
        // z rotation; subtract the current estimated strength.
        let (_, def_b1) = def_cycle(&frame_model, cfg.t_c, cfg.dt)?;
        let mut rng_z = ChaCha8Rng::seed_from_u64(seeder.gen());
        let p1_z = observed_p1(def_b1.probability, cfg.trials, cfg.mode, &mut rng_z);
        let est_eps_z = invert_sin2(p1_z, cfg.t_c) - omega_hat;

        if let Some(prev) = prev_p1x {
            if p1_x > prev + 1e-15 {
                state.sign_x = -state.sign_x;
            }
        }
        prev_p1x = Some(p1_x);

        // Update in the estimate frame, rotate back.
        let new_z = omega_hat + state.eta_z * est_eps_z;
        let new_x = state.sign_x * state.eta_x * est_eps_x;
        let updated = w
            .dot(
                &(pauli::sz().mapv(|z| z * C64::new(new_z, 0.0))
                    + pauli::sx().mapv(|z| z * C64::new(new_x, 0.0))),
            )
            .dot(&dagger(&w));
        let c = pauli_components(&updated);
        state.estimate = [c[1], c[2], c[3]];

        state.history.push(IterationRecord {
            iteration,
            p1_x,
            p1_z,
            est_eps_x,
            est_eps_z,
            sign_x: state.sign_x,
            error_norm: state.error_norm(truth),
        });

        if est_eps_x.abs() <= cfg.p1_floor && est_eps_z.abs() <= cfg.p1_floor {
            break;
        }
    }
    Ok(state)
}
