//! Protocol registry and runners: named control strategies mapped to
//! executable one-cycle channels, composed into fidelity-versus-time
//! traces recorded stroboscopically at cycle boundaries.

use std::fmt;
use std::str::FromStr;

use crate::cxmat::CMatrix;
use crate::decoupling::{evolve_cycle, max_dd, sel_dd, PulseSequence};
use crate::error::{Error, Result};
use crate::feedback::{def_cycle_spec, fed_cycle_spec, FeedbackCycle, RunMode};
use crate::fidelity::{channel_from_unitary, channel_of_feedback_cycle, entanglement_fidelity, Channel};
use crate::model::QubitErrorModel;
use crate::pauli::{PauliAxis, PauliLabel};

/// Default maximal-decoupling path; for a dominant σ_z drift this ordering
/// leaves only second-order corrections in the error strength.
pub const DEFAULT_MAXDD_PATH: [PauliLabel; 4] =
    [PauliLabel::I, PauliLabel::X, PauliLabel::Z, PauliLabel::Y];

/// Named single-qubit control strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolName {
    Free,
    /// Plain two-segment selective decoupling along an axis.
    SelDd(PauliAxis),
    /// Symmetrized (Carr-Purcell) selective decoupling along an axis.
    Cp(PauliAxis),
    MaxDd([PauliLabel; 4]),
    Fdd,
    Fed,
    FedPlain,
    Def,
}

impl ProtocolName {
    /// Number of pulse slots per cycle; the cycle time is this times Δt.
    pub fn slots_per_cycle(&self) -> usize {
        match self {
            ProtocolName::Free => 1,
            ProtocolName::MaxDd(_) => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolName::Free => write!(f, "free"),
            ProtocolName::SelDd(a) => write!(f, "seldd-{}", a.label()),
            ProtocolName::Cp(a) => write!(f, "cp-{}", a.label()),
            ProtocolName::MaxDd(path) => {
                write!(f, "maxdd:")?;
                for l in path {
                    write!(f, "{}", l.to_char())?;
                }
                Ok(())
            }
            ProtocolName::Fdd => write!(f, "fdd"),
            ProtocolName::Fed => write!(f, "fed"),
            ProtocolName::FedPlain => write!(f, "fed-plain"),
            ProtocolName::Def => write!(f, "def"),
        }
    }
}

impl FromStr for ProtocolName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axis = |c: &str| match c {
            "x" => Some(PauliAxis::X),
            "y" => Some(PauliAxis::Y),
            "z" => Some(PauliAxis::Z),
            _ => None,
        };
        match s {
            "free" => Ok(ProtocolName::Free),
            "fdd" => Ok(ProtocolName::Fdd),
            "fed" => Ok(ProtocolName::Fed),
            "fed-plain" => Ok(ProtocolName::FedPlain),
            "def" => Ok(ProtocolName::Def),
            "maxdd" => Ok(ProtocolName::MaxDd(DEFAULT_MAXDD_PATH)),
            _ => {
                if let Some(a) = s.strip_prefix("seldd-").and_then(axis) {
                    return Ok(ProtocolName::SelDd(a));
                }
                if let Some(a) = s.strip_prefix("cp-").and_then(axis) {
                    return Ok(ProtocolName::Cp(a));
                }
                if let Some(spec) = s.strip_prefix("maxdd:") {
                    let labels: Option<Vec<PauliLabel>> =
                        spec.chars().map(PauliLabel::from_char).collect();
                    let labels = labels.ok_or_else(|| Error::UnknownProtocol(s.into()))?;
                    let path: [PauliLabel; 4] = labels
                        .try_into()
                        .map_err(|_| Error::UnknownProtocol(s.into()))?;
                    // Reject repeated labels.
                    max_dd(path, 1.0).map_err(|_| Error::UnknownProtocol(s.into()))?;
                    return Ok(ProtocolName::MaxDd(path));
                }
                Err(Error::UnknownProtocol(s.into()))
            }
        }
    }
}

/// A fully specified protocol execution: protocol, model, time grid and
/// reproducibility parameters. The horizon is truncated to a whole number
/// of cycles so `t_total = cycles · t_c` holds exactly.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub name: ProtocolName,
    pub model: QubitErrorModel,
    pub t_total: f64,
    pub t_c: f64,
    pub dt: f64,
    pub cycles: usize,
    pub seed: u64,
    pub mode: RunMode,
}

impl ProtocolRun {
    pub fn new(name: ProtocolName, model: QubitErrorModel, t_total: f64, dt: f64) -> Result<Self> {
        if t_total <= 0.0 || dt <= 0.0 {
            return Err(Error::Precondition("times must be positive".into()));
        }
        let t_c = name.slots_per_cycle() as f64 * dt;
        let cycles = (t_total / t_c + 1e-9).floor() as usize;
        if cycles == 0 {
            return Err(Error::Precondition(format!(
                "horizon {} is shorter than one cycle {}",
                t_total, t_c
            )));
        }
        Ok(ProtocolRun {
            name,
            model,
            t_total: cycles as f64 * t_c,
            t_c,
            dt,
            cycles,
            seed: 0,
            mode: RunMode::Exact,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn dd_sequence(name: &ProtocolName, t_c: f64) -> Result<Option<PulseSequence>> {
    Ok(match name {
        ProtocolName::SelDd(a) => Some(sel_dd(*a, t_c, false)?),
        ProtocolName::Cp(a) => Some(sel_dd(*a, t_c, true)?),
        ProtocolName::MaxDd(path) => Some(max_dd(*path, t_c)?),
        _ => None,
    })
}

fn feedback_cycle(name: &ProtocolName, t_c: f64, dt: f64) -> Result<Option<FeedbackCycle>> {
    Ok(match name {
        // σ_x mixes the estimated σ_z axis; σ_z corrects the faulty branch.
        ProtocolName::Fdd => Some(FeedbackCycle::new(
            crate::pauli::sx(),
            crate::pauli::sz(),
            crate::feedback::InnerEvolution::Free(t_c),
        )?),
        ProtocolName::Fed => Some(fed_cycle_spec(t_c, dt, true)?),
        ProtocolName::FedPlain => Some(fed_cycle_spec(t_c, dt, false)?),
        ProtocolName::Def => Some(def_cycle_spec(t_c, dt)?),
        _ => None,
    })
}

/// One-cycle ensemble channel of the protocol (deterministic: feedback
/// protocols include both measurement branches with their corrections).
pub fn channel_of_protocol(run: &ProtocolRun) -> Result<Channel> {
    let h = run.model.total_hamiltonian();
    if let Some(seq) = dd_sequence(&run.name, run.t_c)? {
        let u = evolve_cycle(&h, &seq)?;
        return channel_from_unitary(&u);
    }
    if let Some(cycle) = feedback_cycle(&run.name, run.t_c, run.dt)? {
        let open = run.model.to_open_system();
        return channel_of_feedback_cycle(&open, &cycle);
    }
    // Free evolution.
    let u = crate::cxmat::expm(&h, num_complex::Complex64::new(0.0, -run.t_c))?;
    channel_from_unitary(&u)
}

/// Unitary of one cycle for the open-loop protocols, if applicable.
pub fn cycle_unitary(run: &ProtocolRun) -> Result<Option<CMatrix>> {
    let h = run.model.total_hamiltonian();
    if let Some(seq) = dd_sequence(&run.name, run.t_c)? {
        return Ok(Some(evolve_cycle(&h, &seq)?));
    }
    if matches!(run.name, ProtocolName::Free) {
        return Ok(Some(crate::cxmat::expm(
            &h,
            num_complex::Complex64::new(0.0, -run.t_c),
        )?));
    }
    Ok(None)
}

/// Entanglement fidelity of the accumulated channel at every cycle
/// boundary, starting with (0, 1).
pub fn run(run: &ProtocolRun) -> Result<Vec<(f64, f64)>> {
    let per_cycle = channel_of_protocol(run)?;
    let mut acc = Channel::identity_map();
    let mut out = Vec::with_capacity(run.cycles + 1);
    out.push((0.0, 1.0));
    for n in 1..=run.cycles {
        acc = per_cycle.compose(&acc);
        out.push((n as f64 * run.t_c, entanglement_fidelity(&acc)));
    }
    Ok(out)
}

/// Time-averaged fidelity of a trace (simple mean over the recorded points).
pub fn time_average(trace: &[(f64, f64)]) -> f64 {
    if trace.is_empty() {
        return f64::NAN;
    }
    trace.iter().map(|(_, f)| f).sum::<f64>() / trace.len() as f64
}

/// Which control layer corrects a Hamiltonian component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corrector {
    Decoupling,
    Feedback,
    NotCorrected,
}

impl fmt::Display for Corrector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Corrector::Decoupling => write!(f, "decoupling"),
            Corrector::Feedback => write!(f, "feedback"),
            Corrector::NotCorrected => write!(f, "nc"),
        }
    }
}

/// Registry entry describing a protocol family.
#[derive(Debug, Clone)]
pub struct ProtocolInfo {
    pub protocol: &'static str,
    pub acronym: &'static str,
    /// Which layer corrects the estimated Hamiltonian component.
    pub estimated_corrected_by: Corrector,
    /// Which layer corrects the estimation error.
    pub error_corrected_by: Corrector,
}

/// The protocol overview table.
pub fn table1_registry() -> Vec<ProtocolInfo> {
    vec![
        ProtocolInfo {
            protocol: "Selective Decoupling",
            acronym: "SelDD",
            estimated_corrected_by: Corrector::Decoupling,
            error_corrected_by: Corrector::NotCorrected,
        },
        ProtocolInfo {
            protocol: "Maximal Decoupling",
            acronym: "MaxDD",
            estimated_corrected_by: Corrector::Decoupling,
            error_corrected_by: Corrector::Decoupling,
        },
        ProtocolInfo {
            protocol: "Feedback-enacted DD",
            acronym: "FDD",
            estimated_corrected_by: Corrector::Feedback,
            error_corrected_by: Corrector::NotCorrected,
        },
        ProtocolInfo {
            protocol: "Feedback-Enhanced Decoupling",
            acronym: "FED",
            estimated_corrected_by: Corrector::Decoupling,
            error_corrected_by: Corrector::Feedback,
        },
        ProtocolInfo {
            protocol: "Decoupling-Enhanced Feedback",
            acronym: "DEF",
            estimated_corrected_by: Corrector::Feedback,
            error_corrected_by: Corrector::Decoupling,
        },
    ]
}
