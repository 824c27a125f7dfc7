//! Pulse-sequence definitions and exact piecewise simulation of open-loop
//! dynamical decoupling: selective two-segment schemes, the symmetrized
//! Carr-Purcell arrangement, and four-segment maximal decoupling with a
//! configurable control path.

use num_complex::Complex64 as C64;

use crate::cxmat::{dagger, expm, identity, is_unitary, kron, matrix_power, CMatrix};
use crate::error::{Error, Result};
use crate::pauli::{PauliAxis, PauliLabel};

/// Piecewise-constant control over one cycle. Each segment stores the
/// control propagator held during the segment and its fraction of the
/// cycle time; instantaneous physical pulses are implied at the segment
/// boundaries as P_j = G_{j+1} G_j† (wrapping back to the first segment),
/// so the control returns to its initial value at the end of the cycle.
#[derive(Debug, Clone)]
pub struct PulseSequence {
    segments: Vec<(CMatrix, f64)>,
    cycle_time: f64,
}

impl PulseSequence {
    pub fn new(segments: Vec<(CMatrix, f64)>, cycle_time: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Precondition("pulse sequence needs at least one segment".into()));
        }
        if cycle_time <= 0.0 {
            return Err(Error::Precondition("cycle time must be positive".into()));
        }
        let dim = segments[0].0.nrows();
        let mut total = 0.0;
        for (g, frac) in &segments {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::Dimension("control propagators must share one dimension".into()));
            }
            if !is_unitary(g, 1e-10) {
                return Err(Error::Precondition("control propagators must be unitary".into()));
            }
            if *frac <= 0.0 || *frac > 1.0 {
                return Err(Error::Precondition("segment fractions must lie in (0, 1]".into()));
            }
            total += frac;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "segment fractions sum to {}, expected 1",
                total
            )));
        }
        Ok(PulseSequence { segments, cycle_time })
    }

    pub fn segments(&self) -> &[(CMatrix, f64)] {
        &self.segments
    }

    pub fn cycle_time(&self) -> f64 {
        self.cycle_time
    }

    pub fn control_dim(&self) -> usize {
        self.segments[0].0.nrows()
    }

    pub fn durations(&self) -> Vec<f64> {
        self.segments.iter().map(|(_, f)| f * self.cycle_time).collect()
    }

    /// Physical pulses implied at segment boundaries, P_j = G_{j+1} G_j†.
    pub fn pulses(&self) -> Vec<CMatrix> {
        let n = self.segments.len();
        (0..n)
            .map(|j| {
                let g_next = &self.segments[(j + 1) % n].0;
                g_next.dot(&dagger(&self.segments[j].0))
            })
            .collect()
    }

    /// Same sequence traversed `n` times as a single cycle of n-fold length.
    pub fn repeated(&self, n: usize) -> PulseSequence {
        assert!(n >= 1);
        let mut segments = Vec::with_capacity(self.segments.len() * n);
        for _ in 0..n {
            for (g, f) in &self.segments {
                segments.push((g.clone(), f / n as f64));
            }
        }
        PulseSequence {
            segments,
            cycle_time: self.cycle_time * n as f64,
        }
    }
}

/// Selective decoupling along one axis: {I, σ} with equal halves, or the
/// time-symmetric Carr-Purcell arrangement {I: 1/4, σ: 1/2, I: 1/4}.
pub fn sel_dd(axis: PauliAxis, t_c: f64, symmetrized: bool) -> Result<PulseSequence> {
    let sigma = axis.matrix();
    let segs = if symmetrized {
        vec![
            (identity(2), 0.25),
            (sigma, 0.5),
            (identity(2), 0.25),
        ]
    } else {
        vec![(identity(2), 0.5), (sigma, 0.5)]
    };
    PulseSequence::new(segs, t_c)
}

/// Maximal decoupling: four equal segments cycling the control through a
/// permutation of {I, σ_x, σ_y, σ_z}.
pub fn max_dd(path: [PauliLabel; 4], t_c: f64) -> Result<PulseSequence> {
    let mut seen = [false; 4];
    for label in path {
        let idx = match label {
            PauliLabel::I => 0,
            PauliLabel::X => 1,
            PauliLabel::Y => 2,
            PauliLabel::Z => 3,
        };
        if seen[idx] {
            return Err(Error::Precondition(
                "maximal decoupling path must be a permutation of {I, x, y, z}".into(),
            ));
        }
        seen[idx] = true;
    }
    let segs = path.iter().map(|l| (l.matrix(), 0.25)).collect();
    PulseSequence::new(segs, t_c)
}

/// All 24 orderings of {I, σ_x, σ_y, σ_z}.
pub fn all_max_dd_paths() -> Vec<[PauliLabel; 4]> {
    use PauliLabel::*;
    let items = [I, X, Y, Z];
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push([items[a], items[b], items[c], items[d]]);
            }
        }
    }
    out
}

/// Embed a system-side control propagator on the joint space, identity on
/// the remaining environment factor. `h_dim` must be a multiple of the
/// control dimension.
fn embed_control(g: &CMatrix, h_dim: usize) -> Result<CMatrix> {
    let cd = g.nrows();
    if h_dim == cd {
        return Ok(g.clone());
    }
    if !h_dim.is_multiple_of(cd) {
        return Err(Error::Dimension(format!(
            "control dimension {} does not divide joint dimension {}",
            cd, h_dim
        )));
    }
    Ok(kron(g, &identity(h_dim / cd)))
}

/// Exact propagator over one control cycle.
///
/// Segments are composed in time order with later factors on the left:
/// U = Π_j G_j† exp(−i H τ_j) G_j, which equals the physical-frame
/// propagator (instantaneous boundary pulses included) whenever the first
/// segment's control is the identity.
pub fn evolve_cycle(h: &CMatrix, seq: &PulseSequence) -> Result<CMatrix> {
    let dim = h.nrows();
    let mut u = identity(dim);
    for (g, frac) in seq.segments() {
        let tau = frac * seq.cycle_time();
        let g_full = embed_control(g, dim)?;
        let step = dagger(&g_full)
            .dot(&expm(h, C64::new(0.0, -tau))?)
            .dot(&g_full);
        u = step.dot(&u);
    }
    Ok(u)
}

/// Propagator over `n` consecutive cycles.
pub fn evolve_n_cycles(h: &CMatrix, seq: &PulseSequence, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Precondition("cycle count must be at least 1".into()));
    }
    let one = evolve_cycle(h, seq)?;
    Ok(matrix_power(&one, n))
}
