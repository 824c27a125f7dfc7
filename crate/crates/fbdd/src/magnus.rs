//! Average-Hamiltonian machinery for piecewise-constant control cycles:
//! the duration-weighted zeroth-order average and the first-order
//! correction of the Magnus series for the toggling-frame generator.

use num_complex::Complex64 as C64;

use crate::cxmat::{commutator, dagger, expm, identity, is_hermitian, CMatrix};
use crate::decoupling::PulseSequence;
use crate::error::{Error, Result};
use crate::pauli;

/// Toggling-frame Hamiltonians G_j† H G_j with their segment durations.
#[derive(Debug, Clone)]
pub struct ToggledSequence {
    terms: Vec<(CMatrix, f64)>,
}

impl ToggledSequence {
    pub fn new(terms: Vec<(CMatrix, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Precondition("toggled sequence must not be empty".into()));
        }
        for (h, tau) in &terms {
            if !is_hermitian(h, 1e-10) {
                return Err(Error::Precondition("toggled Hamiltonians must be Hermitian".into()));
            }
            if *tau <= 0.0 {
                return Err(Error::Precondition("segment durations must be positive".into()));
            }
        }
        Ok(ToggledSequence { terms })
    }

    pub fn terms(&self) -> &[(CMatrix, f64)] {
        &self.terms
    }

    pub fn cycle_time(&self) -> f64 {
        self.terms.iter().map(|(_, tau)| tau).sum()
    }
}

/// Toggle a (possibly bipartite) Hamiltonian through a pulse sequence:
/// H̃_j = (G_j ⊗ I_E)† H (G_j ⊗ I_E), in segment order.
pub fn toggled_sequence(h: &CMatrix, pulses: &PulseSequence) -> Result<ToggledSequence> {
    let dim = h.nrows();
    let cd = pulses.control_dim();
    if !dim.is_multiple_of(cd) {
        return Err(Error::Dimension(format!(
            "control dimension {} does not divide Hamiltonian dimension {}",
            cd, dim
        )));
    }
    let env = dim / cd;
    let mut terms = Vec::with_capacity(pulses.segments().len());
    for (g, frac) in pulses.segments() {
        let g_full = if env == 1 {
            g.clone()
        } else {
            crate::cxmat::kron(g, &identity(env))
        };
        let toggled = dagger(&g_full).dot(h).dot(&g_full);
        terms.push((toggled, frac * pulses.cycle_time()));
    }
    ToggledSequence::new(terms)
}

/// Zeroth-order average: duration-weighted mean of the toggled terms.
pub fn average_hamiltonian(seq: &ToggledSequence) -> CMatrix {
    let t_c = seq.cycle_time();
    let dim = seq.terms()[0].0.nrows();
    let mut acc = crate::cxmat::zeros(dim, dim);
    for (h, tau) in seq.terms() {
        acc = acc + h.mapv(|z| z * C64::new(tau / t_c, 0.0));
    }
    acc
}

/// First-order Magnus correction for a piecewise-constant cycle,
/// −(i / 2 T_c) Σ_{a>b} [H̃_a, H̃_b] τ_a τ_b, the closed form of the
/// time-ordered double integral with later segments in the left slot.
pub fn first_order_correction(seq: &ToggledSequence) -> CMatrix {
    let t_c = seq.cycle_time();
    let dim = seq.terms()[0].0.nrows();
    let mut acc = crate::cxmat::zeros(dim, dim);
    let terms = seq.terms();
    for a in 1..terms.len() {
        for b in 0..a {
            let c = commutator(&terms[a].0, &terms[b].0);
            acc = acc + c.mapv(|z| z * C64::new(0.0, -terms[a].1 * terms[b].1 / (2.0 * t_c)));
        }
    }
    acc
}

/// Exact propagator of the toggled cycle, Π_j exp(−i H̃_j τ_j) with later
/// segments on the left.
pub fn exact_cycle_propagator(seq: &ToggledSequence) -> Result<CMatrix> {
    let dim = seq.terms()[0].0.nrows();
    let mut u = identity(dim);
    for (h, tau) in seq.terms() {
        u = expm(h, C64::new(0.0, -tau))?.dot(&u);
    }
    Ok(u)
}

/// exp(−i (H̄⁰ + H̄¹) T_c), the second-order effective propagator.
pub fn effective_propagator(seq: &ToggledSequence) -> Result<CMatrix> {
    let h_eff = average_hamiltonian(seq) + first_order_correction(seq);
    expm(&h_eff, C64::new(0.0, -seq.cycle_time()))
}

/// Hilbert-Schmidt overlap |tr(σ† X)| of a qubit matrix with one Pauli.
pub fn pauli_overlap(x: &CMatrix, sigma: &CMatrix) -> f64 {
    crate::cxmat::hs_inner(sigma, x).norm()
}

/// Decompose a 2x2 Hermitian matrix in the Pauli basis (I, x, y, z).
pub fn pauli_components(x: &CMatrix) -> [f64; 4] {
    let half = |m: &CMatrix| crate::cxmat::hs_inner(m, x).re / 2.0;
    [
        half(&identity(2)),
        half(&pauli::sx()),
        half(&pauli::sy()),
        half(&pauli::sz()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxmat::fro_norm;
    use crate::decoupling::{all_max_dd_paths, max_dd, sel_dd, PulseSequence};
    use crate::pauli::{PauliAxis, PauliLabel};
    use crate::randmat;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toggles_of_identity_sequence() {
        let free = PulseSequence::new(vec![(crate::cxmat::identity(2), 1.0)], 1.0).unwrap();
        let seq = toggled_sequence(&pauli::sz(), &free).unwrap();
        assert_eq!(seq.terms().len(), 1);
        assert!(fro_norm(&(seq.terms()[0].0.clone() - pauli::sz())) < 1e-15);
    }

    #[test]
    fn sel_dd_toggles_flip_sign() {
        // σ_x σ_z σ_x = −σ_z.
        let seq = toggled_sequence(&pauli::sz(), &sel_dd(PauliAxis::X, 1.0, false).unwrap()).unwrap();
        assert!(fro_norm(&(seq.terms()[0].0.clone() - pauli::sz())) < 1e-15);
        assert!(fro_norm(&(seq.terms()[1].0.clone() + pauli::sz())) < 1e-15);
    }

    #[test]
    fn toggling_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = randmat::random_hermitian(2, &mut rng);
        let seq = toggled_sequence(&h, &sel_dd(PauliAxis::Y, 1.0, false).unwrap()).unwrap();
        let (v0, _) = crate::cxmat::eig(&seq.terms()[0].0).unwrap();
        let (v1, _) = crate::cxmat::eig(&seq.terms()[1].0).unwrap();
        let mut a: Vec<f64> = v0.iter().map(|z| z.re).collect();
        let mut b: Vec<f64> = v1.iter().map(|z| z.re).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn sel_dd_averages_z_to_zero() {
        let seq = toggled_sequence(&pauli::sz(), &sel_dd(PauliAxis::X, 1.0, false).unwrap()).unwrap();
        assert!(fro_norm(&average_hamiltonian(&seq)) < 1e-15);
        // Commuting component survives untouched.
        let seq = toggled_sequence(&pauli::sx(), &sel_dd(PauliAxis::X, 1.0, false).unwrap()).unwrap();
        assert!(fro_norm(&(average_hamiltonian(&seq) - pauli::sx())) < 1e-15);
    }

    #[test]
    fn max_dd_averages_any_traceless_hamiltonian_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = randmat::random_traceless_hermitian(2, &mut rng);
        for path in all_max_dd_paths() {
            let seq = toggled_sequence(&h, &max_dd(path, 1.0).unwrap()).unwrap();
            assert!(fro_norm(&average_hamiltonian(&seq)) < 1e-13);
        }
    }

    #[test]
    fn commuting_sequence_has_no_first_order_correction() {
        let seq = ToggledSequence::new(vec![
            (pauli::sz(), 0.3),
            (pauli::sz(), 0.5),
            (pauli::sz(), 0.2),
        ])
        .unwrap();
        assert!(fro_norm(&first_order_correction(&seq)) < 1e-15);
    }

    #[test]
    fn first_order_correction_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = randmat::random_hermitian(2, &mut rng);
        let seq = toggled_sequence(
            &h,
            &max_dd([PauliLabel::I, PauliLabel::Y, PauliLabel::X, PauliLabel::Z], 0.8).unwrap(),
        )
        .unwrap();
        assert!(is_hermitian(&first_order_correction(&seq), 1e-12));
    }

    #[test]
    fn two_segment_correction_matches_bch() {
        // For H̃ = (H_1, H_2) with equal durations τ the exact product
        // e^{-iH_2 τ} e^{-iH_1 τ} has log −i(H̄⁰ + H̄¹)2τ + O(τ³) with
        // H̄¹ = −(iτ/4)[H_2, H_1]; verify the propagators agree to O(τ³).
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h1 = randmat::random_hermitian(2, &mut rng);
        let h2 = randmat::random_hermitian(2, &mut rng);
        let mut errs = Vec::new();
        for k in 0..5 {
            let tau = 0.2 / 2f64.powi(k);
            let seq = ToggledSequence::new(vec![(h1.clone(), tau), (h2.clone(), tau)]).unwrap();
            let exact = exact_cycle_propagator(&seq).unwrap();
            let approx2 = effective_propagator(&seq).unwrap();
            errs.push(fro_norm(&(exact - approx2)));
        }
        // Halving τ should shrink the error by about 8.
        for w in errs.windows(2) {
            let ratio = w[0] / w[1].max(1e-300);
            assert!(ratio > 6.0, "cubic scaling violated: ratios {:?}", errs);
        }
    }

    #[test]
    fn symmetrized_cp_kills_first_order_for_any_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let h = randmat::random_hermitian(2, &mut rng);
        let seq = toggled_sequence(&h, &sel_dd(PauliAxis::X, 0.6, true).unwrap()).unwrap();
        assert!(fro_norm(&first_order_correction(&seq)) < 1e-12);
    }

    #[test]
    fn group_average_commutes_with_toggles() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = randmat::random_hermitian(2, &mut rng);
        let path = [PauliLabel::I, PauliLabel::X, PauliLabel::Z, PauliLabel::Y];
        let pulses = max_dd(path, 1.0).unwrap();
        let seq = toggled_sequence(&h, &pulses).unwrap();
        let avg = average_hamiltonian(&seq);
        for (g, _) in pulses.segments() {
            assert!(fro_norm(&commutator(&avg, g)) < 1e-12);
        }
    }

    #[test]
    fn selective_correction_points_along_y() {
        // H = σ_z + ε σ_x under {I, σ_x}: the first-order correction is
        // −(εT_c/2)σ_y with no other components.
        let eps = 0.05;
        let h1 = pauli::sx();
        let h = pauli::sz() + h1.mapv(|z| z * C64::new(eps, 0.0));
        let seq = toggled_sequence(&h, &sel_dd(PauliAxis::X, 0.4, false).unwrap()).unwrap();
        let corr = first_order_correction(&seq);
        assert!(pauli_overlap(&corr, &pauli::sx()) < 1e-10);
        assert!(pauli_overlap(&corr, &pauli::sz()) < 1e-10);
        assert!(pauli_overlap(&corr, &crate::cxmat::identity(2)) < 1e-10);
        assert!(pauli_overlap(&corr, &pauli::sy()) > 1e-6);
    }

    #[test]
    fn path_asymmetry_in_epsilon_order() {
        // {I,x,z,y} leaves only O(ε²) corrections, {I,y,x,z} O(ε).
        let h1 = (pauli::sx() + pauli::sy()).mapv(|z| z * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        let quadratic = [PauliLabel::I, PauliLabel::X, PauliLabel::Z, PauliLabel::Y];
        let linear = [PauliLabel::I, PauliLabel::Y, PauliLabel::X, PauliLabel::Z];
        let norm_at = |path: [PauliLabel; 4], eps: f64| -> f64 {
            let h = pauli::sz() + h1.mapv(|z| z * C64::new(eps, 0.0));
            let seq = toggled_sequence(&h, &max_dd(path, 0.4).unwrap()).unwrap();
            fro_norm(&first_order_correction(&seq))
        };
        let (e1, e2) = (1e-3, 1e-4);
        let slope_quadratic = (norm_at(quadratic, e1) / norm_at(quadratic, e2)).log10();
        let slope_linear = (norm_at(linear, e1) / norm_at(linear, e2)).log10();
        assert!((slope_quadratic - 2.0).abs() < 0.05, "got {}", slope_quadratic);
        assert!((slope_linear - 1.0).abs() < 0.05, "got {}", slope_linear);
    }

    #[test]
    fn rejects_empty_sequence() {
        assert!(ToggledSequence::new(vec![]).is_err());
    }
}
