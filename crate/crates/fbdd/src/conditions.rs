//! Algebraic correctability checks and constructive solutions: the
//! spectrum-mixing test for X + U†XU = 0, simultaneous diagonalization of
//! commuting families, local diagonalizability of bipartite propagators,
//! and the qubit feedback-operator synthesis built on top of them.

use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cxmat::{
    dagger, eig, fro_norm, hs_inner, identity, is_normal, is_unitary, kron, operator_schmidt,
    trace, zeros, CMatrix, SchmidtTerm,
};
use crate::error::{Error, Result};
use crate::feedback::branch_operators;
use crate::pauli;

const PAIRING_TOL: f64 = 1e-8;
const OFFDIAG_TOL: f64 = 1e-8;
const COMBO_RETRIES: usize = 5;
const COMBO_SEED: u64 = 0x5eed_c0de;

/// Result of testing whether the spectrum of a traceless normal matrix is
/// invariant under negation, together with the constructed unitary solving
/// X + U†XU = 0 when it is.
#[derive(Debug, Clone)]
pub struct MixingReport {
    pub satisfied: bool,
    /// Index pairing λ_i ↦ −λ_{pairing[i]} over the eigenbasis.
    pub pairing: Option<Vec<usize>>,
    pub solution: Option<CMatrix>,
    /// ‖X + U†XU‖_F when satisfied; the worst spectral mismatch otherwise.
    pub residual: f64,
    pub spectrum: Vec<C64>,
}

/// Greedy negation pairing: sort the spectrum and its negation
/// lexicographically by (re, im) and match positionally.
fn negation_pairing(spectrum: &[C64], tol: f64) -> (Vec<usize>, f64) {
    let n = spectrum.len();
    let lex = |a: &C64, b: &C64| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    };
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&i, &j| lex(&spectrum[i], &spectrum[j]));
    let mut by_negation: Vec<usize> = (0..n).collect();
    by_negation.sort_by(|&i, &j| lex(&(-spectrum[i]), &(-spectrum[j])));

    let mut pairing = vec![0usize; n];
    let mut worst = 0.0f64;
    for k in 0..n {
        let i = by_value[k];
        let j = by_negation[k];
        pairing[i] = j;
        worst = worst.max((spectrum[i] + spectrum[j]).norm());
    }
    let _ = tol;
    (pairing, worst)
}

/// Test the mixing condition on a traceless normal matrix and construct
/// the eigenbasis-permutation unitary U = V P V† when it holds.
pub fn check_mixing(x: &CMatrix) -> Result<MixingReport> {
    let n = x.nrows();
    if n != x.ncols() {
        return Err(Error::NotSquare { rows: n, cols: x.ncols() });
    }
    let nrm = fro_norm(x);
    if trace(x).norm() > 1e-10 * nrm.max(1.0) {
        return Err(Error::Precondition(format!(
            "matrix must be traceless, |tr| = {:.3e}",
            trace(x).norm()
        )));
    }
    if !is_normal(x, 1e-10) {
        return Err(Error::Precondition("matrix must be normal".into()));
    }

    let (vals, vecs) = eig(x)?;
    let spectrum: Vec<C64> = vals.to_vec();
    let (pairing, worst) = negation_pairing(&spectrum, PAIRING_TOL);

    if worst > PAIRING_TOL * nrm.max(1.0) {
        return Ok(MixingReport {
            satisfied: false,
            pairing: None,
            solution: None,
            residual: worst,
            spectrum,
        });
    }

    // Permutation on the eigenbasis: P e_j = e_{pairing[j]}.
    let mut p = zeros(n, n);
    for (j, &target) in pairing.iter().enumerate() {
        p[[target, j]] = crate::cxmat::ONE;
    }
    let u = vecs.dot(&p).dot(&dagger(&vecs));
    let residual = fro_norm(&(x + &dagger(&u).dot(x).dot(&u)));

    Ok(MixingReport {
        satisfied: true,
        pairing: Some(pairing),
        solution: Some(u),
        residual,
        spectrum,
    })
}

/// Random Hermitian combination of a family and its adjoints.
fn hermitian_combination<R: Rng>(family: &[CMatrix], rng: &mut R) -> CMatrix {
    let n = family[0].nrows();
    let mut combo = zeros(n, n);
    for m in family {
        let alpha: f64 = rng.gen_range(-1.0..1.0);
        let beta: f64 = rng.gen_range(-1.0..1.0);
        let md = dagger(m);
        combo = combo
            + (m + &md).mapv(|z| z * C64::new(0.5 * alpha, 0.0))
            + (m - &md).mapv(|z| z * C64::new(0.0, -0.5 * beta));
    }
    combo
}

fn offdiag_norm(x: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for ((i, j), z) in x.indexed_iter() {
        if i != j {
            acc += z.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Attempt a common unitary diagonalizer for a family of matrices via a
/// seeded random Hermitian combination, retrying on accidental
/// degeneracies. Returns the diagonalizer and the worst off-diagonal
/// residual achieved.
fn common_diagonalizer(family: &[CMatrix], tol: f64) -> Result<(Option<CMatrix>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(COMBO_SEED);
    let mut best: Option<(CMatrix, f64)> = None;
    for _ in 0..COMBO_RETRIES {
        let combo = hermitian_combination(family, &mut rng);
        let (_, v) = eig(&combo)?;
        if !is_unitary(&v, 1e-8) {
            continue;
        }
        let worst = family
            .iter()
            .map(|m| offdiag_norm(&dagger(&v).dot(m).dot(&v)))
            .fold(0.0f64, f64::max);
        if worst <= tol {
            return Ok((Some(v), worst));
        }
        if best.as_ref().is_none_or(|(_, w)| worst < *w) {
            best = Some((v, worst));
        }
    }
    Ok((None, best.map_or(f64::INFINITY, |(_, w)| w)))
}

/// Common diagonalizer for a family of commuting normal matrices, or
/// `None` when the family does not admit one.
pub fn check_simultaneous(xs: &[CMatrix]) -> Result<Option<CMatrix>> {
    if xs.is_empty() {
        return Err(Error::Precondition("family must not be empty".into()));
    }
    for x in xs {
        if !is_normal(x, 1e-10) {
            return Err(Error::Precondition("family members must be normal".into()));
        }
    }
    let scale = xs.iter().map(fro_norm).fold(1.0f64, f64::max);
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            if fro_norm(&crate::cxmat::commutator(&xs[i], &xs[j])) > 1e-8 * scale * scale {
                return Ok(None);
            }
        }
    }
    let (v, _) = common_diagonalizer(xs, OFFDIAG_TOL * scale)?;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdStatus {
    /// Commuting Schmidt operators and a verified common diagonalizer.
    Certified,
    /// The system-side Schmidt operators do not commute.
    NotCommuting,
    /// Operators commute but no unitary diagonalizer was found.
    Unresolved,
}

/// Local-diagonalizability report for a bipartite operator.
#[derive(Debug, Clone)]
pub struct LdReport {
    pub status: LdStatus,
    pub diagonalizer: Option<CMatrix>,
    pub terms: Vec<SchmidtTerm>,
    /// Largest pairwise commutator norm among system-side operators.
    pub commutator_residual: f64,
    /// Largest off-diagonal norm of the conjugated system operators, when
    /// a diagonalizer was attempted.
    pub offdiag_residual: Option<f64>,
}

impl LdReport {
    pub fn is_ld(&self) -> bool {
        self.status == LdStatus::Certified
    }
}

/// Decide local diagonalizability of an operator on a dS·dE bipartite
/// space through its operator Schmidt decomposition.
pub fn check_ld(x_se: &CMatrix, ds: usize, de: usize) -> Result<LdReport> {
    let terms = operator_schmidt(x_se, ds, de)?;
    let sys_ops: Vec<CMatrix> = terms.iter().map(|t| t.sys.clone()).collect();

    let mut commutator_residual = 0.0f64;
    for i in 0..sys_ops.len() {
        for j in (i + 1)..sys_ops.len() {
            commutator_residual = commutator_residual
                .max(fro_norm(&crate::cxmat::commutator(&sys_ops[i], &sys_ops[j])));
        }
    }
    if commutator_residual > OFFDIAG_TOL {
        return Ok(LdReport {
            status: LdStatus::NotCommuting,
            diagonalizer: None,
            terms,
            commutator_residual,
            offdiag_residual: None,
        });
    }

    let (v, worst) = common_diagonalizer(&sys_ops, OFFDIAG_TOL)?;
    let status = if v.is_some() {
        LdStatus::Certified
    } else {
        LdStatus::Unresolved
    };
    Ok(LdReport {
        status,
        diagonalizer: v,
        terms,
        commutator_residual,
        offdiag_residual: Some(worst),
    })
}

/// Constructed feedback operators for a locally diagonalizable qubit
/// propagator, with the factorization residuals of the two branch
/// operators.
#[derive(Debug, Clone)]
pub struct QubitFeedbackSolution {
    pub system_unitary: CMatrix,
    pub correction: CMatrix,
    pub plus_residual: f64,
    pub minus_residual: f64,
}

/// Outcome of the qubit feedback synthesis.
#[derive(Debug, Clone)]
pub enum FeedbackSynthesis {
    Solved(QubitFeedbackSolution),
    NotLd(LdReport),
}

/// Best factor B such that A ≈ L ⊗ B for a fixed left factor L (unitary):
/// B = tr_S[(L† ⊗ I) A] / dS.
fn right_factor(a: &CMatrix, left: &CMatrix, ds: usize, de: usize) -> Result<CMatrix> {
    let lifted = kron(&dagger(left), &identity(de)).dot(a);
    let b = crate::cxmat::partial_trace(&lifted, &[ds, de], &[1])?;
    Ok(b.mapv(|z| z / C64::new(ds as f64, 0.0)))
}

/// Synthesize (U_S, U_fb) for a qubit (dS = 2) joint propagator: on
/// locally diagonalizable input returns U_S = Û σ_x Û†, U_fb = Û σ_z Û†
/// and certifies that A⁺ = I ⊗ B⁺ and A⁻ = U_fb† ⊗ B⁻.
pub fn solve_qubit_feedback(u_se: &CMatrix, de: usize) -> Result<FeedbackSynthesis> {
    let n = u_se.nrows();
    if n != 2 * de {
        return Err(Error::Dimension(format!(
            "expected a 2·{} dimensional propagator, got {}",
            de, n
        )));
    }
    if !is_unitary(u_se, 1e-8) {
        return Err(Error::Precondition("joint propagator must be unitary".into()));
    }
    let ld = check_ld(u_se, 2, de)?;
    if !ld.is_ld() {
        return Ok(FeedbackSynthesis::NotLd(ld));
    }
    let basis = ld.diagonalizer.as_ref().expect("certified report has a diagonalizer");
    let system_unitary = basis.dot(&pauli::sx()).dot(&dagger(basis));
    let correction = basis.dot(&pauli::sz()).dot(&dagger(basis));

    let (a_plus, a_minus) = branch_operators(u_se, &system_unitary)?;
    let b_plus = right_factor(&a_plus, &identity(2), 2, de)?;
    let plus_residual = fro_norm(&(&a_plus - &kron(&identity(2), &b_plus)));
    let b_minus = right_factor(&a_minus, &dagger(&correction), 2, de)?;
    let minus_residual = fro_norm(&(&a_minus - &kron(&dagger(&correction), &b_minus)));

    Ok(FeedbackSynthesis::Solved(QubitFeedbackSolution {
        system_unitary,
        correction,
        plus_residual,
        minus_residual,
    }))
}

/// Correctability report for general system dimension.
#[derive(Debug, Clone)]
pub struct BlockReport {
    pub ld: LdReport,
    /// All diagonal blocks proportional to the identity; nothing to correct.
    pub trivial: bool,
    /// σ₂/σ₁ of the stacked mean-free block diagonals (0 for rank one).
    pub direction_residual: f64,
    /// Relative spread of the absolute values of the common direction.
    pub modulus_spread: f64,
    pub d_bar: Option<Vec<C64>>,
    pub mixing: Option<MixingReport>,
    pub correctable: bool,
}

/// Theorem-style correctability test for dS ≥ 2: the propagator must be
/// locally diagonalizable with every diagonal block of the form
/// (mean)·I + c_i·D̄, D̄ unitary with a negation-symmetric spectrum.
pub fn check_blocks(u_se: &CMatrix, ds: usize, de: usize) -> Result<BlockReport> {
    if ds < 2 {
        return Err(Error::Precondition("system dimension must be at least 2".into()));
    }
    let ld = check_ld(u_se, ds, de)?;
    if !ld.is_ld() {
        return Ok(BlockReport {
            ld,
            trivial: false,
            direction_residual: f64::INFINITY,
            modulus_spread: f64::INFINITY,
            d_bar: None,
            mixing: None,
            correctable: false,
        });
    }
    let basis = ld.diagonalizer.as_ref().unwrap();
    let lifted = kron(&dagger(basis), &identity(de))
        .dot(u_se)
        .dot(&kron(basis, &identity(de)));

    // Mean-free diagonals of the dE² blocks indexed by environment pairs.
    let mut rows = zeros(de * de, ds);
    for k in 0..de {
        for l in 0..de {
            let mut mean = C64::new(0.0, 0.0);
            for s in 0..ds {
                mean += lifted[[s * de + k, s * de + l]];
            }
            mean /= C64::new(ds as f64, 0.0);
            for s in 0..ds {
                rows[[k * de + l, s]] = lifted[[s * de + k, s * de + l]] - mean;
            }
        }
    }

    let scale = fro_norm(&rows);
    if scale < 1e-10 {
        // Every block is proportional to the identity: the propagator acts
        // trivially on the system and there is nothing to correct.
        return Ok(BlockReport {
            ld,
            trivial: true,
            direction_residual: 0.0,
            modulus_spread: 0.0,
            d_bar: None,
            mixing: None,
            correctable: true,
        });
    }

    let (_, sigma, vt_opt) = rows.svd(false, true).map_err(Error::Linalg)?;
    let vt = vt_opt.expect("svd with vt requested");
    let direction_residual = if sigma.len() > 1 { sigma[1] / sigma[0] } else { 0.0 };

    let mut d_bar: Vec<C64> = (0..ds).map(|s| vt[[0, s]].conj()).collect();
    let moduli: Vec<f64> = d_bar.iter().map(|z| z.norm()).collect();
    let max_m = moduli.iter().cloned().fold(0.0f64, f64::max);
    let min_m = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
    let modulus_spread = if max_m > 0.0 { (max_m - min_m) / max_m } else { 0.0 };
    let mean_m = moduli.iter().sum::<f64>() / ds as f64;
    for z in &mut d_bar {
        *z /= C64::new(mean_m, 0.0);
    }

    let mut mixing = None;
    let mut mixing_ok = false;
    if direction_residual <= OFFDIAG_TOL && modulus_spread <= OFFDIAG_TOL {
        let d_mat = Array2::from_diag(&ndarray::Array1::from(d_bar.clone()));
        // The mean-free direction is traceless by construction.
        let report = check_mixing(&d_mat)?;
        mixing_ok = report.satisfied;
        mixing = Some(report);
    }

    Ok(BlockReport {
        correctable: direction_residual <= OFFDIAG_TOL
            && modulus_spread <= OFFDIAG_TOL
            && mixing_ok,
        ld,
        trivial: false,
        direction_residual,
        modulus_spread,
        d_bar: Some(d_bar),
        mixing,
    })
}

/// Convenience: Hilbert-Schmidt angle between two matrices, ignoring a
/// global phase. Zero means proportional.
pub fn projective_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let na = fro_norm(a);
    let nb = fro_norm(b);
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let overlap = hs_inner(a, b).norm() / (na * nb);
    (1.0 - overlap.min(1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxmat::{basis_vector, expm, ONE};
    use crate::randmat;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive oracle: does any permutation negate the spectrum?
    fn brute_force_mixing(spectrum: &[C64], tol: f64) -> bool {
        fn rec(spectrum: &[C64], used: &mut Vec<bool>, i: usize, tol: f64) -> bool {
            if i == spectrum.len() {
                return true;
            }
            for j in 0..spectrum.len() {
                if !used[j] && (spectrum[i] + spectrum[j]).norm() <= tol {
                    used[j] = true;
                    if rec(spectrum, used, i + 1, tol) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        let mut used = vec![false; spectrum.len()];
        rec(spectrum, &mut used, 0, tol)
    }

    #[test]
    fn sigma_z_mixes_via_sigma_x() {
        let report = check_mixing(&pauli::sz()).unwrap();
        assert!(report.satisfied);
        let u = report.solution.unwrap();
        assert!(fro_norm(&(pauli::sz() + dagger(&u).dot(&pauli::sz()).dot(&u))) < 1e-12);
        // σ_x is one valid solution; the constructed one must agree up to
        // the same conjugation action.
        let conj_x = pauli::sx().dot(&pauli::sz()).dot(&pauli::sx());
        assert!(fro_norm(&(conj_x + pauli::sz())) < 1e-14);
    }

    #[test]
    fn asymmetric_spectrum_fails() {
        let m = Array2::from_diag(&Array1::from(vec![
            ONE,
            ONE,
            C64::new(-2.0, 0.0),
        ]));
        let report = check_mixing(&m).unwrap();
        assert!(!report.satisfied);
        assert!(report.solution.is_none());
    }

    #[test]
    fn constructed_pairs_on_random_symmetric_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a: f64 = rng.gen_range(0.2..1.5);
            let b: f64 = rng.gen_range(0.2..1.5);
            let x = randmat::normal_with_spectrum(
                &[
                    C64::new(a, 0.0),
                    C64::new(b, 0.0),
                    C64::new(-b, 0.0),
                    C64::new(-a, 0.0),
                ],
                &mut rng,
            );
            let report = check_mixing(&x).unwrap();
            assert!(report.satisfied);
            assert!(report.residual <= 1e-10 * fro_norm(&x).max(1.0) * 10.0);
        }
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..200 {
            let n = 2 + (trial % 5);
            // Alternate between engineered symmetric spectra and generic ones.
            let spectrum: Vec<C64> = if trial % 2 == 0 {
                let mut s = Vec::new();
                for _ in 0..n / 2 {
                    let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    s.push(z);
                    s.push(-z);
                }
                if n % 2 == 1 {
                    s.push(C64::new(0.0, 0.0));
                }
                s
            } else {
                let mut s: Vec<C64> = (0..n - 1)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let sum: C64 = s.iter().sum();
                s.push(-sum); // traceless, generically not negation symmetric
                s
            };
            let x = randmat::normal_with_spectrum(&spectrum, &mut rng);
            let report = check_mixing(&x).unwrap();
            let oracle = brute_force_mixing(&report.spectrum, 1e-8 * fro_norm(&x).max(1.0));
            assert_eq!(report.satisfied, oracle, "disagreement on {:?}", spectrum);
        }
    }

    #[test]
    fn simultaneous_single_matrix() {
        let v = check_simultaneous(&[pauli::sz()]).unwrap();
        assert!(v.is_some());
    }

    #[test]
    fn simultaneous_rejects_non_commuting() {
        let v = check_simultaneous(&[pauli::sz(), pauli::sx()]).unwrap();
        assert!(v.is_none());
    }

    #[test]
    fn simultaneous_recovers_commuting_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = randmat::random_unitary(4, &mut rng);
        let d1 = Array2::from_diag(&Array1::from(
            (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect::<Vec<_>>(),
        ));
        let d2 = Array2::from_diag(&Array1::from(
            (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect::<Vec<_>>(),
        ));
        let x1 = v.dot(&d1).dot(&dagger(&v));
        let x2 = v.dot(&d2).dot(&dagger(&v));
        let w = check_simultaneous(&[x1.clone(), x2.clone()]).unwrap().unwrap();
        for x in [&x1, &x2] {
            assert!(offdiag_norm(&dagger(&w).dot(x).dot(&w)) < 1e-7);
        }
    }

    fn ld_propagator(de: usize, t: f64, rng: &mut ChaCha8Rng) -> CMatrix {
        // exp(−i t (W d W† ⊗ K + I ⊗ H_E)) with commuting system blocks.
        let w = randmat::random_unitary(2, rng);
        let d1 = Array2::from_diag(&Array1::from(vec![
            C64::new(rng.gen_range(-1.0..1.0), 0.0),
            C64::new(rng.gen_range(-1.0..1.0), 0.0),
        ]));
        let s1 = w.dot(&d1).dot(&dagger(&w));
        let k1 = randmat::random_hermitian(de, rng);
        let h_e = randmat::random_hermitian(de, rng);
        let h = kron(&s1, &k1) + kron(&identity(2), &h_e);
        expm(&h, C64::new(0.0, -t)).unwrap()
    }

    #[test]
    fn commuting_generator_is_ld() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let b = randmat::random_hermitian(3, &mut rng);
        let h = kron(&pauli::sz(), &b);
        let u = expm(&h, C64::new(0.0, -0.9)).unwrap();
        let report = check_ld(&u, 2, 3).unwrap();
        assert!(report.is_ld());
        // The diagonalizer must diagonalize σ_z up to phases, i.e. be
        // diagonal or antidiagonal in the computational basis.
        let v = report.diagonalizer.unwrap();
        let conj = dagger(&v).dot(&pauli::sz()).dot(&v);
        assert!(offdiag_norm(&conj) < 1e-8);
    }

    #[test]
    fn generic_two_axis_coupling_is_not_ld() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b1 = randmat::random_hermitian(2, &mut rng);
        let b2 = randmat::random_hermitian(2, &mut rng);
        let h = kron(&pauli::sz(), &b1) + kron(&pauli::sx(), &b2);
        let u = expm(&h, C64::new(0.0, -0.7)).unwrap();
        let report = check_ld(&u, 2, 2).unwrap();
        assert!(!report.is_ld());
        assert!(report.commutator_residual > 1e-4);
    }

    #[test]
    fn factorized_unitary_is_ld() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let ua = randmat::random_unitary(2, &mut rng);
        let ub = randmat::random_unitary(3, &mut rng);
        let u = kron(&ua, &ub);
        let report = check_ld(&u, 2, 3).unwrap();
        assert!(report.is_ld());
        assert_eq!(report.terms.len(), 1);
    }

    #[test]
    fn qubit_synthesis_on_local_rotation() {
        // A system-local z rotation: U_S = σ_x and U_fb = σ_z solve it in
        // the computational basis.
        let theta = 0.6;
        let u = kron(&expm(&pauli::sz(), C64::new(0.0, -theta)).unwrap(), &identity(3));
        match solve_qubit_feedback(&u, 3).unwrap() {
            FeedbackSynthesis::Solved(sol) => {
                assert!(sol.plus_residual < 1e-8);
                assert!(sol.minus_residual < 1e-8);
                assert!(projective_distance(&sol.system_unitary, &pauli::sx()) < 1e-6);
                assert!(projective_distance(&sol.correction, &pauli::sz()) < 1e-6);
            }
            FeedbackSynthesis::NotLd(_) => panic!("local rotation must be solvable"),
        }
    }

    #[test]
    fn qubit_synthesis_on_identity() {
        match solve_qubit_feedback(&identity(4), 2).unwrap() {
            FeedbackSynthesis::Solved(sol) => {
                assert!(sol.plus_residual < 1e-10);
                assert!(sol.minus_residual < 1e-10);
            }
            FeedbackSynthesis::NotLd(_) => panic!("identity must be solvable"),
        }
    }

    #[test]
    fn qubit_synthesis_end_to_end_restores_state() {
        use crate::feedback::{fdd_cycle, system_fidelity, FeedbackCycle, InnerEvolution};
        use crate::model::OpenSystemModel;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for de in [2usize, 3] {
            // Build the model first so the cycle reproduces the propagator.
            let w = randmat::random_unitary(2, &mut rng);
            let d = Array2::from_diag(&Array1::from(vec![
                C64::new(0.8, 0.0),
                C64::new(-0.3, 0.0),
            ]));
            let s1 = w.dot(&d).dot(&dagger(&w));
            let s1 = &s1 - &identity(2).mapv(|z| z * (trace(&s1) / C64::new(2.0, 0.0)));
            let k1 = randmat::random_hermitian(de, &mut rng);
            let h_e = randmat::random_hermitian(de, &mut rng);
            let model =
                OpenSystemModel::new(2, de, zeros(2, 2), h_e, vec![(s1.clone(), k1)]).unwrap();
            let t = 1.3;
            let u_se = model.propagator(t).unwrap();

            let sol = match solve_qubit_feedback(&u_se, de).unwrap() {
                FeedbackSynthesis::Solved(s) => s,
                FeedbackSynthesis::NotLd(_) => panic!("constructed propagator must be LD"),
            };
            let cycle = FeedbackCycle::new(
                sol.system_unitary.clone(),
                sol.correction.clone(),
                InnerEvolution::Free(t),
            )
            .unwrap();
            let psi = randmat::random_state(2, &mut rng);
            let (b0, b1) = fdd_cycle(&model, &cycle, &crate::cxmat::density(&psi)).unwrap();
            assert_abs_diff_eq!(b0.probability + b1.probability, 1.0, epsilon = 1e-10);
            for b in [&b0, &b1] {
                if b.probability > 1e-10 {
                    let f = system_fidelity(&b.post_state, &model, &psi).unwrap();
                    assert!(f >= 1.0 - 1e-8, "branch {} fidelity {}", b.bit, f);
                }
            }
        }
    }

    #[test]
    fn qubit_synthesis_rejects_non_ld() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let b1 = randmat::random_hermitian(2, &mut rng);
        let b2 = randmat::random_hermitian(2, &mut rng);
        let h = kron(&pauli::sz(), &b1) + kron(&pauli::sx(), &b2);
        let u = expm(&h, C64::new(0.0, -0.9)).unwrap();
        match solve_qubit_feedback(&u, 2).unwrap() {
            FeedbackSynthesis::Solved(_) => panic!("generic coupling must not be solvable"),
            FeedbackSynthesis::NotLd(report) => {
                assert!(report.commutator_residual > 1e-4);
            }
        }
    }

    #[test]
    fn blocks_qubit_case_always_passes_when_ld() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let u = ld_propagator(3, 0.8, &mut rng);
        let report = check_blocks(&u, 2, 3).unwrap();
        assert!(report.correctable);
    }

    #[test]
    fn blocks_qutrit_cube_roots_fail_mixing() {
        // Traceless direction ∝ diag(1, ω, ω²): the negated set is disjoint,
        // so a qutrit system with these block phases is not correctable.
        let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
        let d = Array2::from_diag(&Array1::from(vec![ONE, omega, omega * omega]));
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let v_e = randmat::random_unitary(2, &mut rng);
        let u = kron(&d, &v_e);
        let report = check_blocks(&u, 3, 2).unwrap();
        assert!(report.ld.is_ld());
        assert!(!report.correctable);
        if let Some(m) = &report.mixing {
            assert!(!m.satisfied);
        }
    }

    #[test]
    fn blocks_quartic_phases_pass() {
        // D̄ = diag(1, i, −1, −i) is unitary with a negation-symmetric
        // spectrum, so the corresponding block structure is correctable.
        let d = Array2::from_diag(&Array1::from(vec![
            ONE,
            C64::new(0.0, 1.0),
            -ONE,
            C64::new(0.0, -1.0),
        ]));
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let v_e = randmat::random_unitary(2, &mut rng);
        let u = kron(&d, &v_e);
        let report = check_blocks(&u, 4, 2).unwrap();
        assert!(report.ld.is_ld());
        assert!(report.direction_residual < 1e-8);
        assert!(report.modulus_spread < 1e-8);
        assert!(report.correctable);
    }

    #[test]
    fn blocks_agree_with_qubit_synthesis() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..50 {
            let u = if trial % 2 == 0 {
                ld_propagator(2, 0.5 + 0.01 * trial as f64, &mut rng)
            } else {
                randmat::random_unitary(4, &mut rng)
            };
            let solvable = matches!(
                solve_qubit_feedback(&u, 2).unwrap(),
                FeedbackSynthesis::Solved(_)
            );
            let blocks = check_blocks(&u, 2, 2).unwrap();
            assert_eq!(
                solvable, blocks.correctable,
                "trial {}: synthesis and block test disagree",
                trial
            );
        }
    }

    #[test]
    fn mixing_rejects_bad_preconditions() {
        assert!(check_mixing(&identity(2)).is_err()); // not traceless
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut m = randmat::random_matrix(3, &mut rng);
        let shift = trace(&m) / C64::new(3.0, 0.0);
        for i in 0..3 {
            m[[i, i]] -= shift;
        }
        assert!(check_mixing(&m).is_err()); // traceless but not normal
        let _ = basis_vector(2, 0);
    }
}
