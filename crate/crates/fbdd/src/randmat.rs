//! Seeded random matrix generators used by the condition checkers and the
//! test suites.

use ndarray::Array2;
use ndarray_linalg::QR;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::cxmat::{dagger, identity, trace, CMatrix, ONE};

/// Matrix with independent standard complex Gaussian entries.
pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    use rand_distr::StandardNormal;
    Array2::from_shape_fn((n, n), |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, rng);
    (&g + &dagger(&g)).mapv(|z| z * C64::new(0.5, 0.0))
}

pub fn random_traceless_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let h = random_hermitian(n, rng);
    let shift = trace(&h) / C64::new(n as f64, 0.0);
    &h - &identity(n).mapv(|z| z * shift)
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, rng);
    let (q, r) = g.qr().expect("qr of a random matrix");
    let mut u = q;
    for j in 0..n {
        let d = r[[j, j]];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            u[[i, j]] *= phase.conj();
        }
    }
    u
}

/// Normal matrix with the given spectrum drawn in a random unitary basis.
pub fn normal_with_spectrum<R: Rng>(spectrum: &[C64], rng: &mut R) -> CMatrix {
    let n = spectrum.len();
    let v = random_unitary(n, rng);
    let d = Array2::from_diag(&ndarray::Array1::from(spectrum.to_vec()));
    v.dot(&d).dot(&dagger(&v))
}

/// Random normal matrix (random complex spectrum, random unitary basis).
pub fn random_normal<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    use rand_distr::StandardNormal;
    let spectrum: Vec<C64> = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    normal_with_spectrum(&spectrum, rng)
}

/// Random normalized pure state.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> ndarray::Array1<C64> {
    use rand_distr::StandardNormal;
    let mut v = ndarray::Array1::from_shape_fn(n, |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / nrm);
    v
}
