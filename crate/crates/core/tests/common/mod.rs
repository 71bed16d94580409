//! Shared test utilities: an independent SVD oracle (nalgebra) and random
//! matrix helpers. The oracle never touches the crate's own norm machinery.

use comfact::mat::ComplexMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn to_nalgebra(a: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.rows(), a.cols(), |r, c| a.get(r, c))
}

/// Singular values by full decomposition, sorted descending.
pub fn svd_singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let m = to_nalgebra(a);
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

pub fn svd_opnorm(a: &ComplexMatrix) -> f64 {
    svd_singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn random_complex(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random unitary from a Householder reflector.
pub fn random_householder_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    ComplexMatrix::from_fn(n, n, |r, c| {
        let id = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        id - v[r] * v[c].conj() * (2.0 / vv)
    })
}
