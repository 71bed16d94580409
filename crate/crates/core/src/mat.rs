//! Dense complex matrices, norms, conjugation, padding and seeded generators.
//!
//! Everything downstream works on [`ComplexMatrix`]: a row-major dense matrix
//! of `Complex64` entries that are guaranteed finite. All operations are pure;
//! values are immutable once built and safe to share across threads.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Row-major dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Operator/Frobenius norm estimate produced by [`opnorm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    /// Largest-singular-value estimate (a lower bound that converges from below).
    pub op_norm: f64,
    /// Frobenius norm, computed exactly.
    pub fro_norm: f64,
    /// Matrix-vector iteration count spent.
    pub iterations: usize,
    /// Whether the eigen-residual test was met; a `false` is never silent.
    pub converged: bool,
}

impl ComplexMatrix {
    /// Build a matrix from row-major data, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        for (k, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Internal constructor for values known to be finite.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        debug_assert!(data.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::from_parts(rows, cols, data)
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = diag[i];
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Square dimension; panics on non-square use (internal misuse).
    pub fn dim(&self) -> usize {
        assert!(self.is_square(), "dim() on a {}x{} matrix", self.rows, self.cols);
        self.rows
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diag().iter().sum()
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_parts(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        )
    }

    /// Plain cache-friendly matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); m * n];
        for i in 0..m {
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[p * n..(p + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += a * row[j];
                }
            }
        }
        Self::from_parts(m, n, out)
    }

    /// y = A x.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[r] = acc;
        }
        y
    }

    /// y = A* x.
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, x.len());
        let mut y = vec![Complex64::new(0.0, 0.0); self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let xr = x[r];
            for (c, a) in row.iter().enumerate() {
                y[c] += a.conj() * xr;
            }
        }
        y
    }

    /// Copy of the block with top-left corner (r0, c0) and shape h x w.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols);
        Self::from_fn(h, w, |r, c| self.get(r0 + r, c0 + c))
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for r in 0..b.rows {
            for c in 0..b.cols {
                self.set(r0 + r, c0 + c, b.get(r, c));
            }
        }
    }

    /// Principal submatrix on the given (not necessarily sorted) index list.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        assert!(self.is_square());
        assert!(idx.iter().all(|&i| i < self.rows));
        Self::from_fn(idx.len(), idx.len(), |r, c| self.get(idx[r], idx[c]))
    }

    /// Force diagonal entries to exact zero.
    pub fn with_zero_diagonal(&self) -> Self {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m.set(i, i, Complex64::new(0.0, 0.0));
        }
        m
    }

    /// Largest |diagonal entry|.
    pub fn max_abs_diag(&self) -> f64 {
        self.diag().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Square root of the sum of squared moduli.
pub fn frobnorm(a: &ComplexMatrix) -> f64 {
    a.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vec_scale(x: &mut [Complex64], s: f64) {
    for z in x.iter_mut() {
        *z *= s;
    }
}

/// Operator-norm estimate by power iteration on A*A.
///
/// The starting vector is the normalized all-ones vector; on candidate
/// convergence the iterate is perturbed once along a fixed pseudo-random
/// direction and must settle back, which guards against starts that are
/// orthogonal to the dominant singular space. The estimate is the certified
/// lower bound max ||A v|| over unit iterates, so it converges from below.
pub fn opnorm(a: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<NormReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("opnorm: tol must be positive".into()));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("opnorm: max_iter must be positive".into()));
    }
    let fro = frobnorm(a);
    let n = a.cols();
    if fro == 0.0 {
        return Ok(NormReport { op_norm: 0.0, fro_norm: 0.0, iterations: 0, converged: true });
    }

    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    // Fixed perturbation direction; depends only on the dimension.
    let perturbation: Vec<Complex64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6f70_6e6f_726d ^ n as u64);
        let mut p: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        let s = vec_norm(&p);
        vec_scale(&mut p, 1.0 / s);
        p
    };

    let mut best = 0.0_f64;
    let mut restarts = 0usize; // basis restarts after hitting the kernel
    let mut perturbations = 0usize;
    let mut iterations = 0usize;

    while iterations < max_iter {
        iterations += 1;
        let u = a.matvec(&v);
        let sigma = vec_norm(&u);
        if sigma == 0.0 {
            // v lies in the kernel; restart from basis vectors. If every
            // basis vector is in the kernel the matrix is zero, which the
            // Frobenius check above already excluded.
            if restarts < n {
                v = vec![Complex64::new(0.0, 0.0); n];
                v[restarts] = Complex64::new(1.0, 0.0);
                restarts += 1;
                continue;
            }
            break;
        }
        best = best.max(sigma);
        let w = a.adjoint_matvec(&u); // A*A v
        let lambda = sigma * sigma;
        // Eigen-residual of (lambda, v) for the Hermitian matrix A*A.
        let mut res_sq = 0.0;
        for (wi, vi) in w.iter().zip(&v) {
            res_sq += (wi - vi * lambda).norm_sqr();
        }
        let residual = res_sq.sqrt();
        if residual <= tol * lambda {
            if perturbations < 2 {
                perturbations += 1;
                for (vi, pi) in v.iter_mut().zip(&perturbation) {
                    *vi += 0.05 * pi;
                }
                let s = vec_norm(&v);
                vec_scale(&mut v, 1.0 / s);
                continue;
            }
            return Ok(NormReport { op_norm: best, fro_norm: fro, iterations, converged: true });
        }
        let wn = vec_norm(&w);
        if wn == 0.0 {
            // A*A v = 0 while Av != 0 cannot happen; defensive restart.
            v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
            continue;
        }
        v = w;
        vec_scale(&mut v, 1.0 / wn);
    }

    Ok(NormReport { op_norm: best, fro_norm: fro, iterations, converged: false })
}

/// Convenience wrapper with the certificate-grade defaults used throughout.
pub fn opnorm_certified(a: &ComplexMatrix) -> f64 {
    opnorm(a, 1e-8, 20_000).map(|r| r.op_norm).unwrap_or(0.0)
}

/// BC - CB.
pub fn commutator(b: &ComplexMatrix, c: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !b.is_square() || !c.is_square() || b.rows() != c.rows() {
        return Err(Error::DimensionMismatch(format!(
            "commutator needs equal square matrices, got {}x{} and {}x{}",
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(b.matmul(c).sub(&c.matmul(b)))
}

/// U* A U for unitary U; rejects non-unitary conjugators.
pub fn unitary_conjugate(u: &ComplexMatrix, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !u.is_square() || !a.is_square() || u.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "unitary_conjugate needs equal square matrices, got {}x{} and {}x{}",
            u.rows(),
            u.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let gram_residual = frobnorm(&u.conj_transpose().matmul(u).sub(&ComplexMatrix::identity(u.rows())));
    let tol = 1e-10;
    if gram_residual > tol {
        return Err(Error::NotUnitary { gram_residual, tol });
    }
    Ok(u.conj_transpose().matmul(a).matmul(u))
}

/// Embed A in the top-left corner of an M x M zero matrix.
pub fn pad_to(a: &ComplexMatrix, m: usize) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "pad_to needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if m < a.dim() {
        return Err(Error::InvalidArgument(format!(
            "pad_to target {m} smaller than current dimension {}",
            a.dim()
        )));
    }
    if m == a.dim() {
        return Ok(a.clone());
    }
    let mut out = ComplexMatrix::zeros(m, m);
    out.set_block(0, 0, a);
    Ok(out)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Seeded Gaussian matrix with exact zeros on the diagonal, rescaled to
/// operator norm 1 (the 1x1 case is the zero matrix and stays unnormalized).
pub fn random_zero_diag(m: usize, seed: u64) -> Result<ComplexMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("random_zero_diag: m must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = ComplexMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            if r != c {
                a.set(r, c, complex_gaussian(&mut rng));
            }
        }
    }
    if m == 1 {
        return Ok(a);
    }
    let sigma = opnorm(&a, 1e-10, 50_000)?.op_norm;
    Ok(a.scale(Complex64::new(1.0 / sigma, 0.0)))
}

/// Seeded Gaussian matrix recentred to zero trace.
pub fn random_trace_zero(m: usize, seed: u64) -> Result<ComplexMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("random_trace_zero: m must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = ComplexMatrix::from_fn(m, m, |_, _| Complex64::new(0.0, 0.0));
    for r in 0..m {
        for c in 0..m {
            a.set(r, c, complex_gaussian(&mut rng));
        }
    }
    let shift = a.trace() / m as f64;
    for i in 0..m {
        a.set(i, i, a.get(i, i) - shift);
    }
    Ok(a)
}
