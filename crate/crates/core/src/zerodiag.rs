//! Unitary reduction of a trace-zero matrix to zero diagonal.
//!
//! The diagonal entries of a trace-zero matrix average to zero, so 0 lies in
//! their convex hull. We pick at most three diagonal indices whose entries'
//! hull contains 0, compress to that principal submatrix, and walk a
//! one-parameter family of unit vectors whose Rayleigh-quotient path crosses
//! 0, locating the crossing by bisection. A Householder reflection then moves
//! the isotropic vector to the leading basis vector and the deflation recurses
//! on the trailing block, whose trace is still (numerically) zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::{frobnorm, ComplexMatrix};

/// Result of [`reduce`]: a unitary, the conjugated matrix and the achieved
/// relative diagonal size.
#[derive(Debug, Clone)]
pub struct ZeroDiagReduction {
    pub unitary: ComplexMatrix,
    pub zero_diag: ComplexMatrix,
    pub achieved_tol: f64,
}

const BISECT_STEPS: usize = 100;

fn cross(u: Complex64, v: Complex64) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Quadratic form x* M x.
fn quad_form(m: &ComplexMatrix, x: &[Complex64]) -> Complex64 {
    let mx = m.matvec(x);
    x.iter().zip(&mx).map(|(xi, yi)| xi.conj() * yi).sum()
}

fn basis_vector(dim: usize, k: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); dim];
    e[k] = Complex64::new(1.0, 0.0);
    e
}

/// Indices (at most 3) of diagonal entries whose convex hull contains 0,
/// together with nonnegative hull weights summing to 1. Assumes no entry is
/// small enough for the single-index case. Returns `None` if the entries
/// numerically fail to surround 0 (possible only through trace drift).
fn caratheodory_triple(diag: &[Complex64]) -> Option<(Vec<usize>, Vec<f64>)> {
    // Anchor: the entry of largest modulus, lowest index on ties.
    let a = diag
        .iter()
        .enumerate()
        .max_by(|(i, x), (j, y)| x.norm().partial_cmp(&y.norm()).unwrap().then(j.cmp(i)))
        .map(|(i, _)| i)?;
    let da = diag[a];

    // Relative angles in (-pi, pi].
    let angle = |k: usize| (diag[k] * da.conj()).arg();

    let mut b: Option<(usize, f64)> = None; // max angle in (0, pi]
    let mut c: Option<(usize, f64)> = None; // min angle in (-pi, 0)
    for k in 0..diag.len() {
        if k == a || diag[k].norm() == 0.0 {
            continue;
        }
        let phi = angle(k);
        if phi > 0.0 {
            if b.map_or(true, |(_, best)| phi > best) {
                b = Some((k, phi));
            }
        } else if phi < 0.0 && phi > -std::f64::consts::PI {
            if c.map_or(true, |(_, best)| phi < best) {
                c = Some((k, phi));
            }
        } else if phi <= -std::f64::consts::PI || phi == 0.0 {
            // phi == 0: collinear with the anchor on the same side; useless.
            // arg() never returns values <= -pi, listed for completeness.
        }
    }

    // Exactly antipodal partner: a two-point hull.
    if let Some((k, phi)) = b {
        if (phi - std::f64::consts::PI).abs() <= 1e-9 {
            let (la, lk) = (da.norm(), diag[k].norm());
            let w = la / (la + lk);
            return Some((vec![a, k], vec![1.0 - w, w]));
        }
    }

    match (b, c) {
        (Some((ib, _)), Some((ic, _))) => {
            let (db, dc) = (diag[ib], diag[ic]);
            let det = cross(db, dc);
            let target = -da;
            if det.abs() <= 1e-14 * db.norm() * dc.norm() {
                // b and c span a line; fall back to the more opposing one.
                let pick = |k: usize| (diag[k] * da.conj()).re;
                let j = if pick(ib) <= pick(ic) { ib } else { ic };
                return pair_weights(diag, a, j);
            }
            let beta = cross(dc, target) / cross(dc, db);
            let gamma = cross(db, target) / cross(db, dc);
            if beta < -1e-12 || gamma < -1e-12 {
                // 0 is (numerically) outside the cone; antipodal fallback.
                let pick = |k: usize| (diag[k] * da.conj()).re;
                let j = if pick(ib) <= pick(ic) { ib } else { ic };
                return pair_weights(diag, a, j);
            }
            let (beta, gamma) = (beta.max(0.0), gamma.max(0.0));
            let total = 1.0 + beta + gamma;
            Some((vec![a, ib, ic], vec![1.0 / total, beta / total, gamma / total]))
        }
        _ => {
            // All other entries on one closed half-plane side: nearly
            // collinear spectrum. Use the most opposing entry.
            let j = (0..diag.len())
                .filter(|&k| k != a)
                .min_by(|&x, &y| {
                    let px = (diag[x] * da.conj()).re;
                    let py = (diag[y] * da.conj()).re;
                    px.partial_cmp(&py).unwrap().then(x.cmp(&y))
                })?;
            if (diag[j] * da.conj()).re >= 0.0 {
                return None;
            }
            pair_weights(diag, a, j)
        }
    }
}

fn pair_weights(diag: &[Complex64], i: usize, j: usize) -> Option<(Vec<usize>, Vec<f64>)> {
    let (li, lj) = (diag[i].norm(), diag[j].norm());
    if li + lj == 0.0 {
        return None;
    }
    let w = li / (li + lj);
    Some((vec![i, j], vec![1.0 - w, w]))
}

/// Phase (as a unit complex number) making `e^{i phi} a + e^{-i phi} b`
/// parallel to the direction `u` (|u| = 1).
fn align_phase(a: Complex64, b: Complex64, u: Complex64) -> Complex64 {
    let zeta = u.conj() * a - (u.conj() * b).conj();
    if zeta.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, -zeta.arg())
    }
}

/// Stage A: a unit vector in span(e_{i1}, e_{i2}) of the compressed matrix
/// whose Rayleigh quotient is the hull point `(w1 d1 + w2 d2) / (w1 + w2)`.
/// The cross term is phase-rotated onto the segment direction, so the path
/// stays on the line through d1, d2 and bisection can hit the target.
fn segment_vector(
    m: &ComplexMatrix,
    i1: usize,
    i2: usize,
    w1: f64,
    w2: f64,
) -> Vec<Complex64> {
    let dim = m.dim();
    let (d1, d2) = (m.get(i1, i1), m.get(i2, i2));
    let seg = d2 - d1;
    let seg_len = seg.norm();
    if seg_len == 0.0 || w1 + w2 == 0.0 {
        return basis_vector(dim, i1);
    }
    let u = seg / seg_len;
    let phase = align_phase(m.get(i1, i2), m.get(i2, i1), u);
    // Cross term rotated onto the segment direction; its signed magnitude.
    let g = phase * m.get(i1, i2) + phase.conj() * m.get(i2, i1);
    let gamma = (u.conj() * g).re;

    let target = (w2 / (w1 + w2)) * seg_len;
    let position = |s: f64| s * seg_len + (s * (1.0 - s)).max(0.0).sqrt() * gamma;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    // position(0) = 0 <= target <= seg_len = position(1)
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if position(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let mut y = vec![Complex64::new(0.0, 0.0); dim];
    y[i1] = Complex64::new((1.0 - s).max(0.0).sqrt(), 0.0);
    y[i2] = Complex64::new(s.max(0.0).sqrt(), 0.0) * phase;
    y
}

/// Pair step: given orthonormal y and e_k with Rayleigh quotients on opposite
/// sides of 0 along a line, mix them so the quotient crosses 0.
fn pair_step(m: &ComplexMatrix, y: &[Complex64], k: usize) -> Vec<Complex64> {
    let p = quad_form(m, y);
    if p.norm() == 0.0 {
        return y.to_vec();
    }
    let rot = Complex64::from_polar(1.0, -p.arg());
    let my = m.matvec(y);
    let ek = basis_vector(m.dim(), k);
    let mek = m.matvec(&ek);
    // Effective 2x2 compression in the basis (y, e_k).
    let m12 = y.iter().zip(&mek).map(|(a, b)| a.conj() * b).sum::<Complex64>();
    let m21 = my[k];
    let q = m.get(k, k);

    let mu22 = rot * q;
    let mu12 = rot * m12;
    let mu21 = rot * m21;
    let phase = align_phase(mu12, mu21, Complex64::new(1.0, 0.0));
    let cross_re = (phase * mu12 + phase.conj() * mu21).re;

    let f = |t: f64| {
        let (ct, st) = (t.cos(), t.sin());
        ct * ct * p.norm() + st * st * mu22.re + ct * st * cross_re
    };
    let (mut lo, mut hi) = (0.0_f64, std::f64::consts::FRAC_PI_2);
    // f(0) = |p| > 0; f(pi/2) = Re(rot * q) < 0 whenever the pair brackets 0.
    if f(hi) >= 0.0 {
        // No sign change: return the endpoint with the smaller quotient and
        // let the caller's verification decide.
        return if mu22.re.abs() < p.norm() { ek } else { y.to_vec() };
    }
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let (ct, st) = (t.cos(), t.sin());
    let mut x: Vec<Complex64> = y.iter().map(|v| v * ct).collect();
    x[k] += Complex64::new(st, 0.0) * phase;
    let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|z| *z /= n);
    x
}

fn isotropic_internal(a: &ComplexMatrix, tol: f64, abs_slack: f64) -> Result<Vec<Complex64>> {
    let dim = a.dim();
    let scale = frobnorm(a);
    if scale == 0.0 {
        return Ok(basis_vector(dim, 0));
    }
    let budget = tol * scale + abs_slack;
    let diag = a.diag();

    // Single index: a diagonal entry already below budget.
    if let Some(i) = (0..dim).find(|&i| diag[i].norm() <= 0.5 * budget) {
        return Ok(basis_vector(dim, i));
    }

    let (idx, w) = caratheodory_triple(&diag).ok_or(Error::ToleranceUnattained {
        tol,
        achieved: diag.iter().map(|z| z.norm()).fold(f64::MAX, f64::min) / scale,
    })?;

    let x = match idx.len() {
        2 => {
            let y = basis_vector(dim, idx[0]);
            pair_step(a, &y, idx[1])
        }
        3 => {
            let y = segment_vector(a, idx[0], idx[1], w[0], w[1]);
            pair_step(a, &y, idx[2])
        }
        _ => unreachable!("caratheodory_triple returns 2 or 3 indices"),
    };

    let achieved = quad_form(a, &x).norm();
    if achieved <= budget {
        Ok(x)
    } else {
        Err(Error::ToleranceUnattained { tol, achieved: achieved / scale })
    }
}

/// Unit vector x with |x* A x| <= tol * ||A||_F for a (numerically)
/// trace-zero square matrix.
pub fn isotropic_vector(a: &ComplexMatrix, tol: f64) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "isotropic_vector needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("isotropic_vector: tol must be positive".into()));
    }
    let fro = frobnorm(a);
    let trace_abs = a.trace().norm();
    if trace_abs > tol * fro {
        return Err(Error::NotTraceZero { trace_abs, tol });
    }
    isotropic_internal(a, tol, 0.0)
}

/// Householder reflection data: H = I - tau v v*, Hermitian and unitary,
/// mapping the unit vector x to a unimodular multiple of e_0. tau = 0 marks
/// the identity, used when x already is e_0 (keeps U = I on inputs whose
/// diagonal is already zero).
fn householder_from_unit(x: &[Complex64]) -> (Vec<Complex64>, f64) {
    if x[0] == Complex64::new(1.0, 0.0) && x[1..].iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return (x.to_vec(), 0.0);
    }
    let beta = if x[0].norm() > 0.0 {
        -x[0] / x[0].norm()
    } else {
        Complex64::new(-1.0, 0.0)
    };
    let mut v = x.to_vec();
    v[0] -= beta;
    let vv = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if vv == 0.0 {
        return (v, 0.0);
    }
    (v, 2.0 / vv)
}

/// Apply I - tau v v* from the left to rows [k..] and from the right to
/// columns [k..] of w.
fn conjugate_in_place(w: &mut ComplexMatrix, k: usize, v: &[Complex64], tau: f64) {
    if tau == 0.0 {
        return;
    }
    let m = w.rows();
    let nk = v.len();
    // Left: rows k.. of all columns.
    for c in 0..m {
        let mut s = Complex64::new(0.0, 0.0);
        for r in 0..nk {
            s += v[r].conj() * w.get(k + r, c);
        }
        s *= tau;
        for r in 0..nk {
            let cur = w.get(k + r, c);
            w.set(k + r, c, cur - v[r] * s);
        }
    }
    // Right: columns k.. of all rows.
    for r in 0..m {
        let mut s = Complex64::new(0.0, 0.0);
        for c in 0..nk {
            s += w.get(r, k + c) * v[c];
        }
        s *= tau;
        for c in 0..nk {
            let cur = w.get(r, k + c);
            w.set(r, k + c, cur - s * v[c].conj());
        }
    }
}

/// Apply I - tau v v* from the right to columns [k..] of u.
fn right_multiply_in_place(u: &mut ComplexMatrix, k: usize, v: &[Complex64], tau: f64) {
    if tau == 0.0 {
        return;
    }
    let m = u.rows();
    let nk = v.len();
    for r in 0..m {
        let mut s = Complex64::new(0.0, 0.0);
        for c in 0..nk {
            s += u.get(r, k + c) * v[c];
        }
        s *= tau;
        for c in 0..nk {
            let cur = u.get(r, k + c);
            u.set(r, k + c, cur - s * v[c].conj());
        }
    }
}

/// Deflate a trace-zero matrix to zero diagonal by unitary similarity.
pub fn reduce(a: &ComplexMatrix, tol: f64) -> Result<ZeroDiagReduction> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "reduce needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("reduce: tol must be positive".into()));
    }
    let m = a.dim();
    let fro = frobnorm(a);
    let trace = a.trace();
    if trace.norm() > 1e-10 * fro && fro > 0.0 {
        return Err(Error::NotTraceZero { trace_abs: trace.norm(), tol: 1e-10 });
    }

    let mu = trace / m as f64;
    let mut w = a.clone();
    for i in 0..m {
        w.set(i, i, w.get(i, i) - mu);
    }

    let mut u = ComplexMatrix::identity(m);
    let abs_slack = 1e-13 * fro;
    for k in 0..m.saturating_sub(1) {
        let block = w.block(k, k, m - k, m - k);
        let x = isotropic_internal(&block, tol, abs_slack)?;
        let (v, tau) = householder_from_unit(&x);
        conjugate_in_place(&mut w, k, &v, tau);
        right_multiply_in_place(&mut u, k, &v, tau);
    }

    for i in 0..m {
        w.set(i, i, w.get(i, i) + mu);
    }
    let fro_out = frobnorm(&w);
    let achieved_tol = if fro_out > 0.0 { w.max_abs_diag() / fro_out } else { 0.0 };
    if achieved_tol > tol {
        return Err(Error::ToleranceUnattained { tol, achieved: achieved_tol });
    }
    Ok(ZeroDiagReduction { unitary: u, zero_diag: w, achieved_tol })
}
