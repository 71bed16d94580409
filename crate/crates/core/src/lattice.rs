//! Self-similar spectra in the unit square.
//!
//! The depth-n point set has 4^n points, splits into four quadrant groups
//! that are scaled translates of the depth-(n-1) set, and any two groups are
//! 2*eps separated in projection on the real or imaginary axis. The point
//! order is fixed: writing an index in base 4 with n digits, the most
//! significant digit selects the quadrant translate.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// The four corner points `(+-1, +-i)` in fixed quadrant order.
pub const LAMBDA_ONE: [Complex64; 4] = [
    Complex64::new(-1.0, -1.0),
    Complex64::new(-1.0, 1.0),
    Complex64::new(1.0, -1.0),
    Complex64::new(1.0, 1.0),
];

/// Depth, separation parameter and the ordered point list.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub depth: u32,
    pub eps: f64,
    pub points: Vec<Complex64>,
}

/// Which axis realizes the separation of a group pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    Real,
    Imaginary,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSeparation {
    pub group_a: usize,
    pub group_b: usize,
    pub axis: Axis,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationCertificate {
    pub eps: f64,
    pub pairs: Vec<PairSeparation>,
    pub min_gap: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// The four quadrant translates `+-(1+eps)/2 +- i(1+eps)/2`, ordered by
/// (sign of Re, sign of Im): (--, -+, +-, ++).
pub fn quadrant_offsets(eps: f64) -> Result<[Complex64; 4]> {
    check_eps(eps)?;
    let h = (1.0 + eps) / 2.0;
    Ok([
        Complex64::new(-h, -h),
        Complex64::new(-h, h),
        Complex64::new(h, -h),
        Complex64::new(h, h),
    ])
}

/// Affine map sending a depth-(n-1) point into its quadrant copy. Shared with
/// the factorization recursion so both produce bit-identical spectra.
#[inline]
pub fn quadrant_map(p: Complex64, eps: f64, offset: Complex64) -> Complex64 {
    p * ((1.0 - eps) / 2.0) + offset
}

/// Build the depth-n point set for the given eps.
pub fn lambda_set(n: u32, eps: f64) -> Result<LatticeSpec> {
    check_eps(eps)?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "lattice depth 0 is undefined; the recursion base is depth 1".into(),
        ));
    }
    let mut points: Vec<Complex64> = LAMBDA_ONE.to_vec();
    for _ in 1..n {
        let offsets = quadrant_offsets(eps)?;
        let mut next = Vec::with_capacity(points.len() * 4);
        for &off in &offsets {
            next.extend(points.iter().map(|&p| quadrant_map(p, eps, off)));
        }
        points = next;
    }
    Ok(LatticeSpec { depth: n, eps, points })
}

fn projection_gap(a: &[Complex64], b: &[Complex64], axis: Axis) -> f64 {
    let proj = |z: &Complex64| match axis {
        Axis::Real => z.re,
        Axis::Imaginary => z.im,
    };
    let (a_min, a_max) = a.iter().map(proj).fold((f64::MAX, f64::MIN), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let (b_min, b_max) = b.iter().map(proj).fold((f64::MAX, f64::MIN), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    (b_min - a_max).max(a_min - b_max)
}

/// Certify that every pair of quadrant groups is 2*eps separated on some axis.
pub fn separation_certificate(spec: &LatticeSpec) -> Result<SeparationCertificate> {
    let group_len = spec.points.len() / 4;
    if group_len * 4 != spec.points.len() || spec.points.is_empty() {
        return Err(Error::InvalidArgument("lattice spec does not split into 4 groups".into()));
    }
    let groups: Vec<&[Complex64]> =
        (0..4).map(|q| &spec.points[q * group_len..(q + 1) * group_len]).collect();
    let required = 2.0 * spec.eps - 1e-12;
    let mut pairs = Vec::new();
    let mut min_gap = f64::MAX;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let re_gap = projection_gap(groups[a], groups[b], Axis::Real);
            let im_gap = projection_gap(groups[a], groups[b], Axis::Imaginary);
            let (axis, gap) = if re_gap >= im_gap {
                (Axis::Real, re_gap)
            } else {
                (Axis::Imaginary, im_gap)
            };
            if gap < required {
                return Err(Error::InvalidArgument(format!(
                    "groups {a} and {b} are separated by only {gap:.6e} < 2*eps = {:.6e}",
                    2.0 * spec.eps
                )));
            }
            pairs.push(PairSeparation { group_a: a, group_b: b, axis, gap });
            min_gap = min_gap.min(gap);
        }
    }
    Ok(SeparationCertificate { eps: spec.eps, pairs, min_gap })
}
