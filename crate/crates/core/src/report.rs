//! Certificate reports and benchmark rows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{check_certificate, CertNode, FactorMethod, FactorResult};
use crate::mat::{frobnorm, ComplexMatrix};
use crate::paving::PavingPartition;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "m,seed,method,norm_C,product_ratio,residual,wall_time_s";

/// Verification outcome and measured quantities for one factorization,
/// serialized as a versioned JSON document.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub schema: u32,
    pub tool_version: String,
    pub m: usize,
    pub method: FactorMethod,
    pub eps_schedule: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub norm_a: f64,
    pub norm_b: f64,
    pub norm_c: f64,
    pub product_ratio: f64,
    pub residual_rel: f64,
    pub verified: bool,
    pub violations: Vec<String>,
    pub certificate_tree: CertNode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paving: Option<PavingPartition>,
}

fn spectrum_in_square(result: &FactorResult) -> bool {
    result
        .b
        .eigenvalues()
        .iter()
        .all(|z| z.re.abs() <= 1.0 + 1e-12 && z.im.abs() <= 1.0 + 1e-12)
}

fn find_paving(node: &CertNode) -> Option<&PavingPartition> {
    match node {
        CertNode::Merge(mc) => {
            if let Some(p) = &mc.paving {
                return Some(p);
            }
            mc.children.iter().find_map(find_paving)
        }
        CertNode::Claim1(c) => c.children.iter().find_map(find_paving),
        CertNode::Base(_) => None,
    }
}

/// Assemble the report for a factorization of `a`, re-deriving the verified
/// flag from the result and its certificate tree.
pub fn build_report(
    a: &ComplexMatrix,
    norm_a: f64,
    result: &FactorResult,
    method: FactorMethod,
    eps_schedule: Vec<f64>,
    seed: Option<u64>,
    residual_tol: f64,
) -> CertificateReport {
    let mut violations = check_certificate(&result.certificate);
    if result.residual > residual_tol {
        violations.push(format!(
            "residual {} exceeds tolerance {residual_tol}",
            result.residual
        ));
    }
    if !spectrum_in_square(result) {
        violations.push("an eigenvalue of B lies outside the closed unit square".into());
    }
    let verified = violations.is_empty();
    let product = result.norm_b * result.norm_c;
    CertificateReport {
        schema: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        m: a.dim(),
        method,
        eps_schedule,
        seed,
        norm_a,
        norm_b: result.norm_b,
        norm_c: result.norm_c,
        product_ratio: if norm_a > 0.0 { product / norm_a } else { f64::INFINITY },
        residual_rel: result.residual,
        verified,
        violations,
        certificate_tree: result.certificate.clone(),
        paving: find_paving(&result.certificate).cloned(),
    }
}

impl CertificateReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// One benchmark sweep cell.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub m: usize,
    pub seed: u64,
    pub method: FactorMethod,
    pub norm_c: f64,
    pub product_ratio: f64,
    pub residual: f64,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn to_csv_line(&self) -> String {
        match &self.error {
            None => format!(
                "{},{},{},{},{},{},{}",
                self.m,
                self.seed,
                self.method.as_str(),
                self.norm_c,
                self.product_ratio,
                self.residual,
                self.wall_time_s
            ),
            Some(e) => format!(
                "{},{},{},NaN,NaN,NaN,{} # error: {}",
                self.m,
                self.seed,
                self.method.as_str(),
                self.wall_time_s,
                e.replace('\n', " ")
            ),
        }
    }
}

/// Least-squares slope of log(y) against log(x); the fitted growth exponent.
pub fn fitted_exponent(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Residual and invariant checks recomputed purely from matrices on disk;
/// shares no state with the factorization that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub m: usize,
    pub residual_rel: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub norm_c: f64,
    pub product_ratio: f64,
    pub normality_residual: f64,
    pub spectrum_re_range: (f64, f64),
    pub spectrum_im_range: (f64, f64),
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Independent verification of A = [B, C] from the three matrices alone:
/// residual, normality of B, and the spectrum-in-square check via extreme
/// eigenvalues of the Hermitian parts (exact for normal B).
pub fn verify_triple(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    residual_tol: f64,
) -> Result<VerifyOutcome> {
    if !a.is_square() || a.rows() != b.rows() || a.rows() != c.rows() || !b.is_square() || !c.is_square()
    {
        return Err(Error::DimensionMismatch(format!(
            "verify: A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let m = a.dim();
    let mut failures = Vec::new();

    let comm = b.matmul(c).sub(&c.matmul(b));
    let fro_a = frobnorm(a);
    let residual_rel = if fro_a > 0.0 {
        frobnorm(&a.sub(&comm)) / fro_a
    } else if frobnorm(&comm) == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    if residual_rel > residual_tol {
        failures.push(format!("residual {residual_rel:.3e} exceeds {residual_tol:.3e}"));
    }

    let norm_a = crate::mat::opnorm(a, 1e-8, 20_000)?.op_norm;
    let norm_b = crate::mat::opnorm(b, 1e-8, 20_000)?.op_norm;
    let norm_c = crate::mat::opnorm(c, 1e-8, 20_000)?.op_norm;

    let gram = b.conj_transpose().matmul(b).sub(&b.matmul(&b.conj_transpose()));
    let normality_residual = frobnorm(&gram);
    let b_scale = norm_b.max(1e-300);
    if normality_residual > 1e-8 * b_scale * b_scale * (m as f64) {
        failures.push(format!("B is not normal: ||B*B - BB*||_F = {normality_residual:.3e}"));
    }

    // For normal B the eigenvalues of (B + B*)/2 and (B - B*)/(2i) are the
    // real and imaginary parts of the spectrum.
    let herm = b.add(&b.conj_transpose()).scale(num_complex::Complex64::new(0.5, 0.0));
    let skew = b
        .sub(&b.conj_transpose())
        .scale(num_complex::Complex64::new(0.0, -0.5));
    let (re_lo, re_hi) = hermitian_extremes(&herm)?;
    let (im_lo, im_hi) = hermitian_extremes(&skew)?;
    let slack = 1e-8 * b_scale.max(1.0);
    if re_hi > 1.0 + slack || re_lo < -1.0 - slack || im_hi > 1.0 + slack || im_lo < -1.0 - slack {
        failures.push(format!(
            "spectrum outside the closed unit square: Re in [{re_lo:.6}, {re_hi:.6}], Im in [{im_lo:.6}, {im_hi:.6}]"
        ));
    }

    Ok(VerifyOutcome {
        m,
        residual_rel,
        norm_a,
        norm_b,
        norm_c,
        product_ratio: if norm_a > 0.0 { norm_b * norm_c / norm_a } else { f64::INFINITY },
        normality_residual,
        spectrum_re_range: (re_lo, re_hi),
        spectrum_im_range: (im_lo, im_hi),
        failures,
    })
}

/// Extreme eigenvalues of a Hermitian matrix via shifted power iteration:
/// opnorm(H + cI) - c gives the maximum once the spectrum is positive.
fn hermitian_extremes(h: &ComplexMatrix) -> Result<(f64, f64)> {
    let n = h.dim();
    let shift = frobnorm(h) + 1.0;
    let c = num_complex::Complex64::new(shift, 0.0);
    let mut plus = h.clone();
    let mut minus = h.scale(num_complex::Complex64::new(-1.0, 0.0));
    for i in 0..n {
        plus.set(i, i, plus.get(i, i) + c);
        minus.set(i, i, minus.get(i, i) + c);
    }
    let hi = crate::mat::opnorm(&plus, 1e-9, 30_000)?.op_norm - shift;
    let lo = shift - crate::mat::opnorm(&minus, 1e-9, 30_000)?.op_norm;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{factor_any, FactorOptions};
    use crate::mat::random_trace_zero;

    #[test]
    fn verify_accepts_factor_output_and_rejects_perturbation() {
        let a = random_trace_zero(8, 4).unwrap();
        let f = factor_any(&a, FactorMethod::Claim1, &FactorOptions::default()).unwrap();
        let b = f.b.matrix();
        let out = verify_triple(&a, &b, &f.c, 1e-9).unwrap();
        assert!(out.passed(), "failures: {:?}", out.failures);

        let mut c_bad = f.c.clone();
        let cur = c_bad.get(0, 1);
        c_bad.set(0, 1, cur + num_complex::Complex64::new(1e-3, 0.0));
        let out = verify_triple(&a, &b, &c_bad, 1e-9).unwrap();
        assert!(!out.passed());
        assert!(out.failures[0].contains("residual"));
    }

    #[test]
    fn verify_rejects_spectrum_violation() {
        let a = random_trace_zero(4, 6).unwrap();
        let f = factor_any(&a, FactorMethod::Claim1, &FactorOptions::default()).unwrap();
        // Replace B with a stretched diagonal: eigenvalue at 1.5.
        let mut b = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            b.set(i, i, num_complex::Complex64::new(1.5, 0.0));
        }
        let out = verify_triple(&a, &b, &f.c, 1e9).unwrap();
        assert!(out.failures.iter().any(|f| f.contains("spectrum")));
    }

    #[test]
    fn exponent_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [4.0, 16.0, 64.0, 256.0]
            .iter()
            .map(|&m: &f64| (m, 3.0 * m.powf(0.5)))
            .collect();
        assert!((fitted_exponent(&pts) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn report_serializes_with_schema() {
        let a = random_trace_zero(4, 1).unwrap();
        let f = factor_any(&a, FactorMethod::Claim1, &FactorOptions::default()).unwrap();
        let rep = build_report(&a, 1.0, &f, FactorMethod::Claim1, vec![0.5], Some(1), 1e-9);
        assert!(rep.verified, "violations: {:?}", rep.violations);
        let json = rep.to_json().unwrap();
        assert!(json.contains("\"schema\": 1"));
        assert!(json.contains("certificate_tree"));
    }
}
