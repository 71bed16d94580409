//! Oracle-backed checks: the crate's norm estimates and reductions against a
//! full singular value decomposition computed by an independent library.

mod common;

use comfact::mat::{
    commutator, frobnorm, opnorm, pad_to, random_trace_zero, random_zero_diag,
    unitary_conjugate, ComplexMatrix,
};
use comfact::zerodiag::reduce;
use common::{random_complex, random_householder_unitary, svd_opnorm, svd_singular_values};

#[test]
fn opnorm_matches_svd_on_random_gaussians() {
    // 100 random matrices up to 64x64, 1e-8 relative agreement.
    let sizes = [2usize, 3, 5, 8, 8, 13, 16, 21, 32, 64];
    let mut count = 0;
    for (k, &n) in sizes.iter().cycle().take(100).enumerate() {
        let a = random_complex(n, n, 1000 + k as u64);
        let report = opnorm(&a, 1e-10, 50_000).unwrap();
        assert!(report.converged, "size {n} seed {k} did not converge");
        let truth = svd_opnorm(&a);
        let rel = (report.op_norm - truth).abs() / truth;
        assert!(rel <= 1e-8, "size {n} case {k}: rel error {rel:.3e}");
        assert!(report.op_norm <= report.fro_norm + 1e-9);
        count += 1;
    }
    assert_eq!(count, 100);
}

#[test]
fn opnorm_matches_svd_on_eight_by_eight() {
    let a = random_complex(8, 8, 7);
    let report = opnorm(&a, 1e-10, 20_000).unwrap();
    let truth = svd_opnorm(&a);
    assert!((report.op_norm - truth).abs() <= 1e-8 * truth);
}

#[test]
fn pad_preserves_operator_norm() {
    for seed in 0..10u64 {
        let a = random_complex(5, 5, seed);
        let padded = pad_to(&a, 9).unwrap();
        let n1 = opnorm(&a, 1e-10, 20_000).unwrap().op_norm;
        let n2 = opnorm(&padded, 1e-10, 20_000).unwrap().op_norm;
        assert!((n1 - n2).abs() <= 1e-9 * n1.max(1.0));
        // And against the oracle.
        assert!((svd_opnorm(&a) - svd_opnorm(&padded)).abs() <= 1e-10 * n1.max(1.0));
    }
}

#[test]
fn householder_conjugation_preserves_trace_and_frobenius() {
    for seed in 0..10u64 {
        let u = random_householder_unitary(6, seed);
        let a = random_complex(6, 6, seed + 50);
        let con = unitary_conjugate(&u, &a).unwrap();
        assert!((con.trace() - a.trace()).norm() <= 1e-12 * frobnorm(&a));
        assert!((frobnorm(&con) - frobnorm(&a)).abs() <= 1e-12 * frobnorm(&a));
    }
}

#[test]
fn zerodiag_reduction_preserves_singular_values() {
    for seed in 0..10u64 {
        let n = 4 + (seed as usize % 5) * 3;
        let a = random_trace_zero(n, seed).unwrap();
        let red = reduce(&a, 1e-10).unwrap();
        let left = svd_singular_values(&a);
        let right = svd_singular_values(&red.zero_diag);
        let scale = left[0].max(1e-300);
        for (l, r) in left.iter().zip(&right) {
            assert!((l - r).abs() <= 1e-10 * scale, "seed {seed}: {l} vs {r}");
        }
    }
}

#[test]
fn commutator_of_zero_diag_against_oracle_norms() {
    // The assembled commutator keeps the operator norm visible to the oracle;
    // sanity that measured and oracle norms agree for the pipeline carrier.
    let a = random_zero_diag(16, 3).unwrap();
    let measured = opnorm(&a, 1e-10, 20_000).unwrap().op_norm;
    let truth = svd_opnorm(&a);
    assert!((measured - truth).abs() <= 1e-8 * truth);
    assert!((truth - 1.0).abs() <= 1e-7, "generator normalizes to opnorm 1");
}

#[test]
fn commutator_trace_identity_random_pairs() {
    for seed in 0..5u64 {
        let b = random_complex(7, 7, seed);
        let c = random_complex(7, 7, seed + 99);
        let a = commutator(&b, &c).unwrap();
        let scale = frobnorm(&b) * frobnorm(&c);
        assert!(a.trace().norm() <= 1e-12 * scale);
    }
}

#[test]
fn identity_padding_is_exact() {
    let a = random_complex(4, 4, 11);
    assert_eq!(pad_to(&a, 4).unwrap(), a);
    let p = pad_to(&a, 6).unwrap();
    for r in 0..6 {
        for c in 0..6 {
            if r < 4 && c < 4 {
                assert_eq!(p.get(r, c), a.get(r, c));
            } else {
                assert_eq!(p.get(r, c), num_complex::Complex64::new(0.0, 0.0));
            }
        }
    }
    let _ = ComplexMatrix::zeros(2, 2);
}
