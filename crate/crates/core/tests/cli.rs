//! End-to-end command-line checks: formats, exit codes, determinism.

use std::path::Path;
use std::process::{Command, Output};

use comfact::mmio::read_matrix_file;

fn comfact(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_comfact"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = comfact(&["gen", "--m", "16", "--seed", "7", "-o", "a1.mtx"], dir.path());
    let out2 = comfact(&["gen", "--m", "16", "--seed", "7", "-o", "a2.mtx"], dir.path());
    assert_exit(&out1, 0);
    assert_exit(&out2, 0);
    let b1 = std::fs::read(dir.path().join("a1.mtx")).unwrap();
    let b2 = std::fs::read(dir.path().join("a2.mtx")).unwrap();
    assert_eq!(b1, b2);
    assert!(!b1.is_empty());
}

#[test]
fn gen_trace_zero_has_tiny_trace_in_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = comfact(
        &["gen", "--m", "12", "--seed", "3", "--kind", "trace-zero", "-o", "a.mtx"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let a = read_matrix_file(dir.path().join("a.mtx")).unwrap();
    let fro = comfact::mat::frobnorm(&a);
    assert!(a.trace().norm() <= 1e-12 * fro);
}

#[test]
fn gen_zero_diag_writes_literal_zero_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = comfact(&["gen", "--m", "4", "--seed", "1", "-o", "a.mtx"], dir.path());
    assert_exit(&out, 0);
    let text = std::fs::read_to_string(dir.path().join("a.mtx")).unwrap();
    // Column-major: diagonal of column c sits at line 2 + c*(m+1).
    let lines: Vec<&str> = text.lines().collect();
    for c in 0..4 {
        let diag_line = lines[2 + c * 4 + c];
        assert_eq!(diag_line, "0.0000000000000000e0 0.0000000000000000e0");
    }
}

#[test]
fn factor_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&comfact(&["gen", "--m", "16", "--seed", "5", "-o", "a.mtx"], dir.path()), 0);
    let out = comfact(
        &["factor", "-i", "a.mtx", "--method", "claim1", "-o", "f"],
        dir.path(),
    );
    assert_exit(&out, 0);
    assert!(dir.path().join("f.B.mtx").exists());
    assert!(dir.path().join("f.C.mtx").exists());
    let report = std::fs::read_to_string(dir.path().join("f.report.json")).unwrap();
    assert!(report.contains("\"verified\": true"));

    let out = comfact(
        &["verify", "--a", "a.mtx", "--b", "f.B.mtx", "--c", "f.C.mtx"],
        dir.path(),
    );
    assert_exit(&out, 0);
}

#[test]
fn factor_report_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&comfact(&["gen", "--m", "32", "--seed", "2", "-o", "a.mtx"], dir.path()), 0);
    for run in ["r1", "r2"] {
        let out = comfact(
            &[
                "factor", "-i", "a.mtx", "--method", "theorem2", "--trials", "3", "--seed",
                "11", "-o", run,
            ],
            dir.path(),
        );
        assert_exit(&out, 0);
    }
    for suffix in ["B.mtx", "C.mtx", "report.json"] {
        let b1 = std::fs::read(dir.path().join(format!("r1.{suffix}"))).unwrap();
        let b2 = std::fs::read(dir.path().join(format!("r2.{suffix}"))).unwrap();
        assert_eq!(b1, b2, "nondeterministic {suffix}");
    }
}

#[test]
fn verify_rejects_perturbed_c() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&comfact(&["gen", "--m", "16", "--seed", "9", "-o", "a.mtx"], dir.path()), 0);
    assert_exit(
        &comfact(&["factor", "-i", "a.mtx", "-o", "f"], dir.path()),
        0,
    );
    // Perturb one entry of C by 1e-3.
    let mut c = read_matrix_file(dir.path().join("f.C.mtx")).unwrap();
    let cur = c.get(0, 1);
    c.set(0, 1, cur + num_complex::Complex64::new(1e-3, 0.0));
    comfact::mmio::write_matrix_file(dir.path().join("f.C.mtx"), &c).unwrap();
    let out = comfact(
        &["verify", "--a", "a.mtx", "--b", "f.B.mtx", "--c", "f.C.mtx"],
        dir.path(),
    );
    assert_exit(&out, 2);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("residual"));
}

#[test]
fn verify_rejects_spectrum_escape() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&comfact(&["gen", "--m", "16", "--seed", "4", "-o", "a.mtx"], dir.path()), 0);
    assert_exit(&comfact(&["factor", "-i", "a.mtx", "-o", "f"], dir.path()), 0);
    let mut b = read_matrix_file(dir.path().join("f.B.mtx")).unwrap();
    b.set(0, 0, num_complex::Complex64::new(1.5, 0.0));
    comfact::mmio::write_matrix_file(dir.path().join("f.B.mtx"), &b).unwrap();
    let out = comfact(
        &["verify", "--a", "a.mtx", "--b", "f.B.mtx", "--c", "f.C.mtx", "--tol", "1e9"],
        dir.path(),
    );
    assert_exit(&out, 2);
}

#[test]
fn factor_rejects_zero_and_nontrace_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let zero = comfact::mat::ComplexMatrix::zeros(4, 4);
    comfact::mmio::write_matrix_file(dir.path().join("zero.mtx"), &zero).unwrap();
    let out = comfact(&["factor", "-i", "zero.mtx", "-o", "z"], dir.path());
    assert_exit(&out, 2);

    let id = comfact::mat::ComplexMatrix::identity(4);
    comfact::mmio::write_matrix_file(dir.path().join("id.mtx"), &id).unwrap();
    let out = comfact(&["factor", "-i", "id.mtx", "-o", "i"], dir.path());
    assert_exit(&out, 2);
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = comfact(&["factor", "-i", "missing.mtx", "-o", "f"], dir.path());
    assert_exit(&out, 4);
}

#[test]
fn pave_claim3_flow_and_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&comfact(&["gen", "--m", "16", "--seed", "6", "-o", "a.mtx"], dir.path()), 0);
    assert_exit(&comfact(&["factor", "-i", "a.mtx", "-o", "f"], dir.path()), 0);
    let out = comfact(
        &["pave", "--mode", "claim3", "--b", "f.B.mtx", "--c", "f.C.mtx", "--eps", "0.5"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("cells"));

    let out = comfact(
        &["pave", "--mode", "claim3", "--b", "f.B.mtx", "--c", "f.C.mtx", "--eps", "1.5"],
        dir.path(),
    );
    assert_exit(&out, 2);
}

#[test]
fn pave_search_flow() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&comfact(&["gen", "--m", "32", "--seed", "8", "-o", "a.mtx"], dir.path()), 0);
    let out = comfact(
        &["pave", "--mode", "search", "-i", "a.mtx", "--blocks", "4", "--trials", "4", "--seed", "2"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("sigma"));
    assert!(stdout.contains("block_norms"));
}

#[test]
fn witness_flow() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&comfact(&["gen", "--m", "16", "--seed", "5", "-o", "a.mtx"], dir.path()), 0);
    assert_exit(&comfact(&["factor", "-i", "a.mtx", "-o", "f"], dir.path()), 0);
    let out = comfact(&["witness", "--b", "f.B.mtx"], dir.path());
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pigeonhole_bound"));
    assert!(stdout.contains("c_entry_lower_bound"));
}

#[test]
fn bench_writes_csv_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = comfact(
        &[
            "bench", "--m-list", "4,16", "--seeds", "2", "--methods", "claim1", "-o",
            "bench.csv",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let text = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,seed,method,norm_C,product_ratio,residual,wall_time_s");
    assert_eq!(lines.len(), 1 + 2 * 2);
    // Full-precision floats reparse exactly.
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        let norm_c: f64 = cols[3].parse().unwrap();
        assert_eq!(format!("{norm_c}"), cols[3]);
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("fitted_exponent claim1"));
}
