//! Command-line front end: generate inputs, factor, verify, pave, witness
//! and benchmark, with deterministic outputs for fixed flags and seeds.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use comfact::error::Error;
use comfact::factor::{factor_any, CertNode, FactorMethod, FactorOptions};
use comfact::mat::{frobnorm, opnorm, random_trace_zero, random_zero_diag, ComplexMatrix};
use comfact::mmio;
use comfact::paving::{claim3_pave, gap_witness, search_paving};
use comfact::report::{build_report, fitted_exponent, verify_triple, BenchRow, CSV_HEADER};

#[derive(Parser)]
#[command(name = "comfact", version, about = "Commutator factorization with certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatrixFormat {
    Mm,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    #[value(name = "zero-diag")]
    ZeroDiag,
    #[value(name = "trace-zero")]
    TraceZero,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMethod {
    Claim1,
    Theorem2,
}

impl From<CliMethod> for FactorMethod {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::Claim1 => FactorMethod::Claim1,
            CliMethod::Theorem2 => FactorMethod::Theorem2,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PaveMode {
    Claim3,
    Search,
}

#[derive(Subcommand)]
enum Command {
    /// Write a reproducible random matrix.
    Gen(GenArgs),
    /// Factor a trace-zero matrix and write B, C and a certificate report.
    Factor(FactorArgs),
    /// Re-check A = [B, C] and the spectrum of B from files alone.
    Verify(VerifyArgs),
    /// Extract a spectral-grid paving or search for a low-norm partition.
    Pave(PaveArgs),
    /// Closest-pair witness for the diagonal of B.
    Witness(WitnessArgs),
    /// Sweep (m, seed, method) cells and write a CSV of measured norms.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "zero-diag")]
    kind: GenKind,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "mm")]
    format: MatrixFormat,
}

#[derive(Args)]
struct FactorArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "claim1")]
    method: CliMethod,
    /// Fixed eps for every recursion level (default: the 1/k schedule).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1)]
    rounds: u32,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance for the verified flag.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Output prefix; writes <prefix>.B.mtx, <prefix>.C.mtx, <prefix>.report.json.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "mm")]
    format: MatrixFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    c: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct PaveArgs {
    #[arg(long, value_enum)]
    mode: PaveMode,
    /// Input matrix for search mode.
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Diagonal B matrix for claim3 mode.
    #[arg(long)]
    b: Option<PathBuf>,
    /// C matrix for claim3 mode.
    #[arg(long)]
    c: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, default_value_t = 16)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    /// Matrix whose diagonal is the spectrum to analyze.
    #[arg(long)]
    b: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated list of dimensions.
    #[arg(long, value_delimiter = ',')]
    m_list: Vec<usize>,
    /// Number of seeds per cell (seeds 0..n, offset by --seed).
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = vec![CliMethod::Claim1])]
    methods: Vec<CliMethod>,
    #[arg(long, default_value_t = 4)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

fn write_matrix(path: &Path, m: &ComplexMatrix, format: MatrixFormat) -> comfact::Result<()> {
    match format {
        MatrixFormat::Mm => mmio::write_matrix_file(path, m),
        MatrixFormat::Json => mmio::write_matrix_file_json(path, m),
    }
}

fn with_path_context<T>(r: comfact::Result<T>, path: &Path) -> comfact::Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn cmd_gen(args: &GenArgs) -> comfact::Result<()> {
    let m = match args.kind {
        GenKind::ZeroDiag => random_zero_diag(args.m, args.seed)?,
        GenKind::TraceZero => random_trace_zero(args.m, args.seed)?,
    };
    with_path_context(write_matrix(&args.output, &m, args.format), &args.output)?;
    println!("wrote {} ({}x{})", args.output.display(), m.rows(), m.cols());
    Ok(())
}

/// Per-level eps summary: follow the leftmost chain of the certificate tree.
fn eps_path(node: &CertNode) -> Vec<f64> {
    let mut out = Vec::new();
    let mut cur = node;
    loop {
        match cur {
            CertNode::Claim1(c) => {
                out.push(c.eps);
                match c.children.first() {
                    Some(child) => cur = child,
                    None => break,
                }
            }
            CertNode::Merge(mc) => match mc.children.first() {
                Some(child) => cur = child,
                None => break,
            },
            CertNode::Base(_) => break,
        }
    }
    out
}

fn cmd_factor(args: &FactorArgs) -> comfact::Result<bool> {
    let a = with_path_context(mmio::read_matrix_file(&args.input), &args.input)?;
    let opts = FactorOptions {
        eps: args.eps,
        trials: args.trials,
        seed: args.seed,
        rounds: args.rounds,
        ..FactorOptions::default()
    };
    let method: FactorMethod = args.method.into();
    let result = factor_any(&a, method, &opts)?;
    let norm_a = opnorm(&a, 1e-8, 20_000)?.op_norm;
    let report = build_report(
        &a,
        norm_a,
        &result,
        method,
        eps_path(&result.certificate),
        Some(args.seed),
        args.tol,
    );

    let b_path = args.output.with_extension("B.mtx");
    let c_path = args.output.with_extension("C.mtx");
    let report_path = args.output.with_extension("report.json");
    with_path_context(write_matrix(&b_path, &result.b.matrix(), args.format), &b_path)?;
    with_path_context(write_matrix(&c_path, &result.c, args.format), &c_path)?;
    with_path_context(
        std::fs::write(&report_path, report.to_json()? + "\n").map_err(Error::Io),
        &report_path,
    )?;
    println!(
        "verified={} residual={:.3e} norm_B={:.6} norm_C={:.6}",
        report.verified, report.residual_rel, report.norm_b, report.norm_c
    );
    Ok(report.verified)
}

fn cmd_verify(args: &VerifyArgs) -> comfact::Result<bool> {
    let a = with_path_context(mmio::read_matrix_file(&args.a), &args.a)?;
    let b = with_path_context(mmio::read_matrix_file(&args.b), &args.b)?;
    let c = with_path_context(mmio::read_matrix_file(&args.c), &args.c)?;
    let outcome = verify_triple(&a, &b, &c, args.tol)?;
    let json = serde_json::to_string_pretty(&outcome).map_err(|e| Error::Parse(e.to_string()))?;
    println!("{json}");
    Ok(outcome.passed())
}

fn cmd_pave(args: &PaveArgs) -> comfact::Result<bool> {
    match args.mode {
        PaveMode::Claim3 => {
            let (b_path, c_path) = match (&args.b, &args.c) {
                (Some(b), Some(c)) => (b, c),
                _ => {
                    return Err(Error::InvalidArgument(
                        "claim3 mode needs --b and --c".into(),
                    ))
                }
            };
            let eps = args
                .eps
                .ok_or_else(|| Error::InvalidArgument("claim3 mode needs --eps".into()))?;
            let b = with_path_context(mmio::read_matrix_file(b_path), b_path)?;
            let c = with_path_context(mmio::read_matrix_file(c_path), c_path)?;
            // The grid paving consumes the spectrum, i.e. the diagonal of B.
            let off_mass = frobnorm(&b.sub(&ComplexMatrix::diagonal(&b.diag())));
            if off_mass > 1e-10 * frobnorm(&b).max(1e-300) {
                return Err(Error::InvalidArgument(
                    "claim3 mode needs a diagonal B matrix".into(),
                ));
            }
            let paving = claim3_pave(&b.diag(), &c, eps)?;
            let json =
                serde_json::to_string_pretty(&paving).map_err(|e| Error::Parse(e.to_string()))?;
            emit(args.output.as_deref(), &json)?;
            let violations = paving.violations();
            if !violations.is_empty() {
                eprintln!("cells violating the bound: {violations:?}");
            }
            Ok(violations.is_empty())
        }
        PaveMode::Search => {
            let input = args
                .input
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("search mode needs --input".into()))?;
            let blocks = args
                .blocks
                .ok_or_else(|| Error::InvalidArgument("search mode needs --blocks".into()))?;
            let a = with_path_context(mmio::read_matrix_file(input), input)?;
            let block_size = args.block_size.unwrap_or_else(|| a.rows() / blocks.max(1));
            let partition = search_paving(&a, blocks, block_size, args.trials, args.seed)?;
            let json = serde_json::to_string_pretty(&partition)
                .map_err(|e| Error::Parse(e.to_string()))?;
            emit(args.output.as_deref(), &json)?;
            Ok(true)
        }
    }
}

fn cmd_witness(args: &WitnessArgs) -> comfact::Result<()> {
    let b = with_path_context(mmio::read_matrix_file(&args.b), &args.b)?;
    let w = gap_witness(&b.diag())?;
    let json = serde_json::to_string_pretty(&w).map_err(|e| Error::Parse(e.to_string()))?;
    emit(args.output.as_deref(), &json)
}

fn emit(path: Option<&Path>, text: &str) -> comfact::Result<()> {
    match path {
        Some(p) => {
            with_path_context(
                std::fs::write(p, text.to_string() + "\n").map_err(Error::Io),
                p,
            )?;
            println!("wrote {}", p.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> comfact::Result<()> {
    if args.m_list.is_empty() {
        return Err(Error::InvalidArgument("bench needs a nonempty --m-list".into()));
    }
    let mut rows: Vec<BenchRow> = Vec::new();
    for &method in &args.methods {
        for &m in &args.m_list {
            for s in 0..args.seeds {
                let seed = args.seed + s;
                let started = std::time::Instant::now();
                let row = match bench_cell(m, seed, method.into(), args.trials) {
                    Ok((norm_c, product_ratio, residual)) => BenchRow {
                        m,
                        seed,
                        method: method.into(),
                        norm_c,
                        product_ratio,
                        residual,
                        wall_time_s: started.elapsed().as_secs_f64(),
                        error: None,
                    },
                    Err(e) => BenchRow {
                        m,
                        seed,
                        method: method.into(),
                        norm_c: f64::NAN,
                        product_ratio: f64::NAN,
                        residual: f64::NAN,
                        wall_time_s: started.elapsed().as_secs_f64(),
                        error: Some(e.to_string()),
                    },
                };
                rows.push(row);
            }
        }
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv_line());
        csv.push('\n');
    }
    with_path_context(std::fs::write(&args.output, csv).map_err(Error::Io), &args.output)?;

    for &method in &args.methods {
        let fm: FactorMethod = method.into();
        let mut pts = Vec::new();
        for &m in &args.m_list {
            let mut vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.m == m && r.method == fm && r.error.is_none())
                .map(|r| r.norm_c)
                .collect();
            if vals.is_empty() {
                continue;
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.push((m as f64, vals[vals.len() / 2]));
        }
        println!("fitted_exponent {} {}", fm.as_str(), fitted_exponent(&pts));
    }
    println!("wrote {}", args.output.display());
    Ok(())
}

fn bench_cell(
    m: usize,
    seed: u64,
    method: FactorMethod,
    trials: usize,
) -> comfact::Result<(f64, f64, f64)> {
    let a = random_zero_diag(m, seed)?;
    let opts = FactorOptions { trials, seed, ..FactorOptions::default() };
    let f = factor_any(&a, method, &opts)?;
    let norm_a = opnorm(&a, 1e-8, 20_000)?.op_norm;
    Ok((f.norm_c, f.norm_b * f.norm_c / norm_a, f.residual))
}

fn run(cli: &Cli) -> comfact::Result<bool> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a).map(|()| true),
        Command::Factor(a) => cmd_factor(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Pave(a) => cmd_pave(a),
        Command::Witness(a) => cmd_witness(a).map(|()| true),
        Command::Bench(a) => cmd_bench(a).map(|()| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
