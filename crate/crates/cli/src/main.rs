//! weilzeta: discriminant-form reports, invariant verification suites, and
//! standard L-function evaluation from eigenvalue data.
//!
//! Exit codes: 0 ok, 1 property failure, 2 parse error, 3 unsupported
//! input, 4 degenerate data.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::complex::Complex64;
use serde::Serialize;

use num::bigint::BigInt;
use num::rational::BigRational;
use weilzeta_core::fqm::{FiniteQuadraticModule, FqmError, GramMatrix};
use weilzeta_core::lfun::{self, LfunError, ZetaSign};
use weilzeta_core::satake::SatakeError;
use weilzeta_core::verify::{gauss_milgram_checks_on, run_suite_on_module, Suite, SuiteReport};
use weilzeta_core::gauss;

const EXIT_PROPERTY_FAILURE: u8 = 1;
const EXIT_PARSE_ERROR: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(name = "weilzeta", version, about = "Exact discriminant-form and standard L-function computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Report the discriminant form of an even lattice: order, divisors,
    /// level, signature, anisotropy, Gauss sum and oddity.
    FqmInfo {
        /// JSON lattice file: {"gram": [[...]]}
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Run randomized invariant suites against a lattice.
    Verify {
        /// JSON lattice file: {"gram": [[...]]}
        file: PathBuf,
        /// weil-mult | satake-hom | theorem-5-7 | zeta-factor | all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Solve Satake parameters from an eigenvalue file and evaluate the
    /// standard L-function.
    Lfunction {
        /// JSON eigenvalue file: {"kappa": .., "gram": [[..]], "primes": {"3": [1, ..]}}
        file: PathBuf,
        /// Comma-separated evaluation points, e.g. "2.0,3.5,8+2i"
        #[arg(long, default_value = "4.0")]
        s: String,
        #[arg(long, default_value_t = 97)]
        pmax: u64,
        #[arg(long, default_value = "displayed")]
        zeta_sign: String,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("WEILZETA_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::FqmInfo { file, format } => cmd_fqm_info(&file, format),
        Command::Verify { file, suite, seed, format } => cmd_verify(&file, &suite, seed, format),
        Command::Lfunction { file, s, pmax, zeta_sign, format } => {
            cmd_lfunction(&file, &s, pmax, &zeta_sign, format)
        }
    }
}

fn parse_corruption(hook: &str) -> Option<(usize, BigRational)> {
    let (idx, frac) = hook.split_once(',')?;
    let idx: usize = idx.trim().parse().ok()?;
    let (num, den) = frac.split_once('/')?;
    let num: i64 = num.trim().parse().ok()?;
    let den: i64 = den.trim().parse().ok()?;
    Some((idx, BigRational::new(BigInt::from(num), BigInt::from(den))))
}

fn read_gram(path: &PathBuf) -> Result<GramMatrix, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_PARSE_ERROR
    })?;
    GramMatrix::from_json(&text).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE_ERROR
    })
}

fn fqm_exit(e: &FqmError) -> u8 {
    match e {
        FqmError::OddRank => EXIT_UNSUPPORTED,
        _ => EXIT_PARSE_ERROR,
    }
}

#[derive(Serialize)]
struct FqmReport {
    order: u64,
    elementary_divisors: Vec<u64>,
    level: u64,
    signature_mod_8: u8,
    anisotropic_at: BTreeMap<String, bool>,
    gauss_sum: String,
    gauss_sum_numeric: [f64; 2],
    oddity: u8,
}

fn cmd_fqm_info(file: &PathBuf, format: OutputFormat) -> ExitCode {
    let gram = match read_gram(file) {
        Ok(g) => g,
        Err(code) => return ExitCode::from(code),
    };
    let d = match FiniteQuadraticModule::from_gram(&gram) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(fqm_exit(&e));
        }
    };
    let sig = match gram.signature_mod8() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(fqm_exit(&e));
        }
    };
    let g1 = gauss::gauss_sum(&d, 1);
    let gv = g1.value().embed(53);
    let mut anisotropic = BTreeMap::new();
    for p in d.odd_primes() {
        let dp = d.p_part(p).expect("p divides the order");
        anisotropic.insert(p.to_string(), dp.is_anisotropic());
    }
    let report = FqmReport {
        order: d.order(),
        elementary_divisors: d.orders().to_vec(),
        level: d.level(),
        signature_mod_8: sig,
        anisotropic_at: anisotropic,
        gauss_sum: format!("{}", g1.value().canonicalize()),
        gauss_sum_numeric: [gv.re, gv.im],
        oddity: match gauss::oddity(&d) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_PARSE_ERROR);
            }
        },
    };
    match format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serialize"))
        }
        OutputFormat::Csv => {
            println!("field,value");
            println!("order,{}", report.order);
            println!(
                "elementary_divisors,{}",
                report
                    .elementary_divisors
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            println!("level,{}", report.level);
            println!("signature_mod_8,{}", report.signature_mod_8);
            for (p, a) in &report.anisotropic_at {
                println!("anisotropic_at_{p},{a}");
            }
            println!("gauss_sum,{}", report.gauss_sum);
            println!(
                "gauss_sum_numeric,{:.15e} {:.15e}",
                report.gauss_sum_numeric[0], report.gauss_sum_numeric[1]
            );
            println!("oddity,{}", report.oddity);
        }
    }
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct VerifyReport {
    suite: String,
    seed: u64,
    passed: bool,
    checks: Vec<VerifyCheck>,
}

#[derive(Serialize)]
struct VerifyCheck {
    name: String,
    passed: bool,
    detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<String>,
}

fn cmd_verify(file: &PathBuf, suite: &str, seed: u64, format: OutputFormat) -> ExitCode {
    let gram = match read_gram(file) {
        Ok(g) => g,
        Err(code) => return ExitCode::from(code),
    };
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE_ERROR);
        }
    };
    let mut module = match FiniteQuadraticModule::from_gram(&gram) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(fqm_exit(&e));
        }
    };
    // testing-only hook: WEILZETA_TEST_CORRUPT_Q="idx,num/den" perturbs one
    // q-value so the suites demonstrably catch bad data
    if let Ok(hook) = std::env::var("WEILZETA_TEST_CORRUPT_Q") {
        if let Some((idx, frac)) = parse_corruption(&hook) {
            log::warn!("test hook active: corrupting q at index {idx} by {frac}");
            module = module.with_corrupted_q(idx, &frac);
        }
    }
    let sig = match gram.signature_mod8() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(fqm_exit(&e));
        }
    };
    let mut reports: Vec<SuiteReport> = vec![SuiteReport {
        suite: "gauss-milgram".into(),
        seed,
        checks: gauss_milgram_checks_on(&module, sig),
    }];
    reports.extend(run_suite_on_module(&module, suite, seed));
    let mut all_passed = true;
    let serializable: Vec<VerifyReport> = reports
        .iter()
        .map(|r| {
            all_passed &= r.passed();
            VerifyReport {
                suite: r.suite.clone(),
                seed: r.seed,
                passed: r.passed(),
                checks: r
                    .checks
                    .iter()
                    .map(|c| VerifyCheck {
                        name: c.name.clone(),
                        passed: c.passed,
                        detail: c.detail.clone(),
                        counterexample: c.counterexample.clone(),
                    })
                    .collect(),
            }
        })
        .collect();
    match format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&serializable).expect("serialize"))
        }
        OutputFormat::Csv => {
            println!("suite,check,passed,detail");
            for r in &serializable {
                for c in &r.checks {
                    println!("{},{},{},{}", r.suite, c.name, c.passed, c.detail.replace(',', ";"));
                }
            }
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PROPERTY_FAILURE)
    }
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim().trim_end_matches('i');
    if text.trim().ends_with('i') {
        // forms: a+bi, a-bi, bi
        if let Some(pos) = t[1..].rfind(['+', '-']).map(|i| i + 1) {
            let re: f64 = t[..pos].parse().map_err(|_| format!("bad real part in {text}"))?;
            let im_str = &t[pos..];
            let im: f64 = if im_str == "+" || im_str == "-" {
                format!("{im_str}1").parse().unwrap()
            } else {
                im_str.parse().map_err(|_| format!("bad imaginary part in {text}"))?
            };
            Ok(Complex64::new(re, im))
        } else {
            let im: f64 = t.parse().map_err(|_| format!("bad imaginary value in {text}"))?;
            Ok(Complex64::new(0.0, im))
        }
    } else {
        let re: f64 = t.parse().map_err(|_| format!("bad value {text}"))?;
        Ok(Complex64::new(re, 0.0))
    }
}

#[derive(Serialize)]
struct PrimeReport {
    p: u64,
    bad_prime: bool,
    x1: [f64; 2],
    x2: [f64; 2],
    lambda_t1: f64,
    lambda_t02: f64,
    residual: f64,
    factor_numerator: Vec<[f64; 2]>,
    factor_denominator: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ValueReport {
    s: [f64; 2],
    euler_product: [f64; 2],
    zeta_path: [f64; 2],
    cross_check_residual: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct LfunctionReport {
    kappa: i64,
    level: u64,
    order: u64,
    zeta_sign: String,
    primes_used: Vec<u64>,
    warnings: Vec<String>,
    satake: Vec<PrimeReport>,
    values: Vec<ValueReport>,
}

fn lfun_exit(e: &LfunError) -> u8 {
    match e {
        LfunError::LevelNotSquarefree(_) => EXIT_UNSUPPORTED,
        LfunError::Fqm(inner) => fqm_exit(inner),
        LfunError::Satake(SatakeError::Degenerate(_)) => EXIT_DEGENERATE,
        LfunError::Satake(SatakeError::Inconsistent(_)) => EXIT_DEGENERATE,
        _ => EXIT_PARSE_ERROR,
    }
}

fn cmd_lfunction(
    file: &PathBuf,
    s_list: &str,
    pmax: u64,
    zeta_sign: &str,
    format: OutputFormat,
) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(EXIT_PARSE_ERROR);
        }
    };
    let table = match lfun::EigenvalueTable::from_json(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(lfun_exit(&e));
        }
    };
    let sign: ZetaSign = match zeta_sign.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE_ERROR);
        }
    };
    let points: Result<Vec<Complex64>, String> =
        s_list.split(',').map(parse_complex).collect();
    let points = match points {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE_ERROR);
        }
    };
    // warn about bad primes of the lattice that the file does not cover
    let mut warnings = Vec::new();
    for p in table.fqm.odd_primes() {
        if !table.primes.contains_key(&p) {
            let w = format!(
                "prime {p} divides |D| but is missing from the file; excluded from products"
            );
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let solved = match lfun::solve_all_primes(&table, pmax, sign) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(lfun_exit(&e));
        }
    };
    let satake: Vec<PrimeReport> = solved
        .iter()
        .map(|d| {
            let chi = d.solution.canonical();
            PrimeReport {
                p: d.p,
                bad_prime: d.bad,
                x1: [chi.x1.re, chi.x1.im],
                x2: [chi.x2.re, chi.x2.im],
                lambda_t1: d.lambda_t1.re,
                lambda_t02: d.lambda_t02.re,
                residual: d.solution.residual,
                factor_numerator: d.factor.num_coeffs.iter().map(|c| [c.re, c.im]).collect(),
                factor_denominator: d.factor.den_coeffs.iter().map(|c| [c.re, c.im]).collect(),
            }
        })
        .collect();
    let mut values = Vec::new();
    for s in &points {
        match lfun::global_l(&table, *s, pmax, sign) {
            Ok(v) => values.push(ValueReport {
                s: [s.re, s.im],
                euler_product: [v.euler_product.re, v.euler_product.im],
                zeta_path: [v.zeta_path.re, v.zeta_path.im],
                cross_check_residual: v.residual,
                tail_bound: v.tail_bound,
            }),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(lfun_exit(&e));
            }
        }
    }
    let report = LfunctionReport {
        kappa: table.kappa,
        level: table.fqm.level(),
        order: table.fqm.order(),
        zeta_sign: zeta_sign.to_string(),
        primes_used: solved.iter().map(|d| d.p).collect(),
        warnings,
        satake,
        values,
    };
    match format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serialize"))
        }
        OutputFormat::Csv => {
            println!("record,p_or_s,fields");
            for pr in &report.satake {
                println!(
                    "satake,{},x1={:.15e}{:+.15e}i x2={:.15e}{:+.15e}i residual={:.3e}",
                    pr.p, pr.x1[0], pr.x1[1], pr.x2[0], pr.x2[1], pr.residual
                );
            }
            for v in &report.values {
                println!(
                    "value,{}{:+}i,L={:.15e}{:+.15e}i zeta_path={:.15e}{:+.15e}i residual={:.3e}",
                    v.s[0], v.s[1], v.euler_product[0], v.euler_product[1], v.zeta_path[0],
                    v.zeta_path[1], v.cross_check_residual
                );
            }
        }
    }
    ExitCode::SUCCESS
}
