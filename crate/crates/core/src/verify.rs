//! Runnable invariant suites over a given lattice: the randomized Weil
//! multiplicativity checks, the Satake homomorphism checks, the series
//! identity, and the zeta factorization. Deterministic under a fixed
//! seed; failures carry a printable counterexample.

use std::fmt;
use std::sync::Arc;

use num::complex::Complex64;
use num::rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exact::rat;
use crate::fqm::{FiniteQuadraticModule, GramMatrix};
use crate::gauss;
use crate::heckelocal::{lambda_plus_upto, HeckeElement};
use crate::lfun::{self, ZetaSign};
use crate::satake::{satake_transform, BSeriesEngine, CharacterPair, RationalCharacter};
use crate::weil::{random_k0p, random_kp, LocalSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    WeilMult,
    SatakeHom,
    Theorem57,
    ZetaFactor,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weil-mult" => Ok(Suite::WeilMult),
            "satake-hom" => Ok(Suite::SatakeHom),
            "theorem-5-7" => Ok(Suite::Theorem57),
            "zeta-factor" => Ok(Suite::ZetaFactor),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite: {other}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub counterexample: Option<String>,
}

impl CheckResult {
    fn pass(name: &str, detail: impl Into<String>) -> Self {
        CheckResult { name: name.into(), passed: true, detail: detail.into(), counterexample: None }
    }

    fn fail(name: &str, detail: impl Into<String>, witness: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed: false,
            detail: detail.into(),
            counterexample: Some(witness.into()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} (seed {})", self.suite, self.seed)?;
        for c in &self.checks {
            writeln!(f, "  [{}] {} — {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail)?;
            if let Some(w) = &c.counterexample {
                writeln!(f, "        counterexample: {w}")?;
            }
        }
        Ok(())
    }
}

fn random_rational_char(rng: &mut ChaCha8Rng) -> RationalCharacter {
    CharacterPair::new(
        rat(rng.gen_range(1..8), rng.gen_range(1..4)),
        rat(rng.gen_range(1..8), rng.gen_range(1..4)),
    )
    .expect("nonzero")
}

/// Weil multiplicativity at every odd prime dividing |D|: random products,
/// the w-square relation, and the 𝒦_0(p) action on φ^(0).
pub fn weil_mult_suite(d: &FiniteQuadraticModule, seed: u64, pairs: usize) -> SuiteReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in d.odd_primes() {
        let space = match LocalSpace::new(d, p) {
            Ok(s) => Arc::new(s),
            Err(e) => {
                checks.push(CheckResult::fail(
                    &format!("local space at p={p}"),
                    "construction failed",
                    e.to_string(),
                ));
                continue;
            }
        };
        let mut ok = true;
        for i in 0..pairs {
            let x = random_kp(&space, &mut rng);
            let y = random_kp(&space, &mut rng);
            let lhs = space.omega_eval(&x).unwrap().mul(&space.omega_eval(&y).unwrap());
            let rhs = space.omega_eval(&space.kp_mul(&x, &y)).unwrap();
            if &lhs != rhs.as_ref() {
                checks.push(CheckResult::fail(
                    &format!("ω multiplicativity at p={p}"),
                    format!("failed at pair {i}"),
                    format!("x = {:?}, y = {:?}", x.mat, y.mat),
                ));
                ok = false;
                break;
            }
        }
        if ok {
            checks.push(CheckResult::pass(
                &format!("ω multiplicativity at p={p}"),
                format!("{pairs} random pairs exact"),
            ));
        }
        let w2 = space.omega_w().mul(&space.omega_w());
        let minus = space
            .omega_m(&rat(-1, 1), &rat(-1, 1), 1)
            .expect("central element");
        if w2 == minus {
            checks.push(CheckResult::pass(&format!("ω(w)² = ω(m(-1,-1)) at p={p}"), "exact"));
        } else {
            checks.push(CheckResult::fail(
                &format!("ω(w)² = ω(m(-1,-1)) at p={p}"),
                "mismatch",
                "w-square relation",
            ));
        }
        let mut chi_ok = true;
        for i in 0..100 {
            let k = random_k0p(&space, &mut rng);
            let op = space.omega_eval(&k).unwrap().normalized();
            let a_res = crate::modp::reduce_mod_pk(&k.mat[0], p, 1);
            let chi = crate::modp::jacobi(a_res as i64, space.radicand().max(1));
            let expect =
                crate::exact::Cyclotomic::from_int(chi as i64, space.conductor());
            let col_ok = op.entry(0, 0) == &expect
                && (1..space.dim()).all(|nu| op.entry(nu, 0).is_zero());
            if !col_ok {
                checks.push(CheckResult::fail(
                    &format!("𝒦₀(p) action on φ⁰ at p={p}"),
                    format!("failed at element {i}"),
                    format!("{:?}", k.mat),
                ));
                chi_ok = false;
                break;
            }
        }
        if chi_ok {
            checks.push(CheckResult::pass(
                &format!("𝒦₀(p) action on φ⁰ at p={p}"),
                "χ_{D_p}(a)-action on 100 random elements",
            ));
        }
    }
    if checks.is_empty() {
        checks.push(CheckResult::pass("weil-mult", "no odd primes divide |D|; nothing to check"));
    }
    SuiteReport { suite: "weil-mult".into(), seed, checks }
}

/// χ̂(A∗B) = χ̂(A)·χ̂(B) for generator pairs, at the bad primes of D and
/// at a good reference prime.
pub fn satake_hom_suite(d: &FiniteQuadraticModule, seed: u64, max_degree: u32) -> SuiteReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut primes = d.odd_primes();
    primes.push(good_reference_prime(d));
    for p in primes {
        let space = Arc::new(LocalSpace::new(d, p).expect("odd prime"));
        let gens: Vec<HeckeElement> = lambda_plus_upto(max_degree)
            .iter()
            .map(|idx| HeckeElement::generator(&space, idx.k, idx.l).unwrap())
            .collect();
        let chars: Vec<RationalCharacter> =
            (0..5).map(|_| random_rational_char(&mut rng)).collect();
        let mut failures = Vec::new();
        for a in &gens {
            for b in &gens {
                let prod = a.convolve(b).unwrap();
                let ta = satake_transform(a).unwrap();
                let tb = satake_transform(b).unwrap();
                let tp = satake_transform(&prod).unwrap();
                for chi in &chars {
                    let lhs = crate::satake::char_hat(chi, &tp).unwrap();
                    let rhs = crate::satake::char_hat(chi, &ta).unwrap()
                        * &crate::satake::char_hat(chi, &tb).unwrap();
                    if lhs != rhs {
                        failures.push(format!(
                            "A = {:?}, B = {:?}, χ = ({}, {})",
                            a.support_keys(),
                            b.support_keys(),
                            chi.x1,
                            chi.x2
                        ));
                    }
                }
            }
        }
        if failures.is_empty() {
            checks.push(CheckResult::pass(
                &format!("satake homomorphism at p={p}"),
                format!("all generator pairs with k+l ≤ {max_degree}, 5 random characters"),
            ));
        } else {
            checks.push(CheckResult::fail(
                &format!("satake homomorphism at p={p}"),
                format!("{} failures", failures.len()),
                failures[0].clone(),
            ));
        }
    }
    SuiteReport { suite: "satake-hom".into(), seed, checks }
}

fn good_reference_prime(d: &FiniteQuadraticModule) -> u64 {
    let mut p = 3;
    while d.order() % p == 0 {
        p = crate::lfun::next_prime_pub(p);
    }
    p
}

/// The series identity: b_series(χ) equals the rational expansion, at the
/// bad primes and a good reference prime.
pub fn theorem_5_7_suite(
    d: &FiniteQuadraticModule,
    seed: u64,
    n_max: u32,
    characters: usize,
) -> SuiteReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut primes = d.odd_primes();
    primes.push(good_reference_prime(d));
    for p in primes {
        let space = Arc::new(LocalSpace::new(d, p).expect("odd prime"));
        let engine = match BSeriesEngine::new(&space, n_max) {
            Ok(e) => e,
            Err(e) => {
                checks.push(CheckResult::fail(
                    &format!("series identity at p={p}"),
                    "engine construction failed",
                    e.to_string(),
                ));
                continue;
            }
        };
        let mut failure = None;
        for _ in 0..characters {
            let chi = random_rational_char(&mut rng);
            let lhs = engine.b_series(&chi, n_max).unwrap();
            let rhs = crate::satake::rational_expansion(&chi, n_max).unwrap();
            if lhs != rhs {
                failure = Some(format!("χ = ({}, {})", chi.x1, chi.x2));
                break;
            }
        }
        match failure {
            None => checks.push(CheckResult::pass(
                &format!("series identity at p={p}"),
                format!("{characters} random characters through X^{n_max}"),
            )),
            Some(w) => checks.push(CheckResult::fail(
                &format!("series identity at p={p}"),
                "b_series ≠ rational expansion",
                w,
            )),
        }
    }
    SuiteReport { suite: "theorem-5-7".into(), seed, checks }
}

/// Zeta factorization on random rational eigenvalue data, both sign
/// conventions.
pub fn zeta_factor_suite(d: &FiniteQuadraticModule, seed: u64) -> SuiteReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in [3u64, 5, 7] {
        for kappa in [4i64, 6] {
            for sign in [ZetaSign::Displayed, ZetaSign::Corollary] {
                let lams: Vec<BigRational> = std::iter::once(rat(1, 1))
                    .chain((0..5).map(|_| rat(rng.gen_range(-9i64..9), rng.gen_range(1..4))))
                    .collect();
                let lhs = lfun::cal_zp_series(d, p, &lams, kappa, sign, 10).unwrap();
                let rhs = lfun::cal_zp_factored(d, p, &lams, kappa, sign, 10).unwrap();
                if lhs == rhs {
                    checks.push(CheckResult::pass(
                        &format!("zeta factorization p={p} κ={kappa} {sign:?}"),
                        "exact through order 10",
                    ));
                } else {
                    checks.push(CheckResult::fail(
                        &format!("zeta factorization p={p} κ={kappa} {sign:?}"),
                        "series mismatch",
                        format!("λ = {lams:?}"),
                    ));
                }
            }
        }
    }
    SuiteReport { suite: "zeta-factor".into(), seed, checks }
}

/// Gauss/Milgram spot checks used by the info command and the acceptance
/// suite: conjugation/quotient identities plus the numeric Milgram consistency.
pub fn gauss_milgram_checks(gram: &GramMatrix) -> Result<Vec<CheckResult>, crate::fqm::FqmError> {
    let d = FiniteQuadraticModule::from_gram(gram)?;
    Ok(gauss_milgram_checks_on(&d, gram.signature_mod8()?))
}

/// Same checks against an already-built module (so a deliberately
/// corrupted q-table can be fed in by the test hook).
pub fn gauss_milgram_checks_on(d: &FiniteQuadraticModule, sig: u8) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let n = d.level().max(1);
    let mut conj_ok = true;
    for dd in 1..=n as i64 {
        if gauss::gauss_sum(&d, -dd).value() != &gauss::gauss_sum(&d, dd).value().conj() {
            conj_ok = false;
        }
    }
    checks.push(if conj_ok {
        CheckResult::pass("conjugation g_{-d} = conj(g_d)", format!("all d ≤ {n}"))
    } else {
        CheckResult::fail("conjugation g_{-d} = conj(g_d)", "mismatch", "see level range")
    });
    let g = gauss::gauss_sum(&d, 1);
    let lhs = g.normalized().embed(53);
    let rhs = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * sig as f64 / 8.0);
    checks.push(if (lhs - rhs).norm() < 1e-10 {
        CheckResult::pass("Milgram g(D)/√|D| = e(sig/8)", format!("sig ≡ {sig} (mod 8)"))
    } else {
        CheckResult::fail(
            "Milgram g(D)/√|D| = e(sig/8)",
            format!("got {lhs}, expected {rhs}"),
            format!("|D| = {}", d.order()),
        )
    });
    checks
}

pub fn run_suite(gram: &GramMatrix, suite: Suite, seed: u64) -> Result<Vec<SuiteReport>, crate::fqm::FqmError> {
    let d = FiniteQuadraticModule::from_gram(gram)?;
    Ok(run_suite_on_module(&d, suite, seed))
}

/// Run a suite against an already-built module.
pub fn run_suite_on_module(d: &FiniteQuadraticModule, suite: Suite, seed: u64) -> Vec<SuiteReport> {
    let mut reports = Vec::new();
    match suite {
        Suite::WeilMult => reports.push(weil_mult_suite(d, seed, 60)),
        Suite::SatakeHom => reports.push(satake_hom_suite(d, seed, 4)),
        Suite::Theorem57 => reports.push(theorem_5_7_suite(d, seed, 8, 5)),
        Suite::ZetaFactor => reports.push(zeta_factor_suite(d, seed)),
        Suite::All => {
            reports.push(weil_mult_suite(d, seed, 60));
            reports.push(satake_hom_suite(d, seed, 4));
            reports.push(theorem_5_7_suite(d, seed, 8, 5));
            reports.push(zeta_factor_suite(d, seed));
        }
    }
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> GramMatrix {
        GramMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn suites_pass_on_a2() {
        for suite in [Suite::WeilMult, Suite::SatakeHom, Suite::Theorem57, Suite::ZetaFactor] {
            let reports = run_suite(&a2(), suite, 7).unwrap();
            for r in &reports {
                assert!(r.passed(), "{r}");
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = run_suite(&a2(), Suite::WeilMult, 42).unwrap();
        let b = run_suite(&a2(), Suite::WeilMult, 42).unwrap();
        assert_eq!(format!("{}", a[0]), format!("{}", b[0]));
    }

    #[test]
    fn sabotage_is_detected() {
        // corrupt one q-value and re-run the Milgram check: must fail
        let d = FiniteQuadraticModule::from_gram(&a2()).unwrap();
        let bad = d.with_corrupted_q(1, &crate::exact::rat(1, 3));
        let g = gauss::gauss_sum(&bad, 1);
        let lhs = g.normalized().embed(53);
        let sig = a2().signature_mod8().unwrap();
        let rhs = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * sig as f64 / 8.0);
        assert!((lhs - rhs).norm() > 1e-3, "corruption must be visible");
    }
}
