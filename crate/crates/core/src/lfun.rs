//! Standard zeta and L-functions: eigenvalue tables, the eigenvalue
//! normalization adapter, local zeta series and their factorization,
//! Dirichlet L-values with analytic continuation, local L-factors from
//! Satake parameters, and the two-path global evaluation.
//!
//! Two sign conventions are implemented for the multiplier relating
//! λ(m(p^{-k}, p^{-l})) to λ(m(p^{l-k}, 1)): `Displayed` uses
//! p^{-l(κ-2)}·χ_{D(p)}(p^l) (the factorization
//! Z_p(s+κ-2)·L_p(χ_{D(p)}, 2s+κ-2) then holds verbatim); `Corollary`
//! uses p^{+l(κ-2)}·χ_{D(p)}(p^l) (the direct eigenvalue-relation form;
//! the analogous factorization holds with κ-2 negated).
//! The two differ by the sign of the exponent l(κ-2); both are exposed
//! and the default is `Displayed`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{FormalSeries, Scalar};
use crate::fqm::{FiniteQuadraticModule, FqmError, GramMatrix};
use crate::gauss::{self, GaussError};
use crate::heckelocal::HeckeError;
use crate::satake::{
    BSeriesEngine, CharacterPair, ComplexCharacter, SatakeError, SatakeSolution, SatakeSolver,
};
use crate::weil::{LocalSpace, WeilError};

#[derive(Debug, Error)]
pub enum LfunError {
    #[error(transparent)]
    Fqm(#[from] FqmError),
    #[error(transparent)]
    Gauss(#[from] GaussError),
    #[error(transparent)]
    Weil(#[from] WeilError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    Satake(#[from] SatakeError),
    #[error("malformed eigenvalue input: {0}")]
    BadInput(String),
    #[error("level {0} is not squarefree; the zeta pipeline requires a squarefree level")]
    LevelNotSquarefree(u64),
    #[error("eigenvalue at n = 0 must be 1 (identity Hecke operator), got {0}")]
    BadUnitEigenvalue(f64),
    #[error("divisibility violated: {0}")]
    BadEigrelArguments(String),
    #[error("requested power p^{0} exceeds the table depth {1}")]
    OutOfRange(u32, usize),
    #[error("Dirichlet L has a pole at s = 1 for the principal character")]
    PoleAtOne,
    #[error("no data for prime {0} in the eigenvalue table")]
    MissingPrime(u64),
}

/// Sign convention for the κ-dependent multiplier in the local zeta
/// expansion; see the module docs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZetaSign {
    Displayed,
    Corollary,
}

impl Default for ZetaSign {
    fn default() -> Self {
        ZetaSign::Displayed
    }
}

impl std::str::FromStr for ZetaSign {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "displayed" => Ok(ZetaSign::Displayed),
            "corollary" => Ok(ZetaSign::Corollary),
            other => Err(format!("unknown zeta sign convention: {other}")),
        }
    }
}

#[derive(Deserialize)]
struct EigenvalueFile {
    kappa: i64,
    gram: Vec<Vec<i64>>,
    primes: BTreeMap<String, Vec<f64>>,
}

/// Per-prime eigenvalue lists λ_f(m(p^{2n}, 1)), n = 0..n_max, together
/// with the weight and the lattice they belong to.
#[derive(Clone, Debug)]
pub struct EigenvalueTable {
    pub kappa: i64,
    pub gram: GramMatrix,
    pub fqm: FiniteQuadraticModule,
    pub primes: BTreeMap<u64, Vec<f64>>,
}

fn is_squarefree(mut n: u64) -> bool {
    let mut p = 2;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        while n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

impl EigenvalueTable {
    pub fn new(
        kappa: i64,
        gram: GramMatrix,
        primes: BTreeMap<u64, Vec<f64>>,
    ) -> Result<Self, LfunError> {
        let fqm = FiniteQuadraticModule::from_gram(&gram)?;
        if !is_squarefree(fqm.level().max(1)) {
            return Err(LfunError::LevelNotSquarefree(fqm.level()));
        }
        for (p, lams) in &primes {
            if lams.is_empty() {
                return Err(LfunError::BadInput(format!("empty eigenvalue list at p = {p}")));
            }
            if (lams[0] - 1.0).abs() > 1e-12 {
                return Err(LfunError::BadUnitEigenvalue(lams[0]));
            }
        }
        let sig = gram.signature_mod8()? as i64;
        if (2 * kappa - sig).rem_euclid(2) != 0 {
            log::warn!("weight parity: 2κ ≢ sig(L) (mod 2) for κ = {kappa}, sig = {sig}");
        }
        if (2 * kappa + sig).rem_euclid(4) != 0 {
            log::warn!(
                "continuation hypotheses: 2κ + sig(L) ≢ 0 (mod 4) for κ = {kappa}, sig = {sig}"
            );
        }
        Ok(EigenvalueTable { kappa, gram, fqm, primes })
    }

    /// Parse the JSON format {"kappa": .., "gram": [[..]], "primes": {"3": [1, ..]}}.
    pub fn from_json(text: &str) -> Result<Self, LfunError> {
        let file: EigenvalueFile =
            serde_json::from_str(text).map_err(|e| LfunError::BadInput(e.to_string()))?;
        let gram = GramMatrix::new(file.gram)?;
        let mut primes = BTreeMap::new();
        for (k, v) in file.primes {
            let p: u64 = k
                .parse()
                .map_err(|_| LfunError::BadInput(format!("bad prime key: {k}")))?;
            primes.insert(p, v);
        }
        Self::new(file.kappa, gram, primes)
    }

    pub fn lambda(&self, p: u64, n: usize) -> Result<f64, LfunError> {
        let lams = self.primes.get(&p).ok_or(LfunError::MissingPrime(p))?;
        lams.get(n).copied().ok_or(LfunError::OutOfRange(n as u32, lams.len()))
    }

    pub fn depth(&self, p: u64) -> usize {
        self.primes.get(&p).map(|v| v.len()).unwrap_or(0)
    }
}

/// Exact multipliers of the eigenvalue relations for integer arguments
/// K | L with L/K a perfect square:
///   λ(m(L, K))        = K^{κ-2} · (g_K(D(K))/g(D(K)))   · λ(m(L/K, 1))
///   λ(m(K^{-1},L^{-1})) = L^{κ-2} · (g(D(L))/g_L(D(L))) · λ(m(L/K, 1))
/// Returned as exact rationals (the Gauss quotients are ±1 on the
/// odd-order complements that occur here).
pub fn scalar_hecke_eigrel(
    kk: u64,
    ll: u64,
    kappa: i64,
    d: &FiniteQuadraticModule,
) -> Result<(BigRational, BigRational), LfunError> {
    if kk == 0 || ll % kk != 0 {
        return Err(LfunError::BadEigrelArguments(format!("{kk} does not divide {ll}")));
    }
    let quot = ll / kk;
    let root = (quot as f64).sqrt().round() as u64;
    if root * root != quot {
        return Err(LfunError::BadEigrelArguments(format!("{ll}/{kk} is not a perfect square")));
    }
    let dk = d.complement_part(kk);
    let dl = d.complement_part(ll);
    let chi_k = gauss::chi_d(&dk, kk as i64)?
        .to_rational()
        .ok_or_else(|| LfunError::BadInput("gauss quotient not rational".into()))?;
    let chi_l = gauss::chi_d(&dl, ll as i64)?
        .to_rational()
        .ok_or_else(|| LfunError::BadInput("gauss quotient not rational".into()))?;
    // χ is quadratic, so g_k/g = g/g_k = χ(k)
    let pow = |base: u64, e: i64| -> BigRational {
        BigRational::from(BigInt::from(base)).pow(e as i32)
    };
    let m_lk = pow(kk, kappa - 2) * &chi_k;
    let m_inv = pow(ll, kappa - 2) * &chi_l;
    Ok((m_lk, m_inv))
}

/// The multiplier relating λ(m(p^{-k}, p^{-l})) to λ_f(m(p^{l-k}, 1)) in
/// the chosen sign convention, as an exact rational.
pub fn zeta_multiplier(
    d: &FiniteQuadraticModule,
    p: u64,
    l: u32,
    kappa: i64,
    sign: ZetaSign,
) -> Result<BigRational, LfunError> {
    let pl = BigInt::from(p).pow(l);
    let dl = d.complement_part(p);
    let pl_u = pl
        .to_u64()
        .ok_or_else(|| LfunError::BadInput("p^l overflows the supported range".into()))?;
    let chi = gauss::chi_d(&dl, pl_u as i64)?
        .to_rational()
        .ok_or_else(|| LfunError::BadInput("gauss quotient not rational".into()))?;
    let exp = (l as i64) * (kappa - 2);
    let sign_exp = match sign {
        ZetaSign::Displayed => -exp,
        ZetaSign::Corollary => exp,
    };
    Ok(BigRational::from(BigInt::from(p)).pow(sign_exp as i32) * chi)
}

/// λ_{F,p}(T_{k,l}) = p^{(k+l)(κ/2-1)} · multiplier(k,l) · λ_f(m(p^{l-k},1)).
pub fn adapter_lambda_f(
    table: &EigenvalueTable,
    p: u64,
    k: u32,
    l: u32,
    sign: ZetaSign,
) -> Result<Complex64, LfunError> {
    assert!(k <= l && (k + l) % 2 == 0, "(k,l) must lie in Λ₊");
    let n = ((l - k) / 2) as usize;
    let lam = table.lambda(p, n)?;
    let mult = zeta_multiplier(&table.fqm, p, l, table.kappa, sign)?;
    // p^{(k+l)(κ/2-1)} = p^{(k+l)(κ-2)/2}, an integer power since k+l is even
    let e = ((k + l) as i64) * (table.kappa - 2) / 2;
    let scale = BigRational::from(BigInt::from(p)).pow(e as i32);
    Ok(Complex64::new((scale * mult).to_f64().unwrap() * lam, 0.0))
}

/// Z_p(s, f) = Σ_n λ_f(m(p^{2n}, 1)) · Y^n with Y = p^{-2s}: a transcription
/// of the table column.
pub fn zp_series<S: Scalar>(lams: &[S]) -> FormalSeries<S> {
    FormalSeries::from_coeffs(lams.to_vec())
}

/// 𝒵_p(s, f) = Σ_{(k,l) ∈ Λ₊} multiplier(k,l)·λ_f(m(p^{l-k},1))·X^{k+l}
/// with X = p^{-s}; generic over the scalar so the factorization identity
/// can be tested exactly on rational data.
pub fn cal_zp_series<S: Scalar>(
    d: &FiniteQuadraticModule,
    p: u64,
    lams: &[S],
    kappa: i64,
    sign: ZetaSign,
    n_max: u32,
) -> Result<FormalSeries<S>, LfunError> {
    let mut out: FormalSeries<S> = FormalSeries::zero(n_max as usize);
    for k in 0..=(n_max / 2) {
        for l in k..=n_max.saturating_sub(k) {
            if (k + l) % 2 != 0 || k + l > n_max {
                continue;
            }
            let n = ((l - k) / 2) as usize;
            if n >= lams.len() {
                continue;
            }
            let mult = zeta_multiplier(d, p, l, kappa, sign)?;
            let term = lams[n].clone() * &S::from_rational(&mult);
            let deg = (k + l) as usize;
            let updated = out.coeff(deg).clone() + &term;
            out.set_coeff(deg, updated);
        }
    }
    Ok(out)
}

/// The factorization partner of `cal_zp_series`:
/// Z_p(s ± (κ-2))·(1 - χ_{D(p)}(p)·p^{∓(κ-2)}X²)^{-1} as a series in X.
pub fn cal_zp_factored<S: Scalar>(
    d: &FiniteQuadraticModule,
    p: u64,
    lams: &[S],
    kappa: i64,
    sign: ZetaSign,
    n_max: u32,
) -> Result<FormalSeries<S>, LfunError> {
    let dl = d.complement_part(p);
    let chi = gauss::chi_d(&dl, p as i64)?
        .to_rational()
        .ok_or_else(|| LfunError::BadInput("gauss quotient not rational".into()))?;
    let shift = match sign {
        ZetaSign::Displayed => -(kappa - 2),
        ZetaSign::Corollary => kappa - 2,
    };
    let n = n_max as usize;
    // Z_p(s ∓ (κ-2)): coefficient λ_n · p^{2n·shift} at X^{2n}
    let mut z: FormalSeries<S> = FormalSeries::zero(n);
    for (i, lam) in lams.iter().enumerate() {
        if 2 * i > n {
            break;
        }
        let w = BigRational::from(BigInt::from(p)).pow((2 * shift * i as i64) as i32);
        z.set_coeff(2 * i, lam.clone() * &S::from_rational(&w));
    }
    // geometric factor (1 - χ(p)·p^{shift}·X²)^{-1}
    let mut geom: FormalSeries<S> = FormalSeries::zero(n);
    let ratio = BigRational::from(BigInt::from(p)).pow(shift as i32) * &chi;
    let mut acc = BigRational::one();
    for i in (0..=n).step_by(2) {
        geom.set_coeff(i, S::from_rational(&acc));
        acc *= &ratio;
    }
    Ok(z.mul(&geom).expect("same order"))
}

// ---------------------------------------------------------------------------
// Dirichlet L-functions
// ---------------------------------------------------------------------------

/// Character values χ_D(r) for r mod N, extended by zero, computed once
/// from the exact Gauss-sum quotient.
pub struct DirichletChar {
    pub modulus: u64,
    values: Vec<Complex64>,
    pub principal: bool,
}

impl DirichletChar {
    pub fn from_module(d: &FiniteQuadraticModule) -> Result<Self, LfunError> {
        let n = d.level().max(1);
        let mut values = vec![Complex64::new(0.0, 0.0); n as usize];
        let mut principal = true;
        for r in 0..n {
            if gcd(r, n) != 1 {
                continue;
            }
            let chi = gauss::chi_d(d, r as i64)?;
            let v = chi.embed(53);
            values[r as usize] = v;
            if (v - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                principal = false;
            }
        }
        Ok(DirichletChar { modulus: n, values, principal })
    }

    pub fn value(&self, n: u64) -> Complex64 {
        self.values[(n % self.modulus) as usize]
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

const BERNOULLI: [(f64, f64); 8] = [
    // (B_{2j}, (2j)!)
    (1.0 / 6.0, 2.0),
    (-1.0 / 30.0, 24.0),
    (1.0 / 42.0, 720.0),
    (-1.0 / 30.0, 40320.0),
    (5.0 / 66.0, 3628800.0),
    (-691.0 / 2730.0, 479001600.0),
    (7.0 / 6.0, 87178291200.0),
    (-3617.0 / 510.0, 20922789888000.0),
];

/// Hurwitz zeta ζ(s, a) by Euler–Maclaurin of order 8 with an
/// |s|-adaptive shift; valid for all s ≠ 1, a > 0.
pub fn hurwitz_zeta_em(s: Complex64, a: f64) -> Complex64 {
    assert!(a > 0.0);
    let m = (12.0 + 1.5 * s.norm()).ceil().max(12.0) as usize;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..m {
        sum += (-s * Complex64::new(n as f64 + a, 0.0).ln()).exp();
    }
    let x = m as f64 + a;
    let lx = Complex64::new(x, 0.0).ln();
    // tail: x^{1-s}/(s-1) + x^{-s}/2 + Σ B_{2j}/(2j)!·(s)_{2j-1}·x^{-s-2j+1}
    sum += ((Complex64::new(1.0, 0.0) - s) * lx).exp() / (s - 1.0);
    sum += 0.5 * (-s * lx).exp();
    let mut poch = s; // (s)_1
    for (j, (b2j, fact)) in BERNOULLI.iter().enumerate() {
        let k = 2 * (j + 1);
        // x^{-s-2j+1} term with Pochhammer (s)_{2j-1} = s(s+1)...(s+2j-2)
        let power = ((-s - Complex64::new((k - 1) as f64, 0.0)) * lx).exp();
        sum += *b2j / *fact * poch * power;
        // extend Pochhammer to (s)_{2j+1}
        poch *= (s + Complex64::new((k - 1) as f64, 0.0)) * (s + Complex64::new(k as f64, 0.0));
    }
    sum
}

/// Hurwitz zeta by Hermite's integral formula, an independent oracle:
/// ζ(s,a) = a^{-s}/2 + a^{1-s}/(s-1) + 2∫_0^∞ sin(s·atan(t/a)) /
/// ((a²+t²)^{s/2}(e^{2πt}-1)) dt, evaluated by panelled Gauss–Legendre.
pub fn hurwitz_zeta_hermite(s: Complex64, a: f64) -> Complex64 {
    assert!(a > 0.0);
    let la = Complex64::new(a, 0.0).ln();
    let out = 0.5 * (-s * la).exp() + ((1.0 - s) * la).exp() / (s - 1.0);
    // 16-point Gauss-Legendre nodes/weights on [-1, 1]
    const NODES: [f64; 8] = [
        0.09501250983763744,
        0.28160355077925891,
        0.45801677765722739,
        0.61787624440264375,
        0.75540440835500303,
        0.86563120238783174,
        0.94457502307323258,
        0.98940093499164993,
    ];
    const WEIGHTS: [f64; 8] = [
        0.18945061045506850,
        0.18260341504492359,
        0.16915651939500254,
        0.14959598881657673,
        0.12462897125553387,
        0.09515851168249278,
        0.06225352393864789,
        0.02715245941175409,
    ];
    let mut integral = Complex64::new(0.0, 0.0);
    let panels = 90usize;
    let width = 0.15f64;
    for panel in 0..panels {
        let lo = panel as f64 * width;
        let hi = lo + width;
        let mid = (lo + hi) / 2.0;
        let half = (hi - lo) / 2.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..8 {
            for sign in [-1.0f64, 1.0] {
                let t = mid + sign * half * NODES[i];
                let integrand = if t < 1e-12 {
                    // limit t→0: s/(2π a^{s+1})·… handled by the next node
                    s * (-(s + 1.0) * la).exp() / (2.0 * std::f64::consts::PI)
                } else {
                    let theta = (t / a).atan();
                    let r2 = a * a + t * t;
                    let denom = (2.0 * std::f64::consts::PI * t).exp_m1();
                    (s * theta).sin() / ((s / 2.0 * r2.ln()).exp() * denom)
                };
                acc += WEIGHTS[i] * integrand;
            }
        }
        integral += acc * half;
        if (2.0 * std::f64::consts::PI * hi) > 80.0 {
            break;
        }
    }
    out + 2.0 * integral
}

/// L(s, χ_D) via the Hurwitz decomposition L(s,χ) = N^{-s} Σ_r χ(r) ζ(s, r/N),
/// analytically continued by Euler–Maclaurin. Errors at the pole s = 1 of a
/// principal character.
pub fn dirichlet_l(d: &FiniteQuadraticModule, s: Complex64) -> Result<Complex64, LfunError> {
    let chi = DirichletChar::from_module(d)?;
    dirichlet_l_char(&chi, s, hurwitz_zeta_em)
}

/// Same value through the Hermite-integral oracle; an independent route
/// used for cross-checking the continuation.
pub fn dirichlet_l_oracle(d: &FiniteQuadraticModule, s: Complex64) -> Result<Complex64, LfunError> {
    let chi = DirichletChar::from_module(d)?;
    dirichlet_l_char(&chi, s, hurwitz_zeta_hermite)
}

fn dirichlet_l_char(
    chi: &DirichletChar,
    s: Complex64,
    hz: impl Fn(Complex64, f64) -> Complex64,
) -> Result<Complex64, LfunError> {
    if chi.principal && (s - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
        return Err(LfunError::PoleAtOne);
    }
    let n = chi.modulus;
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 1..=n {
        let c = chi.value(r % n.max(1));
        if c.norm() == 0.0 {
            continue;
        }
        acc += c * hz(s, r as f64 / n as f64);
    }
    let ln_n = Complex64::new(n as f64, 0.0).ln();
    Ok((-s * ln_n).exp() * acc)
}

/// Direct convergent summation Σ χ(n) n^{-s} for Re(s) > 1.5; a third,
/// elementary oracle used on pinned values.
pub fn dirichlet_l_direct(d: &FiniteQuadraticModule, s: Complex64, terms: usize) -> Result<Complex64, LfunError> {
    let chi = DirichletChar::from_module(d)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=terms {
        let c = chi.value(n as u64);
        if c.norm() == 0.0 {
            continue;
        }
        acc += c * (-s * Complex64::new(n as f64, 0.0).ln()).exp();
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Local and global L-functions
// ---------------------------------------------------------------------------

/// Local standard L-factor: numerator (1, 0, x1x2), denominator
/// (1 - x1²Y)(1 - x2²Y) in Y = p^{-2s}, stored as coefficient lists.
#[derive(Clone, Debug)]
pub struct LocalLFactor {
    pub p: u64,
    pub x1: Complex64,
    pub x2: Complex64,
    pub num_coeffs: [Complex64; 3],
    pub den_coeffs: [Complex64; 3],
}

impl LocalLFactor {
    pub fn new(x1: Complex64, x2: Complex64, p: u64) -> Result<Self, LfunError> {
        if (x1 * x2).norm() == 0.0 {
            return Err(LfunError::BadInput("zero Satake parameter".into()));
        }
        let s1 = x1 * x1;
        let s2 = x2 * x2;
        Ok(LocalLFactor {
            p,
            x1,
            x2,
            num_coeffs: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), x1 * x2],
            den_coeffs: [Complex64::new(1.0, 0.0), -(s1 + s2), s1 * s2],
        })
    }

    /// Evaluate the rational function at a given value of Y (= X²).
    pub fn eval_at_y(&self, y: Complex64) -> Complex64 {
        let horner = |c: &[Complex64; 3]| c[0] + y * (c[1] + y * c[2]);
        // numerator is 1 + x1x2·Y in Y = X²: coefficients (1, x1x2) against Y
        let num = self.num_coeffs[0] + y * self.num_coeffs[2];
        num / horner(&self.den_coeffs)
    }

    /// L_p(s, F) in the convention of the zeta/eigenvalue pipeline: the
    /// series identity B(χ, X) with X = p^{-s} shifts the effective
    /// variable to Y = p^{1-2s} (the classical parameters are √p·x_i).
    pub fn eval_shifted(&self, s: Complex64) -> Complex64 {
        let y = ((1.0 - 2.0 * s) * Complex64::new(self.p as f64, 0.0).ln()).exp();
        self.eval_at_y(y)
    }

    /// Literal evaluation at Y = p^{-2s}.
    pub fn eval_literal(&self, s: Complex64) -> Complex64 {
        let y = ((-2.0) * s * Complex64::new(self.p as f64, 0.0).ln()).exp();
        self.eval_at_y(y)
    }

    /// Truncated series expansion in X (Y = X²) for comparison with the
    /// B-series.
    pub fn series(&self, n_max: u32) -> FormalSeries<Complex64> {
        let n = n_max as usize;
        let mut num: FormalSeries<Complex64> = FormalSeries::zero(n);
        num.set_coeff(0, Complex64::new(1.0, 0.0));
        if n >= 2 {
            num.set_coeff(2, self.num_coeffs[2]);
        }
        let mut den: FormalSeries<Complex64> = FormalSeries::zero(n);
        den.set_coeff(0, Complex64::new(1.0, 0.0));
        if n >= 2 {
            den.set_coeff(2, self.den_coeffs[1]);
        }
        if n >= 4 {
            den.set_coeff(4, self.den_coeffs[2]);
        }
        num.div(&den).expect("unit constant term")
    }
}

/// Solved data at one prime.
#[derive(Clone, Debug)]
pub struct PrimeData {
    pub p: u64,
    pub bad: bool,
    pub solution: SatakeSolution,
    pub factor: LocalLFactor,
    pub lambda_t1: Complex64,
    pub lambda_t02: Complex64,
}

/// Result of the two-path global evaluation at one point.
#[derive(Clone, Debug)]
pub struct GlobalLValue {
    pub s: Complex64,
    pub euler_product: Complex64,
    pub zeta_path: Complex64,
    pub residual: f64,
    pub tail_bound: f64,
    pub primes_used: Vec<u64>,
}

/// Solve Satake parameters at every prime of the table (up to p_max).
pub fn solve_all_primes(
    table: &EigenvalueTable,
    p_max: u64,
    sign: ZetaSign,
) -> Result<Vec<PrimeData>, LfunError> {
    let mut out = Vec::new();
    for (&p, _) in table.primes.iter() {
        if p > p_max {
            continue;
        }
        let space = Arc::new(LocalSpace::new(&table.fqm, p)?);
        let solver = SatakeSolver::new(&space)?;
        let l1 = adapter_lambda_f(table, p, 1, 1, sign)?;
        let l2 = adapter_lambda_f(table, p, 0, 2, sign)?;
        let solution = solver.solve(l1, l2)?;
        let chi = solution.canonical();
        let factor = LocalLFactor::new(chi.x1, chi.x2, p)?;
        out.push(PrimeData {
            p,
            bad: table.fqm.order() % p == 0,
            solution,
            factor,
            lambda_t1: l1,
            lambda_t02: l2,
        });
    }
    Ok(out)
}

/// Evaluate L(s, F) as the Euler product over the solved primes and
/// cross-check against the zeta path 𝒵(s - κ/2 + 1, f) assembled from the
/// eigenvalue table; both paths use the same prime set.
pub fn global_l(
    table: &EigenvalueTable,
    s: Complex64,
    p_max: u64,
    sign: ZetaSign,
) -> Result<GlobalLValue, LfunError> {
    let solved = solve_all_primes(table, p_max, sign)?;
    if solved.is_empty() {
        return Err(LfunError::BadInput("no primes available".into()));
    }
    let mut euler = Complex64::new(1.0, 0.0);
    let mut zeta = Complex64::new(1.0, 0.0);
    let sigma = s - Complex64::new(table.kappa as f64 / 2.0 - 1.0, 0.0);
    for data in &solved {
        euler *= data.factor.eval_shifted(s);
        // zeta path: truncated 𝒵_p(σ) from the table
        let lams: Vec<Complex64> = table.primes[&data.p]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let depth = 2 * (lams.len() as u32 - 1) + 8;
        let series = cal_zp_series(&table.fqm, data.p, &lams, table.kappa, sign, depth)?;
        let x = (-sigma * Complex64::new(data.p as f64, 0.0).ln()).exp();
        zeta *= series.eval(&x);
    }
    let residual = (euler - zeta).norm() / euler.norm().max(1e-300);
    // crude tail bound for the omitted primes, assuming unitary parameters
    let re = s.re;
    let tail_bound = if re > 1.0 {
        let mut t = 0.0;
        let mut q = next_prime(p_max);
        for _ in 0..64 {
            t += 4.0 * (q as f64).powf(1.0 - 2.0 * re);
            q = next_prime(q);
        }
        t
    } else {
        f64::INFINITY
    };
    log::info!(
        "global L at s = {s}: product over {} primes, tail bound {tail_bound:.3e}",
        solved.len()
    );
    Ok(GlobalLValue {
        s,
        euler_product: euler,
        zeta_path: zeta,
        residual,
        tail_bound,
        primes_used: solved.iter().map(|d| d.p).collect(),
    })
}

/// Smallest prime strictly greater than n.
pub fn next_prime_pub(n: u64) -> u64 {
    next_prime(n)
}

fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    loop {
        let mut is_p = c > 1;
        let mut d = 2;
        while d * d <= c {
            if c % d == 0 {
                is_p = false;
                break;
            }
            d += 1;
        }
        if is_p {
            return c;
        }
        c += 1;
    }
}

/// Meromorphic-continuation smoke test: evaluate the assembled formula
///   Π_{p | |D|} L_p(2s+κ-2, χ_{D(p)}) · L(2s+κ-2, χ_D) · Z(s+κ-2, f)
/// with the Dirichlet factor analytically continued and Z as the finite
/// truncated Dirichlet polynomial of the table. Succeeds (finitely) at
/// points with 2s+κ-2 < 1.
pub fn zeta_continuation_value(
    table: &EigenvalueTable,
    s: Complex64,
) -> Result<Complex64, LfunError> {
    let kappa = table.kappa as f64;
    let arg_l = 2.0 * s + Complex64::new(kappa - 2.0, 0.0);
    let arg_z = s + Complex64::new(kappa - 2.0, 0.0);
    let mut value = dirichlet_l(&table.fqm, arg_l)?;
    for &p in table.fqm.odd_primes().iter() {
        // L_p(s', χ_{D(p)}) = (1 - χ_{D(p)}(p) p^{-s'})^{-1}
        let dl = table.fqm.complement_part(p);
        let chi = gauss::chi_d(&dl, p as i64)?.embed(53);
        let pterm = Complex64::new(1.0, 0.0)
            - chi * (-arg_l * Complex64::new(p as f64, 0.0).ln()).exp();
        value /= pterm;
    }
    // truncated Z(s+κ-2, f): finite double sum over smooth d
    let mut z = Complex64::new(1.0, 0.0);
    for (&p, lams) in table.primes.iter() {
        let mut zp = Complex64::new(0.0, 0.0);
        for (n, &lam) in lams.iter().enumerate() {
            zp += lam * (-2.0 * arg_z * (n as f64) * Complex64::new(p as f64, 0.0).ln()).exp();
        }
        z *= zp;
    }
    Ok(value * z)
}

/// Synthetic eigenvalue tables: draw a unitary character pair at each
/// prime with the central value pinned to χ_{D(p)}(p) (the compatibility
/// relation fixes λ(T_1) to that sign, so only such characters arise from
/// actual eigenvalue data), then invert the adapter to recover the
/// λ_f(m(p^{2n}, 1)) column.
pub fn synthesize_table(
    gram: &GramMatrix,
    kappa: i64,
    angles: &BTreeMap<u64, f64>,
    n_max: usize,
    sign: ZetaSign,
) -> Result<(EigenvalueTable, BTreeMap<u64, ComplexCharacter>), LfunError> {
    let fqm = FiniteQuadraticModule::from_gram(gram)?;
    let mut primes = BTreeMap::new();
    let mut chars = BTreeMap::new();
    for (&p, &theta) in angles {
        let dl = fqm.complement_part(p);
        let eps = gauss::chi_d(&dl, p as i64)?
            .to_rational()
            .ok_or_else(|| LfunError::BadInput("gauss quotient not rational".into()))?
            .to_f64()
            .unwrap();
        let x1 = Complex64::from_polar(1.0, theta);
        let x2 = eps * x1.conj();
        let chi = CharacterPair::new(x1, x2).map_err(LfunError::Satake)?;
        let space = Arc::new(LocalSpace::new(&fqm, p)?);
        let engine = BSeriesEngine::new(&space, 2 * n_max as u32)?;
        let mut lams = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let a = engine.char_hat_at(&chi, 0, 2 * n as u32)?;
            // invert the adapter at (k,l) = (0, 2n)
            let mult = zeta_multiplier(&fqm, p, 2 * n as u32, kappa, sign)?;
            let e = (2 * n as i64) * (kappa - 2) / 2;
            let scale = BigRational::from(BigInt::from(p)).pow(e as i32) * mult;
            let lam = a / scale.to_f64().unwrap();
            debug_assert!(
                lam.im.abs() <= 1e-9 * lam.norm().max(1.0),
                "synthetic eigenvalues must be real"
            );
            lams.push(lam.re);
        }
        primes.insert(p, lams);
        chars.insert(p, chi);
    }
    let table = EigenvalueTable::new(kappa, gram.clone(), primes)?;
    Ok((table, chars))
}
