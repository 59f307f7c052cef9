//! Satake transforms and their consequences: algebra homomorphisms χ̂
//! attached to unramified characters, B-series, the closed rational
//! expression they equal, κ_p, and Satake-parameter solving.
//!
//! The transform is 𝒮(T)(m) = δ(m)^{1/2} Σ_{n ∈ N(ℚ_p)/N(ℤ_p)} T(mn),
//! restricted to the line spanned by φ^(0); entries are exact. The B-series
//! carries the companion normalization p^{-(k+l)/2} on the slot (k,l)
//! (the s → s + 1/2 shift of the ν-family), which is what makes
//!   B(χ, X) = (1 + x1x2X²) / ((1 - x1²X²)(1 - x2²X²))
//! hold on the nose; see the series tests.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::exact::{ExactError, FormalSeries, Scalar, SqrtScalar};
use crate::heckelocal::{cartan_decompose, lambda_plus_upto, HeckeElement, HeckeError};
use crate::weil::{LocalSpace, WeilError};

#[derive(Debug, Error)]
pub enum SatakeError {
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    Weil(#[from] WeilError),
    #[error("satake table entry at ({0}, {1}) is not rational")]
    IrrationalEntry(i64, i64),
    #[error("satake table is not Weyl symmetric at ({0}, {1})")]
    NotWeylSymmetric(i64, i64),
    #[error("the transform at a bad prime requires an anisotropic D_p")]
    NotAnisotropic,
    #[error("unramified character values must be nonzero")]
    ZeroCharacter,
    #[error("κ_p requires p dividing |D|")]
    GoodPrime,
    #[error("degenerate eigenvalue data: {0}")]
    Degenerate(String),
    #[error("no consistent Satake parameters within tolerance (residual {0})")]
    Inconsistent(f64),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Pair of unramified character values (χ1(p), χ2(p)).
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterPair<S: Scalar> {
    pub x1: S,
    pub x2: S,
}

pub type RationalCharacter = CharacterPair<BigRational>;
pub type ComplexCharacter = CharacterPair<Complex64>;

impl<S: Scalar> CharacterPair<S> {
    pub fn new(x1: S, x2: S) -> Result<Self, SatakeError> {
        if x1.is_zero() || x2.is_zero() {
            return Err(SatakeError::ZeroCharacter);
        }
        Ok(CharacterPair { x1, x2 })
    }

    pub fn swapped(&self) -> Self {
        CharacterPair { x1: self.x2.clone(), x2: self.x1.clone() }
    }

    /// χ(m(p^r, p^s)) = x1^r · x2^s.
    pub fn value_at(&self, r: i64, s: i64) -> Option<S> {
        Some(scalar_pow(&self.x1, r)?.mul_ref(&scalar_pow(&self.x2, s)?))
    }
}

trait MulRef {
    fn mul_ref(&self, o: &Self) -> Self;
}
impl<S: Scalar> MulRef for S {
    fn mul_ref(&self, o: &Self) -> Self {
        self.clone() * o
    }
}

fn scalar_pow<S: Scalar>(x: &S, e: i64) -> Option<S> {
    if e < 0 {
        let inv = x.inv_opt()?;
        return scalar_pow(&inv, -e);
    }
    let mut acc = S::one();
    for _ in 0..e {
        acc = acc * x;
    }
    Some(acc)
}

/// ⟨𝒮(T)(m(p^r, p^s)) φ^(0), φ^(0)⟩ for the finitely many nonzero cells.
#[derive(Clone, Debug)]
pub struct SatakeTable {
    p: u64,
    entries: BTreeMap<(i64, i64), SqrtScalar>,
}

impl SatakeTable {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(i64, i64), &SqrtScalar)> {
        self.entries.iter()
    }

    pub fn get(&self, r: i64, s: i64) -> Option<&SqrtScalar> {
        self.entries.get(&(r, s))
    }

    /// Exact rational entries; errors on any irrational survivor.
    pub fn rational_entries(&self) -> Result<BTreeMap<(i64, i64), BigRational>, SatakeError> {
        let mut out = BTreeMap::new();
        for ((r, s), v) in &self.entries {
            let q = v.to_rational().map_err(|_| SatakeError::IrrationalEntry(*r, *s))?;
            if !q.is_zero() {
                out.insert((*r, *s), q);
            }
        }
        Ok(out)
    }
}

/// The Satake transform of a finitely supported Hecke element, in the
/// straightened (spherical) channel: each unipotent translate m·n(b) is
/// classified by its Cartan type and contributes the φ^(0)-matrix
/// coefficient of the slot value. At good primes this is literally
/// δ^{1/2}·Σ_b ⟨T(mn(b))φ^(0), φ^(0)⟩; at bad primes the I_χ
/// straightening removes the ω-twist on the φ^(0)-line (without it the
/// diagonal cells cancel identically and no spherical theory survives).
/// Requires an anisotropic D_p when p divides |D|.
///
/// The coset count per (cell, slot) has a closed form, which this primary
/// path uses; `satake_transform_enumerated` walks the b-cosets through
/// `cartan_decompose` one by one and serves as the independent oracle.
pub fn satake_transform(t: &HeckeElement) -> Result<SatakeTable, SatakeError> {
    satake_transform_impl(t, false)
}

/// Term-by-term reference route: enumerate representatives b = c/p^m of
/// N(ℚ_p)/N(ℤ_p) and classify every translate with `cartan_decompose`.
/// Exactly equal to `satake_transform`; kept as the brute-force oracle.
pub fn satake_transform_enumerated(t: &HeckeElement) -> Result<SatakeTable, SatakeError> {
    satake_transform_impl(t, true)
}

fn satake_transform_impl(t: &HeckeElement, enumerated: bool) -> Result<SatakeTable, SatakeError> {
    let space = t.space().clone();
    if space.dim() > 1 && !space.module().is_anisotropic() {
        return Err(SatakeError::NotAnisotropic);
    }
    let p = space.p();
    let support = t.support_keys();
    if support.is_empty() {
        return Ok(SatakeTable { p, entries: BTreeMap::new() });
    }
    let k_min = support.iter().map(|&(k, _)| k).min().unwrap();
    let degrees: std::collections::BTreeSet<u32> =
        support.iter().map(|&(k, l)| k + l).collect();
    let mut cells: Vec<(u32, u32)> = Vec::new();
    for &total in &degrees {
        for r in k_min..=(total - k_min) {
            cells.push((r, total - r));
        }
    }
    let mut coefficients: BTreeMap<(u32, u32), SqrtScalar> = BTreeMap::new();
    for (slot, value) in t.support() {
        coefficients.insert(*slot, value.entry(0, 0));
    }
    let results: Result<Vec<((i64, i64), SqrtScalar)>, SatakeError> = cells
        .par_iter()
        .map(|&(r, s)| {
            let v = if enumerated {
                transform_cell_enumerated(&space, &coefficients, r, s, k_min)?
            } else {
                transform_cell_counted(&space, &coefficients, r, s)
            };
            Ok(((r as i64, s as i64), v))
        })
        .collect();
    let mut entries = BTreeMap::new();
    for (key, v) in results? {
        if !v.is_zero() {
            entries.insert(key, v);
        }
    }
    Ok(SatakeTable { p, entries })
}

/// Number of representatives b of N(ℚ_p)/N(ℤ_p) for which
/// m(p^r, p^s)·n(b) has elementary-divisor content p^k:
///   b = 0 contributes iff min(r,s) = k; b = c/p^m (c a unit) forces
///   m ≤ r and content min(r, s, r-m).
fn coset_count(p: u64, r: u32, s: u32, k: u32) -> u64 {
    if k > r.min(s) {
        return 0;
    }
    let base = if r.min(s) == k { 1 } else { 0 };
    let extra = if r == k {
        0
    } else if s == k {
        p.pow(r - k) - 1 // every m in [1, r-k]
    } else {
        let t = r - k;
        p.pow(t) - p.pow(t - 1) // only m = r-k, c a unit mod p^{r-k}
    };
    base + extra
}

fn transform_cell_counted(
    space: &Arc<LocalSpace>,
    coefficients: &BTreeMap<(u32, u32), SqrtScalar>,
    r: u32,
    s: u32,
) -> SqrtScalar {
    let p = space.p();
    let mut acc = SqrtScalar::zero(space.conductor(), space.radicand());
    for ((k, l), coeff) in coefficients {
        if k + l != r + s {
            continue;
        }
        let n = coset_count(p, r, s, *k);
        if n == 0 {
            continue;
        }
        acc.add_assign(&coeff.scale_rational(&BigRational::from(BigInt::from(n))));
    }
    let half = ((s as i64) - (r as i64)) / 2;
    let delta = BigRational::from(BigInt::from(p)).pow(half as i32);
    acc.scale_rational(&delta)
}

fn transform_cell_enumerated(
    space: &Arc<LocalSpace>,
    coefficients: &BTreeMap<(u32, u32), SqrtScalar>,
    r: u32,
    s: u32,
    k_min: u32,
) -> Result<SqrtScalar, SatakeError> {
    let p = space.p();
    let mut acc = SqrtScalar::zero(space.conductor(), space.radicand());
    // b = 0 and b = c/p^m with c a unit mod p^m; terms vanish once the
    // content drops below the support, bounding m ≤ r - k_min.
    let mut bs: Vec<(u32, u64)> = vec![(0, 0)];
    for m in 1..=r.saturating_sub(k_min) {
        let pm = p.pow(m);
        for c in 1..pm {
            if c % p != 0 {
                bs.push((m, c));
            }
        }
    }
    let pr = BigRational::from(BigInt::from(p)).pow(r as i32);
    let ps = BigRational::from(BigInt::from(p)).pow(s as i32);
    for (m, c) in bs {
        // g = m(p^r, p^s)·n(c/p^m) = [[p^r, c·p^{r-m}], [0, p^s]]
        let upper = BigRational::from(BigInt::from(c))
            * BigRational::from(BigInt::from(p)).pow((r - m) as i32);
        let g = [pr.clone(), upper, BigRational::zero(), ps.clone()];
        let form = cartan_decompose(space, &g)?;
        debug_assert!(form.k >= 0);
        if let Some(coeff) = coefficients.get(&(form.k as u32, form.l as u32)) {
            acc.add_assign(coeff);
        }
    }
    let half = ((s as i64) - (r as i64)) / 2;
    let delta = BigRational::from(BigInt::from(p)).pow(half as i32);
    Ok(acc.scale_rational(&delta))
}

/// χ̂(T) = Σ_{(r,s)} ⟨𝒮(T)(m(p^r,p^s))φ^(0), φ^(0)⟩ · χ(m(p^r,p^s)).
pub fn char_hat<S: Scalar>(
    chi: &CharacterPair<S>,
    table: &SatakeTable,
) -> Result<S, SatakeError> {
    let rational = table.rational_entries()?;
    let mut acc = S::zero();
    for ((r, s), v) in &rational {
        let term = chi.value_at(*r, *s).ok_or(SatakeError::ZeroCharacter)?;
        acc = acc + &(S::from_rational(v) * &term);
    }
    Ok(acc)
}

/// Satake tables for all generators with k + l ≤ n_max, computed once and
/// reused across characters.
pub struct BSeriesEngine {
    space: Arc<LocalSpace>,
    n_max: u32,
    tables: BTreeMap<(u32, u32), SatakeTable>,
}

impl BSeriesEngine {
    pub fn new(space: &Arc<LocalSpace>, n_max: u32) -> Result<Self, SatakeError> {
        let mut tables = BTreeMap::new();
        for idx in lambda_plus_upto(n_max) {
            let gen = HeckeElement::generator(space, idx.k, idx.l)?;
            tables.insert((idx.k, idx.l), satake_transform(&gen)?);
        }
        Ok(BSeriesEngine { space: space.clone(), n_max, tables })
    }

    pub fn space(&self) -> &Arc<LocalSpace> {
        &self.space
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn table(&self, k: u32, l: u32) -> Option<&SatakeTable> {
        self.tables.get(&(k, l))
    }

    /// χ̂(T_{k,l}) for one generator slot.
    pub fn char_hat_at<S: Scalar>(
        &self,
        chi: &CharacterPair<S>,
        k: u32,
        l: u32,
    ) -> Result<S, SatakeError> {
        char_hat(chi, &self.tables[&(k, l)])
    }

    /// B(χ, X) = Σ_{(k,l) ∈ Λ₊} χ̂(T_{k,l}) p^{-(k+l)/2} X^{k+l}.
    pub fn b_series<S: Scalar>(
        &self,
        chi: &CharacterPair<S>,
        n_max: u32,
    ) -> Result<FormalSeries<S>, SatakeError> {
        assert!(n_max <= self.n_max, "engine was built with a smaller bound");
        let p = self.space.p();
        let mut series: FormalSeries<S> = FormalSeries::zero(n_max as usize);
        for idx in lambda_plus_upto(n_max) {
            let v = self.char_hat_at(chi, idx.k, idx.l)?;
            let norm = BigRational::from(BigInt::from(p))
                .pow((idx.degree() / 2) as i32)
                .recip();
            let deg = idx.degree() as usize;
            let updated = series.coeff(deg).clone() + &(v * &S::from_rational(&norm));
            series.set_coeff(deg, updated);
        }
        Ok(series)
    }

    /// Weyl symmetry of the induced tables: entry (r,s) equals entry (s,r)
    /// for every generator slot.
    pub fn check_weyl_symmetry(&self) -> Result<(), SatakeError> {
        for table in self.tables.values() {
            let rational = table.rational_entries()?;
            for ((r, s), v) in &rational {
                let mirror = rational.get(&(*s, *r)).cloned().unwrap_or_else(BigRational::zero);
                if *v != mirror {
                    return Err(SatakeError::NotWeylSymmetric(*r, *s));
                }
            }
        }
        Ok(())
    }
}

/// Taylor expansion of (1 + x1x2·X²) / ((1 - x1²X²)(1 - x2²X²)).
pub fn rational_expansion<S: Scalar>(
    chi: &CharacterPair<S>,
    n_max: u32,
) -> Result<FormalSeries<S>, SatakeError> {
    if chi.x1.is_zero() || chi.x2.is_zero() {
        return Err(SatakeError::ZeroCharacter);
    }
    let n = n_max as usize;
    let mut numer = FormalSeries::zero(n);
    numer.set_coeff(0, S::one());
    if n >= 2 {
        numer.set_coeff(2, chi.x1.clone() * &chi.x2);
    }
    let mut d1 = FormalSeries::zero(n);
    d1.set_coeff(0, S::one());
    if n >= 2 {
        d1.set_coeff(2, -(chi.x1.clone() * &chi.x1));
    }
    let mut d2 = FormalSeries::zero(n);
    d2.set_coeff(0, S::one());
    if n >= 2 {
        d2.set_coeff(2, -(chi.x2.clone() * &chi.x2));
    }
    let den = d1.mul(&d2).expect("same order");
    Ok(numer.div(&den).expect("unit constant term"))
}

/// Torus-sum identity: the full Λ-sum Σ_{(k,l) ∈ Λ} χ(m(p^k,p^l)) X^{k+l}
/// (no ordering constraint) equals the rational expansion. Exact check
/// through X^{n_max}.
pub fn lambda_sum_identity_check<S: Scalar>(
    chi: &CharacterPair<S>,
    n_max: u32,
) -> Result<bool, SatakeError> {
    let n = n_max as usize;
    let mut lhs: FormalSeries<S> = FormalSeries::zero(n);
    for k in 0..=n_max {
        for l in 0..=n_max {
            if (k + l) % 2 != 0 || k + l > n_max {
                continue;
            }
            let term = chi
                .value_at(k as i64, l as i64)
                .ok_or(SatakeError::ZeroCharacter)?;
            let deg = (k + l) as usize;
            let updated = lhs.coeff(deg).clone() + &term;
            lhs.set_coeff(deg, updated);
        }
    }
    let rhs = rational_expansion(chi, n_max)?;
    Ok(lhs == rhs)
}

/// κ_p = (|D_p|·p / γ_p(D_p)² + 1) · μ(𝒦_0(p)) with μ(𝒦_0(p)) = 1/(p+1).
pub fn kappa_p(space: &LocalSpace) -> Result<BigRational, SatakeError> {
    if space.dim() == 1 {
        return Err(SatakeError::GoodPrime);
    }
    let gamma2 = space
        .weil_index()
        .mul(space.weil_index())
        .to_rational()
        .expect("γ² is ±1 at odd primes");
    let dp_p = BigRational::from(BigInt::from(space.radicand() * space.p()));
    let mu = BigRational::new(BigInt::one(), BigInt::from(space.p() + 1));
    Ok((dp_p / gamma2 + BigRational::one()) * mu)
}

/// Polynomial forms of χ̂(T_1) and χ̂(T_{0,2}) derived from the transform
/// at runtime, used to solve for Satake parameters.
pub struct SatakeSolver {
    p: u64,
    t1_coeff: BigRational,          // coefficient of x1·x2 in χ̂(T_1)
    t02_edge: BigRational,          // coefficient of x1² (= of x2²) in χ̂(T_{0,2})
    t02_mid: BigRational,           // coefficient of x1·x2 in χ̂(T_{0,2})
}

/// A solved Weyl orbit {(x1,x2), (x2,x1)}, canonically ordered, plus the
/// round-trip residual of the defining equations.
#[derive(Clone, Debug)]
pub struct SatakeSolution {
    pub orbit: [ComplexCharacter; 2],
    pub residual: f64,
}

impl SatakeSolution {
    /// Canonical representative: |x1| ≥ |x2|, ties broken by argument.
    pub fn canonical(&self) -> &ComplexCharacter {
        &self.orbit[0]
    }
}

pub const SOLVE_TOLERANCE: f64 = 1e-9;

impl SatakeSolver {
    pub fn new(space: &Arc<LocalSpace>) -> Result<Self, SatakeError> {
        let t1 = HeckeElement::generator(space, 1, 1)?;
        let t02 = HeckeElement::generator(space, 0, 2)?;
        let table1 = satake_transform(&t1)?.rational_entries()?;
        let table02 = satake_transform(&t02)?.rational_entries()?;
        let t1_coeff = table1.get(&(1, 1)).cloned().unwrap_or_else(BigRational::zero);
        if t1_coeff.is_zero() || table1.len() != 1 {
            return Err(SatakeError::Degenerate("unexpected T_1 table shape".into()));
        }
        let edge_left = table02.get(&(2, 0)).cloned().unwrap_or_else(BigRational::zero);
        let edge_right = table02.get(&(0, 2)).cloned().unwrap_or_else(BigRational::zero);
        if edge_left != edge_right || edge_left.is_zero() {
            return Err(SatakeError::NotWeylSymmetric(0, 2));
        }
        let t02_mid = table02.get(&(1, 1)).cloned().unwrap_or_else(BigRational::zero);
        Ok(SatakeSolver { p: space.p(), t1_coeff, t02_edge: edge_left, t02_mid })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Solve χ̂(T_1) = λ1, χ̂(T_{0,2}) = λ2 for the Weyl orbit of (x1, x2).
    pub fn solve(&self, lambda1: Complex64, lambda2: Complex64) -> Result<SatakeSolution, SatakeError> {
        let scale = lambda1.norm().max(lambda2.norm()).max(1.0);
        if lambda1.norm() < 1e-12 * scale {
            return Err(SatakeError::Degenerate(
                "λ(T_1) = 0: the central product x1·x2 is not invertible".into(),
            ));
        }
        let t1c = self.t1_coeff.to_f64().unwrap();
        let edge = self.t02_edge.to_f64().unwrap();
        let mid = self.t02_mid.to_f64().unwrap();
        let c = lambda1 / t1c; // x1·x2
        let e = (lambda2 - mid * c) / edge; // x1² + x2²
        let disc = (e * e - 4.0 * c * c).sqrt();
        // pick the larger root additively, recover the smaller one through
        // the product r1·r2 = c² (avoids cancellation when |r2| << |r1|)
        let cand1 = (e + disc) / 2.0;
        let cand2 = (e - disc) / 2.0;
        let r1 = if cand1.norm() >= cand2.norm() { cand1 } else { cand2 };
        let x1 = r1.sqrt();
        let (x1, x2) = if x1.norm() < 1e-300 {
            return Err(SatakeError::Degenerate("both Satake parameters vanish".into()));
        } else {
            (x1, c / x1)
        };
        let chi = order_pair(x1, x2);
        let solution = SatakeSolution {
            orbit: [chi.clone(), chi.swapped()],
            residual: self.residual(&chi, lambda1, lambda2),
        };
        if solution.residual > SOLVE_TOLERANCE {
            return Err(SatakeError::Inconsistent(solution.residual));
        }
        Ok(solution)
    }

    /// Relative residual of the two defining equations.
    pub fn residual(&self, chi: &ComplexCharacter, lambda1: Complex64, lambda2: Complex64) -> f64 {
        let t1c = self.t1_coeff.to_f64().unwrap();
        let edge = self.t02_edge.to_f64().unwrap();
        let mid = self.t02_mid.to_f64().unwrap();
        let pred1 = t1c * chi.x1 * chi.x2;
        let pred2 = edge * (chi.x1 * chi.x1 + chi.x2 * chi.x2) + mid * chi.x1 * chi.x2;
        let scale = lambda1.norm().max(lambda2.norm()).max(1.0);
        ((pred1 - lambda1).norm() + (pred2 - lambda2).norm()) / scale
    }
}

fn order_pair(x1: Complex64, x2: Complex64) -> ComplexCharacter {
    let swap = match x1.norm().partial_cmp(&x2.norm()) {
        Some(std::cmp::Ordering::Less) => true,
        Some(std::cmp::Ordering::Greater) => false,
        _ => x1.arg() < x2.arg(),
    };
    if swap {
        ComplexCharacter { x1: x2, x2: x1 }
    } else {
        ComplexCharacter { x1, x2 }
    }
}
