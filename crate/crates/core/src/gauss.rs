//! Gauss sums g_d(D) = Σ_{λ∈D} e(d·q(λ)), the quadratic characters
//! χ_D(n) = g_n(D)/g(D), and the oddity invariant of the 2-part.
//!
//! χ_D is always computed as the exact cyclotomic quotient; the Legendre
//! symbol shortcut for odd |D| is used by tests as an oracle, never as the
//! implementation.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;
use thiserror::Error;

use crate::exact::{lcm_u32, Cyclotomic, SqrtScalar};
use crate::fqm::FiniteQuadraticModule;

#[derive(Debug, Error, PartialEq)]
pub enum GaussError {
    #[error("character argument {0} is not coprime to the level {1}")]
    NotCoprime(u64, u64),
    #[error("gauss sum quotient did not reduce: |g(D)|^2 != |D|")]
    DegenerateSum,
    #[error("no eighth root of unity matches the normalized 2-part sum")]
    OddityUnresolved,
}

/// Exact Gauss sum together with the order of the module it came from,
/// so the normalized value g/√|D| can be formed in the half-power channel.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussSumValue {
    value: Cyclotomic,
    order: u64,
}

impl GaussSumValue {
    pub fn value(&self) -> &Cyclotomic {
        &self.value
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// g / √|D| as an exact scalar with the root kept in the radical channel.
    pub fn normalized(&self) -> SqrtScalar {
        SqrtScalar::from_scaled(self.value.clone(), self.order, 1)
    }
}

/// Conductor large enough for all phases e(d·q(λ)) and the eighth roots
/// appearing in quotient formulas.
pub fn phase_conductor(d: &FiniteQuadraticModule) -> u32 {
    lcm_u32(8, d.level() as u32)
}

/// g_d(D) = Σ_{λ∈D} e(d·q(λ)), exactly.
pub fn gauss_sum(d: &FiniteQuadraticModule, dd: i64) -> GaussSumValue {
    let m = phase_conductor(d);
    let mut acc = Cyclotomic::zero(m);
    let scale = BigRational::from(BigInt::from(dd));
    for idx in 0..d.num_elements() {
        let phase = d.q(idx) * &scale;
        acc = acc.add(&Cyclotomic::from_phase(&phase, m));
    }
    GaussSumValue { value: acc, order: d.order() }
}

/// χ_D(n) = g_n(D)/g(D) for gcd(n, N) = 1, as an exact cyclotomic
/// (an eighth root of unity times ±1; a plain ±1 when |D| is odd).
pub fn chi_d(d: &FiniteQuadraticModule, n: i64) -> Result<Cyclotomic, GaussError> {
    let level = d.level().max(1);
    let nn = n.rem_euclid(level as i64) as u64;
    if gcd(nn % level, level) != 1 {
        return Err(GaussError::NotCoprime(nn, level));
    }
    let g1 = gauss_sum(d, 1);
    let gn = gauss_sum(d, n);
    // g_n / g = g_n · conj(g) / |D|, using g·conj(g) = |D|
    let norm = g1.value.mul(&g1.value.conj());
    let expected = Cyclotomic::from_int(d.order() as i64, norm.conductor());
    if norm != expected {
        return Err(GaussError::DegenerateSum);
    }
    let quotient = gn
        .value
        .mul(&g1.value.conj())
        .scale(&BigRational::new(BigInt::one(), BigInt::from(d.order())));
    Ok(quotient.canonicalize())
}

/// Oddity of D: 0 for odd |D|, otherwise the residue t mod 8 with
/// g(D_2)/√|D_2| = e(t/8).
pub fn oddity(d: &FiniteQuadraticModule) -> Result<u8, GaussError> {
    if d.order() % 2 != 0 {
        return Ok(0);
    }
    let d2 = d.sylow(2).expect("even order has a 2-part");
    let g = gauss_sum(&d2, 1);
    let normalized = g.normalized();
    // identify t numerically, then verify g² = |D_2|·e(t/4) exactly
    let val = normalized.embed(53);
    for t in 0u8..8 {
        let target = Cyclotomic::root_of_unity(t as i64, 8);
        if (val - target.embed(53)).norm() < 1e-6 {
            let lhs = g.value().mul(g.value());
            let rhs = Cyclotomic::root_of_unity(t as i64, 4)
                .scale(&BigRational::from(BigInt::from(d2.order())));
            if lhs == rhs {
                return Ok(t);
            }
        }
    }
    Err(GaussError::OddityUnresolved)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
