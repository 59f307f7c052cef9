//! Exact elements of cyclotomic fields ℚ(ζ_M).
//!
//! An element is a sparse rational combination of powers ζ_M^k. Arithmetic
//! is lazy; canonicalization reduces against the relations
//! Σ_{j=0}^{p-1} ζ^{k + jM/p} = 0 (one per prime p | M), which puts the
//! support into the tensor-product power basis of dimension φ(M). Two
//! elements are equal iff their canonical forms agree after lifting to a
//! common conductor.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{Integer, One, Zero};

use super::dd::{cos_sin_2pi, Dd};
use super::ExactError;

/// Element of ℚ(ζ_M), ζ_M = e(1/M).
#[derive(Clone)]
pub struct Cyclotomic {
    conductor: u32,
    /// exponent -> coefficient, exponents in [0, M)
    coeffs: BTreeMap<u32, BigRational>,
}

fn prime_factors(mut n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl Cyclotomic {
    pub fn zero(conductor: u32) -> Self {
        assert!(conductor >= 1);
        Cyclotomic { conductor, coeffs: BTreeMap::new() }
    }

    pub fn one(conductor: u32) -> Self {
        Self::from_rational(BigRational::one(), conductor)
    }

    pub fn from_rational(r: BigRational, conductor: u32) -> Self {
        let mut c = Self::zero(conductor);
        if !r.is_zero() {
            c.coeffs.insert(0, r);
        }
        c
    }

    pub fn from_int(n: i64, conductor: u32) -> Self {
        Self::from_rational(BigRational::from(BigInt::from(n)), conductor)
    }

    /// ζ_M^a = e(a/M), for any integer a.
    pub fn root_of_unity(a: i64, m: u32) -> Self {
        assert!(m >= 1, "conductor must be positive");
        let k = a.rem_euclid(m as i64) as u32;
        let mut c = Self::zero(m);
        c.coeffs.insert(k, BigRational::one());
        c
    }

    /// e(x) for a rational x; the conductor is the denominator of x (times
    /// the requested minimum).
    pub fn from_phase(x: &BigRational, min_conductor: u32) -> Self {
        let den = x.denom().to_u64_digits().1;
        let d: u32 = if den.is_empty() { 1 } else { den[0] as u32 };
        let m = lcm_u32(d, min_conductor.max(1));
        let num = (x * BigRational::from(BigInt::from(m))).to_integer();
        let k = num.mod_floor(&BigInt::from(m));
        Self::root_of_unity(i64::try_from(k).unwrap(), m)
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    /// Re-express in ℚ(ζ_{m2}); requires conductor | m2.
    pub fn lift(&self, m2: u32) -> Self {
        assert!(m2 % self.conductor == 0, "lift target must be a multiple");
        let f = m2 / self.conductor;
        let coeffs = self.coeffs.iter().map(|(k, v)| (k * f, v.clone())).collect();
        Cyclotomic { conductor: m2, coeffs }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.conductor == b.conductor {
            (a.clone(), b.clone())
        } else {
            let m = lcm_u32(a.conductor, b.conductor);
            (a.lift(m), b.lift(m))
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = Self::common(self, other);
        for (k, v) in b.coeffs {
            let e = a.coeffs.entry(k).or_insert_with(BigRational::zero);
            *e += v;
            if e.is_zero() {
                a.coeffs.remove(&k);
            }
        }
        a
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, v)| (*k, -v.clone())).collect();
        Cyclotomic { conductor: self.conductor, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let m = a.conductor;
        let mut coeffs: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (k1, v1) in &a.coeffs {
            for (k2, v2) in &b.coeffs {
                let k = (k1 + k2) % m;
                let e = coeffs.entry(k).or_insert_with(BigRational::zero);
                *e += v1 * v2;
            }
        }
        coeffs.retain(|_, v| !v.is_zero());
        Cyclotomic { conductor: m, coeffs }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero(self.conductor);
        }
        let coeffs = self.coeffs.iter().map(|(k, v)| (*k, v * r)).collect();
        Cyclotomic { conductor: self.conductor, coeffs }
    }

    /// Galois automorphism ζ ↦ ζ^j, gcd(j, M) = 1.
    pub fn galois(&self, j: u32) -> Self {
        let m = self.conductor;
        assert!(m == 1 || gcd_u32(j % m, m) == 1, "galois index must be coprime");
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            let kk = ((*k as u64 * j as u64) % m as u64) as u32;
            let e = coeffs.entry(kk).or_insert_with(BigRational::zero);
            *e += v.clone();
        }
        coeffs.retain(|_, v: &mut BigRational| !v.is_zero());
        Cyclotomic { conductor: m, coeffs }
    }

    /// Complex conjugation.
    pub fn conj(&self) -> Self {
        let m = self.conductor;
        if m == 1 {
            return self.clone();
        }
        self.galois(m - 1)
    }

    /// Canonical form: every exponent's digit pattern avoids the top digit
    /// p-1 in its p-primary CRT component, for each prime p | M.
    pub fn canonicalize(&self) -> Self {
        let m = self.conductor;
        let mut coeffs = self.coeffs.clone();
        for (p, e) in prime_factors(m) {
            let q = p.pow(e);
            let top = q / p; // p^{e-1}
            let step = m / p; // relation stride: ζ^k = -Σ_{j≥1} ζ^{k+jM/p}
            let bad: Vec<u32> = coeffs
                .keys()
                .filter(|k| (**k % q) / top == p - 1)
                .copied()
                .collect();
            for k in bad {
                let v = coeffs.remove(&k).unwrap();
                for j in 1..p {
                    let kk = ((k as u64 + j as u64 * step as u64) % m as u64) as u32;
                    let entry = coeffs.entry(kk).or_insert_with(BigRational::zero);
                    *entry -= &v;
                }
            }
        }
        coeffs.retain(|_, v| !v.is_zero());
        Cyclotomic { conductor: m, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.canonicalize().coeffs.is_empty()
    }

    /// The exact rational value, if the element lies in ℚ.
    pub fn to_rational(&self) -> Option<BigRational> {
        let c = self.canonicalize();
        match c.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => c.coeffs.get(&0).cloned(),
            _ => None,
        }
    }

    /// Multiplicative inverse via the product of all nontrivial conjugates
    /// divided by the field norm.
    pub fn inverse(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let m = self.conductor;
        let mut num = Cyclotomic::one(m);
        for j in 2..m {
            if gcd_u32(j, m) == 1 {
                num = num.mul(&self.galois(j));
            }
        }
        let norm = self.mul(&num);
        let n = norm
            .to_rational()
            .ok_or(ExactError::NormNotRational)?;
        if n.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(num.scale(&n.recip()))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ExactError> {
        let (a, b) = Self::common(self, other);
        Ok(a.mul(&b.inverse()?))
    }

    /// Numeric embedding ζ_M ↦ e^{2πi/M}, evaluated in double-double and
    /// rounded once at the end. `precision_bits` must be at least 53; the
    /// internal accumulation carries ~106 bits regardless.
    pub fn embed(&self, precision_bits: u32) -> Complex64 {
        assert!(precision_bits >= 53, "embedding needs at least 53 bits");
        assert!(precision_bits <= 96, "double-double path supports up to 96 bits");
        let m = self.conductor;
        let mut re = Dd::ZERO;
        let mut im = Dd::ZERO;
        for (k, v) in &self.coeffs {
            let x = BigRational::new(BigInt::from(*k), BigInt::from(m));
            let (c, s) = cos_sin_2pi(&x);
            let coeff = Dd::from_rational(v);
            re = re.add(coeff.mul(c));
            im = im.add(coeff.mul(s));
        }
        Complex64::new(re.to_f64(), im.to_f64())
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// √d as an exact cyclotomic (positive real embedding), built from
    /// quadratic Gauss sums; the conductor is lcm over the odd prime
    /// factors of 8p (and 8 for the factor √2).
    pub fn sqrt_integer(d: u64) -> Self {
        assert!(d >= 1);
        let mut out = Cyclotomic::one(1);
        let mut rational_part: u64 = 1;
        let mut n = d;
        let mut p = 2u64;
        while p * p <= n {
            if n % p == 0 {
                let mut e = 0u32;
                while n % p == 0 {
                    n /= p;
                    e += 1;
                }
                rational_part *= p.pow(e / 2);
                if e % 2 == 1 {
                    out = out.mul(&Self::sqrt_prime(p));
                }
            }
            p += 1;
        }
        if n > 1 {
            // n is prime; even exponents were divided out above
            out = out.mul(&Self::sqrt_prime(n));
        }
        let out = out.scale(&BigRational::from(BigInt::from(rational_part)));
        debug_assert_eq!(out.mul(&out), Cyclotomic::from_int(d as i64, out.conductor()));
        out
    }

    fn sqrt_prime(p: u64) -> Self {
        if p == 2 {
            // √2 = ζ_8 + ζ_8^{-1}
            return Self::root_of_unity(1, 8).add(&Self::root_of_unity(7, 8));
        }
        // quadratic Gauss sum Σ_j e(j²/p) equals √p (p ≡ 1 mod 4) or i√p
        let m = p as u32;
        let mut g = Cyclotomic::zero(m);
        for j in 0..p {
            g = g.add(&Self::root_of_unity(((j * j) % p) as i64, m));
        }
        if p % 4 == 1 {
            g
        } else {
            g.mul(&Self::root_of_unity(3, 4)) // multiply by -i
        }
    }
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

pub(crate) fn lcm_u32(a: u32, b: u32) -> u32 {
    a / gcd_u32(a, b).max(1) * b
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Self::common(self, other);
        a.canonicalize().coeffs == b.canonicalize().coeffs
    }
}

impl Eq for Cyclotomic {}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.canonicalize();
        if c.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in &c.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *k == 0 {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{}*z{}^{}", v, c.conductor, k)?;
            }
        }
        Ok(())
    }
}
