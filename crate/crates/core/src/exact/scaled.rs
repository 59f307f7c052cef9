//! Square matrices over a cyclotomic field carrying a global factor
//! d^{-e/2} for a fixed radicand d, plus the scalar variant used when
//! sums mix the two parities of the half-power.
//!
//! Products add half-powers; an even half-power folds exactly into the
//! entries, so represented values are compared after normalization.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::One;

use super::cyclotomic::Cyclotomic;
use super::ExactError;

/// Matrix of cyclotomics with the implicit factor radicand^{-half_power/2}.
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    dim: usize,
    entries: Vec<Cyclotomic>, // row-major
    radicand: u64,
    half_power: i64,
}

impl ScaledMatrix {
    pub fn zero(dim: usize, conductor: u32, radicand: u64) -> Self {
        ScaledMatrix {
            dim,
            entries: vec![Cyclotomic::zero(conductor); dim * dim],
            radicand,
            half_power: 0,
        }
    }

    pub fn identity(dim: usize, conductor: u32, radicand: u64) -> Self {
        let mut m = Self::zero(dim, conductor, radicand);
        for i in 0..dim {
            m.entries[i * dim + i] = Cyclotomic::one(conductor);
        }
        m
    }

    pub fn from_entries(dim: usize, entries: Vec<Cyclotomic>, radicand: u64, half_power: i64) -> Self {
        assert_eq!(entries.len(), dim * dim);
        ScaledMatrix { dim, entries, radicand, half_power }
    }

    /// Permutation matrix sending basis vector j to basis vector perm[j],
    /// scaled by a cyclotomic factor.
    pub fn scaled_permutation(perm: &[usize], factor: &Cyclotomic, radicand: u64) -> Self {
        let dim = perm.len();
        let mut m = Self::zero(dim, factor.conductor(), radicand);
        for (j, &i) in perm.iter().enumerate() {
            m.entries[i * dim + j] = factor.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn half_power(&self) -> i64 {
        self.half_power
    }

    pub fn entry(&self, i: usize, j: usize) -> &Cyclotomic {
        &self.entries[i * self.dim + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut Cyclotomic {
        &mut self.entries[i * self.dim + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.radicand, other.radicand, "radicand mismatch");
        let dim = self.dim;
        let conductor = if dim > 0 { self.entries[0].conductor() } else { 1 };
        let mut out = Self::zero(dim, conductor, self.radicand);
        out.half_power = self.half_power + other.half_power;
        for i in 0..dim {
            for k in 0..dim {
                let a = self.entry(i, k);
                if a.support_len() == 0 {
                    continue;
                }
                for j in 0..dim {
                    let b = other.entry(k, j);
                    if b.support_len() == 0 {
                        continue;
                    }
                    let prod = a.mul(b);
                    out.entries[i * dim + j] = out.entries[i * dim + j].add(&prod);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.radicand, other.radicand);
        let a = self.normalized();
        let b = other.normalized();
        assert_eq!(a.half_power, b.half_power, "cannot add mixed parities as a matrix");
        let entries = a
            .entries
            .iter()
            .zip(b.entries.iter())
            .map(|(x, y)| x.add(y))
            .collect();
        ScaledMatrix { dim: a.dim, entries, radicand: a.radicand, half_power: a.half_power }
    }

    pub fn scale_cyclotomic(&self, c: &Cyclotomic) -> Self {
        let entries = self.entries.iter().map(|e| e.mul(c)).collect();
        ScaledMatrix { dim: self.dim, entries, radicand: self.radicand, half_power: self.half_power }
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        let entries = self.entries.iter().map(|e| e.scale(r)).collect();
        ScaledMatrix { dim: self.dim, entries, radicand: self.radicand, half_power: self.half_power }
    }

    pub fn conj_transpose(&self) -> Self {
        let dim = self.dim;
        let mut out = self.clone();
        for i in 0..dim {
            for j in 0..dim {
                out.entries[i * dim + j] = self.entry(j, i).conj();
            }
        }
        out
    }

    /// Fold even parts of the half-power into the entries; the result has
    /// half_power 0 or 1. If the radicand is a perfect square the half
    /// power always folds away completely.
    pub fn normalized(&self) -> Self {
        let mut m = self.clone();
        let root = (self.radicand as f64).sqrt().round() as u64;
        if root * root == self.radicand && self.radicand > 0 && m.half_power % 2 != 0 {
            // d^{-1/2} = 1/root exactly
            let r = BigRational::new(BigInt::one(), BigInt::from(root));
            m = m.scale_rational(&r);
            m.half_power -= 1;
        }
        let t = m.half_power.div_euclid(2);
        if t != 0 {
            let d = BigRational::from(BigInt::from(m.radicand));
            let factor = if t > 0 {
                d.recip().pow(t as i32)
            } else {
                d.pow((-t) as i32)
            };
            m = m.scale_rational(&factor);
            m.half_power -= 2 * t;
        }
        m
    }

    /// Exact conversion to a plain cyclotomic matrix; requires the
    /// normalized half-power to vanish.
    pub fn to_plain(&self) -> Result<Vec<Cyclotomic>, ExactError> {
        let m = self.normalized();
        if m.half_power != 0 {
            return Err(ExactError::OddHalfPower);
        }
        Ok(m.entries)
    }

    pub fn embed(&self, precision_bits: u32) -> Vec<Complex64> {
        let scale = (self.radicand as f64).powf(-(self.half_power as f64) / 2.0);
        self.entries.iter().map(|e| e.embed(precision_bits) * scale).collect()
    }

    /// Apply to a column vector (with its own half-power bookkeeping).
    pub fn apply(&self, v: &ScaledVector) -> ScaledVector {
        assert_eq!(self.dim, v.entries.len());
        assert_eq!(self.radicand, v.radicand);
        let conductor = v.entries[0].conductor();
        let mut out = vec![Cyclotomic::zero(conductor); self.dim];
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.entry(i, k);
                if a.support_len() == 0 || v.entries[k].support_len() == 0 {
                    continue;
                }
                out[i] = out[i].add(&a.mul(&v.entries[k]));
            }
        }
        ScaledVector { entries: out, radicand: v.radicand, half_power: v.half_power + self.half_power }
    }
}

impl ScaledMatrix {
    /// Entries with the half-power collapsed in-field: the conductor always
    /// contains √d for the radicands that occur (d = p^f with the ambient
    /// conductor divisible by 8p), so every represented value has a plain
    /// cyclotomic form. Used for equality; stored values keep the channel.
    pub fn collapsed_entries(&self) -> Vec<Cyclotomic> {
        let n = self.normalized();
        if n.half_power == 0 {
            return n.entries;
        }
        debug_assert_eq!(n.half_power, 1);
        let root = Cyclotomic::sqrt_integer(n.radicand);
        let inv_d = BigRational::new(BigInt::one(), BigInt::from(n.radicand));
        n.entries.iter().map(|e| e.mul(&root).scale(&inv_d)).collect()
    }
}

impl PartialEq for ScaledMatrix {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.radicand != other.radicand {
            return false;
        }
        let a = self.normalized();
        let b = other.normalized();
        if a.half_power == b.half_power {
            return a.entries.iter().zip(b.entries.iter()).all(|(x, y)| x == y);
        }
        // mixed parity: compare after collapsing √d into the field
        a.collapsed_entries()
            .iter()
            .zip(b.collapsed_entries().iter())
            .all(|(x, y)| x == y)
    }
}

/// Column vector with half-power bookkeeping.
#[derive(Clone, Debug)]
pub struct ScaledVector {
    pub entries: Vec<Cyclotomic>,
    pub radicand: u64,
    pub half_power: i64,
}

impl ScaledVector {
    pub fn basis(dim: usize, idx: usize, conductor: u32, radicand: u64) -> Self {
        let mut entries = vec![Cyclotomic::zero(conductor); dim];
        entries[idx] = Cyclotomic::one(conductor);
        ScaledVector { entries, radicand, half_power: 0 }
    }
}

/// Exact scalar of the form even + odd·d^{-1/2}. Closed under products,
/// which is what mixed-parity accumulation needs.
#[derive(Clone, Debug)]
pub struct SqrtScalar {
    pub even: Cyclotomic,
    pub odd: Cyclotomic,
    pub radicand: u64,
}

impl SqrtScalar {
    pub fn zero(conductor: u32, radicand: u64) -> Self {
        SqrtScalar {
            even: Cyclotomic::zero(conductor),
            odd: Cyclotomic::zero(conductor),
            radicand,
        }
    }

    /// A cyclotomic value times d^{-half_power/2}.
    pub fn from_scaled(value: Cyclotomic, radicand: u64, half_power: i64) -> Self {
        let conductor = value.conductor();
        let d = BigRational::from(BigInt::from(radicand));
        let t = half_power.div_euclid(2);
        let rem = half_power.rem_euclid(2);
        let factor = if t > 0 { d.recip().pow(t as i32) } else { d.pow((-t) as i32) };
        let v = value.scale(&factor);
        let mut s = Self::zero(conductor, radicand);
        if rem == 0 {
            s.even = v;
        } else {
            // fold if the radicand is a perfect square
            let root = (radicand as f64).sqrt().round() as u64;
            if root * root == radicand {
                s.even = v.scale(&BigRational::new(BigInt::one(), BigInt::from(root)));
            } else {
                s.odd = v;
            }
        }
        s
    }

    pub fn add_assign(&mut self, other: &SqrtScalar) {
        assert_eq!(self.radicand, other.radicand);
        self.even = self.even.add(&other.even);
        self.odd = self.odd.add(&other.odd);
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        SqrtScalar {
            even: self.even.scale(r),
            odd: self.odd.scale(r),
            radicand: self.radicand,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    /// Collapse to a single cyclotomic using the in-field √d.
    pub fn collapse(&self) -> Cyclotomic {
        if self.odd.is_zero() {
            return self.even.clone();
        }
        let root = Cyclotomic::sqrt_integer(self.radicand);
        let inv_d = BigRational::new(BigInt::one(), BigInt::from(self.radicand));
        self.even.add(&self.odd.mul(&root).scale(&inv_d))
    }

    /// Exact rational value; errors if an irrational part survives.
    pub fn to_rational(&self) -> Result<BigRational, ExactError> {
        self.collapse().to_rational().ok_or(ExactError::IrrationalValue)
    }

    pub fn embed(&self, precision_bits: u32) -> Complex64 {
        let e = self.even.embed(precision_bits);
        let o = self.odd.embed(precision_bits);
        e + o / (self.radicand as f64).sqrt()
    }
}

impl PartialEq for SqrtScalar {
    fn eq(&self, other: &Self) -> bool {
        self.radicand == other.radicand && self.collapse() == other.collapse()
    }
}

/// Matrix over ℚ(ζ)(√d): an even part and an odd part carrying d^{-1/2}.
/// Sums of pure-parity `ScaledMatrix` values land here (convolution mixes
/// parities across cosets).
#[derive(Clone, Debug)]
pub struct SqrtMatrix {
    even: ScaledMatrix, // half_power 0
    odd: ScaledMatrix,  // half_power 1
}

impl SqrtMatrix {
    pub fn zero(dim: usize, conductor: u32, radicand: u64) -> Self {
        let even = ScaledMatrix::zero(dim, conductor, radicand);
        let mut odd = ScaledMatrix::zero(dim, conductor, radicand);
        odd.half_power = 1;
        SqrtMatrix { even, odd }
    }

    pub fn from_pure(m: &ScaledMatrix) -> Self {
        let n = m.normalized();
        let mut out = Self::zero(n.dim, n.entries.first().map(|e| e.conductor()).unwrap_or(1), n.radicand);
        match n.half_power {
            0 => out.even = n,
            1 => out.odd = n,
            _ => unreachable!("normalized half power is 0 or 1"),
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.even.dim
    }

    pub fn radicand(&self) -> u64 {
        self.even.radicand
    }

    pub fn even_part(&self) -> &ScaledMatrix {
        &self.even
    }

    pub fn odd_part(&self) -> &ScaledMatrix {
        &self.odd
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        SqrtMatrix {
            even: self.even.add(&other.even),
            odd: self.odd.add(&other.odd),
        }
    }

    pub fn add_pure(&self, m: &ScaledMatrix) -> Self {
        self.add(&Self::from_pure(m))
    }

    /// Matrix product with the √d parity algebra.
    pub fn compose(&self, other: &Self) -> Self {
        let ee = self.even.mul(&other.even);
        let oo = self.odd.mul(&other.odd).normalized(); // hp 2 folds to 0
        let eo = self.even.mul(&other.odd);
        let oe = self.odd.mul(&other.even);
        SqrtMatrix { even: ee.add(&oo), odd: eo.add(&oe) }
    }

    /// ω-sandwich: left · self · right with pure-parity factors.
    pub fn sandwich(&self, left: &ScaledMatrix, right: &ScaledMatrix) -> Self {
        let l = Self::from_pure(left);
        let r = Self::from_pure(right);
        l.compose(self).compose(&r)
    }

    /// ⟨(left · self · right) e_0, e_0⟩ without materializing the product:
    /// Σ_{i,j} left[0,i] · self[i,j] · right[j,0], with exact half-power
    /// bookkeeping per parity part.
    pub fn sandwich_entry00(&self, left: &ScaledMatrix, right: &ScaledMatrix) -> SqrtScalar {
        let dim = self.dim();
        let radicand = self.radicand();
        let conductor = left.entries.first().map(|e| e.conductor()).unwrap_or(1);
        let mut out = SqrtScalar::zero(conductor, radicand);
        for (part, part_hp) in [(&self.even, 0i64), (&self.odd, 1i64)] {
            if part.is_zero() {
                continue;
            }
            let mut acc = Cyclotomic::zero(conductor);
            for i in 0..dim {
                let li = left.entry(0, i);
                if li.support_len() == 0 {
                    continue;
                }
                for j in 0..dim {
                    let vij = part.entry(i, j);
                    if vij.support_len() == 0 {
                        continue;
                    }
                    let rj = right.entry(j, 0);
                    if rj.support_len() == 0 {
                        continue;
                    }
                    acc = acc.add(&li.mul(vij).mul(rj));
                }
            }
            let hp = left.half_power + part_hp + right.half_power;
            out.add_assign(&SqrtScalar::from_scaled(acc, radicand, hp));
        }
        out
    }

    pub fn entry(&self, i: usize, j: usize) -> SqrtScalar {
        let e = self.even.normalized();
        let o = self.odd.normalized();
        let mut s = SqrtScalar::from_scaled(e.entry(i, j).clone(), e.radicand, e.half_power);
        s.add_assign(&SqrtScalar::from_scaled(o.entry(i, j).clone(), o.radicand, o.half_power));
        s
    }

    pub fn embed(&self, precision_bits: u32) -> Vec<Complex64> {
        let e = self.even.embed(precision_bits);
        let o = self.odd.embed(precision_bits);
        e.iter().zip(o.iter()).map(|(a, b)| a + b).collect()
    }
}

impl SqrtMatrix {
    /// All entries as plain cyclotomics (√d collapsed in-field).
    pub fn collapsed_entries(&self) -> Vec<Cyclotomic> {
        let e = self.even.collapsed_entries();
        let o = self.odd.collapsed_entries();
        e.iter().zip(o.iter()).map(|(a, b)| a.add(b)).collect()
    }
}

impl PartialEq for SqrtMatrix {
    fn eq(&self, other: &Self) -> bool {
        if self.dim() != other.dim() || self.radicand() != other.radicand() {
            return false;
        }
        self.collapsed_entries()
            .iter()
            .zip(other.collapsed_entries().iter())
            .all(|(a, b)| a == b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn half_power_addition_under_product() {
        let a = ScaledMatrix::identity(2, 12, 3).scale_rational(&rat(2, 1));
        let mut a = a;
        a.half_power = 1;
        let mut b = ScaledMatrix::identity(2, 12, 3);
        b.half_power = 3;
        let p = a.mul(&b);
        assert_eq!(p.half_power(), 4);
    }

    #[test]
    fn even_half_power_folds_exactly() {
        // identity with half_power 2 over radicand 3 equals (1/3)·identity
        let mut a = ScaledMatrix::identity(1, 4, 3);
        a.half_power = 2;
        let plain = a.to_plain().unwrap();
        assert_eq!(plain[0].to_rational(), Some(rat(1, 3)));
    }

    #[test]
    fn normalization_is_value_preserving() {
        // e -> e+2 with entries multiplied by the radicand represents the same value
        let mut a = ScaledMatrix::identity(1, 8, 5);
        a.half_power = 1;
        let mut b = ScaledMatrix::identity(1, 8, 5).scale_rational(&rat(5, 1));
        b.half_power = 3;
        assert_eq!(a, b);
        let va = a.embed(53)[0];
        let vb = b.embed(53)[0];
        assert!((va - vb).norm() < 1e-15);
    }

    #[test]
    fn square_radicand_folds_odd_power() {
        let s = SqrtScalar::from_scaled(Cyclotomic::one(8), 9, 1);
        assert_eq!(s.to_rational().unwrap(), rat(1, 3));
    }

    #[test]
    fn sqrt_scalar_mixed_sum() {
        let mut s = SqrtScalar::from_scaled(Cyclotomic::one(8), 3, 0);
        let t = SqrtScalar::from_scaled(Cyclotomic::one(8), 3, 1);
        s.add_assign(&t);
        assert!(s.to_rational().is_err());
        let v = s.embed(53);
        assert!((v.re - (1.0 + 1.0 / 3f64.sqrt())).abs() < 1e-14);
    }
}
