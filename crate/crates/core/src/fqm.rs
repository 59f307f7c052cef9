//! Finite quadratic modules (discriminant forms) built from even Gram
//! matrices.
//!
//! The group L'/L is computed from the Smith normal form of the Gram
//! matrix with the unimodular transforms retained, so that q-values of the
//! generators come out as exact rationals mod 1. Elements are tuples of
//! residues with respect to the elementary-divisor generators; index 0 is
//! the identity.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::exact::frac_mod1;

#[derive(Debug, Error, PartialEq)]
pub enum FqmError {
    #[error("gram matrix must be square and nonempty")]
    NotSquare,
    #[error("gram matrix must be symmetric")]
    NotSymmetric,
    #[error("even lattice requires even diagonal entries")]
    OddDiagonal,
    #[error("gram matrix must be nondegenerate")]
    Singular,
    #[error("rank must be even")]
    OddRank,
    #[error("prime {0} does not divide the order {1}")]
    PrimeNotDividing(u64, u64),
    #[error("prime must be odd, got {0}")]
    EvenPrime(u64),
    #[error("module order {0} exceeds the supported bound {1}")]
    OrderTooLarge(u64, u64),
    #[error("quadratic form data invalid: {0}")]
    BadFormData(String),
    #[error("malformed lattice input: {0}")]
    BadInput(String),
}

/// Symmetric integer matrix with even diagonal (Gram matrix of an even
/// lattice).
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<BigInt>, // row-major
}

#[derive(Deserialize)]
struct LatticeFile {
    gram: Vec<Vec<i64>>,
}

impl GramMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, FqmError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(FqmError::NotSquare);
        }
        let entries: Vec<BigInt> = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        let g = GramMatrix { dim, entries };
        for i in 0..dim {
            for j in 0..dim {
                if g.at(i, j) != g.at(j, i) {
                    return Err(FqmError::NotSymmetric);
                }
            }
            if g.at(i, i).is_odd() {
                return Err(FqmError::OddDiagonal);
            }
        }
        if g.det().is_zero() {
            return Err(FqmError::Singular);
        }
        Ok(g)
    }

    /// Parse the JSON lattice format {"gram": [[...]]}.
    pub fn from_json(text: &str) -> Result<Self, FqmError> {
        let file: LatticeFile =
            serde_json::from_str(text).map_err(|e| FqmError::BadInput(e.to_string()))?;
        Self::new(file.gram)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn rows_i64(&self) -> Vec<Vec<i64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.at(i, j).to_i64().unwrap()).collect())
            .collect()
    }

    /// Block direct sum.
    pub fn direct_sum(&self, other: &GramMatrix) -> GramMatrix {
        let dim = self.dim + other.dim;
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[i * dim + j] = self.at(i, j).clone();
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                entries[(self.dim + i) * dim + self.dim + j] = other.at(i, j).clone();
            }
        }
        GramMatrix { dim, entries }
    }

    /// Exact determinant.
    pub fn det(&self) -> BigInt {
        let n = self.dim;
        let mut m: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| BigRational::from(self.at(i, j).clone())).collect())
            .collect();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero());
            let Some(p) = pivot else { return BigInt::zero() };
            if p != col {
                m.swap(p, col);
                det = -det;
            }
            det *= &m[col][col];
            let inv = m[col][col].recip();
            for r in col + 1..n {
                let f = &m[r][col] * &inv;
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let sub = &f * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
        assert!(det.is_integer());
        det.to_integer()
    }

    /// Inverse over ℚ.
    fn inverse(&self) -> Vec<Vec<BigRational>> {
        let n = self.dim;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| BigRational::from(self.at(i, j).clone())).collect())
            .collect();
        let mut inv = identity_rat(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular");
            a.swap(p, col);
            inv.swap(p, col);
            let f = a[col][col].recip();
            for c in 0..n {
                a[col][c] *= &f;
                inv[col][c] *= &f;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let s1 = &f * &a[col][c];
                    a[r][c] -= s1;
                    let s2 = &f * &inv[col][c];
                    inv[r][c] -= s2;
                }
            }
        }
        inv
    }

    /// Signature b⁺ − b⁻ mod 8, via exact rational congruence
    /// diagonalization (Sylvester's law).
    pub fn signature_mod8(&self) -> Result<u8, FqmError> {
        if self.det().is_zero() {
            return Err(FqmError::Singular);
        }
        let n = self.dim;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| BigRational::from(self.at(i, j).clone())).collect())
            .collect();
        let mut pos = 0i64;
        let mut neg = 0i64;
        for k in 0..n {
            if a[k][k].is_zero() {
                if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                    // symmetric swap of k and j
                    a.swap(k, j);
                    for row in a.iter_mut() {
                        row.swap(k, j);
                    }
                } else {
                    let j = (k + 1..n)
                        .find(|&j| !a[k][j].is_zero())
                        .expect("nondegenerate block has a nonzero pairing");
                    // row/col k += row/col j gives diagonal 2·a_kj
                    for c in 0..n {
                        let add = a[j][c].clone();
                        a[k][c] += add;
                    }
                    for r in 0..n {
                        let add = a[r][j].clone();
                        a[r][k] += add;
                    }
                }
            }
            let d = a[k][k].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            for r in k + 1..n {
                let f = &a[r][k] / &d;
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let sub = &f * &a[k][c];
                    a[r][c] -= sub;
                }
                for c in 0..n {
                    let sub = &f * &a[c][k];
                    a[c][r] -= sub;
                }
            }
        }
        Ok(((pos - neg).rem_euclid(8)) as u8)
    }
}

fn identity_rat(n: usize) -> Vec<Vec<BigRational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect()
}

/// Smith normal form with transforms: U·A·V = diag(d_i), U and V
/// unimodular, d_i ≥ 0 and d_i | d_{i+1}.
pub fn smith_normal_form(
    a: &[Vec<BigInt>],
) -> (Vec<Vec<BigInt>>, Vec<BigInt>, Vec<Vec<BigInt>>) {
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = identity_int(n);
    let mut v = identity_int(n);

    for k in 0..n {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if !m[i][j].is_zero()
                        && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            if pi != k {
                m.swap(pi, k);
                u.swap(pi, k);
            }
            if pj != k {
                for row in m.iter_mut() {
                    row.swap(pj, k);
                }
                for row in v.iter_mut() {
                    row.swap(pj, k);
                }
            }
            let mut dirty = false;
            for i in k + 1..n {
                if m[i][k].is_zero() {
                    continue;
                }
                let q = div_round(&m[i][k], &m[k][k]);
                for j in 0..n {
                    let sub = &q * &m[k][j];
                    m[i][j] -= &sub;
                    let subu = &q * &u[k][j];
                    u[i][j] -= &subu;
                }
                if !m[i][k].is_zero() {
                    dirty = true;
                }
            }
            for j in k + 1..n {
                if m[k][j].is_zero() {
                    continue;
                }
                let q = div_round(&m[k][j], &m[k][k]);
                for i in 0..n {
                    let sub = &q * &m[i][k];
                    m[i][j] -= &sub;
                    let subv = &q * &v[i][k];
                    v[i][j] -= &subv;
                }
                if !m[k][j].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            let cleared = (k + 1..n).all(|i| m[i][k].is_zero())
                && (k + 1..n).all(|j| m[k][j].is_zero());
            if !cleared {
                continue;
            }
            // enforce d_k | every trailing entry
            let mut offender = None;
            'outer: for i in k + 1..n {
                for j in k + 1..n {
                    if !(&m[i][j] % &m[k][k]).is_zero() {
                        offender = Some(i);
                        break 'outer;
                    }
                }
            }
            match offender {
                None => break,
                Some(i) => {
                    for j in 0..n {
                        let add = m[i][j].clone();
                        m[k][j] += &add;
                        let addu = u[i][j].clone();
                        u[k][j] += &addu;
                    }
                }
            }
        }
    }
    let mut diag: Vec<BigInt> = (0..n).map(|i| m[i][i].clone()).collect();
    for (i, d) in diag.iter_mut().enumerate() {
        if d.is_negative() {
            *d = -d.clone();
            for j in 0..n {
                u[i][j] = -u[i][j].clone();
            }
        }
    }
    (u, diag, v)
}

fn identity_int(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if r.abs() * 2 > b.abs() {
        if (r.is_positive()) == (b.is_positive()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

fn matinv_unimodular(u: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = u.len();
    let mut a: Vec<Vec<BigRational>> = u
        .iter()
        .map(|row| row.iter().map(|x| BigRational::from(x.clone())).collect())
        .collect();
    let mut inv = identity_rat(n);
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero()).unwrap();
        a.swap(p, col);
        inv.swap(p, col);
        let f = a[col][col].recip();
        for c in 0..n {
            a[col][c] *= &f;
            inv[col][c] *= &f;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let s1 = &f * &a[col][c];
                a[r][c] -= s1;
                let s2 = &f * &inv[col][c];
                inv[r][c] -= s2;
            }
        }
    }
    inv.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "unimodular inverse must be integral");
                    x.to_integer()
                })
                .collect()
        })
        .collect()
}

/// Finite abelian group with a ℚ/ℤ-valued quadratic form.
#[derive(Clone)]
pub struct FiniteQuadraticModule {
    orders: Vec<u64>,             // elementary divisors > 1, d_i | d_{i+1}
    gen_q: Vec<BigRational>,      // q(g_i) mod 1
    gen_b: Vec<Vec<BigRational>>, // b(g_i, g_j) mod 1
    qtable: Vec<BigRational>,     // q on all elements, mixed-radix indexed
    level: u64,
    order_total: u64,
}

/// Full enumeration bound: Gauss sums and anisotropy scans walk all
/// elements, so the order is capped.
pub const MAX_ENUMERATED_ORDER: u64 = 100_000;

impl FiniteQuadraticModule {
    /// Discriminant form of an even lattice.
    pub fn from_gram(g: &GramMatrix) -> Result<Self, FqmError> {
        if g.dim % 2 != 0 {
            return Err(FqmError::OddRank);
        }
        let det = g.det();
        if det.is_zero() {
            return Err(FqmError::Singular);
        }
        let rows: Vec<Vec<BigInt>> = (0..g.dim)
            .map(|i| (0..g.dim).map(|j| g.at(i, j).clone()).collect())
            .collect();
        let (u, diag, _v) = smith_normal_form(&rows);
        let w = matinv_unimodular(&u); // columns generate Z^m / G Z^m
        let ginv = g.inverse();
        let n = g.dim;
        let mut kept = Vec::new();
        for (i, d) in diag.iter().enumerate() {
            let d = d
                .to_u64()
                .ok_or(FqmError::OrderTooLarge(u64::MAX, MAX_ENUMERATED_ORDER))?;
            if d > 1 {
                kept.push((i, d));
            }
        }
        // q(gen_i) = (1/2) w_i^T G^{-1} w_i, b(gen_i, gen_j) = w_i^T G^{-1} w_j
        let pairing = |i: usize, j: usize| -> BigRational {
            let mut acc = BigRational::zero();
            for r in 0..n {
                if w[r][i].is_zero() {
                    continue;
                }
                for c in 0..n {
                    if w[c][j].is_zero() {
                        continue;
                    }
                    acc += BigRational::from(w[r][i].clone())
                        * &ginv[r][c]
                        * BigRational::from(w[c][j].clone());
                }
            }
            acc
        };
        let orders: Vec<u64> = kept.iter().map(|&(_, d)| d).collect();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let gen_q: Vec<BigRational> =
            kept.iter().map(|&(i, _)| frac_mod1(&(pairing(i, i) * &half))).collect();
        let gen_b: Vec<Vec<BigRational>> = kept
            .iter()
            .map(|&(i, _)| kept.iter().map(|&(j, _)| frac_mod1(&pairing(i, j))).collect())
            .collect();
        let m = Self::assemble(orders, gen_q, gen_b)?;
        debug_assert_eq!(BigInt::from(m.order_total), det.abs());
        Ok(m)
    }

    /// Direct construction from generator data.
    pub fn from_parts(
        orders: Vec<u64>,
        gen_q: Vec<BigRational>,
        gen_b: Vec<Vec<BigRational>>,
    ) -> Result<Self, FqmError> {
        Self::assemble(orders, gen_q, gen_b)
    }

    fn assemble(
        orders: Vec<u64>,
        gen_q: Vec<BigRational>,
        gen_b: Vec<Vec<BigRational>>,
    ) -> Result<Self, FqmError> {
        let total: u64 = orders.iter().product::<u64>().max(1);
        if total > MAX_ENUMERATED_ORDER {
            return Err(FqmError::OrderTooLarge(total, MAX_ENUMERATED_ORDER));
        }
        if gen_q.len() != orders.len() || gen_b.len() != orders.len() {
            return Err(FqmError::BadFormData("generator data length mismatch".into()));
        }
        let r = orders.len();
        for i in 0..r {
            let d = BigRational::from(BigInt::from(orders[i]));
            if !(&gen_q[i] * &d * &d).is_integer() {
                return Err(FqmError::BadFormData(format!(
                    "q(g_{i}) is not annihilated by the generator order"
                )));
            }
            for j in 0..r {
                if gen_b[i].len() != r {
                    return Err(FqmError::BadFormData("pairing matrix shape".into()));
                }
                if !(&gen_b[i][j] * &d).is_integer() {
                    return Err(FqmError::BadFormData(format!(
                        "b(g_{i}, g_{j}) is not annihilated by the generator order"
                    )));
                }
                if !frac_mod1(&(&gen_b[i][j] - &gen_b[j][i])).is_zero() {
                    return Err(FqmError::BadFormData("pairing is not symmetric".into()));
                }
            }
            let two = BigRational::from(BigInt::from(2));
            if !frac_mod1(&(&gen_b[i][i] - &gen_q[i] * &two)).is_zero() {
                return Err(FqmError::BadFormData("diagonal pairing must equal 2q".into()));
            }
        }
        let mut m = FiniteQuadraticModule {
            orders,
            gen_q,
            gen_b,
            qtable: Vec::new(),
            level: 1,
            order_total: total,
        };
        let table: Vec<BigRational> =
            (0..m.order_total as usize).map(|idx| m.q_of_tuple(&m.tuple(idx))).collect();
        m.qtable = table;
        let mut level = 1u64;
        for q in &m.qtable {
            let den = q.denom().to_u64().unwrap();
            level = level.lcm(&den);
        }
        m.level = level;
        Ok(m)
    }

    fn q_of_tuple(&self, t: &[u64]) -> BigRational {
        let r = self.orders.len();
        let mut acc = BigRational::zero();
        for i in 0..r {
            let a = BigRational::from(BigInt::from(t[i]));
            acc += &self.gen_q[i] * &a * &a;
            for j in i + 1..r {
                acc += &self.gen_b[i][j] * BigRational::from(BigInt::from(t[i] * t[j]));
            }
        }
        frac_mod1(&acc)
    }

    pub fn order(&self) -> u64 {
        self.order_total
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn is_trivial(&self) -> bool {
        self.order_total == 1
    }

    pub fn num_elements(&self) -> usize {
        self.order_total as usize
    }

    pub fn tuple(&self, mut idx: usize) -> Vec<u64> {
        let mut t = Vec::with_capacity(self.orders.len());
        for &d in &self.orders {
            t.push((idx as u64) % d);
            idx /= d as usize;
        }
        t
    }

    pub fn index(&self, t: &[u64]) -> usize {
        let mut idx = 0usize;
        for (i, &d) in self.orders.iter().enumerate().rev() {
            idx = idx * d as usize + (t[i] % d) as usize;
        }
        idx
    }

    pub fn add_elements(&self, a: usize, b: usize) -> usize {
        let ta = self.tuple(a);
        let tb = self.tuple(b);
        let t: Vec<u64> = ta
            .iter()
            .zip(tb.iter())
            .zip(self.orders.iter())
            .map(|((x, y), d)| (x + y) % d)
            .collect();
        self.index(&t)
    }

    pub fn neg_element(&self, a: usize) -> usize {
        let t: Vec<u64> = self
            .tuple(a)
            .iter()
            .zip(self.orders.iter())
            .map(|(x, d)| (d - x) % d)
            .collect();
        self.index(&t)
    }

    /// Scale an element by an integer.
    pub fn scale_element(&self, a: usize, s: i64) -> usize {
        let t: Vec<u64> = self
            .tuple(a)
            .iter()
            .zip(self.orders.iter())
            .map(|(x, d)| {
                let sd = s.rem_euclid(*d as i64) as u64;
                (x * sd) % d
            })
            .collect();
        self.index(&t)
    }

    /// q(x) mod 1.
    pub fn q(&self, idx: usize) -> &BigRational {
        &self.qtable[idx]
    }

    /// b(x, y) = q(x+y) − q(x) − q(y) mod 1.
    pub fn b(&self, x: usize, y: usize) -> BigRational {
        let s = self.add_elements(x, y);
        frac_mod1(&(&self.qtable[s] - &self.qtable[x] - &self.qtable[y]))
    }

    pub fn exponent(&self) -> u64 {
        self.orders.last().copied().unwrap_or(1)
    }

    fn scaled_generators(&self, keep: &[(usize, u64, u64)]) -> Result<Self, FqmError> {
        let orders: Vec<u64> = keep.iter().map(|&(_, _, o)| o).collect();
        let gen_q: Vec<BigRational> = keep
            .iter()
            .map(|&(i, s, _)| {
                let sq = BigRational::from(BigInt::from(s) * BigInt::from(s));
                frac_mod1(&(&self.gen_q[i] * sq))
            })
            .collect();
        let gen_b: Vec<Vec<BigRational>> = keep
            .iter()
            .map(|&(i, si, _)| {
                keep.iter()
                    .map(|&(j, sj, _)| {
                        let ss = BigRational::from(BigInt::from(si) * BigInt::from(sj));
                        frac_mod1(&(&self.gen_b[i][j] * ss))
                    })
                    .collect()
            })
            .collect();
        Self::assemble(orders, gen_q, gen_b)
    }

    pub(crate) fn sylow(&self, p: u64) -> Result<Self, FqmError> {
        if self.order_total % p != 0 {
            return Err(FqmError::PrimeNotDividing(p, self.order_total));
        }
        let mut keep = Vec::new();
        for (i, &d) in self.orders.iter().enumerate() {
            let mut pv = 1u64;
            let mut dd = d;
            while dd % p == 0 {
                dd /= p;
                pv *= p;
            }
            if pv > 1 {
                keep.push((i, d / pv, pv));
            }
        }
        self.scaled_generators(&keep)
    }

    /// The p-group D_p for an odd prime p dividing |D|.
    pub fn p_part(&self, p: u64) -> Result<Self, FqmError> {
        if p == 2 {
            return Err(FqmError::EvenPrime(p));
        }
        self.sylow(p)
    }

    /// D(k): direct sum of the Sylow parts at primes not dividing k
    /// (equivalently the orthogonal complement of ⊕_{p | (k,N)} D_p).
    /// Always satisfies (k, |D(k)|) = 1.
    pub fn complement_part(&self, k: u64) -> Self {
        let mut keep = Vec::new();
        for (i, &d) in self.orders.iter().enumerate() {
            let mut m = d;
            if k != 0 {
                let mut g = gcd_u64(m, k);
                while g > 1 {
                    m /= g;
                    g = gcd_u64(m, k);
                }
            }
            if m > 1 {
                keep.push((i, d / m, m));
            }
        }
        self.scaled_generators(&keep).expect("complement of a valid module is valid")
    }

    /// True iff q(μ) = 0 only for μ = 0.
    pub fn is_anisotropic(&self) -> bool {
        (1..self.num_elements()).all(|i| !self.qtable[i].is_zero())
    }

    /// Odd primes dividing the order.
    pub fn odd_primes(&self) -> Vec<u64> {
        let mut n = self.order_total;
        let mut out = Vec::new();
        let mut p = 2u64;
        while p * p <= n {
            if n % p == 0 {
                if p != 2 {
                    out.push(p);
                }
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 2 {
            out.push(n);
        }
        out
    }

    /// Test-support hook: returns a copy with one q-value corrupted, for
    /// checking that the verification suites actually detect bad data.
    #[doc(hidden)]
    pub fn with_corrupted_q(&self, idx: usize, delta: &BigRational) -> Self {
        let mut m = self.clone();
        if idx > 0 && idx < m.qtable.len() {
            m.qtable[idx] = frac_mod1(&(&m.qtable[idx] + delta));
        }
        m
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

impl fmt::Debug for FiniteQuadraticModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FQM(orders={:?}, |D|={}, N={})", self.orders, self.order_total, self.level)
    }
}
