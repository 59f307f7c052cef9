//! The local Weil representation ω_p on S_{L_p} at an odd prime p, as
//! explicit scaled matrices over ℚ(ζ_{8p^a}).
//!
//! Generator action in the Schrödinger model:
//!   ω_p(n(b)) φ^(μ)      = ψ_p(b·q(μ)) φ^(μ)
//!   ω_p(w)    φ^(μ)      = γ_p(D_p)/|D_p|^{1/2} Σ_ν ψ_p((μ,ν)) φ^(ν)
//!   ω_p(m(t1,t2)) φ^(μ)  = (t1/|D_p|) φ^(t^{-1} t2 μ),  det = t²
//! with ψ_p(x) = e(x'), x' the principal part of x.
//!
//! Group elements carry a chosen square root of their determinant (the
//! witness); flipping the witness composes the operator with the negation
//! permutation, so all identities are stated on (matrix, witness) pairs.
//! Elements of 𝒦_p not in 𝒦_0(p) are evaluated through the factorization
//! k = n(a/c)·w^{-1}·k' with k' upper triangular; elements of 𝒦_0(p)
//! through n_(c/a)·m(a, det/a)·n(b/a), where ω(n_(x)) is defined by
//! w-conjugation of ω(n(-x)).

use std::sync::Arc;

use dashmap::DashMap;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use thiserror::Error;

use crate::exact::{lcm_u32, Cyclotomic, ScaledMatrix};
use crate::fqm::{FiniteQuadraticModule, FqmError};
use crate::gauss;
use crate::modp;

#[derive(Debug, Error)]
pub enum WeilError {
    #[error("p must be an odd prime, got {0}")]
    BadPrime(u64),
    #[error(transparent)]
    Fqm(#[from] FqmError),
    #[error("entry is not p-integral: {0}")]
    NotPIntegral(String),
    #[error("determinant is not a unit square: {0}")]
    NonSquareDeterminant(String),
    #[error("witness does not square to the determinant")]
    WitnessMismatch,
    #[error("lower-left and upper-left entries are both non-units")]
    BothCornersNonUnit,
    #[error("neither Weil-index convention satisfies the defining relations")]
    ConventionFailure,
}

type CacheKey = ([u64; 4], u64);

/// The representation space S_{L_p} = ⊕_{μ ∈ D_p} ℂ φ^(μ) with all data
/// needed to evaluate ω_p exactly. Basis order puts μ = 0 first.
pub struct LocalSpace {
    p: u64,
    dp: FiniteQuadraticModule,
    dim: usize,
    level_exp: u32, // a with level(D_p) = p^a
    conductor: u32,
    gamma: Cyclotomic,
    gamma_flipped: bool,
    neg_perm: Vec<usize>,
    wit_mod: u64, // p^{a+3}
    key_mod: u64, // p^{a+2}
    cache: DashMap<CacheKey, Arc<ScaledMatrix>>,
}

/// Element of 𝒦_p: p-integral matrix with unit-square determinant and a
/// chosen root of the determinant (residue mod p^{a+3}).
#[derive(Clone, Debug)]
pub struct KpElement {
    pub mat: [BigRational; 4], // row-major a, b, c, d
    pub witness: u64,
}

/// Element of 𝒬_p: rational matrix whose determinant is a square of
/// p-adic valuation 2·wit_pow, with unit root residue wit_unit.
#[derive(Clone, Debug)]
pub struct QpElement {
    pub mat: [BigRational; 4],
    pub wit_pow: i64,
    pub wit_unit: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Determinant of a 2×2 rational matrix in row-major layout.
pub fn det2(m: &[BigRational; 4]) -> BigRational {
    &m[0] * &m[3] - &m[1] * &m[2]
}

/// Product of 2×2 rational matrices in row-major layout.
pub fn mat_mul(a: &[BigRational; 4], b: &[BigRational; 4]) -> [BigRational; 4] {
    [
        &a[0] * &b[0] + &a[1] * &b[2],
        &a[0] * &b[1] + &a[1] * &b[3],
        &a[2] * &b[0] + &a[3] * &b[2],
        &a[2] * &b[1] + &a[3] * &b[3],
    ]
}

impl LocalSpace {
    /// Build the local space at p from a discriminant form: the p-part of
    /// `d` when p divides |D|, the one-dimensional trivial space otherwise.
    pub fn new(d: &FiniteQuadraticModule, p: u64) -> Result<Self, WeilError> {
        if p == 2 || !is_prime(p) {
            return Err(WeilError::BadPrime(p));
        }
        let dp = if d.order() % p == 0 {
            d.p_part(p)?
        } else {
            FiniteQuadraticModule::from_parts(vec![], vec![], vec![])?
        };
        Self::from_p_part(dp, p)
    }

    fn from_p_part(dp: FiniteQuadraticModule, p: u64) -> Result<Self, WeilError> {
        let level = dp.level();
        let mut level_exp = 0u32;
        let mut l = level;
        while l % p == 0 {
            l /= p;
            level_exp += 1;
        }
        let conductor = lcm_u32(lcm_u32(8, level as u32), p as u32);
        let dim = dp.num_elements();
        let neg_perm = (0..dim).map(|i| dp.neg_element(i)).collect();
        let g = gauss::gauss_sum(&dp, 1);
        let gamma = Self::pin_weil_index(&g, dp.order())?;
        let wit_mod = p.pow(level_exp + 3);
        let key_mod = p.pow(level_exp + 2);
        let mut space = LocalSpace {
            p,
            dp,
            dim,
            level_exp,
            conductor,
            gamma,
            gamma_flipped: false,
            neg_perm,
            wit_mod,
            key_mod,
            cache: DashMap::new(),
        };
        if !space.convention_holds() {
            space.gamma = space.gamma.conj();
            space.gamma_flipped = true;
            space.cache.clear();
            log::info!(
                "p = {}: primary Weil-index convention failed, selected the conjugate",
                p
            );
            if !space.convention_holds() {
                return Err(WeilError::ConventionFailure);
            }
        }
        Ok(space)
    }

    /// γ_p(D_p) = g(D_p)/√|D_p| as an exact eighth root of unity.
    fn pin_weil_index(g: &gauss::GaussSumValue, order: u64) -> Result<Cyclotomic, WeilError> {
        let target = g.normalized().embed(53);
        for t in 0..8i64 {
            let cand = Cyclotomic::root_of_unity(t, 8);
            if (cand.embed(53) - target).norm() < 1e-6 {
                // verify exactly: cand²·|D_p| = g²
                let lhs = cand.mul(&cand).scale(&BigRational::from(BigInt::from(order)));
                if lhs == g.value().mul(g.value()) {
                    return Ok(cand);
                }
            }
        }
        Err(WeilError::ConventionFailure)
    }

    /// Defining relations: ω(w)² = ω(m(-1,-1); t=1) and (n(1)·w)³ = 1.
    fn convention_holds(&self) -> bool {
        let w = self.omega_w();
        let w2 = w.mul(&w);
        let minus_one = BigRational::from(BigInt::from(-1));
        let m = match self.omega_m(&minus_one, &minus_one, 1) {
            Ok(m) => m,
            Err(_) => return false,
        };
        if w2 != m {
            return false;
        }
        let a = self
            .omega_n(&BigRational::one())
            .expect("integral translation")
            .mul(&w);
        let a3 = a.mul(&a).mul(&a);
        a3 == self.identity_op()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn module(&self) -> &FiniteQuadraticModule {
        &self.dp
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn radicand(&self) -> u64 {
        self.dp.order()
    }

    /// a with level(D_p) = p^a.
    pub fn level_exp(&self) -> u32 {
        self.level_exp
    }

    pub fn witness_modulus(&self) -> u64 {
        self.wit_mod
    }

    pub fn gamma_flipped(&self) -> bool {
        self.gamma_flipped
    }

    pub fn identity_op(&self) -> ScaledMatrix {
        ScaledMatrix::identity(self.dim, self.conductor, self.radicand())
    }

    pub fn zero_op(&self) -> ScaledMatrix {
        ScaledMatrix::zero(self.dim, self.conductor, self.radicand())
    }

    /// The negation permutation μ ↦ -μ.
    pub fn negation_op(&self) -> ScaledMatrix {
        ScaledMatrix::scaled_permutation(
            &self.neg_perm,
            &Cyclotomic::one(self.conductor),
            self.radicand(),
        )
    }

    /// ψ_p(x) = e(principal part of x).
    pub fn psi(&self, x: &BigRational) -> Cyclotomic {
        let pp = self.principal_part(x);
        Cyclotomic::from_phase(&pp, self.conductor)
    }

    fn principal_part(&self, x: &BigRational) -> BigRational {
        if x.is_zero() {
            return BigRational::zero();
        }
        let den = x.denom();
        let mut t = 0u32;
        let mut dprime = den.clone();
        let pb = BigInt::from(self.p);
        while num::Integer::mod_floor(&dprime, &pb).is_zero() {
            dprime /= &pb;
            t += 1;
        }
        if t == 0 {
            return BigRational::zero();
        }
        let pt = self.p.pow(t);
        let ptb = BigInt::from(pt);
        let num_mod = num::Integer::mod_floor(x.numer(), &ptb);
        let den_mod = num::Integer::mod_floor(&dprime, &ptb);
        let num_u = u64::try_from(&num_mod).unwrap();
        let den_u = u64::try_from(&den_mod).unwrap();
        let alpha =
            ((num_u as u128 * modp::inv_mod_pk(den_u, self.p, t) as u128) % pt as u128) as u64;
        BigRational::new(BigInt::from(alpha), BigInt::from(pt))
    }

    fn require_p_integral(&self, x: &BigRational) -> Result<(), WeilError> {
        if x.is_zero() {
            return Ok(());
        }
        if modp::val_p_int(x.denom(), self.p) > 0 {
            return Err(WeilError::NotPIntegral(x.to_string()));
        }
        Ok(())
    }

    /// ω_p(n(b)): diagonal phase matrix ψ_p(b·q(μ)).
    pub fn omega_n(&self, b: &BigRational) -> Result<ScaledMatrix, WeilError> {
        self.require_p_integral(b)?;
        let mut m = self.zero_op();
        for mu in 0..self.dim {
            let phase = self.psi(&(b * self.dp.q(mu)));
            *m.entry_mut(mu, mu) = phase;
        }
        Ok(m)
    }

    /// ω_p(w): full matrix γ_p·ψ_p((μ,ν)) carrying |D_p|^{-1/2}.
    pub fn omega_w(&self) -> ScaledMatrix {
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for nu in 0..self.dim {
            for mu in 0..self.dim {
                entries.push(self.gamma.mul(&self.psi(&self.dp.b(mu, nu))));
            }
        }
        ScaledMatrix::from_entries(self.dim, entries, self.radicand(), 1)
    }

    /// ω_p(w)^{-1} = γ² · (negation ∘ ω_p(w)).
    pub fn omega_w_inv(&self) -> ScaledMatrix {
        let g2 = self.gamma.mul(&self.gamma);
        self.negation_op().mul(&self.omega_w()).scale_cyclotomic(&g2)
    }

    /// ω_p(m(t1,t2)) with witness t: the signed permutation
    /// (t1/|D_p|)·[μ ↦ t^{-1} t2 μ].
    pub fn omega_m(
        &self,
        t1: &BigRational,
        t2: &BigRational,
        witness: u64,
    ) -> Result<ScaledMatrix, WeilError> {
        self.require_p_integral(t1)?;
        self.require_p_integral(t2)?;
        if t1.is_zero() || modp::val_p(t1, self.p) != 0 {
            return Err(WeilError::NonSquareDeterminant(format!("t1 = {t1} is not a unit")));
        }
        if t2.is_zero() || modp::val_p(t2, self.p) != 0 {
            return Err(WeilError::NonSquareDeterminant(format!("t2 = {t2} is not a unit")));
        }
        let det = t1 * t2;
        let prec = self.level_exp + 3;
        let det_res = modp::reduce_mod_pk(&det, self.p, prec);
        let w = witness % self.wit_mod;
        if ((w as u128 * w as u128) % self.wit_mod as u128) as u64 != det_res {
            return Err(WeilError::WitnessMismatch);
        }
        let dp_order = self.radicand();
        let sign = if dp_order == 1 {
            1
        } else {
            let t1_res = modp::reduce_mod_pk(t1, self.p, prec) % dp_order;
            modp::jacobi(t1_res as i64, dp_order)
        };
        let exp = self.dp.exponent().max(1);
        let perm: Vec<usize> = if exp == 1 {
            vec![0]
        } else {
            let e = exp_log_p(exp, self.p);
            let t2_res = modp::reduce_mod_pk(t2, self.p, e);
            let w_res = w % exp;
            let s = ((modp::inv_mod_pk(w_res, self.p, e) as u128 * t2_res as u128) % exp as u128)
                as u64;
            (0..self.dim).map(|mu| self.dp.scale_element(mu, s as i64)).collect()
        };
        let factor = Cyclotomic::from_int(sign as i64, self.conductor);
        Ok(ScaledMatrix::scaled_permutation(&perm, &factor, dp_order))
    }

    /// ω_p(n_(c)) := ω(w)·ω(n(-c))·ω(w)^{-1}.
    pub fn omega_n_lower(&self, c: &BigRational) -> Result<ScaledMatrix, WeilError> {
        let inner = self.omega_n(&(-c.clone()))?;
        Ok(self.omega_w().mul(&inner).mul(&self.omega_w_inv()).normalized())
    }

    /// Construct a 𝒦_p element, checking p-integrality and the unit-square
    /// determinant. A witness may be supplied; otherwise the canonical
    /// square root is chosen.
    pub fn kp_element(
        &self,
        mat: [BigRational; 4],
        witness: Option<u64>,
    ) -> Result<KpElement, WeilError> {
        for e in &mat {
            self.require_p_integral(e)?;
        }
        let det = det2(&mat);
        if det.is_zero() || modp::val_p(&det, self.p) != 0 {
            return Err(WeilError::NonSquareDeterminant(format!("det = {det}")));
        }
        let prec = self.level_exp + 3;
        let det_res = modp::reduce_mod_pk(&det, self.p, prec);
        let canonical = modp::sqrt_mod_pk(det_res, self.p, prec)
            .ok_or_else(|| WeilError::NonSquareDeterminant(format!("det = {det}")))?;
        let w = match witness {
            None => canonical,
            Some(w) => {
                let w = w % self.wit_mod;
                if ((w as u128 * w as u128) % self.wit_mod as u128) as u64 != det_res {
                    return Err(WeilError::WitnessMismatch);
                }
                w
            }
        };
        Ok(KpElement { mat, witness: w })
    }

    pub fn kp_from_i64(&self, rows: [[i64; 2]; 2]) -> Result<KpElement, WeilError> {
        let m = [
            BigRational::from(BigInt::from(rows[0][0])),
            BigRational::from(BigInt::from(rows[0][1])),
            BigRational::from(BigInt::from(rows[1][0])),
            BigRational::from(BigInt::from(rows[1][1])),
        ];
        self.kp_element(m, None)
    }

    /// Product in the covering group: matrices multiply, witnesses multiply.
    pub fn kp_mul(&self, x: &KpElement, y: &KpElement) -> KpElement {
        KpElement {
            mat: mat_mul(&x.mat, &y.mat),
            witness: ((x.witness as u128 * y.witness as u128) % self.wit_mod as u128) as u64,
        }
    }

    /// Flip the chosen root of the determinant.
    pub fn kp_flip_witness(&self, x: &KpElement) -> KpElement {
        KpElement {
            mat: x.mat.clone(),
            witness: (self.wit_mod - x.witness % self.wit_mod) % self.wit_mod,
        }
    }

    fn cache_key(&self, k: &KpElement) -> CacheKey {
        let reduce = |x: &BigRational| modp::reduce_mod_pk(x, self.p, self.level_exp + 2);
        (
            [reduce(&k.mat[0]), reduce(&k.mat[1]), reduce(&k.mat[2]), reduce(&k.mat[3])],
            k.witness % self.key_mod,
        )
    }


    /// ω_p(k) for arbitrary k ∈ 𝒦_p, cached on the reduced matrix.
    pub fn omega_eval(&self, k: &KpElement) -> Result<Arc<ScaledMatrix>, WeilError> {
        let key = self.cache_key(k);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let op = Arc::new(self.omega_eval_uncached(k)?);
        self.cache.insert(key, op.clone());
        Ok(op)
    }

    fn omega_eval_uncached(&self, k: &KpElement) -> Result<ScaledMatrix, WeilError> {
        let [a, b, c, d] = &k.mat;
        let det = det2(&k.mat);
        let c_unit = !c.is_zero() && modp::val_p(c, self.p) == 0;
        if !c_unit {
            // 𝒦_0(p): n_(c/a)·m(a, det/a)·n(b/a)
            let a_unit = !a.is_zero() && modp::val_p(a, self.p) == 0;
            if !a_unit {
                return Err(WeilError::BothCornersNonUnit);
            }
            let lower = self.omega_n_lower(&(c / a))?;
            let mid = self.omega_m(a, &(&det / a), k.witness)?;
            let upper = self.omega_n(&(b / a))?;
            return Ok(lower.mul(&mid).mul(&upper).normalized());
        }
        // k = n(a/c)·w^{-1}·k' with k' = [[c, d], [0, (a/c)·d - b]]
        let j = a / c;
        let front = self.omega_n(&j)?.mul(&self.omega_w_inv());
        let mid = self.omega_m(c, &(&det / c), k.witness)?;
        let upper = self.omega_n(&(d / c))?;
        Ok(front.mul(&mid).mul(&upper).normalized())
    }

    /// The Weil index γ_p(D_p) in the selected convention.
    pub fn weil_index(&self) -> &Cyclotomic {
        &self.gamma
    }

    /// Canonical 𝒬_p element: determinant p^{2n}·(unit square) with the
    /// canonical unit root.
    pub fn qp_element(&self, mat: [BigRational; 4]) -> Result<QpElement, WeilError> {
        let det = det2(&mat);
        if det.is_zero() {
            return Err(WeilError::NonSquareDeterminant("det = 0".into()));
        }
        let v = modp::val_p(&det, self.p);
        if v % 2 != 0 {
            return Err(WeilError::NonSquareDeterminant(format!(
                "det = {det} has odd valuation {v}"
            )));
        }
        let p_pow = BigRational::from(BigInt::from(self.p)).pow(v as i32);
        let unit = &det / p_pow;
        let prec = self.level_exp + 3;
        let res = modp::reduce_mod_pk(&unit, self.p, prec);
        let wit_unit = modp::sqrt_mod_pk(res, self.p, prec)
            .ok_or_else(|| WeilError::NonSquareDeterminant(format!("unit part of {det}")))?;
        Ok(QpElement { mat, wit_pow: v / 2, wit_unit })
    }
}

fn exp_log_p(exp: u64, p: u64) -> u32 {
    let mut e = 0;
    let mut x = exp;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    assert_eq!(x, 1, "group exponent must be a p-power");
    e
}

/// Random 𝒦_p element, for the randomized invariant suites.
pub fn random_kp(space: &LocalSpace, rng: &mut impl rand::Rng) -> KpElement {
    loop {
        let range = space.witness_modulus() as i64;
        let rows = [
            [rng.gen_range(-range..range), rng.gen_range(-range..range)],
            [rng.gen_range(-range..range), rng.gen_range(-range..range)],
        ];
        if let Ok(k) = space.kp_from_i64(rows) {
            return k;
        }
    }
}

/// Random 𝒦_0(p) element (lower-left entry divisible by p).
pub fn random_k0p(space: &LocalSpace, rng: &mut impl rand::Rng) -> KpElement {
    let p = space.p() as i64;
    loop {
        let range = space.witness_modulus() as i64;
        let rows = [
            [rng.gen_range(-range..range), rng.gen_range(-range..range)],
            [p * rng.gen_range(-range / p..range / p), rng.gen_range(-range..range)],
        ];
        if let Ok(k) = space.kp_from_i64(rows) {
            return k;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::fqm::GramMatrix;
    use rand::SeedableRng;

    fn a2_space() -> LocalSpace {
        let g = GramMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let d = FiniteQuadraticModule::from_gram(&g).unwrap();
        LocalSpace::new(&d, 3).unwrap()
    }

    #[test]
    fn gamma_for_a2_is_i() {
        let s = a2_space();
        assert_eq!(s.weil_index(), &Cyclotomic::root_of_unity(1, 4));
        assert!(!s.gamma_flipped());
        let mut g = Cyclotomic::one(8);
        for _ in 0..8 {
            g = g.mul(s.weil_index());
        }
        assert_eq!(g, Cyclotomic::one(8));
    }

    #[test]
    fn omega_n_diagonal_phases() {
        let s = a2_space();
        let op = s.omega_n(&rat(1, 1)).unwrap();
        assert_eq!(op.entry(0, 0), &Cyclotomic::one(24));
        assert_eq!(op.entry(1, 1), &Cyclotomic::root_of_unity(8, 24)); // e(1/3)
        assert_eq!(op.entry(2, 2), &Cyclotomic::root_of_unity(8, 24));
        assert!(op.entry(0, 1).is_zero());
        assert_eq!(s.omega_n(&rat(0, 1)).unwrap(), s.identity_op());
        assert_eq!(s.omega_n(&rat(3, 1)).unwrap(), s.identity_op());
        assert_eq!(s.omega_n(&rat(9, 2)).unwrap(), s.identity_op());
        assert!(s.omega_n(&rat(1, 3)).is_err());
    }

    #[test]
    fn omega_w_column_at_zero() {
        let s = a2_space();
        let w = s.omega_w();
        // column at φ^(0): (γ/√3)(φ^(0)+φ^(1)+φ^(2))
        for nu in 0..3 {
            assert_eq!(w.entry(nu, 0), s.weil_index());
        }
        assert_eq!(w.half_power(), 1);
        assert_eq!(w.radicand(), 3);
    }

    #[test]
    fn omega_w_squared_is_minus_one_action() {
        let s = a2_space();
        let w2 = s.omega_w().mul(&s.omega_w());
        let m = s.omega_m(&rat(-1, 1), &rat(-1, 1), 1).unwrap();
        assert_eq!(w2, m);
        assert_eq!(s.omega_w().mul(&s.omega_w_inv()), s.identity_op());
    }

    #[test]
    fn omega_m_examples() {
        let s = a2_space();
        assert_eq!(s.omega_m(&rat(1, 1), &rat(1, 1), 1).unwrap(), s.identity_op());
        // t1=4, t2=1, witness t=2: permutation μ ↦ 2μ with sign (4/3) = +1
        let m = s.omega_m(&rat(4, 1), &rat(1, 1), 2).unwrap();
        assert_eq!(m.entry(2, 1), &Cyclotomic::one(24));
        assert_eq!(m.entry(1, 2), &Cyclotomic::one(24));
        assert_eq!(m.entry(0, 0), &Cyclotomic::one(24));
        assert!(m.entry(1, 1).is_zero());
        // witness flip composes with the formula's own t-dependence
        let m_flipped = s.omega_m(&rat(4, 1), &rat(1, 1), s.witness_modulus() - 2).unwrap();
        let neg_action = s.omega_m(&rat(1, 1), &rat(1, 1), s.witness_modulus() - 1).unwrap();
        assert_eq!(m_flipped, m.mul(&neg_action));
        assert!(s.kp_from_i64([[2, 0], [0, 1]]).is_err());
    }

    #[test]
    fn k0p_action_on_phi0_is_chi() {
        let s = a2_space();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = random_k0p(&s, &mut rng);
            let op = s.omega_eval(&k).unwrap();
            let a_mod = modp::reduce_mod_pk(&k.mat[0], 3, 1);
            let chi = modp::jacobi(a_mod as i64, 3);
            let expect = Cyclotomic::from_int(chi as i64, 24);
            let norm = op.normalized();
            assert_eq!(norm.entry(0, 0), &expect);
            assert!(norm.entry(1, 0).is_zero());
            assert!(norm.entry(2, 0).is_zero());
        }
    }

    #[test]
    fn lower_unipotent_fixes_phi0() {
        // ω(n_(c)) φ^(0) = φ^(0) for c in p^a·Z_p (the range the 𝒦_0(p)
        // decomposition feeds in); for unit c the (0,0) entry is a
        // normalized Gauss sum of modulus 1/√p instead.
        let s = a2_space();
        for c in [0i64, 3, 6, 21, -9] {
            let op = s.omega_n_lower(&rat(c, 1)).unwrap();
            let norm = op.normalized();
            assert_eq!(norm.entry(0, 0), &Cyclotomic::one(24));
            assert!(norm.entry(1, 0).is_zero());
            assert!(norm.entry(2, 0).is_zero());
        }
        let unit_case = s.omega_n_lower(&rat(1, 1)).unwrap();
        let e00 = unit_case.collapsed_entries()[0].embed(53);
        assert!((e00.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn multiplicativity_on_random_pairs() {
        let s = a2_space();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let x = random_kp(&s, &mut rng);
            let y = random_kp(&s, &mut rng);
            let lhs = s.omega_eval(&x).unwrap().mul(&s.omega_eval(&y).unwrap());
            let rhs = s.omega_eval(&s.kp_mul(&x, &y)).unwrap();
            assert_eq!(&lhs, rhs.as_ref());
        }
    }

    #[test]
    fn unitarity() {
        let s = a2_space();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = random_kp(&s, &mut rng);
            let op = s.omega_eval(&x).unwrap();
            let prod = op.mul(&op.conj_transpose());
            assert_eq!(prod, s.identity_op());
        }
    }

    #[test]
    fn unipotent_fixed_space_is_phi0() {
        // anisotropic D_p: the fixed space of all ω(n(b)), b ∈ Z_p, is span φ^(0)
        let s = a2_space();
        let op = s.omega_n(&rat(1, 1)).unwrap();
        for mu in 0..s.dim() {
            let fixed = op.entry(mu, mu) == &Cyclotomic::one(24);
            assert_eq!(fixed, mu == 0);
        }
    }

    #[test]
    fn trivial_space_is_one_dimensional() {
        let g = GramMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let d = FiniteQuadraticModule::from_gram(&g).unwrap();
        let s = LocalSpace::new(&d, 5).unwrap();
        assert_eq!(s.dim(), 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let x = random_kp(&s, &mut rng);
        assert_eq!(s.omega_eval(&x).unwrap().as_ref(), &s.identity_op());
    }

    #[test]
    fn rejects_even_or_composite_p() {
        let g = GramMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let d = FiniteQuadraticModule::from_gram(&g).unwrap();
        assert!(LocalSpace::new(&d, 2).is_err());
        assert!(LocalSpace::new(&d, 9).is_err());
    }

    #[test]
    fn nine_dimensional_space_conventions() {
        let a2 = GramMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let d = FiniteQuadraticModule::from_gram(&a2.direct_sum(&a2)).unwrap();
        let s = LocalSpace::new(&d, 3).unwrap();
        assert_eq!(s.dim(), 9);
        // γ((Z/3)², q=(x²+y²)/3) = γ(Z/3)² = i² = -1
        assert_eq!(s.weil_index(), &Cyclotomic::from_int(-1, 8));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let x = random_kp(&s, &mut rng);
            let y = random_kp(&s, &mut rng);
            let lhs = s.omega_eval(&x).unwrap().mul(&s.omega_eval(&y).unwrap());
            let rhs = s.omega_eval(&s.kp_mul(&x, &y)).unwrap();
            assert_eq!(&lhs, rhs.as_ref());
        }
    }
}
