//! p-adic integer utilities: valuations, Jacobi symbols, square roots and
//! inverses modulo prime powers.
//!
//! Everything here works with odd primes p and small prime powers p^B
//! (B stays below ~12, so u64/i128 arithmetic is always enough for the
//! moduli; numerators of exact rationals are reduced via `BigInt`).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, Signed, Zero};

/// p-adic valuation of a nonzero integer.
pub fn val_p_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero");
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.abs();
    while (&m % &pb).is_zero() {
        m /= &pb;
        v += 1;
    }
    v
}

/// p-adic valuation of a nonzero rational.
pub fn val_p(q: &BigRational, p: u64) -> i64 {
    assert!(!q.is_zero(), "valuation of zero");
    val_p_int(q.numer(), p) - val_p_int(q.denom(), p)
}

/// Reduce a rational with p-coprime denominator modulo p^B, returning a
/// residue in [0, p^B).
pub fn reduce_mod_pk(q: &BigRational, p: u64, b: u32) -> u64 {
    let m = p.checked_pow(b).expect("modulus overflow");
    let mb = BigInt::from(m);
    let num = q.numer().mod_floor(&mb);
    let den = q.denom().mod_floor(&mb);
    let num_u: u64 = u64::try_from(&num).unwrap();
    let den_u: u64 = u64::try_from(&den).unwrap();
    assert!(den_u % p != 0, "denominator not a p-unit");
    mul_mod(num_u, inv_mod_pk(den_u, p, b), m)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Inverse of a p-unit modulo p^B (Hensel lift of the mod-p inverse).
pub fn inv_mod_pk(a: u64, p: u64, b: u32) -> u64 {
    let m = p.checked_pow(b).expect("modulus overflow");
    let a = a % m;
    assert!(a % p != 0, "not a unit mod p^B");
    // x_{n+1} = x_n (2 - a x_n) doubles the precision each step
    let mut x = pow_mod(a, p - 2, p);
    let mut prec = 1u32;
    while prec < b {
        let ax = mul_mod(a, x, m);
        let two_minus = (2 * (m as u128) + 2 - ax as u128) % m as u128;
        x = mul_mod(x, two_minus as u64, m);
        prec *= 2;
    }
    x
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: i64, n: u64) -> i32 {
    assert!(n % 2 == 1 && n > 0, "jacobi: n must be odd positive");
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut result = 1i32;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Square root of a quadratic-residue unit modulo p^B, odd p.
///
/// Returns the canonical root: the one whose least residue lies in
/// [1, p^B/2]. `None` if `a` is not a residue (or not a unit).
pub fn sqrt_mod_pk(a: u64, p: u64, b: u32) -> Option<u64> {
    let m = p.checked_pow(b).expect("modulus overflow");
    let a = a % m;
    if a % p == 0 {
        return None;
    }
    if jacobi((a % p) as i64, p) != 1 {
        return None;
    }
    let mut r = tonelli_shanks(a % p, p)?;
    // Hensel: r_{n+1} = r_n - (r_n^2 - a) / (2 r_n)
    let mut prec = 1u32;
    while prec < b {
        let modulus = m; // lift straight to the full modulus
        let r2 = mul_mod(r, r, modulus);
        let diff = (r2 as i128 - a as i128).rem_euclid(modulus as i128) as u64;
        let inv2r = inv_mod_pk(mul_mod(2, r, modulus), p, b);
        let corr = mul_mod(diff, inv2r, modulus);
        r = ((r as i128 - corr as i128).rem_euclid(modulus as i128)) as u64;
        prec *= 2;
    }
    debug_assert_eq!(mul_mod(r, r, m), a);
    let other = m - r;
    Some(r.min(other))
}

fn tonelli_shanks(a: u64, p: u64) -> Option<u64> {
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    // p ≡ 1 mod 4
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while jacobi(z as i64, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
            if i == m {
                return None;
            }
        }
        let bexp = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(bexp, bexp, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, bexp, p);
    }
    Some(r)
}

/// Smallest quadratic non-residue mod odd p.
pub fn nonresidue(p: u64) -> u64 {
    (2..p).find(|&n| jacobi(n as i64, p) == -1).expect("odd p > 2 has a non-residue")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_basics() {
        assert_eq!(jacobi(2, 3), -1);
        assert_eq!(jacobi(1, 3), 1);
        assert_eq!(jacobi(4, 3), 1);
        assert_eq!(jacobi(2, 15), 1); // (2/3)(2/5) = (-1)(-1)
        assert_eq!(jacobi(3, 9), 0);
        assert_eq!(jacobi(-1, 3), -1);
        assert_eq!(jacobi(-1, 5), 1);
    }

    #[test]
    fn sqrt_and_inverse_mod_pk() {
        for p in [3u64, 5, 7, 11, 13] {
            let b = 4;
            let m = p.pow(b);
            for a in 1..m.min(500) {
                if a % p == 0 {
                    continue;
                }
                let inv = inv_mod_pk(a, p, b);
                assert_eq!(mul_mod(a, inv, m), 1);
                let sq = mul_mod(a, a, m);
                let r = sqrt_mod_pk(sq, p, b).unwrap();
                assert!(r == a % m || r == m - a % m);
            }
        }
    }

    #[test]
    fn valuations() {
        let q = BigRational::new(BigInt::from(18), BigInt::from(5));
        assert_eq!(val_p(&q, 3), 2);
        assert_eq!(val_p(&q, 5), -1);
        assert_eq!(val_p(&q, 7), 0);
    }

    #[test]
    fn rational_reduction() {
        // 5/7 mod 3^3: 7^{-1} = 4 mod 27, 5*4 = 20
        let q = BigRational::new(BigInt::from(5), BigInt::from(7));
        assert_eq!(reduce_mod_pk(&q, 3, 3), 20);
    }
}
