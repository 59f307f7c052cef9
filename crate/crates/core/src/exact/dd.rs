//! Double-double (~106 bit) arithmetic used by the complex embedding.
//!
//! Only the handful of operations the embedding needs: error-free
//! add/mul transforms, conversion from exact rationals, and sin/cos of
//! 2πx for rational x via exact octant reduction plus Taylor series.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;

#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// 2π split into leading and trailing parts.
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact rational to double-double: leading f64 plus the rounded remainder.
    pub fn from_rational(q: &BigRational) -> Dd {
        let hi = q.to_f64().unwrap_or(0.0);
        if !hi.is_finite() {
            return Dd { hi, lo: 0.0 };
        }
        let rem = q - BigRational::from_float(hi).unwrap_or_else(|| BigRational::from(BigInt::from(0)));
        let lo = rem.to_f64().unwrap_or(0.0);
        Dd { hi, lo }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// sin and cos of θ = 2πx by Taylor series; requires |x| ≤ 1/8 so |θ| ≤ π/4.
fn sincos_taylor(x: Dd) -> (Dd, Dd) {
    let theta = Dd::TWO_PI.mul(x);
    let t2 = theta.mul(theta).neg();
    let mut sin = theta;
    let mut cos = Dd::ONE;
    let mut sterm = theta;
    let mut cterm = Dd::ONE;
    for k in 1..24u32 {
        let n = 2 * k;
        cterm = cterm.mul(t2).mul(Dd::from_f64(1.0 / ((n - 1) as f64 * n as f64)));
        cos = cos.add(cterm);
        sterm = sterm.mul(t2).mul(Dd::from_f64(1.0 / (n as f64 * (n + 1) as f64)));
        sin = sin.add(sterm);
        if cterm.hi.abs() < 1e-36 && sterm.hi.abs() < 1e-36 {
            break;
        }
    }
    (cos, sin)
}

/// (cos, sin) of 2πx for an exact rational x, reduced exactly to an octant.
pub fn cos_sin_2pi(x: &BigRational) -> (Dd, Dd) {
    use num::Signed;
    // reduce x mod 1 into [0, 1)
    let mut x = x - x.floor();
    if x.is_negative() {
        x += BigRational::from(BigInt::from(1));
    }
    // quadrant q = floor(4x), remainder r in [0, 1/4)
    let four_x = &x * BigRational::from(BigInt::from(4));
    let q = four_x.floor();
    let r = (&four_x - &q) / BigRational::from(BigInt::from(4));
    let quadrant = (q.to_integer() % BigInt::from(4))
        .to_i64()
        .unwrap()
        .rem_euclid(4);
    let eighth = BigRational::new(BigInt::from(1), BigInt::from(8));
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let (c, s) = if r > eighth {
        // cos(2πr) = sin(2π(1/4 - r)), sin(2πr) = cos(2π(1/4 - r))
        let r2 = &quarter - &r;
        let (c2, s2) = sincos_taylor(Dd::from_rational(&r2));
        (s2, c2)
    } else {
        sincos_taylor(Dd::from_rational(&r))
    };
    match quadrant {
        0 => (c, s),
        1 => (s.neg(), c),
        2 => (c.neg(), s.neg()),
        _ => (s, c.neg()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::bigint::BigInt;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn roots_of_unity_match_f64_trig() {
        for m in [1i64, 2, 3, 4, 5, 7, 8, 12, 24, 120] {
            for k in 0..m {
                let (c, s) = cos_sin_2pi(&rat(k, m));
                let theta = 2.0 * std::f64::consts::PI * (k as f64) / (m as f64);
                assert!((c.to_f64() - theta.cos()).abs() < 1e-14, "cos {k}/{m}");
                assert!((s.to_f64() - theta.sin()).abs() < 1e-14, "sin {k}/{m}");
            }
        }
    }

    #[test]
    fn exact_special_angles() {
        let (c, s) = cos_sin_2pi(&rat(1, 4));
        assert_eq!(c.to_f64(), 0.0);
        assert_eq!(s.to_f64(), 1.0);
        let (c, s) = cos_sin_2pi(&rat(1, 2));
        assert_eq!(c.to_f64(), -1.0);
        assert_eq!(s.to_f64(), 0.0);
        // cos(2π/3) = -1/2 exactly representable
        let (c, _) = cos_sin_2pi(&rat(1, 3));
        assert!((c.to_f64() + 0.5).abs() < 1e-30);
    }

    #[test]
    fn negative_arguments_reduce() {
        let (c1, s1) = cos_sin_2pi(&rat(-1, 3));
        let (c2, s2) = cos_sin_2pi(&rat(2, 3));
        assert!((c1.to_f64() - c2.to_f64()).abs() < 1e-30);
        assert!((s1.to_f64() - s2.to_f64()).abs() < 1e-30);
    }
}
