//! Exact arithmetic substrate: rationals, cyclotomic numbers, scaled
//! matrices, truncated formal power series, and the complex embedding.
//!
//! All values are immutable after construction and safe to share across
//! threads.

mod cyclotomic;
mod dd;
mod scaled;
mod series;

pub use cyclotomic::Cyclotomic;
pub(crate) use cyclotomic::lcm_u32;
pub use scaled::{ScaledMatrix, ScaledVector, SqrtMatrix, SqrtScalar};
pub use series::FormalSeries;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field norm did not reduce to a rational")]
    NormNotRational,
    #[error("value carries an odd half power of the radicand")]
    OddHalfPower,
    #[error("value is not rational")]
    IrrationalValue,
    #[error("series order mismatch: {0} vs {1}")]
    SeriesOrderMismatch(usize, usize),
}

/// e(a/M): the root of unity exp(2πi·a/M) as an exact cyclotomic.
pub fn root_of_unity(a: i64, m: u32) -> Cyclotomic {
    Cyclotomic::root_of_unity(a, m)
}

/// Numeric value of an exact cyclotomic.
pub fn embed_complex(x: &Cyclotomic, precision_bits: u32) -> Complex64 {
    x.embed(precision_bits)
}

/// Truncated Cauchy product (same order bound on both sides).
pub fn series_mul<T: Scalar>(
    a: &FormalSeries<T>,
    b: &FormalSeries<T>,
) -> Result<FormalSeries<T>, ExactError> {
    a.mul(b)
}

/// Minimal scalar-field interface shared by exact rationals and complex
/// floats; lets series and character code run in either mode.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + for<'a> std::ops::Add<&'a Self, Output = Self>
    + for<'a> std::ops::Sub<&'a Self, Output = Self>
    + for<'a> std::ops::Mul<&'a Self, Output = Self>
{
    fn inv_opt(&self) -> Option<Self>;
    fn from_rational(r: &BigRational) -> Self;
}

impl Scalar for BigRational {
    fn inv_opt(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

impl Scalar for Complex64 {
    fn inv_opt(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

/// Shorthand for small exact rationals.
pub fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Reduce a rational into [0, 1).
pub fn frac_mod1(q: &BigRational) -> BigRational {
    use num::Signed;
    let mut r = q - q.floor();
    if r.is_negative() {
        r += BigRational::one();
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn root_of_unity_examples() {
        assert_eq!(root_of_unity(1, 2), Cyclotomic::from_int(-1, 2));
        let sum = root_of_unity(1, 3).add(&root_of_unity(2, 3));
        assert_eq!(sum, Cyclotomic::from_int(-1, 3));
        assert_eq!(root_of_unity(1, 8).conj(), root_of_unity(7, 8));
    }

    fn random_element(rng: &mut impl Rng, m: u32) -> Cyclotomic {
        let mut x = Cyclotomic::zero(m);
        for _ in 0..rng.gen_range(1..4) {
            let k = rng.gen_range(0..m as i64);
            let num = rng.gen_range(-6i64..=6);
            let den = rng.gen_range(1i64..=4);
            x = x.add(&Cyclotomic::root_of_unity(k, m).scale(&rat(num, den)));
        }
        x
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let conductors = [1u32, 2, 3, 8, 12, 24, 40, 60, 120];
        for trial in 0..1000 {
            let m = conductors[trial % conductors.len()];
            let a = random_element(&mut rng, m);
            let b = random_element(&mut rng, m);
            let c = random_element(&mut rng, m);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            assert_eq!(a.mul(&b), b.mul(&a));
        }
    }

    #[test]
    fn inverses_on_random_elements() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for trial in 0..60 {
            let m = [3u32, 8, 12, 20, 120][trial % 5];
            let x = random_element(&mut rng, m);
            if x.is_zero() {
                continue;
            }
            let inv = x.inverse().unwrap();
            assert_eq!(x.mul(&inv), Cyclotomic::one(m));
        }
    }

    #[test]
    fn conjugation_is_multiplicative_and_norms_nonnegative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for trial in 0..200 {
            let m = [3u32, 8, 24, 120][trial % 4];
            let x = random_element(&mut rng, m);
            let y = random_element(&mut rng, m);
            assert_eq!(x.mul(&y).conj(), x.conj().mul(&y.conj()));
            let n = x.mul(&x.conj()).embed(53);
            assert!(n.re >= -1e-12);
            assert!(n.im.abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn embedding_respects_products(k1 in 0i64..24, k2 in 0i64..24) {
            let a = root_of_unity(k1, 24);
            let b = root_of_unity(k2, 24);
            let lhs = a.mul(&b).embed(53);
            let rhs = a.embed(53) * b.embed(53);
            prop_assert!((lhs - rhs).norm() < 1e-13);
        }
    }
}
