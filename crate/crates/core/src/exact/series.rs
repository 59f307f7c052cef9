//! Truncated formal power series with coefficients in any scalar ring.
//!
//! Arithmetic truncates consistently: coefficient k of a product depends
//! only on coefficients ≤ k of the factors.

use super::{ExactError, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries<T> {
    n_max: usize,
    coeffs: Vec<T>, // indexed 0..=n_max
}

impl<T: Scalar> FormalSeries<T> {
    pub fn zero(n_max: usize) -> Self {
        FormalSeries { n_max, coeffs: vec![T::zero(); n_max + 1] }
    }

    pub fn one(n_max: usize) -> Self {
        let mut s = Self::zero(n_max);
        s.coeffs[0] = T::one();
        s
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        FormalSeries { n_max: coeffs.len() - 1, coeffs }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coeff(&self, k: usize) -> &T {
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, v: T) {
        self.coeffs[k] = v;
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactError> {
        if self.n_max != other.n_max {
            return Err(ExactError::SeriesOrderMismatch(self.n_max, other.n_max));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.clone() + b)
            .collect();
        Ok(FormalSeries { n_max: self.n_max, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ExactError> {
        if self.n_max != other.n_max {
            return Err(ExactError::SeriesOrderMismatch(self.n_max, other.n_max));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.clone() - b)
            .collect();
        Ok(FormalSeries { n_max: self.n_max, coeffs })
    }

    /// Cauchy product truncated at n_max.
    pub fn mul(&self, other: &Self) -> Result<Self, ExactError> {
        if self.n_max != other.n_max {
            return Err(ExactError::SeriesOrderMismatch(self.n_max, other.n_max));
        }
        let mut out = Self::zero(self.n_max);
        for k in 0..=self.n_max {
            let mut acc = T::zero();
            for i in 0..=k {
                acc = acc + &(self.coeffs[i].clone() * &other.coeffs[k - i]);
            }
            out.coeffs[k] = acc;
        }
        Ok(out)
    }

    /// Multiplicative inverse; requires an invertible constant term.
    pub fn inverse(&self) -> Result<Self, ExactError> {
        let c0 = self.coeffs[0].inv_opt().ok_or(ExactError::DivisionByZero)?;
        let mut out = Self::zero(self.n_max);
        out.coeffs[0] = c0.clone();
        for k in 1..=self.n_max {
            let mut acc = T::zero();
            for i in 1..=k {
                acc = acc + &(self.coeffs[i].clone() * &out.coeffs[k - i]);
            }
            out.coeffs[k] = (-acc) * &c0;
        }
        Ok(out)
    }

    /// Long division self/other; requires an invertible leading constant.
    pub fn div(&self, other: &Self) -> Result<Self, ExactError> {
        self.mul(&other.inverse()?)
    }

    pub fn truncate(&self, n_max: usize) -> Self {
        assert!(n_max <= self.n_max);
        FormalSeries { n_max, coeffs: self.coeffs[..=n_max].to_vec() }
    }

    /// Horner evaluation at a point of the coefficient ring.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::bigint::BigInt;
    use num::rational::BigRational;

    fn rat(a: i64) -> BigRational {
        BigRational::from(BigInt::from(a))
    }

    fn series(v: &[i64]) -> FormalSeries<BigRational> {
        FormalSeries::from_coeffs(v.iter().map(|&x| rat(x)).collect())
    }

    #[test]
    fn basic_product() {
        // (1+X)(1-X) = 1 - X^2 at n_max = 4
        let a = series(&[1, 1, 0, 0, 0]);
        let b = series(&[1, -1, 0, 0, 0]);
        assert_eq!(a.mul(&b).unwrap(), series(&[1, 0, -1, 0, 0]));
    }

    #[test]
    fn geometric_squared() {
        // (1/(1-X))^2 has coefficients k+1
        let g = series(&[1, 1, 1, 1, 1, 1]);
        let g2 = g.mul(&g).unwrap();
        assert_eq!(g2, series(&[1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn long_division_oracle() {
        // (1+X^2)/(1-X^2)^2 = 1 + 3X^2 + 5X^4 + 7X^6
        let num = series(&[1, 0, 1, 0, 0, 0, 0]);
        let den = series(&[1, 0, -2, 0, 1, 0, 0]);
        let q = num.div(&den).unwrap();
        assert_eq!(q, series(&[1, 0, 3, 0, 5, 0, 7]));
    }

    #[test]
    fn mismatched_orders_error() {
        let a = series(&[1, 1]);
        let b = series(&[1, 1, 1]);
        assert!(a.mul(&b).is_err());
    }
}
