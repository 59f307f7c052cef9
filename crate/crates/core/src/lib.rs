//! Exact-arithmetic library for discriminant forms of even lattices, their
//! Gauss sums and quadratic characters, the local Weil representation at odd
//! primes, the vector-valued spherical Hecke algebra with its Satake theory,
//! and the resulting standard zeta and L-functions.
//!
//! All identities that are algebraic are verified as exact matrix or formal
//! power series identities over cyclotomic fields; numeric evaluation is
//! used only where analytic continuation genuinely requires it.

pub mod exact;
pub mod fqm;
pub mod gauss;
pub mod heckelocal;
pub mod lfun;
pub mod modp;
pub mod satake;
pub mod verify;
pub mod weil;

pub use exact::{Cyclotomic, FormalSeries, ScaledMatrix, SqrtMatrix, SqrtScalar};
pub use fqm::{FiniteQuadraticModule, GramMatrix};
pub use gauss::GaussSumValue;
pub use heckelocal::{CartanForm, HeckeElement, LambdaIndex};
pub use lfun::{EigenvalueTable, LocalLFactor, ZetaSign};
pub use satake::{ComplexCharacter, RationalCharacter, SatakeTable};
pub use weil::{KpElement, LocalSpace, QpElement};
