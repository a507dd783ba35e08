//! Floating-point scalar abstraction for the numeric core.
//!
//! Everything numerical in this crate is generic over a real scalar type;
//! complex entries are `num_complex::Complex<T>`. The crate root exposes f64
//! aliases, which is what the command-line tools and the verification suites
//! instantiate.

use num_complex::Complex;

/// Real scalar underlying all matrix entries and tolerances.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from f64, used for literal constants and tolerances.
    fn from_f64(x: f64) -> Self;

    /// Widening conversion used when reporting deviations.
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }
}

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;

/// Complex zero.
pub fn czero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Complex one.
pub fn cone<T: Scalar>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// Purely real complex value.
pub fn creal<T: Scalar>(x: f64) -> C<T> {
    Complex::new(T::from_f64(x), T::zero())
}

/// Purely imaginary complex value.
pub fn cimag<T: Scalar>(x: f64) -> C<T> {
    Complex::new(T::zero(), T::from_f64(x))
}

/// Unit phase e^{i phi}.
pub fn cphase<T: Scalar>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}
