//! Scalar abstraction over the two field types the solver supports:
//! real (`f64`) for elliptic problems and complex (`Complex64`) for
//! Helmholtz problems.

pub use num_complex::Complex64;

/// Field of a problem: `f64` or [`Complex64`].
///
/// Everything the pipeline needs beyond arithmetic lives in nalgebra's
/// `ComplexField` (conjugation, modulus, square roots); this trait only
/// adds conversions and a compile-time tag used to pick solver paths.
pub trait Scalar:
    nalgebra::ComplexField<RealField = f64> + Copy + Send + Sync + 'static
{
    /// True for `Complex64`; selects complex-symmetric (LU) factorization
    /// paths instead of LDLT.
    const IS_COMPLEX: bool;

    /// Embed a real number.
    fn from_re(x: f64) -> Self;

    /// View as a complex number (exact for both fields).
    fn to_c64(self) -> Complex64;

    /// Build from a complex number; errors at the call site must guarantee
    /// `z.im == 0` when `Self = f64`. Used by assembly where coefficient
    /// data is complex-valued only for complex problems.
    fn from_c64(z: Complex64) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn from_re(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    #[inline]
    fn from_c64(z: Complex64) -> Self {
        debug_assert_eq!(z.im, 0.0, "imaginary data assigned to a real problem");
        z.re
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    #[inline]
    fn to_c64(self) -> Complex64 {
        self
    }

    #[inline]
    fn from_c64(z: Complex64) -> Self {
        z
    }
}

/// Conjugated dot product `sum_i conj(a_i) b_i`.
pub fn dotc<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x.conjugate() * y;
    }
    acc
}

/// Unconjugated dot product `sum_i a_i b_i`.
pub fn dotu<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Euclidean norm.
pub fn norm2<F: Scalar>(a: &[F]) -> f64 {
    a.iter().map(|&x| x.modulus_squared()).sum::<f64>().sqrt()
}
