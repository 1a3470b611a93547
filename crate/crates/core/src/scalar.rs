//! Scalar abstraction: the whole library is generic over the floating-point
//! type through this trait, with `f32` and `f64` instances.

use std::fmt::{Debug, Display};

use num_traits::Float;

/// Floating-point scalar the geometry and fitting code is generic over.
///
/// The associated tolerances are per-type because a meaningful "numerically
/// zero" differs between `f32` and `f64`; the documented library-wide
/// defaults (1e-9 relative, 1e-12 absolute, 1e-10 orthonormality) are the
/// `f64` values.
pub trait Scalar: Float + Debug + Display + Send + Sync + 'static {
    /// Orthonormality check threshold for flat/hyperbox bases.
    const ORTHO_TOL: Self;
    /// Default relative comparison tolerance.
    const REL_TOL: Self;
    /// Default absolute slack.
    const ABS_TOL: Self;
    /// Rank-deficiency threshold, relative to the largest vector norm.
    const RANK_TOL: Self;

    /// Lossless-for-f32, exact-for-f64 conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        num_traits::NumCast::from(x).expect("finite f64 literal converts to scalar")
    }

    /// Widening view used for hashing and reporting.
    fn as_f64(self) -> f64 {
        num_traits::NumCast::from(self).expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    const ORTHO_TOL: Self = 1e-10;
    const REL_TOL: Self = 1e-9;
    const ABS_TOL: Self = 1e-12;
    const RANK_TOL: Self = 1e-10;
}

impl Scalar for f32 {
    const ORTHO_TOL: Self = 1e-4;
    const REL_TOL: Self = 1e-4;
    const ABS_TOL: Self = 1e-6;
    const RANK_TOL: Self = 1e-4;
}

/// `a` and `b` agree within `REL_TOL` relative plus `ABS_TOL` absolute slack.
pub fn close<F: Scalar>(a: F, b: F) -> bool {
    let scale = a.abs().max(b.abs()).max(F::one());
    (a - b).abs() <= F::REL_TOL * scale + F::ABS_TOL
}

/// `a <= b` up to the default relative/absolute slack.
pub fn le_with_slack<F: Scalar>(a: F, b: F) -> bool {
    let scale = a.abs().max(b.abs()).max(F::one());
    a <= b + F::REL_TOL * scale + F::ABS_TOL
}

/// Ceiling of a count-valued expression, robust to the rounding of products
/// like 0.9 * 10 that are mathematically integral.
pub fn ceil_count<F: Scalar>(x: F) -> usize {
    let x = x.as_f64().max(0.0);
    let floor = x.floor();
    let guard = 1e-9 * x.max(1.0);
    if x - floor <= guard {
        floor as usize
    } else {
        floor as usize + 1
    }
}
