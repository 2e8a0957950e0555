use std::fmt::{Debug, Display};

use num_traits::Float;

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Exact quantities (path counts, type-class cardinalities, factorial
/// products) are always integer-typed; only measures, entropies and rate
/// values carry this scalar.
pub trait Scalar: Float + Debug + Display + Default + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + Debug + Display + Default + Send + Sync + 'static {}

/// Converts an `f64` constant into the working scalar.
pub(crate) fn real<F: Scalar>(x: f64) -> F {
    F::from(x).expect("constant must be representable in the scalar type")
}

/// Absolute tolerance for sum-to-one validation: 1e-12 at f64 precision,
/// widened to 64 ulps for narrower scalars.
pub fn sum_tolerance<F: Scalar>() -> F {
    real::<F>(1e-12).max(F::epsilon() * real(64.0))
}

/// Absolute tolerance per stationarity constraint (same scale as
/// [`sum_tolerance`]).
pub fn stationarity_tolerance<F: Scalar>() -> F {
    sum_tolerance()
}

/// Relative tolerance for comparing two analytically equal formulas.
pub fn cross_check_rel_tolerance<F: Scalar>() -> F {
    real::<F>(1e-12).max(F::epsilon() * real(256.0))
}

/// Returns true when `a` and `b` agree within the cross-check tolerance
/// (relative, with a small absolute floor).
pub fn cross_check_close<F: Scalar>(a: F, b: F) -> bool {
    if a == b {
        // covers equal infinities
        return true;
    }
    let rel = cross_check_rel_tolerance::<F>();
    let floor = real::<F>(1e-14).max(F::epsilon() * real(4.0));
    (a - b).abs() <= rel * a.abs().max(b.abs()) + floor
}
