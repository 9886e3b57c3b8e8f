//! Real scalar abstraction shared by every numeric module.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the crate is generic over (`f32` or `f64`).
///
/// Complex quantities are always `Complex<T>` for the same `T`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Embeds a real scalar as a complex number.
#[inline]
pub fn cx<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Tolerance scaled to the precision of `T`: `target` for `f64`, coarser for `f32`.
#[inline]
pub fn tol_for<T: Real>(target: f64) -> T {
    let eps = to_f64(T::default_epsilon());
    lit(target.max(eps * 64.0))
}
