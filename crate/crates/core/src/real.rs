//! Scalar abstraction shared by the geometry code.

use nalgebra as na;
use num_traits as nt;

/// Floating point scalar usable by the mesh and shading math (`f32` or `f64`).
pub trait Real:
    na::RealField + Copy + nt::FromPrimitive + nt::ToPrimitive + nt::FloatConst
{
    /// Relative tolerance used for geometric predicates at this precision.
    const GEOMETRIC_EPSILON: f64;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(value: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(value).expect("finite literal")
    }

    /// Widens the value to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).expect("representable in f64")
    }
}

impl Real for f32 {
    const GEOMETRIC_EPSILON: f64 = 1e-5;
}

impl Real for f64 {
    const GEOMETRIC_EPSILON: f64 = 1e-12;
}

/// Converts between two scalar types through `f64`.
#[inline]
pub fn cast<A: Real, B: Real>(value: A) -> B {
    B::lit(value.as_f64())
}

#[inline]
pub fn cast_point<A: Real, B: Real>(p: &na::Point3<A>) -> na::Point3<B> {
    na::Point3::new(cast(p.x), cast(p.y), cast(p.z))
}

#[inline]
pub fn cast_vector<A: Real, B: Real>(v: &na::Vector3<A>) -> na::Vector3<B> {
    na::Vector3::new(cast(v.x), cast(v.y), cast(v.z))
}
