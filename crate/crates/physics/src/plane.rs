use nalgebra::{Point3, Unit, Vector3};
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, TAU};

/// Camera looks along +z.
pub const CAMERA_FORWARD: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);

/// Infinite support plane in camera coordinates. The normal points toward the camera.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportPlane {
    pub normal: Unit<Vector3<f64>>,
    pub support_point: Point3<f64>,
}

impl SupportPlane {
    /// Plane through `(0, 0, d)`. A normal facing away from the camera is flipped.
    pub fn new(normal: Vector3<f64>, d: f64) -> Self {
        let mut normal = Unit::new_normalize(normal);
        if normal.dot(&CAMERA_FORWARD) > 0.0 {
            normal = -normal;
        }
        Self {
            normal,
            support_point: Point3::new(0.0, 0.0, d),
        }
    }

    pub fn horizontal(d: f64) -> Self {
        Self::new(-CAMERA_FORWARD, d)
    }

    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&(p - self.support_point))
    }

    /// Orthonormal in-plane basis `(u, w)` with `u × w = n`.
    pub fn tangent_basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        crate::tangent_basis(&self.normal)
    }

    /// Ray from the camera origin through `dir`; returns the hit distance if in front.
    pub fn intersect_ray(&self, dir: &Vector3<f64>) -> Option<f64> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = self.normal.dot(&self.support_point.coords) / denom;
        (t > 0.0).then_some(t)
    }
}

/// Samples a normal uniformly (by solid angle) within `tilt_max` of `-CAMERA_FORWARD`
/// and a distance uniform in `d_range`.
pub fn sample_support_plane<R: Rng + ?Sized>(
    rng: &mut R,
    d_range: (f64, f64),
    tilt_max: f64,
) -> SupportPlane {
    debug_assert!(d_range.0 > 0.0 && d_range.1 >= d_range.0);
    debug_assert!((0.0..FRAC_PI_2).contains(&tilt_max));
    let cos_max = tilt_max.cos();
    let cos_t = 1.0 - rng.random::<f64>() * (1.0 - cos_max);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = rng.random::<f64>() * TAU;
    let d = if d_range.1 > d_range.0 {
        rng.random_range(d_range.0..=d_range.1)
    } else {
        d_range.0
    };
    let n = Vector3::new(sin_t * phi.cos(), sin_t * phi.sin(), -cos_t);
    SupportPlane::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_tilt_is_straight_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sample_support_plane(&mut rng, (0.5, 1.5), 0.0);
        assert_eq!(p.normal.into_inner(), Vector3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn flip_rule_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100_000 {
            let p = sample_support_plane(&mut rng, (0.5, 1.5), 1.5);
            assert!(p.normal.dot(&CAMERA_FORWARD) < 0.0);
            assert!((p.normal.norm() - 1.0).abs() <= 1e-9);
            assert!((0.5..=1.5).contains(&p.support_point.z));
        }
        let a = sample_support_plane(&mut ChaCha8Rng::seed_from_u64(42), (0.5, 1.5), 0.5);
        let b = sample_support_plane(&mut ChaCha8Rng::seed_from_u64(42), (0.5, 1.5), 0.5);
        assert_eq!(a, b);
    }

    #[test]
    fn away_facing_normal_is_flipped() {
        let p = SupportPlane::new(Vector3::new(0.1, 0.0, 1.0), 1.0);
        assert!(p.normal.z < 0.0);
        assert!(p.signed_distance(&Point3::origin()) > 0.0);
    }
}
