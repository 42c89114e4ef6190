//! Orthographic decals projected onto objects, evaluated per fragment in the object frame.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{Point3, Unit, Vector3};
use rand::Rng;
use slb_core::color::{decode_srgb8, Rgb};

/// Sticker size range as a fraction of the object's bounding-sphere diameter.
pub const SIZE_RANGE: (f64, f64) = (0.1, 0.5);

#[derive(Clone, Debug)]
pub struct StickerSpec {
    pub image: Arc<image::RgbImage>,
    /// Projector axis in the object frame, pointing toward the object.
    pub direction: Unit<Vector3<f64>>,
    /// In-plane rotation of the rectangle, radians.
    pub rotation: f64,
    pub center: Point3<f64>,
    /// Half extents of the projected rectangle along the rotated image axes, meters.
    pub half_extents: (f64, f64),
}

impl StickerSpec {
    /// Random placement about the bounding sphere `(center, radius)`: uniform direction,
    /// uniform rotation, longer side drawn from [`SIZE_RANGE`] of the diameter.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        image: Arc<image::RgbImage>,
        center: Point3<f64>,
        radius: f64,
    ) -> Self {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..TAU);
        let s = (1.0 - z * z).max(0.0).sqrt();
        let direction = Unit::new_normalize(Vector3::new(s * phi.cos(), s * phi.sin(), z));
        let rotation = rng.random_range(0.0..TAU);
        let long = rng.random_range(SIZE_RANGE.0..=SIZE_RANGE.1) * 2.0 * radius;
        let (w, h) = (image.width().max(1) as f64, image.height().max(1) as f64);
        let half_extents = if w >= h {
            (0.5 * long, 0.5 * long * h / w)
        } else {
            (0.5 * long * w / h, 0.5 * long)
        };
        Self {
            image,
            direction,
            rotation,
            center,
            half_extents,
        }
    }

    fn axes(&self) -> (Vector3<f64>, Vector3<f64>) {
        let (u, w) = crate::tangent_basis(&self.direction);
        let (s, c) = self.rotation.sin_cos();
        (u * c + w * s, w * c - u * s)
    }

    /// Linear sticker color at object-frame point `p` with object-frame normal `n`, if the
    /// point faces the projector and falls inside the rectangle.
    pub fn texel(&self, p: &Point3<f64>, n: &Vector3<f64>) -> Option<Rgb> {
        if n.dot(&self.direction) >= 0.0 {
            return None;
        }
        let (a, b) = self.axes();
        let r = p - self.center;
        let s = r.dot(&a) / (2.0 * self.half_extents.0) + 0.5;
        let t = r.dot(&b) / (2.0 * self.half_extents.1) + 0.5;
        if !(0.0..1.0).contains(&s) || !(0.0..1.0).contains(&t) {
            return None;
        }
        let (w, h) = (self.image.width(), self.image.height());
        let x = ((s * w as f64) as u32).min(w - 1);
        let y = ((t * h as f64) as u32).min(h - 1);
        Some(decode_srgb8(self.image.get_pixel(x, y).0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn only_front_faces_receive_the_decal() {
        let img = Arc::new(image::RgbImage::from_pixel(4, 2, image::Rgb([0, 0, 0])));
        let st = StickerSpec {
            image: img,
            direction: Vector3::z_axis(),
            rotation: 0.3,
            center: Point3::origin(),
            half_extents: (0.5, 0.25),
        };
        let p = Point3::new(0.0, 0.0, -1.0);
        assert_eq!(st.texel(&p, &-Vector3::z()), Some([0.0; 3]));
        assert_eq!(st.texel(&Point3::new(0.0, 0.0, 1.0), &Vector3::z()), None);
        assert_eq!(st.texel(&Point3::new(2.0, 0.0, -1.0), &-Vector3::z()), None);
    }

    #[test]
    fn random_placement_respects_size_range() {
        let img = Arc::new(image::RgbImage::new(20, 10));
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..100 {
            let st = StickerSpec::random(&mut rng, img.clone(), Point3::origin(), 0.1);
            let long = 2.0 * st.half_extents.0;
            assert!((0.02 - 1e-12..=0.1 + 1e-12).contains(&long));
            assert!((st.half_extents.1 * 2.0 - st.half_extents.0).abs() < 1e-12);
        }
    }
}
