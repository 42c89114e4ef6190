use nalgebra::{Point3, Vector3};

/// Pinhole camera at the origin looking along +z, with +x right and +y down.
///
/// Pixel `(i, j)` covers `[i, i+1) × [j, j+1)`; its centre is sampled at
/// `(i + 0.5, j + 0.5)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PinholeCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub near: f64,
    pub far: f64,
}

impl PinholeCamera {
    /// Camera with a horizontal field of view (radians) and centred principal point.
    pub fn with_fov(width: u32, height: u32, hfov: f64) -> Self {
        let f = 0.5 * width as f64 / (0.5 * hfov).tan();
        Self {
            fx: f,
            fy: f,
            cx: 0.5 * width as f64,
            cy: 0.5 * height as f64,
            width,
            height,
            near: 0.05,
            far: 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            ));
        }
        if !(self.near > 0.0 && self.near < self.far && self.far.is_finite()) {
            return Err(format!(
                "need 0 < near < far, got near={} far={}",
                self.near, self.far
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err("image size must be non-zero".into());
        }
        Ok(())
    }

    /// `(u, v, Z)` for a camera-frame point.
    #[inline]
    pub fn project(&self, p: &Point3<f64>) -> (f64, f64, f64) {
        (
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
            p.z,
        )
    }

    /// Camera-frame point at depth `z` seen at continuous pixel position `(u, v)`.
    #[inline]
    pub fn unproject(&self, u: f64, v: f64, z: f64) -> Point3<f64> {
        Point3::new((u - self.cx) / self.fx * z, (v - self.cy) / self.fy * z, z)
    }

    /// Ray direction through the centre of pixel `(i, j)`, with unit z component.
    #[inline]
    pub fn pixel_ray(&self, i: u32, j: u32) -> Vector3<f64> {
        Vector3::new(
            (i as f64 + 0.5 - self.cx) / self.fx,
            (j as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        )
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}
