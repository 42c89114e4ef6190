use std::sync::Arc;

use nalgebra::{Point3, Unit, Vector3};
use slb_core::color::{LinearImage, Rgb};
use slb_core::{Mesh, Pose};

use crate::env::EnvironmentMap;
use crate::material::MaterialParams;
use crate::sticker::StickerSpec;

/// Constant ambient level used by the Phong path.
pub const DEFAULT_AMBIENT: f32 = 0.3;
pub const DEFAULT_LIGHT_RADIANCE: f32 = 0.8;

#[derive(Clone, Debug)]
pub struct RenderObject {
    pub mesh: Arc<Mesh>,
    pub pose: Pose,
    pub class_id: u16,
    pub instance_id: u16,
    pub material: MaterialParams,
    pub sticker: Option<StickerSpec>,
}

/// Support plane drawn as unlabeled geometry.
#[derive(Clone, Debug)]
pub struct PlaneSpec {
    /// Unit normal facing the camera.
    pub normal: Unit<Vector3<f64>>,
    pub point: Point3<f64>,
    /// sRGB texture tiled over the plane; `None` draws it in `color`.
    pub texture: Option<Arc<image::RgbImage>>,
    pub color: Rgb,
    /// Edge length in meters of one texture repeat.
    pub tile_size: f64,
    pub material: MaterialParams,
}

impl PlaneSpec {
    pub fn new(normal: Unit<Vector3<f64>>, point: Point3<f64>) -> Self {
        Self {
            normal,
            point,
            texture: None,
            color: slb_core::mesh::MID_GRAY,
            tile_size: 0.5,
            material: MaterialParams::phong(),
        }
    }

    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&(p - self.point))
    }
}

/// Light arriving from `direction` (unit, surface to light).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalLight {
    pub direction: Unit<Vector3<f64>>,
    pub radiance: Rgb,
}

impl Default for DirectionalLight {
    fn default() -> Self {
        Self {
            direction: Unit::new_normalize(Vector3::new(0.3, -0.6, -1.0)),
            radiance: [DEFAULT_LIGHT_RADIANCE; 3],
        }
    }
}

/// Optional stages of the renderer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderFlags {
    pub stickers: bool,
    pub ssao: bool,
    /// Cook–Torrance shading with image-based lighting; Phong with constant ambient when off.
    pub pbr: bool,
}

impl RenderFlags {
    pub const ALL: Self = Self {
        stickers: true,
        ssao: true,
        pbr: true,
    };
    pub const NONE: Self = Self {
        stickers: false,
        ssao: false,
        pbr: false,
    };
}

impl Default for RenderFlags {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Clone, Debug, Default)]
pub struct RenderScene {
    pub objects: Vec<RenderObject>,
    pub plane: Option<PlaneSpec>,
    pub light: DirectionalLight,
    pub ambient: Option<f32>,
    pub environment: Option<Arc<EnvironmentMap>>,
    /// Linear background already sized to the frame; other sizes are rescaled.
    pub background: Option<Arc<LinearImage>>,
}

impl RenderScene {
    pub fn ambient(&self) -> f32 {
        self.ambient.unwrap_or(DEFAULT_AMBIENT)
    }
}

/// Scales `image` to cover `width × height` and crops the centre, then decodes to linear.
///
/// An image that already has the target size is decoded texel for texel.
pub fn fit_background(image: &image::RgbImage, width: u32, height: u32) -> LinearImage {
    if image.width() == width && image.height() == height {
        return LinearImage::from_srgb8(image);
    }
    fit_background_linear(&LinearImage::from_srgb8(image), width, height)
}

/// Cover-scale and centre-crop of a linear image with bilinear filtering.
pub fn fit_background_linear(src: &LinearImage, width: u32, height: u32) -> LinearImage {
    let image = src;
    let scale = (width as f64 / image.width() as f64).max(height as f64 / image.height() as f64);
    let ox = 0.5 * (image.width() as f64 * scale - width as f64);
    let oy = 0.5 * (image.height() as f64 * scale - height as f64);
    let mut out = LinearImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let sx = (x as f64 + 0.5 + ox) / scale - 0.5;
            let sy = (y as f64 + 0.5 + oy) / scale - 0.5;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (tx, ty) = ((sx - x0) as f32, (sy - y0) as f32);
            let (x0, y0) = (x0 as i64, y0 as i64);
            let p00 = src.get_clamped(x0, y0);
            let p10 = src.get_clamped(x0 + 1, y0);
            let p01 = src.get_clamped(x0, y0 + 1);
            let p11 = src.get_clamped(x0 + 1, y0 + 1);
            out.set(
                x,
                y,
                [0, 1, 2].map(|c| {
                    let top = p00[c] * (1.0 - tx) + p10[c] * tx;
                    let bot = p01[c] * (1.0 - tx) + p11[c] * tx;
                    top * (1.0 - ty) + bot * ty
                }),
            );
        }
    }
    out
}
