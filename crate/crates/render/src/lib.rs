//! CPU rasterizer producing shaded colour together with per-pixel class, instance,
//! depth, normal and object-coordinate channels.

pub mod brdf;
pub mod camera;
pub mod env;
pub mod frame;
pub mod material;
pub mod raster;
pub mod render;
pub mod scene;
pub mod shading;
pub mod ssao;
pub mod sticker;

pub use camera::PinholeCamera;
pub use env::EnvironmentMap;
pub use frame::{FrameBuffers, InstancePose, PlaneGeometry, ShadingTaps};
pub use material::{MaterialParams, ShadingMode};
pub use render::{render_frame, RenderError};
pub use scene::{DirectionalLight, PlaneSpec, RenderFlags, RenderObject, RenderScene};
pub use shading::{shade_cook_torrance, shade_phong, Shading};
pub use ssao::ssao_factor;
pub use sticker::StickerSpec;

use nalgebra::Vector3;

/// Orthonormal `(u, w)` completing `n` to a right-handed frame `(u, w, n)`.
pub fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = n.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vector3::x()
    } else if a.y <= a.z {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = n.cross(&axis).normalize();
    let w = n.cross(&u);
    (u, w)
}
