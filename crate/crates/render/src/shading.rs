//! Surface shading split into a direct part and an occludable ambient part.

use nalgebra::Vector3;
use slb_core::color::Rgb;

use crate::brdf::{self, MIN_COS};
use crate::env::EnvironmentMap;
use crate::material::MaterialParams;
use crate::scene::DirectionalLight;

pub const PHONG_SPECULAR: f64 = 0.1;
pub const PHONG_SHININESS: f64 = 32.0;

/// Outgoing radiance; `ambient` is the part scaled by ambient occlusion.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Shading {
    pub direct: Rgb,
    pub ambient: Rgb,
}

impl Shading {
    pub fn total(&self) -> Rgb {
        [0, 1, 2].map(|c| self.direct[c] + self.ambient[c])
    }
}

fn to_rgb(v: Vector3<f64>) -> Rgb {
    [
        v.x.max(0.0) as f32,
        v.y.max(0.0) as f32,
        v.z.max(0.0) as f32,
    ]
}

fn vec(c: Rgb) -> Vector3<f64> {
    Vector3::new(c[0] as f64, c[1] as f64, c[2] as f64)
}

/// Blinn–Phong with one directional light and constant ambient `ambient·albedo`.
pub fn shade_phong(
    n: &Vector3<f64>,
    v: &Vector3<f64>,
    light: &DirectionalLight,
    albedo: Rgb,
    ambient: f32,
) -> Shading {
    let a = vec(albedo);
    let l = light.direction.into_inner();
    let n_l = n.dot(&l);
    let direct = if n_l > 0.0 {
        let spec = PHONG_SPECULAR * brdf::blinn_phong(n, v, &l, PHONG_SHININESS);
        vec(light.radiance).component_mul(&(a * n_l + Vector3::repeat(spec)))
    } else {
        Vector3::zeros()
    };
    Shading {
        direct: to_rgb(direct),
        ambient: to_rgb(a * ambient as f64),
    }
}

/// Cook–Torrance shading of directional lights plus image-based lighting.
///
/// Light radiance is scaled so a white Lambertian surface facing the light returns the
/// radiance itself, matching the Phong path. Without an environment the ambient term is
/// the constant `ambient·albedo`.
pub fn shade_cook_torrance(
    n: &Vector3<f64>,
    v: &Vector3<f64>,
    lights: &[DirectionalLight],
    albedo: Rgb,
    material: &MaterialParams,
    env: Option<&EnvironmentMap>,
    ambient: f32,
) -> Shading {
    let a = vec(albedo);
    let m = material.metalness() as f64;
    let r = material.roughness() as f64;
    let mut direct = Vector3::zeros();
    for light in lights {
        let l = light.direction.into_inner();
        let n_l = n.dot(&l);
        if n_l <= 0.0 {
            continue;
        }
        let (spec, diff) = brdf::cook_torrance(n, v, &l, &a, m, r);
        direct += (spec + diff).component_mul(&vec(light.radiance)) * (std::f64::consts::PI * n_l);
    }
    let ambient = match env {
        Some(env) => {
            let n_v = n.dot(v).max(MIN_COS);
            let f0 = brdf::base_reflectance(&a, m);
            let fr = f0.map(|c| brdf::fresnel_schlick_roughness(c, n_v, r));
            let e = vec(env.irradiance(n));
            let diffuse = Vector3::from_fn(|i, _| {
                (1.0 - fr[i]) * (1.0 - m) * a[i] * e[i] / std::f64::consts::PI
            });
            let refl = n * (2.0 * n.dot(v)) - v;
            let pre = vec(env.specular(&refl, r as f32));
            let (sa, sb) = brdf::dfg(n_v, r);
            direct += pre.component_mul(&(f0 * sa + Vector3::repeat(sb)));
            diffuse
        }
        None => a * ambient as f64,
    };
    Shading {
        direct: to_rgb(direct),
        ambient: to_rgb(ambient),
    }
}
