//! Direct numerical integration of the metal/rough microfacet BRDF.
//!
//! `alpha = roughness²`; GGX distribution, height-correlated Smith masking, Schlick
//! Fresnel with `F0 = mix(0.04, albedo, metalness)`, and a diffuse lobe
//! `(1 - F)(1 - metalness)·albedo/π`.

use std::f64::consts::PI;

use crate::{add, dot, normalize, V3};

fn ggx(n_h: f64, alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let d = n_h * n_h * (a2 - 1.0) + 1.0;
    a2 / (PI * d * d)
}

fn lambda(cos: f64, alpha: f64) -> f64 {
    let tan2 = (1.0 - cos * cos).max(0.0) / (cos * cos);
    0.5 * (-1.0 + (1.0 + alpha * alpha * tan2).sqrt())
}

/// `(specular, diffuse)` BRDF values for one channel; normal is +z.
pub fn brdf(view: V3, light: V3, albedo: f64, metalness: f64, roughness: f64) -> (f64, f64) {
    let n = [0.0, 0.0, 1.0];
    let alpha = roughness * roughness;
    let h = normalize(add(view, light));
    let (nv, nl, nh, vh) = (dot(n, view), dot(n, light), dot(n, h), dot(view, h));
    if nv <= 0.0 || nl <= 0.0 {
        return (0.0, 0.0);
    }
    let f0 = 0.04 * (1.0 - metalness) + albedo * metalness;
    let f = f0 + (1.0 - f0) * (1.0 - vh).powi(5);
    let g = 1.0 / (1.0 + lambda(nv, alpha) + lambda(nl, alpha));
    let spec = ggx(nh, alpha) * g * f / (4.0 * nl * nv);
    let diffuse = (1.0 - f) * (1.0 - metalness) * albedo / PI;
    (spec, diffuse)
}

/// Reflected radiance under a uniform environment of radiance 1:
/// `∫ f(l, v) (n·l) dω`, midpoint rule on `steps × 4·steps` cells in `(cos θ, φ)`.
pub fn furnace(view: V3, albedo: f64, metalness: f64, roughness: f64, steps: usize) -> f64 {
    let mut sum = 0.0;
    let dmu = 1.0 / steps as f64;
    let phi_steps = 4 * steps;
    let dphi = 2.0 * PI / phi_steps as f64;
    for i in 0..steps {
        let mu = (i as f64 + 0.5) * dmu;
        let s = (1.0 - mu * mu).sqrt();
        for j in 0..phi_steps {
            let phi = (j as f64 + 0.5) * dphi;
            let l = [s * phi.cos(), s * phi.sin(), mu];
            let (spec, diff) = brdf(view, l, albedo, metalness, roughness);
            sum += (spec + diff) * mu * dmu * dphi;
        }
    }
    sum
}
