//! Microfacet BRDF terms: GGX distribution, height-correlated Smith visibility and
//! Schlick Fresnel, with `alpha = roughness²`.

use nalgebra::Vector3;
use slb_core::Real;
use std::sync::OnceLock;

/// Dot products are clamped to at least this value.
pub const MIN_COS: f64 = 1e-6;

#[inline]
fn clamp_cos<T: Real>(c: T) -> T {
    c.max(T::lit(MIN_COS))
}

#[inline]
pub fn fresnel_schlick<T: Real>(f0: T, cos: T) -> T {
    let m = (T::one() - cos).clamp(T::zero(), T::one());
    let m2 = m * m;
    f0 + (T::one() - f0) * m2 * m2 * m
}

/// Schlick Fresnel with the grazing value limited by roughness, for prefiltered lighting.
#[inline]
pub fn fresnel_schlick_roughness<T: Real>(f0: T, cos: T, roughness: T) -> T {
    let m = (T::one() - cos).clamp(T::zero(), T::one());
    let m2 = m * m;
    let top = (T::one() - roughness).max(f0);
    f0 + (top - f0) * m2 * m2 * m
}

#[inline]
pub fn ggx_distribution<T: Real>(n_h: T, alpha: T) -> T {
    let a2 = alpha * alpha;
    let d = n_h * n_h * (a2 - T::one()) + T::one();
    a2 / (T::pi() * d * d)
}

/// `G2 / (4 n·l n·v)` for the height-correlated Smith masking-shadowing function.
#[inline]
pub fn smith_visibility<T: Real>(n_v: T, n_l: T, alpha: T) -> T {
    let a2 = alpha * alpha;
    let gv = n_l * (n_v * n_v * (T::one() - a2) + a2).sqrt();
    let gl = n_v * (n_l * n_l * (T::one() - a2) + a2).sqrt();
    T::lit(0.5) / (gv + gl)
}

/// `F0 = mix(0.04, albedo, metalness)` per channel.
#[inline]
pub fn base_reflectance<T: Real>(albedo: &Vector3<T>, metalness: T) -> Vector3<T> {
    albedo.map(|a| T::lit(0.04) * (T::one() - metalness) + a * metalness)
}

/// Cook–Torrance BRDF split into `(specular, diffuse)`; all vectors unit length, `l`
/// and `v` point away from the surface.
pub fn cook_torrance<T: Real>(
    n: &Vector3<T>,
    v: &Vector3<T>,
    l: &Vector3<T>,
    albedo: &Vector3<T>,
    metalness: T,
    roughness: T,
) -> (Vector3<T>, Vector3<T>) {
    let alpha = roughness * roughness;
    let h = (v + l).try_normalize(T::lit(1e-12)).unwrap_or(*n);
    let n_v = clamp_cos(n.dot(v));
    let n_l = clamp_cos(n.dot(l));
    let n_h = clamp_cos(n.dot(&h));
    let v_h = clamp_cos(v.dot(&h));
    let f0 = base_reflectance(albedo, metalness);
    let f = f0.map(|c| fresnel_schlick(c, v_h));
    let dv = ggx_distribution(n_h, alpha) * smith_visibility(n_v, n_l, alpha);
    let spec = f * dv;
    let inv_pi = T::one() / T::pi();
    let diffuse =
        Vector3::from_fn(|i, _| (T::one() - f[i]) * (T::one() - metalness) * albedo[i] * inv_pi);
    (spec, diffuse)
}

const LUT_SIZE: usize = 32;
const LUT_SAMPLES: usize = 1024;

/// Split-sum scale and bias `(A, B)` so that the prefiltered specular term is
/// `prefiltered · (F0·A + B)`.
pub fn dfg_lut() -> &'static [[f32; 2]] {
    static LUT: OnceLock<Vec<[f32; 2]>> = OnceLock::new();
    LUT.get_or_init(|| {
        let mut out = Vec::with_capacity(LUT_SIZE * LUT_SIZE);
        for r in 0..LUT_SIZE {
            let roughness = (r as f64 + 0.5) / LUT_SIZE as f64;
            for c in 0..LUT_SIZE {
                let n_v = (c as f64 + 0.5) / LUT_SIZE as f64;
                out.push(integrate_dfg(n_v, roughness));
            }
        }
        out
    })
}

fn integrate_dfg(n_v: f64, roughness: f64) -> [f32; 2] {
    let alpha = roughness * roughness;
    let v = Vector3::new((1.0 - n_v * n_v).sqrt(), 0.0, n_v);
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..LUT_SAMPLES {
        // Hammersley point, GGX-distributed half vector.
        let u1 = (i as f64 + 0.5) / LUT_SAMPLES as f64;
        let u2 = (i as u32).reverse_bits() as f64 / 4_294_967_296.0;
        let phi = std::f64::consts::TAU * u2;
        let cos_t = ((1.0 - u1) / (1.0 + (alpha * alpha - 1.0) * u1)).sqrt();
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let h = Vector3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t);
        let l = h * (2.0 * v.dot(&h)) - v;
        let n_l = l.z;
        if n_l <= 0.0 {
            continue;
        }
        let n_h = h.z.max(MIN_COS);
        let v_h = v.dot(&h).max(MIN_COS);
        let vis = smith_visibility(n_v, n_l, alpha) * 4.0 * v_h * n_l / n_h;
        let fc = (1.0 - v_h).powi(5);
        a += (1.0 - fc) * vis;
        b += fc * vis;
    }
    [
        (a / LUT_SAMPLES as f64) as f32,
        (b / LUT_SAMPLES as f64) as f32,
    ]
}

/// Bilinear lookup of the split-sum terms.
pub fn dfg<T: Real>(n_v: T, roughness: T) -> (T, T) {
    let lut = dfg_lut();
    let s = LUT_SIZE as f64;
    let x = (n_v.as_f64() * s - 0.5).clamp(0.0, s - 1.0);
    let y = (roughness.as_f64() * s - 0.5).clamp(0.0, s - 1.0);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(LUT_SIZE - 1), (y0 + 1).min(LUT_SIZE - 1));
    let (tx, ty) = (x - x0 as f64, y - y0 as f64);
    let at = |r: usize, c: usize, k: usize| lut[r * LUT_SIZE + c][k] as f64;
    let lerp = |k: usize| {
        let top = at(y0, x0, k) * (1.0 - tx) + at(y0, x1, k) * tx;
        let bot = at(y1, x0, k) * (1.0 - tx) + at(y1, x1, k) * tx;
        top * (1.0 - ty) + bot * ty
    };
    (T::lit(lerp(0)), T::lit(lerp(1)))
}

/// Blinn–Phong specular lobe.
#[inline]
pub fn blinn_phong<T: Real>(n: &Vector3<T>, v: &Vector3<T>, l: &Vector3<T>, shininess: T) -> T {
    let h = (v + l).try_normalize(T::lit(1e-12)).unwrap_or(*n);
    n.dot(&h).max(T::zero()).powf(shininess)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schlick_endpoints() {
        for f0 in [0.04f64, 0.5, 0.9] {
            assert_eq!(fresnel_schlick(f0, 1.0), f0);
            assert!(fresnel_schlick(f0, 89.9f64.to_radians().cos()) >= 0.99);
        }
    }

    #[test]
    fn specular_is_reciprocal() {
        let n = Vector3::new(0.0, 0.0, 1.0);
        let v = Vector3::new(0.3, 0.1, 0.9).normalize();
        let l = Vector3::new(-0.5, 0.4, 0.6).normalize();
        let albedo = Vector3::new(0.8, 0.3, 0.1);
        for (m, r) in [(0.0, 0.3), (1.0, 0.7), (0.5, 1.0)] {
            let (a, da) = cook_torrance(&n, &v, &l, &albedo, m, r);
            let (b, db) = cook_torrance(&n, &l, &v, &albedo, m, r);
            assert!((a - b).amax() <= 1e-9);
            assert!((da - db).amax() <= 1e-9);
        }
    }

    #[test]
    fn dfg_bounds() {
        for &[a, b] in dfg_lut() {
            assert!(a >= 0.0 && b >= 0.0 && a + b <= 1.0 + 1e-2);
        }
        let (a, b) = dfg(1.0f32, 0.05);
        assert!(a + b > 0.9);
    }
}
