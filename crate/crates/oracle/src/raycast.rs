//! Brute-force ray casting against triangle soups.

use crate::{cross, dot, sub, V3};

/// Möller–Trumbore intersection; returns the ray parameter of the hit.
pub fn ray_triangle(origin: V3, dir: V3, a: V3, b: V3, c: V3) -> Option<f64> {
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    let p = cross(dir, e2);
    let det = dot(e1, p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = sub(origin, a);
    let u = dot(s, p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = cross(s, e1);
    let v = dot(dir, q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = dot(e2, q) * inv;
    (t > 0.0).then_some(t)
}

/// One object of a scene: triangles already expressed in the camera frame.
pub struct SceneObject {
    pub id: u32,
    pub vertices: Vec<V3>,
    pub faces: Vec<[u32; 3]>,
    lo: V3,
    hi: V3,
}

impl SceneObject {
    pub fn new(id: u32, vertices: Vec<V3>, faces: Vec<[u32; 3]>) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Self {
            id,
            vertices,
            faces,
            lo,
            hi,
        }
    }

    fn ray_hits_box(&self, origin: V3, dir: V3) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            if dir[k].abs() < 1e-300 {
                if origin[k] < self.lo[k] || origin[k] > self.hi[k] {
                    return false;
                }
                continue;
            }
            let inv = 1.0 / dir[k];
            let (mut a, mut b) = (
                (self.lo[k] - origin[k]) * inv,
                (self.hi[k] - origin[k]) * inv,
            );
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

/// Nearest hit `(object id, ray parameter)` along `dir` from `origin`.
pub fn cast(objects: &[SceneObject], origin: V3, dir: V3) -> Option<(u32, f64)> {
    let mut best: Option<(u32, f64)> = None;
    for obj in objects {
        if !obj.ray_hits_box(origin, dir) {
            continue;
        }
        for f in &obj.faces {
            let [a, b, c] = f.map(|i| obj.vertices[i as usize]);
            if let Some(t) = ray_triangle(origin, dir, a, b, c) {
                if best.is_none_or(|(_, bt)| t < bt) {
                    best = Some((obj.id, t));
                }
            }
        }
    }
    best
}

/// Pinhole camera ray through pixel center `(u + 0.5, v + 0.5)`; the direction has
/// unit z so the ray parameter equals camera-frame depth.
pub fn pixel_ray(fx: f64, fy: f64, cx: f64, cy: f64, u: u32, v: u32) -> V3 {
    [(u as f64 + 0.5 - cx) / fx, (v as f64 + 0.5 - cy) / fy, 1.0]
}
