//! Screen-space ambient occlusion from the depth and normal buffers.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::camera::PinholeCamera;

pub const DEFAULT_SAMPLES: usize = 16;
pub const DEFAULT_RADIUS: f64 = 0.02;
const NOISE: u32 = 4;
const BLUR: u32 = 4;

/// Hemisphere sample offsets in tangent space (`z` along the normal), scaled to the
/// unit ball.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub samples: Vec<Vector3<f64>>,
}

impl Kernel {
    /// Deterministic spiral kernel with lengths growing toward the rim and a minimum
    /// elevation that keeps samples clear of the tangent plane.
    pub fn hemisphere(count: usize) -> Self {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let samples = (0..count)
            .map(|i| {
                let t = (i as f64 + 0.5) / count as f64;
                let z = 0.35 + 0.65 * (1.0 - t);
                let r = (1.0 - z * z).sqrt();
                let phi = i as f64 * golden;
                let len = 0.3 + 0.7 * t * t;
                Vector3::new(r * phi.cos(), r * phi.sin(), z) * len
            })
            .collect();
        Self { samples }
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Self::hemisphere(DEFAULT_SAMPLES)
    }
}

fn noise_angle(x: u32, y: u32) -> f64 {
    // 4×4 interleaved pattern of rotations.
    const ORDER: [u32; 16] = [0, 8, 2, 10, 12, 4, 14, 6, 3, 11, 1, 9, 15, 7, 13, 5];
    let k = ORDER[((y % NOISE) * NOISE + x % NOISE) as usize];
    k as f64 / 16.0 * std::f64::consts::TAU
}

/// Unblurred per-pixel fraction of unoccluded samples; 1 where `depth` is 0.
pub fn raw_occlusion(
    depth: &[f32],
    normals: &[[f32; 3]],
    camera: &PinholeCamera,
    kernel: &Kernel,
    radius: f64,
) -> Vec<f32> {
    let (w, h) = (camera.width, camera.height);
    (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let d = depth[idx as usize] as f64;
            if d <= 0.0 || kernel.samples.is_empty() {
                return 1.0;
            }
            let (x, y) = (idx % w, idx / w);
            let p = camera.unproject(x as f64 + 0.5, y as f64 + 0.5, d);
            let n = Vector3::from(normals[idx as usize].map(f64::from));
            let (u, v) = crate::tangent_basis(&nalgebra::Unit::new_normalize(n));
            let (s, c) = noise_angle(x, y).sin_cos();
            let (t, b) = (u * c + v * s, v * c - u * s);
            // Half a pixel footprint absorbs depth changes across one texel.
            let bias = 0.5 * d / camera.fx.min(camera.fy);
            let mut open = 0usize;
            for k in &kernel.samples {
                let q = p + (t * k.x + b * k.y + n * k.z) * radius;
                if q.z <= camera.near {
                    open += 1;
                    continue;
                }
                let (su, sv, _) = camera.project(&q);
                let (sx, sy) = (su.floor(), sv.floor());
                if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
                    open += 1;
                    continue;
                }
                let sd = depth[(sy as u32 * w + sx as u32) as usize] as f64;
                let occluded = sd > 0.0 && sd < q.z - bias && (d - sd).abs() < radius;
                if !occluded {
                    open += 1;
                }
            }
            open as f32 / kernel.samples.len() as f32
        })
        .collect()
}

/// 4×4 box blur averaging only pixels with geometry.
pub fn blur(ao: &[f32], depth: &[f32], width: u32, height: u32) -> Vec<f32> {
    let lo = -(BLUR as i64) / 2;
    (0..width * height)
        .into_par_iter()
        .map(|idx| {
            if depth[idx as usize] <= 0.0 {
                return 1.0;
            }
            let (x, y) = ((idx % width) as i64, (idx / width) as i64);
            let (mut sum, mut n) = (0.0f32, 0u32);
            for dy in lo..lo + BLUR as i64 {
                for dx in lo..lo + BLUR as i64 {
                    let (xx, yy) = (x + dx, y + dy);
                    if xx < 0 || yy < 0 || xx >= width as i64 || yy >= height as i64 {
                        continue;
                    }
                    let j = (yy * width as i64 + xx) as usize;
                    if depth[j] > 0.0 {
                        sum += ao[j];
                        n += 1;
                    }
                }
            }
            sum / n as f32
        })
        .collect()
}

/// Blurred ambient occlusion in `[0, 1]`.
pub fn ssao_factor(
    depth: &[f32],
    normals: &[[f32; 3]],
    camera: &PinholeCamera,
    kernel: &Kernel,
    radius: f64,
) -> Vec<f32> {
    let raw = raw_occlusion(depth, normals, camera, kernel, radius);
    blur(&raw, depth, camera.width, camera.height)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_stays_in_the_hemisphere() {
        let k = Kernel::default();
        assert_eq!(k.samples.len(), 16);
        assert!(k
            .samples
            .iter()
            .all(|s| s.z > 0.0 && s.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn empty_pixels_are_unoccluded() {
        let cam = PinholeCamera::with_fov(8, 8, 1.0);
        let ao = ssao_factor(&[0.0; 64], &[[0.0; 3]; 64], &cam, &Kernel::default(), 0.02);
        assert!(ao.iter().all(|&a| a == 1.0));
    }
}
