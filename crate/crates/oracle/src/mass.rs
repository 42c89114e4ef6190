//! Stratified Monte Carlo mass properties of a closed triangle mesh.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::V3;

pub struct MonteCarloMass {
    pub mass: f64,
    pub center_of_mass: V3,
    /// Inertia tensor about the center of mass.
    pub inertia: [[f64; 3]; 3],
}

/// Inside test by crossing parity of a +z ray, with triangles bucketed on an xy grid.
pub struct ParityTester<'a> {
    vertices: &'a [V3],
    faces: &'a [[u32; 3]],
    lo: V3,
    hi: V3,
    grid: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> ParityTester<'a> {
    pub fn new(vertices: &'a [V3], faces: &'a [[u32; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let grid = ((faces.len() as f64).sqrt() as usize).clamp(1, 64);
        let mut buckets = vec![Vec::new(); grid * grid];
        let cell = |x: f64, k: usize| -> usize {
            (((x - lo[k]) / (hi[k] - lo[k]) * grid as f64)
                .floor()
                .max(0.0) as usize)
                .min(grid - 1)
        };
        for (fi, f) in faces.iter().enumerate() {
            let pts = f.map(|i| vertices[i as usize]);
            let (x0, x1) = (
                pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
                pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max),
            );
            let (y0, y1) = (
                pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
                pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max),
            );
            for gy in cell(y0, 1)..=cell(y1, 1) {
                for gx in cell(x0, 0)..=cell(x1, 0) {
                    buckets[gy * grid + gx].push(fi as u32);
                }
            }
        }
        Self {
            vertices,
            faces,
            lo,
            hi,
            grid,
            buckets,
        }
    }

    pub fn bounds(&self) -> (V3, V3) {
        (self.lo, self.hi)
    }

    pub fn inside(&self, p: V3) -> bool {
        if (0..3).any(|k| p[k] < self.lo[k] || p[k] > self.hi[k]) {
            return false;
        }
        let g = self.grid;
        let gx = (((p[0] - self.lo[0]) / (self.hi[0] - self.lo[0]) * g as f64) as usize).min(g - 1);
        let gy = (((p[1] - self.lo[1]) / (self.hi[1] - self.lo[1]) * g as f64) as usize).min(g - 1);
        let mut crossings = 0u32;
        for &fi in &self.buckets[gy * g + gx] {
            let [a, b, c] = self.faces[fi as usize].map(|i| self.vertices[i as usize]);
            // Barycentrics of (p.x, p.y) in the projected triangle.
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            if det == 0.0 {
                continue;
            }
            let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
            let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
                continue;
            }
            let z = l0 * a[2] + l1 * b[2] + l2 * c[2];
            if z > p[2] {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }
}

/// Integrates density, first and second moments over `n³` jittered strata of the
/// bounding box.
pub fn monte_carlo_mass(
    vertices: &[V3],
    faces: &[[u32; 3]],
    density: f64,
    n: usize,
    seed: u64,
) -> MonteCarloMass {
    let tester = ParityTester::new(vertices, faces);
    let (lo, hi) = tester.bounds();
    let size = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let cell_volume = size[0] * size[1] * size[2] / (n * n * n) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m0 = 0.0;
    let mut m1 = [0.0; 3];
    let mut m2 = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = [i, j, k];
                let mut p = [0.0; 3];
                for a in 0..3 {
                    p[a] = lo[a] + size[a] * (idx[a] as f64 + rng.random::<f64>()) / n as f64;
                }
                if tester.inside(p) {
                    m0 += 1.0;
                    for a in 0..3 {
                        m1[a] += p[a];
                        for b in 0..3 {
                            m2[a][b] += p[a] * p[b];
                        }
                    }
                }
            }
        }
    }
    let w = density * cell_volume;
    let mass = m0 * w;
    let com = [m1[0] * w / mass, m1[1] * w / mass, m1[2] * w / mass];
    let mut cov = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            cov[a][b] = m2[a][b] * w - mass * com[a] * com[b];
        }
    }
    let trace = cov[0][0] + cov[1][1] + cov[2][2];
    let mut inertia = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            inertia[a][b] = if a == b {
                trace - cov[a][b]
            } else {
                -cov[a][b]
            };
        }
    }
    MonteCarloMass {
        mass,
        center_of_mass: com,
        inertia,
    }
}

/// Mass properties by the divergence theorem with a cubic-exact triangle rule.
///
/// Volume integrals of `1, x_i, x_i x_j` become surface integrals of polynomials of
/// degree ≤ 3, which the 4-point rule integrates exactly.
pub fn divergence_mass(vertices: &[V3], faces: &[[u32; 3]], density: f64) -> MonteCarloMass {
    let rule: [(f64, [f64; 3]); 4] = [
        (-27.0 / 48.0, [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
        (25.0 / 48.0, [0.6, 0.2, 0.2]),
        (25.0 / 48.0, [0.2, 0.6, 0.2]),
        (25.0 / 48.0, [0.2, 0.2, 0.6]),
    ];
    let mut vol = 0.0;
    let mut m1 = [0.0; 3];
    let mut m2 = [[0.0; 3]; 3];
    for f in faces {
        let [a, b, c] = f.map(|i| vertices[i as usize]);
        // n dA over the triangle (area-weighted normal); the rule weights sum to 1.
        let nda = crate::scale(crate::cross(crate::sub(b, a), crate::sub(c, a)), 0.5);
        for (w, l) in rule {
            let p = [
                l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
                l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
                l[0] * a[2] + l[1] * b[2] + l[2] * c[2],
            ];
            vol += w * p[0] * nda[0];
            for i in 0..3 {
                m1[i] += w * 0.5 * p[i] * p[i] * nda[i];
                m2[i][i] += w * p[i] * p[i] * p[i] / 3.0 * nda[i];
                for j in 0..3 {
                    if i != j {
                        // ∫ x_i x_j dV = ∫ (x_i² x_j / 2) n_i dA
                        m2[i][j] += w * 0.5 * p[i] * p[i] * p[j] * nda[i];
                    }
                }
            }
        }
    }
    let mass = density * vol;
    let com = [m1[0] / vol, m1[1] / vol, m1[2] / vol];
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = density * m2[i][j] - mass * com[i] * com[j];
        }
    }
    let trace = cov[0][0] + cov[1][1] + cov[2][2];
    let mut inertia = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inertia[i][j] = if i == j {
                trace - cov[i][j]
            } else {
                -cov[i][j]
            };
        }
    }
    MonteCarloMass {
        mass,
        center_of_mass: com,
        inertia,
    }
}
