//! Separating-axis tests between convex polytopes given as vertex/face lists.

use crate::{cross, dot, norm, scale, sub, V3};

pub struct Polytope {
    pub vertices: Vec<V3>,
    pub faces: Vec<[u32; 3]>,
}

impl Polytope {
    pub fn new(vertices: Vec<V3>, faces: Vec<[u32; 3]>) -> Self {
        Self { vertices, faces }
    }

    fn face_normals(&self) -> Vec<V3> {
        let mut out: Vec<V3> = Vec::new();
        for f in &self.faces {
            let [a, b, c] = f.map(|i| self.vertices[i as usize]);
            let n = cross(sub(b, a), sub(c, a));
            let l = norm(n);
            if l < 1e-18 {
                continue;
            }
            let n = scale(n, 1.0 / l);
            if !out.iter().any(|m| dot(*m, n) > 1.0 - 1e-12) {
                out.push(n);
            }
        }
        out
    }

    fn edge_directions(&self) -> Vec<V3> {
        let mut out: Vec<V3> = Vec::new();
        for f in &self.faces {
            for k in 0..3 {
                let d = sub(
                    self.vertices[f[(k + 1) % 3] as usize],
                    self.vertices[f[k] as usize],
                );
                let l = norm(d);
                if l < 1e-18 {
                    continue;
                }
                let d = scale(d, 1.0 / l);
                if !out.iter().any(|m| dot(*m, d).abs() > 1.0 - 1e-12) {
                    out.push(d);
                }
            }
        }
        out
    }

    fn project(&self, axis: V3) -> (f64, f64) {
        self.vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let d = dot(*v, axis);
                (lo.min(d), hi.max(d))
            })
    }
}

fn overlap(a: &Polytope, b: &Polytope, axis: V3) -> f64 {
    let (a0, a1) = a.project(axis);
    let (b0, b1) = b.project(axis);
    (a1 - b0).min(b1 - a0)
}

/// Minimum interval overlap over both polytopes' face normals.
///
/// Negative values prove separation. Positive values bound the penetration depth
/// from above (the true depth also minimizes over edge-pair axes).
pub fn face_axis_overlap(a: &Polytope, b: &Polytope) -> f64 {
    a.face_normals()
        .into_iter()
        .chain(b.face_normals())
        .map(|n| overlap(a, b, n))
        .fold(f64::INFINITY, f64::min)
}

/// Exact penetration depth (minimum translation distance) for two overlapping
/// polytopes; `≤ 0` when separated or touching.
pub fn penetration_depth(a: &Polytope, b: &Polytope) -> f64 {
    let mut depth = face_axis_overlap(a, b);
    if depth <= 0.0 {
        return depth;
    }
    let ea = a.edge_directions();
    let eb = b.edge_directions();
    for da in &ea {
        for db in &eb {
            let c = cross(*da, *db);
            let l = norm(c);
            if l < 1e-9 {
                continue;
            }
            depth = depth.min(overlap(a, b, scale(c, 1.0 / l)));
            if depth <= 0.0 {
                return depth;
            }
        }
    }
    depth
}

/// True unless some separating axis leaves a gap of at least `-tolerance`.
pub fn intersects(a: &Polytope, b: &Polytope, tolerance: f64) -> bool {
    penetration_depth(a, b) > tolerance
}
