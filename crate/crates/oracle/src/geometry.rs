//! Closest points, sampled Hausdorff distance, and an icosphere fixture writer.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{add, cross, dot, norm, scale, sub, V3};

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: V3, a: V3, b: V3, c: V3) -> V3 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return add(a, scale(ab, d1 / (d1 - d3)));
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return add(a, scale(ac, d2 / (d2 - d6)));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return add(b, scale(sub(c, b), w));
    }
    let denom = 1.0 / (va + vb + vc);
    add(a, add(scale(ab, vb * denom), scale(ac, vc * denom)))
}

/// Distance from `p` to the nearest triangle of a mesh.
pub fn point_mesh_distance(p: V3, vertices: &[V3], faces: &[[u32; 3]]) -> f64 {
    faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            norm(sub(p, closest_point_on_triangle(p, a, b, c)))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Area-uniform random surface samples plus every vertex.
pub fn surface_samples(vertices: &[V3], faces: &[[u32; 3]], count: usize, seed: u64) -> Vec<V3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let areas: Vec<f64> = faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            0.5 * norm(cross(sub(b, a), sub(c, a)))
        })
        .collect();
    let total: f64 = areas.iter().sum();
    let mut cdf = Vec::with_capacity(areas.len());
    let mut acc = 0.0;
    for a in &areas {
        acc += a / total;
        cdf.push(acc);
    }
    let mut out: Vec<V3> = vertices.to_vec();
    for _ in 0..count {
        let r: f64 = rng.random();
        let fi = cdf.partition_point(|&c| c < r).min(faces.len() - 1);
        let [a, b, c] = faces[fi].map(|i| vertices[i as usize]);
        let (mut s, mut t): (f64, f64) = (rng.random(), rng.random());
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        out.push(add(a, add(scale(sub(b, a), s), scale(sub(c, a), t))));
    }
    out
}

/// Symmetric Hausdorff distance estimated from `samples` surface points per side.
pub fn hausdorff(
    a_vertices: &[V3],
    a_faces: &[[u32; 3]],
    b_vertices: &[V3],
    b_faces: &[[u32; 3]],
    samples: usize,
    seed: u64,
) -> f64 {
    let one_sided = |sv: &[V3], sf: &[[u32; 3]], tv: &[V3], tf: &[[u32; 3]], seed: u64| {
        surface_samples(sv, sf, samples, seed)
            .into_iter()
            .map(|p| point_mesh_distance(p, tv, tf))
            .fold(0.0, f64::max)
    };
    one_sided(a_vertices, a_faces, b_vertices, b_faces, seed).max(one_sided(
        b_vertices,
        b_faces,
        a_vertices,
        a_faces,
        seed + 1,
    ))
}

/// ASCII PLY of a geodesic sphere built by repeated 4-way subdivision of an
/// icosahedron (`20·4ⁿ` faces), with per-vertex normals.
pub fn icosphere_ply(radius: f64, subdivisions: u32) -> String {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut verts: Vec<V3> = Vec::new();
    // Three orthogonal golden rectangles.
    for &(s1, s2) in &[(-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        verts.push([s1, s2 * phi, 0.0]);
    }
    for &(s1, s2) in &[(-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        verts.push([0.0, s1, s2 * phi]);
    }
    for &(s1, s2) in &[(-1.0, 1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        verts.push([s2 * phi, 0.0, s1]);
    }
    let unit = |v: V3| scale(v, 1.0 / norm(v));
    let mut verts: Vec<V3> = verts.into_iter().map(unit).collect();
    // Faces: every triple of mutually adjacent vertices (edge length 2 before scaling).
    let edge = 2.0 / (1.0 + phi * phi).sqrt();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                let close =
                    |a: usize, b: usize| (norm(sub(verts[a], verts[b])) - edge).abs() < 1e-9;
                if close(i, j) && close(j, k) && close(i, k) {
                    let (a, b, c) = (verts[i], verts[j], verts[k]);
                    let n = cross(sub(b, a), sub(c, a));
                    if dot(n, a) > 0.0 {
                        faces.push([i as u32, j as u32, k as u32]);
                    } else {
                        faces.push([i as u32, k as u32, j as u32]);
                    }
                }
            }
        }
    }
    assert_eq!(faces.len(), 20);
    for _ in 0..subdivisions {
        let mut cache: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<V3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(unit(add(verts[a as usize], verts[b as usize])));
                verts.len() as u32 - 1
            })
        };
        let mut next = Vec::new();
        for [a, b, c] in faces {
            let (ab, bc, ca) = (
                mid(a, b, &mut verts),
                mid(b, c, &mut verts),
                mid(c, a, &mut verts),
            );
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let mut out = String::new();
    let _ = write!(
        out,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
         property double nx\nproperty double ny\nproperty double nz\nelement face {}\n\
         property list uchar int vertex_indices\nend_header\n",
        verts.len(),
        faces.len()
    );
    for v in &verts {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            v[0] * radius,
            v[1] * radius,
            v[2] * radius,
            v[0],
            v[1],
            v[2]
        );
    }
    for f in &faces {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

/// Uniform random points in the unit ball.
pub fn ball_points(count: usize, seed: u64) -> Vec<V3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: V3 = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if dot(p, p) <= 1.0 {
            out.push(p);
        }
    }
    out
}

/// True when `p` is inside or within `tol` of every plane of the oriented triangles.
pub fn inside_all_face_planes(p: V3, vertices: &[V3], faces: &[[u32; 3]], tol: f64) -> bool {
    faces.iter().all(|f| {
        let [a, b, c] = f.map(|i| vertices[i as usize]);
        let n = cross(sub(b, a), sub(c, a));
        let len = norm(n);
        len == 0.0 || dot(scale(n, 1.0 / len), sub(p, a)) <= tol
    })
}
