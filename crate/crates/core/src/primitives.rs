//! Procedural meshes: boxes, icospheres, surfaces of revolution, grids.

use std::collections::HashMap;

use nalgebra::{Point2, Point3, Vector3};

use crate::mesh::{Albedo, TriMesh};
use crate::real::Real;

fn p<T: Real>(x: f64, y: f64, z: f64) -> Point3<T> {
    Point3::new(T::lit(x), T::lit(y), T::lit(z))
}

/// Axis-aligned cube spanning `[0, 1]³` with 8 shared vertices and 12 triangles.
pub fn unit_cube<T: Real>() -> TriMesh<T> {
    let vertices = (0..8)
        .map(|i| p((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let faces = vec![
        [0, 2, 3],
        [0, 3, 1], // -z
        [4, 5, 7],
        [4, 7, 6], // +z
        [0, 1, 5],
        [0, 5, 4], // -y
        [2, 6, 7],
        [2, 7, 3], // +y
        [0, 4, 6],
        [0, 6, 2], // -x
        [1, 3, 7],
        [1, 7, 5], // +x
    ];
    TriMesh::from_geometry(vertices, faces).expect("valid cube")
}

/// Box of the given extents centered on the origin, 24 vertices with per-face UVs.
pub fn textured_box<T: Real>(size: [f64; 3]) -> TriMesh<T> {
    let half = size.map(|s| s * 0.5);
    let mut vertices = Vec::with_capacity(24);
    let mut normals = Vec::with_capacity(24);
    let mut uvs = Vec::with_capacity(24);
    let mut faces = Vec::with_capacity(12);
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let u_axis = (axis + 1) % 3;
            let v_axis = (axis + 2) % 3;
            let base = vertices.len() as u32;
            for (cu, cv) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                let mut c = [0.0; 3];
                c[axis] = sign * half[axis];
                c[u_axis] = cu * half[u_axis];
                c[v_axis] = cv * half[v_axis];
                vertices.push(p(c[0], c[1], c[2]));
                let mut n = Vector3::zeros();
                n[axis] = T::lit(sign);
                normals.push(n);
                uvs.push(Point2::new(
                    T::lit((cu + 1.0) * 0.5),
                    T::lit((cv + 1.0) * 0.5),
                ));
            }
            // u × v is +axis, so counter-clockwise order faces +axis.
            if sign > 0.0 {
                faces.push([base, base + 1, base + 2]);
                faces.push([base, base + 2, base + 3]);
            } else {
                faces.push([base, base + 2, base + 1]);
                faces.push([base, base + 3, base + 2]);
            }
        }
    }
    TriMesh::new(vertices, Some(normals), Some(uvs), faces, Albedo::default()).expect("valid box")
}

/// Geodesic sphere: an icosahedron subdivided `subdivisions` times (20·4ⁿ faces).
pub fn icosphere<T: Real>(radius: f64, subdivisions: u32) -> TriMesh<T> {
    let (dirs, faces) = icosphere_directions(subdivisions);
    let vertices: Vec<Point3<T>> = dirs
        .iter()
        .map(|d| p(d[0] * radius, d[1] * radius, d[2] * radius))
        .collect();
    let normals = dirs
        .iter()
        .map(|d| Vector3::new(T::lit(d[0]), T::lit(d[1]), T::lit(d[2])))
        .collect();
    let uvs = dirs
        .iter()
        .map(|d| {
            let u = 0.5 + d[1].atan2(d[0]) / std::f64::consts::TAU;
            let v = d[2].clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
            Point2::new(T::lit(u), T::lit(v))
        })
        .collect();
    TriMesh::new(vertices, Some(normals), Some(uvs), faces, Albedo::default())
        .expect("valid icosphere")
}

/// Unit direction vectors and faces of a subdivided icosahedron.
pub fn icosphere_directions(subdivisions: u32) -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut dirs: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    for d in &mut dirs {
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        *d = d.map(|c| c / n);
    }
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: u32, b: u32, dirs: &mut Vec<[f64; 3]>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (da, db) = (dirs[a as usize], dirs[b as usize]);
                let m = [da[0] + db[0], da[1] + db[1], da[2] + db[2]];
                let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                dirs.push(m.map(|c| c / n));
                (dirs.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut dirs);
            let bc = midpoint(b, c, &mut dirs);
            let ca = midpoint(c, a, &mut dirs);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (dirs, faces)
}

/// Closed surface of revolution around +z.
///
/// `profile` lists `(radius, z)` pairs from bottom to top; all radii must be positive.
/// Both ends are closed with flat caps. The UV seam duplicates vertices with
/// bit-identical positions, so the welded mesh is watertight.
pub fn lathe<T: Real>(profile: &[(f64, f64)], segments: u32) -> TriMesh<T> {
    assert!(
        profile.len() >= 2 && segments >= 3,
        "lathe needs 2 profile points and 3 segments"
    );
    assert!(
        profile.iter().all(|&(r, _)| r > 0.0),
        "lathe radii must be positive"
    );
    let seg = segments as usize;
    let ring = seg + 1;
    let angle = |j: usize| (j % seg) as f64 * std::f64::consts::TAU / seg as f64;
    let total_len: f64 = profile
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .sum();
    let mut vertices = Vec::new();
    let mut uvs = Vec::new();
    let mut faces = Vec::new();
    let mut arc = 0.0;
    for (i, &(r, z)) in profile.iter().enumerate() {
        if i > 0 {
            let (pr, pz) = profile[i - 1];
            arc += ((r - pr).powi(2) + (z - pz).powi(2)).sqrt();
        }
        for j in 0..ring {
            let a = angle(j);
            vertices.push(p(r * a.cos(), r * a.sin(), z));
            uvs.push(Point2::new(
                T::lit(j as f64 / seg as f64),
                T::lit(arc / total_len),
            ));
        }
    }
    for i in 0..profile.len() - 1 {
        for j in 0..seg {
            let a = (i * ring + j) as u32;
            let b = (i * ring + j + 1) as u32;
            let c = ((i + 1) * ring + j + 1) as u32;
            let d = ((i + 1) * ring + j) as u32;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    for (end, ring_index) in [(0usize, 0usize), (1, profile.len() - 1)] {
        let (r, z) = profile[ring_index];
        let center = vertices.len() as u32;
        vertices.push(p(0.0, 0.0, z));
        uvs.push(Point2::new(T::lit(0.5), T::lit(0.5)));
        let first = vertices.len() as u32;
        for j in 0..seg {
            let a = angle(j);
            vertices.push(p(r * a.cos(), r * a.sin(), z));
            uvs.push(Point2::new(
                T::lit(0.5 + 0.5 * a.cos()),
                T::lit(0.5 + 0.5 * a.sin()),
            ));
        }
        for j in 0..seg as u32 {
            let cur = first + j;
            let nxt = first + (j + 1) % segments;
            if end == 0 {
                faces.push([center, nxt, cur]);
            } else {
                faces.push([center, cur, nxt]);
            }
        }
    }
    TriMesh::new(vertices, None, Some(uvs), faces, Albedo::default()).expect("valid lathe")
}

/// Closed cylinder of radius `r` and height `h`, centered on the origin.
pub fn cylinder<T: Real>(r: f64, h: f64, segments: u32) -> TriMesh<T> {
    lathe(&[(r, -0.5 * h), (r, 0.5 * h)], segments)
}

/// Flat square `[0, size]²` at z = 0 split into `n × n` cells of two triangles each.
pub fn grid<T: Real>(n: u32, size: f64) -> TriMesh<T> {
    let cols = n + 1;
    let mut vertices = Vec::new();
    let mut uvs = Vec::new();
    for j in 0..cols {
        for i in 0..cols {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            vertices.push(p(u * size, v * size, 0.0));
            uvs.push(Point2::new(T::lit(u), T::lit(v)));
        }
    }
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let a = j * cols + i;
            let b = a + 1;
            let c = a + cols + 1;
            let d = a + cols;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, None, Some(uvs), faces, Albedo::default()).expect("valid grid")
}
