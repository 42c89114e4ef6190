//! Indexed triangle meshes with texture coordinates and albedo.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{Point2, Point3, Vector3};

use crate::color::Rgb;
use crate::error::MeshError;
use crate::real::{cast, cast_point, cast_vector, Real};

/// Triangles with area at or below this (m²) are degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Fallback albedo for meshes without color information (linear RGB).
pub const MID_GRAY: Rgb = [0.5, 0.5, 0.5];

/// Surface color of a mesh.
#[derive(Clone, Debug, PartialEq)]
pub enum Albedo {
    /// Constant linear RGB color.
    Uniform(Rgb),
    /// 8-bit sRGB texture addressed by the per-vertex UVs.
    Texture(Arc<image::RgbImage>),
    /// Linear RGB color per vertex.
    VertexColors(Arc<Vec<Rgb>>),
}

impl Default for Albedo {
    fn default() -> Self {
        Albedo::Uniform(MID_GRAY)
    }
}

/// Indexed triangle mesh in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh<T: Real> {
    vertices: Vec<Point3<T>>,
    normals: Vec<Vector3<T>>,
    uvs: Vec<Point2<T>>,
    faces: Vec<[u32; 3]>,
    albedo: Albedo,
}

#[inline]
pub fn triangle_normal<T: Real>(a: &Point3<T>, b: &Point3<T>, c: &Point3<T>) -> Vector3<T> {
    (b - a).cross(&(c - a))
}

#[inline]
pub fn triangle_area<T: Real>(a: &Point3<T>, b: &Point3<T>, c: &Point3<T>) -> T {
    triangle_normal(a, b, c).norm() * T::lit(0.5)
}

/// Area-weighted average of incident face normals, normalized.
///
/// Vertices not referenced by any face get `+z`.
pub fn vertex_normals<T: Real>(vertices: &[Point3<T>], faces: &[[u32; 3]]) -> Vec<Vector3<T>> {
    let mut acc = vec![Vector3::zeros(); vertices.len()];
    for f in faces {
        let [a, b, c] = f.map(|i| i as usize);
        // The cross product's magnitude is twice the area, so this is area weighting.
        let n = triangle_normal(&vertices[a], &vertices[b], &vertices[c]);
        acc[a] += n;
        acc[b] += n;
        acc[c] += n;
    }
    acc.into_iter()
        .map(|n| {
            let len = n.norm();
            if len > T::zero() {
                n / len
            } else {
                Vector3::z()
            }
        })
        .collect()
}

impl<T: Real> TriMesh<T> {
    /// Builds a validated mesh.
    ///
    /// Missing normals are computed by area-weighted averaging and missing UVs default
    /// to `(0, 0)`.
    pub fn new(
        vertices: Vec<Point3<T>>,
        normals: Option<Vec<Vector3<T>>>,
        uvs: Option<Vec<Point2<T>>>,
        faces: Vec<[u32; 3]>,
        albedo: Albedo,
    ) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::NoFaces);
        }
        let n = vertices.len();
        if vertices
            .iter()
            .any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(MeshError::Invalid("non-finite vertex coordinate".into()));
        }
        for (i, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&v| v as usize >= n) {
                return Err(MeshError::Invalid(format!(
                    "face {i} references vertex {bad} but only {n} vertices exist"
                )));
            }
            let [a, b, c] = f.map(|v| &vertices[v as usize]);
            if triangle_area(a, b, c).as_f64() <= MIN_TRIANGLE_AREA {
                return Err(MeshError::Invalid(format!("face {i} is degenerate")));
            }
        }
        let computed = vertex_normals(&vertices, &faces);
        let normals = match normals {
            Some(ns) => {
                if ns.len() != n {
                    return Err(MeshError::Invalid(
                        "normal count does not match vertex count".into(),
                    ));
                }
                ns.into_iter()
                    .zip(computed)
                    .map(|(v, fallback)| {
                        let len = v.norm();
                        if len.as_f64() > 1e-12 && len.is_finite() {
                            v / len
                        } else {
                            fallback
                        }
                    })
                    .collect()
            }
            None => computed,
        };
        let uvs = match uvs {
            Some(uvs) if uvs.len() != n => {
                return Err(MeshError::Invalid(
                    "uv count does not match vertex count".into(),
                ));
            }
            Some(uvs) => uvs,
            None => vec![Point2::origin(); n],
        };
        if let Albedo::VertexColors(colors) = &albedo {
            if colors.len() != n {
                return Err(MeshError::Invalid(
                    "vertex color count does not match vertex count".into(),
                ));
            }
        }
        Ok(Self {
            vertices,
            normals,
            uvs,
            faces,
            albedo,
        })
    }

    /// Geometry-only constructor with computed normals and mid-gray albedo.
    pub fn from_geometry(
        vertices: Vec<Point3<T>>,
        faces: Vec<[u32; 3]>,
    ) -> Result<Self, MeshError> {
        Self::new(vertices, None, None, faces, Albedo::default())
    }

    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn normals(&self) -> &[Vector3<T>] {
        &self.normals
    }

    pub fn uvs(&self) -> &[Point2<T>] {
        &self.uvs
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn albedo(&self) -> &Albedo {
        &self.albedo
    }

    pub fn with_albedo(mut self, albedo: Albedo) -> Result<Self, MeshError> {
        if let Albedo::VertexColors(colors) = &albedo {
            if colors.len() != self.vertices.len() {
                return Err(MeshError::Invalid(
                    "vertex color count does not match vertex count".into(),
                ));
            }
        }
        self.albedo = albedo;
        Ok(self)
    }

    pub fn has_texture(&self) -> bool {
        matches!(self.albedo, Albedo::Texture(_))
    }

    #[inline]
    pub fn triangle(&self, face: usize) -> [Point3<T>; 3] {
        self.faces[face].map(|i| self.vertices[i as usize])
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn aabb(&self) -> (Point3<T>, Point3<T>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Bounding sphere centered on the AABB center.
    pub fn bounding_sphere(&self) -> (Point3<T>, T) {
        let (lo, hi) = self.aabb();
        let center = nalgebra::center(&lo, &hi);
        let radius = self
            .vertices
            .iter()
            .map(|p| (p - center).norm())
            .fold(T::zero(), |a, b| a.max(b));
        (center, radius)
    }

    pub fn surface_area(&self) -> T {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                triangle_area(&a, &b, &c)
            })
            .fold(T::zero(), |a, b| a + b)
    }

    /// Signed enclosed volume (positive for closed, outward-wound meshes).
    pub fn signed_volume(&self) -> T {
        let sixth = T::lit(1.0 / 6.0);
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                a.coords.dot(&b.coords.cross(&c.coords)) * sixth
            })
            .fold(T::zero(), |a, b| a + b)
    }

    /// Returns a copy with every vertex moved by `offset`.
    pub fn translated(&self, offset: &Vector3<T>) -> Self {
        let mut out = self.clone();
        for p in &mut out.vertices {
            *p += offset;
        }
        out
    }

    /// Converts the geometry to another scalar type.
    pub fn cast<U: Real>(&self) -> TriMesh<U> {
        TriMesh {
            vertices: self.vertices.iter().map(cast_point).collect(),
            normals: self.normals.iter().map(cast_vector).collect(),
            uvs: self
                .uvs
                .iter()
                .map(|uv| Point2::new(cast(uv.x), cast(uv.y)))
                .collect(),
            faces: self.faces.clone(),
            albedo: self.albedo.clone(),
        }
    }

    /// Merges vertices with bit-identical positions.
    pub fn weld(&self) -> Welded<T> {
        let mut index: HashMap<[u64; 3], u32> = HashMap::new();
        let mut positions = Vec::new();
        let mut representative = Vec::new();
        let remap: Vec<u32> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let key = [
                    p.x.as_f64().to_bits(),
                    p.y.as_f64().to_bits(),
                    p.z.as_f64().to_bits(),
                ];
                *index.entry(key).or_insert_with(|| {
                    positions.push(*p);
                    representative.push(i as u32);
                    (positions.len() - 1) as u32
                })
            })
            .collect();
        let faces = self
            .faces
            .iter()
            .map(|f| f.map(|v| remap[v as usize]))
            .filter(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2])
            .collect();
        Welded {
            positions,
            representative,
            remap,
            faces,
        }
    }

    /// True when every welded edge is shared by exactly two faces with opposite
    /// orientation.
    pub fn is_closed(&self) -> bool {
        self.weld().boundary_edge_count() == 0
    }
}

/// Position-welded view of a mesh used by topology-sensitive algorithms.
#[derive(Clone, Debug)]
pub struct Welded<T: Real> {
    pub positions: Vec<Point3<T>>,
    /// For each welded vertex, the first original vertex mapped to it.
    pub representative: Vec<u32>,
    /// Original vertex index to welded index.
    pub remap: Vec<u32>,
    pub faces: Vec<[u32; 3]>,
}

impl<T: Real> Welded<T> {
    /// Number of directed edges without a matching opposite edge, plus edges used
    /// more than once in the same direction.
    pub fn boundary_edge_count(&self) -> usize {
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        directed
            .iter()
            .filter(|(&(a, b), &count)| count != 1 || directed.get(&(b, a)) != Some(&1))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    #[test]
    fn rejects_out_of_range_and_degenerate_faces() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert!(TriMesh::<f64>::from_geometry(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriMesh::<f64>::from_geometry(v.clone(), vec![[0, 1, 1]]).is_err());
        assert!(matches!(
            TriMesh::<f64>::from_geometry(v, vec![]),
            Err(MeshError::NoFaces)
        ));
    }

    #[test]
    fn unit_cube_is_closed_with_unit_volume() {
        let cube = primitives::unit_cube::<f64>();
        assert!(cube.is_closed());
        assert!((cube.signed_volume() - 1.0).abs() < 1e-12);
        let (lo, hi) = cube.aabb();
        assert_eq!(lo, Point3::origin());
        assert_eq!(hi, Point3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn open_mesh_has_boundary() {
        let grid = primitives::grid::<f64>(3, 1.0);
        assert!(!grid.is_closed());
    }

    #[test]
    fn computed_normals_are_unit() {
        let sphere = primitives::icosphere::<f32>(0.5, 2);
        for n in sphere.normals() {
            assert!((n.norm() - 1.0).abs() < 1e-4);
        }
    }
}
