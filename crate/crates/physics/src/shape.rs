use nalgebra::{Isometry3, Point3, Vector3};
use slb_core::ConvexMesh;

/// Planar convex polygon of a hull; vertices wind counter-clockwise about `normal`.
#[derive(Clone, Debug)]
pub struct Face {
    pub normal: Vector3<f64>,
    pub offset: f64,
    pub vertices: Vec<u32>,
}

/// Hull expressed relative to the body's centre of mass, with coplanar triangles merged.
#[derive(Clone, Debug)]
pub struct CollisionShape {
    vertices: Vec<Point3<f64>>,
    faces: Vec<Face>,
    radius: f64,
}

const COPLANAR_COS: f64 = 1.0 - 1e-9;

impl CollisionShape {
    pub fn new(hull: &ConvexMesh, center_of_mass: &Point3<f64>) -> Self {
        let vertices: Vec<Point3<f64>> = hull
            .vertices()
            .iter()
            .map(|p| Point3::from(p - center_of_mass))
            .collect();
        let scale = vertices.iter().map(|p| p.coords.norm()).fold(0.0, f64::max);
        let tol = 1e-9 * scale.max(1e-9);

        let mut faces: Vec<Face> = Vec::new();
        for (fi, tri) in hull.faces().iter().enumerate() {
            let (n, _) = hull.face_plane(fi);
            let offset = n.dot(&vertices[tri[0] as usize].coords);
            if let Some(face) = faces
                .iter_mut()
                .find(|f| f.normal.dot(&n) > COPLANAR_COS && (f.offset - offset).abs() <= tol)
            {
                for &i in tri {
                    if !face.vertices.contains(&i) {
                        face.vertices.push(i);
                    }
                }
            } else {
                faces.push(Face {
                    normal: n,
                    offset,
                    vertices: tri.to_vec(),
                });
            }
        }
        for face in &mut faces {
            order_polygon(face, &vertices);
        }
        Self {
            vertices,
            faces,
            radius: scale,
        }
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Bounding radius about the centre of mass.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Index of the vertex furthest along local direction `d`.
    pub fn support_index(&self, d: &Vector3<f64>) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let s = v.coords.dot(d);
            if s > best_dot {
                best_dot = s;
                best = i;
            }
        }
        best
    }

    /// Face whose normal has the largest dot product with local direction `d`.
    pub fn best_face(&self, d: &Vector3<f64>) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, f) in self.faces.iter().enumerate() {
            let s = f.normal.dot(d);
            if s > best.1 {
                best = (i, s);
            }
        }
        best
    }
}

fn order_polygon(face: &mut Face, vertices: &[Point3<f64>]) {
    if face.vertices.len() <= 3 {
        let [a, b, c] = [0, 1, 2].map(|k| vertices[face.vertices[k] as usize]);
        if (b - a).cross(&(c - a)).dot(&face.normal) < 0.0 {
            face.vertices.swap(1, 2);
        }
        return;
    }
    let centroid = face.vertices.iter().fold(Vector3::zeros(), |acc, &i| {
        acc + vertices[i as usize].coords
    }) / face.vertices.len() as f64;
    let (u, w) = crate::tangent_basis(&face.normal);
    let mut keyed: Vec<(f64, u32)> = face
        .vertices
        .iter()
        .map(|&i| {
            let d = vertices[i as usize].coords - centroid;
            (d.dot(&w).atan2(d.dot(&u)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    face.vertices = keyed.into_iter().map(|(_, i)| i).collect();
}

/// A shape placed in the world by a body transform (centre of mass frame).
#[derive(Clone, Copy)]
pub struct Placed<'a> {
    pub shape: &'a CollisionShape,
    pub iso: &'a Isometry3<f64>,
}

impl Placed<'_> {
    pub fn support(&self, d: &Vector3<f64>) -> Point3<f64> {
        let local = self.iso.rotation.inverse_transform_vector(d);
        self.iso * self.shape.vertices[self.shape.support_index(&local)]
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::from(self.iso.translation.vector)
    }

    /// World-space polygon of face `f`.
    pub fn face_polygon(&self, f: usize) -> (Vector3<f64>, Vec<Point3<f64>>) {
        let face = &self.shape.faces[f];
        let pts = face
            .vertices
            .iter()
            .map(|&i| self.iso * self.shape.vertices[i as usize])
            .collect();
        (self.iso.rotation * face.normal, pts)
    }

    pub fn best_face(&self, d: &Vector3<f64>) -> (usize, f64) {
        self.shape
            .best_face(&self.iso.rotation.inverse_transform_vector(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use slb_core::{convex_hull, primitives};

    #[test]
    fn cube_faces_merge_into_quads() {
        let cube = primitives::unit_cube::<f64>();
        let hull = convex_hull(cube.vertices()).unwrap();
        let shape = CollisionShape::new(&hull, &Point3::new(0.5, 0.5, 0.5));
        assert_eq!(shape.faces().len(), 6);
        for f in shape.faces() {
            assert_eq!(f.vertices.len(), 4);
            assert!((f.offset - 0.5).abs() < 1e-12);
            let pts: Vec<_> = f
                .vertices
                .iter()
                .map(|&i| shape.vertices()[i as usize])
                .collect();
            for k in 0..4 {
                let e0 = pts[(k + 1) % 4] - pts[k];
                let e1 = pts[(k + 2) % 4] - pts[(k + 1) % 4];
                assert!(e0.cross(&e1).dot(&f.normal) > 0.0);
            }
        }
        assert!((shape.radius() - 0.75f64.sqrt()).abs() < 1e-12);
    }
}
