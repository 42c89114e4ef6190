//! Three-dimensional convex hulls by quickhull.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::HullError;
use crate::mesh::{Albedo, TriMesh};
use crate::real::{cast_point, Real};

/// Convex polyhedron with outward-wound triangular faces.
///
/// Coplanar facets are triangulated, so a cube has 12 faces.
#[derive(Clone, Debug, PartialEq)]
pub struct Hull<T: Real> {
    vertices: Vec<Point3<T>>,
    faces: Vec<[u32; 3]>,
}

impl<T: Real> Hull<T> {
    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    /// Outward unit normal and offset `n·x = d` of face `f`.
    pub fn face_plane(&self, f: usize) -> (Vector3<T>, T) {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i as usize]);
        let n = (b - a).cross(&(c - a)).normalize();
        (n, n.dot(&a.coords))
    }

    pub fn volume(&self) -> T {
        let sixth = T::lit(1.0 / 6.0);
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i as usize].coords);
                a.dot(&b.cross(&c)) * sixth
            })
            .fold(T::zero(), |x, y| x + y)
    }

    /// True when `p` is inside or within `tolerance` of every face plane.
    pub fn contains(&self, p: &Point3<T>, tolerance: T) -> bool {
        (0..self.faces.len()).all(|f| {
            let (n, d) = self.face_plane(f);
            n.dot(&p.coords) - d <= tolerance
        })
    }

    /// Triangle mesh view (mid-gray, computed normals).
    pub fn to_mesh(&self) -> TriMesh<T> {
        TriMesh::new(
            self.vertices.clone(),
            None,
            None,
            self.faces.clone(),
            Albedo::default(),
        )
        .expect("hull faces are valid triangles")
    }

    pub fn cast<U: Real>(&self) -> Hull<U> {
        Hull {
            vertices: self.vertices.iter().map(cast_point).collect(),
            faces: self.faces.clone(),
        }
    }
}

struct Face<T: Real> {
    v: [usize; 3],
    normal: Vector3<T>,
    offset: T,
    outside: Vec<usize>,
    alive: bool,
}

impl<T: Real> Face<T> {
    fn new(v: [usize; 3], pts: &[Point3<T>]) -> Self {
        let [a, b, c] = v.map(|i| pts[i]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        let normal = if len > T::zero() { n / len } else { n };
        Face {
            v,
            offset: normal.dot(&a.coords),
            normal,
            outside: Vec::new(),
            alive: true,
        }
    }

    #[inline]
    fn distance(&self, p: &Point3<T>) -> T {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Computes the convex hull of `points`.
///
/// Points within a small scale-relative tolerance of the hull surface are treated as
/// inside, so interior and face-interior points never become hull vertices.
pub fn convex_hull<T: Real>(points: &[Point3<T>]) -> Result<Hull<T>, HullError> {
    if points.len() < 4 {
        return Err(HullError::TooFewPoints(points.len()));
    }
    if points
        .iter()
        .any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
    {
        return Err(HullError::NonFinite);
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = (hi - lo).amax().max(lo.coords.amax()).max(hi.coords.amax());
    let eps = T::lit(T::GEOMETRIC_EPSILON) * scale.max(T::lit(1e-30));

    let initial = initial_simplex(points, eps)?;
    let mut faces: Vec<Face<T>> = Vec::new();
    let [i0, i1, i2, i3] = initial;
    let interior = Point3::from(
        (points[i0].coords + points[i1].coords + points[i2].coords + points[i3].coords)
            * T::lit(0.25),
    );
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut f = Face::new(tri, points);
        if f.distance(&interior) > T::zero() {
            f = Face::new([tri[0], tri[2], tri[1]], points);
        }
        faces.push(f);
    }

    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edges.insert((f.v[k], f.v[(k + 1) % 3]), fi);
        }
    }

    for (i, p) in points.iter().enumerate() {
        if initial.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(i);
        }
    }

    let mut cursor = 0usize;
    loop {
        // Process faces in creation order; newly created faces are appended.
        while cursor < faces.len() && (!faces[cursor].alive || faces[cursor].outside.is_empty()) {
            cursor += 1;
        }
        if cursor >= faces.len() {
            break;
        }
        let start = cursor;
        let eye = *faces[start]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let (da, db) = (
                    faces[start].distance(&points[a]),
                    faces[start].distance(&points[b]),
                );
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        let eye_p = points[eye];

        let mut visible = vec![start];
        let mut is_visible: HashMap<usize, bool> = HashMap::new();
        is_visible.insert(start, true);
        let mut qi = 0;
        while qi < visible.len() {
            let f = visible[qi];
            qi += 1;
            let v = faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let nb = edges[&(b, a)];
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = faces[nb].distance(&eye_p) > eps;
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                }
            }
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let nb = edges[&(b, a)];
                if !is_visible[&nb] {
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
            let v = faces[f].v;
            for k in 0..3 {
                edges.remove(&(v[k], v[(k + 1) % 3]));
            }
        }

        let first_new = faces.len();
        for &(a, b) in &horizon {
            let fi = faces.len();
            faces.push(Face::new([a, b, eye], points));
            edges.insert((a, b), fi);
            edges.insert((b, eye), fi);
            edges.insert((eye, a), fi);
        }
        for i in orphans {
            if i == eye {
                continue;
            }
            let p = &points[i];
            if let Some(f) = faces[first_new..].iter_mut().find(|f| f.distance(p) > eps) {
                f.outside.push(i);
            }
        }
    }

    let mut remap: HashMap<usize, u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut out_faces = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let tri = f.v.map(|i| {
            *remap.entry(i).or_insert_with(|| {
                vertices.push(points[i]);
                (vertices.len() - 1) as u32
            })
        });
        out_faces.push(tri);
    }
    Ok(Hull {
        vertices,
        faces: out_faces,
    })
}

fn initial_simplex<T: Real>(points: &[Point3<T>], eps: T) -> Result<[usize; 4], HullError> {
    let mut extremes = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        for k in 0..3 {
            if p[k] < points[extremes[2 * k]][k] {
                extremes[2 * k] = i;
            }
            if p[k] > points[extremes[2 * k + 1]][k] {
                extremes[2 * k + 1] = i;
            }
        }
    }
    let mut best = (T::zero(), 0, 0);
    for &a in &extremes {
        for &b in &extremes {
            let d = (points[a] - points[b]).norm();
            if d > best.0 {
                best = (d, a, b);
            }
        }
    }
    let (span, i0, i1) = best;
    if span <= eps {
        return Err(HullError::Coincident);
    }
    let axis = (points[i1] - points[i0]) / span;
    let (mut far, mut i2) = (T::zero(), usize::MAX);
    for (i, p) in points.iter().enumerate() {
        let d = (p - points[i0]).cross(&axis).norm();
        if d > far {
            far = d;
            i2 = i;
        }
    }
    if far <= eps {
        return Err(HullError::Collinear);
    }
    let n = (points[i1] - points[i0])
        .cross(&(points[i2] - points[i0]))
        .normalize();
    let (mut far, mut i3) = (T::zero(), usize::MAX);
    for (i, p) in points.iter().enumerate() {
        let d = n.dot(&(p - points[i0])).abs();
        if d > far {
            far = d;
            i3 = i;
        }
    }
    if far <= eps {
        return Err(HullError::Coplanar);
    }
    Ok([i0, i1, i2, i3])
}
