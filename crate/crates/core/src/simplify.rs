//! Quadric-error edge-collapse simplification.
//!
//! Plane quadrics are accumulated per vertex (area weighted). Boundary edges add a
//! perpendicular constraint plane with weight [`BOUNDARY_WEIGHT`] so open silhouettes
//! survive. Collapses that break the link condition, pinch two boundaries, fold a
//! face or create a degenerate triangle are rejected.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::MeshError;
use crate::mesh::{TriMesh, MIN_TRIANGLE_AREA};
use crate::real::Real;

pub const BOUNDARY_WEIGHT: f64 = 1e3;

/// Minimum cosine between a face normal before and after a collapse.
const MIN_NORMAL_COSINE: f64 = 0.2;

/// Symmetric 4×4 quadric stored as its 10 upper-triangle entries.
#[derive(Clone, Copy, Debug)]
struct Quadric<T: Real>([T; 10]);

impl<T: Real> Quadric<T> {
    fn zero() -> Self {
        Quadric([T::zero(); 10])
    }

    /// `weight · (n·x - d)²` for unit normal `n`.
    fn plane(n: &Vector3<T>, d: T, weight: T) -> Self {
        let (a, b, c, d) = (n.x, n.y, n.z, -d);
        Quadric(
            [
                a * a,
                a * b,
                a * c,
                a * d,
                b * b,
                b * c,
                b * d,
                c * c,
                c * d,
                d * d,
            ]
            .map(|v| v * weight),
        )
    }

    fn add(&mut self, o: &Self) {
        for i in 0..10 {
            self.0[i] += o.0[i];
        }
    }

    fn error(&self, p: &Point3<T>) -> T {
        let q = &self.0;
        let (x, y, z) = (p.x, p.y, p.z);
        let two = T::lit(2.0);
        let e = q[0] * x * x
            + two * q[1] * x * y
            + two * q[2] * x * z
            + two * q[3] * x
            + q[4] * y * y
            + two * q[5] * y * z
            + two * q[6] * y
            + q[7] * z * z
            + two * q[8] * z
            + q[9];
        e.max(T::zero())
    }

    fn minimizer(&self) -> Option<Point3<T>> {
        let q = &self.0;
        let a = Matrix3::new(q[0], q[1], q[2], q[1], q[4], q[5], q[2], q[5], q[7]);
        let scale = a.amax();
        if !(scale > T::zero()) {
            return None;
        }
        let det = a.determinant();
        if det.abs() <= scale * scale * scale * T::lit(1e-9) {
            return None;
        }
        let b = Vector3::new(-q[3], -q[6], -q[8]);
        a.try_inverse().map(|inv| Point3::from(inv * b))
    }
}

#[derive(Clone, Copy)]
struct Candidate<T: Real> {
    cost: T,
    keep: u32,
    remove: u32,
    target: Point3<T>,
    stamps: (u32, u32),
}

impl<T: Real> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Candidate<T> {}
impl<T: Real> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Candidate<T> {
    // Reversed: BinaryHeap pops the cheapest collapse first; ties break on indices.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.keep.cmp(&self.keep))
            .then_with(|| other.remove.cmp(&self.remove))
    }
}

struct State<T: Real> {
    pos: Vec<Point3<T>>,
    quadric: Vec<Quadric<T>>,
    faces: Vec<[u32; 3]>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<u32>>,
    boundary_vertex: Vec<bool>,
    stamp: Vec<u32>,
    alive_faces: usize,
}

impl<T: Real> State<T> {
    fn neighbors(&self, v: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self.vertex_faces[v as usize]
            .iter()
            .flat_map(|&f| self.faces[f as usize])
            .filter(|&u| u != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn edge_faces(&self, a: u32, b: u32) -> Vec<u32> {
        self.vertex_faces[a as usize]
            .iter()
            .copied()
            .filter(|&f| self.faces[f as usize].contains(&b))
            .collect()
    }

    fn candidate(&self, a: u32, b: u32) -> Candidate<T> {
        let mut q = self.quadric[a as usize];
        q.add(&self.quadric[b as usize]);
        let (pa, pb) = (self.pos[a as usize], self.pos[b as usize]);
        let mid = nalgebra::center(&pa, &pb);
        let edge_len = (pb - pa).norm();
        let mut best = [(pa, q.error(&pa)), (pb, q.error(&pb)), (mid, q.error(&mid))]
            .into_iter()
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))
            .unwrap();
        if let Some(opt) = q.minimizer() {
            // Distant minimizers come from near-singular systems; keep the fallback.
            if (opt - mid).norm() <= edge_len * T::lit(2.0) {
                let e = q.error(&opt);
                if e < best.1 {
                    best = (opt, e);
                }
            }
        }
        let (keep, remove) = (a.min(b), a.max(b));
        Candidate {
            cost: best.1,
            keep,
            remove,
            target: best.0,
            stamps: (self.stamp[keep as usize], self.stamp[remove as usize]),
        }
    }

    fn would_fold(&self, moved: u32, other: u32, target: &Point3<T>, min_cos: T) -> bool {
        for &f in &self.vertex_faces[moved as usize] {
            let tri = self.faces[f as usize];
            if tri.contains(&other) {
                continue;
            }
            let [a, b, c] = tri.map(|i| self.pos[i as usize]);
            let old_n = (b - a).cross(&(c - a));
            let moved_pts = tri.map(|i| {
                if i == moved {
                    *target
                } else {
                    self.pos[i as usize]
                }
            });
            let new_n = (moved_pts[1] - moved_pts[0]).cross(&(moved_pts[2] - moved_pts[0]));
            let new_len = new_n.norm();
            if (new_len * T::lit(0.5)).as_f64() <= MIN_TRIANGLE_AREA {
                return true;
            }
            let old_len = old_n.norm();
            if old_n.dot(&new_n) < min_cos * old_len * new_len {
                return true;
            }
        }
        false
    }

    fn try_collapse(&mut self, c: &Candidate<T>, min_cos: T) -> bool {
        let (u, v) = (c.keep, c.remove);
        let shared = self.edge_faces(u, v);
        if shared.is_empty() {
            return false;
        }
        let edge_is_boundary = shared.len() == 1;
        if shared.len() > 2 {
            return false;
        }
        if !edge_is_boundary && self.boundary_vertex[u as usize] && self.boundary_vertex[v as usize]
        {
            return false;
        }
        // Link condition: common neighbors are exactly the apexes of the shared faces.
        let nu = self.neighbors(u);
        let nv = self.neighbors(v);
        let common = nu.iter().filter(|x| nv.binary_search(x).is_ok()).count();
        if common != shared.len() {
            return false;
        }
        // Do not collapse a closed component below a tetrahedron.
        if self.alive_faces - shared.len() < 4 && nu.len() + nv.len() <= 6 {
            return false;
        }
        if self.would_fold(u, v, &c.target, min_cos) || self.would_fold(v, u, &c.target, min_cos) {
            return false;
        }

        for &f in &shared {
            self.face_alive[f as usize] = false;
            self.alive_faces -= 1;
            for w in self.faces[f as usize] {
                self.vertex_faces[w as usize].retain(|&g| g != f);
            }
        }
        let moved: Vec<u32> = std::mem::take(&mut self.vertex_faces[v as usize]);
        for &f in &moved {
            for w in self.faces[f as usize].iter_mut() {
                if *w == v {
                    *w = u;
                }
            }
        }
        self.vertex_faces[u as usize].extend(moved);
        self.pos[u as usize] = c.target;
        let qv = self.quadric[v as usize];
        self.quadric[u as usize].add(&qv);
        self.boundary_vertex[u as usize] |= self.boundary_vertex[v as usize];
        self.stamp[u as usize] += 1;
        self.stamp[v as usize] += 1;
        true
    }
}

/// Reduces `mesh` to at most `target_faces` triangles.
///
/// Meshes already within budget are returned unchanged. Vertices are welded by
/// position first; each surviving vertex keeps the UV and normal of its original
/// representative, and collapsed vertices take those of the kept endpoint.
pub fn simplify_quadric<T: Real>(
    mesh: &TriMesh<T>,
    target_faces: usize,
) -> Result<TriMesh<T>, MeshError> {
    if target_faces < 4 {
        return Err(MeshError::InvalidParameter(format!(
            "target_faces must be >= 4, got {target_faces}"
        )));
    }
    if mesh.faces().len() <= target_faces {
        return Ok(mesh.clone());
    }
    let welded = mesh.weld();
    let nv = welded.positions.len();
    let mut state = State {
        pos: welded.positions.clone(),
        quadric: vec![Quadric::zero(); nv],
        faces: welded.faces.clone(),
        face_alive: vec![true; welded.faces.len()],
        vertex_faces: vec![Vec::new(); nv],
        boundary_vertex: vec![false; nv],
        stamp: vec![0; nv],
        alive_faces: welded.faces.len(),
    };
    for (fi, f) in state.faces.iter().enumerate() {
        for &v in f {
            state.vertex_faces[v as usize].push(fi as u32);
        }
    }

    let mut edge_use: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for (fi, f) in state.faces.iter().enumerate() {
        let [a, b, c] = f.map(|i| state.pos[i as usize]);
        let n = (b - a).cross(&(c - a));
        let area2 = n.norm();
        if area2 > T::zero() {
            let unit = n / area2;
            let q = Quadric::plane(&unit, unit.dot(&a.coords), area2 * T::lit(0.5));
            for &v in f {
                state.quadric[v as usize].add(&q);
            }
        }
        for k in 0..3 {
            let (x, y) = (f[k], f[(k + 1) % 3]);
            let e = edge_use
                .entry((x.min(y), x.max(y)))
                .or_insert((0, fi as u32));
            e.0 += 1;
        }
    }
    let weight = T::lit(BOUNDARY_WEIGHT);
    let mut edge_list: Vec<((u32, u32), (u32, u32))> = edge_use.into_iter().collect();
    edge_list.sort_unstable_by_key(|e| e.0);
    for &((a, b), (count, face)) in &edge_list {
        if count != 1 {
            continue;
        }
        let f = state.faces[face as usize];
        let [p0, p1, p2] = f.map(|i| state.pos[i as usize]);
        let face_n = (p1 - p0).cross(&(p2 - p0)).normalize();
        let (pa, pb) = (state.pos[a as usize], state.pos[b as usize]);
        let edge = pb - pa;
        let len2 = edge.norm_squared();
        let m = edge.cross(&face_n);
        let ml = m.norm();
        if ml > T::zero() {
            let m = m / ml;
            let q = Quadric::plane(&m, m.dot(&pa.coords), weight * len2);
            state.quadric[a as usize].add(&q);
            state.quadric[b as usize].add(&q);
        }
        state.boundary_vertex[a as usize] = true;
        state.boundary_vertex[b as usize] = true;
    }

    let mut min_cos = T::lit(MIN_NORMAL_COSINE);
    for _pass in 0..2 {
        let mut heap = BinaryHeap::new();
        for &((a, b), _) in &edge_list {
            if state.vertex_faces[a as usize].is_empty()
                || state.vertex_faces[b as usize].is_empty()
            {
                continue;
            }
            if state.edge_faces(a, b).is_empty() {
                continue;
            }
            heap.push(state.candidate(a, b));
        }
        while state.alive_faces > target_faces {
            let Some(c) = heap.pop() else { break };
            if c.stamps != (state.stamp[c.keep as usize], state.stamp[c.remove as usize]) {
                continue;
            }
            if state.try_collapse(&c, min_cos) {
                for n in state.neighbors(c.keep) {
                    heap.push(state.candidate(c.keep, n));
                }
            }
        }
        if state.alive_faces <= target_faces {
            break;
        }
        // Stuck: rebuild the edge list from live faces and allow stronger folds.
        min_cos = T::lit(-0.5);
        let mut live: Vec<(u32, u32)> = state
            .faces
            .iter()
            .zip(&state.face_alive)
            .filter(|(_, &alive)| alive)
            .flat_map(|(f, _)| {
                (0..3).map(move |k| (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3])))
            })
            .collect();
        live.sort_unstable();
        live.dedup();
        edge_list = live.into_iter().map(|e| (e, (0, 0))).collect();
    }
    if state.alive_faces > target_faces {
        return Err(MeshError::SimplificationStalled {
            faces: state.alive_faces,
            target: target_faces,
        });
    }

    let mut remap = vec![u32::MAX; nv];
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut uvs = Vec::new();
    let mut colors = Vec::new();
    let vertex_colors = match mesh.albedo() {
        crate::mesh::Albedo::VertexColors(c) => Some(c.clone()),
        _ => None,
    };
    let mut faces = Vec::with_capacity(state.alive_faces);
    for (f, &alive) in state.faces.iter().zip(&state.face_alive) {
        if !alive {
            continue;
        }
        faces.push(f.map(|w| {
            if remap[w as usize] == u32::MAX {
                remap[w as usize] = vertices.len() as u32;
                let rep = welded.representative[w as usize] as usize;
                vertices.push(state.pos[w as usize]);
                normals.push(mesh.normals()[rep]);
                uvs.push(mesh.uvs()[rep]);
                if let Some(c) = &vertex_colors {
                    colors.push(c[rep]);
                }
            }
            remap[w as usize]
        }));
    }
    let albedo = match vertex_colors {
        Some(_) => crate::mesh::Albedo::VertexColors(std::sync::Arc::new(colors)),
        None => mesh.albedo().clone(),
    };
    TriMesh::new(vertices, Some(normals), Some(uvs), faces, albedo)
}
