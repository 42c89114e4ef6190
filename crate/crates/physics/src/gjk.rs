//! Distance and penetration queries between placed convex shapes.

use crate::shape::Placed;
use nalgebra::{Matrix2, Matrix3, Point3, Unit, Vector2, Vector3};

#[derive(Clone, Copy, Debug)]
struct SupportPoint {
    w: Vector3<f64>,
    a: Point3<f64>,
    b: Point3<f64>,
}

fn support(a: &Placed, b: &Placed, d: &Vector3<f64>) -> SupportPoint {
    let pa = a.support(d);
    let pb = b.support(&-d);
    SupportPoint {
        w: pa - pb,
        a: pa,
        b: pb,
    }
}

/// Result of a proximity query. Normals point from the first shape to the second.
#[derive(Clone, Copy, Debug)]
pub enum Proximity {
    Separated {
        distance: f64,
        point_a: Point3<f64>,
        point_b: Point3<f64>,
    },
    Penetrating {
        depth: f64,
        normal: Unit<Vector3<f64>>,
        point_a: Point3<f64>,
        point_b: Point3<f64>,
    },
}

impl Proximity {
    /// Signed separation: negative when penetrating.
    pub fn separation(&self) -> f64 {
        match *self {
            Proximity::Separated { distance, .. } => distance,
            Proximity::Penetrating { depth, .. } => -depth,
        }
    }

    pub fn normal(&self) -> Option<Unit<Vector3<f64>>> {
        match *self {
            Proximity::Separated {
                point_a, point_b, ..
            } => Unit::try_new(point_b - point_a, 1e-14),
            Proximity::Penetrating { normal, .. } => Some(normal),
        }
    }

    /// Midpoint between the witness points.
    pub fn midpoint(&self) -> Point3<f64> {
        let (a, b) = match *self {
            Proximity::Separated {
                point_a, point_b, ..
            }
            | Proximity::Penetrating {
                point_a, point_b, ..
            } => (point_a, point_b),
        };
        nalgebra::center(&a, &b)
    }
}

const MAX_ITERATIONS: usize = 96;
const TOUCH_TOLERANCE: f64 = 1e-10;

/// Affine projection of the origin onto the points `p`; `None` when degenerate.
fn affine_projection(p: &[Vector3<f64>]) -> Option<(Vector3<f64>, [f64; 4])> {
    let mut l = [0.0; 4];
    match p.len() {
        1 => {
            l[0] = 1.0;
            Some((p[0], l))
        }
        2 => {
            let e = p[1] - p[0];
            let ee = e.norm_squared();
            if ee <= 1e-300 {
                return None;
            }
            let t = -p[0].dot(&e) / ee;
            l[0] = 1.0 - t;
            l[1] = t;
            Some((p[0] + e * t, l))
        }
        3 => {
            let e1 = p[1] - p[0];
            let e2 = p[2] - p[0];
            let g = Matrix2::new(e1.dot(&e1), e1.dot(&e2), e1.dot(&e2), e2.dot(&e2));
            let det = g.determinant();
            if det.abs() <= 1e-24 * g[(0, 0)] * g[(1, 1)] || det == 0.0 {
                return None;
            }
            let mu = g.try_inverse()? * Vector2::new(-p[0].dot(&e1), -p[0].dot(&e2));
            l[0] = 1.0 - mu.x - mu.y;
            l[1] = mu.x;
            l[2] = mu.y;
            Some((p[0] + e1 * mu.x + e2 * mu.y, l))
        }
        4 => {
            let e = [p[1] - p[0], p[2] - p[0], p[3] - p[0]];
            let m = Matrix3::from_columns(&e);
            let det = m.determinant();
            let scale = e[0].norm() * e[1].norm() * e[2].norm();
            if det.abs() <= 1e-12 * scale || det == 0.0 {
                return None;
            }
            let mu = m.try_inverse()? * (-p[0]);
            l[0] = 1.0 - mu.x - mu.y - mu.z;
            l[1] = mu.x;
            l[2] = mu.y;
            l[3] = mu.z;
            Some((Vector3::zeros(), l))
        }
        _ => None,
    }
}

/// Closest point of the simplex hull to the origin, pruning the simplex to the supporting subset.
fn reduce(simplex: &mut Vec<SupportPoint>) -> (Vector3<f64>, Vec<f64>) {
    let n = simplex.len();
    let mut best: Option<(f64, u32, Vector3<f64>, [f64; 4])> = None;
    let mut pts = Vec::with_capacity(4);
    for mask in 1u32..(1 << n) {
        pts.clear();
        for (i, s) in simplex.iter().enumerate() {
            if mask & (1 << i) != 0 {
                pts.push(s.w);
            }
        }
        let Some((x, l)) = affine_projection(&pts) else {
            continue;
        };
        if l[..pts.len()].iter().any(|&v| v < -1e-12) {
            continue;
        }
        let d = x.norm_squared();
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, mask, x, l));
        }
    }
    let (_, mask, x, l) = best.unwrap_or_else(|| {
        // All subsets degenerate: fall back to the single closest vertex.
        let (i, s) = simplex
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.w.norm_squared().total_cmp(&b.1.w.norm_squared()))
            .unwrap();
        (0.0, 1 << i, s.w, [1.0, 0.0, 0.0, 0.0])
    });
    let mut kept = Vec::with_capacity(4);
    for (i, s) in simplex.iter().enumerate() {
        if mask & (1 << i) != 0 {
            kept.push(*s);
        }
    }
    *simplex = kept;
    (x, l[..simplex.len()].to_vec())
}

fn witness(simplex: &[SupportPoint], l: &[f64]) -> (Point3<f64>, Point3<f64>) {
    let mut a = Vector3::zeros();
    let mut b = Vector3::zeros();
    for (s, &w) in simplex.iter().zip(l) {
        a += s.a.coords * w;
        b += s.b.coords * w;
    }
    (Point3::from(a), Point3::from(b))
}

/// Exact distance (GJK) or penetration (EPA) between two convex shapes.
pub fn proximity(a: &Placed, b: &Placed) -> Proximity {
    let mut v = a.center() - b.center();
    if v.norm_squared() < 1e-24 {
        v = Vector3::x();
    }
    let mut simplex = vec![support(a, b, &-v)];
    v = simplex[0].w;
    let mut lambdas = vec![1.0];
    for _ in 0..MAX_ITERATIONS {
        let vv = v.norm_squared();
        if vv <= TOUCH_TOLERANCE * TOUCH_TOLERANCE {
            return epa(a, b, simplex);
        }
        let w = support(a, b, &-v);
        if vv - v.dot(&w.w) <= 1e-12 * vv || simplex.iter().any(|s| s.w == w.w) {
            break;
        }
        let previous = (simplex.clone(), lambdas.clone(), v);
        simplex.push(w);
        let (x, l) = reduce(&mut simplex);
        if simplex.len() == 4 {
            return epa(a, b, simplex);
        }
        if x.norm_squared() >= vv {
            (simplex, lambdas, v) = previous;
            break;
        }
        v = x;
        lambdas = l;
    }
    let (point_a, point_b) = witness(&simplex, &lambdas);
    Proximity::Separated {
        distance: v.norm(),
        point_a,
        point_b,
    }
}

struct EpaFace {
    idx: [usize; 3],
    normal: Vector3<f64>,
    dist: f64,
}

fn make_face(verts: &[SupportPoint], idx: [usize; 3], interior: &Vector3<f64>) -> Option<EpaFace> {
    let [p0, p1, p2] = idx.map(|i| verts[i].w);
    let n = (p1 - p0).cross(&(p2 - p0));
    let len = n.norm();
    if !(len > 1e-300) {
        return None;
    }
    let mut normal = n / len;
    let mut idx = idx;
    if normal.dot(&(interior - p0)) > 0.0 {
        normal = -normal;
        idx.swap(1, 2);
    }
    Some(EpaFace {
        idx,
        normal,
        dist: normal.dot(&p0),
    })
}

/// Grows a lower-dimensional simplex that contains the origin into a tetrahedron.
fn inflate(a: &Placed, b: &Placed, simplex: &mut Vec<SupportPoint>) -> bool {
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    while simplex.len() < 4 {
        let dirs: Vec<Vector3<f64>> = match simplex.len() {
            1 => axes.iter().flat_map(|d| [*d, -d]).collect(),
            2 => {
                let e = simplex[1].w - simplex[0].w;
                let Some(e) = Unit::try_new(e, 1e-300) else {
                    return false;
                };
                let (u, w) = crate::tangent_basis(&e);
                (0..6)
                    .map(|k| {
                        let t = k as f64 * std::f64::consts::PI / 3.0;
                        u * t.cos() + w * t.sin()
                    })
                    .collect()
            }
            _ => {
                let n = (simplex[1].w - simplex[0].w).cross(&(simplex[2].w - simplex[0].w));
                vec![n, -n]
            }
        };
        let mut grown = false;
        for d in dirs {
            let s = support(a, b, &d);
            let mut trial = simplex.clone();
            trial.push(s);
            if affine_rank_ok(&trial) {
                *simplex = trial;
                grown = true;
                break;
            }
        }
        if !grown {
            return false;
        }
    }
    true
}

fn affine_rank_ok(s: &[SupportPoint]) -> bool {
    let scale = s.iter().map(|p| p.w.norm()).fold(1e-12, f64::max);
    let tol = 1e-9 * scale;
    match s.len() {
        2 => (s[1].w - s[0].w).norm() > tol,
        3 => (s[1].w - s[0].w).cross(&(s[2].w - s[0].w)).norm() > tol * scale,
        4 => {
            let v = (s[1].w - s[0].w)
                .cross(&(s[2].w - s[0].w))
                .dot(&(s[3].w - s[0].w));
            v.abs() > tol * scale * scale
        }
        _ => true,
    }
}

fn epa(a: &Placed, b: &Placed, mut simplex: Vec<SupportPoint>) -> Proximity {
    if !inflate(a, b, &mut simplex) {
        return touching(a, b, &simplex);
    }
    let interior = simplex.iter().fold(Vector3::zeros(), |acc, s| acc + s.w) / 4.0;
    let mut verts = simplex;
    let mut faces: Vec<EpaFace> = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
        .iter()
        .filter_map(|&f| make_face(&verts, f, &interior))
        .collect();
    if faces.len() < 4 {
        return touching(a, b, &verts);
    }
    let scale = verts.iter().map(|s| s.w.norm()).fold(1e-6, f64::max);
    let tol = 1e-9 * scale;

    let mut best = 0;
    for _ in 0..MAX_ITERATIONS {
        best = (0..faces.len())
            .min_by(|&i, &j| faces[i].dist.total_cmp(&faces[j].dist))
            .unwrap();
        let n = faces[best].normal;
        let s = support(a, b, &n);
        if n.dot(&s.w) - faces[best].dist <= tol {
            break;
        }
        let new = verts.len();
        verts.push(s);
        let mut edges: Vec<(usize, usize)> = Vec::new();
        faces.retain(|f| {
            if f.normal.dot(&(s.w - verts[f.idx[0]].w)) > 0.0 {
                for k in 0..3 {
                    let e = (f.idx[k], f.idx[(k + 1) % 3]);
                    if let Some(pos) = edges.iter().position(|&(x, y)| x == e.1 && y == e.0) {
                        edges.swap_remove(pos);
                    } else {
                        edges.push(e);
                    }
                }
                false
            } else {
                true
            }
        });
        for (i, j) in edges {
            if let Some(f) = make_face(&verts, [i, j, new], &interior) {
                faces.push(f);
            }
        }
        if faces.is_empty() {
            return touching(a, b, &verts[..4]);
        }
    }
    let f = &faces[best.min(faces.len() - 1)];
    let [s0, s1, s2] = f.idx.map(|i| verts[i]);
    let q = f.normal * f.dist;
    let l = barycentric(&q, &s0.w, &s1.w, &s2.w);
    let (point_a, point_b) = witness(&[s0, s1, s2], &l);
    Proximity::Penetrating {
        depth: f.dist.max(0.0),
        normal: Unit::new_unchecked(f.normal),
        point_a,
        point_b,
    }
}

fn barycentric(q: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> [f64; 3] {
    let v0 = b - a;
    let v1 = c - a;
    let v2 = q - a;
    let d00 = v0.dot(&v0);
    let d01 = v0.dot(&v1);
    let d11 = v1.dot(&v1);
    let d20 = v2.dot(&v0);
    let d21 = v2.dot(&v1);
    let den = d00 * d11 - d01 * d01;
    if den.abs() < 1e-300 {
        return [1.0, 0.0, 0.0];
    }
    let v = (d11 * d20 - d01 * d21) / den;
    let w = (d00 * d21 - d01 * d20) / den;
    [1.0 - v - w, v, w]
}

/// Zero-depth contact for shapes that touch without overlapping volume.
fn touching(a: &Placed, b: &Placed, simplex: &[SupportPoint]) -> Proximity {
    let d = b.center() - a.center();
    let normal = Unit::try_new(d, 1e-14).unwrap_or(Vector3::z_axis());
    let l = vec![1.0 / simplex.len() as f64; simplex.len()];
    let (point_a, point_b) = witness(simplex, &l);
    Proximity::Penetrating {
        depth: 0.0,
        normal,
        point_a,
        point_b,
    }
}

/// Overlap of the two shapes' projections on `axis` (positive when overlapping).
pub fn axis_overlap(a: &Placed, b: &Placed, axis: &Vector3<f64>) -> f64 {
    a.support(axis).coords.dot(axis) - b.support(&-axis).coords.dot(axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::CollisionShape;
    use nalgebra::{Isometry3, Translation3, UnitQuaternion};
    use slb_core::{convex_hull, primitives};

    fn cube() -> CollisionShape {
        let m = primitives::unit_cube::<f64>();
        CollisionShape::new(
            &convex_hull(m.vertices()).unwrap(),
            &Point3::new(0.5, 0.5, 0.5),
        )
    }

    #[test]
    fn separated_cubes_distance() {
        let s = cube();
        let ia = Isometry3::identity();
        let ib =
            Isometry3::from_parts(Translation3::new(1.5, 0.2, 0.1), UnitQuaternion::identity());
        let p = proximity(
            &Placed {
                shape: &s,
                iso: &ia,
            },
            &Placed {
                shape: &s,
                iso: &ib,
            },
        );
        match p {
            Proximity::Separated { distance, .. } => assert!((distance - 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert!((p.normal().unwrap().x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn overlapping_cubes_depth() {
        let s = cube();
        let ia = Isometry3::identity();
        let ib = Isometry3::from_parts(
            Translation3::new(0.0, 0.9, 0.05),
            UnitQuaternion::identity(),
        );
        let p = proximity(
            &Placed {
                shape: &s,
                iso: &ia,
            },
            &Placed {
                shape: &s,
                iso: &ib,
            },
        );
        match p {
            Proximity::Penetrating { depth, normal, .. } => {
                assert!((depth - 0.1).abs() < 1e-9, "{depth}");
                assert!((normal.y - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rotated_cube_separation() {
        let s = cube();
        let ia = Isometry3::identity();
        let rot = UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_4);
        let ib = Isometry3::from_parts(Translation3::new(1.3, 0.0, 0.0), rot);
        let p = proximity(
            &Placed {
                shape: &s,
                iso: &ia,
            },
            &Placed {
                shape: &s,
                iso: &ib,
            },
        );
        let expect = 1.3 - 0.5 - 0.5 * 2f64.sqrt();
        assert!((p.separation() - expect).abs() < 1e-9, "{p:?}");
    }
}
