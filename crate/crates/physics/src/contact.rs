//! Contact manifolds between hulls and against the support plane.

use crate::gjk::{proximity, Proximity};
use crate::plane::SupportPlane;
use crate::shape::Placed;
use nalgebra::{Point3, Unit, Vector3};

/// Faces closer than this to the contact normal are clipped into a multi-point manifold.
const FACE_ALIGNMENT: f64 = 0.99;
const MAX_POINTS: usize = 4;
/// Only points this close to the deepest one compete for the support polygon (m).
const SUPPORT_WINDOW: f64 = 0.002;

#[derive(Clone, Copy, Debug)]
pub struct ContactPoint {
    pub point: Point3<f64>,
    /// Signed gap along the normal; negative means penetration.
    pub separation: f64,
}

/// Normal points from the first body to the second.
#[derive(Clone, Debug)]
pub struct Manifold {
    pub normal: Unit<Vector3<f64>>,
    pub points: Vec<ContactPoint>,
}

pub fn body_manifold(a: &Placed, b: &Placed, margin: f64) -> Option<Manifold> {
    let gap = (b.center() - a.center()).norm() - a.shape.radius() - b.shape.radius();
    if gap > margin {
        return None;
    }
    let prox = proximity(a, b);
    let sep = prox.separation();
    if sep > margin {
        return None;
    }
    let normal = prox
        .normal()
        .or_else(|| Unit::try_new(b.center() - a.center(), 1e-14))
        .unwrap_or(Vector3::z_axis());
    if let Some(m) = clip_faces(a, b, &normal, margin) {
        return Some(m);
    }
    Some(Manifold {
        normal,
        points: vec![ContactPoint {
            point: single_point(&prox),
            separation: sep,
        }],
    })
}

fn single_point(prox: &Proximity) -> Point3<f64> {
    prox.midpoint()
}

fn clip_faces(a: &Placed, b: &Placed, n: &Unit<Vector3<f64>>, margin: f64) -> Option<Manifold> {
    let (fa, da) = a.best_face(n);
    let (fb, db) = b.best_face(&-n.into_inner());
    if da.max(db) < FACE_ALIGNMENT {
        return None;
    }
    let (reference, incident, ref_face, flip) = if da >= db {
        (a, b, fa, false)
    } else {
        (b, a, fb, true)
    };
    let (ref_n, ref_poly) = reference.face_polygon(ref_face);
    let (inc_face, _) = incident.best_face(&-ref_n);
    let (_, mut poly) = incident.face_polygon(inc_face);

    for k in 0..ref_poly.len() {
        let p0 = ref_poly[k];
        let p1 = ref_poly[(k + 1) % ref_poly.len()];
        let side = (p1 - p0).cross(&ref_n);
        poly = clip_polygon(&poly, &side, side.dot(&p0.coords));
        if poly.is_empty() {
            return None;
        }
    }
    let offset = ref_n.dot(&ref_poly[0].coords);
    let points: Vec<ContactPoint> = poly
        .into_iter()
        .filter_map(|q| {
            let s = ref_n.dot(&q.coords) - offset;
            (s <= margin).then(|| ContactPoint {
                point: q - ref_n * (0.5 * s),
                separation: s,
            })
        })
        .collect();
    if points.is_empty() {
        return None;
    }
    let normal = Unit::new_normalize(if flip { -ref_n } else { ref_n });
    Some(Manifold {
        normal,
        points: reduce(points, &normal),
    })
}

/// Sutherland–Hodgman against the half-space `side·x <= offset`.
fn clip_polygon(poly: &[Point3<f64>], side: &Vector3<f64>, offset: f64) -> Vec<Point3<f64>> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let dp = side.dot(&p.coords) - offset;
        let dq = side.dot(&q.coords) - offset;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp <= 0.0) != (dq <= 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Contacts between a body and the plane; the normal points from the plane to the body.
pub fn plane_manifold(body: &Placed, plane: &SupportPlane, margin: f64) -> Option<Manifold> {
    let n = plane.normal.into_inner();
    let lowest = body.support(&-n);
    if plane.signed_distance(&lowest) > margin {
        return None;
    }
    let points: Vec<ContactPoint> = body
        .shape
        .vertices()
        .iter()
        .filter_map(|v| {
            let p = body.iso * v;
            let s = plane.signed_distance(&p);
            (s <= margin).then(|| ContactPoint {
                point: p - n * (0.5 * s),
                separation: s,
            })
        })
        .collect();
    Some(Manifold {
        normal: plane.normal,
        points: reduce(points, &plane.normal),
    })
}

/// Keeps at most four points: the deepest, then the ones spanning the largest area.
///
/// Points well above the deepest one are dropped first so that speculative contacts
/// on neighbouring facets do not displace the ones actually carrying load.
pub fn reduce(mut points: Vec<ContactPoint>, normal: &Vector3<f64>) -> Vec<ContactPoint> {
    if points.len() <= MAX_POINTS {
        return points;
    }
    let min_sep = points
        .iter()
        .map(|p| p.separation)
        .fold(f64::INFINITY, f64::min);
    let near: Vec<ContactPoint> = points
        .iter()
        .copied()
        .filter(|p| p.separation <= min_sep + SUPPORT_WINDOW)
        .collect();
    if near.len() >= MAX_POINTS {
        points = near;
    } else {
        points.sort_by(|a, b| a.separation.total_cmp(&b.separation));
    }
    if points.len() <= MAX_POINTS {
        return points;
    }
    let deepest = (0..points.len())
        .min_by(|&i, &j| points[i].separation.total_cmp(&points[j].separation))
        .unwrap();
    let p0 = points.swap_remove(deepest);
    let far = argmax(&points, |c| (c.point - p0.point).norm_squared());
    let p1 = points.swap_remove(far);
    let area = |c: &ContactPoint, x: &Point3<f64>, y: &Point3<f64>| {
        (y - x).cross(&(c.point - x)).dot(normal)
    };
    let third = argmax(&points, |c| area(c, &p0.point, &p1.point).abs());
    let p2 = points.swap_remove(third);
    // Orient the triangle counter-clockwise, then take the point furthest outside any edge.
    let (p1, p2) = if area(&p2, &p0.point, &p1.point) >= 0.0 {
        (p1, p2)
    } else {
        (p2, p1)
    };
    let tri = [p0.point, p1.point, p2.point];
    let fourth = argmax(&points, |c| {
        (0..3)
            .map(|k| -area(c, &tri[k], &tri[(k + 1) % 3]))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let p3 = points.swap_remove(fourth);
    vec![p0, p1, p2, p3]
}

fn argmax(points: &[ContactPoint], key: impl Fn(&ContactPoint) -> f64) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in points.iter().enumerate() {
        let k = key(p);
        if k > best.1 {
            best = (i, k);
        }
    }
    best.0
}
