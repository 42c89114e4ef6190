#![allow(dead_code)]

use nalgebra::Point3;
use slb_core::{convex_hull, inertial_properties, primitives, Mesh};
use slb_oracle::sat::Polytope;
use slb_physics::{BodyModel, SupportPlane};
use std::sync::Arc;

pub fn model(mesh: &Mesh) -> Arc<BodyModel> {
    let hull = convex_hull(mesh.vertices()).unwrap();
    let props = inertial_properties(&hull.to_mesh(), 500.0).unwrap();
    BodyModel::new(hull, props)
}

/// Five household-object proxies in the 5–25 cm range.
pub fn ycb_like() -> Vec<Arc<BodyModel>> {
    let bottle = primitives::lathe::<f64>(
        &[(0.035, 0.0), (0.035, 0.12), (0.015, 0.17), (0.015, 0.2)],
        20,
    );
    vec![
        model(&primitives::textured_box::<f64>([0.16, 0.06, 0.21])),
        model(&primitives::cylinder::<f64>(0.034, 0.1, 24)),
        model(&bottle),
        model(&primitives::icosphere::<f64>(0.035, 2)),
        model(&primitives::textured_box::<f64>([0.09, 0.05, 0.05])),
    ]
}

pub fn polytope(model: &BodyModel, pose: &slb_core::Pose) -> Polytope {
    let v = model.hull.vertices().iter().map(|p| {
        let q: Point3<f64> = pose * p;
        [q.x, q.y, q.z]
    });
    Polytope::new(v.collect(), model.hull.faces().to_vec())
}

/// Lowest hull vertex height above the plane, computed directly from the mesh.
pub fn plane_clearance(model: &BodyModel, pose: &slb_core::Pose, plane: &SupportPlane) -> f64 {
    model
        .hull
        .vertices()
        .iter()
        .map(|p| plane.normal.dot(&(pose * p - plane.support_point)))
        .fold(f64::INFINITY, f64::min)
}
