//! Physically plausible resting arrangements of convex objects on a support plane.
//!
//! Bodies are dropped above a [`SupportPlane`], pulled down by gravity along the
//! plane normal and toward the support point by a weak attractor, and simulated with
//! a sequential-impulse solver until they come to rest.

pub mod arrange;
pub mod body;
pub mod contact;
pub mod gjk;
pub mod params;
pub mod plane;
pub mod shape;
pub mod world;

pub use arrange::{
    check_poses, drop_arrange, sample_collision_free, Arrangement, CollisionFree, PoseCheck,
    POSE_TOLERANCE,
};
pub use body::{BodyModel, RigidBodyState};
pub use params::ArrangementParams;
pub use plane::{sample_support_plane, SupportPlane, CAMERA_FORWARD};
pub use world::{step_simulation, World};

use nalgebra::Vector3;

#[derive(Debug, thiserror::Error)]
pub enum ArrangementError {
    #[error("invalid arrangement parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite state for body {body} at step {step}")]
    NonFinite { body: usize, step: usize },
    #[error(
        "bodies still moving at the step limit (|v| = {linear:.4} m/s, |w| = {angular:.4} rad/s)"
    )]
    NotSettled { linear: f64, angular: f64 },
    #[error(
        "final poses overlap by {penetration:.4} m or sink {below_plane:.4} m below the plane"
    )]
    Overlap { penetration: f64, below_plane: f64 },
}

/// Deterministic orthonormal `(u, w)` completing `n` to a right-handed frame.
pub fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = n.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vector3::x()
    } else if a.y <= a.z {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = n.cross(&axis).normalize();
    let w = n.cross(&u);
    (u, w)
}
