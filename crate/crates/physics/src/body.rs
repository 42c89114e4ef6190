use crate::shape::CollisionShape;
use nalgebra::{Isometry3, Matrix3, Point3, Translation3, UnitQuaternion, Vector3};
use slb_core::{ConvexMesh, InertialProps, Pose};
use std::sync::Arc;

/// Static description of a simulated object.
#[derive(Debug)]
pub struct BodyModel {
    pub hull: ConvexMesh,
    pub inertial: InertialProps,
    pub shape: CollisionShape,
    inv_inertia: Matrix3<f64>,
}

impl BodyModel {
    pub fn new(hull: ConvexMesh, inertial: InertialProps) -> Arc<Self> {
        let shape = CollisionShape::new(&hull, &inertial.center_of_mass);
        let inv_inertia = inertial
            .inertia
            .try_inverse()
            .unwrap_or_else(Matrix3::zeros);
        Arc::new(Self {
            hull,
            inertial,
            shape,
            inv_inertia,
        })
    }

    pub fn inv_mass(&self) -> f64 {
        1.0 / self.inertial.mass
    }
}

/// Dynamic state; `position` is the centre of mass in camera coordinates.
#[derive(Clone, Debug)]
pub struct RigidBodyState {
    pub position: Point3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
    pub model: Arc<BodyModel>,
}

impl RigidBodyState {
    /// Body at rest with the given object pose (object frame to camera frame).
    pub fn at_pose(model: Arc<BodyModel>, pose: &Pose) -> Self {
        let position = pose * model.inertial.center_of_mass;
        Self {
            position,
            orientation: pose.rotation,
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            model,
        }
    }

    /// Object pose: maps mesh coordinates to camera coordinates.
    pub fn pose(&self) -> Pose {
        let t = self.position.coords - self.orientation * self.model.inertial.center_of_mass.coords;
        Isometry3::from_parts(Translation3::from(t), self.orientation)
    }

    /// Transform of the centre-of-mass frame used by the collision shape.
    pub fn iso(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position.coords), self.orientation)
    }

    pub fn inv_inertia_world(&self) -> Matrix3<f64> {
        let r = self.orientation.to_rotation_matrix();
        r.matrix() * self.model.inv_inertia * r.matrix().transpose()
    }

    pub fn inertia_world(&self) -> Matrix3<f64> {
        let r = self.orientation.to_rotation_matrix();
        r.matrix() * self.model.inertial.inertia * r.matrix().transpose()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.model.inertial.mass * self.linear_velocity.norm_squared()
            + 0.5
                * self
                    .angular_velocity
                    .dot(&(self.inertia_world() * self.angular_velocity))
    }

    pub fn momentum(&self) -> Vector3<f64> {
        self.linear_velocity * self.model.inertial.mass
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.orientation.coords.iter().all(|v| v.is_finite())
            && self.linear_velocity.iter().all(|v| v.is_finite())
            && self.angular_velocity.iter().all(|v| v.is_finite())
    }
}
