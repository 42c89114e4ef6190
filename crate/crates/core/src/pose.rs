//! Rigid transforms between object (mesh) frames and the camera frame.

use nalgebra::{Isometry3, Matrix4, Rotation3, Translation3, UnitQuaternion};

/// Camera-from-object rigid transform.
pub type Pose = Isometry3<f64>;

/// Row-major 4×4 homogeneous matrix.
pub fn to_row_major(pose: &Pose) -> [f64; 16] {
    let m = pose.to_homogeneous();
    let mut out = [0.0; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = m[(r, c)];
        }
    }
    out
}

/// Inverse of [`to_row_major`]; re-orthonormalizes the rotation block.
pub fn from_row_major(m: &[f64; 16]) -> Pose {
    let h = Matrix4::from_row_slice(m);
    let rot = Rotation3::from_matrix(&h.fixed_view::<3, 3>(0, 0).into_owned());
    Isometry3::from_parts(
        Translation3::new(h[(0, 3)], h[(1, 3)], h[(2, 3)]),
        UnitQuaternion::from_rotation_matrix(&rot),
    )
}

/// Orthonormality and handedness check on the rotation part.
pub fn is_valid_rotation(pose: &Pose, tolerance: f64) -> bool {
    let r = pose.rotation.to_rotation_matrix().into_inner();
    let err = (r.transpose() * r - nalgebra::Matrix3::identity()).amax();
    err <= tolerance && (r.determinant() - 1.0).abs() <= tolerance
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn row_major_round_trip() {
        let pose = Isometry3::new(Vector3::new(0.1, -0.2, 0.9), Vector3::new(0.3, 0.2, -1.1));
        let back = from_row_major(&to_row_major(&pose));
        assert!((back.to_homogeneous() - pose.to_homogeneous()).amax() < 1e-12);
        assert!(is_valid_rotation(&back, 1e-9));
        assert_eq!(to_row_major(&pose)[15], 1.0);
    }
}
