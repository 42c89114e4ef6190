//! Mass, center of mass and inertia tensor of uniform-density polyhedra.

use nalgebra::{Matrix3, Point3};

use crate::error::MeshError;
use crate::hull::convex_hull;
use crate::mesh::TriMesh;
use crate::real::Real;

/// Default object density in kg/m³.
pub const DEFAULT_DENSITY: f64 = 500.0;

/// Rigid-body mass properties in the mesh frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MassProperties<T: Real> {
    /// kg
    pub mass: T,
    /// m, mesh frame
    pub center_of_mass: Point3<T>,
    /// kg·m² about the center of mass, mesh axes
    pub inertia: Matrix3<T>,
    /// Set when the mesh was not watertight and its convex hull was integrated instead.
    pub hull_fallback: bool,
}

impl<T: Real> MassProperties<T> {
    /// Principal moments in ascending order.
    pub fn principal_moments(&self) -> [T; 3] {
        let eig = self.inertia.symmetric_eigen();
        let mut m = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        m
    }
}

/// Integrates the solid bounded by a closed, outward-wound triangle mesh.
///
/// Meshes that are not watertight (or enclose non-positive volume) fall back to
/// their convex hull and set [`MassProperties::hull_fallback`].
pub fn inertial_properties<T: Real>(
    mesh: &TriMesh<T>,
    density: T,
) -> Result<MassProperties<T>, MeshError> {
    if !(density > T::zero()) || !density.is_finite() {
        return Err(MeshError::InvalidParameter(format!(
            "density must be positive, got {}",
            density.as_f64()
        )));
    }
    let welded = mesh.weld();
    if welded.boundary_edge_count() == 0 {
        if let Some(props) = integrate(&welded.positions, &welded.faces, density) {
            return Ok(props);
        }
    }
    let hull = convex_hull(mesh.vertices())?;
    let mut props = integrate(hull.vertices(), hull.faces(), density)
        .ok_or_else(|| MeshError::Invalid("convex hull has no volume".into()))?;
    props.hull_fallback = true;
    Ok(props)
}

/// Sums signed tetrahedra `(origin, a, b, c)` using the canonical tetrahedron
/// covariance. Returns `None` for non-positive volume.
fn integrate<T: Real>(
    vertices: &[Point3<T>],
    faces: &[[u32; 3]],
    density: T,
) -> Option<MassProperties<T>> {
    // Covariance of the canonical tetrahedron (0, e1, e2, e3) with unit density.
    let two = T::lit(1.0 / 60.0);
    let one = T::lit(1.0 / 120.0);
    let canonical = Matrix3::new(two, one, one, one, two, one, one, one, two);

    // Shift to a local origin near the mesh to limit cancellation.
    let origin = vertices[faces[0][0] as usize].coords;
    let mut six_volume = T::zero();
    let mut first_moment = nalgebra::Vector3::zeros();
    let mut covariance = Matrix3::zeros();
    for f in faces {
        let [a, b, c] = f.map(|i| vertices[i as usize].coords - origin);
        let basis = Matrix3::from_columns(&[a, b, c]);
        let det = basis.determinant();
        six_volume += det;
        first_moment += (a + b + c) * (det * T::lit(1.0 / 24.0));
        covariance += basis * canonical * basis.transpose() * det;
    }
    let volume = six_volume / T::lit(6.0);
    if !(volume > T::zero()) {
        return None;
    }
    let com_local = first_moment / volume;
    let mass = density * volume;
    // Covariance about the center of mass (parallel axis theorem for second moments).
    let c = covariance * density - com_local * com_local.transpose() * mass;
    let inertia = Matrix3::identity() * c.trace() - c;
    // Symmetrize away rounding.
    let inertia = (inertia + inertia.transpose()) * T::lit(0.5);
    Some(MassProperties {
        mass,
        center_of_mass: Point3::from(com_local + origin),
        inertia,
        hull_fallback: false,
    })
}
