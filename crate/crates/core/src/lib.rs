//! Object meshes for scene synthesis: loading, quadric simplification, convex hulls
//! and uniform-density mass properties.
//!
//! The geometry is generic over [`Real`] (`f32` or `f64`); the aliases below fix the
//! double-precision types used by the rest of the pipeline.

pub mod color;
pub mod error;
pub mod hull;
pub mod inertia;
pub mod io;
pub mod mesh;
pub mod pose;
pub mod primitives;
pub mod real;
pub mod simplify;

pub use error::{HullError, MeshError};
pub use hull::convex_hull;
pub use inertia::{inertial_properties, DEFAULT_DENSITY};
pub use io::load_mesh;
pub use mesh::Albedo;
pub use pose::Pose;
pub use real::Real;
pub use simplify::simplify_quadric;

pub type Mesh = mesh::TriMesh<f64>;
pub type Mesh32 = mesh::TriMesh<f32>;
pub type ConvexMesh = hull::Hull<f64>;
pub type ConvexMesh32 = hull::Hull<f32>;
pub type InertialProps = inertia::MassProperties<f64>;

/// Face budget for meshes entering physics simulation.
pub const PHYSICS_FACE_BUDGET: usize = 2000;
