use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: face {face} references vertex {index} but only {vertex_count} vertices exist")]
    FaceIndexOutOfRange {
        path: PathBuf,
        line: usize,
        face: usize,
        index: i64,
        vertex_count: usize,
    },
    #[error("{path}: unsupported format: {message}")]
    Unsupported { path: PathBuf, message: String },
    #[error("{path}: texture decode failed: {source}")]
    Texture {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("mesh has no faces")]
    NoFaces,
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("simplification stalled at {faces} faces (target {target})")]
    SimplificationStalled { faces: usize, target: usize },
    #[error(transparent)]
    Hull(#[from] HullError),
}

/// Degenerate inputs to [`crate::hull::convex_hull`], reported distinctly.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("convex hull needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("input points are coincident")]
    Coincident,
    #[error("input points are collinear")]
    Collinear,
    #[error("input points are coplanar")]
    Coplanar,
    #[error("input contains non-finite coordinates")]
    NonFinite,
}
