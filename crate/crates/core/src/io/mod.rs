//! Mesh file formats: Wavefront OBJ (+ MTL) and PLY, plus an OBJ writer.

mod obj;
mod ply;

use std::path::Path;
use std::sync::Arc;

use crate::error::MeshError;
use crate::mesh::{Albedo, TriMesh};
use crate::real::Real;

pub use obj::{parse_obj, write_obj};
pub use ply::parse_ply;

/// Loads an OBJ or PLY mesh, dispatching on the file extension.
pub fn load_mesh<T: Real>(path: impl AsRef<Path>) -> Result<TriMesh<T>, MeshError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| MeshError::Io {
        path: path.into(),
        source,
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    let mesh = match ext.as_deref() {
        Some("obj") => obj::parse_obj(&bytes, path)?,
        Some("ply") => ply::parse_ply(&bytes, path)?,
        other => {
            return Err(MeshError::Unsupported {
                path: path.into(),
                message: format!("unknown mesh extension {:?}", other.unwrap_or("")),
            })
        }
    };
    Ok(mesh.cast())
}

/// Loads an 8-bit RGB texture (PNG or JPEG).
pub fn load_texture(path: &Path) -> Result<Albedo, MeshError> {
    let img = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(source) => MeshError::Io {
            path: path.into(),
            source,
        },
        source => MeshError::Texture {
            path: path.into(),
            source,
        },
    })?;
    Ok(Albedo::Texture(Arc::new(img.to_rgb8())))
}

/// Drops faces below the degeneracy threshold, warning about each batch.
pub(crate) fn drop_degenerate(
    vertices: &[nalgebra::Point3<f64>],
    faces: Vec<[u32; 3]>,
    path: &Path,
) -> Vec<[u32; 3]> {
    let before = faces.len();
    let kept: Vec<_> = faces
        .into_iter()
        .filter(|f| {
            let [a, b, c] = f.map(|i| &vertices[i as usize]);
            crate::mesh::triangle_area(a, b, c) > crate::mesh::MIN_TRIANGLE_AREA
        })
        .collect();
    if kept.len() != before {
        log::warn!(
            "{}: dropped {} degenerate faces",
            path.display(),
            before - kept.len()
        );
    }
    kept
}
