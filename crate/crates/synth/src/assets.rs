//! Loading meshes and image assets named by a [`GeneratorConfig`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::RgbImage;
use nalgebra::Point3;
use rayon::prelude::*;
use slb_core::color::LinearImage;
use slb_core::{
    convex_hull, inertial_properties, load_mesh, simplify_quadric, Mesh, PHYSICS_FACE_BUDGET,
};
use slb_physics::BodyModel;
use slb_render::scene::fit_background;
use slb_render::EnvironmentMap;

use crate::config::{GeneratorConfig, MeshEntry};

#[derive(Debug, thiserror::Error)]
pub enum AssetError {
    #[error("mesh {id:?} ({}): {message}", path.display())]
    Mesh {
        id: String,
        path: PathBuf,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
}

/// A configured object: the original mesh for rendering and its simplified hull for physics.
#[derive(Debug)]
pub struct MeshAsset {
    pub id: String,
    pub class_id: u16,
    pub render: Arc<Mesh>,
    pub model: Arc<BodyModel>,
    /// Face count of the mesh the collision hull was built from.
    pub physics_faces: usize,
    pub bounding_sphere: (Point3<f64>, f64),
}

impl MeshAsset {
    pub fn build(entry: &MeshEntry, mesh: Mesh) -> Result<Self, AssetError> {
        let err = |message: String| AssetError::Mesh {
            id: entry.id.clone(),
            path: entry.path.clone(),
            message,
        };
        let mut physics = if mesh.faces().len() > PHYSICS_FACE_BUDGET {
            simplify_quadric(&mesh, PHYSICS_FACE_BUDGET).map_err(|e| err(e.to_string()))?
        } else {
            mesh.clone()
        };
        let mut hull = convex_hull(physics.vertices()).map_err(|e| err(e.to_string()))?;
        // Open meshes can carry more vertices than their face count suggests.
        let mut target = PHYSICS_FACE_BUDGET;
        while hull.faces().len() > PHYSICS_FACE_BUDGET && target > 8 {
            target /= 2;
            physics = simplify_quadric(&physics, target).map_err(|e| err(e.to_string()))?;
            hull = convex_hull(physics.vertices()).map_err(|e| err(e.to_string()))?;
        }
        let inertial = inertial_properties(&mesh, entry.density).map_err(|e| err(e.to_string()))?;
        if inertial.hull_fallback {
            log::warn!(
                "mesh {:?} is not watertight; mass properties use its convex hull",
                entry.id
            );
        }
        Ok(Self {
            id: entry.id.clone(),
            class_id: entry.class_id,
            bounding_sphere: mesh.bounding_sphere(),
            physics_faces: physics.faces().len(),
            model: BodyModel::new(hull, inertial),
            render: Arc::new(mesh),
        })
    }
}

/// Image asset with its source path, used in scene records.
#[derive(Clone, Debug)]
pub struct Named<T> {
    pub path: PathBuf,
    pub value: Arc<T>,
}

#[derive(Debug)]
pub struct AssetLibrary {
    pub meshes: Vec<MeshAsset>,
    /// Backgrounds decoded and fitted to the camera resolution.
    pub backgrounds: Vec<Named<LinearImage>>,
    pub environments: Vec<Named<EnvironmentMap>>,
    pub stickers: Vec<Named<RgbImage>>,
    pub plane_textures: Vec<Named<RgbImage>>,
}

fn load_rgb(path: &Path) -> Result<RgbImage, AssetError> {
    image::open(path)
        .map(|i| i.to_rgb8())
        .map_err(|e| AssetError::Image {
            path: path.into(),
            message: e.to_string(),
        })
}

fn load_all<T: Send + Sync>(
    paths: &[PathBuf],
    f: impl Fn(&Path) -> Result<T, AssetError> + Sync,
) -> Result<Vec<Named<T>>, AssetError> {
    paths
        .par_iter()
        .map(|p| {
            Ok(Named {
                path: p.clone(),
                value: Arc::new(f(p)?),
            })
        })
        .collect()
}

impl AssetLibrary {
    pub fn load(config: &GeneratorConfig) -> Result<Self, AssetError> {
        let meshes = config
            .meshes
            .par_iter()
            .map(|e| {
                let mesh = load_mesh::<f64>(&e.path).map_err(|err| AssetError::Mesh {
                    id: e.id.clone(),
                    path: e.path.clone(),
                    message: err.to_string(),
                })?;
                MeshAsset::build(e, mesh)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (w, h) = (config.camera.width, config.camera.height);
        let a = &config.assets;
        Ok(Self {
            meshes,
            backgrounds: load_all(&a.backgrounds, |p| Ok(fit_background(&load_rgb(p)?, w, h)))?,
            environments: load_all(&a.environments, |p| {
                EnvironmentMap::load(p).map_err(|e| AssetError::Image {
                    path: p.into(),
                    message: e.to_string(),
                })
            })?,
            stickers: load_all(&a.stickers, load_rgb)?,
            plane_textures: load_all(&a.plane_textures, load_rgb)?,
        })
    }

    pub fn mesh(&self, id: &str) -> Option<usize> {
        self.meshes.iter().position(|m| m.id == id)
    }
}
