//! Serializable record of everything sampled for one frame.

use serde::{Deserialize, Serialize};

/// Asset list entry: index into the configured list and its path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetRef {
    pub index: usize,
    pub path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    /// Unit normal facing the camera.
    pub normal: [f64; 3],
    pub point: [f64; 3],
    /// Whether the plane was drawn as textured geometry.
    pub visible: bool,
    pub texture: Option<AssetRef>,
    pub tile_size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialMode {
    Phong,
    CookTorrance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub mode: MaterialMode,
    pub metalness: f32,
    pub roughness: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StickerRecord {
    pub image: AssetRef,
    /// Projection direction in the object frame.
    pub direction: [f64; 3],
    pub rotation: f64,
    pub center: [f64; 3],
    pub half_extents: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance_id: u16,
    pub class_id: u16,
    pub mesh: String,
    /// Camera-from-object transform, row-major 4×4.
    pub pose: [f64; 16],
    pub material: MaterialRecord,
    pub sticker: Option<StickerRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightingRecord {
    /// Surface-to-light direction in the camera frame.
    pub direction: [f64; 3],
    pub radiance: [f32; 3],
    pub ambient: f32,
    pub environment: Option<AssetRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrangementMethod {
    Drop,
    CollisionFree,
    Injected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementRecord {
    pub method: ArrangementMethod,
    /// Simulation reached the sleep criterion (always true for non-simulated methods).
    pub settled: bool,
    /// Failed drop attempts before the method above succeeded.
    pub failed_attempts: u32,
    /// Meshes selected but left out because no free placement was found.
    pub omitted: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub plane: PlaneRecord,
    pub instances: Vec<InstanceRecord>,
    pub lighting: LightingRecord,
    pub background: Option<AssetRef>,
    pub arrangement: ArrangementRecord,
}
