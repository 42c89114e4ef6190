//! Generator configuration: TOML schema, defaults and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slb_physics::ArrangementParams;
use slb_render::PinholeCamera;
use slb_sensor::EffectRanges;

/// Environment variable overriding the master seed.
pub const SEED_ENV: &str = "SLB_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {key}: {message}")]
    Parse {
        path: PathBuf,
        key: String,
        message: String,
    },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshEntry {
    pub id: String,
    pub path: PathBuf,
    pub class_id: u16,
    /// Defaults to the mesh id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_name: Option<String>,
    #[serde(default = "default_density")]
    pub density: f64,
}

impl MeshEntry {
    pub fn class_name(&self) -> &str {
        self.class_name.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub near: f64,
    pub far: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            fx: 580.0,
            fy: 580.0,
            cx: 320.0,
            cy: 240.0,
            near: 0.05,
            far: 6.5,
        }
    }
}

impl CameraConfig {
    pub fn camera(&self) -> PinholeCamera {
        PinholeCamera {
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            width: self.width,
            height: self.height,
            near: self.near,
            far: self.far,
        }
    }

    /// Changes the image size, scaling the intrinsics with it.
    pub fn resized(&self, width: u32, height: u32) -> Self {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        Self {
            width,
            height,
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: self.cx * sx,
            cy: self.cy * sy,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderToggles {
    pub pbr_ibl: bool,
    pub ssao: bool,
    pub stickers: bool,
    pub cam_model: bool,
}

impl Default for RenderToggles {
    fn default() -> Self {
        Self {
            pbr_ibl: true,
            ssao: true,
            stickers: true,
            cam_model: true,
        }
    }
}

impl RenderToggles {
    pub fn render_flags(&self) -> slb_render::RenderFlags {
        slb_render::RenderFlags {
            stickers: self.stickers,
            ssao: self.ssao,
            pbr: self.pbr_ibl,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Support plane distance range (m).
    pub d_range: [f64; 2],
    /// Maximum plane tilt away from facing the camera (rad).
    pub tilt_max: f64,
    /// Chance of drawing a textured support plane instead of a background image, when
    /// plane textures are configured.
    pub plane_probability: f64,
    /// Texture repeat length on the plane (m).
    pub plane_tile_size: [f64; 2],
    pub sticker_probability: f64,
    pub roughness_min: f32,
    pub light_radiance: [f32; 2],
    /// JSON file with poses to use instead of arrangement for listed frames.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pose_file: Option<PathBuf>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            d_range: [0.6, 1.2],
            tilt_max: 0.5,
            plane_probability: 0.5,
            plane_tile_size: [0.2, 0.6],
            sticker_probability: 0.5,
            roughness_min: 0.1,
            light_radiance: [0.6, 1.0],
            pose_file: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssetLists {
    pub backgrounds: Vec<PathBuf>,
    pub environments: Vec<PathBuf>,
    pub stickers: Vec<PathBuf>,
    pub plane_textures: Vec<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub meshes: Vec<MeshEntry>,
    #[serde(default = "default_object_count")]
    pub object_count: u32,
    #[serde(default = "default_true")]
    pub unique_objects: bool,
    #[serde(default)]
    pub fallback_probability: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub camera: CameraConfig,
    #[serde(default)]
    pub render: RenderToggles,
    #[serde(default)]
    pub scene: SceneConfig,
    #[serde(default)]
    pub physics: ArrangementParams,
    #[serde(default)]
    pub sensor: EffectRanges,
    #[serde(default)]
    pub assets: AssetLists,
}

fn default_density() -> f64 {
    slb_core::DEFAULT_DENSITY
}
fn default_object_count() -> u32 {
    5
}
fn default_true() -> bool {
    true
}
fn default_workers() -> usize {
    4
}

fn probability(key: &str, p: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("expected a probability in [0, 1], got {p}"),
        ))
    }
}

impl GeneratorConfig {
    /// Parses TOML text; errors carry the offending key path.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let parse_err = |key: String, message: String| ConfigError::Parse {
            path: origin.into(),
            key,
            message,
        };
        let de = toml::Deserializer::parse(text)
            .map_err(|e| parse_err("(document)".into(), e.to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            parse_err(key, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.meshes.is_empty() && self.object_count > 0 {
            return Err(invalid(
                "meshes",
                "at least one mesh is required when object_count > 0",
            ));
        }
        let mut seen = std::collections::BTreeMap::new();
        for (i, m) in self.meshes.iter().enumerate() {
            let key = format!("meshes[{i}]");
            if m.class_id == 0 {
                return Err(invalid(
                    &format!("{key}.class_id"),
                    "class id 0 is reserved for background",
                ));
            }
            if !(m.density > 0.0 && m.density.is_finite()) {
                return Err(invalid(
                    &format!("{key}.density"),
                    format!("must be positive, got {}", m.density),
                ));
            }
            if self.meshes[..i].iter().any(|o| o.id == m.id) {
                return Err(invalid(
                    &format!("{key}.id"),
                    format!("duplicate mesh id {:?}", m.id),
                ));
            }
            if let Some(prev) = seen.insert(m.class_id, m.class_name()) {
                if prev != m.class_name() {
                    return Err(invalid(
                        &format!("{key}.class_name"),
                        format!(
                            "class {} is named both {prev:?} and {:?}",
                            m.class_id,
                            m.class_name()
                        ),
                    ));
                }
            }
        }
        if self.unique_objects && self.object_count as usize > self.meshes.len() {
            return Err(invalid(
                "object_count",
                format!(
                    "{} unique objects requested but only {} meshes",
                    self.object_count,
                    self.meshes.len()
                ),
            ));
        }
        if self.object_count > u16::MAX as u32 {
            return Err(invalid("object_count", "too many objects per scene"));
        }
        probability("fallback_probability", self.fallback_probability)?;
        if self.workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        self.camera
            .camera()
            .validate()
            .map_err(|m| invalid("camera", m))?;
        let s = &self.scene;
        if !(s.d_range[0] > 0.0 && s.d_range[0] <= s.d_range[1]) {
            return Err(invalid("scene.d_range", "need 0 < min <= max"));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&s.tilt_max) {
            return Err(invalid("scene.tilt_max", "must lie in [0, pi/2)"));
        }
        probability("scene.plane_probability", s.plane_probability)?;
        probability("scene.sticker_probability", s.sticker_probability)?;
        if !(s.plane_tile_size[0] > 0.0 && s.plane_tile_size[0] <= s.plane_tile_size[1]) {
            return Err(invalid("scene.plane_tile_size", "need 0 < min <= max"));
        }
        if !(0.0..=1.0).contains(&s.roughness_min) {
            return Err(invalid("scene.roughness_min", "must lie in [0, 1]"));
        }
        if !(s.light_radiance[0] >= 0.0 && s.light_radiance[0] <= s.light_radiance[1]) {
            return Err(invalid("scene.light_radiance", "need 0 <= min <= max"));
        }
        self.physics.validate().map_err(|m| invalid("physics", m))?;
        self.sensor.validate().map_err(|m| invalid("sensor", m))?;
        Ok(())
    }

    /// Makes relative asset paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.meshes.iter_mut().for_each(|m| fix(&mut m.path));
        let a = &mut self.assets;
        for list in [
            &mut a.backgrounds,
            &mut a.environments,
            &mut a.stickers,
            &mut a.plane_textures,
        ] {
            list.iter_mut().for_each(fix);
        }
        if let Some(p) = &mut self.scene.pose_file {
            fix(p);
        }
    }

    /// Hash of everything that influences output bytes (the worker count does not).
    pub fn content_hash(&self) -> String {
        let mut c = self.clone();
        c.workers = 1;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Sorted `(class id, name)` table.
    pub fn class_table(&self) -> Vec<(u16, String)> {
        let mut t: std::collections::BTreeMap<u16, String> = Default::default();
        for m in &self.meshes {
            t.entry(m.class_id)
                .or_insert_with(|| m.class_name().to_string());
        }
        t.into_iter().collect()
    }
}

/// Reads, defaults and validates a config file; relative paths resolve against its directory.
pub fn load_config(path: &Path) -> Result<GeneratorConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    let mut cfg = GeneratorConfig::from_toml(&text, path)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

/// Master seed from [`SEED_ENV`], if set.
pub fn seed_from_env() -> Result<Option<u64>, ConfigError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| invalid(SEED_ENV, format!("expected an unsigned integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}
