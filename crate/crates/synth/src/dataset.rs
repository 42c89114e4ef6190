//! On-disk frame records, the run manifest, and dataset validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma, RgbImage};
use nalgebra::{Point3, Unit, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use slb_core::color::LinearImage;
use slb_core::pose::from_row_major;
use slb_render::{FrameBuffers, InstancePose, PinholeCamera, PlaneGeometry};
use slb_sensor::CameraEffectParams;

use crate::config::{CameraConfig, GeneratorConfig, RenderToggles};
use crate::description::SceneDescription;
use crate::pipeline::AnnotatedFrame;

pub const MANIFEST: &str = "manifest.json";
pub const SLB_MAGIC: &[u8; 4] = b"SLB1";
/// Depth PNG units per meter (0.1 mm steps).
pub const DEPTH_SCALE: f64 = 10_000.0;
pub const FRAME_FORMAT: &str = "slb-frame/1";
pub const DATASET_FORMAT: &str = "slb-dataset/1";

/// File suffixes of one frame, in write order; meta goes last.
pub const CHANNELS: [&str; 7] = [
    "rgb.png",
    "class.png",
    "instance.png",
    "depth.png",
    "normals.slb",
    "coords.slb",
    "meta.json",
];

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Decode { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.into(),
        source,
    }
}

fn decode_err(path: &Path, message: impl ToString) -> DatasetError {
    DatasetError::Decode {
        path: path.into(),
        message: message.to_string(),
    }
}

pub fn frame_path(dir: &Path, index: u64, channel: &str) -> PathBuf {
    dir.join(format!("{index:06}_{channel}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub id: u16,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaInstance {
    pub instance_id: u16,
    pub class_id: u16,
    pub mesh: String,
    /// Camera-from-object transform, row-major 4×4.
    pub pose: [f64; 16],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaPlane {
    pub normal: [f64; 3],
    pub point: [f64; 3],
    pub visible: bool,
}

impl MetaPlane {
    pub fn geometry(&self) -> PlaneGeometry {
        PlaneGeometry {
            normal: Unit::new_normalize(Vector3::from(self.normal)),
            point: Point3::from(self.point),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaEffects {
    pub applied: bool,
    #[serde(flatten)]
    pub params: CameraEffectParams,
}

/// Contents of `{index}_meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub format: String,
    pub index: u64,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub camera: CameraConfig,
    pub classes: Vec<ClassEntry>,
    /// Instances with at least one visible pixel.
    pub instances: Vec<MetaInstance>,
    pub flags: RenderToggles,
    pub plane: MetaPlane,
    pub effects: MetaEffects,
    pub scene: SceneDescription,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config_hash: String,
    pub seed: u64,
    pub flags: RenderToggles,
    pub camera: CameraConfig,
    pub classes: Vec<ClassEntry>,
    pub frames: Vec<u64>,
    /// Labelled pixels per class id over all frames.
    pub class_pixels: BTreeMap<u16, u64>,
}

impl Manifest {
    pub fn new(config: &GeneratorConfig) -> Self {
        Self {
            format: DATASET_FORMAT.into(),
            config_hash: config.content_hash(),
            seed: config.seed,
            flags: config.render,
            camera: config.camera.clone(),
            classes: class_entries(config),
            frames: Vec::new(),
            class_pixels: BTreeMap::new(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self, DatasetError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| decode_err(&path, e))
    }
}

fn class_entries(config: &GeneratorConfig) -> Vec<ClassEntry> {
    config
        .class_table()
        .into_iter()
        .map(|(id, name)| ClassEntry { id, name })
        .collect()
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

/// Writes `bytes` next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn encode_slb(channels: u32, width: u32, height: u32, data: &[[f32; 3]]) -> Vec<u8> {
    assert_eq!(channels, 3);
    let mut out = Vec::with_capacity(16 + data.len() * 12);
    out.extend_from_slice(SLB_MAGIC);
    for v in [channels, width, height] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for p in data {
        for c in p {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}

/// Decodes a 3-channel SLB1 buffer into `(width, height, data)`.
pub fn decode_slb(bytes: &[u8]) -> Result<(u32, u32, Vec<[f32; 3]>), String> {
    if bytes.len() < 16 || &bytes[..4] != SLB_MAGIC {
        return Err("missing SLB1 header".into());
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap());
    let (channels, width, height) = (word(0), word(1), word(2));
    if channels != 3 {
        return Err(format!("expected 3 channels, found {channels}"));
    }
    let n = width as usize * height as usize;
    let body = &bytes[16..];
    if body.len() != n * 12 {
        return Err(format!(
            "expected {} data bytes for {width}x{height}, found {}",
            n * 12,
            body.len()
        ));
    }
    let f = |k: usize| f32::from_le_bytes(body[4 * k..4 * k + 4].try_into().unwrap());
    Ok((
        width,
        height,
        (0..n)
            .map(|i| [f(3 * i), f(3 * i + 1), f(3 * i + 2)])
            .collect(),
    ))
}

pub fn quantize_depth(d: f32) -> u16 {
    if d <= 0.0 {
        0
    } else {
        // A hit always stays nonzero.
        (d as f64 * DEPTH_SCALE).round().clamp(1.0, u16::MAX as f64) as u16
    }
}

fn png_bytes<P: image::PixelWithColorType>(img: &ImageBuffer<P, Vec<P::Subpixel>>) -> Vec<u8>
where
    [P::Subpixel]: image::EncodableLayout,
{
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

fn gray16(width: u32, height: u32, data: Vec<u16>) -> ImageBuffer<Luma<u16>, Vec<u16>> {
    ImageBuffer::from_raw(width, height, data).expect("buffer size matches")
}

impl FrameMeta {
    pub fn from_frame(frame: &AnnotatedFrame, config: &GeneratorConfig) -> Self {
        let b = &frame.buffers;
        let visible: BTreeSet<u16> = b.visible_instances().into_iter().collect();
        let s = &frame.scene;
        Self {
            format: FRAME_FORMAT.into(),
            index: frame.index,
            seed: frame.seed,
            width: b.width,
            height: b.height,
            camera: config.camera.clone(),
            classes: class_entries(config),
            instances: s
                .instances
                .iter()
                .filter(|i| visible.contains(&i.instance_id))
                .map(|i| MetaInstance {
                    instance_id: i.instance_id,
                    class_id: i.class_id,
                    mesh: i.mesh.clone(),
                    pose: i.pose,
                })
                .collect(),
            flags: frame.flags,
            plane: MetaPlane {
                normal: s.plane.normal,
                point: s.plane.point,
                visible: s.plane.visible,
            },
            effects: MetaEffects {
                applied: frame.flags.cam_model,
                params: frame.effects,
            },
            scene: s.clone(),
        }
    }
}

/// Encoded files of a frame, keyed by channel suffix.
pub fn encode_frame(
    frame: &AnnotatedFrame,
    config: &GeneratorConfig,
) -> Vec<(&'static str, Vec<u8>)> {
    let b = &frame.buffers;
    let (w, h) = (b.width, b.height);
    let meta = FrameMeta::from_frame(frame, config);
    vec![
        (CHANNELS[0], png_bytes(&frame.rgb8)),
        (CHANNELS[1], png_bytes(&gray16(w, h, b.class_map.clone()))),
        (
            CHANNELS[2],
            png_bytes(&gray16(w, h, b.instance_map.clone())),
        ),
        (
            CHANNELS[3],
            png_bytes(&gray16(
                w,
                h,
                b.depth.iter().map(|&d| quantize_depth(d)).collect(),
            )),
        ),
        (CHANNELS[4], encode_slb(3, w, h, &b.normals)),
        (CHANNELS[5], encode_slb(3, w, h, &b.obj_coords)),
        (CHANNELS[6], json_bytes(&meta)),
    ]
}

/// Writes frames into a directory and keeps its manifest current.
///
/// Each frame is staged in a temporary directory and renamed into place, and the
/// manifest is only extended afterwards, so an interrupted run leaves a valid prefix.
pub struct DatasetWriter {
    dir: PathBuf,
    config: GeneratorConfig,
    manifest: Manifest,
}

impl DatasetWriter {
    pub fn create(dir: &Path, config: &GeneratorConfig) -> Result<Self, DatasetError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let w = Self {
            dir: dir.into(),
            config: config.clone(),
            manifest: Manifest::new(config),
        };
        w.flush()?;
        Ok(w)
    }

    fn flush(&self) -> Result<(), DatasetError> {
        write_atomic(&self.dir.join(MANIFEST), &json_bytes(&self.manifest))
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn write(&mut self, frame: &AnnotatedFrame) -> Result<Vec<PathBuf>, DatasetError> {
        let staging = self.dir.join(format!(".staging-{:06}", frame.index));
        fs::create_dir_all(&staging).map_err(io_err(&staging))?;
        let files = encode_frame(frame, &self.config);
        for (channel, bytes) in &files {
            let p = frame_path(&staging, frame.index, channel);
            let mut f = fs::File::create(&p).map_err(io_err(&p))?;
            f.write_all(bytes).map_err(io_err(&p))?;
            f.sync_all().map_err(io_err(&p))?;
        }
        let mut out = Vec::with_capacity(files.len());
        for (channel, _) in &files {
            let dst = frame_path(&self.dir, frame.index, channel);
            fs::rename(frame_path(&staging, frame.index, channel), &dst).map_err(io_err(&dst))?;
            out.push(dst);
        }
        fs::remove_dir(&staging).map_err(io_err(&staging))?;

        for &c in &frame.buffers.class_map {
            if c > 0 {
                *self.manifest.class_pixels.entry(c).or_default() += 1;
            }
        }
        self.manifest.frames.push(frame.index);
        self.flush()?;
        Ok(out)
    }
}

/// A frame decoded from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub rgb: RgbImage,
    pub class_map: Vec<u16>,
    pub instance_map: Vec<u16>,
    /// Raw depth PNG values in 0.1 mm.
    pub depth_raw: Vec<u16>,
    pub normals: Vec<[f32; 3]>,
    pub obj_coords: Vec<[f32; 3]>,
    pub meta: FrameMeta,
}

impl FrameRecord {
    pub fn width(&self) -> u32 {
        self.meta.width
    }

    pub fn height(&self) -> u32 {
        self.meta.height
    }

    /// Depth in meters, 0 where nothing was hit.
    pub fn depth(&self) -> Vec<f32> {
        self.depth_raw
            .iter()
            .map(|&d| (d as f64 / DEPTH_SCALE) as f32)
            .collect()
    }

    pub fn camera(&self) -> PinholeCamera {
        self.meta.camera.camera()
    }

    /// Ground-truth buffers as decoded; poses come from the meta instance list.
    pub fn to_buffers(&self) -> FrameBuffers {
        FrameBuffers {
            width: self.width(),
            height: self.height(),
            rgb: LinearImage::from_srgb8(&self.rgb),
            class_map: self.class_map.clone(),
            instance_map: self.instance_map.clone(),
            depth: self.depth(),
            normals: self.normals.clone(),
            obj_coords: self.obj_coords.clone(),
            poses: self
                .meta
                .instances
                .iter()
                .map(|i| InstancePose {
                    instance_id: i.instance_id,
                    class_id: i.class_id,
                    pose: from_row_major(&i.pose),
                })
                .collect(),
            taps: None,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, DatasetError> {
    fs::read(path).map_err(io_err(path))
}

fn read_gray16(path: &Path, width: u32, height: u32) -> Result<Vec<u16>, DatasetError> {
    let img = image::load_from_memory_with_format(&read(path)?, image::ImageFormat::Png)
        .map_err(|e| decode_err(path, e))?;
    let img = match img {
        image::DynamicImage::ImageLuma16(i) => i,
        other => {
            return Err(decode_err(
                path,
                format!("expected 16-bit gray, found {:?}", other.color()),
            ))
        }
    };
    if img.dimensions() != (width, height) {
        return Err(decode_err(
            path,
            format!(
                "size {:?} differs from meta {width}x{height}",
                img.dimensions()
            ),
        ));
    }
    Ok(img.into_raw())
}

fn read_slb(path: &Path, width: u32, height: u32) -> Result<Vec<[f32; 3]>, DatasetError> {
    let (w, h, data) = decode_slb(&read(path)?).map_err(|m| decode_err(path, m))?;
    if (w, h) != (width, height) {
        return Err(decode_err(
            path,
            format!("size {w}x{h} differs from meta {width}x{height}"),
        ));
    }
    Ok(data)
}

pub fn read_meta(dir: &Path, index: u64) -> Result<FrameMeta, DatasetError> {
    let path = frame_path(dir, index, "meta.json");
    serde_json::from_slice(&read(&path)?).map_err(|e| decode_err(&path, e))
}

pub fn read_frame(dir: &Path, index: u64) -> Result<FrameRecord, DatasetError> {
    let meta = read_meta(dir, index)?;
    let (w, h) = (meta.width, meta.height);
    let p = |c| frame_path(dir, index, c);
    let rgb_path = p("rgb.png");
    let rgb = image::load_from_memory_with_format(&read(&rgb_path)?, image::ImageFormat::Png)
        .map_err(|e| decode_err(&rgb_path, e))?;
    let rgb = match rgb {
        image::DynamicImage::ImageRgb8(i) if i.dimensions() == (w, h) => i,
        other => {
            return Err(decode_err(
                &rgb_path,
                format!("expected {w}x{h} RGB8, found {:?}", other.color()),
            ));
        }
    };
    Ok(FrameRecord {
        rgb,
        class_map: read_gray16(&p("class.png"), w, h)?,
        instance_map: read_gray16(&p("instance.png"), w, h)?,
        depth_raw: read_gray16(&p("depth.png"), w, h)?,
        normals: read_slb(&p("normals.slb"), w, h)?,
        obj_coords: read_slb(&p("coords.slb"), w, h)?,
        meta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingFile {
        path: PathBuf,
    },
    Decode {
        message: String,
    },
    /// A nonzero instance-map value without a meta entry.
    InstanceNotInMeta {
        instance: u16,
    },
    /// A meta instance with no pixels.
    InstanceNotVisible {
        instance: u16,
    },
    DuplicateMetaInstance {
        instance: u16,
    },
    UnknownClass {
        instance: u16,
        class: u16,
    },
    /// Class map disagrees with the meta instance-to-class table.
    ClassMismatch {
        instance: u16,
        expected: u16,
        found: u16,
        pixels: u64,
    },
    IndexMismatch {
        found: u64,
    },
    /// Pixel-level coherence or reprojection failures, grouped by kind.
    Pixels {
        check: String,
        count: u64,
        first: (u32, u32),
        detail: String,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingFile { path } => write!(f, "missing file {}", path.display()),
            Violation::Decode { message } => write!(f, "decode error: {message}"),
            Violation::InstanceNotInMeta { instance } => {
                write!(f, "instance id {instance} not listed in meta")
            }
            Violation::InstanceNotVisible { instance } => {
                write!(f, "meta instance {instance} has no pixels")
            }
            Violation::DuplicateMetaInstance { instance } => {
                write!(f, "meta lists instance {instance} twice")
            }
            Violation::UnknownClass { instance, class } => {
                write!(
                    f,
                    "instance {instance} has class {class} outside the class table"
                )
            }
            Violation::ClassMismatch {
                instance,
                expected,
                found,
                pixels,
            } => {
                write!(
                    f,
                    "instance {instance}: {pixels} pixels of class {found}, meta says {expected}"
                )
            }
            Violation::IndexMismatch { found } => write!(f, "meta index is {found}"),
            Violation::Pixels {
                check,
                count,
                first,
                detail,
            } => {
                write!(
                    f,
                    "{check}: {count} pixels, first at ({}, {}): {detail}",
                    first.0, first.1
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub index: u64,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub frames_checked: usize,
    /// Only frames with violations.
    pub frames: Vec<FrameReport>,
    pub manifest: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.frames.is_empty() && self.manifest.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.manifest.len()
            + self
                .frames
                .iter()
                .map(|f| f.violations.len())
                .sum::<usize>()
    }
}

fn group_pixels(check: &str, list: Vec<slb_render::frame::PixelViolation>) -> Vec<Violation> {
    let mut groups: BTreeMap<String, (u64, (u32, u32), String)> = BTreeMap::new();
    for v in list {
        let kind = format!("{:?}", v.kind);
        let key = kind.split([' ', '{']).next().unwrap_or("").to_string();
        let detail = v.to_string();
        groups.entry(key).or_insert((0, (v.x, v.y), detail)).0 += 1;
    }
    groups
        .into_values()
        .map(|(count, first, detail)| Violation::Pixels {
            check: check.into(),
            count,
            first,
            detail,
        })
        .collect()
}

/// Checks one decoded frame: meta against the label images, channel coherence, and
/// reprojection of every labelled pixel.
pub fn check_frame(record: &FrameRecord, index: u64) -> Vec<Violation> {
    let meta = &record.meta;
    let mut out = Vec::new();
    if meta.index != index {
        out.push(Violation::IndexMismatch { found: meta.index });
    }
    let classes: BTreeSet<u16> = meta.classes.iter().map(|c| c.id).collect();
    let mut meta_ids = BTreeMap::new();
    for i in &meta.instances {
        if meta_ids.insert(i.instance_id, i.class_id).is_some() {
            out.push(Violation::DuplicateMetaInstance {
                instance: i.instance_id,
            });
        }
        if !classes.contains(&i.class_id) {
            out.push(Violation::UnknownClass {
                instance: i.instance_id,
                class: i.class_id,
            });
        }
    }
    let mut seen: BTreeMap<u16, BTreeMap<u16, u64>> = BTreeMap::new();
    for (&inst, &class) in record.instance_map.iter().zip(&record.class_map) {
        if inst > 0 {
            *seen.entry(inst).or_default().entry(class).or_default() += 1;
        }
    }
    for (inst, by_class) in &seen {
        match meta_ids.get(inst) {
            None => out.push(Violation::InstanceNotInMeta { instance: *inst }),
            Some(expected) => {
                for (found, pixels) in by_class {
                    if found != expected {
                        out.push(Violation::ClassMismatch {
                            instance: *inst,
                            expected: *expected,
                            found: *found,
                            pixels: *pixels,
                        });
                    }
                }
            }
        }
    }
    for inst in meta_ids.keys() {
        if !seen.contains_key(inst) {
            out.push(Violation::InstanceNotVisible { instance: *inst });
        }
    }
    let buffers = record.to_buffers();
    let camera = record.camera();
    let plane = meta.plane.visible.then(|| meta.plane.geometry());
    out.extend(group_pixels(
        "coherence",
        buffers.coherence_violations(&camera, plane.as_ref()),
    ));
    let labelled = (0..record.height())
        .flat_map(|y| (0..record.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| record.instance_map[(y * record.width() + x) as usize] > 0);
    // Pixels whose instance is missing from meta were already reported above.
    let reproj: Vec<_> = buffers
        .reprojection_violations(&camera, labelled)
        .into_iter()
        .filter(|v| {
            !matches!(
                v.kind,
                slb_render::frame::ViolationKind::UnknownInstance { .. }
            )
        })
        .collect();
    out.extend(group_pixels("reprojection", reproj));
    out
}

/// Re-checks every frame listed in the manifest, and the manifest's pixel counts.
pub fn validate_dataset(dir: &Path) -> Result<ValidationReport, DatasetError> {
    let manifest = Manifest::load(dir)?;
    let results: Vec<(FrameReport, Option<Vec<u16>>)> = manifest
        .frames
        .par_iter()
        .map(|&index| {
            let mut report = FrameReport {
                index,
                violations: Vec::new(),
            };
            let missing: Vec<_> = CHANNELS
                .iter()
                .map(|c| frame_path(dir, index, c))
                .filter(|p| !p.is_file())
                .collect();
            if !missing.is_empty() {
                report.violations.extend(
                    missing
                        .into_iter()
                        .map(|path| Violation::MissingFile { path }),
                );
                return (report, None);
            }
            match read_frame(dir, index) {
                Ok(record) => {
                    report.violations = check_frame(&record, index);
                    (report, Some(record.class_map))
                }
                Err(e) => {
                    report.violations.push(Violation::Decode {
                        message: e.to_string(),
                    });
                    (report, None)
                }
            }
        })
        .collect();

    let mut out = ValidationReport {
        frames_checked: results.len(),
        ..Default::default()
    };
    let mut counts: BTreeMap<u16, u64> = BTreeMap::new();
    let mut complete = true;
    for (report, class_map) in results {
        match class_map {
            Some(map) => map
                .into_iter()
                .filter(|&c| c > 0)
                .for_each(|c| *counts.entry(c).or_default() += 1),
            None => complete = false,
        }
        if !report.violations.is_empty() {
            out.frames.push(report);
        }
    }
    let unique: BTreeSet<_> = manifest.frames.iter().collect();
    if unique.len() != manifest.frames.len() {
        out.manifest.push("frame indices repeat".into());
    }
    if manifest.format != DATASET_FORMAT {
        out.manifest
            .push(format!("unknown format {:?}", manifest.format));
    }
    if complete && counts != manifest.class_pixels {
        for id in counts
            .keys()
            .chain(manifest.class_pixels.keys())
            .collect::<BTreeSet<_>>()
        {
            let (a, b) = (
                manifest.class_pixels.get(id).copied().unwrap_or(0),
                counts.get(id).copied().unwrap_or(0),
            );
            if a != b {
                out.manifest.push(format!(
                    "class {id}: manifest counts {a} pixels, label images {b}"
                ));
            }
        }
    }
    Ok(out)
}
