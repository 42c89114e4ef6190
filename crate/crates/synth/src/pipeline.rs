//! Per-frame generation and the pipelined multi-frame driver.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use image::RgbImage;
use nalgebra::{Unit, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use slb_core::pose::to_row_major;
use slb_core::Pose;
use slb_physics::{
    drop_arrange, sample_collision_free, sample_support_plane, BodyModel, SupportPlane,
};
use slb_render::scene::DEFAULT_AMBIENT;
use slb_render::{
    render_frame, DirectionalLight, FrameBuffers, MaterialParams, PinholeCamera, PlaneSpec,
    RenderObject, RenderScene, ShadingMode, StickerSpec,
};
use slb_sensor::{apply_camera_chain, sample_effect_params, CameraEffectParams};

use crate::assets::{AssetError, AssetLibrary, Named};
use crate::config::{GeneratorConfig, RenderToggles};
use crate::description::*;
use crate::poses::PoseTable;
use crate::seed::{frame_seed, stage_rng};

/// Placement attempts per object in collision-free sampling.
const FREE_ATTEMPTS: usize = 100;
/// Half-angle of the cone around [`LIGHT_AXIS`] that light directions are drawn from.
const LIGHT_CONE: f64 = std::f64::consts::FRAC_PI_3;
const LIGHT_AXIS: [f64; 3] = [0.0, -0.5, -1.0];

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error("pose file: {0}")]
    Poses(String),
    #[error("frame {index}: {message}")]
    Frame { index: u64, message: String },
}

/// Frame after the sensor model, with ground truth and the sampled scene.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedFrame {
    pub index: u64,
    pub seed: u64,
    /// Ground-truth channels; `rgb` holds the clean linear render.
    pub buffers: FrameBuffers,
    /// Degraded 8-bit output image.
    pub rgb8: RgbImage,
    pub scene: SceneDescription,
    /// Sampled sensor parameters; applied only when the camera model is enabled.
    pub effects: CameraEffectParams,
    pub flags: RenderToggles,
}

/// Output of the arrangement stage, ready to render.
#[derive(Clone, Debug)]
pub struct PreparedScene {
    pub index: u64,
    pub seed: u64,
    pub render: RenderScene,
    pub description: SceneDescription,
    pub effects: CameraEffectParams,
}

/// Loaded assets plus configuration; shared by all pipeline stages.
#[derive(Debug)]
pub struct Generator {
    pub config: GeneratorConfig,
    pub assets: Arc<AssetLibrary>,
    pub camera: PinholeCamera,
    poses: Option<PoseTable>,
}

fn asset_ref<T>(list: &[Named<T>], index: usize) -> AssetRef {
    AssetRef {
        index,
        path: list[index].path.display().to_string(),
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Option<usize> {
    // Always consume a draw so list lengths do not shift later samples.
    let u: f64 = rng.random();
    (len > 0).then(|| ((u * len as f64) as usize).min(len - 1))
}

fn arr3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

struct Placement {
    /// `(selection slot, pose)`
    placed: Vec<(usize, Pose)>,
    record: ArrangementRecord,
}

impl Generator {
    pub fn new(config: GeneratorConfig) -> Result<Self, SynthError> {
        let assets = Arc::new(AssetLibrary::load(&config)?);
        Self::with_assets(config, assets)
    }

    pub fn with_assets(
        config: GeneratorConfig,
        assets: Arc<AssetLibrary>,
    ) -> Result<Self, SynthError> {
        let poses = match &config.scene.pose_file {
            Some(p) => {
                let table = PoseTable::load(p).map_err(SynthError::Poses)?;
                for list in table.frames.values() {
                    if let Some(bad) = list.iter().find(|e| assets.mesh(&e.mesh).is_none()) {
                        return Err(SynthError::Poses(format!("unknown mesh id {:?}", bad.mesh)));
                    }
                }
                Some(table)
            }
            None => None,
        };
        let camera = config.camera.camera();
        Ok(Self {
            config,
            assets,
            camera,
            poses,
        })
    }

    pub fn frame_seed(&self, index: u64) -> u64 {
        frame_seed(self.config.seed, index)
    }

    /// Mesh indices chosen for a frame, in instance order.
    pub fn select_meshes(&self, seed: u64) -> Vec<usize> {
        let mut rng = stage_rng(seed, "select");
        let (n, k) = (self.assets.meshes.len(), self.config.object_count as usize);
        if n == 0 {
            return Vec::new();
        }
        if self.config.unique_objects {
            rand::seq::index::sample(&mut rng, n, k.min(n)).into_vec()
        } else {
            (0..k).map(|_| rng.random_range(0..n)).collect()
        }
    }

    fn arrange(
        &self,
        index: u64,
        seed: u64,
        selection: &[usize],
        plane: &SupportPlane,
    ) -> Placement {
        let mut record = ArrangementRecord {
            method: ArrangementMethod::Drop,
            settled: true,
            failed_attempts: 0,
            omitted: Vec::new(),
        };
        if let Some(list) = self.poses.as_ref().and_then(|t| t.get(index)) {
            record.method = ArrangementMethod::Injected;
            // Injected poses define the selection themselves; see `prepare`.
            return Placement {
                placed: list
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (k, p.pose()))
                    .collect(),
                record,
            };
        }
        let models: Vec<Arc<BodyModel>> = selection
            .iter()
            .map(|&m| self.assets.meshes[m].model.clone())
            .collect();
        let params = &self.config.physics;
        let use_fallback =
            stage_rng(seed, "arrange/choice").random::<f64>() < self.config.fallback_probability;
        if !use_fallback {
            for stage in ["arrange", "arrange/retry"] {
                match drop_arrange(&models, plane, params, &mut stage_rng(seed, stage)) {
                    Ok(a) => {
                        record.settled = a.settled;
                        return Placement {
                            placed: a.poses.into_iter().enumerate().collect(),
                            record,
                        };
                    }
                    Err(e) => {
                        log::debug!("frame {index}: drop arrangement failed ({e})");
                        record.failed_attempts += 1;
                    }
                }
            }
        }
        record.method = ArrangementMethod::CollisionFree;
        let free = sample_collision_free(
            &models,
            plane,
            params,
            &mut stage_rng(seed, "arrange/fallback"),
            FREE_ATTEMPTS,
        );
        record.omitted = free
            .omitted
            .iter()
            .map(|&k| self.assets.meshes[selection[k]].id.clone())
            .collect();
        Placement {
            placed: free.placed,
            record,
        }
    }

    /// Samples and arranges the scene of frame `index`: everything before rendering.
    pub fn prepare(&self, index: u64) -> PreparedScene {
        let seed = self.frame_seed(index);
        let cfg = &self.config;
        let a = &self.assets;
        let mut rng = stage_rng(seed, "plane");
        let plane = sample_support_plane(
            &mut rng,
            (cfg.scene.d_range[0], cfg.scene.d_range[1]),
            cfg.scene.tilt_max,
        );

        let injected = self.poses.as_ref().and_then(|t| t.get(index));
        let selection: Vec<usize> = match injected {
            Some(list) => list
                .iter()
                .map(|e| a.mesh(&e.mesh).expect("checked at load"))
                .collect(),
            None => self.select_meshes(seed),
        };
        let placement = self.arrange(index, seed, &selection, &plane);

        // Appearance is drawn for every selected object whether or not its feature is on,
        // so toggling a flag never changes the other samples.
        let mut rng = stage_rng(seed, "appearance");
        struct Look {
            material: MaterialParams,
            sticker: Option<(usize, StickerSpec)>,
        }
        let looks: Vec<Look> = selection
            .iter()
            .map(|&m| {
                let material = MaterialParams::random(&mut rng, cfg.scene.roughness_min);
                let wants = rng.random::<f64>() < cfg.scene.sticker_probability;
                let img = pick(&mut rng, a.stickers.len());
                let (center, radius) = a.meshes[m].bounding_sphere;
                let sticker = img.map(|k| {
                    (
                        k,
                        StickerSpec::random(&mut rng, a.stickers[k].value.clone(), center, radius),
                    )
                });
                Look {
                    material,
                    sticker: sticker.filter(|_| wants),
                }
            })
            .collect();

        let mut objects = Vec::with_capacity(placement.placed.len());
        let mut instances = Vec::with_capacity(placement.placed.len());
        for (n, (slot, pose)) in placement.placed.iter().enumerate() {
            let mesh = &a.meshes[selection[*slot]];
            let look = &looks[*slot];
            let instance_id = n as u16 + 1;
            objects.push(RenderObject {
                mesh: mesh.render.clone(),
                pose: *pose,
                class_id: mesh.class_id,
                instance_id,
                material: look.material,
                sticker: look.sticker.as_ref().map(|(_, s)| s.clone()),
            });
            instances.push(InstanceRecord {
                instance_id,
                class_id: mesh.class_id,
                mesh: mesh.id.clone(),
                pose: to_row_major(pose),
                material: MaterialRecord {
                    mode: match look.material.mode {
                        ShadingMode::Phong => MaterialMode::Phong,
                        ShadingMode::CookTorrance => MaterialMode::CookTorrance,
                    },
                    metalness: look.material.metalness(),
                    roughness: look.material.roughness(),
                },
                sticker: look.sticker.as_ref().map(|(k, s)| StickerRecord {
                    image: asset_ref(&a.stickers, *k),
                    direction: arr3(&s.direction),
                    rotation: s.rotation,
                    center: [s.center.x, s.center.y, s.center.z],
                    half_extents: [s.half_extents.0, s.half_extents.1],
                }),
            });
        }

        let mut rng = stage_rng(seed, "lighting");
        let axis = Vector3::from(LIGHT_AXIS).normalize();
        let (u, w) = slb_render::tangent_basis(&axis);
        let cos_t = 1.0 - rng.random::<f64>() * (1.0 - LIGHT_CONE.cos());
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        let direction = Unit::new_normalize(axis * cos_t + (u * phi.cos() + w * phi.sin()) * sin_t);
        let [r0, r1] = cfg.scene.light_radiance;
        let radiance = r0 + (r1 - r0) * rng.random::<f32>();
        let env = pick(&mut rng, a.environments.len());
        let light = DirectionalLight {
            direction,
            radiance: [radiance; 3],
        };

        let mut rng = stage_rng(seed, "background");
        let background = pick(&mut rng, a.backgrounds.len());
        let show_plane = rng.random::<f64>() < cfg.scene.plane_probability;
        let texture = pick(&mut rng, a.plane_textures.len());
        let [t0, t1] = cfg.scene.plane_tile_size;
        let tile_size = t0 + (t1 - t0) * rng.random::<f64>();
        let visible = show_plane && texture.is_some();

        let plane_spec = visible.then(|| {
            let mut p = PlaneSpec::new(plane.normal, plane.support_point);
            p.texture = texture.map(|k| a.plane_textures[k].value.clone());
            p.tile_size = tile_size;
            p
        });
        let description = SceneDescription {
            plane: PlaneRecord {
                normal: arr3(&plane.normal),
                point: [
                    plane.support_point.x,
                    plane.support_point.y,
                    plane.support_point.z,
                ],
                visible,
                texture: texture
                    .filter(|_| visible)
                    .map(|k| asset_ref(&a.plane_textures, k)),
                tile_size,
            },
            instances,
            lighting: LightingRecord {
                direction: arr3(&direction),
                radiance: light.radiance,
                ambient: DEFAULT_AMBIENT,
                environment: env.map(|k| asset_ref(&a.environments, k)),
            },
            background: background.map(|k| asset_ref(&a.backgrounds, k)),
            arrangement: placement.record,
        };
        let render = RenderScene {
            objects,
            plane: plane_spec,
            light,
            ambient: Some(DEFAULT_AMBIENT),
            environment: env.map(|k| a.environments[k].value.clone()),
            background: background.map(|k| a.backgrounds[k].value.clone()),
        };
        let effects = sample_effect_params(&mut stage_rng(seed, "sensor"), &cfg.sensor);
        PreparedScene {
            index,
            seed,
            render,
            description,
            effects,
        }
    }

    pub fn render(&self, prepared: &PreparedScene) -> Result<FrameBuffers, SynthError> {
        render_frame(
            &prepared.render,
            &self.camera,
            self.config.render.render_flags(),
        )
        .map_err(|e| SynthError::Frame {
            index: prepared.index,
            message: e.to_string(),
        })
    }

    pub fn sensor(&self, prepared: &PreparedScene, buffers: &FrameBuffers) -> RgbImage {
        if self.config.render.cam_model {
            let principal = (self.camera.cx, self.camera.cy);
            apply_camera_chain(
                &buffers.rgb,
                &prepared.effects,
                principal,
                &mut stage_rng(prepared.seed, "noise"),
            )
        } else {
            buffers.rgb.to_srgb8()
        }
    }

    pub fn finish(&self, prepared: PreparedScene) -> Result<AnnotatedFrame, SynthError> {
        let buffers = self.render(&prepared)?;
        let rgb8 = self.sensor(&prepared, &buffers);
        Ok(self.assemble(prepared, buffers, rgb8))
    }

    fn assemble(&self, p: PreparedScene, buffers: FrameBuffers, rgb8: RgbImage) -> AnnotatedFrame {
        AnnotatedFrame {
            index: p.index,
            seed: p.seed,
            buffers,
            rgb8,
            scene: p.description,
            effects: p.effects,
            flags: self.config.render,
        }
    }

    /// Fully determined by the configuration and `index`.
    pub fn generate_frame(&self, index: u64) -> Result<AnnotatedFrame, SynthError> {
        self.finish(self.prepare(index))
    }
}

/// Seconds spent per stage. Main-thread stages are disjoint, so their sum never exceeds
/// the wall time; arrangement runs on the workers and is reported as CPU time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    /// Main thread blocked on the arrangement workers.
    pub arrange_wait: f64,
    pub render: f64,
    pub sensor: f64,
    pub sink: f64,
}

impl StageTimes {
    pub fn total(&self) -> f64 {
        self.arrange_wait + self.render + self.sensor + self.sink
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub frames: u64,
    pub workers: usize,
    pub wall_seconds: f64,
    pub fps: f64,
    pub stages: StageTimes,
    /// Summed over workers.
    pub arrange_cpu_seconds: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("{message} (after {} frames)", report.frames)]
pub struct RunError {
    pub report: RunReport,
    pub message: String,
}

/// Generates frames `0..count` with `workers` arrangement threads and hands them to
/// `sink` in index order from the calling thread.
pub fn run_generator<E: std::fmt::Display>(
    generator: &Generator,
    count: u64,
    workers: usize,
    mut sink: impl FnMut(AnnotatedFrame) -> Result<(), E>,
) -> Result<RunReport, RunError> {
    let workers = workers.max(1);
    let start = Instant::now();
    let mut report = RunReport {
        workers,
        ..RunReport::default()
    };
    if count == 0 {
        return Ok(report);
    }
    let window = (2 * workers) as u64;
    let (job_tx, job_rx) = crossbeam_channel::unbounded::<u64>();
    let (out_tx, out_rx) = crossbeam_channel::unbounded::<(PreparedScene, Duration)>();
    let stop = AtomicBool::new(false);
    let mut times = StageTimes::default();
    let mut arrange_cpu = Duration::ZERO;

    let result = std::thread::scope(|s| {
        for _ in 0..workers {
            let (job_rx, out_tx, stop) = (job_rx.clone(), out_tx.clone(), &stop);
            s.spawn(move || {
                for index in job_rx {
                    if stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let t = Instant::now();
                    let prepared = generator.prepare(index);
                    if out_tx.send((prepared, t.elapsed())).is_err() {
                        break;
                    }
                }
            });
        }
        drop(out_tx);
        let mut next_job = 0;
        while next_job < count.min(window) {
            job_tx.send(next_job).expect("workers alive");
            next_job += 1;
        }
        let mut pending = BTreeMap::new();
        let mut outcome = Ok(());
        for index in 0..count {
            let t = Instant::now();
            let prepared = loop {
                if let Some(p) = pending.remove(&index) {
                    break p;
                }
                match out_rx.recv() {
                    Ok((p, dt)) => {
                        arrange_cpu += dt;
                        pending.insert(p.index, p);
                    }
                    Err(_) => unreachable!("workers exit only after the job channel closes"),
                }
            };
            times.arrange_wait += t.elapsed().as_secs_f64();
            if next_job < count {
                job_tx.send(next_job).expect("workers alive");
                next_job += 1;
            }
            let t = Instant::now();
            let buffers = match generator.render(&prepared) {
                Ok(b) => b,
                Err(e) => {
                    outcome = Err(e.to_string());
                    break;
                }
            };
            times.render += t.elapsed().as_secs_f64();
            let t = Instant::now();
            let rgb8 = generator.sensor(&prepared, &buffers);
            times.sensor += t.elapsed().as_secs_f64();
            let frame = generator.assemble(prepared, buffers, rgb8);
            let t = Instant::now();
            let sunk = sink(frame);
            times.sink += t.elapsed().as_secs_f64();
            if let Err(e) = sunk {
                outcome = Err(format!("sink failed on frame {index}: {e}"));
                break;
            }
            report.frames += 1;
        }
        stop.store(true, Ordering::Relaxed);
        drop(job_tx);
        for (_, dt) in out_rx.iter() {
            arrange_cpu += dt;
        }
        outcome
    });

    report.wall_seconds = start.elapsed().as_secs_f64();
    report.fps = if report.wall_seconds > 0.0 {
        report.frames as f64 / report.wall_seconds
    } else {
        0.0
    };
    report.stages = times;
    report.arrange_cpu_seconds = arrange_cpu.as_secs_f64();
    result
        .map(|()| report.clone())
        .map_err(|message| RunError { report, message })
}
