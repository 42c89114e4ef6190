use nalgebra::{Point3, Unit, Vector3};
use slb_core::color::LinearImage;
use slb_core::Pose;

use crate::camera::PinholeCamera;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstancePose {
    pub instance_id: u16,
    pub class_id: u16,
    pub pose: Pose,
}

/// Intermediate images of the shading stage.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadingTaps {
    pub albedo: LinearImage,
    pub direct: LinearImage,
    pub ambient: LinearImage,
    pub ao: Vec<f32>,
}

/// Colour and ground-truth channels of one rendered view, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBuffers {
    pub width: u32,
    pub height: u32,
    /// Linear radiance, not clamped above 1.
    pub rgb: LinearImage,
    pub class_map: Vec<u16>,
    pub instance_map: Vec<u16>,
    /// Camera-frame Z in meters, 0 where nothing was hit.
    pub depth: Vec<f32>,
    pub normals: Vec<[f32; 3]>,
    pub obj_coords: Vec<[f32; 3]>,
    pub poses: Vec<InstancePose>,
    pub taps: Option<ShadingTaps>,
}

/// Plane accepted as unlabeled geometry by [`FrameBuffers::coherence_violations`].
#[derive(Clone, Copy, Debug)]
pub struct PlaneGeometry {
    pub normal: Unit<Vector3<f64>>,
    pub point: Point3<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PixelViolation {
    pub x: u32,
    pub y: u32,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    ClassInstanceMismatch {
        class: u16,
        instance: u16,
    },
    DepthOutOfRange {
        instance: u16,
        depth: f32,
    },
    UnlabeledDepth {
        depth: f32,
    },
    BadNormal {
        length: f32,
    },
    UnknownInstance {
        instance: u16,
    },
    Reprojection {
        instance: u16,
        pixel_error: f64,
        depth_error: f64,
    },
}

impl std::fmt::Display for PixelViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "pixel ({}, {}): ", self.x, self.y)?;
        match &self.kind {
            ViolationKind::ClassInstanceMismatch { class, instance } => {
                write!(f, "class {class} with instance {instance}")
            }
            ViolationKind::DepthOutOfRange { instance, depth } => {
                write!(f, "instance {instance} has depth {depth} outside [near, far]")
            }
            ViolationKind::UnlabeledDepth { depth } => write!(f, "depth {depth} without instance"),
            ViolationKind::BadNormal { length } => write!(f, "normal length {length}"),
            ViolationKind::UnknownInstance { instance } => write!(f, "instance {instance} has no pose"),
            ViolationKind::Reprojection { instance, pixel_error, depth_error } => write!(
                f,
                "instance {instance} reprojects {pixel_error:.3} px away, relative depth error {depth_error:.2e}"
            ),
        }
    }
}

/// Reprojection limits for object coordinates.
pub const MAX_PIXEL_ERROR: f64 = 0.5;
pub const MAX_DEPTH_ERROR: f64 = 1e-3;

impl FrameBuffers {
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn pose_of(&self, instance: u16) -> Option<&InstancePose> {
        self.poses.iter().find(|p| p.instance_id == instance)
    }

    /// Sorted instance ids present in the instance map.
    pub fn visible_instances(&self) -> Vec<u16> {
        let mut seen = std::collections::BTreeSet::new();
        seen.extend(self.instance_map.iter().copied().filter(|&i| i > 0));
        seen.into_iter().collect()
    }

    /// Channel coherence: labels agree, labelled pixels have depth in range and unit
    /// normals, and unlabeled depth only occurs on `plane`.
    pub fn coherence_violations(
        &self,
        camera: &PinholeCamera,
        plane: Option<&PlaneGeometry>,
    ) -> Vec<PixelViolation> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let i = (y * self.width + x) as usize;
                let (class, instance, depth) =
                    (self.class_map[i], self.instance_map[i], self.depth[i]);
                let push = |kind| PixelViolation { x, y, kind };
                if (class > 0) != (instance > 0) {
                    out.push(push(ViolationKind::ClassInstanceMismatch {
                        class,
                        instance,
                    }));
                }
                if instance > 0 {
                    let d = depth as f64;
                    // Depth is stored as f32; allow its rounding at the range ends.
                    if !(d >= camera.near * (1.0 - 1e-6) && d <= camera.far * (1.0 + 1e-6)) {
                        out.push(push(ViolationKind::DepthOutOfRange { instance, depth }));
                    }
                } else if depth != 0.0 {
                    let on_plane = plane.is_some_and(|pl| {
                        let p = camera.unproject(x as f64 + 0.5, y as f64 + 0.5, depth as f64);
                        let r = camera.pixel_ray(x, y);
                        // Depth error along the ray mapped onto the plane normal.
                        let tol = 1e-3 * depth as f64 * pl.normal.dot(&r).abs().max(1e-3) + 1e-4;
                        pl.normal.dot(&(p - pl.point)).abs() <= tol
                    });
                    if !on_plane {
                        out.push(push(ViolationKind::UnlabeledDepth { depth }));
                    }
                }
                let n = self.normals[i];
                let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
                if depth > 0.0 && (len - 1.0).abs() > 1e-3 || depth == 0.0 && len != 0.0 {
                    out.push(push(ViolationKind::BadNormal { length: len }));
                }
            }
        }
        out
    }

    /// Pixel and relative depth error of mapping the object coordinate at `(x, y)`
    /// through its instance pose; `None` for unlabeled pixels or unknown instances.
    pub fn reprojection_error(&self, camera: &PinholeCamera, x: u32, y: u32) -> Option<(f64, f64)> {
        let i = (y * self.width + x) as usize;
        let pose = self.pose_of(self.instance_map[i])?;
        let c = self.obj_coords[i];
        let p = pose.pose * Point3::new(c[0] as f64, c[1] as f64, c[2] as f64);
        let (u, v, z) = camera.project(&p);
        let pixel = ((u - (x as f64 + 0.5)).powi(2) + (v - (y as f64 + 0.5)).powi(2)).sqrt();
        let d = self.depth[i] as f64;
        Some((pixel, (z - d).abs() / d))
    }

    /// Reprojection check on the given pixels; labelled pixels without a pose are reported.
    pub fn reprojection_violations(
        &self,
        camera: &PinholeCamera,
        pixels: impl IntoIterator<Item = (u32, u32)>,
    ) -> Vec<PixelViolation> {
        let mut out = Vec::new();
        for (x, y) in pixels {
            let instance = self.instance_map[(y * self.width + x) as usize];
            if instance == 0 {
                continue;
            }
            match self.reprojection_error(camera, x, y) {
                None => out.push(PixelViolation {
                    x,
                    y,
                    kind: ViolationKind::UnknownInstance { instance },
                }),
                Some((pixel_error, depth_error)) => {
                    if !(pixel_error <= MAX_PIXEL_ERROR && depth_error <= MAX_DEPTH_ERROR) {
                        out.push(PixelViolation {
                            x,
                            y,
                            kind: ViolationKind::Reprojection {
                                instance,
                                pixel_error,
                                depth_error,
                            },
                        });
                    }
                }
            }
        }
        out
    }
}
