use nalgebra::{Point2, Point3, Vector3};
use rayon::prelude::*;
use slb_core::color::{decode_srgb8, LinearImage, Rgb};
use slb_core::mesh::MID_GRAY;
use slb_core::{Albedo, Mesh};

use crate::camera::PinholeCamera;
use crate::frame::{FrameBuffers, InstancePose, ShadingTaps};
use crate::material::ShadingMode;
use crate::raster::{rasterize, ItemGeometry, VisibilityBuffer, NO_ITEM};
use crate::scene::{fit_background_linear, PlaneSpec, RenderFlags, RenderScene};
use crate::shading::{shade_cook_torrance, shade_phong, Shading};
use crate::ssao::{ssao_factor, Kernel, DEFAULT_RADIUS};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid camera: {0}")]
    Camera(String),
    #[error("invalid scene: {0}")]
    Scene(String),
}

const PLANE_FACES: [[u32; 3]; 2] = [[0, 1, 2], [0, 2, 3]];

#[derive(Clone, Copy, Default)]
struct Fragment {
    depth: f32,
    class: u16,
    instance: u16,
    normal: [f32; 3],
    obj: [f32; 3],
    albedo: Rgb,
    shading: Shading,
}

fn plane_corners(plane: &PlaneSpec, camera: &PinholeCamera) -> Vec<Point3<f64>> {
    let (u, w) = crate::tangent_basis(&plane.normal);
    let e = 2.0 * camera.far;
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(a, b)| plane.point + u * (a * e) + w * (b * e))
        .collect()
}

fn sample_texture(img: &image::RgbImage, uv: Point2<f64>) -> Rgb {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x = uv.x * w as f64 - 0.5;
    let y = (1.0 - uv.y) * h as f64 - 0.5;
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = ((x - x0) as f32, (y - y0) as f32);
    let fetch = |xx: i64, yy: i64| {
        decode_srgb8(
            img.get_pixel(xx.rem_euclid(w) as u32, yy.rem_euclid(h) as u32)
                .0,
        )
    };
    let (x0, y0) = (x0 as i64, y0 as i64);
    let (p00, p10, p01, p11) = (
        fetch(x0, y0),
        fetch(x0 + 1, y0),
        fetch(x0, y0 + 1),
        fetch(x0 + 1, y0 + 1),
    );
    [0, 1, 2].map(|c| {
        let top = p00[c] * (1.0 - tx) + p10[c] * tx;
        let bot = p01[c] * (1.0 - tx) + p11[c] * tx;
        top * (1.0 - ty) + bot * ty
    })
}

fn mesh_albedo(mesh: &Mesh, face: [u32; 3], b: [f64; 3]) -> Rgb {
    match mesh.albedo() {
        Albedo::Uniform(c) => *c,
        Albedo::Texture(img) => {
            let uvs = mesh.uvs();
            let uv = face.iter().zip(b).fold(Point2::origin(), |acc, (&i, w)| {
                acc + uvs[i as usize].coords * w
            });
            sample_texture(img, uv)
        }
        Albedo::VertexColors(colors) => {
            let mut out = [0.0f32; 3];
            for (&i, w) in face.iter().zip(b) {
                for c in 0..3 {
                    out[c] += colors[i as usize][c] * w as f32;
                }
            }
            out
        }
    }
}

struct Resolver<'a> {
    scene: &'a RenderScene,
    flags: RenderFlags,
    items: &'a [ItemGeometry<'a>],
}

impl Resolver<'_> {
    fn shade(
        &self,
        n: &Vector3<f64>,
        p: &Point3<f64>,
        albedo: Rgb,
        mode: ShadingMode,
        obj: Option<usize>,
    ) -> Shading {
        let v = -p.coords.normalize();
        let ambient = self.scene.ambient();
        if self.flags.pbr && mode == ShadingMode::CookTorrance {
            let material =
                &self.scene.objects[obj.expect("only objects use Cook-Torrance")].material;
            let env = self.scene.environment.as_deref();
            shade_cook_torrance(
                n,
                &v,
                std::slice::from_ref(&self.scene.light),
                albedo,
                material,
                env,
                ambient,
            )
        } else {
            shade_phong(n, &v, &self.scene.light, albedo, ambient)
        }
    }

    fn resolve(&self, vis: &VisibilityBuffer, idx: usize) -> Fragment {
        let item = vis.item[idx];
        if item == NO_ITEM {
            return Fragment::default();
        }
        let item = item as usize;
        let b = vis.bary[idx];
        let geom = &self.items[item];
        let face = geom.faces[vis.tri[idx] as usize];
        let [a, bb, c] = face.map(|i| geom.vertices[i as usize]);
        let p = Point3::from(a.coords * b[0] + bb.coords * b[1] + c.coords * b[2]);
        let mut ng = (bb - a).cross(&(c - a)).normalize();
        let facing_away = ng.dot(&p.coords) > 0.0;
        if facing_away {
            ng = -ng;
        }
        if let Some(obj) = self.scene.objects.get(item) {
            let mesh = &obj.mesh;
            let [oa, ob, oc] = face.map(|i| mesh.vertices()[i as usize]);
            let p_obj = Point3::from(oa.coords * b[0] + ob.coords * b[1] + oc.coords * b[2]);
            let ns = mesh.normals();
            let n_obj = face
                .iter()
                .zip(b)
                .fold(Vector3::zeros(), |acc, (&i, w)| acc + ns[i as usize] * w);
            let mut n = (obj.pose.rotation * n_obj)
                .try_normalize(1e-12)
                .unwrap_or(ng);
            if facing_away {
                n = -n;
            }
            let mut albedo = mesh_albedo(mesh, face, b);
            if self.flags.stickers {
                if let Some(texel) = obj.sticker.as_ref().and_then(|s| s.texel(&p_obj, &n_obj)) {
                    albedo = texel;
                }
            }
            let shading = self.shade(&n, &p, albedo, obj.material.mode, Some(item));
            Fragment {
                depth: vis.depth[idx] as f32,
                class: obj.class_id,
                instance: obj.instance_id,
                normal: [n.x as f32, n.y as f32, n.z as f32],
                obj: [p_obj.x as f32, p_obj.y as f32, p_obj.z as f32],
                albedo,
                shading,
            }
        } else {
            let plane = self
                .scene
                .plane
                .as_ref()
                .expect("item past the objects is the plane");
            let n = ng;
            let albedo = match &plane.texture {
                Some(tex) => {
                    let (u, w) = crate::tangent_basis(&plane.normal);
                    let r = p - plane.point;
                    // Flip v so the texture is not mirrored under `sample_texture`'s convention.
                    let uv = Point2::new(r.dot(&u) / plane.tile_size, -r.dot(&w) / plane.tile_size);
                    sample_texture(tex, uv)
                }
                None => plane.color,
            };
            let shading = self.shade(&n, &p, albedo, ShadingMode::Phong, None);
            Fragment {
                depth: vis.depth[idx] as f32,
                normal: [n.x as f32, n.y as f32, n.z as f32],
                albedo,
                shading,
                ..Fragment::default()
            }
        }
    }
}

/// Renders all colour and ground-truth channels from a single rasterization pass.
pub fn render_frame(
    scene: &RenderScene,
    camera: &PinholeCamera,
    flags: RenderFlags,
) -> Result<FrameBuffers, RenderError> {
    camera.validate().map_err(RenderError::Camera)?;
    let mut seen = std::collections::HashSet::new();
    for o in &scene.objects {
        if o.instance_id == 0 || o.class_id == 0 || !seen.insert(o.instance_id) {
            return Err(RenderError::Scene(format!(
                "instance {} (class {}) must have non-zero, unique ids",
                o.instance_id, o.class_id
            )));
        }
    }
    let (w, h) = (camera.width, camera.height);
    let mut items: Vec<ItemGeometry> = scene
        .objects
        .iter()
        .map(|o| ItemGeometry {
            vertices: o.mesh.vertices().iter().map(|v| o.pose * v).collect(),
            faces: o.mesh.faces(),
        })
        .collect();
    if let Some(plane) = &scene.plane {
        items.push(ItemGeometry {
            vertices: plane_corners(plane, camera),
            faces: &PLANE_FACES,
        });
    }
    let vis = rasterize(&items, camera);
    let resolver = Resolver {
        scene,
        flags,
        items: &items,
    };
    let frags: Vec<Fragment> = (0..camera.pixel_count())
        .into_par_iter()
        .map(|i| resolver.resolve(&vis, i))
        .collect();

    let depth: Vec<f32> = frags.iter().map(|f| f.depth).collect();
    let normals: Vec<[f32; 3]> = frags.iter().map(|f| f.normal).collect();
    let ao = if flags.ssao {
        ssao_factor(&depth, &normals, camera, &Kernel::default(), DEFAULT_RADIUS)
    } else {
        vec![1.0; depth.len()]
    };
    let background = match &scene.background {
        Some(bg) if bg.width() == w && bg.height() == h => bg.as_ref().clone(),
        Some(bg) => fit_background_linear(bg, w, h),
        None => {
            log::warn!("no background image; filling with mid-gray");
            LinearImage::filled(w, h, MID_GRAY)
        }
    };
    let mut rgb = background;
    for (i, f) in frags.iter().enumerate() {
        if f.depth > 0.0 {
            let (d, a) = (f.shading.direct, f.shading.ambient);
            rgb.pixels_mut()[i] = [0, 1, 2].map(|c| d[c] + ao[i] * a[c]);
        }
    }
    let image =
        |sel: fn(&Fragment) -> Rgb| LinearImage::from_raw(w, h, frags.iter().map(sel).collect());
    let taps = ShadingTaps {
        albedo: image(|f| f.albedo),
        direct: image(|f| f.shading.direct),
        ambient: image(|f| f.shading.ambient),
        ao,
    };
    Ok(FrameBuffers {
        width: w,
        height: h,
        rgb,
        class_map: frags.iter().map(|f| f.class).collect(),
        instance_map: frags.iter().map(|f| f.instance).collect(),
        depth,
        normals,
        obj_coords: frags.iter().map(|f| f.obj).collect(),
        poses: scene
            .objects
            .iter()
            .map(|o| InstancePose {
                instance_id: o.instance_id,
                class_id: o.class_id,
                pose: o.pose,
            })
            .collect(),
        taps: Some(taps),
    })
}
