//! Procedural demo assets and a matching config, so the generator runs without downloads.

use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slb_core::color::LinearImage;
use slb_core::io::write_obj;
use slb_core::primitives::{cylinder, icosphere, lathe, textured_box};
use slb_core::Mesh;

pub const CONFIG_FILE: &str = "config.toml";

struct DemoMesh {
    id: &'static str,
    class_id: u16,
    mesh: Mesh,
    material: Material,
}

enum Material {
    Texture(RgbImage),
    Color([f32; 3]),
}

fn label_texture(rng: &mut ChaCha8Rng, w: u32, h: u32) -> RgbImage {
    let base = [
        rng.random_range(40..220),
        rng.random_range(40..220),
        rng.random_range(40..220),
    ];
    let accent = [255 - base[0], 255 - base[1], 255 - base[2]];
    let bands = rng.random_range(2..6);
    RgbImage::from_fn(w, h, |x, y| {
        let band = (y * bands / h).is_multiple_of(2);
        let dot = ((x as i32 - w as i32 / 2).pow(2) + (y as i32 - h as i32 / 2).pow(2))
            < (h as i32 / 5).pow(2);
        if dot || !band && (x / 8) % 2 == 0 {
            Rgb(accent)
        } else {
            Rgb(base)
        }
    })
}

fn meshes(rng: &mut ChaCha8Rng) -> Vec<DemoMesh> {
    let bottle = lathe::<f64>(
        &[(0.035, 0.0), (0.035, 0.12), (0.015, 0.17), (0.015, 0.2)],
        24,
    );
    vec![
        DemoMesh {
            id: "cracker_box",
            class_id: 1,
            mesh: textured_box([0.16, 0.06, 0.21]),
            material: Material::Texture(label_texture(rng, 128, 128)),
        },
        DemoMesh {
            id: "soup_can",
            class_id: 2,
            mesh: cylinder(0.034, 0.1, 32),
            material: Material::Texture(label_texture(rng, 128, 64)),
        },
        DemoMesh {
            id: "bottle",
            class_id: 3,
            mesh: bottle,
            material: Material::Color([0.1, 0.35, 0.7]),
        },
        // 5120 faces, above the physics budget, so simplification is exercised.
        DemoMesh {
            id: "melon",
            class_id: 4,
            mesh: icosphere(0.06, 4),
            material: Material::Color([0.75, 0.6, 0.15]),
        },
        DemoMesh {
            id: "block",
            class_id: 5,
            mesh: textured_box([0.09, 0.05, 0.05]),
            material: Material::Texture(label_texture(rng, 64, 64)),
        },
        DemoMesh {
            id: "ball",
            class_id: 6,
            mesh: icosphere(0.035, 2),
            material: Material::Color([0.8, 0.1, 0.1]),
        },
    ]
}

fn background(rng: &mut ChaCha8Rng, w: u32, h: u32) -> RgbImage {
    let top: [f32; 3] = [rng.random(), rng.random(), rng.random()];
    let bottom: [f32; 3] = [rng.random(), rng.random(), rng.random()];
    let mut img = RgbImage::from_fn(w, h, |_, y| {
        let t = y as f32 / h as f32;
        Rgb([0, 1, 2].map(|c| ((top[c] * (1.0 - t) + bottom[c] * t) * 255.0) as u8))
    });
    for _ in 0..12 {
        let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
        let (rw, rh) = (
            rng.random_range(w / 20..w / 4),
            rng.random_range(h / 20..h / 4),
        );
        let c = Rgb([rng.random(), rng.random(), rng.random()]);
        for y in y0..(y0 + rh).min(h) {
            for x in x0..(x0 + rw).min(w) {
                img.put_pixel(x, y, c);
            }
        }
    }
    img
}

fn wood(rng: &mut ChaCha8Rng) -> RgbImage {
    let f = rng.random_range(0.05..0.15);
    RgbImage::from_fn(256, 256, |x, y| {
        let s = ((x as f64 * f + (y as f64 * 0.03).sin() * 3.0).sin() * 0.5 + 0.5) as f32;
        Rgb([
            (120.0 + 60.0 * s) as u8,
            (80.0 + 40.0 * s) as u8,
            (40.0 + 20.0 * s) as u8,
        ])
    })
}

fn checker() -> RgbImage {
    RgbImage::from_fn(256, 256, |x, y| {
        if (x / 32 + y / 32) % 2 == 0 {
            Rgb([200, 200, 190])
        } else {
            Rgb([60, 70, 80])
        }
    })
}

/// Sky gradient with a small bright sun.
fn environment(w: u32, h: u32, sun: (f64, f64)) -> LinearImage {
    let mut img = LinearImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let v = (y as f64 + 0.5) / h as f64;
            let u = (x as f64 + 0.5) / w as f64;
            let sky = [
                0.4 + 0.4 * (1.0 - v),
                0.5 + 0.3 * (1.0 - v),
                0.6 + 0.4 * (1.0 - v),
            ];
            let d2 = ((u - sun.0) * 2.0).powi(2) + (v - sun.1).powi(2);
            let glow = 30.0 * (-d2 / 0.002).exp();
            img.set(x, y, sky.map(|c| (c + glow) as f32));
        }
    }
    img
}

fn save(img: &RgbImage, path: &Path) -> std::io::Result<()> {
    img.save(path).map_err(std::io::Error::other)
}

/// Writes meshes, textures, backgrounds, stickers, environment maps and `config.toml`
/// into `dir`; returns the config path.
pub fn write_demo_assets(dir: &Path) -> std::io::Result<PathBuf> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for sub in [
        "meshes",
        "backgrounds",
        "stickers",
        "textures",
        "environments",
    ] {
        fs::create_dir_all(dir.join(sub))?;
    }
    let mut toml = String::from("seed = 42\nobject_count = 5\n\n");
    for m in meshes(&mut rng) {
        let mtl = match &m.material {
            Material::Texture(tex) => {
                save(tex, &dir.join(format!("meshes/{}.png", m.id)))?;
                format!("newmtl {0}\nKd 1 1 1\nmap_Kd {0}.png\n", m.id)
            }
            Material::Color(c) => format!("newmtl {}\nKd {} {} {}\n", m.id, c[0], c[1], c[2]),
        };
        fs::write(dir.join(format!("meshes/{}.mtl", m.id)), mtl)?;
        let obj = format!("mtllib {0}.mtl\nusemtl {0}\n{1}", m.id, write_obj(&m.mesh));
        fs::write(dir.join(format!("meshes/{}.obj", m.id)), obj)?;
        toml += &format!(
            "[[meshes]]\nid = \"{0}\"\npath = \"meshes/{0}.obj\"\nclass_id = {1}\n\n",
            m.id, m.class_id
        );
    }
    let mut lists: [(&str, Vec<String>); 4] = [
        ("backgrounds", vec![]),
        ("environments", vec![]),
        ("stickers", vec![]),
        ("plane_textures", vec![]),
    ];
    for k in 0..3 {
        let p = format!("backgrounds/bg{k}.png");
        save(&background(&mut rng, 640, 480), &dir.join(&p))?;
        lists[0].1.push(p);
    }
    for (k, sun) in [(0.3, 0.2), (0.7, 0.35)].into_iter().enumerate() {
        let p = format!("environments/env{k}.pfm");
        slb_render::env::write_pfm(&dir.join(&p), &environment(128, 64, sun))?;
        lists[1].1.push(p);
    }
    for k in 0..3 {
        let p = format!("stickers/sticker{k}.png");
        let (w, h) = (rng.random_range(48..96), rng.random_range(32..64));
        save(&label_texture(&mut rng, w, h), &dir.join(&p))?;
        lists[2].1.push(p);
    }
    save(&wood(&mut rng), &dir.join("textures/wood.png"))?;
    save(&checker(), &dir.join("textures/checker.png"))?;
    lists[3].1 = vec!["textures/wood.png".into(), "textures/checker.png".into()];

    toml += "[assets]\n";
    for (key, paths) in &lists {
        let quoted: Vec<String> = paths.iter().map(|p| format!("\"{p}\"")).collect();
        toml += &format!("{key} = [{}]\n", quoted.join(", "));
    }
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, toml)?;
    Ok(path)
}
