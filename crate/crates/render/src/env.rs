//! Equirectangular environment maps with SH irradiance and prefiltered specular levels.
//!
//! Directions are camera-frame vectors. The map's "up" (top row) is camera `-y`:
//! texel `(u, v)` in `[0,1]²` maps to polar angle `θ = v·π` from up and azimuth
//! `φ = u·2π` measured from `+x` toward `+z`.

use nalgebra::Vector3;
use rayon::prelude::*;
use slb_core::color::{LinearImage, Rgb};
use std::f64::consts::{PI, TAU};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Roughness values of the stored specular levels; level 0 is the source map.
pub const PREFILTER_ROUGHNESS: [f32; 5] = [0.05, 0.25, 0.5, 0.75, 1.0];
const PREFILTER_WIDTH: [u32; 5] = [0, 256, 128, 64, 32];
/// Source maps wider than this are box-downsampled on load.
pub const MAX_SOURCE_WIDTH: u32 = 1024;

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}: {source}")]
    Image {
        path: String,
        source: image::ImageError,
    },
}

#[derive(Clone, Debug)]
pub struct EnvironmentMap {
    levels: Vec<LinearImage>,
    sh: [[f32; 3]; 9],
    mean: Rgb,
}

pub fn direction(u: f64, v: f64) -> Vector3<f64> {
    let theta = v * PI;
    let phi = u * TAU;
    Vector3::new(
        theta.sin() * phi.cos(),
        -theta.cos(),
        theta.sin() * phi.sin(),
    )
}

pub fn tex_coords(d: &Vector3<f64>) -> (f64, f64) {
    let len = d.norm();
    let y = (-d.y / len).clamp(-1.0, 1.0);
    let mut phi = d.z.atan2(d.x);
    if phi < 0.0 {
        phi += TAU;
    }
    (phi / TAU, y.acos() / PI)
}

/// Real SH basis up to band 2.
pub fn sh_basis(d: &Vector3<f64>) -> [f64; 9] {
    let (x, y, z) = (d.x, d.y, d.z);
    [
        0.282_094_791_773_878_1,
        0.488_602_511_902_919_9 * y,
        0.488_602_511_902_919_9 * z,
        0.488_602_511_902_919_9 * x,
        1.092_548_430_592_079 * x * y,
        1.092_548_430_592_079 * y * z,
        0.315_391_565_252_520_05 * (3.0 * z * z - 1.0),
        1.092_548_430_592_079 * x * z,
        0.546_274_215_296_039_5 * (x * x - y * y),
    ]
}

/// Cosine-lobe convolution weights per band.
const BAND_SCALE: [f64; 9] = [
    PI,
    2.0 * PI / 3.0,
    2.0 * PI / 3.0,
    2.0 * PI / 3.0,
    PI / 4.0,
    PI / 4.0,
    PI / 4.0,
    PI / 4.0,
    PI / 4.0,
];

/// Exact solid angle of texel row `j` in an `w × h` map.
fn row_solid_angle(j: u32, w: u32, h: u32) -> f64 {
    let t0 = j as f64 / h as f64 * PI;
    let t1 = (j + 1) as f64 / h as f64 * PI;
    TAU / w as f64 * (t0.cos() - t1.cos())
}

impl EnvironmentMap {
    pub fn from_image(image: LinearImage) -> Self {
        let image = downsample_to(&sanitize(image), MAX_SOURCE_WIDTH);
        let (sh, mean) = project_sh(&image);
        let mut levels = vec![image];
        for k in 1..PREFILTER_ROUGHNESS.len() {
            let w = PREFILTER_WIDTH[k].min(levels[0].width()).max(4);
            let src = downsample_to(&levels[0], w);
            levels.push(prefilter(&src, PREFILTER_ROUGHNESS[k]));
        }
        Self { levels, sh, mean }
    }

    /// Constant radiance in every direction.
    pub fn uniform(radiance: Rgb) -> Self {
        Self::from_image(LinearImage::filled(16, 8, radiance))
    }

    pub fn load(path: &Path) -> Result<Self, EnvError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        let image = if ext == "pfm" {
            read_pfm(path)?
        } else {
            let img = image::open(path).map_err(|e| EnvError::Image {
                path: path.display().to_string(),
                source: e,
            })?;
            let rgb = img.to_rgb32f();
            let data = rgb.pixels().map(|p| p.0).collect();
            LinearImage::from_raw(rgb.width(), rgb.height(), data)
        };
        Ok(Self::from_image(image))
    }

    pub fn source(&self) -> &LinearImage {
        &self.levels[0]
    }

    pub fn sh_coefficients(&self) -> &[[f32; 3]; 9] {
        &self.sh
    }

    /// Solid-angle weighted mean radiance.
    pub fn mean_radiance(&self) -> Rgb {
        self.mean
    }

    /// Cosine-weighted irradiance around the unit normal `n`.
    pub fn irradiance(&self, n: &Vector3<f64>) -> Rgb {
        let y = sh_basis(n);
        let mut out = [0.0f64; 3];
        for k in 0..9 {
            for c in 0..3 {
                out[c] += BAND_SCALE[k] * self.sh[k][c] as f64 * y[k];
            }
        }
        out.map(|v| v.max(0.0) as f32)
    }

    pub fn radiance(&self, d: &Vector3<f64>) -> Rgb {
        sample_bilinear(&self.levels[0], d)
    }

    /// Prefiltered radiance along `d`, interpolating between roughness levels.
    pub fn specular(&self, d: &Vector3<f64>, roughness: f32) -> Rgb {
        let r = roughness.clamp(PREFILTER_ROUGHNESS[0], 1.0);
        let k = PREFILTER_ROUGHNESS
            .windows(2)
            .position(|w| r <= w[1])
            .unwrap_or(PREFILTER_ROUGHNESS.len() - 2);
        let (r0, r1) = (PREFILTER_ROUGHNESS[k], PREFILTER_ROUGHNESS[k + 1]);
        let t = (r - r0) / (r1 - r0);
        let a = sample_bilinear(&self.levels[k], d);
        if t <= 0.0 {
            return a;
        }
        let b = sample_bilinear(&self.levels[k + 1], d);
        [0, 1, 2].map(|c| a[c] * (1.0 - t) + b[c] * t)
    }

    pub fn level(&self, k: usize) -> &LinearImage {
        &self.levels[k]
    }
}

fn sanitize(mut image: LinearImage) -> LinearImage {
    for p in image.pixels_mut() {
        for c in p.iter_mut() {
            if !c.is_finite() || *c < 0.0 {
                *c = 0.0;
            }
        }
    }
    image
}

fn project_sh(image: &LinearImage) -> ([[f32; 3]; 9], Rgb) {
    let (w, h) = (image.width(), image.height());
    let mut total = [0.0f64; 3];
    let mut area = 0.0;
    for j in 0..h {
        let dw = row_solid_angle(j, w, h);
        for i in 0..w {
            let p = image.get(i, j);
            for c in 0..3 {
                total[c] += p[c] as f64 * dw;
            }
        }
        area += dw * w as f64;
    }
    let mean = total.map(|t| t / area);
    // Band 0 comes from the exact mean; the higher bands project the deviation from it,
    // so a constant map has no higher-order terms despite the discrete grid.
    let mut sh = [[0.0f64; 3]; 9];
    for c in 0..3 {
        sh[0][c] = mean[c] * 4.0 * PI * sh_basis(&Vector3::z())[0];
    }
    for j in 0..h {
        let dw = row_solid_angle(j, w, h);
        for i in 0..w {
            let d = direction((i as f64 + 0.5) / w as f64, (j as f64 + 0.5) / h as f64);
            let y = sh_basis(&d);
            let p = image.get(i, j);
            for c in 0..3 {
                let l = (p[c] as f64 - mean[c]) * dw;
                for k in 1..9 {
                    sh[k][c] += l * y[k];
                }
            }
        }
    }
    (sh.map(|r| r.map(|v| v as f32)), mean.map(|v| v as f32))
}

/// Box-filters `image` down to at most `width` columns (keeps the 2:1 layout).
fn downsample_to(image: &LinearImage, width: u32) -> LinearImage {
    let (w, h) = (image.width(), image.height());
    if w <= width {
        return image.clone();
    }
    let nw = width;
    let nh = ((h as u64 * nw as u64) / w as u64).max(1) as u32;
    let mut out = LinearImage::new(nw, nh);
    for y in 0..nh {
        let y0 = y as u64 * h as u64 / nh as u64;
        let y1 = ((y as u64 + 1) * h as u64 / nh as u64).max(y0 + 1);
        for x in 0..nw {
            let x0 = x as u64 * w as u64 / nw as u64;
            let x1 = ((x as u64 + 1) * w as u64 / nw as u64).max(x0 + 1);
            let mut acc = [0.0f64; 3];
            for yy in y0..y1 {
                for xx in x0..x1 {
                    let p = image.get(xx as u32, yy as u32);
                    for c in 0..3 {
                        acc[c] += p[c] as f64;
                    }
                }
            }
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            out.set(x, y, acc.map(|v| (v / n) as f32));
        }
    }
    out
}

/// Convolves with a normalized `cos^s` lobe, `s = max(2/α² − 2, 1)`, `α = roughness²`.
fn prefilter(src: &LinearImage, roughness: f32) -> LinearImage {
    let (w, h) = (src.width(), src.height());
    let alpha = (roughness as f64).powi(2);
    let s = (2.0 / (alpha * alpha) - 2.0).max(1.0);
    // Lobe weight falls below 1e-3 beyond this angle.
    let cutoff = (1e-3f64).powf(1.0 / s);
    let reach = cutoff.acos();
    let dirs: Vec<Vector3<f64>> = (0..h)
        .flat_map(|j| {
            (0..w).map(move |i| direction((i as f64 + 0.5) / w as f64, (j as f64 + 0.5) / h as f64))
        })
        .collect();
    let rows: Vec<f64> = (0..h).map(|j| row_solid_angle(j, w, h)).collect();
    let data: Vec<Rgb> = (0..h * w)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % w, idx / w);
            let d = dirs[idx as usize];
            let theta = (j as f64 + 0.5) / h as f64 * PI;
            let j0 = (((theta - reach) / PI * h as f64).floor().max(0.0)) as u32;
            let j1 = (((theta + reach) / PI * h as f64).ceil().min(h as f64)) as u32;
            let mut acc = [0.0f64; 3];
            let mut wsum = 0.0;
            for jj in j0..j1 {
                let st = ((jj as f64 + 0.5) / h as f64 * PI).sin();
                let span = if st * PI > reach {
                    (reach / st / TAU * w as f64).ceil() as i64 + 1
                } else {
                    w as i64
                };
                let (lo, hi) = if 2 * span + 1 >= w as i64 {
                    (0, w as i64)
                } else {
                    (i as i64 - span, i as i64 + span + 1)
                };
                for ii in lo..hi {
                    let ii = ii.rem_euclid(w as i64) as u32;
                    let q = &dirs[(jj * w + ii) as usize];
                    let c = d.dot(q);
                    if c <= cutoff {
                        continue;
                    }
                    let wt = c.powf(s) * rows[jj as usize];
                    let p = src.get(ii, jj);
                    for k in 0..3 {
                        acc[k] += wt * p[k] as f64;
                    }
                    wsum += wt;
                }
            }
            if wsum > 0.0 {
                acc.map(|v| (v / wsum) as f32)
            } else {
                src.get(i, j)
            }
        })
        .collect();
    LinearImage::from_raw(w, h, data)
}

fn sample_bilinear(image: &LinearImage, d: &Vector3<f64>) -> Rgb {
    let (u, v) = tex_coords(d);
    let (w, h) = (image.width() as f64, image.height() as f64);
    let x = u * w - 0.5;
    let y = (v * h - 0.5).clamp(0.0, h - 1.0);
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = ((x - x0) as f32, (y - y0) as f32);
    let wrap = |x: f64| (x as i64).rem_euclid(image.width() as i64) as u32;
    let (xa, xb) = (wrap(x0), wrap(x0 + 1.0));
    let ya = y0 as u32;
    let yb = (ya + 1).min(image.height() - 1);
    let (p00, p10, p01, p11) = (
        image.get(xa, ya),
        image.get(xb, ya),
        image.get(xa, yb),
        image.get(xb, yb),
    );
    [0, 1, 2].map(|c| {
        let top = p00[c] * (1.0 - tx) + p10[c] * tx;
        let bot = p01[c] * (1.0 - tx) + p11[c] * tx;
        top * (1.0 - ty) + bot * ty
    })
}

/// Reads a colour or greyscale Portable Float Map.
pub fn read_pfm(path: &Path) -> Result<LinearImage, EnvError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| EnvError::Io {
        path: display.clone(),
        source: e,
    })?;
    let mut reader = BufReader::new(file);
    let fmt = |m: &str| EnvError::Format {
        path: display.clone(),
        message: m.to_string(),
    };
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 {
        let mut line = String::new();
        if reader.read_line(&mut line).map_err(|e| EnvError::Io {
            path: display.clone(),
            source: e,
        })? == 0
        {
            return Err(fmt("truncated header"));
        }
        tokens.extend(line.split_whitespace().map(str::to_string));
    }
    let channels = match tokens[0].as_str() {
        "PF" => 3,
        "Pf" => 1,
        _ => return Err(fmt("not a PFM file")),
    };
    let w: u32 = tokens[1].parse().map_err(|_| fmt("bad width"))?;
    let h: u32 = tokens[2].parse().map_err(|_| fmt("bad height"))?;
    let scale: f32 = tokens[3].parse().map_err(|_| fmt("bad scale"))?;
    let little = scale < 0.0;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| EnvError::Io {
        path: display.clone(),
        source: e,
    })?;
    let need = w as usize * h as usize * channels * 4;
    if bytes.len() < need {
        return Err(fmt(&format!(
            "expected {need} data bytes, found {}",
            bytes.len()
        )));
    }
    let mut data = vec![[0.0f32; 3]; w as usize * h as usize];
    for (k, chunk) in bytes[..need].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let px = k / channels;
        // Rows are stored bottom to top.
        let (x, y) = (px % w as usize, h as usize - 1 - px / w as usize);
        let dst = &mut data[y * w as usize + x];
        if channels == 3 {
            dst[k % 3] = v;
        } else {
            *dst = [v; 3];
        }
    }
    Ok(LinearImage::from_raw(w, h, data))
}

/// Writes a little-endian colour PFM.
pub fn write_pfm(path: &Path, image: &LinearImage) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "PF\n{} {}\n-1.0\n", image.width(), image.height())?;
    for y in (0..image.height()).rev() {
        for x in 0..image.width() {
            for c in image.get(x, y) {
                out.write_all(&c.to_le_bytes())?;
            }
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_round_trip() {
        for (u, v) in [(0.1, 0.3), (0.75, 0.9), (0.5, 0.5)] {
            let (a, b) = tex_coords(&direction(u, v));
            assert!((a - u).abs() < 1e-12 && (b - v).abs() < 1e-12);
        }
        assert!((direction(0.3, 0.0) - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn uniform_irradiance_is_pi_c() {
        let c = [0.2, 1.0, 3.5];
        let env = EnvironmentMap::uniform(c);
        for n in [Vector3::x(), Vector3::new(0.3, -0.5, 0.8).normalize()] {
            let e = env.irradiance(&n);
            for k in 0..3 {
                assert!(
                    (e[k] as f64 - c[k] as f64 * PI).abs() <= 1e-6 * (c[k] as f64 * PI).max(1.0)
                );
            }
        }
        let s = env.specular(&Vector3::z(), 0.6);
        assert!((s[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn pfm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("env.pfm");
        let img = LinearImage::from_raw(3, 2, (0..6).map(|i| [i as f32, 0.5, -1.0]).collect());
        write_pfm(&path, &img).unwrap();
        assert_eq!(read_pfm(&path).unwrap(), img);
    }

    #[test]
    fn bright_spot_irradiance_peaks_toward_it() {
        let mut img = LinearImage::new(64, 32);
        img.set(16, 16, [100.0; 3]);
        let env = EnvironmentMap::from_image(img);
        let toward = direction(16.5 / 64.0, 16.5 / 32.0);
        assert!(env.irradiance(&toward)[0] > env.irradiance(&-toward)[0]);
    }
}
