use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use slb_core::color::LinearImage;

/// Radial magnification of the red and blue channels about `principal` (continuous
/// pixel coordinates, pixel centres at `i + 0.5`), with bilinear clamp-to-edge sampling.
pub fn apply_chromatic_aberration(
    image: &LinearImage,
    ca_scale_red: f64,
    ca_scale_blue: f64,
    principal: (f64, f64),
) -> LinearImage {
    let mut out = image.clone();
    for (channel, scale) in [(0usize, ca_scale_red), (2, ca_scale_blue)] {
        if scale == 1.0 {
            continue;
        }
        let w = image.width();
        let values: Vec<f32> = (0..image.pixels().len())
            .into_par_iter()
            .map(|i| {
                let (x, y) = ((i as u32 % w) as f64 + 0.5, (i as u32 / w) as f64 + 0.5);
                let sx = principal.0 + (x - principal.0) / scale - 0.5;
                let sy = principal.1 + (y - principal.1) / scale - 0.5;
                let (x0, y0) = (sx.floor(), sy.floor());
                let (tx, ty) = ((sx - x0) as f32, (sy - y0) as f32);
                let (x0, y0) = (x0 as i64, y0 as i64);
                let at = |xx: i64, yy: i64| image.get_clamped(xx, yy)[channel];
                let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
                let bot = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
                top * (1.0 - ty) + bot * ty
            })
            .collect();
        for (p, v) in out.pixels_mut().iter_mut().zip(values) {
            p[channel] = v;
        }
    }
    out
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil().max(1.0) as i64;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = weights.iter().sum();
    weights.iter().map(|w| (w / sum) as f32).collect()
}

/// Separable Gaussian blur with clamp-to-edge borders; `sigma = 0` is the identity.
pub fn apply_blur(image: &LinearImage, sigma: f64) -> LinearImage {
    if sigma <= 0.0 {
        return image.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (image.width(), image.height());
    let pass = |src: &LinearImage, horizontal: bool| -> LinearImage {
        let data = (0..w * h)
            .into_par_iter()
            .map(|i| {
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                let mut acc = [0.0f32; 3];
                for (k, wt) in kernel.iter().enumerate() {
                    let o = k as i64 - r;
                    let p = if horizontal {
                        src.get_clamped(x + o, y)
                    } else {
                        src.get_clamped(x, y + o)
                    };
                    for c in 0..3 {
                        acc[c] += wt * p[c];
                    }
                }
                acc
            })
            .collect();
        LinearImage::from_raw(w, h, data)
    };
    pass(&pass(image, true), false)
}

/// Scales linear intensity by `2^ev`.
pub fn apply_exposure(image: &LinearImage, ev: f64) -> LinearImage {
    if ev == 0.0 {
        return image.clone();
    }
    let gain = 2f64.powf(ev) as f32;
    let data = image.pixels().iter().map(|p| p.map(|c| c * gain)).collect();
    LinearImage::from_raw(image.width(), image.height(), data)
}

/// Chromaticity of a blackbody at `kelvin` on the Planckian locus (cubic spline fit).
fn planckian_xy(kelvin: f64) -> (f64, f64) {
    let t = kelvin.clamp(1667.0, 25000.0);
    let (t1, t2, t3) = (1e3 / t, 1e6 / (t * t), 1e9 / (t * t * t));
    let x = if t <= 4000.0 {
        -0.266_123_9 * t3 - 0.234_358_9 * t2 + 0.877_695_6 * t1 + 0.179_910
    } else {
        -3.025_846_9 * t3 + 2.107_037_9 * t2 + 0.222_634_7 * t1 + 0.240_390
    };
    let y = if t <= 2222.0 {
        -1.106_381_4 * x.powi(3) - 1.348_110_20 * x * x + 2.185_558_32 * x - 0.202_196_83
    } else if t <= 4000.0 {
        -0.954_947_6 * x.powi(3) - 1.374_185_93 * x * x + 2.091_370_15 * x - 0.167_488_67
    } else {
        3.081_758_0 * x.powi(3) - 5.873_386_70 * x * x + 3.751_129_97 * x - 0.370_014_83
    };
    (x, y)
}

/// Linear sRGB of the blackbody white at unit luminance.
fn planckian_rgb(kelvin: f64) -> [f64; 3] {
    let (x, y) = planckian_xy(kelvin);
    let (cx, cz) = (x / y, (1.0 - x - y) / y);
    [
        3.240_6 * cx - 1.537_2 - 0.498_6 * cz,
        -0.968_9 * cx + 1.875_8 + 0.041_5 * cz,
        0.055_7 * cx - 0.204_0 + 1.057_0 * cz,
    ]
}

/// Per-channel gains tinting a 6500 K-balanced image toward an illuminant at `kelvin`,
/// normalized to unit green gain.
pub fn color_temperature_gains(kelvin: f64) -> [f32; 3] {
    if kelvin == crate::params::NEUTRAL_KELVIN {
        return [1.0; 3];
    }
    let t = planckian_rgb(kelvin);
    let n = planckian_rgb(crate::params::NEUTRAL_KELVIN);
    let g = [t[0] / n[0], t[1] / n[1], t[2] / n[2]];
    g.map(|v| (v / g[1]).max(1e-3) as f32)
}

pub fn apply_color_temperature(image: &LinearImage, kelvin: f64) -> LinearImage {
    let gains = color_temperature_gains(kelvin);
    if gains == [1.0; 3] {
        return image.clone();
    }
    let data = image
        .pixels()
        .iter()
        .map(|p| [p[0] * gains[0], p[1] * gains[1], p[2] * gains[2]])
        .collect();
    LinearImage::from_raw(image.width(), image.height(), data)
}

/// Additive zero-mean Gaussian noise with variance `a·I + b`; values are not clamped,
/// so the result is unbiased.
pub fn apply_noise<R: Rng + ?Sized>(
    image: &LinearImage,
    a: f64,
    b: f64,
    rng: &mut R,
) -> LinearImage {
    if a == 0.0 && b == 0.0 {
        return image.clone();
    }
    let data = image
        .pixels()
        .iter()
        .map(|p| {
            p.map(|c| {
                let z: f64 = rng.sample(StandardNormal);
                let var = a * (c as f64).max(0.0) + b;
                (c as f64 + var.sqrt() * z) as f32
            })
        })
        .collect();
    LinearImage::from_raw(image.width(), image.height(), data)
}
