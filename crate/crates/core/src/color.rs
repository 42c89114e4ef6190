//! sRGB transfer functions and a linear float RGB image buffer.

use std::sync::OnceLock;

/// Linear-light RGB triple.
pub type Rgb = [f32; 3];

#[inline]
pub fn srgb_to_linear(c: f32) -> f32 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
pub fn linear_to_srgb(c: f32) -> f32 {
    if c <= 0.003_130_8 {
        c * 12.92
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

/// Lookup table decoding 8-bit sRGB codes to linear values.
pub fn srgb_decode_lut() -> &'static [f32; 256] {
    static LUT: OnceLock<[f32; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        let mut lut = [0.0f32; 256];
        for (i, v) in lut.iter_mut().enumerate() {
            *v = srgb_to_linear(i as f32 / 255.0);
        }
        lut
    })
}

#[inline]
pub fn decode_srgb8(texel: [u8; 3]) -> Rgb {
    let lut = srgb_decode_lut();
    [
        lut[texel[0] as usize],
        lut[texel[1] as usize],
        lut[texel[2] as usize],
    ]
}

/// Encodes a linear value to an 8-bit sRGB code (clamped, rounded to nearest).
#[inline]
pub fn encode_srgb8(c: f32) -> u8 {
    let c = if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) };
    (linear_to_srgb(c) * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Row-major H×W image of linear RGB floats.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearImage {
    width: u32,
    height: u32,
    data: Vec<Rgb>,
}

impl LinearImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, [0.0; 3])
    }

    pub fn filled(width: u32, height: u32, value: Rgb) -> Self {
        Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<Rgb>) -> Self {
        assert_eq!(
            data.len(),
            width as usize * height as usize,
            "pixel count mismatch"
        );
        Self {
            width,
            height,
            data,
        }
    }

    /// Decodes an 8-bit sRGB image into linear light.
    pub fn from_srgb8(img: &image::RgbImage) -> Self {
        let data = img.pixels().map(|p| decode_srgb8(p.0)).collect();
        Self {
            width: img.width(),
            height: img.height(),
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: Rgb) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = value;
    }

    /// Clamp-to-edge fetch with signed coordinates.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> Rgb {
        let x = x.clamp(0, self.width as i64 - 1) as u32;
        let y = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(x, y)
    }

    /// Encodes to 8-bit sRGB without any other processing.
    pub fn to_srgb8(&self) -> image::RgbImage {
        let mut out = image::RgbImage::new(self.width, self.height);
        for (dst, src) in out.pixels_mut().zip(&self.data) {
            dst.0 = [
                encode_srgb8(src[0]),
                encode_srgb8(src[1]),
                encode_srgb8(src[2]),
            ];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn srgb_codes_round_trip() {
        for k in 0..=255u8 {
            let lin = decode_srgb8([k, k, k])[0];
            assert_eq!(encode_srgb8(lin), k);
        }
    }

    #[test]
    fn encode_clamps_out_of_range() {
        assert_eq!(encode_srgb8(-1.0), 0);
        assert_eq!(encode_srgb8(7.0), 255);
        assert_eq!(encode_srgb8(f32::NAN), 0);
    }
}
