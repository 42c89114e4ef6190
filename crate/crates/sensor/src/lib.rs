//! Camera sensor model: chromatic aberration, blur, exposure, color temperature and
//! noise, in that order, followed by sRGB encoding to 8 bits.

pub mod params;
pub mod stages;

pub use params::{sample_effect_params, CameraEffectParams, EffectRanges, Range};
pub use stages::{
    apply_blur, apply_chromatic_aberration, apply_color_temperature, apply_exposure, apply_noise,
    color_temperature_gains,
};

use rand::Rng;
use slb_core::color::LinearImage;

/// Stages to run; a disabled stage passes its input through unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stages {
    pub aberration: bool,
    pub blur: bool,
    pub exposure: bool,
    pub color_temperature: bool,
    pub noise: bool,
}

impl Stages {
    pub const ALL: Self = Self {
        aberration: true,
        blur: true,
        exposure: true,
        color_temperature: true,
        noise: true,
    };
    pub const NONE: Self = Self {
        aberration: false,
        blur: false,
        exposure: false,
        color_temperature: false,
        noise: false,
    };
}

impl Default for Stages {
    fn default() -> Self {
        Self::ALL
    }
}

/// Linear image after each stage; `noise` is the pre-quantization tap.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTaps {
    pub aberration: LinearImage,
    pub blur: LinearImage,
    pub exposure: LinearImage,
    pub color_temperature: LinearImage,
    pub noise: LinearImage,
}

/// Runs the chain and keeps every intermediate image.
pub fn apply_camera_chain_tapped<R: Rng + ?Sized>(
    image: &LinearImage,
    params: &CameraEffectParams,
    principal: (f64, f64),
    stages: Stages,
    rng: &mut R,
) -> (image::RgbImage, ChainTaps) {
    let aberration = if stages.aberration {
        apply_chromatic_aberration(image, params.ca_scale_red, params.ca_scale_blue, principal)
    } else {
        image.clone()
    };
    let blur = if stages.blur {
        apply_blur(&aberration, params.blur_sigma)
    } else {
        aberration.clone()
    };
    let exposure = if stages.exposure {
        apply_exposure(&blur, params.exposure_ev)
    } else {
        blur.clone()
    };
    let color_temperature = if stages.color_temperature {
        apply_color_temperature(&exposure, params.color_temp_kelvin)
    } else {
        exposure.clone()
    };
    let noise = if stages.noise {
        apply_noise(
            &color_temperature,
            params.shot_noise_a,
            params.read_noise_b,
            rng,
        )
    } else {
        color_temperature.clone()
    };
    let out = noise.to_srgb8();
    (
        out,
        ChainTaps {
            aberration,
            blur,
            exposure,
            color_temperature,
            noise,
        },
    )
}

/// Degrades a linear image and encodes it to 8-bit sRGB.
pub fn apply_camera_chain<R: Rng + ?Sized>(
    image: &LinearImage,
    params: &CameraEffectParams,
    principal: (f64, f64),
    rng: &mut R,
) -> image::RgbImage {
    apply_camera_chain_tapped(image, params, principal, Stages::ALL, rng).0
}
