use rand::Rng;
use serde::{Deserialize, Serialize};

/// Sampled parameters of the sensor chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraEffectParams {
    pub ca_scale_red: f64,
    pub ca_scale_blue: f64,
    /// Gaussian blur standard deviation in pixels.
    pub blur_sigma: f64,
    pub exposure_ev: f64,
    /// Noise variance per unit linear intensity.
    pub shot_noise_a: f64,
    /// Intensity-independent noise variance.
    pub read_noise_b: f64,
    pub color_temp_kelvin: f64,
}

pub const CA_SCALE_LIMITS: (f64, f64) = (0.98, 1.02);
pub const KELVIN_LIMITS: (f64, f64) = (2000.0, 12000.0);
/// Color temperature with unit gains.
pub const NEUTRAL_KELVIN: f64 = 6500.0;

impl CameraEffectParams {
    /// Parameters under which every stage is an identity.
    pub fn neutral() -> Self {
        Self {
            ca_scale_red: 1.0,
            ca_scale_blue: 1.0,
            blur_sigma: 0.0,
            exposure_ev: 0.0,
            shot_noise_a: 0.0,
            read_noise_b: 0.0,
            color_temp_kelvin: NEUTRAL_KELVIN,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let in_range = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        if !in_range(self.ca_scale_red, CA_SCALE_LIMITS)
            || !in_range(self.ca_scale_blue, CA_SCALE_LIMITS)
        {
            return Err(format!(
                "aberration scales must lie in [{}, {}], got {} and {}",
                CA_SCALE_LIMITS.0, CA_SCALE_LIMITS.1, self.ca_scale_red, self.ca_scale_blue
            ));
        }
        if !(self.blur_sigma >= 0.0 && self.blur_sigma.is_finite()) {
            return Err(format!("blur_sigma must be >= 0, got {}", self.blur_sigma));
        }
        if !self.exposure_ev.is_finite() {
            return Err("exposure_ev must be finite".into());
        }
        if !(self.shot_noise_a >= 0.0 && self.read_noise_b >= 0.0) {
            return Err("noise variances must be >= 0".into());
        }
        if !in_range(self.color_temp_kelvin, KELVIN_LIMITS) {
            return Err(format!(
                "color temperature must lie in [{}, {}] K, got {}",
                KELVIN_LIMITS.0, KELVIN_LIMITS.1, self.color_temp_kelvin
            ));
        }
        Ok(())
    }
}

impl Default for CameraEffectParams {
    fn default() -> Self {
        Self::neutral()
    }
}

/// Closed sampling interval `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Always draw so the stream advances the same way for degenerate ranges.
        let u: f64 = rng.random();
        if self.min == self.max {
            self.min
        } else {
            self.min + (self.max - self.min) * u
        }
    }
}

/// Per-field sampling ranges for [`sample_effect_params`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffectRanges {
    pub ca_scale_red: Range,
    pub ca_scale_blue: Range,
    pub blur_sigma: Range,
    pub exposure_ev: Range,
    pub shot_noise_a: Range,
    pub read_noise_b: Range,
    pub color_temp_kelvin: Range,
}

impl Default for EffectRanges {
    fn default() -> Self {
        Self {
            ca_scale_red: Range::new(0.995, 1.005),
            ca_scale_blue: Range::new(0.995, 1.005),
            blur_sigma: Range::new(0.0, 2.5),
            exposure_ev: Range::new(-1.0, 1.0),
            shot_noise_a: Range::new(0.0, 0.002),
            read_noise_b: Range::new(0.0, 0.0005),
            color_temp_kelvin: Range::new(3000.0, 9000.0),
        }
    }
}

impl EffectRanges {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("ca_scale_red", self.ca_scale_red),
            ("ca_scale_blue", self.ca_scale_blue),
            ("blur_sigma", self.blur_sigma),
            ("exposure_ev", self.exposure_ev),
            ("shot_noise_a", self.shot_noise_a),
            ("read_noise_b", self.read_noise_b),
            ("color_temp_kelvin", self.color_temp_kelvin),
        ];
        for (name, r) in fields {
            if !(r.min <= r.max && r.min.is_finite() && r.max.is_finite()) {
                return Err(format!(
                    "{name}: need finite min <= max, got [{}, {}]",
                    r.min, r.max
                ));
            }
        }
        let lo = CameraEffectParams {
            ca_scale_red: self.ca_scale_red.min,
            ca_scale_blue: self.ca_scale_blue.min,
            blur_sigma: self.blur_sigma.min,
            exposure_ev: self.exposure_ev.min,
            shot_noise_a: self.shot_noise_a.min,
            read_noise_b: self.read_noise_b.min,
            color_temp_kelvin: self.color_temp_kelvin.min,
        };
        let hi = CameraEffectParams {
            ca_scale_red: self.ca_scale_red.max,
            ca_scale_blue: self.ca_scale_blue.max,
            blur_sigma: self.blur_sigma.max,
            exposure_ev: self.exposure_ev.max,
            shot_noise_a: self.shot_noise_a.max,
            read_noise_b: self.read_noise_b.max,
            color_temp_kelvin: self.color_temp_kelvin.max,
        };
        lo.validate()?;
        hi.validate()
    }
}

/// Independent uniform draws per field, in declaration order.
pub fn sample_effect_params<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &EffectRanges,
) -> CameraEffectParams {
    CameraEffectParams {
        ca_scale_red: ranges.ca_scale_red.sample(rng),
        ca_scale_blue: ranges.ca_scale_blue.sample(rng),
        blur_sigma: ranges.blur_sigma.sample(rng),
        exposure_ev: ranges.exposure_ev.sample(rng),
        shot_noise_a: ranges.shot_noise_a.sample(rng),
        read_noise_b: ranges.read_noise_b.sample(rng),
        color_temp_kelvin: ranges.color_temp_kelvin.sample(rng),
    }
}
