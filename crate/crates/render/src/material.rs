use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShadingMode {
    Phong,
    CookTorrance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    metalness: f32,
    roughness: f32,
    pub mode: ShadingMode,
}

impl MaterialParams {
    pub fn new(metalness: f32, roughness: f32, mode: ShadingMode) -> Result<Self, String> {
        if !(0.0..=1.0).contains(&metalness) || !(0.0..=1.0).contains(&roughness) {
            return Err(format!(
                "metalness and roughness must lie in [0, 1], got {metalness}, {roughness}"
            ));
        }
        Ok(Self {
            metalness,
            roughness,
            mode,
        })
    }

    pub fn phong() -> Self {
        Self {
            metalness: 0.0,
            roughness: 0.5,
            mode: ShadingMode::Phong,
        }
    }

    /// Metalness from `U[0, 1]`, roughness from `U[roughness_min, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, roughness_min: f32) -> Self {
        let metalness = rng.random::<f32>();
        let roughness = roughness_min + (1.0 - roughness_min) * rng.random::<f32>();
        Self {
            metalness,
            roughness: roughness.clamp(0.0, 1.0),
            mode: ShadingMode::CookTorrance,
        }
    }

    pub fn metalness(&self) -> f32 {
        self.metalness
    }

    pub fn roughness(&self) -> f32 {
        self.roughness
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::phong()
    }
}
