use serde::{Deserialize, Serialize};

/// Simulation and spawning parameters. Units: m, s, kg, N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrangementParams {
    pub gravity_magnitude: f64,
    pub attractor_force: f64,
    pub time_step: f64,
    pub max_steps: usize,
    pub settle_linear_threshold: f64,
    pub settle_angular_threshold: f64,
    pub settle_hold_steps: usize,
    pub friction: f64,
    pub restitution: f64,
    /// Rolling resistance lever arm (m): contact torque is at most this times the normal force.
    pub rolling_resistance: f64,
    /// Penetration tolerated before positional correction kicks in.
    pub slop: f64,
    pub baumgarte: f64,
    pub solver_iterations: usize,
    /// Contacts are generated this far ahead of touching.
    pub contact_margin: f64,
    pub spawn_radius: f64,
    pub spawn_height: (f64, f64),
    pub spawn_stagger: f64,
}

impl Default for ArrangementParams {
    fn default() -> Self {
        Self {
            gravity_magnitude: 9.81,
            attractor_force: 1.0,
            time_step: 1.0 / 250.0,
            max_steps: 2500,
            settle_linear_threshold: 0.01,
            settle_angular_threshold: 0.1,
            settle_hold_steps: 25,
            friction: 0.6,
            restitution: 0.1,
            rolling_resistance: 0.002,
            slop: 0.001,
            baumgarte: 0.2,
            solver_iterations: 20,
            contact_margin: 0.01,
            spawn_radius: 0.25,
            spawn_height: (0.1, 0.5),
            spawn_stagger: 0.25,
        }
    }
}

impl ArrangementParams {
    /// Returns a description of the first invalid field.
    pub fn validate(&self) -> Result<(), String> {
        let non_negative = [
            ("gravity_magnitude", self.gravity_magnitude),
            ("attractor_force", self.attractor_force),
            ("friction", self.friction),
            ("rolling_resistance", self.rolling_resistance),
            ("slop", self.slop),
            ("baumgarte", self.baumgarte),
            ("contact_margin", self.contact_margin),
            ("spawn_radius", self.spawn_radius),
            ("spawn_stagger", self.spawn_stagger),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        let positive = [
            ("time_step", self.time_step),
            ("settle_linear_threshold", self.settle_linear_threshold),
            ("settle_angular_threshold", self.settle_angular_threshold),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return Err(format!(
                "restitution must be in [0, 1], got {}",
                self.restitution
            ));
        }
        if self.max_steps == 0 || self.settle_hold_steps == 0 || self.solver_iterations == 0 {
            return Err("max_steps, settle_hold_steps and solver_iterations must be > 0".into());
        }
        let (lo, hi) = self.spawn_height;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
            return Err(format!(
                "spawn_height must satisfy 0 <= min <= max, got ({lo}, {hi})"
            ));
        }
        Ok(())
    }
}
