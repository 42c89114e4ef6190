//! Externally supplied object poses that replace arrangement for listed frames.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use slb_core::pose::from_row_major;
use slb_core::Pose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectedPose {
    pub mesh: String,
    /// Camera-from-object transform, row-major 4×4.
    pub pose: [f64; 16],
}

/// `{"frames": {"<index>": [{"mesh": ..., "pose": [...]}, ...]}}`
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseTable {
    pub frames: BTreeMap<u64, Vec<InjectedPose>>,
}

impl PoseTable {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let table: Self =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        for (index, list) in &table.frames {
            for (k, p) in list.iter().enumerate() {
                check_matrix(&p.pose)
                    .map_err(|m| format!("{}: frames.{index}[{k}].pose: {m}", path.display()))?;
            }
        }
        Ok(table)
    }

    pub fn get(&self, index: u64) -> Option<&[InjectedPose]> {
        self.frames.get(&index).map(Vec::as_slice)
    }
}

fn check_matrix(m: &[f64; 16]) -> Result<(), String> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err("non-finite entry".into());
    }
    if m[12..] != [0.0, 0.0, 0.0, 1.0] {
        return Err("last row must be 0 0 0 1".into());
    }
    let r = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
    let err = (r.transpose() * r - Matrix3::identity()).amax();
    if err > 1e-6 || (r.determinant() - 1.0).abs() > 1e-6 {
        return Err("rotation block is not a proper rotation".into());
    }
    Ok(())
}

impl InjectedPose {
    pub fn pose(&self) -> Pose {
        from_row_major(&self.pose)
    }
}
