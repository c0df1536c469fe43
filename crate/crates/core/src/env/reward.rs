//! Reward hierarchy: per-sensor-per-region values, region aggregation, and
//! the summed global objective.

use serde::{Deserialize, Serialize};

use crate::env::metrics::QualityShape;
use crate::error::{Error, Result};

/// Which information measure feeds the per-region reward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMetric {
    /// Count of pixels deviating from the stored reference past a threshold.
    ChangeCount,
    /// Histogram entropy of the captured pixels, in bits.
    Entropy,
}

/// Per-sensor-per-region reward shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardVariant {
    /// Information times quality.
    Product,
    /// Doubled information with a small floor for merely-visible regions;
    /// quality is ignored. The floor keeps coverage worth something even
    /// when nothing has changed.
    Floored { gamma: f64 },
}

/// Per-sensor reward for one region. `visible` is whether any pixel of the
/// sensor lands on the region; invisible regions are worth nothing.
pub fn reward_wij(info: f64, qual: f64, visible: bool, variant: RewardVariant) -> Result<f64> {
    if info < 0.0 || qual < 0.0 {
        return Err(Error::NegativeReward { info, qual });
    }
    if !visible {
        return Ok(0.0);
    }
    Ok(match variant {
        RewardVariant::Product => info * qual,
        RewardVariant::Floored { gamma } => {
            if 2.0 * info > gamma {
                2.0 * info
            } else {
                gamma
            }
        }
    })
}

/// Increasing concave map with h(0) = 0, used by the summing region rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcaveFn {
    Sqrt,
    Log1p,
}

impl ConcaveFn {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ConcaveFn::Sqrt => x.sqrt(),
            ConcaveFn::Log1p => x.ln_1p(),
        }
    }
}

/// How per-sensor values on one region combine into the region's worth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegionRule {
    /// Only the best observer counts; duplicated views add nothing.
    Max,
    /// Diminishing returns on the summed values.
    ConcaveSum { h: ConcaveFn },
}

impl RegionRule {
    /// Region worth before global scaling. Empty input means no sensor
    /// captures the region: worth 0 under both rules.
    pub fn combine(self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        match self {
            RegionRule::Max => values.iter().copied().fold(0.0, f64::max),
            RegionRule::ConcaveSum { h } => h.apply(values.iter().sum()),
        }
    }
}

/// Full reward configuration for a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub info: InfoMetric,
    /// Strict per-pixel deviation threshold for the change-count metric.
    pub change_threshold: u8,
    pub quality: QualityShape,
    pub variant: RewardVariant,
    pub rule: RegionRule,
    /// Uniform factor applied to every region's worth; used to shrink
    /// utility swings below the hard 1/2 bound. Identity by default.
    pub scale: f64,
}

impl RewardConfig {
    /// Scaled worth of one region given the capturing sensors' values.
    /// The scale multiplies the combined worth (not the inputs), so
    /// message-passing on raw per-sensor values reproduces it exactly even
    /// for non-homogeneous combine rules.
    pub fn region_value(&self, values: &[f64]) -> f64 {
        self.scale * self.rule.combine(values)
    }

    pub fn with_scale(mut self, scale: f64) -> RewardConfig {
        self.scale = scale;
        self
    }
}

impl Default for RewardConfig {
    fn default() -> RewardConfig {
        RewardConfig {
            info: InfoMetric::ChangeCount,
            change_threshold: 20,
            quality: QualityShape::Identity,
            variant: RewardVariant::Product,
            rule: RegionRule::Max,
            scale: 1.0,
        }
    }
}
