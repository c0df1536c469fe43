//! Physical side of the problem: polygonal environment, PTZ camera geometry,
//! visibility, synthetic scenes, and the reward pipeline that turns captured
//! pixels into the global objective the game layer optimizes.

pub mod geometry;
pub mod metrics;
pub mod objective;
pub mod pgm;
pub mod reward;
pub mod scene;
pub mod sensor;
pub mod visibility;

pub use geometry::{floor_grid, HalfSpace, Plane, Polygon};
pub use metrics::{info_change, info_entropy, quality, QualityShape};
pub use objective::{SceneObjective, WijTable};
pub use reward::{reward_wij, ConcaveFn, InfoMetric, RegionRule, RewardConfig, RewardVariant};
pub use scene::{ChangeEvent, SceneState};
pub use sensor::{CameraIntrinsics, PtzPose, SensorModel};
pub use visibility::{build_visibility_map, render, VisibilityMap};
