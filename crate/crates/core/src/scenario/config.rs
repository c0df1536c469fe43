//! Scenario files: TOML schema, collected validation, and compilation into
//! the runtime rig (polygons, sensors, scene, comm graph, action space).

use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::comms::{comm_graph_for, CommGraph};
use crate::env::geometry::floor_grid;
use crate::env::metrics::QualityShape;
use crate::env::objective::SceneObjective;
use crate::env::reward::{InfoMetric, RegionRule, RewardConfig, RewardVariant};
use crate::env::scene::{ChangeEvent, SceneState};
use crate::env::sensor::{CameraIntrinsics, PtzPose, SensorModel};
use crate::error::{Error, Result};
use crate::game::definition::{
    GameDefinition, GlobalObjective, JOINT_ENUMERATION_LIMIT, SCALING_MARGIN,
};
use crate::game::ActionSpace;
use crate::learner::{kappa_bounds, EpsilonMode, LearnerParams};

/// Angle comparisons on the step rule tolerate this much float noise, so a
/// config written as `pan_step_degrees = 5.0` reaches a neighbor at 5.0°.
const STEP_SLACK_DEG: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub environment: EnvironmentSection,
    pub sensors: Vec<SensorSection>,
    #[serde(default)]
    pub reward: RewardSection,
    pub learner: LearnerSection,
    #[serde(default)]
    pub events: Vec<EventSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    /// Cells along x and y; the environment is a flat grid of squares.
    pub grid: [usize; 2],
    pub cell_size: f64,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default)]
    pub height: f64,
    /// Initial grayscale per cell, row-major, one entry per cell.
    pub initial_values: Vec<u8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub position: [f64; 3],
    /// Available pan angles, degrees. The action set is the cartesian
    /// product pans × tilts × focal lengths, in that index order.
    pub pan_degrees: Vec<f64>,
    pub tilt_degrees: Vec<f64>,
    pub focal_lengths_mm: Vec<f64>,
    /// One round may move pan/tilt at most this far (degrees); zoom is
    /// unrestricted unless `zoom_free = false`.
    #[serde(default = "default_step")]
    pub pan_step_degrees: f64,
    #[serde(default = "default_step")]
    pub tilt_step_degrees: f64,
    #[serde(default = "default_true")]
    pub zoom_free: bool,
    /// Image size as [cols, rows].
    pub pixels: [usize; 2],
    pub sensor_width_mm: f64,
}

fn default_step() -> f64 {
    5.0
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSection {
    pub info: InfoMetric,
    pub change_threshold: u8,
    pub quality: QualityShape,
    pub variant: RewardVariant,
    pub rule: RegionRule,
}

impl Default for RewardSection {
    fn default() -> RewardSection {
        let d = RewardConfig::default();
        RewardSection {
            info: d.info,
            change_threshold: d.change_threshold,
            quality: d.quality,
            variant: d.variant,
            rule: d.rule,
        }
    }
}

impl RewardSection {
    /// Unscaled reward config; the Assumption-3 factor is applied at
    /// compile time, never written in the file.
    pub fn to_config(&self) -> RewardConfig {
        RewardConfig {
            info: self.info,
            change_threshold: self.change_threshold,
            quality: self.quality,
            variant: self.variant,
            rule: self.rule,
            scale: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerMode {
    /// Fixed exploration rate (requires `epsilon`).
    Constant,
    /// Diminishing schedule derived from the sensor count and the largest
    /// constraint-graph diameter.
    Schedule,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub mode: LearnerMode,
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub kappa: f64,
    pub rounds: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    pub round: u64,
    /// `[cell, value]` pairs applied at the round boundary.
    pub overrides: Vec<(usize, u8)>,
}

impl ScenarioConfig {
    /// Every problem found, in file order; empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let env = &self.environment;
        let cells = env.grid[0] * env.grid[1];
        if env.grid[0] == 0 || env.grid[1] == 0 {
            out.push(format!(
                "environment: grid must have positive extent, got {}x{}",
                env.grid[0], env.grid[1]
            ));
        }
        if !(env.cell_size.is_finite() && env.cell_size > 0.0) {
            out.push(format!(
                "environment: cell_size must be positive, got {}",
                env.cell_size
            ));
        }
        if cells > 0 && env.initial_values.len() != cells {
            out.push(format!(
                "environment: {} initial values for {} cells",
                env.initial_values.len(),
                cells
            ));
        }
        if self.sensors.is_empty() {
            out.push("sensors: at least one sensor required".into());
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if s.pan_degrees.is_empty() {
                out.push(format!("sensor {i}: empty pan set"));
            }
            if s.tilt_degrees.is_empty() {
                out.push(format!("sensor {i}: empty tilt set"));
            }
            if s.focal_lengths_mm.is_empty() {
                out.push(format!("sensor {i}: empty focal-length set"));
            }
            for &f in &s.focal_lengths_mm {
                if !(f.is_finite() && f > 0.0) {
                    out.push(format!("sensor {i}: focal length {f} mm"));
                }
            }
            if s.pixels[0] == 0 || s.pixels[1] == 0 {
                out.push(format!(
                    "sensor {i}: image must have pixels, got {}x{}",
                    s.pixels[0], s.pixels[1]
                ));
            }
            if !(s.sensor_width_mm.is_finite() && s.sensor_width_mm > 0.0) {
                out.push(format!(
                    "sensor {i}: sensor width {} mm",
                    s.sensor_width_mm
                ));
            }
            if !(s.pan_step_degrees.is_finite() && s.pan_step_degrees >= 0.0) {
                out.push(format!("sensor {i}: pan step {}", s.pan_step_degrees));
            }
            if !(s.tilt_step_degrees.is_finite() && s.tilt_step_degrees >= 0.0) {
                out.push(format!("sensor {i}: tilt step {}", s.tilt_step_degrees));
            }
            if s.position.iter().any(|v| !v.is_finite()) {
                out.push(format!("sensor {i}: position {:?}", s.position));
            }
            for (list, what) in [
                (&s.pan_degrees, "pan"),
                (&s.tilt_degrees, "tilt"),
                (&s.focal_lengths_mm, "focal-length"),
            ] {
                if !list.iter().all(|v| v.is_finite()) {
                    out.push(format!("sensor {i}: non-finite {what} value"));
                }
                let mut sorted = list.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    out.push(format!("sensor {i}: duplicate {what} value"));
                }
            }
        }
        // Constraint-rule structure is only meaningful once the per-sensor
        // lists are sane.
        if out.is_empty() {
            let space = self.action_space();
            for v in space.validate() {
                out.push(format!("action space: {v}"));
            }
            let l = &self.learner;
            match l.mode {
                LearnerMode::Constant => match l.epsilon {
                    None => out.push("learner: constant mode requires epsilon".into()),
                    Some(e) if !(e > 0.0 && e <= 0.5) => {
                        out.push(format!("learner: epsilon must lie in (0, 0.5], got {e}"))
                    }
                    _ => {}
                },
                LearnerMode::Schedule => {
                    if l.epsilon.is_some() {
                        out.push("learner: epsilon is only for constant mode".into());
                    }
                    match kappa_bounds(&space) {
                        Ok(b) if !b.contains(l.kappa) => out.push(format!(
                            "learner: kappa {} outside the admissible interval ({:.6}, {}] \
                             for the largest constraint set",
                            l.kappa, b.lower_exclusive, b.upper_inclusive
                        )),
                        Ok(_) => {}
                        Err(e) => out.push(format!("learner: {e}")),
                    }
                }
            }
            if !(0.0..=0.5).contains(&l.kappa) {
                out.push(format!("learner: kappa must lie in [0, 0.5], got {}", l.kappa));
            }
            if l.rounds < 2 {
                out.push(format!(
                    "learner: a run needs at least the 2 seeding rounds, got {}",
                    l.rounds
                ));
            }
        }
        for (k, e) in self.events.iter().enumerate() {
            // Rounds 0 and 1 are the memory-seeding pair evaluated once
            // against the initial scene; the earliest round an event can
            // influence is 2.
            if e.round < 2 {
                out.push(format!(
                    "event {k}: round {} precedes the first post-seed evaluation (round 2)",
                    e.round
                ));
            }
            for &(cell, _) in &e.overrides {
                if cell >= cells {
                    out.push(format!("event {k}: cell {cell} outside 0..{cells}"));
                }
            }
            if e.overrides.is_empty() {
                out.push(format!("event {k}: no overrides"));
            }
        }
        out
    }

    /// Action sets from the pan/tilt/zoom step rule: actions are pose
    /// triples, reachable when pan and tilt each move within their step
    /// and zoom is free (or unchanged).
    pub fn action_space(&self) -> ActionSpace {
        let constraints = self
            .sensors
            .iter()
            .map(|s| {
                let poses = s.pose_grid();
                poses
                    .iter()
                    .map(|&(p, t, z)| {
                        poses
                            .iter()
                            .enumerate()
                            .filter(|&(_, &(p2, t2, z2))| {
                                (s.pan_degrees[p2] - s.pan_degrees[p]).abs()
                                    <= s.pan_step_degrees + STEP_SLACK_DEG
                                    && (s.tilt_degrees[t2] - s.tilt_degrees[t]).abs()
                                        <= s.tilt_step_degrees + STEP_SLACK_DEG
                                    && (s.zoom_free || z2 == z)
                            })
                            .map(|(b, _)| b)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ActionSpace::new(constraints)
    }

    /// Content digest over the canonical (whitespace-free) serialization,
    /// so formatting changes in the file do not change the hash.
    pub fn digest(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl SensorSection {
    /// Pose index triples in action order (pan-major, then tilt, then zoom).
    fn pose_grid(&self) -> Vec<(usize, usize, usize)> {
        let mut out =
            Vec::with_capacity(self.pan_degrees.len() * self.tilt_degrees.len() * self.focal_lengths_mm.len());
        for p in 0..self.pan_degrees.len() {
            for t in 0..self.tilt_degrees.len() {
                for z in 0..self.focal_lengths_mm.len() {
                    out.push((p, t, z));
                }
            }
        }
        out
    }

    fn poses(&self) -> Vec<PtzPose> {
        self.pose_grid()
            .into_iter()
            .map(|(p, t, z)| PtzPose {
                pan: self.pan_degrees[p].to_radians(),
                tilt: self.tilt_degrees[t].to_radians(),
                focal_mm: self.focal_lengths_mm[z],
            })
            .collect()
    }
}

/// Parses and fully validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::Config(vec![format!("parse: {e}")]))?;
    let violations = config.violations();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(violations))
    }
}

/// A validated scenario compiled into runtime objects and rescaled so no
/// unilateral deviation exceeds the 1/2 ceiling.
pub struct CompiledScenario {
    pub config: ScenarioConfig,
    pub space: ActionSpace,
    pub objective: Arc<SceneObjective>,
    pub graph: CommGraph,
    pub params: LearnerParams,
    pub rounds: u64,
    pub seed: u64,
    /// Assumption-3 factor baked into the objective's reward config.
    pub scale: f64,
    pub digest: String,
}

impl CompiledScenario {
    /// The scenario as an abstract game (utilities = marginal contributions
    /// of the scaled objective).
    pub fn game(&self) -> GameDefinition {
        GameDefinition::from_objective(self.space.clone(), self.objective.clone())
    }
}

pub fn compile(config: ScenarioConfig) -> Result<CompiledScenario> {
    let violations = config.violations();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    let env = &config.environment;
    let polygons = floor_grid(
        env.center[0],
        env.center[1],
        env.grid[0],
        env.grid[1],
        env.cell_size,
        env.height,
    )?;
    let sensors = config
        .sensors
        .iter()
        .enumerate()
        .map(|(i, s)| {
            SensorModel::new(
                i,
                Vector3::new(s.position[0], s.position[1], s.position[2]),
                CameraIntrinsics {
                    cols: s.pixels[0],
                    rows: s.pixels[1],
                    sensor_width_mm: s.sensor_width_mm,
                },
                s.poses(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let events = config
        .events
        .iter()
        .map(|e| ChangeEvent {
            round: e.round,
            overrides: e.overrides.clone(),
        })
        .collect();
    let scene = SceneState::new(env.initial_values.clone(), events)?;
    let space = config.action_space();
    let objective = SceneObjective::new(sensors, polygons, scene, config.reward.to_config())?;

    // Deviation ceiling must hold in *every* regime the run visits, not
    // just the initial scene — change events can grow rewards by orders of
    // magnitude. Sweep each inter-event scene when the joint space is small
    // enough; the per-sensor bound is scene-independent and covers all.
    let objective = Arc::new(objective);
    let ceiling = 0.5 - SCALING_MARGIN;
    let size = space.joint_count().unwrap_or(u128::MAX);
    let worst = if size <= JOINT_ENUMERATION_LIMIT {
        let def = GameDefinition::from_objective(space.clone(), objective.clone());
        let mut boundaries: Vec<u64> = vec![0];
        boundaries.extend(
            config
                .events
                .iter()
                .map(|e| e.round)
                .filter(|&r| r < config.learner.rounds),
        );
        boundaries.sort_unstable();
        boundaries.dedup();
        objective.reset_scene();
        let mut worst = 0.0f64;
        for b in boundaries {
            objective.advance_scene(b);
            worst = worst.max(def.max_unilateral_deviation()?);
        }
        objective.reset_scene();
        drop(def);
        worst
    } else {
        objective.deviation_bound().expect("scene objective always bounds")
    };
    let scale = if worst <= ceiling { 1.0 } else { ceiling / worst };
    let objective = if scale == 1.0 {
        objective
    } else {
        Arc::new(
            Arc::try_unwrap(objective)
                .unwrap_or_else(|_| unreachable!("no other owner yet"))
                .with_scale(scale),
        )
    };

    let graph = comm_graph_for(&objective);
    let params = LearnerParams {
        mode: match config.learner.mode {
            LearnerMode::Constant => {
                EpsilonMode::Constant(config.learner.epsilon.expect("validated"))
            }
            LearnerMode::Schedule => EpsilonMode::Schedule {
                players: space.players(),
                diameter: space.diameters()?.0,
            },
        },
        kappa: config.learner.kappa,
    };
    let digest = config.digest();
    Ok(CompiledScenario {
        rounds: config.learner.rounds,
        seed: config.learner.seed,
        config,
        space,
        objective,
        graph,
        params,
        scale,
        digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_toml() -> String {
        r#"
[environment]
grid = [2, 2]
cell_size = 0.8
initial_values = [100, 100, 100, 100]

[[sensors]]
position = [0.0, 0.0, 2.0]
pan_degrees = [-10.0, -5.0, 0.0, 5.0, 10.0]
tilt_degrees = [20.0]
focal_lengths_mm = [4.0]
pan_step_degrees = 10.0
pixels = [16, 12]
sensor_width_mm = 4.8

[reward]
variant = { floored = { gamma = 0.015 } }

[learner]
mode = "constant"
epsilon = 0.015
kappa = 0.12
rounds = 50
seed = 9

[[events]]
round = 10
overrides = [[3, 200]]
"#
        .to_string()
    }

    #[test]
    fn tiny_config_parses_and_compiles() {
        let config = parse_config(&tiny_toml()).unwrap();
        assert_eq!(config.environment.grid, [2, 2]);
        let compiled = compile(config).unwrap();
        assert_eq!(compiled.space.players(), 1);
        // ±10° on a 5° lattice: ends reach two neighbors, the middle all.
        assert_eq!(compiled.space.action_count(0), 5);
        assert_eq!(compiled.space.constraint_set(0, 0), &[0, 1, 2]);
        assert_eq!(compiled.space.constraint_set(0, 2), &[0, 1, 2, 3, 4]);
        assert!(compiled.scale <= 1.0);
        assert_eq!(compiled.digest.len(), 64);
    }

    #[test]
    fn violations_are_collected_not_first_only() {
        let mut config = parse_config(&tiny_toml()).unwrap();
        config.environment.initial_values.pop();
        config.learner.kappa = 0.6;
        config.events[0].overrides[0].0 = 99;
        let violations = config.violations();
        assert!(violations.len() >= 3, "got {violations:?}");
        assert!(violations.iter().any(|v| v.contains("initial values")));
        assert!(violations.iter().any(|v| v.contains("kappa")));
        assert!(violations.iter().any(|v| v.contains("cell 99")));
    }

    #[test]
    fn oversized_kappa_error_cites_the_interval() {
        let mut config = parse_config(&tiny_toml()).unwrap();
        config.learner.mode = LearnerMode::Schedule;
        config.learner.epsilon = None;
        config.learner.kappa = 0.6;
        let violations = config.violations();
        let hit = violations
            .iter()
            .find(|v| v.contains("admissible interval"))
            .expect("kappa violation");
        assert!(hit.contains("0.5]"), "{hit}");
    }

    #[test]
    fn frozen_zoom_disconnects_the_constraint_graph() {
        let mut config = parse_config(&tiny_toml()).unwrap();
        config.sensors[0].focal_lengths_mm = vec![4.0, 8.0];
        config.sensors[0].zoom_free = false;
        let violations = config.violations();
        assert!(
            violations.iter().any(|v| v.contains("disconnected")),
            "{violations:?}"
        );
    }

    #[test]
    fn schedule_mode_rejects_kappa_below_the_admissible_interval() {
        let mut config = parse_config(&tiny_toml()).unwrap();
        config.learner.mode = LearnerMode::Schedule;
        config.learner.epsilon = None;
        // Largest constraint set is 5 (middle pan): interval is (1/4, 1/2].
        config.learner.kappa = 0.12;
        let violations = config.violations();
        assert!(
            violations.iter().any(|v| v.contains("admissible interval")),
            "{violations:?}"
        );
    }

    #[test]
    fn digest_ignores_formatting_but_not_content() {
        let a = parse_config(&tiny_toml()).unwrap();
        let spaced = tiny_toml().replace("epsilon = 0.015", "epsilon   =   0.015");
        let b = parse_config(&spaced).unwrap();
        assert_eq!(a.digest(), b.digest());
        let mut c = parse_config(&tiny_toml()).unwrap();
        c.learner.seed = 10;
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn unknown_fields_are_parse_errors() {
        let bad = tiny_toml().replace("cell_size", "cell_sizes");
        match parse_config(&bad) {
            Err(Error::Config(v)) => assert!(v[0].contains("parse"), "{v:?}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
