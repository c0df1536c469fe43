//! Global monitoring objective over a polygon scene observed by PTZ sensors.
//!
//! Geometry is frozen at construction: every sensor/action visibility map and
//! the reference render of the initial scene are computed once. Scene values
//! may change between rounds; per-(sensor, action, region) reward tables are
//! recomputed lazily per scene version.

use std::sync::Mutex;

use crate::env::geometry::Polygon;
use crate::env::metrics::{info_change, info_entropy, quality};
use crate::env::reward::{reward_wij, InfoMetric, RewardConfig};
use crate::env::scene::SceneState;
use crate::env::sensor::SensorModel;
use crate::env::visibility::{build_visibility_map, render, VisibilityMap};
use crate::error::{Error, Result};
use crate::game::definition::GlobalObjective;
use crate::game::space::JointAction;

/// Per-sensor reward table for one action: `(region index, value)` pairs over
/// the regions the sensor actually sees. Exactly what a sensor broadcasts.
pub type WijTable = Vec<(usize, f64)>;

struct RewardTables {
    scene_version: u64,
    /// wij[sensor][action] — sparse over visible regions.
    wij: Vec<Vec<WijTable>>,
}

pub struct SceneObjective {
    sensors: Vec<SensorModel>,
    polygons: Vec<Polygon>,
    config: RewardConfig,
    scene: Mutex<SceneState>,
    /// maps[sensor][action], fixed geometry.
    maps: Vec<Vec<VisibilityMap>>,
    /// Initial-scene renders, the stored sample images: y0[sensor][action].
    reference: Vec<Vec<Vec<u8>>>,
    tables: Mutex<RewardTables>,
    deviation_bound: f64,
}

impl SceneObjective {
    pub fn new(
        sensors: Vec<SensorModel>,
        polygons: Vec<Polygon>,
        scene: SceneState,
        config: RewardConfig,
    ) -> Result<SceneObjective> {
        if sensors.is_empty() {
            return Err(Error::BadParameter("objective needs at least one sensor".into()));
        }
        if scene.cells() != polygons.len() {
            return Err(Error::BadParameter(format!(
                "scene has {} cells but the environment has {} regions",
                scene.cells(),
                polygons.len()
            )));
        }
        if !(config.scale.is_finite() && config.scale > 0.0) {
            return Err(Error::BadParameter(format!(
                "reward scale must be positive, got {}",
                config.scale
            )));
        }
        let mut maps = Vec::with_capacity(sensors.len());
        let mut reference = Vec::with_capacity(sensors.len());
        for sensor in &sensors {
            let mut per_action = Vec::with_capacity(sensor.action_count());
            let mut refs = Vec::with_capacity(sensor.action_count());
            for a in 0..sensor.action_count() {
                let map = build_visibility_map(sensor, a, &polygons);
                refs.push(render(&map, scene.initial()));
                per_action.push(map);
            }
            maps.push(per_action);
            reference.push(refs);
        }
        let deviation_bound = unilateral_welfare_bound(&sensors, &maps, &config);
        let objective = SceneObjective {
            sensors,
            polygons,
            config,
            scene: Mutex::new(scene),
            maps,
            reference,
            tables: Mutex::new(RewardTables {
                scene_version: u64::MAX,
                wij: Vec::new(),
            }),
            deviation_bound,
        };
        objective.refresh_tables();
        Ok(objective)
    }

    pub fn sensors(&self) -> &[SensorModel] {
        &self.sensors
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn config(&self) -> &RewardConfig {
        &self.config
    }

    /// Same objective at a different reward scale. Geometry, renders, and
    /// the cached raw reward tables all stay valid — only the combined
    /// region worth (and hence the deviation bound) scales.
    pub fn with_scale(mut self, scale: f64) -> SceneObjective {
        self.config.scale = scale;
        self.deviation_bound = unilateral_welfare_bound(&self.sensors, &self.maps, &self.config);
        self
    }

    /// Action-set size per sensor, in sensor order.
    pub fn action_counts(&self) -> Vec<usize> {
        self.sensors.iter().map(|s| s.action_count()).collect()
    }

    pub fn visibility(&self, sensor: usize, action: usize) -> Result<&VisibilityMap> {
        self.maps
            .get(sensor)
            .and_then(|per| per.get(action))
            .ok_or(Error::MissingSampleImage { sensor, action })
    }

    /// The stored initial-scene render for a pose.
    pub fn sample_image(&self, sensor: usize, action: usize) -> Result<&[u8]> {
        self.reference
            .get(sensor)
            .and_then(|per| per.get(action))
            .map(Vec::as_slice)
            .ok_or(Error::MissingSampleImage { sensor, action })
    }

    /// What the sensor would capture right now.
    pub fn render_current(&self, sensor: usize, action: usize) -> Result<Vec<u8>> {
        let map = self.visibility(sensor, action)?;
        let scene = self.scene.lock().unwrap();
        Ok(render(map, scene.current()))
    }

    /// Applies every scheduled scene change up to `round`. Returns true when
    /// values actually moved (reward tables will rebuild on next use).
    pub fn advance_scene(&self, round: u64) -> bool {
        self.scene.lock().unwrap().advance_to(round)
    }

    pub fn reset_scene(&self) {
        self.scene.lock().unwrap().reset();
    }

    pub fn scene_values(&self) -> Vec<u8> {
        self.scene.lock().unwrap().current().to_vec()
    }

    fn reward_for(&self, sensor: usize, action: usize, y: &[u8], region: usize) -> f64 {
        let map = &self.maps[sensor][action];
        let pixels = &map.pixel_sets[region];
        let visible = !pixels.is_empty();
        let info = if visible {
            match self.config.info {
                InfoMetric::ChangeCount => {
                    let y0 = &self.reference[sensor][action];
                    let current: Vec<u8> = pixels.iter().map(|&l| y[l]).collect();
                    let initial: Vec<u8> = pixels.iter().map(|&l| y0[l]).collect();
                    info_change(&current, &initial, self.config.change_threshold) as f64
                }
                InfoMetric::Entropy => {
                    let vals: Vec<u8> = pixels.iter().map(|&l| y[l]).collect();
                    info_entropy(&vals).expect("visible region has pixels")
                }
            }
        } else {
            0.0
        };
        let qual = quality(pixels.len(), self.sensors[sensor].intrinsics.pixel_count(), self.config.quality);
        reward_wij(info, qual, visible, self.config.variant).expect("metrics are non-negative")
    }

    /// Rebuilds the per-(sensor, action, region) reward tables against the
    /// current scene.
    fn refresh_tables(&self) {
        let scene = self.scene.lock().unwrap();
        let mut tables = self.tables.lock().unwrap();
        if tables.scene_version == scene.version() {
            return;
        }
        let mut wij = Vec::with_capacity(self.sensors.len());
        for (i, per_action) in self.maps.iter().enumerate() {
            let mut rows = Vec::with_capacity(per_action.len());
            for (a, map) in per_action.iter().enumerate() {
                let y = render(map, scene.current());
                let row: WijTable = map
                    .visible
                    .iter()
                    .map(|&j| (j, self.reward_for(i, a, &y, j)))
                    .collect();
                rows.push(row);
            }
            wij.push(rows);
        }
        tables.scene_version = scene.version();
        tables.wij = wij;
    }

    /// Broadcast tables for a joint action: per sensor, the `(region, value)`
    /// pairs it would announce to its neighbors.
    pub fn wij_tables(&self, action: &JointAction) -> Result<Vec<WijTable>> {
        if action.0.len() != self.sensors.len() {
            return Err(Error::BadParameter(format!(
                "joint action has {} entries for {} sensors",
                action.0.len(),
                self.sensors.len()
            )));
        }
        self.refresh_tables();
        let tables = self.tables.lock().unwrap();
        action
            .0
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                tables
                    .wij
                    .get(i)
                    .and_then(|rows| rows.get(a))
                    .cloned()
                    .ok_or(Error::MissingSampleImage { sensor: i, action: a })
            })
            .collect()
    }

    /// Welfare with a sensor optionally treated as contributing nothing.
    fn welfare_skipping(&self, action: &JointAction, skip: Option<usize>) -> f64 {
        assert_eq!(action.0.len(), self.sensors.len(), "joint action arity");
        self.refresh_tables();
        let tables = self.tables.lock().unwrap();
        let mut per_region: Vec<Vec<f64>> = vec![Vec::new(); self.polygons.len()];
        for (i, &a) in action.0.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            for &(j, w) in &tables.wij[i][a] {
                per_region[j].push(w);
            }
        }
        per_region.iter().map(|vals| self.config.region_value(vals)).sum()
    }
}

impl GlobalObjective for SceneObjective {
    fn value(&self, action: &JointAction) -> f64 {
        self.welfare_skipping(action, None)
    }

    fn value_without(&self, player: usize, action: &JointAction) -> f64 {
        self.welfare_skipping(action, Some(player))
    }

    fn deviation_bound(&self) -> Option<f64> {
        Some(self.deviation_bound)
    }
}

/// Upper bound on the welfare change any single sensor can cause by switching
/// actions, valid for every reachable scene. Information is bounded by pixel
/// membership counts (change detection) or the 8-bit histogram ceiling
/// (entropy); quality is scene-independent and exact.
fn unilateral_welfare_bound(
    sensors: &[SensorModel],
    maps: &[Vec<VisibilityMap>],
    config: &RewardConfig,
) -> f64 {
    use crate::env::reward::RegionRule;
    let mut worst = 0.0f64;
    for (i, per_action) in maps.iter().enumerate() {
        let total_pixels = sensors[i].intrinsics.pixel_count();
        let mut sensor_worst = 0.0f64;
        for map in per_action {
            let mut sum = 0.0;
            for &j in &map.visible {
                let pixels = map.pixel_sets[j].len();
                let info_cap = match config.info {
                    InfoMetric::ChangeCount => pixels as f64,
                    InfoMetric::Entropy => (pixels as f64).log2().min(8.0),
                };
                let qual = quality(pixels, total_pixels, config.quality);
                let wij_cap =
                    reward_wij(info_cap, qual, true, config.variant).expect("caps non-negative");
                // A region's worth moves by at most the rule applied to the
                // one changed entry: exact for max, subadditivity for the
                // concave sum (h(s+w) − h(s) ≤ h(w)).
                sum += match config.rule {
                    RegionRule::Max => wij_cap,
                    RegionRule::ConcaveSum { h } => h.apply(wij_cap),
                };
            }
            sensor_worst = sensor_worst.max(sum);
        }
        // Leaving one view and entering another can lose and gain a full
        // per-action budget each.
        worst = worst.max(2.0 * sensor_worst);
    }
    config.scale * worst
}
