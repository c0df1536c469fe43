//! Neighbor discovery and message-based utility computation.
//!
//! Sensors never read each other's state; everything a sensor learns about
//! the rest of the network arrives as explicit per-round messages listing
//! `(region, value)` pairs. Summing region-worth differences over its own
//! visible regions reproduces the centralized marginal utility exactly,
//! because regions nobody shares with the sensor cancel term by term.

use std::collections::BTreeMap;
use std::io::Write;

use crate::env::objective::{SceneObjective, WijTable};
use crate::env::reward::RewardConfig;
use crate::error::{Error, Result};

/// Undirected sensor adjacency: who must hear whom every round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommGraph {
    neighbors: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn new(players: usize, edges: &[(usize, usize)]) -> Result<CommGraph> {
        let mut neighbors = vec![Vec::new(); players];
        for &(i, j) in edges {
            if i >= players || j >= players {
                return Err(Error::BadParameter(format!(
                    "edge ({i}, {j}) outside the {players}-sensor network"
                )));
            }
            if i == j {
                return Err(Error::BadParameter(format!("self-loop on sensor {i}")));
            }
            if !neighbors[i].contains(&j) {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(CommGraph { neighbors })
    }

    pub fn players(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Edge list with i < j.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, list) in self.neighbors.iter().enumerate() {
            for &j in list {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Builds the graph from per-(sensor, action) visible-region sets: an edge
/// joins two sensors iff some pair of their actions shares a region.
///
/// Action choices are independent across sensors, so the pair condition
/// factorizes through each sensor's union of visible regions over actions.
pub fn build_comm_graph(visible: &[Vec<Vec<usize>>]) -> CommGraph {
    let ever: Vec<std::collections::BTreeSet<usize>> = visible
        .iter()
        .map(|per_action| per_action.iter().flatten().copied().collect())
        .collect();
    let mut edges = Vec::new();
    for i in 0..ever.len() {
        for j in i + 1..ever.len() {
            if ever[i].intersection(&ever[j]).next().is_some() {
                edges.push((i, j));
            }
        }
    }
    CommGraph::new(ever.len(), &edges).expect("generated edges are valid")
}

/// Graph for a concrete scene objective, sweeping every pose of every sensor.
pub fn comm_graph_for(objective: &SceneObjective) -> CommGraph {
    let visible: Vec<Vec<Vec<usize>>> = (0..objective.sensors().len())
        .map(|i| {
            (0..objective.sensors()[i].action_count())
                .map(|a| objective.visibility(i, a).expect("pose exists").visible.clone())
                .collect()
        })
        .collect();
    build_comm_graph(&visible)
}

/// One sensor's per-round broadcast: its reward on every region it sees.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityMessage {
    pub sender: usize,
    pub entries: WijTable,
}

/// Utility of sensor `i` from its own table plus neighbor messages.
///
/// For each region the sensor sees, the region's worth is compared with the
/// worth it would have if the sensor contributed nothing; the differences
/// sum to the sensor's marginal contribution to the global objective.
pub fn local_utility(
    i: usize,
    own: &WijTable,
    messages: &[UtilityMessage],
    neighbors: &[usize],
    config: &RewardConfig,
) -> Result<f64> {
    let mut tables: BTreeMap<usize, &WijTable> = BTreeMap::new();
    for m in messages {
        if m.sender == i || !neighbors.contains(&m.sender) {
            return Err(Error::BadParameter(format!(
                "sensor {i} got a message from {} which is not a neighbor",
                m.sender
            )));
        }
        if tables.insert(m.sender, &m.entries).is_some() {
            let count = messages.iter().filter(|n| n.sender == m.sender).count();
            return Err(Error::DuplicateMessage {
                sensor: i,
                neighbor: m.sender,
                count,
            });
        }
    }
    for &n in neighbors {
        if !tables.contains_key(&n) {
            return Err(Error::MissingMessage { sensor: i, neighbor: n });
        }
    }
    let lookup = |table: &WijTable, j: usize| -> Option<f64> {
        table.iter().find(|&&(jj, _)| jj == j).map(|&(_, w)| w)
    };
    let mut utility = 0.0;
    for &(j, w_own) in own {
        // Assemble contributions in sensor-id order so the arithmetic
        // matches the centralized evaluation bit for bit where possible.
        let mut with_me = Vec::with_capacity(tables.len() + 1);
        let mut without_me = Vec::with_capacity(tables.len());
        let mut inserted = false;
        for (&sender, table) in &tables {
            if !inserted && sender > i {
                with_me.push(w_own);
                inserted = true;
            }
            if let Some(w) = lookup(table, j) {
                with_me.push(w);
                without_me.push(w);
            }
        }
        if !inserted {
            with_me.push(w_own);
        }
        utility += config.region_value(&with_me) - config.region_value(&without_me);
    }
    Ok(utility)
}

/// One synchronous round: every sensor broadcasts its table to its neighbors,
/// then computes its utility from what it heard.
pub fn round_exchange(
    tables: &[WijTable],
    graph: &CommGraph,
    config: &RewardConfig,
) -> Result<Vec<f64>> {
    if tables.len() != graph.players() {
        return Err(Error::BadParameter(format!(
            "{} tables for a {}-sensor graph",
            tables.len(),
            graph.players()
        )));
    }
    (0..tables.len())
        .map(|i| {
            let inbox: Vec<UtilityMessage> = graph
                .neighbors(i)
                .iter()
                .map(|&n| UtilityMessage {
                    sender: n,
                    entries: tables[n].clone(),
                })
                .collect();
            local_utility(i, &tables[i], &inbox, graph.neighbors(i), config)
        })
        .collect()
}

/// Audit log of every message of one round, one CSV row per table entry:
/// `round,sender,receiver,region,w`.
pub fn write_message_log<W: Write>(
    mut out: W,
    round: u64,
    graph: &CommGraph,
    tables: &[WijTable],
) -> Result<()> {
    for i in 0..graph.players() {
        for &receiver in graph.neighbors(i) {
            for &(j, w) in &tables[i] {
                writeln!(out, "{round},{i},{receiver},{j},{w:.11e}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::Vector3;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::env::geometry::floor_grid;
    use crate::env::metrics::QualityShape;
    use crate::env::reward::{ConcaveFn, InfoMetric, RegionRule, RewardVariant};
    use crate::env::scene::{ChangeEvent, SceneState};
    use crate::env::sensor::{CameraIntrinsics, PtzPose, SensorModel};
    use crate::game::definition::{marginal_utility, random_joint};

    #[test]
    fn graph_shapes_from_visible_sets() {
        // Chain overlap: 0-1 share region 1, 1-2 share region 2, 0-2 nothing.
        let path = build_comm_graph(&[
            vec![vec![0], vec![1]],
            vec![vec![1, 2]],
            vec![vec![2], vec![3]],
        ]);
        assert_eq!(path.edges(), vec![(0, 1), (1, 2)]);
        assert!(!path.has_edge(0, 2));
        // Everyone can see region 7 under some action: complete.
        let complete = build_comm_graph(&[
            vec![vec![], vec![7]],
            vec![vec![7]],
            vec![vec![9], vec![7, 9]],
        ]);
        assert_eq!(complete.edges(), vec![(0, 1), (0, 2), (1, 2)]);
        // Disjoint views: empty.
        let empty = build_comm_graph(&[vec![vec![0]], vec![vec![1]], vec![vec![2]]]);
        assert!(empty.edges().is_empty());
    }

    #[test]
    fn graph_construction_rejects_junk() {
        assert!(CommGraph::new(3, &[(0, 3)]).is_err());
        assert!(CommGraph::new(3, &[(1, 1)]).is_err());
        let g = CommGraph::new(3, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    fn intrinsics() -> CameraIntrinsics {
        CameraIntrinsics {
            cols: 16,
            rows: 12,
            sensor_width_mm: 4.8,
        }
    }

    /// Sensors strung along x over a strip of cells, with short focal
    /// lengths and two tilt options each; neighboring footprints overlap.
    fn strip_rig(config: RewardConfig) -> SceneObjective {
        let polygons = floor_grid(0.0, 0.0, 6, 1, 0.6, 0.0).unwrap();
        let poses = vec![
            PtzPose { pan: 0.0, tilt: 0.0, focal_mm: 4.0 },
            PtzPose { pan: 0.0, tilt: 0.3, focal_mm: 4.0 },
            PtzPose { pan: 3.1, tilt: 0.3, focal_mm: 4.0 },
        ];
        let sensors: Vec<SensorModel> = (0..3)
            .map(|i| {
                SensorModel::new(
                    i,
                    Vector3::new(-1.2 + 1.2 * i as f64, 0.0, 1.1),
                    intrinsics(),
                    poses.clone(),
                )
                .unwrap()
            })
            .collect();
        let scene = SceneState::new(
            vec![100; 6],
            vec![ChangeEvent { round: 1, overrides: vec![(1, 160), (4, 30)] }],
        )
        .unwrap();
        let objective = SceneObjective::new(sensors, polygons, scene, config).unwrap();
        objective.advance_scene(1);
        objective
    }

    fn small_config(rule: RegionRule) -> RewardConfig {
        RewardConfig {
            info: InfoMetric::ChangeCount,
            change_threshold: 20,
            quality: QualityShape::Identity,
            variant: RewardVariant::Floored { gamma: 0.015 },
            rule,
            // Keeps welfare near 1 so float noise stays far below 1e-12.
            scale: 1e-3,
            ..RewardConfig::default()
        }
    }

    /// The factorized construction must agree with the definition: a brute
    /// force sweep over action pairs intersecting visible sets.
    #[test]
    fn geometric_graph_matches_pairwise_sweep() {
        let objective = strip_rig(small_config(RegionRule::Max));
        let graph = comm_graph_for(&objective);
        let n = objective.sensors().len();
        for i in 0..n {
            for j in i + 1..n {
                let mut overlap = false;
                for ai in 0..objective.sensors()[i].action_count() {
                    for aj in 0..objective.sensors()[j].action_count() {
                        let vi = &objective.visibility(i, ai).unwrap().visible;
                        let vj = &objective.visibility(j, aj).unwrap().visible;
                        if vi.iter().any(|r| vj.contains(r)) {
                            overlap = true;
                        }
                    }
                }
                assert_eq!(graph.has_edge(i, j), overlap, "pair ({i}, {j})");
            }
        }
        // The rig is built so adjacent sensors overlap.
        assert!(graph.has_edge(0, 1) && graph.has_edge(1, 2));
    }

    #[test]
    fn sole_observer_keeps_its_full_value() {
        let config = small_config(RegionRule::Max);
        let own: WijTable = vec![(4, 0.3)];
        let u = local_utility(0, &own, &[], &[], &config).unwrap();
        assert!((u - config.scale * 0.3).abs() < 1e-18);
    }

    #[test]
    fn better_neighbor_zeroes_the_contribution() {
        let config = small_config(RegionRule::Max);
        let own: WijTable = vec![(4, 0.3)];
        let inbox = vec![UtilityMessage { sender: 1, entries: vec![(4, 0.5)] }];
        let u = local_utility(0, &own, &inbox, &[1], &config).unwrap();
        assert_eq!(u, 0.0);
    }

    #[test]
    fn empty_view_means_zero_utility() {
        let config = small_config(RegionRule::ConcaveSum { h: ConcaveFn::Sqrt });
        let inbox = vec![UtilityMessage { sender: 2, entries: vec![(0, 0.4)] }];
        let u = local_utility(1, &Vec::new(), &inbox, &[2], &config).unwrap();
        assert_eq!(u, 0.0);
    }

    #[test]
    fn protocol_violations_are_loud() {
        let config = small_config(RegionRule::Max);
        let own: WijTable = vec![(0, 0.1)];
        let missing = local_utility(0, &own, &[], &[1], &config);
        assert!(matches!(missing, Err(Error::MissingMessage { sensor: 0, neighbor: 1 })));
        let twice = vec![
            UtilityMessage { sender: 1, entries: vec![] },
            UtilityMessage { sender: 1, entries: vec![(0, 0.2)] },
        ];
        let dup = local_utility(0, &own, &twice, &[1], &config);
        assert!(matches!(dup, Err(Error::DuplicateMessage { neighbor: 1, count: 2, .. })));
        let stranger = vec![UtilityMessage { sender: 2, entries: vec![] }];
        assert!(local_utility(0, &own, &stranger, &[1], &config).is_err());
    }

    #[test]
    fn disconnected_sensors_sum_their_own_table() {
        let config = small_config(RegionRule::Max);
        let graph = CommGraph::new(2, &[]).unwrap();
        let tables = vec![vec![(0, 0.2), (1, 0.4)], vec![(2, 0.9)]];
        let u = round_exchange(&tables, &graph, &config).unwrap();
        assert!((u[0] - config.scale * 0.6).abs() < 1e-15);
        assert!((u[1] - config.scale * 0.9).abs() < 1e-15);
    }

    /// Lemma-2 equivalence on geometric scenarios: message-passing utilities
    /// equal centralized marginal contributions for both region rules.
    #[test]
    fn exchange_matches_centralized_marginal_utilities() {
        for rule in [RegionRule::Max, RegionRule::ConcaveSum { h: ConcaveFn::Sqrt }] {
            let objective = Arc::new(strip_rig(small_config(rule)));
            let graph = comm_graph_for(&objective);
            let space = crate::game::space::ActionSpace::complete(&[3, 3, 3]);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let config = *objective.config();
            for _ in 0..40 {
                let a = random_joint(&space, &mut rng);
                let tables = objective.wij_tables(&a).unwrap();
                let distributed = round_exchange(&tables, &graph, &config).unwrap();
                for i in 0..3 {
                    let central = marginal_utility(objective.as_ref(), i, &a);
                    assert!(
                        (distributed[i] - central).abs() <= 1e-12,
                        "rule {rule:?}, sensor {i}: {} vs {central}",
                        distributed[i]
                    );
                }
            }
        }
    }

    /// Everyone who co-observes a region with sensor i under the executed
    /// action must already be i's neighbor (the containment Lemma 2 needs).
    #[test]
    fn neighbors_cover_all_coobservers() {
        let objective = strip_rig(small_config(RegionRule::Max));
        let graph = comm_graph_for(&objective);
        let space = crate::game::space::ActionSpace::complete(&[3, 3, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let a = random_joint(&space, &mut rng);
            for i in 0..3 {
                let mine = &objective.visibility(i, a[i]).unwrap().visible;
                for other in 0..3 {
                    if other == i {
                        continue;
                    }
                    let theirs = &objective.visibility(other, a[other]).unwrap().visible;
                    if mine.iter().any(|r| theirs.contains(r)) {
                        assert!(graph.has_edge(i, other), "({i}, {other}) co-observe");
                    }
                }
            }
        }
    }

    #[test]
    fn message_log_rows_cover_every_directed_entry() {
        let graph = CommGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let tables = vec![vec![(0, 0.5)], vec![(1, 0.25), (2, 0.125)], vec![]];
        let mut buf = Vec::new();
        write_message_log(&mut buf, 42, &graph, &tables).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        // Sender 0 -> 1: one entry; sender 1 -> 0 and 1 -> 2: two entries
        // each; sender 2 -> 1: empty table.
        assert_eq!(rows.len(), 1 + 4);
        assert_eq!(rows[0], "42,0,1,0,5.00000000000e-1");
        assert!(rows.iter().all(|r| r.starts_with("42,")));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w: f64 = rng.random_range(0.0..1.0);
        let parsed: f64 = format!("{w:.11e}").parse().unwrap();
        assert!((parsed - w).abs() < 1e-11);
    }
}
