//! Mutable environment state: one grayscale value per polygon, a frozen
//! initial copy, and a schedule of value overrides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scheduled environmental change: at `round`, the listed cells take new
/// values. Several events may share a round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangeEvent {
    pub round: u64,
    /// (cell index, new grayscale value) pairs.
    pub overrides: Vec<(usize, u8)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneState {
    initial: Vec<u8>,
    current: Vec<u8>,
    events: Vec<ChangeEvent>,
    /// Events before this index are already applied.
    applied: usize,
    /// Bumped on every effective change; caches key off it.
    version: u64,
}

impl SceneState {
    pub fn new(initial: Vec<u8>, mut events: Vec<ChangeEvent>) -> Result<SceneState> {
        if initial.is_empty() {
            return Err(Error::BadParameter("scene has no cells".into()));
        }
        for e in &events {
            for &(cell, _) in &e.overrides {
                if cell >= initial.len() {
                    return Err(Error::BadParameter(format!(
                        "change event at round {} targets cell {cell}, scene has {}",
                        e.round,
                        initial.len()
                    )));
                }
            }
        }
        events.sort_by_key(|e| e.round);
        Ok(SceneState {
            current: initial.clone(),
            initial,
            events,
            applied: 0,
            version: 0,
        })
    }

    /// Scene with no scheduled changes.
    pub fn constant(values: Vec<u8>) -> Result<SceneState> {
        SceneState::new(values, Vec::new())
    }

    pub fn cells(&self) -> usize {
        self.initial.len()
    }

    pub fn initial(&self) -> &[u8] {
        &self.initial
    }

    pub fn current(&self) -> &[u8] {
        &self.current
    }

    pub fn events(&self) -> &[ChangeEvent] {
        &self.events
    }

    /// Monotone counter distinguishing scene contents over time.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// Applies every event scheduled at or before `round`. Rounds between
    /// events leave the state untouched. Returns true when values changed.
    pub fn advance_to(&mut self, round: u64) -> bool {
        let mut changed = false;
        while self.applied < self.events.len() && self.events[self.applied].round <= round {
            for &(cell, value) in &self.events[self.applied].overrides {
                if self.current[cell] != value {
                    self.current[cell] = value;
                    changed = true;
                }
            }
            self.applied += 1;
        }
        if changed {
            self.version += 1;
        }
        changed
    }

    /// Back to the initial values with all events pending again.
    pub fn reset(&mut self) {
        self.current.copy_from_slice(&self.initial);
        self.applied = 0;
        self.version += 1;
    }
}
