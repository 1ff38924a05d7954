//! Serializable scene for clients. Field order is part of the wire format.

use serde::{Deserialize, Serialize};

use super::WorldBounds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurtleView {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub color: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewModel {
    pub bounds: WorldBounds,
    /// Patch colors, row-major from the top-left patch.
    pub patches: Vec<f64>,
    /// Live turtles in id order.
    pub turtles: Vec<TurtleView>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchChange {
    pub index: usize,
    pub color: f64,
}

/// Difference between two views of the same world.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViewDelta {
    pub patches: Vec<PatchChange>,
    /// New or changed turtles, in id order.
    pub turtles: Vec<TurtleView>,
    /// Ids of turtles that died.
    pub removed: Vec<u64>,
}

impl ViewDelta {
    pub fn is_empty(&self) -> bool {
        self.patches.is_empty() && self.turtles.is_empty() && self.removed.is_empty()
    }
}

impl ViewModel {
    pub fn diff(&self, next: &ViewModel) -> ViewDelta {
        let patches = self
            .patches
            .iter()
            .zip(&next.patches)
            .enumerate()
            .filter(|(_, (a, b))| a.to_bits() != b.to_bits())
            .map(|(index, (_, &color))| PatchChange { index, color })
            .collect();

        let mut turtles = Vec::new();
        let mut removed = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.turtles.len() || j < next.turtles.len() {
            match (self.turtles.get(i), next.turtles.get(j)) {
                (Some(old), Some(new)) if old.id == new.id => {
                    if old != new {
                        turtles.push(new.clone());
                    }
                    i += 1;
                    j += 1;
                }
                (Some(old), Some(new)) if old.id < new.id => {
                    removed.push(old.id);
                    i += 1;
                }
                (Some(old), None) => {
                    removed.push(old.id);
                    i += 1;
                }
                (_, Some(new)) => {
                    turtles.push(new.clone());
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        ViewDelta {
            patches,
            turtles,
            removed,
        }
    }

    pub fn apply(&mut self, delta: &ViewDelta) {
        for change in &delta.patches {
            if let Some(slot) = self.patches.get_mut(change.index) {
                *slot = change.color;
            }
        }
        self.turtles.retain(|t| !delta.removed.contains(&t.id));
        for t in &delta.turtles {
            match self.turtles.binary_search_by_key(&t.id, |x| x.id) {
                Ok(pos) => self.turtles[pos] = t.clone(),
                Err(pos) => self.turtles.insert(pos, t.clone()),
            }
        }
    }
}
