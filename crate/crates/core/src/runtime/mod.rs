//! Deterministic turtle/patch world and the interpreter that drives it.

mod exec;
pub mod rng;
mod value;
mod view;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exec::{execute, execute_limited, scale_color, ExecOutcome, ExecStatus, STEP_LIMIT};
pub use rng::Pcg32;
pub use value::{AgentRef, AgentsetKind, Value};
pub use view::{PatchChange, TurtleView, ViewDelta, ViewModel};

/// Hard cap on grid size so a bad configuration cannot exhaust memory.
pub const MAX_PATCHES: usize = 1 << 20;
pub const MAX_TURTLES: usize = 100_000;

/// Base hues assigned to new turtles (the central shade of each hue).
pub const BASE_COLORS: [f64; 14] = [
    5.0, 15.0, 25.0, 35.0, 45.0, 55.0, 65.0, 75.0, 85.0, 95.0, 105.0, 115.0, 125.0, 135.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldBounds {
    pub min_pxcor: i32,
    pub max_pxcor: i32,
    pub min_pycor: i32,
    pub max_pycor: i32,
}

impl Default for WorldBounds {
    fn default() -> Self {
        WorldBounds::square(16)
    }
}

impl WorldBounds {
    /// `-radius..=radius` on both axes.
    pub fn square(radius: i32) -> Self {
        WorldBounds {
            min_pxcor: -radius,
            max_pxcor: radius,
            min_pycor: -radius,
            max_pycor: radius,
        }
    }

    pub fn width(&self) -> usize {
        (i64::from(self.max_pxcor) - i64::from(self.min_pxcor) + 1) as usize
    }

    pub fn height(&self) -> usize {
        (i64::from(self.max_pycor) - i64::from(self.min_pycor) + 1) as usize
    }

    pub fn patch_count(&self) -> usize {
        self.width() * self.height()
    }

    /// Row-major index: rows run from the top (`max_pycor`) down, columns
    /// from the left (`min_pxcor`).
    pub fn patch_index(&self, pxcor: i32, pycor: i32) -> usize {
        let row = (i64::from(self.max_pycor) - i64::from(pycor)) as usize;
        let col = (i64::from(pxcor) - i64::from(self.min_pxcor)) as usize;
        row * self.width() + col
    }

    pub fn patch_coords(&self, index: usize) -> (i32, i32) {
        let w = self.width();
        let col = (index % w) as i64;
        let row = (index / w) as i64;
        (
            (i64::from(self.min_pxcor) + col) as i32,
            (i64::from(self.max_pycor) - row) as i32,
        )
    }

    fn wrap_axis(v: f64, min: i32, max: i32) -> f64 {
        let lo = f64::from(min) - 0.5;
        let span = f64::from(max) - f64::from(min) + 1.0;
        let r = (v - lo).rem_euclid(span) + lo;
        if r >= f64::from(max) + 0.5 {
            lo
        } else {
            r
        }
    }

    pub fn wrap_x(&self, x: f64) -> f64 {
        Self::wrap_axis(x, self.min_pxcor, self.max_pxcor)
    }

    pub fn wrap_y(&self, y: f64) -> f64 {
        Self::wrap_axis(y, self.min_pycor, self.max_pycor)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= f64::from(self.min_pxcor) - 0.5
            && x < f64::from(self.max_pxcor) + 0.5
            && y >= f64::from(self.min_pycor) - 0.5
            && y < f64::from(self.max_pycor) + 0.5
    }

    /// Patch containing a point already inside the world.
    pub fn patch_at(&self, x: f64, y: f64) -> usize {
        let px = ((x + 0.5).floor() as i64).clamp(self.min_pxcor.into(), self.max_pxcor.into());
        let py = ((y + 0.5).floor() as i64).clamp(self.min_pycor.into(), self.max_pycor.into());
        self.patch_index(px as i32, py as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turtle {
    pub id: u64,
    pub xcor: f64,
    pub ycor: f64,
    pub heading: f64,
    pub color: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorldError {
    #[error("world bounds are inverted: {0}")]
    InvertedBounds(String),
    #[error("world has {0} patches, more than the limit of {MAX_PATCHES}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    bounds: WorldBounds,
    patches: Vec<f64>,
    turtles: BTreeMap<u64, Turtle>,
    next_turtle_id: u64,
    rng: Pcg32,
    output: Vec<String>,
}

pub fn new_world(bounds: WorldBounds, seed: u64) -> Result<World, WorldError> {
    World::new(bounds, seed)
}

impl World {
    pub fn new(bounds: WorldBounds, seed: u64) -> Result<World, WorldError> {
        if bounds.min_pxcor > bounds.max_pxcor {
            return Err(WorldError::InvertedBounds(format!(
                "min-pxcor {} > max-pxcor {}",
                bounds.min_pxcor, bounds.max_pxcor
            )));
        }
        if bounds.min_pycor > bounds.max_pycor {
            return Err(WorldError::InvertedBounds(format!(
                "min-pycor {} > max-pycor {}",
                bounds.min_pycor, bounds.max_pycor
            )));
        }
        let count = bounds.width().saturating_mul(bounds.height());
        if count > MAX_PATCHES {
            return Err(WorldError::TooLarge(count));
        }
        Ok(World {
            bounds,
            patches: vec![0.0; count],
            turtles: BTreeMap::new(),
            next_turtle_id: 0,
            rng: Pcg32::new(seed, rng::WORLD_STREAM),
            output: Vec::new(),
        })
    }

    pub fn bounds(&self) -> WorldBounds {
        self.bounds
    }

    pub fn turtles(&self) -> impl Iterator<Item = &Turtle> {
        self.turtles.values()
    }

    pub fn turtle(&self, id: u64) -> Option<&Turtle> {
        self.turtles.get(&id)
    }

    pub fn turtle_count(&self) -> usize {
        self.turtles.len()
    }

    pub fn patch_colors(&self) -> &[f64] {
        &self.patches
    }

    pub fn pcolor(&self, pxcor: i32, pycor: i32) -> f64 {
        self.patches[self.bounds.patch_index(pxcor, pycor)]
    }

    /// Every line printed since the world was created.
    pub fn output(&self) -> &[String] {
        &self.output
    }

    pub fn next_turtle_id(&self) -> u64 {
        self.next_turtle_id
    }

    pub fn snapshot(&self) -> ViewModel {
        ViewModel {
            bounds: self.bounds,
            patches: self.patches.clone(),
            turtles: self
                .turtles
                .values()
                .map(|t| TurtleView {
                    id: t.id,
                    x: t.xcor,
                    y: t.ycor,
                    heading: t.heading,
                    color: t.color,
                })
                .collect(),
        }
    }
}

pub fn snapshot(world: &World) -> ViewModel {
    world.snapshot()
}

pub(crate) fn normalize_heading(h: f64) -> f64 {
    let r = h.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

pub(crate) fn wrap_color(c: f64) -> f64 {
    let r = c.rem_euclid(140.0);
    if r >= 140.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_world_is_empty_and_black() {
        let w = new_world(WorldBounds::square(16), 42).unwrap();
        assert_eq!(w.patch_colors().len(), 33 * 33);
        assert!(w.patch_colors().iter().all(|&c| c == 0.0));
        assert_eq!(w.turtle_count(), 0);
    }

    #[test]
    fn construction_is_deterministic() {
        let a = new_world(WorldBounds::square(16), 42).unwrap();
        let b = new_world(WorldBounds::square(16), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.snapshot(), b.snapshot());
    }

    #[test]
    fn inverted_bounds_fail() {
        let bounds = WorldBounds {
            min_pxcor: 5,
            max_pxcor: -5,
            min_pycor: -5,
            max_pycor: 5,
        };
        assert!(matches!(new_world(bounds, 1), Err(WorldError::InvertedBounds(_))));
        let huge = WorldBounds::square(5000);
        assert!(matches!(new_world(huge, 1), Err(WorldError::TooLarge(_))));
    }

    #[test]
    fn patch_index_round_trips() {
        let b = WorldBounds {
            min_pxcor: -3,
            max_pxcor: 4,
            min_pycor: -2,
            max_pycor: 1,
        };
        for i in 0..b.patch_count() {
            let (x, y) = b.patch_coords(i);
            assert_eq!(b.patch_index(x, y), i);
        }
        assert_eq!(b.patch_index(-3, 1), 0);
    }

    #[test]
    fn wrapping() {
        let b = WorldBounds::square(16);
        assert_eq!(b.wrap_x(16.5), -16.5);
        assert_eq!(b.wrap_x(17.0), -16.0);
        assert_eq!(b.wrap_x(-16.5), -16.5);
        assert_eq!(b.wrap_y(-17.0), 16.0);
        assert_eq!(b.wrap_x(3.25), 3.25);
        assert_eq!(normalize_heading(-90.0), 270.0);
        assert_eq!(normalize_heading(360.0), 0.0);
        assert_eq!(normalize_heading(-1e-20), 0.0);
        assert_eq!(wrap_color(150.0), 10.0);
        assert_eq!(wrap_color(-5.0), 135.0);
    }
}
