use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// The same point folded into `[0, width) × [0, height)`.
    pub fn wrapped(self, width: f64, height: f64) -> Self {
        Self { x: wrap(self.x, width), y: wrap(self.y, height) }
    }

    pub fn in_bounds(self, width: f64, height: f64) -> bool {
        (0.0..width).contains(&self.x) && (0.0..height).contains(&self.y)
    }
}

fn wrap(v: f64, extent: f64) -> f64 {
    let r = v.rem_euclid(extent);
    // rem_euclid can round up to exactly `extent` for tiny negative inputs
    if r >= extent {
        0.0
    } else {
        r
    }
}

fn axis_gap(a: f64, b: f64, extent: f64) -> f64 {
    let d = (a - b).abs();
    d.min(extent - d)
}

/// Euclidean distance on a torus with per-axis wraparound.
pub fn toroidal_distance(p: Point, q: Point, width: f64, height: f64) -> f64 {
    axis_gap(p.x, q.x, width).hypot(axis_gap(p.y, q.y, height))
}
