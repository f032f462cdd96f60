//! Node placement, target kinematics and true geometry.

use nalgebra::Vector2;
use rand::Rng;

use crate::error::{Error, Result};

pub type Position = Vector2<f64>;

/// Constant-velocity point target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub position: Position,
    pub velocity: Vector2<f64>,
    /// Radar cross section in m².
    pub rcs: f64,
}

impl TargetState {
    /// Target heading from `start` towards `towards` at `speed` m/s.
    pub fn heading(start: Position, towards: Position, speed: f64, rcs: f64) -> Self {
        let dir = towards - start;
        let norm = dir.norm();
        let velocity = if norm > 0.0 {
            dir * (speed / norm)
        } else {
            Vector2::zeros()
        };
        Self {
            position: start,
            velocity,
            rcs,
        }
    }

    /// State after `elapsed` seconds of straight-line motion.
    pub fn advanced(&self, elapsed: f64) -> Self {
        Self {
            position: self.position + self.velocity * elapsed,
            ..*self
        }
    }

    pub fn rcs_db(&self) -> f64 {
        10.0 * self.rcs.log10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub nodes: Vec<Position>,
    /// Target state at the start of CPI 0.
    pub target: TargetState,
    pub area: Vector2<f64>,
}

impl Scene {
    pub fn new(nodes: Vec<Position>, target: TargetState, area: Vector2<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidConfig("scene needs at least one node".into()));
        }
        if !(target.rcs > 0.0) {
            return Err(Error::InvalidConfig("target rcs must be positive".into()));
        }
        Ok(Self {
            nodes,
            target,
            area,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Target state at the start of CPI `t`.
    pub fn target_position(&self, t: usize, cpi_duration: f64) -> TargetState {
        self.target.advanced(t as f64 * cpi_duration)
    }

    /// Target state in the middle of CPI `t`; the truth used for
    /// measurements and error scoring.
    pub fn target_midpoint(&self, t: usize, cpi_duration: f64) -> TargetState {
        self.target.advanced((t as f64 + 0.5) * cpi_duration)
    }

    pub fn true_ranges(&self, target_pos: &Position) -> Vec<f64> {
        true_ranges(&self.nodes, target_pos)
    }
}

/// Draws `m` node positions uniformly over `[0, area.x] × [0, area.y]`.
pub fn place_nodes<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    area: Vector2<f64>,
) -> Result<Vec<Position>> {
    if m == 0 {
        return Err(Error::InvalidConfig(
            "number of nodes must be at least 1".into(),
        ));
    }
    if !(area.x > 0.0 && area.y > 0.0) || !area.x.is_finite() || !area.y.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "area must have positive finite extent, got [{}, {}]",
            area.x, area.y
        )));
    }
    Ok((0..m)
        .map(|_| {
            Vector2::new(
                rng.random_range(0.0..=area.x),
                rng.random_range(0.0..=area.y),
            )
        })
        .collect())
}

/// Euclidean distance from every node to `target_pos`.
pub fn true_ranges(nodes: &[Position], target_pos: &Position) -> Vec<f64> {
    nodes.iter().map(|n| (n - target_pos).norm()).collect()
}
