//! Random-waypoint movement and initial node placement.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{Placement, SimConfig};
use crate::model::Position;

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Rectangle `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field {
    pub width: f64,
    pub height: f64,
}

impl Field {
    pub fn contains(&self, p: Position) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height
    }

    pub fn clamp(&self, p: Position) -> Position {
        Position::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Position {
        Position::new(rng.random_range(0.0..=self.width), rng.random_range(0.0..=self.height))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    pub speed_min: f64,
    pub speed_max: f64,
    pub pause_s: f64,
}

impl MobilityParams {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self { speed_min: cfg.speed_min_mps, speed_max: cfg.speed_max_mps, pause_s: cfg.pause_s }
    }

    fn draw_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.speed_max > self.speed_min {
            rng.random_range(self.speed_min..=self.speed_max)
        } else {
            self.speed_min
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointState {
    pub target: Position,
    pub speed: f64,
    pub pause_remaining_s: f64,
}

impl WaypointState {
    pub fn initial<R: Rng + ?Sized>(field: &Field, params: &MobilityParams, rng: &mut R) -> Self {
        Self { target: field.random_point(rng), speed: params.draw_speed(rng), pause_remaining_s: 0.0 }
    }
}

/// Advances one node by `dt` seconds.
///
/// A paused node stays put while the pause drains. A moving node travels
/// `min(speed * dt, remaining)` toward its target; on arrival it starts a
/// pause and immediately draws the next target and speed.
pub fn step_waypoint<R: Rng + ?Sized>(
    pos: Position,
    wp: WaypointState,
    dt: f64,
    field: &Field,
    params: &MobilityParams,
    rng: &mut R,
) -> (Position, WaypointState) {
    debug_assert!(dt > 0.0);
    if wp.pause_remaining_s > 0.0 {
        let pause_remaining_s = (wp.pause_remaining_s - dt).max(0.0);
        return (pos, WaypointState { pause_remaining_s, ..wp });
    }

    let remaining = distance(pos, wp.target);
    let travel = wp.speed * dt;
    if travel < remaining {
        let f = travel / remaining;
        let next = Position::new(pos.x + (wp.target.x - pos.x) * f, pos.y + (wp.target.y - pos.y) * f);
        return (field.clamp(next), wp);
    }

    let next_wp = WaypointState {
        target: field.random_point(rng),
        speed: params.draw_speed(rng),
        pause_remaining_s: params.pause_s,
    };
    (wp.target, next_wp)
}

/// Initial positions for `count` nodes.
pub fn place_nodes<R: Rng + ?Sized>(count: usize, field: &Field, placement: Placement, rng: &mut R) -> Vec<Position> {
    match placement {
        Placement::Uniform => (0..count).map(|_| field.random_point(rng)).collect(),
        Placement::Clustered => {
            let blobs = ((count as f64).sqrt() / 2.0).ceil().max(1.0) as usize;
            let centers: Vec<Position> = (0..blobs).map(|_| field.random_point(rng)).collect();
            let sigma = field.width.min(field.height) / 16.0;
            let normal = Normal::new(0.0, sigma).expect("finite sigma");
            (0..count)
                .map(|_| {
                    let c = centers[rng.random_range(0..blobs)];
                    field.clamp(Position::new(c.x + normal.sample(rng), c.y + normal.sample(rng)))
                })
                .collect()
        }
    }
}
