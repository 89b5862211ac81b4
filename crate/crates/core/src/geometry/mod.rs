//! Closed-track geometry: centerline model, Frenet transforms and the
//! reference lines followed by the ego and the scripted opponents.

mod boxqp;
mod refline;
pub mod shapes;
mod track;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use refline::{
    capped_speed, make_reference_line, path_curvature, LineKind, RefLineConfig, ReferenceLine,
};
pub use track::{
    load_track, wrap_angle, FrenetPose, TrackModel, GRID_SPACING, MAX_FILE_SPACING, MIN_FILE_POINTS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("track file is missing the `x_m,y_m,w_left_m,w_right_m` header")]
    MissingHeader,
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("track has {found} points, at least {required} required")]
    TooFewPoints { found: usize, required: usize },
    #[error("centerline is not closed: last-to-first gap {gap:.3} m exceeds twice the max spacing {max_spacing:.3} m")]
    NotClosed { gap: f64, max_spacing: f64 },
    #[error("point is {distance:.3} m from the centerline, outside the {bound:.3} m corridor")]
    OutOfCorridor { distance: f64, bound: f64 },
    #[error("reference line infeasible: margin {margin:.3} m leaves no room at s = {s:.2} m")]
    InfeasibleBounds { s: f64, margin: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// A 2D point or vector in the world frame [m].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(a: f64) -> Self {
        Self::new(a.cos(), a.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotate(self, a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Self, t: f64) -> Self {
        self + (o - self) * t
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}
