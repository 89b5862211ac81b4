//! Overtaking trajectory optimization over lateral offsets inside the RoC.

mod banded;
mod check;
mod qp;
mod splice;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FrenetPose, ReferenceLine, TrackModel};
use crate::gpr::FittedProfile;
use crate::prediction::{RegionOfCollision, RocRecord};
use crate::Real;

pub use banded::{Penta, PentaLdl};
pub use check::{check_trajectory, discrete_curvature, Violation};
pub use qp::solve_overtake;
pub use splice::{seam_slope_jump, splice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("RoC span {span:.2} m exceeds half the track length")]
    Degenerate { span: f64 },
    #[error("neither side of the target leaves {required:.2} m of room")]
    NoFeasibleSide { required: f64 },
    #[error("empty feasible interval at s = {s:.2}")]
    Infeasible { s: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub w_smooth: f64,
    pub w_ref: f64,
    /// Lateral gap kept between vehicle bodies [m].
    pub clearance: f64,
    pub kappa_max: f64,
    pub lead_in: f64,
    pub lead_out: f64,
    pub max_iter: usize,
    pub vehicle_width: f64,
    pub vehicle_length: f64,
    /// Samples pinned to the reference line at each end.
    pub n_fixed: usize,
    pub a_lat_max: f64,
    pub curvature_floor: f64,
    /// Box-filter half width applied at splice seams [samples].
    pub seam_radius: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            w_smooth: 10.0,
            w_ref: 1.0,
            clearance: 0.25,
            kappa_max: 1.0 / 0.35,
            lead_in: 1.0,
            lead_out: 1.0,
            max_iter: 50,
            vehicle_width: 0.3,
            vehicle_length: 0.5,
            n_fixed: 2,
            a_lat_max: 6.0,
            curvature_floor: 1e-3,
            seam_radius: 3,
        }
    }
}

impl PlannerConfig {
    /// Required center-to-center lateral distance to an equally wide opponent.
    pub fn c_min(&self) -> f64 {
        self.clearance + self.vehicle_width
    }
}

/// Another opponent frozen at its current position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticObstacle {
    pub id: u64,
    /// Unwrapped arc length on the problem grid [m].
    pub s: f64,
    pub d: f64,
    /// `[length, width]` [m].
    pub extent: [f64; 2],
}

/// A fully specified lateral-offset QP on a grid of track samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvertakeProblem {
    pub track_length: f64,
    pub ds: f64,
    /// Track grid index of every sample.
    pub indices: Vec<usize>,
    /// Unwrapped, strictly increasing arc length [m].
    pub grid: Vec<f64>,
    pub d_ref: Vec<f64>,
    pub v_ref: Vec<f64>,
    pub d_opp: Vec<f64>,
    /// Centerline curvature [1/m].
    pub kappa_c: Vec<f64>,
    /// Track boundaries [m]; the ego center keeps half its width inside.
    pub d_min: Vec<f64>,
    pub d_max: Vec<f64>,
    /// Samples on which the target clearance is enforced.
    pub in_roc: Vec<bool>,
    pub static_obstacles: Vec<StaticObstacle>,
    pub c_min: f64,
    pub kappa_max: f64,
    pub vehicle_width: f64,
    pub vehicle_length: f64,
    pub w_smooth: f64,
    pub w_ref: f64,
    pub n_fixed: usize,
    pub max_iter: usize,
    pub a_lat_max: f64,
    pub curvature_floor: f64,
    pub target_id: u64,
}

impl OvertakeProblem {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Ego-center bounds at sample `i`.
    pub fn center_bounds(&self, i: usize) -> (f64, f64) {
        let h = 0.5 * self.vehicle_width;
        (self.d_min[i] + h, self.d_max[i] - h)
    }

    /// Whether sample `i` lies inside the longitudinal footprint of `obs`.
    pub fn obstacle_covers(&self, obs: &StaticObstacle, i: usize) -> bool {
        (self.grid[i] - obs.s).abs() <= 0.5 * (obs.extent[0] + self.vehicle_length)
    }

    /// Objective value.
    pub fn cost(&self, d: &[f64]) -> f64 {
        let n = self.len();
        let h2 = self.ds * self.ds;
        let smooth: f64 = (1..n - 1)
            .map(|i| ((d[i - 1] - 2.0 * d[i] + d[i + 1]) / h2).powi(2))
            .sum();
        let track: f64 = (0..n).map(|i| (d[i] - self.d_ref[i]).powi(2)).sum();
        self.w_smooth * smooth + self.w_ref * track
    }

    pub fn validate(&self) -> Result<(), PlannerError> {
        let n = self.len();
        if n < 2 * self.n_fixed + 1 || n < 5 {
            return Err(PlannerError::InvalidProblem("grid too short"));
        }
        let lens = [
            self.indices.len(),
            self.d_ref.len(),
            self.v_ref.len(),
            self.d_opp.len(),
            self.kappa_c.len(),
            self.d_min.len(),
            self.d_max.len(),
            self.in_roc.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(PlannerError::InvalidProblem(
                "per-sample arrays differ in length",
            ));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(PlannerError::InvalidProblem("grid not strictly increasing"));
        }
        if (0..n).any(|i| !(self.d_min[i] < self.d_max[i])) {
            return Err(PlannerError::InvalidProblem("bounds not ordered"));
        }
        if !(self.c_min > 0.0 && self.kappa_max > 0.0 && self.ds > 0.0) {
            return Err(PlannerError::InvalidProblem(
                "c_min, kappa_max and ds must be positive",
            ));
        }
        Ok(())
    }
}

/// One sample of a solved trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub s: f64,
    pub d: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvertakeTrajectory {
    /// Wrapped arc length, offset and speed per grid sample.
    pub samples: Vec<TrajectorySample>,
    pub indices: Vec<usize>,
    pub side: Side,
    pub cost: f64,
    pub feasible: bool,
    pub iterations: usize,
    /// Objective of every accepted iterate, in order.
    pub cost_history: Vec<f64>,
}

impl OvertakeTrajectory {
    pub fn offsets(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.d).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s_m,d_m,v_mps\n");
        for p in &self.samples {
            out.push_str(&format!("{},{},{}\n", p.s, p.d, p.v));
        }
        out
    }
}

/// Snapshot of another opponent handed to [`build_problem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtherOpponent {
    pub id: u64,
    pub pose: FrenetPose,
    pub extent: [f64; 2],
}

/// Assembles the QP data for one RoC.
///
/// The grid runs from `lead_in` before the RoC to `lead_out` after it, but
/// never starts behind the ego.
pub fn build_problem(
    roc: &RegionOfCollision,
    ego_s: f64,
    ego_plan: &ReferenceLine,
    target: &FittedProfile<f64>,
    others: &[OtherOpponent],
    track: &TrackModel,
    cfg: &PlannerConfig,
) -> Result<OvertakeProblem, PlannerError> {
    let len = track.length();
    let span = roc.span(len);
    if span > 0.5 * len {
        return Err(PlannerError::Degenerate { span });
    }
    let ds = track.ds();
    let n_track = track.len();
    let ego_s = ego_s.wrap(len);

    // unwrapped frame anchored at the ego
    let roc_a = ego_s + (roc.s_start - ego_s).wrap(len);
    let roc_b = roc_a + span;
    let start = (roc_a - cfg.lead_in).max(ego_s);
    let end = roc_b + cfg.lead_out;
    let k0 = (start / ds).ceil() as i64;
    let k1 = (end / ds).ceil() as i64;
    if k1 - k0 >= n_track as i64 {
        return Err(PlannerError::Degenerate { span });
    }

    let mut p = OvertakeProblem {
        track_length: len,
        ds,
        indices: Vec::new(),
        grid: Vec::new(),
        d_ref: Vec::new(),
        v_ref: Vec::new(),
        d_opp: Vec::new(),
        kappa_c: Vec::new(),
        d_min: Vec::new(),
        d_max: Vec::new(),
        in_roc: Vec::new(),
        static_obstacles: Vec::new(),
        c_min: cfg.c_min(),
        kappa_max: cfg.kappa_max,
        vehicle_width: cfg.vehicle_width,
        vehicle_length: cfg.vehicle_length,
        w_smooth: cfg.w_smooth,
        w_ref: cfg.w_ref,
        n_fixed: cfg.n_fixed,
        max_iter: cfg.max_iter,
        a_lat_max: cfg.a_lat_max,
        curvature_floor: cfg.curvature_floor,
        target_id: roc.target_id,
    };
    for k in k0..=k1 {
        let s = k as f64 * ds;
        let idx = k.rem_euclid(n_track as i64) as usize;
        p.indices.push(idx);
        p.grid.push(s);
        p.d_ref.push(ego_plan.offsets[idx]);
        p.v_ref.push(ego_plan.speed[idx]);
        p.d_opp.push(target.gp_d.mean(s.wrap(len)));
        p.kappa_c.push(track.curvature()[idx]);
        p.d_min.push(-track.width_right()[idx]);
        p.d_max.push(track.width_left()[idx]);
        p.in_roc.push(s >= roc_a && s <= roc_b);
    }
    let (g0, g1) = (p.grid[0], *p.grid.last().expect("non-empty grid"));
    for o in others {
        let s = g0 + (o.pose.s - g0).wrap(len);
        if s <= g1 {
            p.static_obstacles.push(StaticObstacle {
                id: o.id,
                s,
                d: o.pose.d,
                extent: o.extent,
            });
        }
    }
    p.validate()?;
    Ok(p)
}

fn min_room(p: &OvertakeProblem, side: Side) -> f64 {
    (0..p.len())
        .filter(|&i| p.in_roc[i])
        .map(|i| {
            let (lo, hi) = p.center_bounds(i);
            match side {
                Side::Left => hi - p.d_opp[i],
                Side::Right => p.d_opp[i] - lo,
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Side of the target with more lateral room over the RoC.
///
/// Ties go to the side the reference line already sits on.
pub fn choose_side(p: &OvertakeProblem) -> Result<Side, PlannerError> {
    let (left, right) = (min_room(p, Side::Left), min_room(p, Side::Right));
    let ok = |r: f64| r >= p.c_min;
    match (ok(left), ok(right)) {
        (false, false) => Err(PlannerError::NoFeasibleSide {
            required: p.c_min + p.vehicle_width,
        }),
        (true, false) => Ok(Side::Left),
        (false, true) => Ok(Side::Right),
        (true, true) if (left - right).abs() > 1e-9 => Ok(if left > right {
            Side::Left
        } else {
            Side::Right
        }),
        (true, true) => {
            let lean: f64 = (0..p.len())
                .filter(|&i| p.in_roc[i])
                .map(|i| p.d_ref[i] - p.d_opp[i])
                .sum();
            Ok(if lean >= 0.0 { Side::Left } else { Side::Right })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Trailing,
    Overtaking,
    Free,
}

/// One line of the planner trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerRecord {
    pub t: f64,
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub roc: Option<RocRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub feasible: Option<bool>,
}
