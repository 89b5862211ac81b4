//! Target selection and Region-of-Collision prediction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FrenetPose, ReferenceLine};
use crate::gpr::{FittedProfile, OpponentProfile};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictionError {
    #[error("opponent profile not ready (coverage {coverage:.2})")]
    NotReady { coverage: f64 },
    #[error("opponent profile has no fit: {0}")]
    Unfitted(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Ego pose, speed and the plan whose speed profile drives the forward integration.
#[derive(Debug, Clone, Copy)]
pub struct EgoState<'a> {
    pub pose: FrenetPose,
    pub speed: f64,
    pub plan: &'a ReferenceLine,
}

/// Predicted arc-length window in which ego and the target overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOfCollision {
    pub s_start: f64,
    pub s_end: f64,
    /// Time until the ego enters the region [s].
    pub t_entry: f64,
    /// Time at which the overlap window closes (or the horizon) [s].
    pub t_exit: f64,
    pub target_id: u64,
}

impl RegionOfCollision {
    /// Forward arc length from `s_start` to `s_end`.
    pub fn span(&self, track_length: f64) -> f64 {
        (self.s_end - self.s_start).wrap(track_length)
    }

    /// Whether `s` lies on the forward arc from `s_start` to `s_end`.
    pub fn contains(&self, s: f64, track_length: f64) -> bool {
        (s - self.s_start).wrap(track_length) <= self.span(track_length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RocConfig {
    pub horizon: f64,
    pub dt: f64,
    pub gap_thresh: f64,
    pub margin: f64,
}

impl Default for RocConfig {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            dt: 0.05,
            gap_thresh: 0.75,
            margin: 0.5,
        }
    }
}

/// One planner-trace line describing the RoC of a planning cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocRecord {
    pub t: f64,
    pub target_id: u64,
    pub s_start: f64,
    pub s_end: f64,
    pub t_entry: f64,
}

impl RocRecord {
    pub fn new(t: f64, roc: &RegionOfCollision) -> Self {
        Self {
            t,
            target_id: roc.target_id,
            s_start: roc.s_start,
            s_end: roc.s_end,
            t_entry: roc.t_entry,
        }
    }
}

/// Closest opponent ahead of the ego by wrapped arc distance. Ties go to the lower id.
pub fn select_target(
    ego_s: f64,
    opponents: &[(u64, FrenetPose, f64)],
    track_length: f64,
) -> Option<u64> {
    opponents
        .iter()
        .map(|(id, pose, _)| ((pose.s - ego_s).wrap(track_length), *id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

/// RoC against a ready opponent profile at current arc length `opp_s`.
pub fn compute_roc(
    ego: &EgoState<'_>,
    target_id: u64,
    opp_s: f64,
    prof: &OpponentProfile<f64>,
    cfg: &RocConfig,
) -> Result<Option<RegionOfCollision>, PredictionError> {
    if !prof.ready() {
        return Err(PredictionError::NotReady {
            coverage: prof.coverage(),
        });
    }
    let fit = match prof.last_fit() {
        Some(f) => f,
        None => {
            return Err(PredictionError::Unfitted(
                "call fitted() before prediction".into(),
            ))
        }
    };
    compute_roc_with(ego, target_id, opp_s, &fit, cfg)
}

/// RoC from an already fitted profile snapshot.
pub fn compute_roc_with(
    ego: &EgoState<'_>,
    target_id: u64,
    opp_s: f64,
    fit: &FittedProfile<f64>,
    cfg: &RocConfig,
) -> Result<Option<RegionOfCollision>, PredictionError> {
    if !(cfg.gap_thresh > 0.0) || !(cfg.dt > 0.0) || !(cfg.horizon > 0.0) {
        return Err(PredictionError::InvalidParameter(
            "gap_thresh, dt and horizon must be positive",
        ));
    }
    let len = ego.plan.length;
    let v_opp = |s: f64| fit.gp_vs.mean(s).max(0.0);
    let v_ego = |s: f64| ego.plan.speed_at(s);

    let mut s_e = ego.pose.s;
    let mut s_o = s_e + (opp_s - s_e).wrap(len);
    let open = |s_e: f64, s_o: f64| (s_o - s_e).abs() < cfg.gap_thresh;

    if open(s_e, s_o) && v_ego(s_e) <= v_opp(s_o) {
        return Ok(None);
    }

    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let mut entry: Option<(f64, f64)> = None;
    let mut exit: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let inside = open(s_e, s_o);
        match (entry, inside) {
            (None, true) => entry = Some((t, s_o)),
            (Some(_), false) => {
                exit = Some((t, s_o));
                break;
            }
            _ => {}
        }
        if k < steps {
            let (ve, vo) = (v_ego(s_e), v_opp(s_o));
            s_e += ve * cfg.dt;
            s_o += vo * cfg.dt;
        }
    }
    let Some((t_entry, s_in)) = entry else {
        return Ok(None);
    };
    let (t_exit, s_out) = exit.unwrap_or((steps as f64 * cfg.dt, s_o));
    let swept = (s_out - s_in + 2.0 * cfg.margin).min(len * (1.0 - 1e-9));
    let s_start = (s_in - cfg.margin).wrap(len);
    Ok(Some(RegionOfCollision {
        s_start,
        s_end: (s_start + swept).wrap(len),
        t_entry,
        t_exit,
        target_id,
    }))
}
