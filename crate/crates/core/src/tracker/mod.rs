//! Multi-opponent tracking: constant-velocity Kalman tracklets, optimal
//! Euclidean association, re-identification of coasting tracklets and the
//! tracklet lifecycle.

pub mod assignment;
pub mod kalman;
mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assignment::{associate, euclid, Matching};
pub use kalman::{KfConfig, KfState};
pub use state::{kf_predict, kf_update, reid, TrackedOpponent, TrackerState};

use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackerError {
    #[error("detection has a non-finite coordinate")]
    NonFiniteDetection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    /// Coasting past the association window; only recoverable by re-identification.
    Lost,
}

/// A positional detection with the fitted rectangle's extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection<T> {
    pub z: [T; 2],
    /// `[length, width]` of the fitted rectangle [m].
    pub extent: [T; 2],
    pub timestamp: T,
}

impl<T: Real> Detection<T> {
    pub fn at(x: T, y: T) -> Self {
        Self {
            z: [x, y],
            extent: [T::lit(0.5), T::lit(0.3)],
            timestamp: T::zero(),
        }
    }
}

/// One opponent hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tracklet<T> {
    pub id: u64,
    pub kf: KfState<T>,
    pub hit_count: u32,
    pub miss_count: u32,
    pub status: TrackStatus,
    pub extent: [T; 2],
    pub was_confirmed: bool,
}

impl<T: Real> Tracklet<T> {
    pub fn spawn(id: u64, det: &Detection<T>, kf: &KfConfig<T>) -> Self {
        Self {
            id,
            kf: KfState::from_measurement(det.z, kf),
            hit_count: 1,
            miss_count: 0,
            status: TrackStatus::Tentative,
            extent: det.extent,
            was_confirmed: false,
        }
    }

    pub fn position(&self) -> [T; 2] {
        self.kf.position()
    }

    pub fn velocity(&self) -> [T; 2] {
        self.kf.velocity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig<T> {
    /// Re-identification gate [m].
    pub tau_reid: T,
    /// Maximum association distance [m].
    pub assoc_gate: T,
    /// Consecutive hits needed to confirm a tentative tracklet.
    pub n_init: u32,
    /// Frames without a match before a tracklet is deleted.
    pub max_misses: u32,
    /// Frames a confirmed tracklet may coast in normal association before it
    /// is declared lost.
    pub max_coast: u32,
}

impl<T: Real> Default for TrackerConfig<T> {
    fn default() -> Self {
        Self {
            tau_reid: T::lit(0.1),
            assoc_gate: T::lit(0.6),
            n_init: 3,
            max_misses: 30,
            max_coast: 12,
        }
    }
}

/// One line of the tracker trace log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerTraceRecord {
    pub t: f64,
    pub tracklets: Vec<TraceTracklet>,
    pub detections: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTracklet {
    pub id: u64,
    pub p: [f64; 2],
    pub v: [f64; 2],
    pub status: TrackStatus,
}

impl TrackerTraceRecord {
    /// `vel_scale` converts filter velocities to m/s (the frame rate when the
    /// filter steps in frames).
    pub fn capture(
        t: f64,
        state: &TrackerState<f64>,
        detections: &[Detection<f64>],
        vel_scale: f64,
    ) -> Self {
        Self {
            t,
            tracklets: state
                .tracklets()
                .iter()
                .map(|k| {
                    let v = k.velocity();
                    TraceTracklet {
                        id: k.id,
                        p: k.position(),
                        v: [v[0] * vel_scale, v[1] * vel_scale],
                        status: k.status,
                    }
                })
                .collect(),
            detections: detections.iter().map(|d| d.z).collect(),
        }
    }
}
