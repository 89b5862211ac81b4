use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{
    associate, euclid, Detection, KfConfig, TrackStatus, TrackerConfig, TrackerError, Tracklet,
};
use crate::Real;

/// Time update of a single tracklet. Lifecycle counters are left untouched.
pub fn kf_predict<T: Real>(t: &Tracklet<T>, cfg: &KfConfig<T>) -> Tracklet<T> {
    let mut out = *t;
    out.kf.predict(cfg);
    out
}

/// Measurement update of a single tracklet with a detection.
pub fn kf_update<T: Real>(
    t: &Tracklet<T>,
    z: &Detection<T>,
    cfg: &KfConfig<T>,
) -> Result<Tracklet<T>, TrackerError> {
    if !(z.z[0].is_finite() && z.z[1].is_finite()) {
        return Err(TrackerError::NonFiniteDetection);
    }
    let mut out = *t;
    out.kf.update(z.z, cfg);
    out.extent = z.extent;
    Ok(out)
}

/// Greedy re-identification: pairs closer than `tau_reid` are accepted in
/// ascending distance, ties broken by tracklet id then detection index.
/// Accepted tracklets are updated in place and keep their id.
///
/// Returns the accepted `(tracklet index, detection index)` pairs.
pub fn reid<T: Real>(
    tracklets: &mut [Tracklet<T>],
    unmatched_tracklets: &[usize],
    detections: &[Detection<T>],
    unmatched_detections: &[usize],
    cfg: &TrackerConfig<T>,
    kf: &KfConfig<T>,
) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(T, u64, usize, usize)> = Vec::new();
    for &ti in unmatched_tracklets {
        for &di in unmatched_detections {
            let d = euclid(tracklets[ti].position(), detections[di].z);
            if d < cfg.tau_reid {
                candidates.push((d, tracklets[ti].id, ti, di));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.3.cmp(&b.3))
    });

    let mut used_t = vec![false; tracklets.len()];
    let mut used_d = vec![false; detections.len()];
    let mut accepted = Vec::new();
    for (_, _, ti, di) in candidates {
        if used_t[ti] || used_d[di] {
            continue;
        }
        used_t[ti] = true;
        used_d[di] = true;
        if let Ok(upd) = kf_update(&tracklets[ti], &detections[di], kf) {
            let t = &mut tracklets[ti];
            *t = upd;
            t.hit_count += 1;
            t.miss_count = 0;
            t.status = if t.was_confirmed {
                TrackStatus::Confirmed
            } else {
                TrackStatus::Tentative
            };
            accepted.push((ti, di));
        }
    }
    accepted
}

/// Confirmed tracklet as reported to downstream consumers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedOpponent<T> {
    pub id: u64,
    pub p: [T; 2],
    pub v: [T; 2],
    pub extent: [T; 2],
}

/// Owns every tracklet of one scenario.
#[derive(Debug, Clone)]
pub struct TrackerState<T> {
    tracklets: Vec<Tracklet<T>>,
    next_id: u64,
    pub kf: KfConfig<T>,
    pub cfg: TrackerConfig<T>,
}

impl<T: Real> Default for TrackerState<T> {
    fn default() -> Self {
        Self::new(KfConfig::default(), TrackerConfig::default())
    }
}

impl<T: Real> TrackerState<T> {
    pub fn new(kf: KfConfig<T>, cfg: TrackerConfig<T>) -> Self {
        Self {
            tracklets: Vec::new(),
            next_id: 1,
            kf,
            cfg,
        }
    }

    /// All live tracklets, ordered by id.
    pub fn tracklets(&self) -> &[Tracklet<T>] {
        &self.tracklets
    }

    pub fn confirmed(&self) -> Vec<TrackedOpponent<T>> {
        self.tracklets
            .iter()
            .filter(|t| t.status == TrackStatus::Confirmed)
            .map(|t| TrackedOpponent {
                id: t.id,
                p: t.position(),
                v: t.velocity(),
                extent: t.extent,
            })
            .collect()
    }

    /// Advances every tracklet by `dt` and folds in one frame of detections.
    /// Returns the confirmed tracklets.
    pub fn step(&mut self, detections: &[Detection<T>], dt: T) -> Vec<TrackedOpponent<T>> {
        let kf = KfConfig { dt, ..self.kf };
        let cfg = self.cfg;

        // canonical detection order makes the step independent of input order
        let mut dets: Vec<Detection<T>> = detections
            .iter()
            .copied()
            .filter(|d| d.z[0].is_finite() && d.z[1].is_finite())
            .collect();
        dets.sort_by(|a, b| {
            let key = |d: &Detection<T>| [d.z[0], d.z[1], d.extent[0], d.extent[1]];
            key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal)
        });

        for t in &mut self.tracklets {
            t.kf.predict(&kf);
        }

        let active: Vec<usize> = (0..self.tracklets.len())
            .filter(|&i| self.tracklets[i].status != TrackStatus::Lost)
            .collect();
        let active_pos: Vec<[T; 2]> = active
            .iter()
            .map(|&i| self.tracklets[i].position())
            .collect();
        let det_pos: Vec<[T; 2]> = dets.iter().map(|d| d.z).collect();
        let m = associate(&active_pos, &det_pos, cfg.assoc_gate);

        let mut matched = vec![false; self.tracklets.len()];
        for &(a, di) in &m.pairs {
            let ti = active[a];
            if let Ok(upd) = kf_update(&self.tracklets[ti], &dets[di], &kf) {
                let t = &mut self.tracklets[ti];
                *t = upd;
                t.hit_count += 1;
                t.miss_count = 0;
                matched[ti] = true;
            }
        }

        let leftover_t: Vec<usize> = (0..self.tracklets.len()).filter(|&i| !matched[i]).collect();
        let reid_pairs = reid(
            &mut self.tracklets,
            &leftover_t,
            &dets,
            &m.unmatched_detections,
            &cfg,
            &kf,
        );
        let mut det_taken = vec![false; dets.len()];
        for &(_, di) in &m.pairs {
            det_taken[di] = true;
        }
        for &(ti, di) in &reid_pairs {
            matched[ti] = true;
            det_taken[di] = true;
        }

        for (ti, t) in self.tracklets.iter_mut().enumerate() {
            if matched[ti] {
                if t.status == TrackStatus::Tentative && t.hit_count >= cfg.n_init {
                    t.status = TrackStatus::Confirmed;
                    t.was_confirmed = true;
                }
                continue;
            }
            t.miss_count += 1;
            t.hit_count = 0;
            if t.status == TrackStatus::Confirmed && t.miss_count > cfg.max_coast {
                t.status = TrackStatus::Lost;
            }
        }
        self.tracklets.retain(|t| match t.status {
            // an unconfirmed hypothesis dies on its first miss
            TrackStatus::Tentative => t.miss_count == 0,
            _ => t.miss_count <= cfg.max_misses,
        });

        for (di, det) in dets.iter().enumerate() {
            if det_taken[di] {
                continue;
            }
            let mut t = Tracklet::spawn(self.next_id, det, &kf);
            if t.hit_count >= cfg.n_init {
                t.status = TrackStatus::Confirmed;
                t.was_confirmed = true;
            }
            self.next_id += 1;
            self.tracklets.push(t);
        }

        self.confirmed()
    }
}
