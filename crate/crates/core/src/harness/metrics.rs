use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::sim::{Event, EventKind, TruthRecord};
use crate::tracker::{associate, TrackStatus, TrackerTraceRecord};

/// Matching gate between tracklets and ground truth [m].
pub const METRIC_GATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub e_pos: f64,
    pub e_vel: f64,
    /// Percent.
    pub tpr: f64,
    /// Percent.
    pub fdr: f64,
    pub id_switches: u64,
    pub matched: u64,
    pub visible_frames: u64,
    pub confirmed_frames: u64,
}

/// Frame-by-frame comparison of confirmed tracklets against ground truth.
///
/// Records are paired by position in the two slices and must carry the same
/// timestamps.
pub fn compute_tracking_metrics(
    traces: &[TrackerTraceRecord],
    truth: &[TruthRecord],
) -> Result<TrackingMetrics, HarnessError> {
    if traces.is_empty() || truth.is_empty() {
        return Err(HarnessError::Metrics("empty trace or ground truth".into()));
    }
    if traces.len() != truth.len() {
        return Err(HarnessError::Metrics(format!(
            "{} trace records but {} truth records",
            traces.len(),
            truth.len()
        )));
    }
    let mut sq_pos = 0.0;
    let mut sq_vel = 0.0;
    let mut matched = 0u64;
    let mut matched_visible = 0u64;
    let mut visible = 0u64;
    let mut confirmed = 0u64;
    let mut switches = 0u64;
    let mut owner: BTreeMap<u64, u64> = BTreeMap::new();

    for (k, (tr, gt)) in traces.iter().zip(truth).enumerate() {
        if (tr.t - gt.t).abs() > 1e-6 {
            return Err(HarnessError::Metrics(format!(
                "record {k}: trace t = {} but truth t = {}",
                tr.t, gt.t
            )));
        }
        let tracks: Vec<_> = tr
            .tracklets
            .iter()
            .filter(|x| x.status == TrackStatus::Confirmed)
            .collect();
        let tpos: Vec<[f64; 2]> = tracks.iter().map(|x| x.p).collect();
        let gpos: Vec<[f64; 2]> = gt.opponents.iter().map(|o| o.p).collect();
        let m = associate(&tpos, &gpos, METRIC_GATE);

        confirmed += tracks.len() as u64;
        visible += gt.opponents.iter().filter(|o| o.visible).count() as u64;
        for &(ti, gi) in &m.pairs {
            let (t, o) = (tracks[ti], &gt.opponents[gi]);
            sq_pos += sq(t.p[0] - o.p[0]) + sq(t.p[1] - o.p[1]);
            sq_vel += sq(t.v[0] - o.v[0]) + sq(t.v[1] - o.v[1]);
            matched += 1;
            if o.visible {
                matched_visible += 1;
            }
            if let Some(prev) = owner.insert(o.id, t.id) {
                if prev != t.id {
                    switches += 1;
                }
            }
        }
    }
    let rmse = |s: f64| {
        if matched > 0 {
            (s / matched as f64).sqrt()
        } else {
            0.0
        }
    };
    Ok(TrackingMetrics {
        e_pos: rmse(sq_pos),
        e_vel: rmse(sq_vel),
        tpr: if visible > 0 {
            100.0 * matched_visible as f64 / visible as f64
        } else {
            0.0
        },
        fdr: if confirmed > 0 {
            100.0 * (confirmed - matched) as f64 / confirmed as f64
        } else {
            0.0
        },
        id_switches: switches,
        matched,
        visible_frames: visible,
        confirmed_frames: confirmed,
    })
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Wall-clock statistics of the planning loop [ms]. Kept out of the report so
/// that reports stay reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LoopTiming {
    pub cycles: u64,
    pub mean_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

impl LoopTiming {
    pub fn from_samples(ms: &[f64]) -> Self {
        if ms.is_empty() {
            return Self::default();
        }
        let mut v = ms.to_vec();
        v.sort_by(f64::total_cmp);
        let p95 = v[((0.95 * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        Self {
            cycles: v.len() as u64,
            mean_ms: v.iter().sum::<f64>() / v.len() as f64,
            p95_ms: p95,
            max_ms: v[v.len() - 1],
        }
    }
}

/// Outcome of one run in the paper's units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub mode: crate::sim::Mode,
    pub stop: crate::sim::StopCondition,
    pub sim_time: f64,
    pub e_pos: Option<f64>,
    pub e_vel: Option<f64>,
    pub tpr: Option<f64>,
    pub fdr: Option<f64>,
    pub id_switches: Option<u64>,
    pub n_ot: u64,
    pub n_crash: u64,
    pub r_otc: Option<f64>,
    /// Configured speed scaler per opponent.
    pub s_scaler: Vec<f64>,
    pub laps: usize,
    pub mean_lap: Option<f64>,
    pub total_time: Option<f64>,
    /// Why each `null` field above is missing.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub null_reasons: BTreeMap<String, String>,
    #[serde(skip)]
    pub timing: LoopTiming,
}

/// Overtake success rate, `None` when there was neither an overtake nor a crash.
pub fn overtake_rate(n_ot: u64, n_crash: u64) -> Option<f64> {
    (n_ot + n_crash > 0).then(|| n_ot as f64 / (n_ot + n_crash) as f64)
}

/// Per-overtake segment durations: time from the previous overtake (or the
/// start) to each overtake.
pub fn overtake_segments(events: &[Event]) -> Vec<f64> {
    let mut prev = 0.0;
    let mut out = Vec::new();
    for e in events {
        if let EventKind::Overtake { .. } = e.kind {
            out.push(e.t - prev);
            prev = e.t;
        }
    }
    out
}

impl MetricsReport {
    /// Fills the race fields from the event log.
    pub fn race_fields(&mut self, events: &[Event], lap_times: &[f64]) {
        self.n_ot = events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Overtake { .. }))
            .count() as u64;
        self.n_crash = events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Crash { .. }))
            .count() as u64;
        self.r_otc = overtake_rate(self.n_ot, self.n_crash);
        if self.r_otc.is_none() {
            self.null_reasons
                .insert("r_otc".into(), "no overtakes and no crashes".into());
        }
        self.laps = lap_times.len();
        self.mean_lap =
            (!lap_times.is_empty()).then(|| lap_times.iter().sum::<f64>() / lap_times.len() as f64);
        if self.mean_lap.is_none() {
            self.null_reasons
                .insert("mean_lap".into(), "no completed lap".into());
        }
        let seg = overtake_segments(events);
        self.total_time = (!seg.is_empty()).then(|| seg.iter().sum());
        if self.total_time.is_none() {
            self.null_reasons
                .insert("total_time".into(), "no overtakes".into());
        }
    }

    pub fn tracking_fields(&mut self, m: Result<TrackingMetrics, HarnessError>) {
        match m {
            Ok(m) if m.matched > 0 => {
                self.e_pos = Some(m.e_pos);
                self.e_vel = Some(m.e_vel);
                self.tpr = Some(m.tpr);
                self.fdr = Some(m.fdr);
                self.id_switches = Some(m.id_switches);
            }
            Ok(_) => {
                for k in ["e_pos", "e_vel", "tpr", "fdr", "id_switches"] {
                    self.null_reasons
                        .insert(k.into(), "no tracklet matched an opponent".into());
                }
            }
            Err(e) => {
                for k in ["e_pos", "e_vel", "tpr", "fdr", "id_switches"] {
                    self.null_reasons.insert(k.into(), e.to_string());
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TruthOpponent;
    use crate::tracker::TraceTracklet;

    fn truth(t: f64, ps: &[(u64, [f64; 2])]) -> TruthRecord {
        TruthRecord {
            t,
            opponents: ps
                .iter()
                .map(|&(id, p)| TruthOpponent {
                    id,
                    p,
                    v: [1.0, 0.0],
                    visible: true,
                })
                .collect(),
        }
    }

    fn trace(t: f64, ps: &[(u64, [f64; 2])]) -> TrackerTraceRecord {
        TrackerTraceRecord {
            t,
            tracklets: ps
                .iter()
                .map(|&(id, p)| TraceTracklet {
                    id,
                    p,
                    v: [1.0, 0.0],
                    status: TrackStatus::Confirmed,
                })
                .collect(),
            detections: vec![],
        }
    }

    #[test]
    fn perfect_tracker() {
        let gt: Vec<_> = (0..50)
            .map(|k| truth(k as f64, &[(1, [k as f64, 0.0]), (2, [k as f64, 3.0])]))
            .collect();
        let tr: Vec<_> = (0..50)
            .map(|k| trace(k as f64, &[(7, [k as f64, 0.0]), (9, [k as f64, 3.0])]))
            .collect();
        let m = compute_tracking_metrics(&tr, &gt).unwrap();
        assert_eq!(
            (m.e_pos, m.e_vel, m.tpr, m.fdr, m.id_switches),
            (0.0, 0.0, 100.0, 0.0, 0)
        );
    }

    #[test]
    fn ghost_frames_count_as_false() {
        let gt: Vec<_> = (0..100)
            .map(|k| truth(k as f64, &[(1, [0.0, 0.0])]))
            .collect();
        let tr: Vec<_> = (0..100)
            .map(|k| {
                if k < 10 {
                    trace(k as f64, &[(1, [0.0, 0.0]), (5, [4.0, 4.0])])
                } else {
                    trace(k as f64, &[(1, [0.0, 0.0])])
                }
            })
            .collect();
        let m = compute_tracking_metrics(&tr, &gt).unwrap();
        assert!((m.fdr - 100.0 * 10.0 / 110.0).abs() < 1e-12);
    }

    #[test]
    fn swap_counts_once() {
        let gt: Vec<_> = (0..20)
            .map(|k| truth(k as f64, &[(1, [0.0, 0.0]), (2, [5.0, 0.0])]))
            .collect();
        let tr: Vec<_> = (0..20)
            .map(|k| {
                if k < 10 {
                    trace(k as f64, &[(3, [0.0, 0.0]), (4, [5.0, 0.0])])
                } else {
                    trace(k as f64, &[(3, [0.0, 0.0]), (6, [5.0, 0.0])])
                }
            })
            .collect();
        assert_eq!(compute_tracking_metrics(&tr, &gt).unwrap().id_switches, 1);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(compute_tracking_metrics(&[], &[]).is_err());
    }

    #[test]
    fn segments_sum_to_last_overtake() {
        let ev = [
            Event {
                t: 3.0,
                kind: EventKind::Overtake { opponent: 1 },
            },
            Event {
                t: 4.0,
                kind: EventKind::LapComplete {
                    lap: 1,
                    lap_time: 4.0,
                },
            },
            Event {
                t: 7.5,
                kind: EventKind::Overtake { opponent: 2 },
            },
        ];
        assert_eq!(overtake_segments(&ev), vec![3.0, 4.5]);
    }
}
