use super::{OvertakeTrajectory, PlannerConfig};
use crate::geometry::{path_curvature, ReferenceLine, TrackModel};

/// Writes the trajectory into a copy of `plan`.
///
/// The offset change relative to the plan is box-filtered around both seams,
/// clamped to the track, and speeds in the changed span are re-capped by the
/// curvature of the new path.
pub fn splice(
    traj: &OvertakeTrajectory,
    plan: &ReferenceLine,
    track: &TrackModel,
    cfg: &PlannerConfig,
) -> ReferenceLine {
    let n_track = plan.offsets.len();
    let n = traj.samples.len();
    debug_assert_eq!(n_track, track.len());
    if n == 0 {
        return plan.clone();
    }
    let r = cfg.seam_radius;
    let pad = 2 * r;
    // grid-local overlay with zero padding on both sides
    let mut delta = vec![0.0; n + 2 * pad];
    for (i, p) in traj.samples.iter().enumerate() {
        delta[i + pad] = p.d - plan.offsets[traj.indices[i]];
    }
    let mut smoothed = delta.clone();
    if r > 0 {
        for seam in [pad, pad + n - 1] {
            let lo = seam.saturating_sub(pad).max(r);
            let hi = (seam + pad).min(delta.len() - 1 - r);
            for k in lo..=hi {
                smoothed[k] = delta[k - r..=k + r].iter().sum::<f64>() / (2 * r + 1) as f64;
            }
        }
    }

    let first = traj.indices[0] as i64 - pad as i64;
    let index = |k: usize| (first + k as i64).rem_euclid(n_track as i64) as usize;
    let half = 0.5 * cfg.vehicle_width;
    let mut out = plan.clone();
    let mut touched = Vec::new();
    for (k, &dv) in smoothed.iter().enumerate() {
        if dv != 0.0 {
            let idx = index(k);
            let lo = -track.width_right()[idx] + half;
            let hi = track.width_left()[idx] - half;
            out.offsets[idx] = (plan.offsets[idx] + dv).clamp(lo, hi);
            touched.push((k, idx));
        }
    }
    if touched.is_empty() {
        return out;
    }
    let curv = path_curvature(track, &out.offsets, 3);
    for (k, idx) in touched {
        let cap = (cfg.a_lat_max / curv[idx].abs().max(cfg.curvature_floor)).sqrt();
        let base = if k >= pad && k < pad + n {
            traj.samples[k - pad].v.max(0.0)
        } else {
            plan.speed[idx]
        };
        out.speed[idx] = base.min(cap);
    }
    out
}

/// Largest change of slope between consecutive segments within `radius`
/// samples of `index`.
pub fn seam_slope_jump(line: &ReferenceLine, index: usize, radius: usize) -> f64 {
    let n = line.offsets.len() as i64;
    let at = |k: i64| line.offsets[k.rem_euclid(n) as usize];
    let c = index as i64;
    (c - radius as i64..=c + radius as i64)
        .map(|k| (((at(k + 1) - at(k)) - (at(k) - at(k - 1))) / line.ds).abs())
        .fold(0.0, f64::max)
}
