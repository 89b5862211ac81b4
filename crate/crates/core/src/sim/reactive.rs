//! Follow-the-gap steering for the reactive opponent.

use serde::{Deserialize, Serialize};

use super::shapes::{ray_hit, Footprint};
use crate::geometry::{wrap_angle, TrackModel, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GapConfig {
    pub n_rays: usize,
    /// Total scan angle [rad].
    pub fan: f64,
    pub max_range: f64,
    /// Rays at least this long count as free [m].
    pub free_range: f64,
    /// Bounded turn rate [rad/s].
    pub max_turn_rate: f64,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            n_rays: 108,
            fan: 270f64.to_radians(),
            max_range: 6.0,
            free_range: 2.5,
            max_turn_rate: 4.0,
        }
    }
}

/// Range scan from `origin` with heading `psi`. Returns `(angle, range)` per ray.
pub fn range_scan(
    track: &TrackModel,
    s_hint: f64,
    origin: Vec2,
    psi: f64,
    obstacles: &[Footprint],
    cfg: &GapConfig,
) -> Vec<(f64, f64)> {
    let segs = boundary_segments(track, s_hint, cfg.max_range + 1.0);
    let n = cfg.n_rays.max(2);
    (0..n)
        .map(|j| {
            let a = psi - 0.5 * cfg.fan + cfg.fan * j as f64 / (n - 1) as f64;
            let dir = Vec2::from_angle(a);
            let mut r = cfg.max_range;
            for &(p, q) in &segs {
                if let Some(t) = ray_hit(origin, dir, p, q) {
                    r = r.min(t);
                }
            }
            for f in obstacles {
                for (p, q) in f.edges() {
                    if let Some(t) = ray_hit(origin, dir, p, q) {
                        r = r.min(t);
                    }
                }
            }
            (a, r)
        })
        .collect()
}

fn boundary_segments(track: &TrackModel, s: f64, reach: f64) -> Vec<(Vec2, Vec2)> {
    let stride = 4usize;
    let n = track.len();
    let span = ((reach / track.ds()).ceil() as usize / stride + 1) * stride;
    let center = (track.wrap_s(s) / track.ds()) as usize;
    let mut out = Vec::new();
    let mut k = 0;
    while k < 2 * span {
        let i = (center + n - span + k) % n;
        let j = (i + stride) % n;
        for side in [1.0, -1.0] {
            let pi = boundary_point(track, i, side);
            let pj = boundary_point(track, j, side);
            out.push((pi, pj));
        }
        k += stride;
    }
    out
}

fn boundary_point(track: &TrackModel, i: usize, side: f64) -> Vec2 {
    let s = i as f64 * track.ds();
    let d = if side > 0.0 {
        track.width_left()[i]
    } else {
        -track.width_right()[i]
    };
    track.frenet_to_cart(crate::geometry::FrenetPose::new(s, d))
}

/// Heading of the center of the widest run of free rays. Ties go to the run
/// closest to `prefer`. Falls back to the longest ray when nothing is free.
pub fn gap_heading(scan: &[(f64, f64)], free_range: f64, prefer: f64) -> f64 {
    let mut best: Option<(usize, f64, f64)> = None;
    let mut j = 0;
    while j < scan.len() {
        if scan[j].1 < free_range {
            j += 1;
            continue;
        }
        let start = j;
        while j < scan.len() && scan[j].1 >= free_range {
            j += 1;
        }
        let width = j - start;
        let center = 0.5 * (scan[start].0 + scan[j - 1].0);
        let off = wrap_angle(center - prefer).abs();
        let better = match best {
            None => true,
            Some((w, _, o)) => width > w || (width == w && off < o),
        };
        if better {
            best = Some((width, center, off));
        }
    }
    match best {
        Some((_, c, _)) => c,
        None => {
            scan.iter()
                .fold((prefer, f64::NEG_INFINITY), |acc, &(a, r)| {
                    if r > acc.1 {
                        (a, r)
                    } else {
                        acc
                    }
                })
                .0
        }
    }
}

/// New heading after turning toward `target` at a bounded rate.
pub fn steer(psi: f64, target: f64, dt: f64, max_rate: f64) -> f64 {
    let limit = max_rate * dt;
    psi + wrap_angle(target - psi).clamp(-limit, limit)
}
