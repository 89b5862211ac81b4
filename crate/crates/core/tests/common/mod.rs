#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use overtake_core::geometry::{shapes, LineKind, ReferenceLine, TrackModel};
use overtake_core::gpr::{OpponentProfile, ProfileConfig, ProfileObservation};
use overtake_core::planner::OvertakeProblem;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn scenario(name: &str) -> PathBuf {
    crate_dir().join("scenarios").join(name)
}

pub fn oval() -> TrackModel {
    let (p, wl, wr) = shapes::oval(10.0, 3.5, 1.1, 0.1);
    TrackModel::from_samples(&p, &wl, &wr).unwrap()
}

pub fn circle(r: f64) -> TrackModel {
    let (p, wl, wr) = shapes::circle(
        r,
        (2.0 * std::f64::consts::PI * r / 0.1).round() as usize,
        1.0,
    );
    TrackModel::from_samples(&p, &wl, &wr).unwrap()
}

/// Centerline plan with the same speed everywhere.
pub fn constant_plan(track: &TrackModel, v: f64) -> ReferenceLine {
    ReferenceLine {
        kind: LineKind::Centerline,
        offsets: vec![0.0; track.len()],
        speed: vec![v; track.len()],
        ds: track.ds(),
        length: track.length(),
    }
}

/// Straight corridor of `n` samples at 5 cm with the target pinned at
/// `d_opp` over the middle third.
pub fn corridor(n: usize, half_width: f64, d_opp: f64, c_min: f64) -> OvertakeProblem {
    let ds = 0.05;
    OvertakeProblem {
        track_length: 100.0,
        ds,
        indices: (0..n).collect(),
        grid: (0..n).map(|i| i as f64 * ds).collect(),
        d_ref: vec![0.0; n],
        v_ref: vec![3.0; n],
        d_opp: vec![d_opp; n],
        kappa_c: vec![0.0; n],
        d_min: vec![-half_width; n],
        d_max: vec![half_width; n],
        in_roc: (0..n).map(|i| i >= n / 3 && i < 2 * n / 3).collect(),
        static_obstacles: Vec::new(),
        c_min,
        kappa_max: 1.0 / 0.35,
        vehicle_width: 0.3,
        vehicle_length: 0.5,
        w_smooth: 10.0,
        w_ref: 1.0,
        n_fixed: 2,
        max_iter: 50,
        a_lat_max: 6.0,
        curvature_floor: 1e-3,
        target_id: 1,
    }
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Exhaustive gated assignment: most pairs first, then least total distance.
pub fn brute_force_assignment(tracks: &[[f64; 2]], dets: &[[f64; 2]], gate: f64) -> (usize, f64) {
    let n = tracks.len().max(dets.len());
    let mut best = (0usize, 0.0f64);
    for perm in permutations(n) {
        let mut pairs = 0;
        let mut cost = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            if i < tracks.len() && j < dets.len() {
                let d = (tracks[i][0] - dets[j][0]).hypot(tracks[i][1] - dets[j][1]);
                if d <= gate {
                    pairs += 1;
                    cost += d;
                }
            }
        }
        if pairs > best.0 || (pairs == best.0 && cost < best.1) {
            best = (pairs, cost);
        }
    }
    best
}

/// Ready profile of an opponent driving the centerline at a constant `v`.
pub fn constant_profile(id: u64, length: f64, v: f64) -> OpponentProfile<f64> {
    let mut p = OpponentProfile::new(id, length, ProfileConfig::for_track(length));
    for k in 0..400 {
        p.ingest(ProfileObservation {
            s: k as f64 * length / 400.0,
            d: 0.0,
            vs: v,
        })
        .unwrap();
    }
    p.fitted().unwrap();
    p
}

/// Catch-up grid for the RoC oracle: (gap, v_ego, v_opp).
pub fn roc_grid() -> Vec<(f64, f64, f64)> {
    let gaps = [1.5, 2.5, 4.0, 6.0, 8.0];
    let speeds = [(2.0, 1.0), (3.0, 1.5), (4.0, 2.5), (5.0, 3.5)];
    gaps.iter()
        .flat_map(|&g| speeds.iter().map(move |&(ve, vo)| (g, ve, vo)))
        .collect()
}
