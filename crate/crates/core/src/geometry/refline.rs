use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::boxqp::solve_box_qp;
use super::{FrenetPose, GeometryError, TrackModel, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    RacingLine,
    ShortestPath,
    Centerline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefLineConfig {
    /// Lateral acceleration limit used to cap speeds in corners [m/s^2].
    pub a_lat_max: f64,
    pub vehicle_width: f64,
    /// Extra distance kept from the boundary on top of half the vehicle width [m].
    pub extra_margin: f64,
    /// Curvature floor in the speed cap [1/m].
    pub curvature_floor: f64,
    /// Node spacing of the offset optimization [m].
    pub coarse_spacing: f64,
}

impl Default for RefLineConfig {
    fn default() -> Self {
        Self {
            a_lat_max: 6.0,
            vehicle_width: 0.3,
            extra_margin: 0.05,
            curvature_floor: 1e-3,
            coarse_spacing: 0.25,
        }
    }
}

impl RefLineConfig {
    pub fn margin(&self) -> f64 {
        0.5 * self.vehicle_width + self.extra_margin
    }
}

/// A lateral offset profile plus target speeds, sampled on the track grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub kind: LineKind,
    pub offsets: Vec<f64>,
    pub speed: Vec<f64>,
    pub ds: f64,
    pub length: f64,
}

impl ReferenceLine {
    fn locate(&self, s: f64) -> (usize, usize, f64) {
        let n = self.offsets.len();
        let s = crate::Real::wrap(s, self.length);
        let i = ((s / self.ds) as usize).min(n - 1);
        let t = ((s - i as f64 * self.ds) / self.ds).clamp(0.0, 1.0);
        (i, (i + 1) % n, t)
    }

    pub fn offset_at(&self, s: f64) -> f64 {
        let (i, j, t) = self.locate(s);
        self.offsets[i] + t * (self.offsets[j] - self.offsets[i])
    }

    pub fn speed_at(&self, s: f64) -> f64 {
        let (i, j, t) = self.locate(s);
        self.speed[i] + t * (self.speed[j] - self.speed[i])
    }

    /// d'(s) by central difference on the grid.
    pub fn slope_at(&self, s: f64) -> f64 {
        (self.offset_at(s + self.ds) - self.offset_at(s - self.ds)) / (2.0 * self.ds)
    }

    /// Time to complete one lap following the speed profile [s].
    pub fn lap_time(&self) -> f64 {
        let n = self.speed.len();
        (0..n)
            .map(|i| 2.0 * self.ds / (self.speed[i] + self.speed[(i + 1) % n]))
            .sum()
    }

    /// Same line with every speed multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.speed.iter_mut().for_each(|v| *v *= k);
        out
    }

    /// Cartesian length of the line over one lap [m].
    pub fn path_length(&self, track: &TrackModel) -> f64 {
        let pts = self.cartesian(track);
        let n = pts.len();
        (0..n).map(|i| pts[i].dist(pts[(i + 1) % n])).sum()
    }

    pub fn cartesian(&self, track: &TrackModel) -> Vec<Vec2> {
        (0..self.offsets.len())
            .map(|i| track.frenet_to_cart(FrenetPose::new(i as f64 * self.ds, self.offsets[i])))
            .collect()
    }

    /// Heading of the line at `s` [rad].
    pub fn heading_at(&self, track: &TrackModel, s: f64) -> f64 {
        let a = track.frenet_to_cart(FrenetPose::new(s - self.ds, self.offset_at(s - self.ds)));
        let b = track.frenet_to_cart(FrenetPose::new(s + self.ds, self.offset_at(s + self.ds)));
        (b - a).angle()
    }
}

/// Signed curvature of the Cartesian path traced by `offsets` on the track
/// grid, estimated from heading changes over a stride of `stride` samples.
pub fn path_curvature(track: &TrackModel, offsets: &[f64], stride: usize) -> Vec<f64> {
    let n = offsets.len();
    let ds = track.ds();
    let pts: Vec<Vec2> = (0..n)
        .map(|i| track.frenet_to_cart(FrenetPose::new(i as f64 * ds, offsets[i])))
        .collect();
    (0..n)
        .map(|i| {
            let a = pts[(i + n - stride) % n];
            let b = pts[i];
            let c = pts[(i + stride) % n];
            let turn = super::wrap_angle((c - b).angle() - (b - a).angle());
            let arc = 0.5 * ((b - a).norm() + (c - b).norm());
            if arc > 0.0 {
                turn / arc
            } else {
                0.0
            }
        })
        .collect()
}

/// Curvature-capped speed profile for a path.
pub fn capped_speed(curvature: &[f64], lap_speed: f64, cfg: &RefLineConfig) -> Vec<f64> {
    curvature
        .iter()
        .map(|k| lap_speed.min((cfg.a_lat_max / k.abs().max(cfg.curvature_floor)).sqrt()))
        .collect()
}

/// Builds one of the three reference lines on `track`.
pub fn make_reference_line(
    track: &TrackModel,
    kind: LineKind,
    lap_speed: f64,
    cfg: &RefLineConfig,
) -> Result<ReferenceLine, GeometryError> {
    if !(lap_speed > 0.0 && lap_speed.is_finite()) {
        return Err(GeometryError::InvalidParameter(
            "lap_speed must be positive",
        ));
    }
    let margin = cfg.margin();
    let n = track.len();
    let ds = track.ds();
    for i in 0..n {
        if track.width_left()[i] <= margin || track.width_right()[i] <= margin {
            return Err(GeometryError::InfeasibleBounds {
                s: i as f64 * ds,
                margin,
            });
        }
    }

    let offsets = match kind {
        LineKind::Centerline => vec![0.0; n],
        LineKind::ShortestPath | LineKind::RacingLine => {
            optimize_offsets(track, kind, margin, cfg.coarse_spacing)
        }
    };
    let curvature = path_curvature(track, &offsets, 3);
    let speed = capped_speed(&curvature, lap_speed, cfg);
    Ok(ReferenceLine {
        kind,
        offsets,
        speed,
        ds,
        length: track.length(),
    })
}

fn optimize_offsets(track: &TrackModel, kind: LineKind, margin: f64, spacing: f64) -> Vec<f64> {
    let l = track.length();
    let m = ((l / spacing).round() as usize).max(8);
    let h = l / m as f64;
    let s_nodes: Vec<f64> = (0..m).map(|j| j as f64 * h).collect();
    let kappa = DVector::from_iterator(m, s_nodes.iter().map(|&s| track.curvature_at(s)));
    let lo: Vec<f64> = s_nodes
        .iter()
        .map(|&s| -(track.width_right_at(s) - margin))
        .collect();
    let hi: Vec<f64> = s_nodes
        .iter()
        .map(|&s| track.width_left_at(s) - margin)
        .collect();

    // periodic first and second difference operators
    let mut d1 = DMatrix::zeros(m, m);
    let mut d2 = DMatrix::zeros(m, m);
    for j in 0..m {
        d1[(j, j)] = -1.0;
        d1[(j, (j + 1) % m)] += 1.0;
        d2[(j, (j + m - 1) % m)] += 1.0 / (h * h);
        d2[(j, j)] += -2.0 / (h * h);
        d2[(j, (j + 1) % m)] += 1.0 / (h * h);
    }
    let d2t_d2 = d2.transpose() * &d2;

    let (hess, grad) = match kind {
        LineKind::RacingLine => {
            // sum (kappa + d'')^2 h with a small ridge for uniqueness
            let hess = (&d2t_d2 + DMatrix::identity(m, m) * 1e-3) * (2.0 * h);
            let grad = d2.transpose() * &kappa * (2.0 * h);
            (hess, grad)
        }
        _ => {
            // linearized length: sum (-kappa d) h + 0.5 (d')^2 h, plus light smoothing
            let hess = d1.transpose() * &d1 * (1.0 / h)
                + &d2t_d2 * (2e-4 * h)
                + DMatrix::identity(m, m) * 1e-8;
            let grad = -&kappa * h;
            (hess, grad)
        }
    };
    let coarse = solve_box_qp(&hess, &grad, &lo, &hi);

    let ds = track.ds();
    (0..track.len())
        .map(|i| {
            let s = i as f64 * ds;
            let x = s / h;
            let j = (x as usize).min(m - 1);
            let t = x - j as f64;
            let v = coarse[j] + t * (coarse[(j + 1) % m] - coarse[j]);
            v.clamp(
                -(track.width_right()[i] - margin),
                track.width_left()[i] - margin,
            )
        })
        .collect()
}
