use serde::{Deserialize, Serialize};

use super::{OvertakeProblem, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Bound { i: usize, excess: f64 },
    Target { i: usize, excess: f64 },
    Obstacle { i: usize, id: u64, excess: f64 },
    Curvature { i: usize, excess: f64 },
    Endpoint { i: usize, excess: f64 },
}

/// Path curvature at interior sample `i` for offsets `d`, linearized in `d`.
pub fn discrete_curvature(p: &OvertakeProblem, d: &[f64], i: usize) -> f64 {
    let k = p.kappa_c[i];
    k + k * k * d[i] + (d[i - 1] - 2.0 * d[i] + d[i + 1]) / (p.ds * p.ds)
}

/// Lists every constraint of `p` that `d` violates by more than `tol`.
pub fn check_trajectory(p: &OvertakeProblem, side: Side, d: &[f64], tol: f64) -> Vec<Violation> {
    let n = p.len();
    let mut out = Vec::new();
    if d.len() != n || d.iter().any(|v| !v.is_finite()) {
        out.push(Violation::Endpoint {
            i: 0,
            excess: f64::INFINITY,
        });
        return out;
    }
    for i in 0..n {
        let (lo, hi) = p.center_bounds(i);
        let e = (lo - d[i]).max(d[i] - hi);
        if e > tol {
            out.push(Violation::Bound { i, excess: e });
        }
        if p.in_roc[i] {
            let gap = match side {
                Side::Left => d[i] - p.d_opp[i],
                Side::Right => p.d_opp[i] - d[i],
            };
            if p.c_min - gap > tol {
                out.push(Violation::Target {
                    i,
                    excess: p.c_min - gap,
                });
            }
        }
        for o in &p.static_obstacles {
            if p.obstacle_covers(o, i) {
                let e = p.c_min - (d[i] - o.d).abs();
                if e > tol {
                    out.push(Violation::Obstacle {
                        i,
                        id: o.id,
                        excess: e,
                    });
                }
            }
        }
        if i > 0 && i + 1 < n {
            let e = discrete_curvature(p, d, i).abs() - p.kappa_max;
            if e > tol {
                out.push(Violation::Curvature { i, excess: e });
            }
        }
    }
    let k = p.n_fixed.min(n);
    for i in (0..k).chain(n - k..n) {
        let e = (d[i] - p.d_ref[i]).abs();
        if e > tol {
            out.push(Violation::Endpoint { i, excess: e });
        }
    }
    out
}
