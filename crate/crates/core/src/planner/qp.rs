//! Primal-dual interior-point solver for the lateral-offset QP.
//!
//! All constraints are rows of at most three consecutive entries, so every
//! Newton system is pentadiagonal and is solved in linear time.

use super::banded::{Penta, PentaLdl};
use super::check::{check_trajectory, discrete_curvature};
use super::{OvertakeProblem, OvertakeTrajectory, PlannerError, Side, TrajectorySample};
use crate::Real;

const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct Row {
    start: usize,
    coef: [f64; 3],
    width: usize,
    h: f64,
}

impl Row {
    fn dot(&self, x: &[f64]) -> f64 {
        (0..self.width)
            .map(|k| self.coef[k] * x[self.start + k])
            .sum()
    }

    fn scatter(&self, w: f64, out: &mut [f64]) {
        for k in 0..self.width {
            out[self.start + k] += w * self.coef[k];
        }
    }
}

/// Per-sample interval after bounds, target clearance, obstacle clearance and
/// endpoint pinning. Returns `(lo, hi, fixed)`.
fn tightened_box(
    p: &OvertakeProblem,
    side: Side,
) -> Result<(Vec<f64>, Vec<f64>, Vec<bool>), PlannerError> {
    let n = p.len();
    let c = p.c_min;
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in 0..n {
        let (a, b) = p.center_bounds(i);
        lo[i] = a;
        hi[i] = b;
        if p.in_roc[i] {
            match side {
                Side::Left => lo[i] = lo[i].max(p.d_opp[i] + c),
                Side::Right => hi[i] = hi[i].min(p.d_opp[i] - c),
            }
        }
    }

    let mut obstacles = p.static_obstacles.clone();
    obstacles.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.id.cmp(&b.id)));
    for o in &obstacles {
        let cover: Vec<usize> = (0..n).filter(|&i| p.obstacle_covers(o, i)).collect();
        let left_ok = cover.iter().all(|&i| hi[i] >= o.d + c);
        let right_ok = cover.iter().all(|&i| lo[i] <= o.d - c);
        let left_shift: f64 = cover
            .iter()
            .map(|&i| (o.d + c - p.d_ref[i].clamp(lo[i], hi[i])).max(0.0))
            .sum();
        let right_shift: f64 = cover
            .iter()
            .map(|&i| (p.d_ref[i].clamp(lo[i], hi[i]) - (o.d - c)).max(0.0))
            .sum();
        let go_left = match (left_ok, right_ok) {
            (true, true) => left_shift <= right_shift,
            (false, true) => false,
            _ => true,
        };
        for &i in &cover {
            if go_left {
                lo[i] = lo[i].max(o.d + c);
            } else {
                hi[i] = hi[i].min(o.d - c);
            }
        }
    }

    let mut fixed = vec![false; n];
    let k = p.n_fixed;
    for i in (0..k).chain(n - k..n) {
        let r = p.d_ref[i];
        if r < lo[i] - 1e-12 || r > hi[i] + 1e-12 {
            return Err(PlannerError::Infeasible {
                s: p.grid[i].wrap(p.track_length),
            });
        }
        lo[i] = r;
        hi[i] = r;
        fixed[i] = true;
    }
    for i in 0..n {
        if lo[i] > hi[i] + 1e-12 {
            return Err(PlannerError::Infeasible {
                s: p.grid[i].wrap(p.track_length),
            });
        }
        if !fixed[i] && hi[i] - lo[i] <= 1e-10 {
            let m = 0.5 * (lo[i] + hi[i]);
            lo[i] = m;
            hi[i] = m;
            fixed[i] = true;
        }
    }
    Ok((lo, hi, fixed))
}

/// Solves the overtaking QP for a committed side.
///
/// The returned trajectory is the best iterate that passes the independent
/// constraint check; `feasible` is false when none did within the iteration
/// budget.
pub fn solve_overtake(p: &OvertakeProblem, side: Side) -> Result<OvertakeTrajectory, PlannerError> {
    p.validate()?;
    let n = p.len();
    let (lo, hi, fixed) = tightened_box(p, side)?;

    // objective, scaled so that the largest Hessian entry is O(1)
    let h2 = p.ds * p.ds;
    let mut hess = Penta::zeros(n);
    for i in 1..n - 1 {
        hess.add_outer(i - 1, &[1.0, -2.0, 1.0], 2.0 * p.w_smooth / (h2 * h2));
    }
    for v in hess.d0.iter_mut() {
        *v += 2.0 * p.w_ref;
    }
    let scale = 1.0 / hess.d0.iter().fold(0.0f64, |a, &b| a.max(b));
    for v in hess
        .d0
        .iter_mut()
        .chain(hess.d1.iter_mut())
        .chain(hess.d2.iter_mut())
    {
        *v *= scale;
    }
    let q: Vec<f64> = p
        .d_ref
        .iter()
        .map(|&r| -2.0 * p.w_ref * r * scale)
        .collect();

    let mut rows = Vec::new();
    for i in 0..n {
        if !fixed[i] {
            rows.push(Row {
                start: i,
                coef: [-1.0, 0.0, 0.0],
                width: 1,
                h: -lo[i],
            });
            rows.push(Row {
                start: i,
                coef: [1.0, 0.0, 0.0],
                width: 1,
                h: hi[i],
            });
        }
    }
    for i in 1..n - 1 {
        if fixed[i - 1] && fixed[i] && fixed[i + 1] {
            continue;
        }
        let k = p.kappa_c[i];
        let mid = -2.0 + k * k * h2;
        rows.push(Row {
            start: i - 1,
            coef: [1.0, mid, 1.0],
            width: 3,
            h: (p.kappa_max - k) * h2,
        });
        rows.push(Row {
            start: i - 1,
            coef: [-1.0, -mid, -1.0],
            width: 3,
            h: (p.kappa_max + k) * h2,
        });
    }
    let m = rows.len();

    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            if fixed[i] {
                lo[i]
            } else {
                let eps = (0.25 * (hi[i] - lo[i])).min(0.05);
                p.d_ref[i].clamp(lo[i] + eps, hi[i] - eps)
            }
        })
        .collect();
    let mut s: Vec<f64> = rows.iter().map(|r| (r.h - r.dot(&x)).max(1e-3)).collect();
    let mut z = vec![1.0; m];

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    let h_norm = rows.iter().fold(1.0f64, |a, r| a.max(r.h.abs()));
    let q_norm = q.iter().fold(1.0f64, |a, &b| a.max(b.abs()));

    for it in 1..=p.max_iter {
        iterations = it;
        let mut r_d = hess.mul(&x);
        for i in 0..n {
            r_d[i] += q[i];
        }
        for (j, r) in rows.iter().enumerate() {
            r.scatter(z[j], &mut r_d);
        }
        for i in 0..n {
            if fixed[i] {
                r_d[i] = 0.0;
            }
        }
        let r_p: Vec<f64> = rows
            .iter()
            .zip(&s)
            .map(|(r, &sj)| r.dot(&x) + sj - r.h)
            .collect();
        let mu = s.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() / m.max(1) as f64;
        let rp_inf = r_p.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let rd_inf = r_d.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if rp_inf <= 1e-11 * h_norm && rd_inf <= 1e-11 * q_norm && mu <= 1e-13 {
            break;
        }

        let w: Vec<f64> = z.iter().zip(&s).map(|(a, b)| a / b).collect();
        let mut k = hess.clone();
        for (j, r) in rows.iter().enumerate() {
            k.add_outer(r.start, &r.coef[..r.width], w[j]);
        }
        for i in 0..n {
            if fixed[i] {
                k.pin(i);
            }
        }
        let Some(ldl) = PentaLdl::factor(&k) else {
            break;
        };

        let direction = |r_c: &[f64]| {
            let mut rhs: Vec<f64> = r_d.iter().map(|v| -v).collect();
            for (j, r) in rows.iter().enumerate() {
                r.scatter(-(w[j] * r_p[j] - r_c[j] / s[j]), &mut rhs);
            }
            for i in 0..n {
                if fixed[i] {
                    rhs[i] = 0.0;
                }
            }
            let dx = ldl.solve(&rhs);
            let gdx: Vec<f64> = rows.iter().map(|r| r.dot(&dx)).collect();
            let dz: Vec<f64> = (0..m)
                .map(|j| w[j] * (gdx[j] + r_p[j]) - r_c[j] / s[j])
                .collect();
            let ds: Vec<f64> = (0..m).map(|j| -r_p[j] - gdx[j]).collect();
            (dx, ds, dz)
        };
        let max_step = |ds: &[f64], dz: &[f64]| {
            let mut a = 1.0f64;
            for j in 0..m {
                if ds[j] < 0.0 {
                    a = a.min(-s[j] / ds[j]);
                }
                if dz[j] < 0.0 {
                    a = a.min(-z[j] / dz[j]);
                }
            }
            a
        };

        let r_c: Vec<f64> = s.iter().zip(&z).map(|(a, b)| a * b).collect();
        let (_, ds_a, dz_a) = direction(&r_c);
        let a_aff = max_step(&ds_a, &dz_a);
        let mu_aff = (0..m)
            .map(|j| (s[j] + a_aff * ds_a[j]) * (z[j] + a_aff * dz_a[j]))
            .sum::<f64>()
            / m.max(1) as f64;
        let sigma = (mu_aff / mu).powi(3).min(1.0);
        let r_c: Vec<f64> = (0..m)
            .map(|j| s[j] * z[j] + ds_a[j] * dz_a[j] - sigma * mu)
            .collect();
        let (dx, ds_c, dz_c) = direction(&r_c);
        let alpha = (0.99 * max_step(&ds_c, &dz_c)).min(1.0);

        for i in 0..n {
            x[i] += alpha * dx[i];
        }
        for j in 0..m {
            s[j] += alpha * ds_c[j];
            z[j] += alpha * dz_c[j];
        }

        if check_trajectory(p, side, &x, FEAS_TOL).is_empty() {
            let j = p.cost(&x);
            if best.as_ref().is_none_or(|(b, _)| j <= *b) {
                history.push(j);
                best = Some((j, x.clone()));
            }
        }
    }

    let (feasible, d) = match best {
        Some((_, d)) => (true, d),
        None => (false, x),
    };
    Ok(OvertakeTrajectory {
        samples: trajectory_samples(p, &d),
        indices: p.indices.clone(),
        side,
        cost: p.cost(&d),
        feasible,
        iterations,
        cost_history: history,
    })
}

fn trajectory_samples(p: &OvertakeProblem, d: &[f64]) -> Vec<TrajectorySample> {
    let n = p.len();
    (0..n)
        .map(|i| {
            let kappa = discrete_curvature(p, d, i.clamp(1, n - 2));
            let cap = (p.a_lat_max / kappa.abs().max(p.curvature_floor)).sqrt();
            TrajectorySample {
                s: p.grid[i].wrap(p.track_length),
                d: d[i],
                v: p.v_ref[i].min(cap),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::tests::corridor;
    use crate::planner::StaticObstacle;

    #[test]
    fn unconstrained_returns_reference() {
        let mut p = corridor(80, 1.0, 5.0, 0.3);
        p.d_ref = (0..80).map(|i| 0.1 - 0.002 * i as f64).collect();
        let t = solve_overtake(&p, Side::Right).unwrap();
        assert!(t.feasible);
        for (a, b) in t.offsets().iter().zip(&p.d_ref) {
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn pinned_opponent_left_pass() {
        let p = corridor(120, 1.0, 0.0, 0.3);
        let t = solve_overtake(&p, Side::Left).unwrap();
        assert!(
            t.feasible,
            "{:?}",
            check_trajectory(&p, Side::Left, &t.offsets(), 1e-6)
        );
        let d = t.offsets();
        for i in 0..120 {
            if p.in_roc[i] {
                assert!(d[i] >= 0.3 - 1e-6);
            }
        }
        assert!(d[0].abs() < 1e-9 && d[119].abs() < 1e-9);
        assert!(t.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn static_obstacle_stacks_clearance() {
        let mut p = corridor(120, 1.0, 0.0, 0.3);
        p.static_obstacles.push(StaticObstacle {
            id: 9,
            s: 3.0,
            d: 0.5,
            extent: [0.5, 0.3],
        });
        let t = solve_overtake(&p, Side::Left).unwrap();
        assert!(t.feasible);
        let d = t.offsets();
        assert!(d[60] >= 0.8 - 1e-6, "{}", d[60]);
    }

    #[test]
    fn empty_box_is_infeasible() {
        let mut p = corridor(120, 1.0, 0.0, 0.3);
        p.static_obstacles.push(StaticObstacle {
            id: 9,
            s: 3.0,
            d: 0.58,
            extent: [0.5, 0.3],
        });
        assert!(matches!(
            solve_overtake(&p, Side::Left),
            Err(PlannerError::Infeasible { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let p = corridor(100, 1.0, 0.1, 0.3);
        let a = solve_overtake(&p, Side::Left).unwrap();
        let b = solve_overtake(&p, Side::Left).unwrap();
        assert_eq!(a, b);
    }
}
