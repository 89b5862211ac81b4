//! Independent planner oracles.

use overtake_core::planner::{OvertakeProblem, Side, StaticObstacle};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-6;

/// J(d) written out from the objective definition.
pub fn objective(p: &OvertakeProblem, d: &[f64]) -> f64 {
    let h2 = p.ds * p.ds;
    let mut smooth = 0.0;
    for i in 1..d.len() - 1 {
        let dd = (d[i - 1] - 2.0 * d[i] + d[i + 1]) / h2;
        smooth += dd * dd;
    }
    let track: f64 = d.iter().zip(&p.d_ref).map(|(a, b)| (a - b) * (a - b)).sum();
    p.w_smooth * smooth + p.w_ref * track
}

/// Independent constraint check; returns the first violation found.
pub fn violation(p: &OvertakeProblem, side: Side, d: &[f64]) -> Option<String> {
    let n = d.len();
    let half = 0.5 * p.vehicle_width;
    for i in 0..n {
        if d[i] < p.d_min[i] + half - TOL || d[i] > p.d_max[i] - half + TOL {
            return Some(format!("bound at {i}: {}", d[i]));
        }
        if p.in_roc[i] {
            let gap = if side == Side::Left {
                d[i] - p.d_opp[i]
            } else {
                p.d_opp[i] - d[i]
            };
            if gap < p.c_min - TOL {
                return Some(format!("target clearance at {i}: {gap}"));
            }
        }
        for o in &p.static_obstacles {
            let reach = 0.5 * (o.extent[0] + p.vehicle_length);
            if (p.grid[i] - o.s).abs() <= reach && (d[i] - o.d).abs() < p.c_min - TOL {
                return Some(format!("obstacle {} at {i}", o.id));
            }
        }
        if i > 0 && i + 1 < n {
            let k = p.kappa_c[i];
            let kappa = k + k * k * d[i] + (d[i + 1] - 2.0 * d[i] + d[i - 1]) / (p.ds * p.ds);
            if kappa.abs() > p.kappa_max + TOL {
                return Some(format!("curvature at {i}: {kappa}"));
            }
        }
    }
    for i in (0..p.n_fixed).chain(n - p.n_fixed..n) {
        if (d[i] - p.d_ref[i]).abs() > TOL {
            return Some(format!("endpoint {i}"));
        }
    }
    None
}

pub fn smootherstep(x: f64) -> f64 {
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

pub fn cosine_step(x: f64) -> f64 {
    0.5 - 0.5 * (std::f64::consts::PI * x).cos()
}

/// Plateau of height `h` over `[r0, r1)` with ramps of `m` samples.
pub fn bump(n: usize, r0: usize, r1: usize, m: usize, h: f64, step: fn(f64) -> f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i >= r0 && i < r1 {
                h
            } else if i < r0 && i + m >= r0 {
                h * step((i + m - r0) as f64 / m as f64)
            } else if i >= r1 && i < r1 + m {
                h * step((r1 + m - 1 - i) as f64 / m as f64)
            } else {
                0.0
            }
        })
        .collect()
}

/// Random corridor problem with a curved centerline, wavy bounds and an
/// optional static obstacle.
pub fn random_problem(rng: &mut ChaCha8Rng) -> OvertakeProblem {
    let n = rng.random_range(40..160);
    let mut p = super::corridor(n, 1.0, 0.0, rng.random_range(0.25..0.55));
    let w0 = rng.random_range(0.5..1.2);
    let (wa, wf) = (rng.random_range(0.0..0.2), rng.random_range(0.5..3.0));
    let kappa = rng.random_range(-0.4..0.4);
    let (ra, rf, rp) = (
        rng.random_range(0.0..0.3),
        rng.random_range(0.2..2.0),
        rng.random_range(0.0..6.3),
    );
    let (oa, of, o0) = (
        rng.random_range(0.0..0.3),
        rng.random_range(0.2..2.0),
        rng.random_range(-0.6..0.6),
    );
    for i in 0..n {
        let s = p.grid[i];
        let w = w0 + wa * (wf * s).sin();
        p.d_min[i] = -w;
        p.d_max[i] = w + rng.random_range(-0.02..0.02);
        p.kappa_c[i] = kappa;
        p.d_ref[i] = (ra * (rf * s + rp).sin()).clamp(-w + 0.2, w - 0.2);
        p.d_opp[i] = o0 + oa * (of * s).cos();
    }
    let a = rng.random_range(p.n_fixed + 2..n / 2);
    let b = rng.random_range(a + 1..n - p.n_fixed - 2);
    p.in_roc = (0..n).map(|i| i >= a && i <= b).collect();
    if rng.random_bool(0.4) {
        let i = rng.random_range(0..n);
        p.static_obstacles.push(StaticObstacle {
            id: 2,
            s: p.grid[i],
            d: rng.random_range(-1.0..1.0),
            extent: [0.5, 0.3],
        });
    }
    p
}

/// Lowest objective over feasible single-bump profiles that clear the RoC on the left.
pub fn best_bump_cost(p: &OvertakeProblem) -> f64 {
    let n = p.len();
    let r0 = p.in_roc.iter().position(|&b| b).unwrap();
    let r1 = p.in_roc.iter().rposition(|&b| b).unwrap() + 1;
    let floor = p.d_opp[r0] + p.c_min;
    let mut best = f64::INFINITY;
    for step in [smootherstep as fn(f64) -> f64, cosine_step] {
        for m in 2..=r0 - p.n_fixed {
            for k in 0..=40 {
                let d = bump(n, r0, r1, m, floor + 0.005 * k as f64, step);
                if violation(p, Side::Left, &d).is_none() {
                    best = best.min(objective(p, &d));
                }
            }
        }
    }
    best
}

/// Outcome counts of a randomized planner suite.
#[derive(Debug, Default)]
pub struct SuiteOutcome {
    pub feasible: usize,
    pub flagged_infeasible: usize,
    pub rejected: usize,
    /// Problems flagged feasible that the oracle disputes.
    pub disputed: Vec<String>,
}

/// Solves `cases` random problems and checks every feasible answer.
pub fn run_suite(seed: u64, cases: usize) -> SuiteOutcome {
    use overtake_core::planner::{choose_side, solve_overtake};
    use rand::SeedableRng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SuiteOutcome::default();
    for case in 0..cases {
        let p = random_problem(&mut rng);
        let Ok(side) = choose_side(&p) else {
            out.rejected += 1;
            continue;
        };
        match solve_overtake(&p, side) {
            Ok(t) if t.feasible => {
                out.feasible += 1;
                let d = t.offsets();
                if let Some(v) = violation(&p, side, &d) {
                    out.disputed.push(format!("case {case}: {v}"));
                }
                if (objective(&p, &d) - t.cost).abs() > 1e-9 * t.cost.max(1.0) {
                    out.disputed
                        .push(format!("case {case}: reported cost {} differs", t.cost));
                }
                if t.cost_history
                    .windows(2)
                    .any(|w| w[1] > w[0] + 1e-9 * w[0].abs().max(1.0))
                {
                    out.disputed
                        .push(format!("case {case}: objective increased"));
                }
            }
            Ok(_) => out.flagged_infeasible += 1,
            Err(_) => out.rejected += 1,
        }
    }
    out
}
