use nalgebra::{DMatrix, DVector};

/// Minimizes `0.5 u'Hu + g'u` subject to `lo <= u <= hi` with a projected
/// Newton iteration. `H` must be symmetric positive definite.
pub(crate) fn solve_box_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lo: &[f64],
    hi: &[f64],
) -> DVector<f64> {
    let n = g.len();
    let clamp =
        |v: &DVector<f64>| DVector::from_iterator(n, (0..n).map(|i| v[i].clamp(lo[i], hi[i])));
    let objective = |u: &DVector<f64>| 0.5 * u.dot(&(h * u)) + g.dot(u);

    let mut u = clamp(&DVector::zeros(n));
    let mut f = objective(&u);
    for _ in 0..500 {
        let grad = h * &u + g;
        let free: Vec<usize> = (0..n)
            .filter(|&i| {
                let at_lo = u[i] <= lo[i] + 1e-12 && grad[i] > 0.0;
                let at_hi = u[i] >= hi[i] - 1e-12 && grad[i] < 0.0;
                !(at_lo || at_hi)
            })
            .collect();
        let pg = free.iter().fold(0.0_f64, |m, &i| m.max(grad[i].abs()));
        if pg < 1e-10 * (1.0 + g.amax()) {
            break;
        }
        let k = free.len();
        let hff = DMatrix::from_fn(k, k, |a, b| h[(free[a], free[b])]);
        let rhs = DVector::from_iterator(k, free.iter().map(|&i| -grad[i]));
        let step = match hff.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => rhs,
        };
        let mut dir = DVector::zeros(n);
        for (a, &i) in free.iter().enumerate() {
            dir[i] = step[a];
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let cand = clamp(&(&u + &dir * alpha));
            let fc = objective(&cand);
            if fc <= f + 1e-4 * grad.dot(&(&cand - &u)) {
                let moved = (&cand - &u).amax();
                u = cand;
                f = fc;
                accepted = moved > 0.0;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_unconstrained_minimum() {
        // min (u0-2)^2 + (u1+3)^2 on [-1,1]^2
        let h = DMatrix::from_diagonal_element(2, 2, 2.0);
        let g = DVector::from_vec(vec![-4.0, 6.0]);
        let u = solve_box_qp(&h, &g, &[-1.0, -1.0], &[1.0, 1.0]);
        assert!((u[0] - 1.0).abs() < 1e-12 && (u[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupled_problem_matches_kkt() {
        // H = [[2,1],[1,2]], g = [-3,0], box u1 <= 0 active
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let g = DVector::from_vec(vec![-3.0, 0.0]);
        let u = solve_box_qp(&h, &g, &[-10.0, -10.0], &[10.0, 10.0]);
        // unconstrained: u = H^-1 (-g) = [2, -1]
        assert!((u[0] - 2.0).abs() < 1e-10 && (u[1] + 1.0).abs() < 1e-10);
        let u = solve_box_qp(&h, &g, &[-10.0, -0.5], &[10.0, 10.0]);
        // u1 fixed at -0.5 -> u0 = (3 + 0.5) / 2
        assert!((u[1] + 0.5).abs() < 1e-12 && (u[0] - 1.75).abs() < 1e-10);
    }
}
