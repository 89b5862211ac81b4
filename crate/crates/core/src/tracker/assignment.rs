//! Optimal min-cost bipartite assignment (Hungarian method, shortest
//! augmenting paths with potentials).

use crate::Real;

/// Solves the square assignment problem. Returns `col_of_row`.
pub fn solve_square<T: Real>(cost: &[Vec<T>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|r| r.len() == n));

    let inf = T::infinity();
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    // p[j]: row matched to column j (1-based, 0 = none)
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                // strict comparison keeps the lowest column index on ties
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            col_of_row[p[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Result of gated association.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// `(tracklet index, detection index)` pairs, sorted by tracklet index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_tracklets: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

impl Matching {
    pub fn total_cost<T: Real>(&self, tracks: &[[T; 2]], dets: &[[T; 2]]) -> T {
        self.pairs
            .iter()
            .fold(T::zero(), |acc, &(i, j)| acc + euclid(tracks[i], dets[j]))
    }
}

pub fn euclid<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Assigns detections to predicted tracklet positions minimizing the summed
/// Euclidean distance over pairs no farther apart than `gate`.
///
/// Among gated assignments the one with the most pairs wins, then the one
/// with the least total distance.
pub fn associate<T: Real>(tracks: &[[T; 2]], dets: &[[T; 2]], gate: T) -> Matching {
    let (nt, nd) = (tracks.len(), dets.len());
    let n = nt.max(nd);
    if nt == 0 || nd == 0 {
        return Matching {
            pairs: Vec::new(),
            unmatched_tracklets: (0..nt).collect(),
            unmatched_detections: (0..nd).collect(),
        };
    }

    let dist: Vec<Vec<T>> = tracks
        .iter()
        .map(|&t| dets.iter().map(|&d| euclid(t, d)).collect())
        .collect();
    let mut max_real = T::zero();
    for row in &dist {
        for &c in row {
            if c <= gate {
                max_real = max_real.max(c);
            }
        }
    }
    // any forbidden pair must cost more than every admissible total
    let big = T::lit(n as f64 + 1.0) * (max_real + T::one());
    let cost: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < nt && j < nd && dist[i][j] <= gate {
                        dist[i][j]
                    } else {
                        big
                    }
                })
                .collect()
        })
        .collect();
    let col_of_row = solve_square(&cost);

    let mut out = Matching::default();
    let mut det_used = vec![false; nd];
    for (i, &j) in col_of_row.iter().enumerate().take(nt) {
        if j < nd && dist[i][j] <= gate {
            out.pairs.push((i, j));
            det_used[j] = true;
        } else {
            out.unmatched_tracklets.push(i);
        }
    }
    out.unmatched_detections = (0..nd).filter(|&j| !det_used[j]).collect();
    out
}
