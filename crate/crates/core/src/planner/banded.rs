//! Symmetric positive-definite pentadiagonal systems.

/// Symmetric matrix with two off-diagonals, stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Penta {
    pub d0: Vec<f64>,
    /// `d1[i] = A[i][i+1]`
    pub d1: Vec<f64>,
    /// `d2[i] = A[i][i+2]`
    pub d2: Vec<f64>,
}

impl Penta {
    pub fn zeros(n: usize) -> Self {
        Self {
            d0: vec![0.0; n],
            d1: vec![0.0; n],
            d2: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.d0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d0.is_empty()
    }

    /// Adds `w * r r'` for a row `r` supported on at most three consecutive entries.
    pub fn add_outer(&mut self, start: usize, r: &[f64], w: f64) {
        for (a, &ra) in r.iter().enumerate() {
            let i = start + a;
            self.d0[i] += w * ra * ra;
            for (b, &rb) in r.iter().enumerate().skip(a + 1) {
                match b - a {
                    1 => self.d1[i] += w * ra * rb,
                    2 => self.d2[i] += w * ra * rb,
                    _ => unreachable!("row wider than the band"),
                }
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] += self.d0[i] * x[i];
            if i + 1 < n {
                y[i] += self.d1[i] * x[i + 1];
                y[i + 1] += self.d1[i] * x[i];
            }
            if i + 2 < n {
                y[i] += self.d2[i] * x[i + 2];
                y[i + 2] += self.d2[i] * x[i];
            }
        }
        y
    }

    /// Replaces row and column `i` with the identity.
    pub fn pin(&mut self, i: usize) {
        self.d0[i] = 1.0;
        self.d1[i] = 0.0;
        self.d2[i] = 0.0;
        if i >= 1 {
            self.d1[i - 1] = 0.0;
        }
        if i >= 2 {
            self.d2[i - 2] = 0.0;
        }
    }
}

/// `L D L'` factor of a [`Penta`] matrix.
#[derive(Debug, Clone)]
pub struct PentaLdl {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl PentaLdl {
    /// `None` if a pivot is not positive.
    pub fn factor(a: &Penta) -> Option<Self> {
        let n = a.len();
        let (mut d, mut l1, mut l2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            if i >= 2 {
                l2[i] = a.d2[i - 2] / d[i - 2];
            }
            if i >= 1 {
                let mut v = a.d1[i - 1];
                if i >= 2 {
                    v -= l2[i] * l1[i - 1] * d[i - 2];
                }
                l1[i] = v / d[i - 1];
            }
            let mut p = a.d0[i];
            if i >= 1 {
                p -= l1[i] * l1[i] * d[i - 1];
            }
            if i >= 2 {
                p -= l2[i] * l2[i] * d[i - 2];
            }
            if !(p > 0.0) || !p.is_finite() {
                return None;
            }
            d[i] = p;
        }
        Some(Self { d, l1, l2 })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut y = b.to_vec();
        for i in 0..n {
            if i >= 1 {
                y[i] -= self.l1[i] * y[i - 1];
            }
            if i >= 2 {
                y[i] -= self.l2[i] * y[i - 2];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                y[i] -= self.l1[i + 1] * y[i + 1];
            }
            if i + 2 < n {
                y[i] -= self.l2[i + 2] * y[i + 2];
            }
        }
        y
    }
}
