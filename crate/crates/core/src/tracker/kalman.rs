//! Constant-velocity Kalman filter on the state `[x, y, vx, vy]`.

use serde::{Deserialize, Serialize};

use crate::Real;

pub type Vec4<T> = [T; 4];
pub type Mat4<T> = [[T; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KfConfig<T> {
    pub dt: T,
    pub sigma2_pos: T,
    pub sigma_posvel: T,
    pub sigma2_vel: T,
    /// Process noise `Q = q I`.
    pub q: T,
    /// Measurement noise `R = r I`.
    pub r: T,
}

impl<T: Real> Default for KfConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(0.025),
            sigma2_pos: T::lit(10.0),
            sigma_posvel: T::zero(),
            sigma2_vel: T::one(),
            q: T::lit(1.7e-4),
            r: T::lit(0.074),
        }
    }
}

impl<T: Real> KfConfig<T> {
    pub fn initial_covariance(&self) -> Mat4<T> {
        let z = T::zero();
        let (p, c, v) = (self.sigma2_pos, self.sigma_posvel, self.sigma2_vel);
        [[p, z, c, z], [z, p, z, c], [c, z, v, z], [z, c, z, v]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KfState<T> {
    pub x: Vec4<T>,
    pub p: Mat4<T>,
}

impl<T: Real> KfState<T> {
    /// Fresh state at a measured position with zero velocity and the prior covariance.
    pub fn from_measurement(z: [T; 2], cfg: &KfConfig<T>) -> Self {
        Self {
            x: [z[0], z[1], T::zero(), T::zero()],
            p: cfg.initial_covariance(),
        }
    }

    pub fn position(&self) -> [T; 2] {
        [self.x[0], self.x[1]]
    }

    pub fn velocity(&self) -> [T; 2] {
        [self.x[2], self.x[3]]
    }

    pub fn trace(&self) -> T {
        (0..4).fold(T::zero(), |acc, i| acc + self.p[i][i])
    }

    /// `x <- F x`, `P <- F P F' + Q` with `F = [[I, dt I], [0, I]]`.
    pub fn predict(&mut self, cfg: &KfConfig<T>) {
        let dt = cfg.dt;
        self.x[0] += dt * self.x[2];
        self.x[1] += dt * self.x[3];

        // F P
        let mut fp = self.p;
        for j in 0..4 {
            fp[0][j] += dt * self.p[2][j];
            fp[1][j] += dt * self.p[3][j];
        }
        // (F P) F'
        let mut out = fp;
        for i in 0..4 {
            out[i][0] += dt * fp[i][2];
            out[i][1] += dt * fp[i][3];
        }
        for (i, row) in out.iter_mut().enumerate() {
            row[i] += cfg.q;
        }
        self.p = symmetrize(out);
    }

    /// Measurement update with `H = [I 0]`, `R = r I` (Joseph form).
    pub fn update(&mut self, z: [T; 2], cfg: &KfConfig<T>) {
        let p = &self.p;
        // S = H P H' + R (2x2)
        let s00 = p[0][0] + cfg.r;
        let s01 = p[0][1];
        let s10 = p[1][0];
        let s11 = p[1][1] + cfg.r;
        let det = s00 * s11 - s01 * s10;
        let (i00, i01, i10, i11) = (s11 / det, -s01 / det, -s10 / det, s00 / det);

        // K = P H' S^-1 (4x2)
        let mut k = [[T::zero(); 2]; 4];
        for (i, row) in k.iter_mut().enumerate() {
            row[0] = p[i][0] * i00 + p[i][1] * i10;
            row[1] = p[i][0] * i01 + p[i][1] * i11;
        }

        let y = [z[0] - self.x[0], z[1] - self.x[1]];
        for (i, row) in k.iter().enumerate() {
            self.x[i] += row[0] * y[0] + row[1] * y[1];
        }

        // A = I - K H
        let mut a = identity::<T>();
        for (i, row) in k.iter().enumerate() {
            a[i][0] -= row[0];
            a[i][1] -= row[1];
        }
        let apa = mul(&mul(&a, p), &transpose(&a));
        let mut krk = [[T::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                krk[i][j] = cfg.r * (k[i][0] * k[j][0] + k[i][1] * k[j][1]);
            }
        }
        let mut out = apa;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += krk[i][j];
            }
        }
        self.p = symmetrize(out);
    }
}

fn identity<T: Real>() -> Mat4<T> {
    let mut m = [[T::zero(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

fn mul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]);
        }
    }
    out
}

fn transpose<T: Real>(a: &Mat4<T>) -> Mat4<T> {
    let mut out = *a;
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[j][i];
        }
    }
    out
}

fn symmetrize<T: Real>(mut m: Mat4<T>) -> Mat4<T> {
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = (m[i][j] + m[j][i]) * T::half();
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}
