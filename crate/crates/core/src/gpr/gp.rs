use serde::{Deserialize, Serialize};

use super::linalg::Cholesky;
use super::GprError;
use crate::Real;

/// Squared-exponential kernel on wrapped arc-length distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfKernel<T> {
    pub length_scale: T,
    pub signal_var: T,
    pub noise_var: T,
}

impl<T: Real> RbfKernel<T> {
    pub fn new(length_scale: T, signal_std: T, noise_std: T) -> Self {
        Self {
            length_scale,
            signal_var: signal_std.sq(),
            noise_var: noise_std.sq(),
        }
    }

    #[inline]
    pub fn eval(&self, a: T, b: T, period: T) -> T {
        let r = a.wrapped_dist(b, period) / self.length_scale;
        self.signal_var * (-T::half() * r * r).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMean {
    Zero,
    /// Constant prior equal to the mean of the training targets.
    SampleMean,
}

/// A fitted periodic GP over arc length.
#[derive(Debug, Clone)]
pub struct GpModel<T> {
    inputs: Vec<T>,
    targets: Vec<T>,
    kernel: RbfKernel<T>,
    period: T,
    prior: T,
    jitter: T,
    chol: Cholesky<T>,
    alpha: Vec<T>,
}

/// Fits a GP to `(inputs, targets)`, caching the Cholesky factor of
/// `K + noise_var I` (plus jitter when needed).
pub fn gp_fit<T: Real>(
    inputs: &[T],
    targets: &[T],
    kernel: RbfKernel<T>,
    period: T,
    prior: PriorMean,
) -> Result<GpModel<T>, GprError> {
    let n = inputs.len();
    if n < 2 || targets.len() != n {
        return Err(GprError::TooFewPoints(n));
    }
    if inputs.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(GprError::NonFinite);
    }
    let inputs: Vec<T> = inputs.iter().map(|&s| s.wrap(period)).collect();
    let prior = match prior {
        PriorMean::Zero => T::zero(),
        PriorMean::SampleMean => targets.iter().fold(T::zero(), |a, &b| a + b) / T::lit(n as f64),
    };

    let mut k = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(inputs[i], inputs[j], period);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }

    let mut jitter = T::zero();
    let max_jitter = T::lit(1e-2) * kernel.signal_var;
    let chol = loop {
        let mut a = k.clone();
        for i in 0..n {
            a[i * n + i] += kernel.noise_var + jitter;
        }
        if let Some(c) = Cholesky::factor(&a, n) {
            break c;
        }
        jitter = if jitter == T::zero() {
            T::lit(1e-10) * kernel.signal_var
        } else {
            jitter * T::lit(10.0)
        };
        if jitter > max_jitter {
            return Err(GprError::NotPositiveDefinite);
        }
    };
    let centered: Vec<T> = targets.iter().map(|&y| y - prior).collect();
    let alpha = chol.solve(&centered);
    Ok(GpModel {
        inputs,
        targets: targets.to_vec(),
        kernel,
        period,
        prior,
        jitter,
        chol,
        alpha,
    })
}

impl<T: Real> GpModel<T> {
    pub fn inputs(&self) -> &[T] {
        &self.inputs
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn kernel(&self) -> RbfKernel<T> {
        self.kernel
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn prior_mean(&self) -> T {
        self.prior
    }

    /// Diagonal jitter that was needed for the factorization.
    pub fn jitter(&self) -> T {
        self.jitter
    }

    fn cross(&self, s: T) -> Vec<T> {
        self.inputs
            .iter()
            .map(|&x| self.kernel.eval(s, x, self.period))
            .collect()
    }

    /// Posterior mean at `s`.
    pub fn mean(&self, s: T) -> T {
        let s = s.wrap(self.period);
        self.inputs
            .iter()
            .zip(&self.alpha)
            .fold(self.prior, |acc, (&x, &a)| {
                acc + a * self.kernel.eval(s, x, self.period)
            })
    }

    /// Posterior predictive mean and variance (including observation noise) at `s`.
    pub fn predict(&self, s: T) -> (T, T) {
        let s = s.wrap(self.period);
        let ks = self.cross(s);
        let mean = ks
            .iter()
            .zip(&self.alpha)
            .fold(self.prior, |acc, (&k, &a)| acc + k * a);
        let v = self.chol.forward(&ks);
        let explained = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        let var = (self.kernel.signal_var + self.kernel.noise_var - explained).max(T::zero());
        (mean, var)
    }
}
