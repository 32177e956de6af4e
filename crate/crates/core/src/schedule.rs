//! Variance-preserving forward-diffusion coefficients.
//!
//! Every prior, context factor and kernel in the crate shares one schedule:
//! a clean variable `x` is corrupted to `y = alpha(t) x + sigma(t) eps` with
//! `alpha(t)^2 + sigma(t)^2 = 1`. The cosine form is
//!
//! ```text
//! alpha_bar(t) = cos^2(((t + s) / (1 + s)) * pi / 2) / cos^2((s / (1 + s)) * pi / 2)
//! ```
//!
//! with offset `s = 0.008`, `alpha = sqrt(alpha_bar)` and `sigma^2 = 1 - alpha_bar`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ALPHA_BAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub kind: ScheduleKind,
    pub s_offset: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self::cosine(0.008)
    }
}

impl NoiseSchedule {
    pub fn cosine(s_offset: f64) -> Self {
        Self {
            kind: ScheduleKind::Cosine,
            s_offset,
        }
    }

    fn check_time(t: f64) -> Result<()> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("diffusion time {t} outside [0, 1]")));
        }
        Ok(())
    }

    /// Signal fraction `alpha^2(t)`, clamped to `[1e-9, 1]`.
    pub fn alpha_bar(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        let s = self.s_offset;
        let angle = |u: f64| ((u + s) / (1.0 + s)) * FRAC_PI_2;
        let ab = angle(t).cos().powi(2) / angle(0.0).cos().powi(2);
        Ok(ab.clamp(ALPHA_BAR_FLOOR, 1.0))
    }

    /// `(alpha(t), sigma(t))`.
    pub fn alpha_sigma(&self, t: f64) -> Result<(f64, f64)> {
        let ab = self.alpha_bar(t)?;
        Ok((ab.sqrt(), (1.0 - ab).sqrt()))
    }

    /// Forward kernel `N(y; alpha(t) x, sigma^2(t) I)` at time `t`.
    ///
    /// `t = 0` is rejected because the kernel degenerates to a delta.
    pub fn kernel(&self, t: f64) -> Result<ForwardKernel> {
        let (alpha, sigma) = self.alpha_sigma(t)?;
        if sigma <= 0.0 {
            return Err(Error::domain(format!(
                "forward kernel is degenerate at t={t} (sigma = 0)"
            )));
        }
        Ok(ForwardKernel { alpha, sigma })
    }
}

/// `(alpha(t), sigma(t))` under the default cosine schedule.
pub fn alpha_sigma(t: f64) -> Result<(f64, f64)> {
    NoiseSchedule::default().alpha_sigma(t)
}

/// `log N(y; alpha(t) x, sigma^2(t) I)` including the normalization constant.
pub fn forward_kernel_logpdf(y: &[f64], x: &[f64], t: f64) -> Result<f64> {
    NoiseSchedule::default().kernel(t)?.logpdf(y, x)
}

/// Isotropic linear-Gaussian corruption `y = alpha x + sigma eps`.
///
/// Diffusion kernels come from [`NoiseSchedule::kernel`]; split-Gibbs kernels
/// use `alpha = 1` and `sigma = rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardKernel {
    pub alpha: f64,
    pub sigma: f64,
}

impl ForwardKernel {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha.is_finite() && sigma.is_finite() && alpha > 0.0 && sigma > 0.0) {
            return Err(Error::domain(format!(
                "kernel needs alpha > 0 and sigma > 0, got ({alpha}, {sigma})"
            )));
        }
        Ok(Self { alpha, sigma })
    }

    /// Unit-gain kernel `N(z; x, rho^2 I)`.
    pub fn split(rho: f64) -> Result<Self> {
        Self::new(1.0, rho)
    }

    #[inline]
    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Effective generative noise `sigma / alpha` seen by the clean variable.
    #[inline]
    pub fn sigma_tilde(&self) -> f64 {
        self.sigma / self.alpha
    }

    #[inline]
    pub fn logpdf_scalar(&self, y: f64, x: f64) -> f64 {
        let var = self.variance();
        let r = y - self.alpha * x;
        -0.5 * (2.0 * PI * var).ln() - 0.5 * r * r / var
    }

    pub fn logpdf(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        if y.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let var = self.variance();
        let sq: f64 = y
            .iter()
            .zip(x)
            .map(|(&yi, &xi)| {
                let r = yi - self.alpha * xi;
                r * r
            })
            .sum();
        Ok(-0.5 * y.len() as f64 * (2.0 * PI * var).ln() - 0.5 * sq / var)
    }

    /// Kernel log-density from precomputed sufficient statistics.
    pub fn logpdf_from_stats(&self, stats: &KernelStats) -> f64 {
        let var = self.variance();
        let sq = stats.yy - 2.0 * self.alpha * stats.xy + self.alpha * self.alpha * stats.xx;
        -0.5 * stats.dim as f64 * (2.0 * PI * var).ln() - 0.5 * sq / var
    }
}

/// Sufficient statistics `(|y|^2, y.x, |x|^2, d)` of a pair `(y, x)`.
///
/// Lets the kernel density be re-evaluated at any `(alpha, sigma)` without
/// keeping the full vectors around (multistate reweighting of lattice runs).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelStats {
    pub yy: f64,
    pub xy: f64,
    pub xx: f64,
    pub dim: usize,
}

impl KernelStats {
    pub fn from_pair(y: &[f64], x: &[f64]) -> Self {
        let mut stats = KernelStats {
            dim: y.len(),
            ..Default::default()
        };
        for (&yi, &xi) in y.iter().zip(x) {
            stats.yy += yi * yi;
            stats.xy += yi * xi;
            stats.xx += xi * xi;
        }
        stats
    }

    pub fn merge(&mut self, other: &KernelStats) {
        self.yy += other.yy;
        self.xy += other.xy;
        self.xx += other.xx;
        self.dim += other.dim;
    }
}
