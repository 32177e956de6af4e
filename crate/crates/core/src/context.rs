//! Context schedules: constant and annealed (deconvolved) quadratic contexts.
//!
//! For a quadratic interaction `N(s_sys; mu_c, Sigma_c)` observed through a
//! linear-Gaussian kernel `N(s_sys; A_t x, Sigma_t)`, the finite-t context
//! with moments `mu_q = A_t mu_c` and `Sigma_q = A_t Sigma_c A_t^T - Sigma_t`
//! leaves the clean marginal untouched. It exists only while `Sigma_q` is
//! positive semidefinite, which bounds the usable diffusion time.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::NoiseSchedule;

pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Deconvolved context moments `(A_t mu_c, A_t Sigma_c A_t^T - Sigma_t)`.
///
/// Admissibility is not checked here; see [`is_admissible`].
pub fn deconvolve_quadratic_context(
    mu_c: &DVector<f64>,
    sigma_c: &DMatrix<f64>,
    a_t: &DMatrix<f64>,
    sigma_t: &DMatrix<f64>,
) -> Result<GaussianMoments> {
    let n = mu_c.len();
    for (name, m) in [("Sigma_c", sigma_c), ("A_t", a_t), ("Sigma_t", sigma_t)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::domain(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let mean = a_t * mu_c;
    let mut covariance = a_t * sigma_c * a_t.transpose() - sigma_t;
    // Symmetrize away rounding from the triple product.
    covariance = 0.5 * (&covariance + covariance.transpose());
    Ok(GaussianMoments { mean, covariance })
}

/// Gaussian moments of `x` implied by convolving `N(mu_q, Sigma_q)` with the
/// kernel `N(A_t x, Sigma_t)`: the inverse of [`deconvolve_quadratic_context`].
pub fn convolve_back(
    q: &GaussianMoments,
    a_t: &DMatrix<f64>,
    sigma_t: &DMatrix<f64>,
) -> Result<GaussianMoments> {
    let a_inv = a_t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::domain("A_t is not invertible"))?;
    let mean = &a_inv * &q.mean;
    let covariance = &a_inv * (&q.covariance + sigma_t) * a_inv.transpose();
    Ok(GaussianMoments { mean, covariance })
}

/// True iff the smallest eigenvalue of `sigma_q` is at least `-tol`.
pub fn is_admissible(sigma_q: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if sigma_q.nrows() != sigma_q.ncols() {
        return Err(Error::domain("covariance must be square"));
    }
    let scale = sigma_q.amax().max(1.0);
    if (sigma_q - sigma_q.transpose()).amax() > 1e-10 * scale {
        return Err(Error::domain("covariance is not symmetric"));
    }
    if sigma_q.nrows() == 0 {
        return Ok(true);
    }
    let eig = sigma_q.clone().symmetric_eigen();
    Ok(eig.eigenvalues.min() >= -tol)
}

/// Largest `t` in `[t_lo, t_hi]` at which `admissible(t)` still holds, to 1e-5.
///
/// The predicate must be monotone (true below the boundary, false above);
/// this is checked on a probe grid first. Returns `t_hi` when the predicate
/// holds everywhere.
pub fn max_diffusion_time<F>(admissible: F, t_lo: f64, t_hi: f64) -> Result<f64>
where
    F: Fn(f64) -> bool,
{
    if !(t_lo < t_hi) {
        return Err(Error::domain(format!("empty bracket [{t_lo}, {t_hi}]")));
    }
    const PROBES: usize = 200;
    let probes: Vec<bool> = (0..=PROBES)
        .map(|i| admissible(t_lo + (t_hi - t_lo) * i as f64 / PROBES as f64))
        .collect();
    if !probes[0] {
        return Err(Error::domain(format!("not admissible at the lower bracket t={t_lo}")));
    }
    let first_false = probes.iter().position(|&ok| !ok);
    let Some(first_false) = first_false else {
        return Ok(t_hi);
    };
    if probes[first_false..].iter().any(|&ok| ok) {
        return Err(Error::domain("admissibility is not monotone on the probe grid"));
    }
    let step = (t_hi - t_lo) / PROBES as f64;
    let mut lo = t_lo + step * (first_false - 1) as f64;
    let mut hi = t_lo + step * first_false as f64;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// How a quadratic context is tied to the diffusion time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ContextMode {
    /// Deconvolved context evaluated at the anchor time.
    Annealed { anchor_t: f64 },
    /// The raw physical context, independent of `t`.
    Unannealed,
}

/// Context for the coupled double well:
/// `U_ctx = kappa/2 (s - a x_env)^2 + k_b/2 (x_env - u_eq)^2`.
///
/// Annealed mode uses `kappa = k_c / (alpha^2 - k_c sigma^2)` and `a = alpha`
/// at the anchor time; unannealed mode uses `(k_c, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellContext {
    pub k_c: f64,
    pub k_b: f64,
    pub u_eq: f64,
    pub mode: ContextMode,
    kappa: f64,
    gain: f64,
}

impl DoubleWellContext {
    pub fn new(k_c: f64, k_b: f64, u_eq: f64, mode: ContextMode, schedule: &NoiseSchedule) -> Result<Self> {
        if !(k_c >= 0.0 && k_b > 0.0) || !u_eq.is_finite() {
            return Err(Error::domain(format!("invalid double-well context k_c={k_c}, k_b={k_b}")));
        }
        let (kappa, gain) = match mode {
            ContextMode::Unannealed => (k_c, 1.0),
            ContextMode::Annealed { anchor_t } => {
                let (alpha, sigma) = schedule.alpha_sigma(anchor_t)?;
                let denom = alpha * alpha - k_c * sigma * sigma;
                if denom <= 0.0 {
                    return Err(Error::Inadmissible {
                        t: anchor_t,
                        detail: format!("alpha^2 - k_c sigma^2 = {denom:.6} <= 0"),
                    });
                }
                (k_c / denom, alpha)
            }
        };
        Ok(Self {
            k_c,
            k_b,
            u_eq,
            mode,
            kappa,
            gain,
        })
    }

    /// Effective precision of the `s`–`x_env` coupling.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Gain `a` multiplying `x_env` in the coupling.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn log_context(&self, s: f64, x_env: f64) -> f64 {
        let c = s - self.gain * x_env;
        let e = x_env - self.u_eq;
        -0.5 * self.kappa * c * c - 0.5 * self.k_b * e * e
    }
}

/// Whether the annealed double-well context exists at `t`.
pub fn doublewell_admissible(k_c: f64, t: f64, schedule: &NoiseSchedule) -> bool {
    match schedule.alpha_sigma(t) {
        Ok((a, s)) => a * a - k_c * s * s > 0.0,
        Err(_) => false,
    }
}

/// Eigenvalues of the periodic 5-point Laplacian on an `L x L` lattice,
/// row-major in `(k_x, k_y)`: `4 - 2 cos(2 pi k_x / L) - 2 cos(2 pi k_y / L)`.
pub fn laplacian_eigenvalues(l: usize) -> Vec<f64> {
    let c: Vec<f64> = (0..l)
        .map(|k| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / l as f64).cos())
        .collect();
    let mut out = Vec::with_capacity(l * l);
    for cx in &c {
        for cy in &c {
            out.push((4.0 - cx - cy).max(0.0));
        }
    }
    out
}

/// Annealed lattice context: Fourier-diagonal precision
/// `q_k = 2 J lambda_k / (alpha^2 - 2 J lambda_k sigma^2)` with `q_0 = 0`,
/// and linear field coefficient `h / alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi4ContextPrecision {
    pub l: usize,
    pub j: f64,
    pub h: f64,
    pub anchor_t: f64,
    pub q: Vec<f64>,
    pub lambda: Vec<f64>,
    pub field_coeff: f64,
}

impl Phi4ContextPrecision {
    pub fn new(l: usize, j: f64, h: f64, t: f64, schedule: &NoiseSchedule) -> Result<Self> {
        if l < 2 {
            return Err(Error::domain(format!("lattice side must be >= 2, got {l}")));
        }
        if !(j >= 0.0) || !h.is_finite() {
            return Err(Error::domain(format!("invalid coupling J={j}, h={h}")));
        }
        let (alpha, sigma) = schedule.alpha_sigma(t)?;
        let lambda = laplacian_eigenvalues(l);
        let mut q = Vec::with_capacity(lambda.len());
        for (k, &lam) in lambda.iter().enumerate() {
            if k == 0 {
                q.push(0.0);
                continue;
            }
            let stiffness = 2.0 * j * lam;
            let denom = alpha * alpha - stiffness * sigma * sigma;
            if denom < 0.0 || (denom == 0.0 && stiffness > 0.0) {
                return Err(Error::Inadmissible {
                    t,
                    detail: format!(
                        "mode ({}, {}) with lambda={lam:.4}: alpha^2 - 2 J lambda sigma^2 = {denom:.3e}",
                        k / l,
                        k % l
                    ),
                });
            }
            q.push(if stiffness == 0.0 { 0.0 } else { stiffness / denom });
        }
        Ok(Self {
            l,
            j,
            h,
            anchor_t: t,
            q,
            lambda,
            field_coeff: h / alpha,
        })
    }
}

/// Largest admissible diffusion time for the lattice context at coupling `J`.
pub fn phi4_max_diffusion_time(j: f64, schedule: &NoiseSchedule) -> Result<f64> {
    max_diffusion_time(
        |t| match schedule.alpha_sigma(t) {
            Ok((a, s)) => a * a - 16.0 * j * s * s >= 0.0,
            Err(_) => false,
        },
        0.0,
        1.0,
    )
}
