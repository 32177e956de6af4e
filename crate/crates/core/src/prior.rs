//! Exact denoising priors.
//!
//! A prior supplies an unnormalized density `p(x)` and draws from the
//! denoising posterior `p(x | y) ∝ p(x) N(y; alpha x, sigma^2 I)` for an
//! observation `y` corrupted by a [`ForwardKernel`]. The implementations here
//! are exact: a tabulated one-dimensional density sampled by inverse CDF, and
//! an isotropic Gaussian mixture with a conjugate posterior.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::{linspace, logsumexp, trapezoid_weight};
use crate::schedule::{ForwardKernel, NoiseSchedule};

/// Mean and per-coordinate variance of a posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMoments {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

pub trait PriorModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Unnormalized log prior density.
    fn log_density(&self, x: &[f64]) -> f64;

    /// One exact draw from `p(x | y)` under `kernel`, written into `out`.
    fn posterior_sample(
        &self,
        y: &[f64],
        kernel: &ForwardKernel,
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()>;

    /// Posterior mean and variance, when they have a deterministic evaluation.
    fn posterior_moments(&self, _y: &[f64], _kernel: &ForwardKernel) -> Option<Result<PosteriorMoments>> {
        None
    }

    /// A draw from the prior itself (the context-free baseline).
    fn sample_prior(&self, rng: &mut dyn RngCore, out: &mut [f64]);
}

type Potential = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-dimensional prior `p(x) ∝ exp(-U(x))` tabulated on a uniform grid.
#[derive(Clone)]
pub struct Grid1DPrior {
    potential: Potential,
    nodes: Vec<f64>,
    log_prior: Vec<f64>,
    prior_cdf: Vec<f64>,
    /// Known lower bound of `U`; enables the rejection fast path.
    energy_floor: Option<f64>,
}

impl fmt::Debug for Grid1DPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1DPrior")
            .field("grid_lo", &self.grid_lo())
            .field("grid_hi", &self.grid_hi())
            .field("n_grid", &self.n_grid())
            .field("energy_floor", &self.energy_floor)
            .finish()
    }
}

const MIN_GRID: usize = 512;
const MAX_TAIL_MASS: f64 = 1e-5;
const EDGE_MASS_LIMIT: f64 = 1e-8;
const REJECTION_ATTEMPTS: usize = 32;

impl Grid1DPrior {
    pub fn new<F>(potential: F, grid_lo: f64, grid_hi: f64, n_grid: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if n_grid < MIN_GRID {
            return Err(Error::domain(format!("n_grid must be >= {MIN_GRID}, got {n_grid}")));
        }
        if !(grid_lo.is_finite() && grid_hi.is_finite() && grid_lo < grid_hi) {
            return Err(Error::domain(format!("invalid grid [{grid_lo}, {grid_hi}]")));
        }
        let potential: Potential = Arc::new(potential);
        check_tail_mass(&*potential, grid_lo, grid_hi)?;

        let nodes = linspace(grid_lo, grid_hi, n_grid);
        let log_prior: Vec<f64> = nodes.iter().map(|&x| -potential(x)).collect();
        if log_prior.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite {
                term: "prior potential on grid".into(),
            });
        }
        let max = log_prior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_prior.iter().map(|l| (l - max).exp()).collect();
        let prior_cdf = cell_cdf(&w);
        Ok(Self {
            potential,
            nodes,
            log_prior,
            prior_cdf,
            energy_floor: None,
        })
    }

    /// `U(x) = height * (x^2 - 1)^2` on `[-3, 3]` with 2048 nodes.
    ///
    /// `height = 8` is the double-well system coordinate, `height = 1` the
    /// lattice on-site factor.
    pub fn quartic(height: f64) -> Result<Self> {
        Self::quartic_with_grid(height, -3.0, 3.0, 2048)
    }

    pub fn quartic_with_grid(height: f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::domain(format!("well height must be positive, got {height}")));
        }
        let prior = Self::new(move |x| height * (x * x - 1.0).powi(2), lo, hi, n)?;
        Ok(prior.with_energy_floor(0.0))
    }

    /// Declare a lower bound for the potential, enabling exact rejection
    /// sampling from the kernel-shaped proposal.
    pub fn with_energy_floor(mut self, floor: f64) -> Self {
        self.energy_floor = Some(floor);
        self
    }

    pub fn grid_lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn grid_hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn n_grid(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn potential(&self, x: f64) -> f64 {
        (self.potential)(x)
    }

    /// Normalized posterior weights on the grid nodes (not yet multiplied by
    /// the trapezoid weights).
    fn posterior_weights(&self, y: f64, kernel: &ForwardKernel) -> Result<Vec<f64>> {
        if !y.is_finite() {
            return Err(Error::domain(format!("observation must be finite, got {y}")));
        }
        let inv2var = 0.5 / kernel.variance();
        let lw: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.log_prior)
            .map(|(&x, &lp)| {
                let r = y - kernel.alpha * x;
                lp - r * r * inv2var
            })
            .collect();
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let coverage = || Error::GridCoverage {
            y,
            t: kernel_time_hint(kernel),
            lo: self.grid_lo(),
            hi: self.grid_hi(),
        };
        if !max.is_finite() {
            return Err(coverage());
        }
        let mut w: Vec<f64> = lw.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let n = w.len();
        if (w[0] + w[1]) / total > EDGE_MASS_LIMIT || (w[n - 1] + w[n - 2]) / total > EDGE_MASS_LIMIT {
            return Err(coverage());
        }
        for v in &mut w {
            *v /= total;
        }
        Ok(w)
    }

    /// Exact draw from the tabulated posterior by inverse CDF, linear within cells.
    pub fn grid_posterior_sample<R: Rng + ?Sized>(
        &self,
        y: f64,
        kernel: &ForwardKernel,
        rng: &mut R,
    ) -> Result<f64> {
        let w = self.posterior_weights(y, kernel)?;
        let cdf = cell_cdf(&w);
        Ok(self.invert_cell_cdf(&cdf, rng.random::<f64>()))
    }

    /// Posterior mean and variance by trapezoid quadrature over the grid.
    pub fn grid_posterior_moments(&self, y: f64, kernel: &ForwardKernel) -> Result<(f64, f64)> {
        let w = self.posterior_weights(y, kernel)?;
        let n = w.len();
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, (&wi, &x)) in w.iter().zip(&self.nodes).enumerate() {
            let q = trapezoid_weight(i, n, 1.0) * wi;
            z += q;
            m1 += q * x;
            m2 += q * x * x;
        }
        let mean = m1 / z;
        Ok((mean, (m2 / z - mean * mean).max(0.0)))
    }

    /// Prior mean and variance by quadrature.
    pub fn prior_moments(&self) -> (f64, f64) {
        let max = self.log_prior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n = self.nodes.len();
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, (&lp, &x)) in self.log_prior.iter().zip(&self.nodes).enumerate() {
            let q = trapezoid_weight(i, n, 1.0) * (lp - max).exp();
            z += q;
            m1 += q * x;
            m2 += q * x * x;
        }
        let mean = m1 / z;
        (mean, m2 / z - mean * mean)
    }

    /// Draw via rejection from `N(y / alpha, sigma^2 / alpha^2)`, accepting with
    /// `exp(-(U(x) - floor))`, and fall back to the grid after a fixed number
    /// of failures. Both branches target the same truncated posterior.
    pub fn hybrid_posterior_sample<R: Rng + ?Sized>(
        &self,
        y: f64,
        kernel: &ForwardKernel,
        rng: &mut R,
    ) -> Result<f64> {
        if let Some(floor) = self.energy_floor {
            let centre = y / kernel.alpha;
            let spread = kernel.sigma_tilde();
            let (lo, hi) = (self.grid_lo(), self.grid_hi());
            for _ in 0..REJECTION_ATTEMPTS {
                let z: f64 = StandardNormal.sample(rng);
                let x = centre + spread * z;
                if x < lo || x > hi {
                    continue;
                }
                let accept = (floor - self.potential(x)).exp();
                if rng.random::<f64>() < accept {
                    return Ok(x);
                }
            }
        }
        self.grid_posterior_sample(y, kernel, rng)
    }

    fn invert_cell_cdf(&self, cdf: &[f64], u: f64) -> f64 {
        // cdf[i] is the mass of cells 0..i; cdf.len() == n_grid.
        let total = *cdf.last().unwrap();
        let target = u * total;
        let cell = cdf.partition_point(|&c| c <= target).clamp(1, cdf.len() - 1) - 1;
        let mass = cdf[cell + 1] - cdf[cell];
        let h = self.nodes[1] - self.nodes[0];
        let frac = if mass > 0.0 {
            ((target - cdf[cell]) / mass).clamp(0.0, 1.0)
        } else {
            0.5
        };
        self.nodes[cell] + h * frac
    }
}

/// Cumulative cell masses: `cdf[0] = 0`, `cdf[i+1] = cdf[i] + (w[i] + w[i+1]) / 2`.
fn cell_cdf(w: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for pair in w.windows(2) {
        acc += 0.5 * (pair[0] + pair[1]);
        cdf.push(acc);
    }
    cdf
}

fn check_tail_mass(potential: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<()> {
    // Compare mass on [lo, hi] with mass on a window twice as wide.
    let width = hi - lo;
    let n = 8192;
    let nodes = linspace(lo - 0.5 * width, hi + 0.5 * width, n);
    let h = nodes[1] - nodes[0];
    let lw: Vec<f64> = nodes.iter().map(|&x| -potential(x)).collect();
    let max = lw.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonFinite {
            term: "prior potential (no finite value on grid)".into(),
        });
    }
    let (mut inside, mut total) = (0.0, 0.0);
    for (i, (&x, &l)) in nodes.iter().zip(&lw).enumerate() {
        let q = trapezoid_weight(i, n, h) * (l - max).exp();
        total += q;
        if (lo..=hi).contains(&x) {
            inside += q;
        }
    }
    let tail = 1.0 - inside / total;
    if tail > MAX_TAIL_MASS {
        return Err(Error::domain(format!(
            "grid [{lo}, {hi}] leaves prior mass {tail:e} uncovered"
        )));
    }
    Ok(())
}

fn kernel_time_hint(kernel: &ForwardKernel) -> f64 {
    // Recover t from alpha under the default schedule for error reporting.
    let sched = NoiseSchedule::default();
    let target = kernel.alpha * kernel.alpha;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sched.alpha_bar(mid).unwrap_or(0.0) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl PriorModel for Grid1DPrior {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        -self.potential(x[0])
    }

    fn posterior_sample(
        &self,
        y: &[f64],
        kernel: &ForwardKernel,
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        out[0] = self.hybrid_posterior_sample(y[0], kernel, rng)?;
        Ok(())
    }

    fn posterior_moments(&self, y: &[f64], kernel: &ForwardKernel) -> Option<Result<PosteriorMoments>> {
        Some(self.grid_posterior_moments(y[0], kernel).map(|(m, v)| PosteriorMoments {
            mean: vec![m],
            variance: vec![v],
        }))
    }

    fn sample_prior(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        out[0] = self.invert_cell_cdf(&self.prior_cdf, rng.random::<f64>());
    }
}

/// Isotropic Gaussian mixture `sum_j w_j N(mu_j, sigma_x^2 I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixturePrior {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    component_std: f64,
}

impl GaussianMixturePrior {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, component_std: f64) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() {
            return Err(Error::domain("mixture needs one weight per mean"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("mixture weights must be nonnegative and finite"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("mixture weights sum to {sum}, not 1")));
        }
        let dim = means[0].len();
        if dim == 0 || means.iter().any(|m| m.len() != dim) {
            return Err(Error::domain("mixture means must share a positive dimension"));
        }
        if means.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("mixture means must be finite"));
        }
        if !(component_std > 0.0 && component_std.is_finite()) {
            return Err(Error::domain("component std must be positive"));
        }
        Ok(Self {
            weights,
            means,
            component_std,
        })
    }

    /// Equal-weight mixture with means on the Cartesian square `levels x levels`.
    pub fn square_grid(levels: &[f64], component_std: f64) -> Result<Self> {
        let means: Vec<Vec<f64>> = levels
            .iter()
            .flat_map(|&a| levels.iter().map(move |&b| vec![a, b]))
            .collect();
        let k = means.len();
        Self::new(vec![1.0 / k as f64; k], means, component_std)
    }

    /// 25 components on `{-5, -2.5, 0, 2.5, 5}^2` with `sigma_x = 0.8`.
    pub fn benchmark() -> Self {
        Self::square_grid(&[-5.0, -2.5, 0.0, 2.5, 5.0], 0.8).expect("benchmark mixture is valid")
    }

    /// A single Gaussian `N(mean, std^2 I)`.
    pub fn gaussian(mean: Vec<f64>, std: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![mean], std)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn component_std(&self) -> f64 {
        self.component_std
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        let d = self.means[0].len();
        if y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Normalized log density.
    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let var = self.component_std * self.component_std;
        let d = x.len() as f64;
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.means)
            .map(|(&w, mu)| {
                let sq: f64 = x.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
                w.ln() - 0.5 * d * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * sq / var
            })
            .collect();
        logsumexp(&terms)
    }

    /// Posterior responsibilities, shared component variance and component means.
    pub fn posterior_components(
        &self,
        y: &[f64],
        kernel: &ForwardKernel,
    ) -> Result<(Vec<f64>, f64, Vec<Vec<f64>>)> {
        self.check_dim(y)?;
        let sx2 = self.component_std * self.component_std;
        let (a, s2) = (kernel.alpha, kernel.variance());
        let marg_var = a * a * sx2 + s2;
        let mut logr: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.means)
            .map(|(&w, mu)| {
                let sq: f64 = y.iter().zip(mu).map(|(yi, mi)| (yi - a * mi).powi(2)).sum();
                w.ln() - 0.5 * sq / marg_var
            })
            .collect();
        let lse = logsumexp(&logr);
        for l in &mut logr {
            *l = (*l - lse).exp();
        }
        let v = 1.0 / (1.0 / sx2 + a * a / s2);
        let comp_means = self
            .means
            .iter()
            .map(|mu| {
                mu.iter()
                    .zip(y)
                    .map(|(m, yi)| v * (m / sx2 + a * yi / s2))
                    .collect()
            })
            .collect();
        Ok((logr, v, comp_means))
    }

    /// Exact draw from the mixture posterior under split noise `rho` (unit gain).
    pub fn gmm_posterior_sample<R: Rng + ?Sized>(&self, z: &[f64], rho: f64, rng: &mut R) -> Result<Vec<f64>> {
        if !(rho > 0.0) {
            return Err(Error::domain(format!("split noise must be positive, got {rho}")));
        }
        let kernel = ForwardKernel::split(rho)?;
        let mut out = vec![0.0; z.len()];
        self.sample_posterior_into(z, &kernel, rng, &mut out)?;
        Ok(out)
    }

    fn sample_posterior_into<R: Rng + ?Sized>(
        &self,
        y: &[f64],
        kernel: &ForwardKernel,
        rng: &mut R,
        out: &mut [f64],
    ) -> Result<()> {
        let (resp, v, comp_means) = self.posterior_components(y, kernel)?;
        let j = pick_index(&resp, rng.random::<f64>());
        let sd = v.sqrt();
        for (o, m) in out.iter_mut().zip(&comp_means[j]) {
            let e: f64 = StandardNormal.sample(rng);
            *o = m + sd * e;
        }
        Ok(())
    }
}

fn pick_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

impl PriorModel for GaussianMixturePrior {
    fn dim(&self) -> usize {
        self.means[0].len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.log_pdf(x)
    }

    fn posterior_sample(
        &self,
        y: &[f64],
        kernel: &ForwardKernel,
        rng: &mut dyn RngCore,
        out: &mut [f64],
    ) -> Result<()> {
        self.sample_posterior_into(y, kernel, rng, out)
    }

    fn posterior_moments(&self, y: &[f64], kernel: &ForwardKernel) -> Option<Result<PosteriorMoments>> {
        Some(self.posterior_components(y, kernel).map(|(resp, v, comp)| {
            let d = y.len();
            let mut mean = vec![0.0; d];
            let mut second = vec![0.0; d];
            for (r, m) in resp.iter().zip(&comp) {
                for k in 0..d {
                    mean[k] += r * m[k];
                    second[k] += r * m[k] * m[k];
                }
            }
            let variance = (0..d).map(|k| v + second[k] - mean[k] * mean[k]).collect();
            PosteriorMoments { mean, variance }
        }))
    }

    fn sample_prior(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        let j = pick_index(&self.weights, rng.random::<f64>());
        for (o, m) in out.iter_mut().zip(&self.means[j]) {
            let e: f64 = StandardNormal.sample(rng);
            *o = m + self.component_std * e;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{mean, variance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kernel(t: f64) -> ForwardKernel {
        NoiseSchedule::default().kernel(t).unwrap()
    }

    #[test]
    fn construction_rejects_bad_grids() {
        assert!(Grid1DPrior::quartic_with_grid(8.0, -3.0, 3.0, 100).is_err());
        // A grid that clips the right well.
        assert!(Grid1DPrior::quartic_with_grid(1.0, -3.0, 0.9, 2048).is_err());
        assert!(Grid1DPrior::quartic(-1.0).is_err());
    }

    #[test]
    fn symmetric_observation_gives_zero_mean() {
        let prior = Grid1DPrior::quartic(8.0).unwrap();
        let (m, v) = prior.grid_posterior_moments(0.0, &kernel(0.3)).unwrap();
        assert!(m.abs() < 1e-10, "mean {m}");
        assert!(v > 0.0);
    }

    #[test]
    fn variance_obeys_contraction_bound() {
        let prior = Grid1DPrior::quartic(1.0).unwrap();
        let (_, pv) = prior.prior_moments();
        for t in [0.05, 0.2, 0.5, 0.9] {
            let k = kernel(t);
            for y in [-1.0, 0.0, 0.4, 1.3] {
                let (_, v) = prior.grid_posterior_moments(y, &k).unwrap();
                assert!(v > 0.0 && v <= pv + k.variance() / (k.alpha * k.alpha));
            }
        }
    }

    #[test]
    fn right_well_observation_concentrates() {
        let prior = Grid1DPrior::quartic(8.0).unwrap();
        let k = kernel(0.2);
        let (m, _) = prior.grid_posterior_moments(k.alpha, &k).unwrap();
        assert!((0.8..=1.05).contains(&m), "mean {m}");
    }

    #[test]
    fn grid_sampler_is_symmetric_at_zero() {
        let prior = Grid1DPrior::quartic(8.0).unwrap();
        let k = kernel(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| prior.grid_posterior_sample(0.0, &k, &mut rng).unwrap())
            .collect();
        let se = (variance(&draws) / draws.len() as f64).sqrt();
        assert!(mean(&draws).abs() < 3.0 * se);
    }

    #[test]
    fn delta_limit_concentrates() {
        let prior = Grid1DPrior::quartic(8.0).unwrap();
        let k = kernel(1e-3);
        let y = 0.9 * k.alpha;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| prior.grid_posterior_sample(y, &k, &mut rng).unwrap())
            .collect();
        assert!(variance(&draws).sqrt() < 0.05);
        assert!((mean(&draws) - 0.9).abs() < 0.05);
    }

    #[test]
    fn far_observation_is_a_coverage_error() {
        let prior = Grid1DPrior::quartic(8.0).unwrap();
        let err = prior.grid_posterior_sample(40.0, &kernel(0.05), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::GridCoverage { .. })));
        let mut out = [0.0];
        let err = prior.posterior_sample(&[40.0], &kernel(0.05), &mut ChaCha8Rng::seed_from_u64(0), &mut out);
        assert!(matches!(err, Err(Error::GridCoverage { .. })));
    }

    #[test]
    fn grid_refinement_converges() {
        let coarse = Grid1DPrior::quartic_with_grid(1.0, -3.0, 3.0, 2048).unwrap();
        let fine = Grid1DPrior::quartic_with_grid(1.0, -3.0, 3.0, 4096).unwrap();
        for (t, y) in [(0.1, 1.0), (0.3, -0.4), (0.7, 0.2)] {
            let k = kernel(t);
            let (m1, v1) = coarse.grid_posterior_moments(y, &k).unwrap();
            let (m2, v2) = fine.grid_posterior_moments(y, &k).unwrap();
            assert!((m1 - m2).abs() < 1e-6 && (v1 - v2).abs() < 1e-6);
        }
    }

    #[test]
    fn hybrid_and_grid_paths_agree_with_quadrature() {
        let prior = Grid1DPrior::quartic(8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (t, y) in [(0.1, 0.3), (0.2, 0.0), (0.6, -0.5)] {
            let k = kernel(t);
            let (m, v) = prior.grid_posterior_moments(y, &k).unwrap();
            let n = 100_000;
            let draws: Vec<f64> = (0..n)
                .map(|_| prior.hybrid_posterior_sample(y, &k, &mut rng).unwrap())
                .collect();
            let se = (v / n as f64).sqrt();
            assert!((mean(&draws) - m).abs() < 4.0 * se, "t={t} y={y}");
            let se_var = v * (2.0 / n as f64).sqrt() * 1.5;
            assert!((variance(&draws) - v).abs() < 4.0 * se_var, "t={t} y={y}");
        }
    }

    #[test]
    fn prior_draws_match_prior_moments() {
        let prior = Grid1DPrior::quartic(1.0).unwrap();
        let (pm, pv) = prior.prior_moments();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut out = [0.0];
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                prior.sample_prior(&mut rng, &mut out);
                out[0]
            })
            .collect();
        assert!((mean(&draws) - pm).abs() < 4.0 * (pv / 1e5).sqrt());
    }

    #[test]
    fn single_component_posterior_is_conjugate() {
        let prior = GaussianMixturePrior::gaussian(vec![1.0, -2.0], 0.7).unwrap();
        let rho = 0.9;
        let z = [0.3, 0.1];
        let m = prior
            .posterior_moments(&z, &ForwardKernel::split(rho).unwrap())
            .unwrap()
            .unwrap();
        let (sx2, r2) = (0.49, rho * rho);
        let v = 1.0 / (1.0 / sx2 + 1.0 / r2);
        assert!((m.mean[0] - v * (1.0 / sx2 + 0.3 / r2)).abs() < 1e-12);
        assert!((m.mean[1] - v * (-2.0 / sx2 + 0.1 / r2)).abs() < 1e-12);
        assert!((m.variance[0] - v).abs() < 1e-12);
    }

    #[test]
    fn separated_component_dominates() {
        let prior = GaussianMixturePrior::square_grid(&[-20.0, 0.0, 20.0], 0.5).unwrap();
        let (resp, _, _) = prior
            .posterior_components(&[20.0, -20.0], &ForwardKernel::split(0.5).unwrap())
            .unwrap();
        let idx = prior
            .means()
            .iter()
            .position(|m| m == &vec![20.0, -20.0])
            .unwrap();
        assert!(resp[idx] > 0.999);
    }

    #[test]
    fn mixture_rejects_bad_parameters() {
        assert!(GaussianMixturePrior::new(vec![0.5, 0.6], vec![vec![0.0], vec![1.0]], 1.0).is_err());
        assert!(GaussianMixturePrior::new(vec![1.0], vec![vec![f64::NAN]], 1.0).is_err());
        assert!(GaussianMixturePrior::benchmark()
            .gmm_posterior_sample(&[0.0, 0.0], 0.0, &mut ChaCha8Rng::seed_from_u64(0))
            .is_err());
    }

    #[test]
    fn mixture_density_is_normalized() {
        let prior = GaussianMixturePrior::benchmark();
        let nodes = linspace(-10.0, 10.0, 801);
        let h = nodes[1] - nodes[0];
        let mut total = 0.0;
        for (i, &a) in nodes.iter().enumerate() {
            for (j, &b) in nodes.iter().enumerate() {
                total += trapezoid_weight(i, nodes.len(), h)
                    * trapezoid_weight(j, nodes.len(), h)
                    * prior.log_pdf(&[a, b]).exp();
            }
        }
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }
}
