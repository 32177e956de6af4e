//! Covariance-matched split Gibbs on a linear inverse problem
//! `y = H x + eta`, `eta ~ N(0, Sigma_eta)`, with a Gaussian-mixture prior.
//!
//! The split variable `z` carries noise `rho` (unit gain). The matched
//! sampler uses the likelihood covariance `Sigma_eta - rho^2 H H^T` on `z`,
//! so integrating `z` out returns the exact posterior; the unmatched sampler
//! keeps `Sigma_eta` and targets an inflated likelihood.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::{integrated_autocorrelation_time, js_from_probs, Histogram};
use crate::gibbs::burn_in_index;
use crate::numeric::{logsumexp, mean, variance};
use crate::prior::GaussianMixturePrior;
use crate::rng::{derive_seed, stream, Stream};

pub const HX_LO: f64 = -8.0;
pub const HX_HI: f64 = 8.0;
pub const HX_BINS: usize = 100;

#[derive(Debug, Clone)]
pub struct LinearInverseProblem {
    pub h: DMatrix<f64>,
    pub y: DVector<f64>,
    pub noise_cov: DMatrix<f64>,
    pub prior: GaussianMixturePrior,
}

impl LinearInverseProblem {
    pub fn new(h: DMatrix<f64>, y: DVector<f64>, noise_cov: DMatrix<f64>, prior: GaussianMixturePrior) -> Result<Self> {
        let (m, n) = h.shape();
        if y.len() != m || noise_cov.shape() != (m, m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: y.len().min(noise_cov.nrows()),
            });
        }
        if prior.means()[0].len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: prior.means()[0].len(),
            });
        }
        if Cholesky::new(noise_cov.clone()).is_none() {
            return Err(Error::domain("noise covariance must be positive definite"));
        }
        Ok(Self { h, y, noise_cov, prior })
    }

    /// White noise `Sigma_eta = sigma_eta^2 I`.
    pub fn white(h: DMatrix<f64>, y: DVector<f64>, sigma_eta: f64, prior: GaussianMixturePrior) -> Result<Self> {
        if !(sigma_eta > 0.0) {
            return Err(Error::domain("noise level must be positive"));
        }
        let m = h.nrows();
        Self::new(h, y, DMatrix::identity(m, m) * (sigma_eta * sigma_eta), prior)
    }

    /// `H = [1, 0]`, `y = 0`, `sigma_eta = 2.5`, 25-component benchmark mixture.
    pub fn benchmark() -> Self {
        Self::white(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::zeros(1),
            2.5,
            GaussianMixturePrior::benchmark(),
        )
        .expect("benchmark problem is valid")
    }

    pub fn dim(&self) -> usize {
        self.h.ncols()
    }

    /// `H x` for a single-row operator.
    pub fn project(&self, x: &[f64]) -> f64 {
        self.h.row(0).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// `[lambda_max(Sigma^{-1/2} H H^T Sigma^{-1/2})]^{-1/2}`.
pub fn rho_max(p: &LinearInverseProblem) -> Result<f64> {
    let eig = SymmetricEigen::new(p.noise_cov.clone());
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let m = &inv_sqrt * &p.h * p.h.transpose() * &inv_sqrt;
    let lmax = SymmetricEigen::new(m).eigenvalues.max();
    if !(lmax > 0.0) {
        return Err(Error::domain("forward operator is zero"));
    }
    Ok(1.0 / lmax.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub rho: f64,
    pub matched: bool,
}

impl SplitConfig {
    /// Split noise at the normalized level `r = rho / rho_max`.
    pub fn from_level(p: &LinearInverseProblem, r: f64, matched: bool) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("split level must be positive, got {r}")));
        }
        Ok(Self {
            rho: r * rho_max(p)?,
            matched,
        })
    }

    pub fn level(&self, p: &LinearInverseProblem) -> Result<f64> {
        Ok(self.rho / rho_max(p)?)
    }
}

/// `Sigma_eta - rho^2 H H^T` (matched) or `Sigma_eta` (unmatched).
pub fn split_covariance(p: &LinearInverseProblem, cfg: &SplitConfig) -> Result<DMatrix<f64>> {
    if !(cfg.rho > 0.0) {
        return Err(Error::domain("split noise must be positive"));
    }
    if !cfg.matched {
        return Ok(p.noise_cov.clone());
    }
    let rmax = rho_max(p)?;
    if cfg.rho >= rmax {
        return Err(Error::domain(format!(
            "matched split noise {} outside the admissible window (rho_max = {rmax})",
            cfg.rho
        )));
    }
    Ok(&p.noise_cov - &p.h * p.h.transpose() * (cfg.rho * cfg.rho))
}

/// Precomputed z-step of the split sampler.
#[derive(Debug, Clone)]
pub struct SplitSampler {
    pub cfg: SplitConfig,
    problem: LinearInverseProblem,
    /// `(I / rho^2 + H^T S^{-1} H)^{-1}`.
    z_cov: DMatrix<f64>,
    z_chol: DMatrix<f64>,
    /// `z_cov H^T S^{-1} y`.
    z_offset: DVector<f64>,
}

impl SplitSampler {
    pub fn new(problem: &LinearInverseProblem, cfg: SplitConfig) -> Result<Self> {
        let s = split_covariance(problem, &cfg)?;
        let s_inv = Cholesky::new(s)
            .ok_or_else(|| Error::domain("split covariance is not positive definite"))?
            .inverse();
        let n = problem.dim();
        let ht_sinv = problem.h.transpose() * &s_inv;
        let precision = DMatrix::identity(n, n) / (cfg.rho * cfg.rho) + &ht_sinv * &problem.h;
        let z_cov = Cholesky::new(precision)
            .ok_or_else(|| Error::domain("z-step precision is not positive definite"))?
            .inverse();
        let z_chol = Cholesky::<f64, Dyn>::new(z_cov.clone())
            .ok_or_else(|| Error::domain("z-step covariance is not positive definite"))?
            .l();
        let z_offset = &z_cov * ht_sinv * &problem.y;
        Ok(Self {
            cfg,
            problem: problem.clone(),
            z_cov,
            z_chol,
            z_offset,
        })
    }

    pub fn z_covariance(&self) -> &DMatrix<f64> {
        &self.z_cov
    }

    /// Mean of `z | x`.
    pub fn z_mean(&self, x: &[f64]) -> DVector<f64> {
        let xv = DVector::from_column_slice(x);
        &self.z_cov * xv / (self.cfg.rho * self.cfg.rho) + &self.z_offset
    }

    pub fn sample_z<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        let e = DVector::from_fn(x.len(), |_, _| StandardNormal.sample(rng));
        (self.z_mean(x) + &self.z_chol * e).iter().copied().collect()
    }

    /// One cycle: `z ~ p(z | x)`, then `x ~ p(x | z)` under the prior at noise `rho`.
    pub fn step<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.problem.dim(),
                got: x.len(),
            });
        }
        let z = self.sample_z(x, rng);
        let x_new = self.problem.prior.gmm_posterior_sample(&z, self.cfg.rho, rng)?;
        Ok((x_new, z))
    }
}

pub fn split_gibbs_step<R: Rng + ?Sized>(
    x: &[f64],
    cfg: SplitConfig,
    problem: &LinearInverseProblem,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    SplitSampler::new(problem, cfg)?.step(x, rng)
}

/// Exact posterior as a Gaussian mixture with shared covariance.
#[derive(Debug, Clone)]
pub struct ExactPosterior {
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub cov: DMatrix<f64>,
}

pub fn exact_posterior(p: &LinearInverseProblem) -> Result<ExactPosterior> {
    let sx2 = p.prior.component_std().powi(2);
    let n = p.dim();
    let s_inv = Cholesky::new(p.noise_cov.clone())
        .ok_or_else(|| Error::domain("noise covariance is not positive definite"))?
        .inverse();
    let cov = Cholesky::new(DMatrix::identity(n, n) / sx2 + p.h.transpose() * &s_inv * &p.h)
        .ok_or_else(|| Error::domain("posterior precision is not positive definite"))?
        .inverse();
    let marg = &p.h * p.h.transpose() * sx2 + &p.noise_cov;
    let marg_chol = Cholesky::new(marg).ok_or_else(|| Error::domain("evidence covariance is not positive definite"))?;
    let ht_sinv_y = p.h.transpose() * &s_inv * &p.y;
    let mut logw = Vec::with_capacity(p.prior.weights().len());
    let mut means = Vec::with_capacity(logw.capacity());
    for (&w, mu) in p.prior.weights().iter().zip(p.prior.means()) {
        let mu = DVector::from_column_slice(mu);
        let r = &p.y - &p.h * &mu;
        let quad = r.dot(&marg_chol.solve(&r));
        logw.push(w.ln() - 0.5 * quad);
        means.push(&cov * (&mu / sx2 + &ht_sinv_y));
    }
    let lse = logsumexp(&logw);
    Ok(ExactPosterior {
        weights: logw.iter().map(|l| (l - lse).exp()).collect(),
        means,
        cov,
    })
}

impl ExactPosterior {
    /// Bin probabilities of `a^T x` on uniform bins over `[lo, hi]`,
    /// renormalized over the range.
    pub fn projected_bin_probs(&self, a: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
        let av = DVector::from_column_slice(a);
        let sd = (av.transpose() * &self.cov * &av)[(0, 0)].sqrt();
        let width = (hi - lo) / bins as f64;
        let mut probs = vec![0.0; bins];
        for (w, m) in self.weights.iter().zip(&self.means) {
            let normal = Normal::new(av.dot(m), sd).map_err(|e| Error::domain(e.to_string()))?;
            for (b, p) in probs.iter_mut().enumerate() {
                let (l, h) = (lo + b as f64 * width, lo + (b + 1) as f64 * width);
                *p += w * (normal.cdf(h) - normal.cdf(l));
            }
        }
        let total: f64 = probs.iter().sum();
        Ok(probs.into_iter().map(|p| p / total).collect())
    }

    /// Normalized 2D density on an `n x n` grid over `[lo, hi]^2`
    /// (row-major in `(x_1, x_2)`).
    pub fn grid_density(&self, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
        if self.means[0].len() != 2 {
            return Err(Error::domain("grid density is defined for two-dimensional problems"));
        }
        let chol = Cholesky::new(self.cov.clone()).ok_or_else(|| Error::domain("singular posterior covariance"))?;
        let nodes = crate::numeric::linspace(lo, hi, n);
        let mut d = Vec::with_capacity(n * n);
        for &a in &nodes {
            for &b in &nodes {
                let x = DVector::from_column_slice(&[a, b]);
                let terms: Vec<f64> = self
                    .weights
                    .iter()
                    .zip(&self.means)
                    .map(|(w, m)| {
                        let r = &x - m;
                        w.ln() - 0.5 * r.dot(&chol.solve(&r))
                    })
                    .collect();
                d.push(logsumexp(&terms));
            }
        }
        let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let d: Vec<f64> = d.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = d.iter().sum();
        Ok(d.into_iter().map(|v| v / total).collect())
    }

    /// Total weight of the components whose mean satisfies `pred`.
    pub fn weight_where(&self, pred: impl Fn(&DVector<f64>) -> bool) -> f64 {
        self.weights.iter().zip(&self.means).filter(|(_, m)| pred(m)).map(|(w, _)| w).sum()
    }
}

/// Lag-one autocorrelation of the scalar matched chain with prior
/// `N(0, sigma_x^2)` and forward gain `h`.
pub fn ar1_mixing_prediction(sigma_x: f64, h: f64, sigma_eta: f64, rho: f64) -> Result<f64> {
    let rmax = sigma_eta / h.abs();
    if !(rho > 0.0 && rho < rmax) || !(sigma_x > 0.0) {
        return Err(Error::domain(format!("rho = {rho} outside (0, {rmax})")));
    }
    let sx2 = sigma_x * sigma_x;
    Ok(sx2 / (sx2 + rho * rho) * (1.0 - rho * rho / (rmax * rmax)))
}

/// Empirical lag-one autocorrelation of `x` along a scalar matched chain
/// (`y = 0`, started at 0).
pub fn scalar_chain_lag1(sigma_x: f64, h: f64, sigma_eta: f64, rho: f64, n: usize, seed: u64) -> Result<f64> {
    let problem = LinearInverseProblem::white(
        DMatrix::from_element(1, 1, h),
        DVector::zeros(1),
        sigma_eta,
        GaussianMixturePrior::gaussian(vec![0.0], sigma_x)?,
    )?;
    let sampler = SplitSampler::new(&problem, SplitConfig { rho, matched: true })?;
    let mut rng = stream(seed, Stream::Chain, 0);
    let mut x = vec![0.0];
    let mut series = Vec::with_capacity(n);
    for _ in 0..n {
        x = sampler.step(&x, &mut rng)?.0;
        series.push(x[0]);
    }
    let m = mean(&series);
    let v = variance(&series);
    let c1 = series.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / (n - 1) as f64;
    Ok(c1 / v)
}

/// Pooled post-burn-in samples of `n_chains` chains started from prior draws.
pub fn run_split_chains(
    problem: &LinearInverseProblem,
    cfg: SplitConfig,
    n_chains: usize,
    n_steps: usize,
    burn_in_fraction: f64,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    if n_chains == 0 || n_steps == 0 || !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::domain("invalid chain budget"));
    }
    let sampler = SplitSampler::new(problem, cfg)?;
    let burn = burn_in_index(n_steps, burn_in_fraction);
    (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, Stream::Chain, c as u64);
            let mut x = sample_mixture(&problem.prior, &mut rng);
            let mut out = Vec::with_capacity(n_steps - burn);
            for i in 0..n_steps {
                x = sampler.step(&x, &mut rng)?.0;
                if i >= burn {
                    out.push(x.clone());
                }
            }
            Ok(out)
        })
        .collect()
}

fn sample_mixture<R: Rng + ?Sized>(prior: &GaussianMixturePrior, rng: &mut R) -> Vec<f64> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut j = prior.weights().len() - 1;
    for (i, w) in prior.weights().iter().enumerate() {
        acc += w;
        if u < acc {
            j = i;
            break;
        }
    }
    prior.means()[j]
        .iter()
        .map(|m| {
            let e: f64 = StandardNormal.sample(rng);
            m + prior.component_std() * e
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitScanRow {
    pub method: String,
    pub r: f64,
    pub rho: f64,
    pub js: f64,
    pub js_err: f64,
    pub iat: f64,
    pub iat_err: f64,
    pub n_samples: usize,
}

/// Matched and unmatched samplers at every level in `r_values`. JS is taken
/// on the `Hx` marginal (100 bins on `[-8, 8]`) against the exact posterior;
/// its error is the spread over `groups` chain groups. The IAT of `Hx` is
/// averaged over chains with its standard error.
pub fn scan_split_noise(
    problem: &LinearInverseProblem,
    r_values: &[f64],
    n_steps: usize,
    n_chains: usize,
    burn_in_fraction: f64,
    groups: usize,
    seed: u64,
) -> Result<Vec<SplitScanRow>> {
    if problem.h.nrows() != 1 {
        return Err(Error::domain("the scan projects onto a single observation row"));
    }
    if r_values.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::domain("split levels must lie in (0, 1)"));
    }
    let groups = groups.clamp(1, n_chains);
    let exact = exact_posterior(problem)?;
    let a: Vec<f64> = problem.h.row(0).iter().copied().collect();
    let truth = exact.projected_bin_probs(&a, HX_LO, HX_HI, HX_BINS)?;
    let mut rows = Vec::new();
    for (mi, matched) in [true, false].into_iter().enumerate() {
        for (ri, &r) in r_values.iter().enumerate() {
            let cfg = SplitConfig::from_level(problem, r, matched)?;
            let s = derive_seed(seed, Stream::Scan, (mi * r_values.len() + ri) as u64);
            let chains = run_split_chains(problem, cfg, n_chains, n_steps, burn_in_fraction, s)?;
            let hx: Vec<Vec<f64>> = chains
                .iter()
                .map(|c| c.iter().map(|x| problem.project(x)).collect())
                .collect();
            let hist_of = |cs: &[Vec<f64>]| -> Result<Vec<f64>> {
                let mut h = Histogram::uniform(HX_LO, HX_HI, HX_BINS)?;
                for c in cs {
                    h.extend(c);
                }
                Ok(h.probabilities().probs)
            };
            let js = js_from_probs(&hist_of(&hx)?, &truth)?;
            let per_group = n_chains / groups;
            let group_js = (0..groups)
                .map(|g| js_from_probs(&hist_of(&hx[g * per_group..(g + 1) * per_group])?, &truth))
                .collect::<Result<Vec<_>>>()?;
            let taus = hx
                .iter()
                .map(|c| integrated_autocorrelation_time(c).map(|e| e.tau_int))
                .collect::<Result<Vec<_>>>()?;
            let spread = |v: &[f64]| {
                if v.len() < 2 {
                    f64::NAN
                } else {
                    (variance(v) * v.len() as f64 / (v.len() - 1) as f64 / v.len() as f64).sqrt()
                }
            };
            rows.push(SplitScanRow {
                method: if matched { "matched" } else { "unmatched" }.into(),
                r,
                rho: cfg.rho,
                js,
                js_err: spread(&group_js),
                iat: mean(&taus),
                iat_err: spread(&taus),
                n_samples: hx.iter().map(|c| c.len()).sum(),
            });
        }
    }
    Ok(rows)
}

/// Fraction of samples with `|x_1|` within `half_width` of `centre`.
pub fn column_mass(samples: &[Vec<f64>], centre: f64, half_width: f64) -> f64 {
    let hits = samples.iter().filter(|x| (x[0].abs() - centre).abs() <= half_width).count();
    hits as f64 / samples.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn rho_max_cases() {
        let p = LinearInverseProblem::benchmark();
        assert!((rho_max(&p).unwrap() - 2.5).abs() < 1e-12);
        let scaled = LinearInverseProblem { h: &p.h * 3.0, ..p.clone() };
        assert!((rho_max(&scaled).unwrap() - 2.5 / 3.0).abs() < 1e-12);
        let two = LinearInverseProblem::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 4.0])),
            GaussianMixturePrior::benchmark(),
        )
        .unwrap();
        assert!((rho_max(&two).unwrap() - 1.0).abs() < 1e-12);
        let zero = LinearInverseProblem { h: DMatrix::zeros(1, 2), ..p };
        assert!(rho_max(&zero).is_err());
    }

    #[test]
    fn matched_split_restores_noise_covariance() {
        let p = LinearInverseProblem::benchmark();
        let mut rng = seeded(3);
        for _ in 0..50 {
            let r: f64 = rng.random_range(0.01..0.999);
            let cfg = SplitConfig::from_level(&p, r, true).unwrap();
            let s = split_covariance(&p, &cfg).unwrap();
            let back = s + &p.h * p.h.transpose() * cfg.rho.powi(2);
            assert!((back - &p.noise_cov).amax() < 1e-12);
        }
        assert!(split_covariance(&p, &SplitConfig { rho: 2.5, matched: true }).is_err());
        assert!(split_covariance(&p, &SplitConfig { rho: 2.5, matched: false }).is_ok());
    }

    #[test]
    fn z_step_without_observation_is_isotropic() {
        // Huge noise: the likelihood term vanishes and z | x ~ N(x, rho^2 I).
        let p = LinearInverseProblem::white(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::zeros(1),
            1e8,
            GaussianMixturePrior::benchmark(),
        )
        .unwrap();
        let s = SplitSampler::new(&p, SplitConfig { rho: 0.7, matched: true }).unwrap();
        assert!((s.z_covariance() - DMatrix::identity(2, 2) * 0.49).amax() < 1e-9);
        let m = s.z_mean(&[1.5, -2.0]);
        assert!((m[0] - 1.5).abs() < 1e-9 && (m[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_prior_matched_chain_hits_conjugate_posterior() {
        let (sx, se) = (1.3, 2.0);
        let p = LinearInverseProblem::white(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.5]),
            DVector::from_column_slice(&[1.2]),
            se,
            GaussianMixturePrior::gaussian(vec![0.3, -0.4], sx).unwrap(),
        )
        .unwrap();
        let exact = exact_posterior(&p).unwrap();
        let cfg = SplitConfig::from_level(&p, 0.8, true).unwrap();
        let s = SplitSampler::new(&p, cfg).unwrap();
        let mut rng = seeded(9);
        let n = 1_000_000;
        let mut x = vec![0.0, 0.0];
        let mut cols = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for _ in 0..n {
            x = s.step(&x, &mut rng).unwrap().0;
            cols[0].push(x[0]);
            cols[1].push(x[1]);
        }
        for i in 0..2 {
            let se_m = crate::estimators::autocorr_corrected_se(&cols[i]).unwrap();
            assert!((mean(&cols[i]) - exact.means[0][i]).abs() < 4.0 * se_m, "mean {i}");
            let sq: Vec<f64> = cols[i].iter().map(|v| (v - exact.means[0][i]).powi(2)).collect();
            let se_v = crate::estimators::autocorr_corrected_se(&sq).unwrap();
            assert!((mean(&sq) - exact.cov[(i, i)]).abs() < 4.0 * se_v, "var {i}");
        }
    }

    #[test]
    fn exact_posterior_cases() {
        let p = LinearInverseProblem::benchmark();
        let post = exact_posterior(&p).unwrap();
        assert!((post.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Reflection x_1 -> -x_1 maps component (a, b) to (-a, b).
        for (w, m) in post.weights.iter().zip(&post.means) {
            let mirror = post
                .means
                .iter()
                .position(|n| (n[0] + m[0]).abs() < 1e-9 && (n[1] - m[1]).abs() < 1e-9)
                .unwrap();
            assert!((post.weights[mirror] - w).abs() < 1e-12);
        }
        let centre = post.weight_where(|m| m[0].abs() < 0.5);
        let outer = post.weight_where(|m| m[0] > 4.0);
        assert!(centre > outer && centre > post.weight_where(|m| m[0] < -4.0));

        let flat = LinearInverseProblem::white(p.h.clone(), p.y.clone(), 1e9, p.prior.clone()).unwrap();
        let post = exact_posterior(&flat).unwrap();
        for (a, b) in post.weights.iter().zip(p.prior.weights()) {
            assert!((a - b).abs() < 1e-9);
        }
        let probs = exact_posterior(&p).unwrap().projected_bin_probs(&[1.0, 0.0], -8.0, 8.0, 100).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let g = exact_posterior(&p).unwrap().grid_density(-7.0, 7.0, 41).unwrap();
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ar1_prediction_limits_and_monotonicity() {
        assert!((ar1_mixing_prediction(1.0, 1.0, 2.5, 1.0).unwrap() - 0.42).abs() < 1e-12);
        assert!(ar1_mixing_prediction(1.0, 1.0, 2.5, 1e-6).unwrap() > 1.0 - 1e-9);
        assert!(ar1_mixing_prediction(1.0, 1.0, 2.5, 2.5 - 1e-9).unwrap() < 1e-8);
        assert!(ar1_mixing_prediction(1.0, 1.0, 2.5, 2.5).is_err());
        let grid = crate::numeric::linspace(1e-3, 2.499, 2000);
        let phi: Vec<f64> = grid.iter().map(|&r| ar1_mixing_prediction(0.8, 1.0, 2.5, r).unwrap()).collect();
        assert!(phi.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn scalar_chain_matches_ar1_prediction() {
        let got = scalar_chain_lag1(1.0, 1.0, 2.5, 1.0, 200_000, 5).unwrap();
        assert!((got - 0.42).abs() < 0.03, "{got}");
    }

    #[test]
    fn column_mass_counts_both_sides() {
        let s = vec![vec![5.1, 0.0], vec![-4.9, 1.0], vec![0.0, 0.0], vec![2.5, 0.0]];
        assert_eq!(column_mass(&s, 5.0, 1.25), 0.5);
    }
}
