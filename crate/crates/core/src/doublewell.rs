//! Coupled double well:
//! `U = A (x_sys^2 - 1)^2 + k_c/2 (x_sys - x_env)^2 + k_b/2 (x_env - u_eq)^2`.
//!
//! The system coordinate carries the quartic prior; the coupling and the
//! environment form the context. Aggregation draws the noisy system coordinate
//! `s` and `x_env` jointly from their bivariate Gaussian conditional.

use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{ContextMode, DoubleWellContext};
use crate::error::{Error, Result};
use crate::estimators::{
    js_divergence, mbar_bootstrap_se, mbar_solve, pooled_autocorrelation_time, BinnedProbabilities, Histogram,
};
use crate::gibbs::{burn_in_index, ggpa_sweep, AugmentedState, PriorSet, SystemAdapter};
use crate::numeric::{linspace, trapezoid_weight};
use crate::prior::{Grid1DPrior, PriorModel};
use crate::replica::{ggpa_re_run, mbar_input_from_kernel_stats, LadderContext, ReplicaLadder, SwapReportRow};
use crate::rng::{derive_seed, stream, Stream};
use crate::schedule::{ForwardKernel, NoiseSchedule};

/// Histogram range and bin count for every `x_sys` comparison.
pub const HIST_LO: f64 = -2.5;
pub const HIST_HI: f64 = 2.5;
pub const HIST_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellParams {
    pub a: f64,
    pub k_c: f64,
    pub k_b: f64,
    pub u_eq: f64,
}

impl Default for DoubleWellParams {
    fn default() -> Self {
        Self {
            a: 8.0,
            k_c: 4.0,
            k_b: 1.0,
            u_eq: 1.0,
        }
    }
}

impl DoubleWellParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.k_c >= 0.0 && self.k_b > 0.0 && self.u_eq.is_finite()) {
            return Err(Error::domain(format!("invalid double-well parameters {self:?}")));
        }
        Ok(())
    }

    /// The prior on `x_sys`: `exp(-A (x^2 - 1)^2)` on `[-3, 3]`.
    pub fn prior(&self) -> Result<Grid1DPrior> {
        Grid1DPrior::quartic(self.a)
    }
}

pub fn total_energy(x_sys: f64, x_env: f64, p: &DoubleWellParams) -> f64 {
    let w = x_sys * x_sys - 1.0;
    let c = x_sys - x_env;
    let e = x_env - p.u_eq;
    p.a * w * w + 0.5 * p.k_c * c * c + 0.5 * p.k_b * e * e
}

/// `(dU/dx_sys, dU/dx_env)`.
pub fn energy_gradient(x_sys: f64, x_env: f64, p: &DoubleWellParams) -> (f64, f64) {
    let c = x_sys - x_env;
    (
        4.0 * p.a * x_sys * (x_sys * x_sys - 1.0) + p.k_c * c,
        -p.k_c * c + p.k_b * (x_env - p.u_eq),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellState {
    /// Noisy system coordinate.
    pub s: f64,
    pub x_env: f64,
}

/// Mean and covariance `[[c_ss, c_se], [c_se, c_ee]]` of `(s, x_env)` given the
/// clean system variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateConditional {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    pub precision: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWellAdapter {
    pub params: DoubleWellParams,
    pub context: DoubleWellContext,
}

impl DoubleWellAdapter {
    pub fn new(params: DoubleWellParams, mode: ContextMode, schedule: &NoiseSchedule) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            context: DoubleWellContext::new(params.k_c, params.k_b, params.u_eq, mode, schedule)?,
        })
    }

    pub fn conditional(&self, x_clean: f64, kernel: &ForwardKernel) -> AggregateConditional {
        let (kappa, a) = (self.context.kappa(), self.context.gain());
        let var = kernel.variance();
        let p_ss = 1.0 / var + kappa;
        let p_se = -kappa * a;
        let p_ee = kappa * a * a + self.params.k_b;
        let b = [kernel.alpha * x_clean / var, self.params.k_b * self.params.u_eq];
        let det = p_ss * p_ee - p_se * p_se;
        let cov = [[p_ee / det, -p_se / det], [-p_se / det, p_ss / det]];
        let mean = [
            cov[0][0] * b[0] + cov[0][1] * b[1],
            cov[1][0] * b[0] + cov[1][1] * b[1],
        ];
        AggregateConditional {
            mean,
            cov,
            precision: [[p_ss, p_se], [p_se, p_ee]],
        }
    }
}

/// Exact draw of `(s, x_env)` through the Cholesky factor of the precision.
pub fn aggregate_doublewell(
    adapter: &DoubleWellAdapter,
    x_clean: f64,
    kernel: &ForwardKernel,
    rng: &mut dyn RngCore,
) -> DoubleWellState {
    let c = adapter.conditional(x_clean, kernel);
    let [[p_ss, p_se], [_, p_ee]] = c.precision;
    // P = L L^T; w = L^{-T} z has covariance P^{-1}.
    let l11 = p_ss.sqrt();
    let l21 = p_se / l11;
    let l22 = (p_ee - l21 * l21).sqrt();
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    let w2 = z2 / l22;
    let w1 = (z1 - l21 * w2) / l11;
    DoubleWellState {
        s: c.mean[0] + w1,
        x_env: c.mean[1] + w2,
    }
}

impl SystemAdapter for DoubleWellAdapter {
    type State = DoubleWellState;

    fn projection_len(&self) -> usize {
        1
    }

    fn project(&self, s: &DoubleWellState, out: &mut [f64]) {
        out[0] = s.s;
    }

    fn log_context(&self, s: &DoubleWellState, _t: f64) -> f64 {
        self.context.log_context(s.s, s.x_env)
    }

    fn aggregate(
        &self,
        x: &[f64],
        kernel: &ForwardKernel,
        _t: f64,
        rng: &mut dyn RngCore,
    ) -> Result<DoubleWellState> {
        Ok(aggregate_doublewell(self, x[0], kernel, rng))
    }
}

pub fn initial_state(t: f64) -> AugmentedState<DoubleWellState> {
    AugmentedState::new(DoubleWellState { s: 1.0, x_env: 1.0 }, vec![1.0], t)
}

/// Bin probabilities of the `x_sys` marginal of `exp(-U)` on
/// `[HIST_LO, HIST_HI] x [-2.5, 3.5]`. `x_env` uses the trapezoid rule on
/// `n_grid` nodes; each `x_sys` bin uses 8-point Gauss-Legendre.
pub fn ground_truth_marginal(params: &DoubleWellParams, n_grid: usize) -> Result<BinnedProbabilities> {
    params.validate()?;
    if n_grid < 512 {
        return Err(Error::domain(format!("n_grid must be >= 512, got {n_grid}")));
    }
    let env = linspace(-2.5, 3.5, n_grid);
    let h = env[1] - env[0];
    let hist = Histogram::uniform(HIST_LO, HIST_HI, HIST_BINS)?;
    let density = |x: f64| -> f64 {
        env.iter()
            .enumerate()
            .map(|(i, &e)| trapezoid_weight(i, n_grid, h) * (-total_energy(x, e, params)).exp())
            .sum()
    };
    let mut probs: Vec<f64> = hist
        .edges
        .windows(2)
        .map(|w| {
            let (c, r) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            GL8.iter().map(|(node, wt)| wt * r * density(c + r * node)).sum()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(BinnedProbabilities {
        edges: hist.edges,
        probs,
    })
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    pub dt: f64,
    pub n_samples: usize,
    /// Integration steps between recorded frames.
    pub record_every: usize,
    pub n_traj: usize,
    pub init: (f64, f64),
}

impl Default for LangevinConfig {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            n_samples: 25_000,
            record_every: 200,
            n_traj: 5,
            init: (1.0, 1.0),
        }
    }
}

/// Overdamped Langevin trajectories by Euler-Maruyama,
/// `x <- x - grad U dt + sqrt(2 dt) eta`. Returns `(x_sys, x_env)` frames.
pub fn langevin_baseline(
    params: &DoubleWellParams,
    cfg: &LangevinConfig,
    seed: u64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    langevin_with_force(cfg, seed, |x, e| energy_gradient(x, e, params))
}

pub fn langevin_with_force<F>(cfg: &LangevinConfig, seed: u64, grad: F) -> Result<Vec<Vec<(f64, f64)>>>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    if !(cfg.dt > 0.0) || cfg.record_every == 0 {
        return Err(Error::domain("Langevin needs dt > 0 and record_every >= 1"));
    }
    let noise = (2.0 * cfg.dt).sqrt();
    Ok((0..cfg.n_traj)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, Stream::Baseline, k as u64);
            let (mut x, mut e) = cfg.init;
            let mut frames = Vec::with_capacity(cfg.n_samples);
            for _ in 0..cfg.n_samples {
                for _ in 0..cfg.record_every {
                    let (gx, ge) = grad(x, e);
                    let zx: f64 = StandardNormal.sample(&mut rng);
                    let ze: f64 = StandardNormal.sample(&mut rng);
                    x += -gx * cfg.dt + noise * zx;
                    e += -ge * cfg.dt + noise * ze;
                }
                frames.push((x, e));
            }
            frames
        })
        .collect())
}

/// Clean and noisy `x_sys` series from a batch of independent chains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainBatch {
    pub clean: Vec<Vec<f64>>,
    pub noisy: Vec<Vec<f64>>,
    pub burn_in: usize,
}

impl ChainBatch {
    pub fn n_production(&self) -> usize {
        self.clean.iter().map(|c| c.len() - self.burn_in).sum()
    }

    fn production<'a>(&self, series: &'a [Vec<f64>]) -> Vec<&'a [f64]> {
        series.iter().map(|c| &c[self.burn_in..]).collect()
    }

    pub fn clean_production(&self) -> Vec<&[f64]> {
        self.production(&self.clean)
    }

    pub fn noisy_production(&self) -> Vec<&[f64]> {
        self.production(&self.noisy)
    }
}

/// `n_chains` independent fixed-`t` chains from `(1, 1)`.
pub fn run_fixed_t_chains(
    params: &DoubleWellParams,
    schedule: &NoiseSchedule,
    t: f64,
    mode: ContextMode,
    n_chains: usize,
    n_sweeps: usize,
    burn_in_fraction: f64,
    seed: u64,
) -> Result<ChainBatch> {
    let adapter = DoubleWellAdapter::new(*params, mode, schedule)?;
    let priors = PriorSet::new(vec![Arc::new(params.prior()?)]);
    check_budget(n_chains, n_sweeps, burn_in_fraction)?;
    let runs = (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, Stream::Chain, c as u64);
            let mut state = initial_state(t);
            let mut clean = Vec::with_capacity(n_sweeps);
            let mut noisy = Vec::with_capacity(n_sweeps);
            for _ in 0..n_sweeps {
                ggpa_sweep(&mut state, &adapter, &priors, schedule, &mut rng)?;
                clean.push(state.x[0]);
                noisy.push(state.s.s);
            }
            Ok((clean, noisy))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(split_runs(runs, burn_in_index(n_sweeps, burn_in_fraction)))
}

/// `n_chains` independent replica-exchange ladders sharing the context
/// frozen at `anchor_t`; the production replica is `times[0]`.
pub fn run_re_chains(
    params: &DoubleWellParams,
    schedule: &NoiseSchedule,
    times: &[f64],
    anchor_t: f64,
    n_chains: usize,
    n_sweeps: usize,
    burn_in_fraction: f64,
    seed: u64,
) -> Result<(ChainBatch, Vec<SwapReportRow>)> {
    let adapter = DoubleWellAdapter::new(*params, ContextMode::Annealed { anchor_t }, schedule)?;
    let priors = PriorSet::new(vec![Arc::new(params.prior()?)]);
    check_budget(n_chains, n_sweeps, burn_in_fraction)?;
    let runs = (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let r = times.len();
            let mut ladder = ReplicaLadder::new(
                times.to_vec(),
                vec![adapter; r],
                (0..r).map(|_| initial_state(0.0)).collect(),
                LadderContext::FixedAnchor { anchor_t },
                schedule,
                derive_seed(seed, Stream::Chain, c as u64),
            )?
            .with_parallel(false);
            let run = ggpa_re_run(&mut ladder, &priors, schedule, n_sweeps, burn_in_fraction, false, |_, s| {
                (s.x[0], s.s.s)
            })?;
            let (clean, noisy) = run.series[0].values.iter().copied().unzip();
            Ok(((clean, noisy), run.swaps))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut swaps: Vec<SwapReportRow> = Vec::new();
    let mut series = Vec::with_capacity(runs.len());
    for (s, rows) in runs {
        series.push(s);
        if swaps.is_empty() {
            swaps = rows;
        } else {
            for (acc, row) in swaps.iter_mut().zip(rows) {
                acc.attempts += row.attempts;
                acc.accepts += row.accepts;
            }
        }
    }
    for row in &mut swaps {
        row.rate = if row.attempts == 0 { 0.0 } else { row.accepts as f64 / row.attempts as f64 };
    }
    Ok((split_runs(series, burn_in_index(n_sweeps, burn_in_fraction)), swaps))
}

/// MBAR free energies of the replica states of one fixed-anchor ladder, with
/// block-bootstrap standard errors. Every post-burn-in sweep of every replica
/// contributes one sample.
pub fn re_ladder_free_energies(
    params: &DoubleWellParams,
    schedule: &NoiseSchedule,
    times: &[f64],
    anchor_t: f64,
    n_sweeps: usize,
    burn_in_fraction: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_budget(1, n_sweeps, burn_in_fraction)?;
    let adapter = DoubleWellAdapter::new(*params, ContextMode::Annealed { anchor_t }, schedule)?;
    let priors = PriorSet::new(vec![Arc::new(params.prior()?)]);
    let r = times.len();
    let mut ladder = ReplicaLadder::new(
        times.to_vec(),
        vec![adapter; r],
        (0..r).map(|_| initial_state(0.0)).collect(),
        LadderContext::FixedAnchor { anchor_t },
        schedule,
        seed,
    )?
    .with_parallel(false);
    let burn = burn_in_index(n_sweeps, burn_in_fraction);
    let mut stats = vec![Vec::with_capacity(n_sweeps - burn); r];
    for i in 0..n_sweeps {
        ladder.sweep(&priors, schedule)?;
        if i >= burn {
            for (k, s) in stats.iter_mut().enumerate() {
                s.push(ladder.kernel_stats(k));
            }
        }
    }
    let input = mbar_input_from_kernel_stats(&stats, ladder.kernels())?;
    let f = mbar_solve(&input, 1e-10, 10_000)?.f;
    let mut rng = stream(seed, Stream::Bootstrap, 0);
    let se = mbar_bootstrap_se(&input, 100, 50, 1e-8, &mut rng)?;
    Ok((f, se))
}

/// Exact prior draws: the context-free baseline.
pub fn direct_prior_samples(params: &DoubleWellParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let prior = params.prior()?;
    let mut rng = stream(seed, Stream::Baseline, u64::MAX >> 16);
    let mut out = [0.0];
    Ok((0..n)
        .map(|_| {
            prior.sample_prior(&mut rng, &mut out);
            out[0]
        })
        .collect())
}

fn check_budget(n_chains: usize, n_sweeps: usize, burn: f64) -> Result<()> {
    if n_chains == 0 || n_sweeps == 0 || !(0.0..1.0).contains(&burn) {
        return Err(Error::domain("need n_chains >= 1, n_sweeps >= 1, burn-in in [0, 1)"));
    }
    Ok(())
}

fn split_runs(runs: Vec<(Vec<f64>, Vec<f64>)>, burn_in: usize) -> ChainBatch {
    let (clean, noisy) = runs.into_iter().unzip();
    ChainBatch { clean, noisy, burn_in }
}

pub fn histogram_of(chains: &[&[f64]]) -> Result<Histogram> {
    let mut h = Histogram::uniform(HIST_LO, HIST_HI, HIST_BINS)?;
    for c in chains {
        h.extend(c);
    }
    Ok(h)
}

pub fn basin_indicator(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect()
}

/// JS and basin-indicator IAT of a chain batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub js_clean: f64,
    pub js_noisy: f64,
    /// Standard deviation of `js_clean` over chain groups, divided by the
    /// square root of the group count.
    pub js_err: f64,
    pub iat: f64,
    pub iat_err: f64,
    pub n_samples: usize,
}

/// `groups` splits the chains into disjoint subsets for the error bars.
pub fn batch_metrics(batch: &ChainBatch, truth: &BinnedProbabilities, groups: usize) -> Result<BatchMetrics> {
    let clean = batch.clean_production();
    let noisy = batch.noisy_production();
    let js_clean = js_divergence(&histogram_of(&clean)?.probabilities(), truth)?;
    let js_noisy = js_divergence(&histogram_of(&noisy)?.probabilities(), truth)?;
    let indicators: Vec<Vec<f64>> = clean.iter().map(|c| basin_indicator(c)).collect();
    let iat = pooled_autocorrelation_time(&indicators)?.tau_int;
    let groups = groups.clamp(1, clean.len());
    let (mut js_g, mut iat_g) = (Vec::new(), Vec::new());
    if groups >= 2 {
        for g in 0..groups {
            let members: Vec<usize> = (g..clean.len()).step_by(groups).collect();
            let sub: Vec<&[f64]> = members.iter().map(|&i| clean[i]).collect();
            js_g.push(js_divergence(&histogram_of(&sub)?.probabilities(), truth)?);
            let ind: Vec<&Vec<f64>> = members.iter().map(|&i| &indicators[i]).collect();
            iat_g.push(pooled_autocorrelation_time(&ind)?.tau_int);
        }
    }
    Ok(BatchMetrics {
        js_clean,
        js_noisy,
        js_err: group_se(&js_g),
        iat,
        iat_err: group_se(&iat_g),
        n_samples: batch.n_production(),
    })
}

fn group_se(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = crate::numeric::mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

/// Basin-indicator IAT of the Langevin frames after burn-in, with an error
/// from per-trajectory estimates.
pub fn langevin_iat(frames: &[Vec<(f64, f64)>], burn_in_fraction: f64) -> Result<(f64, f64)> {
    let ind: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| {
            let b = burn_in_index(f.len(), burn_in_fraction);
            f[b..].iter().map(|&(x, _)| if x > 0.0 { 1.0 } else { 0.0 }).collect()
        })
        .collect();
    let pooled = pooled_autocorrelation_time(&ind)?.tau_int;
    let per: Vec<f64> = ind
        .iter()
        .map(|c| pooled_autocorrelation_time(&[c]).map(|e| e.tau_int))
        .collect::<Result<_>>()?;
    Ok((pooled, group_se(&per)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::joint_log_density;
    use crate::rng::seeded;

    #[test]
    fn energy_plug_in_values() {
        let p = DoubleWellParams::default();
        assert_eq!(total_energy(1.0, 1.0, &p), 0.0);
        assert_eq!(total_energy(-1.0, 1.0, &p), 8.0);
        assert_eq!(total_energy(0.0, 1.0, &p), 10.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = DoubleWellParams::default();
        let (x, e, h) = (0.37, -0.81, 1e-6);
        let (gx, ge) = energy_gradient(x, e, &p);
        let fx = (total_energy(x + h, e, &p) - total_energy(x - h, e, &p)) / (2.0 * h);
        let fe = (total_energy(x, e + h, &p) - total_energy(x, e - h, &p)) / (2.0 * h);
        assert!((gx - fx).abs() < 1e-6 && (ge - fe).abs() < 1e-6);
    }

    #[test]
    fn decoupled_aggregate_factorizes() {
        let p = DoubleWellParams {
            k_c: 0.0,
            ..Default::default()
        };
        let sched = NoiseSchedule::default();
        let ad = DoubleWellAdapter::new(p, ContextMode::Unannealed, &sched).unwrap();
        let k = sched.kernel(0.3).unwrap();
        let c = ad.conditional(0.7, &k);
        assert!((c.mean[0] - k.alpha * 0.7).abs() < 1e-12);
        assert!((c.cov[0][0] - k.variance()).abs() < 1e-12);
        assert_eq!(c.cov[0][1], 0.0);
        assert!((c.mean[1] - 1.0).abs() < 1e-12 && (c.cov[1][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_t_annealed_env_conditional() {
        let p = DoubleWellParams::default();
        let sched = NoiseSchedule::default();
        let t = 1e-6;
        let ad = DoubleWellAdapter::new(p, ContextMode::Annealed { anchor_t: t }, &sched).unwrap();
        let c = ad.conditional(0.6, &sched.kernel(t).unwrap());
        assert!((c.mean[0] - 0.6).abs() < 1e-4);
        assert!((c.mean[1] - (4.0 * 0.6 + 1.0) / 5.0).abs() < 1e-4);
        assert!((c.cov[1][1] - 0.2).abs() < 1e-4);
    }

    #[test]
    fn aggregate_moments_match_conditional() {
        let p = DoubleWellParams::default();
        let sched = NoiseSchedule::default();
        let ad = DoubleWellAdapter::new(p, ContextMode::Annealed { anchor_t: 0.2 }, &sched).unwrap();
        let k = sched.kernel(0.2).unwrap();
        let c = ad.conditional(1.0, &k);
        let mut rng = seeded(3);
        let n = 200_000;
        let draws: Vec<DoubleWellState> = (0..n).map(|_| aggregate_doublewell(&ad, 1.0, &k, &mut rng)).collect();
        let ms = draws.iter().map(|d| d.s).sum::<f64>() / n as f64;
        let me = draws.iter().map(|d| d.x_env).sum::<f64>() / n as f64;
        let cse = draws.iter().map(|d| (d.s - ms) * (d.x_env - me)).sum::<f64>() / n as f64;
        let se = |v: f64| 4.0 * (v / n as f64).sqrt();
        assert!((ms - c.mean[0]).abs() < se(c.cov[0][0]));
        assert!((me - c.mean[1]).abs() < se(c.cov[1][1]));
        let se_cov = 4.0 * ((c.cov[0][0] * c.cov[1][1] + c.cov[0][1].powi(2)) / n as f64).sqrt();
        assert!((cse - c.cov[0][1]).abs() < se_cov);
    }

    #[test]
    fn joint_density_hand_value() {
        let p = DoubleWellParams::default();
        let sched = NoiseSchedule::default();
        let ad = DoubleWellAdapter::new(p, ContextMode::Annealed { anchor_t: 0.2 }, &sched).unwrap();
        let priors = PriorSet::new(vec![Arc::new(p.prior().unwrap())]);
        let (alpha, sigma) = sched.alpha_sigma(0.2).unwrap();
        let kappa = 4.0 / (alpha * alpha - 4.0 * sigma * sigma);
        let expected = -0.5 * kappa * (1.0 - alpha).powi(2)
            - 0.5 * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
            - (1.0 - alpha).powi(2) / (2.0 * sigma * sigma);
        let got = joint_log_density(&initial_state(0.2), &ad, &priors, &sched).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn truth_marginal_asymmetry_and_symmetry() {
        let truth = ground_truth_marginal(&DoubleWellParams::default(), 512).unwrap();
        let right: f64 = truth.probs[50..].iter().sum();
        assert!(right > 0.5);
        let sym = ground_truth_marginal(
            &DoubleWellParams {
                k_c: 0.0,
                ..Default::default()
            },
            512,
        )
        .unwrap();
        for i in 0..HIST_BINS {
            assert!((sym.probs[i] - sym.probs[HIST_BINS - 1 - i]).abs() < 1e-9);
        }
        let fine = ground_truth_marginal(&DoubleWellParams::default(), 1024).unwrap();
        let worst = truth.probs.iter().zip(&fine.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "grid doubling moved a bin by {worst:e}");
    }

    #[test]
    fn truth_matches_closed_form_marginal() {
        // Integrating x_env analytically (the box barely truncates the Gaussian
        // in the wells) leaves exp(-A (x^2-1)^2 - 0.4 (x-1)^2).
        let truth = ground_truth_marginal(&DoubleWellParams::default(), 2048).unwrap();
        let f = |x: f64| (-8.0 * (x * x - 1.0).powi(2) - 0.4 * (x - 1.0).powi(2)).exp();
        let mut closed: Vec<f64> = truth
            .edges
            .windows(2)
            .map(|w| {
                let n = 200;
                let h = (w[1] - w[0]) / n as f64;
                (0..=n).map(|i| trapezoid_weight(i, n + 1, h) * f(w[0] + i as f64 * h)).sum()
            })
            .collect();
        let z: f64 = closed.iter().sum();
        closed.iter_mut().for_each(|v| *v /= z);
        let js = crate::estimators::js_from_probs(&truth.probs, &closed).unwrap();
        assert!(js < 1e-6, "js {js}");
    }

    #[test]
    fn free_brownian_motion_variance() {
        let cfg = LangevinConfig {
            dt: 1e-2,
            n_samples: 1,
            record_every: 50,
            n_traj: 4000,
            init: (0.0, 0.0),
        };
        let frames = langevin_with_force(&cfg, 5, |_, _| (0.0, 0.0)).unwrap();
        let xs: Vec<f64> = frames.iter().map(|f| f[0].0).collect();
        let var = crate::numeric::mean(&xs.iter().map(|x| x * x).collect::<Vec<_>>());
        let expected = 2.0 * 50.0 * 1e-2;
        let se = expected * (2.0 / xs.len() as f64).sqrt();
        assert!((var - expected).abs() < 4.0 * se, "var {var}");
    }

    #[test]
    fn chains_replay_bitwise() {
        let p = DoubleWellParams::default();
        let sched = NoiseSchedule::default();
        let run = || run_fixed_t_chains(&p, &sched, 0.2, ContextMode::Annealed { anchor_t: 0.2 }, 3, 20, 0.2, 11).unwrap();
        assert_eq!(run(), run());
    }
}
