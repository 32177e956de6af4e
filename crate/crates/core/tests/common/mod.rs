//! Statistical checks shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::sync::Arc;

use ggpa::context::ContextMode;
use ggpa::doublewell::{aggregate_doublewell, DoubleWellAdapter, DoubleWellParams, DoubleWellState};
use ggpa::gibbs::{ggpa_sweep, joint_log_density, AugmentedState, PriorSet, ScalarGaussianAdapter, SystemAdapter};
use ggpa::prior::{GaussianMixturePrior, PriorModel};
use ggpa::replica::{LadderContext, ReplicaLadder};
use ggpa::rng::seeded;
use ggpa::schedule::{ForwardKernel, NoiseSchedule};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use statrs::statistics::Distribution as _;

/// Pearson statistic and p-value of `counts` against `probs`. Cells with
/// expected count below 5 are pooled into one.
pub fn chi_square(counts: &[usize], probs: &[f64]) -> (f64, usize, f64) {
    let n: usize = counts.iter().sum();
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut rest_o, mut rest_e) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * n as f64;
        if e < 5.0 {
            rest_o += c as f64;
            rest_e += e;
        } else {
            obs.push(c as f64);
            exp.push(e);
        }
    }
    if rest_e > 0.0 {
        obs.push(rest_o);
        exp.push(rest_e);
    }
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = obs.len() - 1;
    let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
    (stat, dof, p)
}

fn bin_of(edges: &[f64], v: f64) -> usize {
    edges.iter().take_while(|&&e| v >= e).count()
}

pub struct InvarianceReport {
    pub xs: (f64, usize, f64),
    pub env: (f64, usize, f64),
}

/// Start `n_chains` chains from a grid discretization of the joint target of
/// the double-well at `t`, run one sweep, and compare the coarse-binned
/// `(x_clean, s)` and `x_env` marginals with the grid ones.
pub fn pi_t_invariance(t: f64, mode: ContextMode, n_chains: usize, seed: u64) -> InvarianceReport {
    let params = DoubleWellParams::default();
    let sched = NoiseSchedule::default();
    let adapter = DoubleWellAdapter::new(params, mode, &sched).unwrap();
    let prior = params.prior().unwrap();
    let priors = PriorSet::new(vec![Arc::new(prior.clone())]);
    let kernel = sched.kernel(t).unwrap();

    // Cell centres; bin edges below fall on cell boundaries.
    let cells = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        let h = (hi - lo) / n as f64;
        (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect()
    };
    let (xg, sg, eg) = (cells(-2.5, 2.5, 200), cells(-3.5, 3.5, 280), cells(-3.0, 4.0, 140));
    let (hx, hs, he) = (0.025, 0.025, 0.05);
    let lp: Vec<f64> = xg.iter().map(|&x| prior.log_density(&[x])).collect();
    let ctx = |s: f64, e: f64| adapter.log_context(&DoubleWellState { s, x_env: e }, t);

    // Spot check the factorized log density against the library's.
    let probe = |x: f64, s: f64, e: f64| {
        let st = AugmentedState::new(DoubleWellState { s, x_env: e }, vec![x], t);
        joint_log_density(&st, &adapter, &priors, &sched).unwrap()
    };
    let fact = |x: f64, s: f64, e: f64| prior.log_density(&[x]) + kernel.logpdf_scalar(s, x) + ctx(s, e);
    let shift = probe(0.3, 0.2, 0.9) - fact(0.3, 0.2, 0.9);
    assert!((probe(-1.1, -0.7, 1.4) - fact(-1.1, -0.7, 1.4) - shift).abs() < 1e-9);

    let mut w_xs = vec![0.0; xg.len() * sg.len()];
    let mut w_se = vec![0.0; sg.len() * eg.len()];
    let mut max_log = f64::NEG_INFINITY;
    let lc: Vec<f64> = sg.iter().flat_map(|&s| eg.iter().map(move |&e| (s, e))).map(|(s, e)| ctx(s, e)).collect();
    for (j, _) in sg.iter().enumerate() {
        for k in 0..eg.len() {
            max_log = max_log.max(lc[j * eg.len() + k]);
        }
    }
    // Marginal context weight of each s cell.
    let ctx_s: Vec<f64> = (0..sg.len())
        .map(|j| (0..eg.len()).map(|k| (lc[j * eg.len() + k] - max_log).exp()).sum())
        .collect();
    for (j, row) in w_se.chunks_mut(eg.len()).enumerate() {
        for (k, w) in row.iter_mut().enumerate() {
            *w = (lc[j * eg.len() + k] - max_log).exp();
        }
    }
    for (i, &x) in xg.iter().enumerate() {
        for (j, &s) in sg.iter().enumerate() {
            w_xs[i * sg.len() + j] = (lp[i] + kernel.logpdf_scalar(s, x)).exp() * ctx_s[j];
        }
    }

    let x_edges = [-1.2, -0.6, 0.0, 0.6, 1.2];
    let s_edges = [-1.2, -0.6, 0.0, 0.6, 1.2];
    let e_edges = [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
    let n_xs = (x_edges.len() + 1) * (s_edges.len() + 1);
    let total: f64 = w_xs.iter().sum();
    let mut p_xs = vec![0.0; n_xs];
    for (i, &x) in xg.iter().enumerate() {
        for (j, &s) in sg.iter().enumerate() {
            p_xs[bin_of(&x_edges, x) * (s_edges.len() + 1) + bin_of(&s_edges, s)] += w_xs[i * sg.len() + j] / total;
        }
    }
    // x_env marginal: sum over (x, s) of w_xs times the e-conditional given s.
    let mut p_e = vec![0.0; e_edges.len() + 1];
    let s_mass: Vec<f64> = (0..sg.len()).map(|j| (0..xg.len()).map(|i| w_xs[i * sg.len() + j]).sum::<f64>() / total).collect();
    for (j, row) in w_se.chunks(eg.len()).enumerate() {
        let z: f64 = row.iter().sum();
        for (k, &e) in eg.iter().enumerate() {
            p_e[bin_of(&e_edges, e)] += s_mass[j] * row[k] / z;
        }
    }

    let pick_xs = WeightedIndex::new(&w_xs).unwrap();
    let pick_e: Vec<WeightedIndex<f64>> = w_se.chunks(eg.len()).map(|r| WeightedIndex::new(r).unwrap()).collect();
    let mut rng = seeded(seed);
    let mut c_xs = vec![0usize; n_xs];
    let mut c_e = vec![0usize; e_edges.len() + 1];
    for _ in 0..n_chains {
        let cell = pick_xs.sample(&mut rng);
        let (i, j) = (cell / sg.len(), cell % sg.len());
        let k = pick_e[j].sample(&mut rng);
        let jitter = |rng: &mut ggpa::rng::SimRng, h: f64| rng.random_range(-0.5..0.5) * h;
        let x = xg[i] + jitter(&mut rng, hx);
        let s = sg[j] + jitter(&mut rng, hs);
        let e = eg[k] + jitter(&mut rng, he);
        let mut st = AugmentedState::new(DoubleWellState { s, x_env: e }, vec![x], t);
        ggpa_sweep(&mut st, &adapter, &priors, &sched, &mut rng).unwrap();
        c_xs[bin_of(&x_edges, st.x[0]) * (s_edges.len() + 1) + bin_of(&s_edges, st.s.s)] += 1;
        c_e[bin_of(&e_edges, st.s.x_env)] += 1;
    }
    InvarianceReport {
        xs: chi_square(&c_xs, &p_xs),
        env: chi_square(&c_e, &p_e),
    }
}

/// Clean-variable marginal of replica `r`: Gaussian prior N(0, 1), Gaussian
/// context N(s; m, v) and the forward kernel.
fn replica_marginal(kernel: &ForwardKernel, m: f64, v: f64) -> (f64, f64) {
    let d = kernel.variance() + v;
    let prec = 1.0 + kernel.alpha * kernel.alpha / d;
    (kernel.alpha * m / d / prec, 1.0 / prec)
}

/// Independent two-replica ladders started from their exact targets and run
/// for `sweeps` sweeps. Returns the chi-square over the 4x4 product of
/// quartile bins of the two replicas' clean variables and the swap rate.
pub fn two_replica_stationarity(n_ladders: usize, sweeps: usize, seed: u64) -> ((f64, usize, f64), f64) {
    let sched = NoiseSchedule::default();
    let times = [0.1, 0.5];
    let (cm, cv) = (0.5, 0.8);
    let adapter = ScalarGaussianAdapter::gaussian(cm, cv);
    let priors = PriorSet::new(vec![Arc::new(GaussianMixturePrior::gaussian(vec![0.0], 1.0).unwrap())]);
    let kernels: Vec<ForwardKernel> = times.iter().map(|&t| sched.kernel(t).unwrap()).collect();
    let marg: Vec<Normal> = kernels
        .iter()
        .map(|k| {
            let (m, v) = replica_marginal(k, cm, cv);
            Normal::new(m, v.sqrt()).unwrap()
        })
        .collect();
    let edges: Vec<Vec<f64>> = marg.iter().map(|d| (1..4).map(|q| d.inverse_cdf(q as f64 / 4.0)).collect()).collect();
    let mut rng = seeded(seed);
    let mut counts = vec![0usize; 16];
    let (mut acc, mut att) = (0u64, 0u64);
    for l in 0..n_ladders {
        let init: Vec<AugmentedState<f64>> = (0..2)
            .map(|r| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let x = marg[r].mean().unwrap() + marg[r].std_dev().unwrap() * z;
                let (sm, sv) = adapter.conditional(x, &kernels[r]);
                let z2: f64 = StandardNormal.sample(&mut rng);
                AugmentedState::new(sm + sv.sqrt() * z2, vec![x], times[r])
            })
            .collect();
        let mut ladder = ReplicaLadder::new(
            times.to_vec(),
            vec![adapter; 2],
            init,
            LadderContext::PerReplica,
            &sched,
            seed ^ ((l as u64) << 20),
        )
        .unwrap()
        .with_parallel(false);
        for _ in 0..sweeps {
            ladder.sweep(&priors, &sched).unwrap();
        }
        let st = ladder.states();
        counts[bin_of(&edges[0], st[0].x[0]) * 4 + bin_of(&edges[1], st[1].x[0])] += 1;
        let rep = ladder.swap_report();
        acc += rep[0].accepts;
        att += rep[0].attempts;
    }
    (chi_square(&counts, &[1.0 / 16.0; 16]), acc as f64 / att as f64)
}

/// Largest |z| over the moment checks of one exact conditional.
fn z_mean(samples: &[f64], mean: f64, var: f64) -> f64 {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    (m - mean).abs() / (var / n).sqrt()
}

fn z_var(samples: &[f64], mean: f64, var: f64, fourth: f64) -> f64 {
    let n = samples.len() as f64;
    let v = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (v - var).abs() / ((fourth - var * var) / n).sqrt()
}

/// Moment checks of every exact conditional draw, as `(name, max |z|)`.
pub fn conditional_moment_checks(n: usize, seed: u64) -> Vec<(String, f64)> {
    let sched = NoiseSchedule::default();
    let mut rng = seeded(seed);
    let mut out = Vec::new();

    // Double-well aggregation at t = 0.2, x_clean = 1.
    let params = DoubleWellParams::default();
    let k = sched.kernel(0.2).unwrap();
    let ad = DoubleWellAdapter::new(params, ContextMode::Annealed { anchor_t: 0.2 }, &sched).unwrap();
    let c = ad.conditional(1.0, &k);
    let draws: Vec<DoubleWellState> = (0..n).map(|_| aggregate_doublewell(&ad, 1.0, &k, &mut rng)).collect();
    let s: Vec<f64> = draws.iter().map(|d| d.s).collect();
    let e: Vec<f64> = draws.iter().map(|d| d.x_env).collect();
    let cross: Vec<f64> = draws.iter().map(|d| (d.s - c.mean[0]) * (d.x_env - c.mean[1])).collect();
    let cross_var = c.cov[0][0] * c.cov[1][1] + c.cov[0][1] * c.cov[0][1];
    let z = [
        z_mean(&s, c.mean[0], c.cov[0][0]),
        z_mean(&e, c.mean[1], c.cov[1][1]),
        z_var(&s, c.mean[0], c.cov[0][0], 3.0 * c.cov[0][0].powi(2)),
        z_var(&e, c.mean[1], c.cov[1][1], 3.0 * c.cov[1][1].powi(2)),
        z_mean(&cross, c.cov[0][1], cross_var - c.cov[0][1] * c.cov[0][1]),
    ];
    out.push(("double-well aggregation".to_string(), z.iter().copied().fold(0.0, f64::max)));

    // Scalar Gaussian aggregation.
    let sg = ScalarGaussianAdapter::gaussian(0.5, 0.8);
    let (m, v) = sg.conditional(0.7, &k);
    let draws: Vec<f64> = (0..n).map(|_| sg.aggregate(&[0.7], &k, 0.2, &mut rng).unwrap()).collect();
    out.push((
        "scalar Gaussian aggregation".to_string(),
        z_mean(&draws, m, v).max(z_var(&draws, m, v, 3.0 * v * v)),
    ));

    // Quartic-prior denoising posterior against grid quadrature.
    let prior = params.prior().unwrap();
    let mut worst: f64 = 0.0;
    for y in [-0.8, 0.0, 0.95] {
        let (m, v) = prior.grid_posterior_moments(y, &k).unwrap();
        let mut buf = [0.0];
        let draws: Vec<f64> = (0..n / 4)
            .map(|_| {
                prior.posterior_sample(&[y], &k, &mut rng, &mut buf).unwrap();
                buf[0]
            })
            .collect();
        worst = worst.max(z_mean(&draws, m, v));
    }
    out.push(("quartic denoising posterior mean".to_string(), worst));

    // Mixture posterior under split noise.
    let gmm = GaussianMixturePrior::benchmark();
    let rho = 1.2;
    let kr = ForwardKernel::split(rho).unwrap();
    let y = [1.7, -0.4];
    let (resp, cv, means) = gmm.posterior_components(&y, &kr).unwrap();
    let mut worst: f64 = 0.0;
    let draws: Vec<Vec<f64>> = (0..n / 4).map(|_| gmm.gmm_posterior_sample(&y, rho, &mut rng).unwrap()).collect();
    for d in 0..2 {
        let mean: f64 = resp.iter().zip(&means).map(|(r, m)| r * m[d]).sum();
        let second: f64 = resp.iter().zip(&means).map(|(r, m)| r * (cv + m[d] * m[d])).sum();
        let col: Vec<f64> = draws.iter().map(|x| x[d]).collect();
        worst = worst.max(z_mean(&col, mean, second - mean * mean));
    }
    out.push(("mixture split posterior mean".to_string(), worst));
    out
}
