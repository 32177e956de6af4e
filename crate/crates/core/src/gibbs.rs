//! The augmented-state Gibbs sweep.
//!
//! The chain state is `z = (s, {x_i})` at a fixed diffusion time `t`. One
//! sweep draws every prior variable from its denoising posterior given the
//! projection `Phi_i(s)`, then redraws `s` from the aggregation conditional
//! `∝ q_ctx(s, t) prod_i q_t(Phi_i(s) | x_i)`. Both draws are exact, so the
//! sweep leaves the joint target invariant.

use std::ops::Range;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::prior::PriorModel;
use crate::schedule::{ForwardKernel, NoiseSchedule};

/// Full-system state plus stacked prior variables at diffusion time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState<S> {
    pub s: S,
    pub x: Vec<f64>,
    pub t: f64,
}

impl<S> AugmentedState<S> {
    pub fn new(s: S, x: Vec<f64>, t: f64) -> Self {
        Self { s, x, t }
    }
}

/// Ties a concrete system to the sweep: projections, context and the
/// context-aware aggregation draw.
pub trait SystemAdapter: Sync {
    type State: Clone + Send + Sync;

    /// Length of the stacked projection `(Phi_1(s), ..., Phi_K(s))`.
    fn projection_len(&self) -> usize;

    fn project(&self, s: &Self::State, out: &mut [f64]);

    /// `log q_ctx(s, t)`, unnormalized.
    fn log_context(&self, s: &Self::State, t: f64) -> f64;

    /// Exact draw of `s` from `∝ q_ctx(s, t) prod_i kernel(Phi_i(s) | x_i)`.
    fn aggregate(
        &self,
        x: &[f64],
        kernel: &ForwardKernel,
        t: f64,
        rng: &mut dyn RngCore,
    ) -> Result<Self::State>;
}

/// The registered priors and where each one's block sits in the stacked `x`.
#[derive(Clone)]
pub struct PriorSet {
    priors: Vec<Arc<dyn PriorModel>>,
    offsets: Vec<usize>,
    total: usize,
}

impl PriorSet {
    pub fn new(priors: Vec<Arc<dyn PriorModel>>) -> Self {
        let mut offsets = Vec::with_capacity(priors.len());
        let mut total = 0;
        for p in &priors {
            offsets.push(total);
            total += p.dim();
        }
        Self {
            priors,
            offsets,
            total,
        }
    }

    /// `k` copies of one prior (a lattice of identical on-site factors).
    pub fn replicated(prior: Arc<dyn PriorModel>, k: usize) -> Self {
        Self::new(vec![prior; k])
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i] + self.priors[i].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Range<usize>, &Arc<dyn PriorModel>)> {
        self.priors.iter().enumerate().map(|(i, p)| (self.block(i), p))
    }
}

fn check_layout<A: SystemAdapter>(adapter: &A, priors: &PriorSet, x_len: usize) -> Result<()> {
    if adapter.projection_len() != priors.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: priors.total_dim(),
            got: adapter.projection_len(),
        });
    }
    if x_len != priors.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: priors.total_dim(),
            got: x_len,
        });
    }
    Ok(())
}

/// Step 1 of the sweep: redraw every `x_i` from its denoising posterior.
pub fn denoise_step<A: SystemAdapter>(
    state: &mut AugmentedState<A::State>,
    adapter: &A,
    priors: &PriorSet,
    kernel: &ForwardKernel,
    rng: &mut dyn RngCore,
) -> Result<()> {
    let mut y = vec![0.0; priors.total_dim()];
    adapter.project(&state.s, &mut y);
    for (range, prior) in priors.iter() {
        prior.posterior_sample(&y[range.clone()], kernel, rng, &mut state.x[range])?;
    }
    Ok(())
}

/// One full sweep: parallel denoising, then context-aware aggregation.
pub fn ggpa_sweep<A: SystemAdapter>(
    state: &mut AugmentedState<A::State>,
    adapter: &A,
    priors: &PriorSet,
    schedule: &NoiseSchedule,
    rng: &mut dyn RngCore,
) -> Result<()> {
    check_layout(adapter, priors, state.x.len())?;
    if !(state.t > 0.0 && state.t <= 1.0) {
        return Err(Error::domain(format!("sweep needs t in (0, 1], got {}", state.t)));
    }
    let kernel = schedule.kernel(state.t)?;
    denoise_step(state, adapter, priors, &kernel, rng)?;
    state.s = adapter.aggregate(&state.x, &kernel, state.t, rng)?;
    Ok(())
}

/// `log q_ctx(s, t) + sum_i [log p_i(x_i) + log q_t(Phi_i(s) | x_i)]`, unnormalized.
pub fn joint_log_density<A: SystemAdapter>(
    state: &AugmentedState<A::State>,
    adapter: &A,
    priors: &PriorSet,
    schedule: &NoiseSchedule,
) -> Result<f64> {
    check_layout(adapter, priors, state.x.len())?;
    let ctx = adapter.log_context(&state.s, state.t);
    if !ctx.is_finite() {
        return Err(Error::NonFinite {
            term: "log_context".into(),
        });
    }
    if priors.is_empty() {
        return Ok(ctx);
    }
    let kernel = schedule.kernel(state.t)?;
    let mut y = vec![0.0; priors.total_dim()];
    adapter.project(&state.s, &mut y);
    let mut total = ctx;
    for (i, (range, prior)) in priors.iter().enumerate() {
        let lp = prior.log_density(&state.x[range.clone()]);
        if !lp.is_finite() {
            return Err(Error::NonFinite {
                term: format!("log prior of block {i}"),
            });
        }
        let lk = kernel.logpdf(&y[range.clone()], &state.x[range])?;
        if !lk.is_finite() {
            return Err(Error::NonFinite {
                term: format!("forward kernel of block {i}"),
            });
        }
        total += lp + lk;
    }
    Ok(total)
}

/// Recorded observables of one chain, with the index where burn-in ends.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub values: Vec<T>,
    pub burn_in: usize,
}

impl<T> TimeSeries<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Samples after burn-in.
    pub fn production(&self) -> &[T] {
        &self.values[self.burn_in.min(self.values.len())..]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> TimeSeries<U> {
        TimeSeries {
            values: self.values.iter().map(f).collect(),
            burn_in: self.burn_in,
        }
    }
}

pub fn burn_in_index(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction).floor() as usize
}

/// Run `n_sweeps` sweeps from `init`, recording `record(state)` after each.
///
/// The full series is returned; burn-in is marked, not dropped.
pub fn run_chain<A, T, F>(
    init: AugmentedState<A::State>,
    adapter: &A,
    priors: &PriorSet,
    schedule: &NoiseSchedule,
    n_sweeps: usize,
    burn_in_fraction: f64,
    mut record: F,
    rng: &mut dyn RngCore,
) -> Result<(TimeSeries<T>, AugmentedState<A::State>)>
where
    A: SystemAdapter,
    F: FnMut(&AugmentedState<A::State>) -> T,
{
    if n_sweeps == 0 {
        return Err(Error::domain("n_sweeps must be >= 1"));
    }
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::domain(format!("burn-in fraction {burn_in_fraction} outside [0, 1)")));
    }
    let mut state = init;
    let mut values = Vec::with_capacity(n_sweeps);
    for _ in 0..n_sweeps {
        ggpa_sweep(&mut state, adapter, priors, schedule, rng)?;
        values.push(record(&state));
    }
    Ok((
        TimeSeries {
            values,
            burn_in: burn_in_index(n_sweeps, burn_in_fraction),
        },
        state,
    ))
}

/// Scalar system with identity projection and a Gaussian (or flat) context
/// `N(s; mean, var)`; the aggregation conditional is Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarGaussianAdapter {
    /// `None` gives the constant context `q_ctx ≡ 1`.
    pub context: Option<(f64, f64)>,
}

impl ScalarGaussianAdapter {
    pub fn flat() -> Self {
        Self { context: None }
    }

    pub fn gaussian(mean: f64, var: f64) -> Self {
        Self {
            context: Some((mean, var)),
        }
    }

    /// Mean and variance of the aggregation conditional.
    pub fn conditional(&self, x: f64, kernel: &ForwardKernel) -> (f64, f64) {
        let mut prec = 1.0 / kernel.variance();
        let mut lin = kernel.alpha * x / kernel.variance();
        if let Some((m, v)) = self.context {
            prec += 1.0 / v;
            lin += m / v;
        }
        (lin / prec, 1.0 / prec)
    }
}

impl SystemAdapter for ScalarGaussianAdapter {
    type State = f64;

    fn projection_len(&self) -> usize {
        1
    }

    fn project(&self, s: &f64, out: &mut [f64]) {
        out[0] = *s;
    }

    fn log_context(&self, s: &f64, _t: f64) -> f64 {
        match self.context {
            None => 0.0,
            Some((m, v)) => -0.5 * (s - m) * (s - m) / v,
        }
    }

    fn aggregate(&self, x: &[f64], kernel: &ForwardKernel, _t: f64, rng: &mut dyn RngCore) -> Result<f64> {
        let (m, v) = self.conditional(x[0], kernel);
        let z: f64 = StandardNormal.sample(rng);
        Ok(m + v.sqrt() * z)
    }
}
