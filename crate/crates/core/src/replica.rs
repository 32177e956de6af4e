//! Replica exchange over diffusion time.
//!
//! Replica `r` runs the Gibbs sweep at time `t_r`. After every sweep,
//! neighbouring pairs `(r, r + 1)` attempt to exchange their full augmented
//! states with probability
//! `min(1, rho_r(z_{r+1}) rho_{r+1}(z_r) / (rho_r(z_r) rho_{r+1}(z_{r+1})))`,
//! where `log rho_r(z) = log q_ctx^(r)(s) + sum_i log q_{t_r}(Phi_i(s) | x_i)`.
//! Prior terms are identical across replicas and cancel. Odd sweeps attempt
//! pairs `(0,1), (2,3), ...`; even sweeps attempt `(1,2), (3,4), ...`.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::MbarInput;
use crate::gibbs::{ggpa_sweep, AugmentedState, PriorSet, SystemAdapter, TimeSeries, burn_in_index};
use crate::rng::{stream, SimRng, Stream};
use crate::schedule::{ForwardKernel, KernelStats, NoiseSchedule};

/// Whether replicas carry their own context or share one frozen at an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LadderContext {
    PerReplica,
    /// Every replica uses the context built at `anchor_t`; context factors
    /// cancel from the swap ratio and are skipped.
    FixedAnchor { anchor_t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapReportRow {
    pub pair_lo: usize,
    pub pair_hi: usize,
    pub attempts: u64,
    pub accepts: u64,
    pub rate: f64,
}

/// `log rho_r(z)`. With `context` false the context term is left out.
pub fn exchange_weight<A: SystemAdapter>(
    state: &AugmentedState<A::State>,
    adapter: &A,
    kernel: &ForwardKernel,
    t: f64,
    context: bool,
) -> Result<f64> {
    let mut w = 0.0;
    if context {
        w = adapter.log_context(&state.s, t);
        if !w.is_finite() {
            return Err(Error::NonFinite {
                term: format!("exchange weight context at t={t}"),
            });
        }
    }
    if adapter.projection_len() > 0 {
        let mut y = vec![0.0; adapter.projection_len()];
        adapter.project(&state.s, &mut y);
        let k = kernel.logpdf(&y, &state.x)?;
        if !k.is_finite() {
            return Err(Error::NonFinite {
                term: format!("exchange weight kernel at t={t}"),
            });
        }
        w += k;
    }
    Ok(w)
}

/// Swap acceptance probability from the four exchange weights
/// `w_ab = log rho_a(z_b)`.
pub fn swap_probability(w_lo_lo: f64, w_lo_hi: f64, w_hi_lo: f64, w_hi_hi: f64) -> f64 {
    let delta = (w_lo_hi - w_lo_lo) + (w_hi_lo - w_hi_hi);
    if delta >= 0.0 {
        1.0
    } else {
        delta.exp()
    }
}

/// Even/odd pair schedule for the 1-based sweep counter `n`.
pub fn pairs_for_sweep(n: usize, replicas: usize) -> impl Iterator<Item = usize> {
    let start = if n % 2 == 1 { 0 } else { 1 };
    (start..replicas.saturating_sub(1)).step_by(2)
}

pub struct ReplicaLadder<A: SystemAdapter> {
    times: Vec<f64>,
    kernels: Vec<ForwardKernel>,
    adapters: Vec<A>,
    states: Vec<AugmentedState<A::State>>,
    context: LadderContext,
    rngs: Vec<SimRng>,
    swap_rng: SimRng,
    attempts: Vec<u64>,
    accepts: Vec<u64>,
    sweeps: usize,
    parallel: bool,
}

impl<A: SystemAdapter> ReplicaLadder<A> {
    /// `adapters[r]` and `init[r]` belong to replica `r`. Replica `r` draws
    /// from the stream `(seed, Replica, r)` and swaps from `(seed, Swap, 0)`.
    pub fn new(
        times: Vec<f64>,
        adapters: Vec<A>,
        init: Vec<AugmentedState<A::State>>,
        context: LadderContext,
        schedule: &NoiseSchedule,
        seed: u64,
    ) -> Result<Self> {
        let r = times.len();
        if r == 0 {
            return Err(Error::domain("ladder needs at least one replica"));
        }
        if adapters.len() != r || init.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: adapters.len().min(init.len()),
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || !(times[0] > 0.0 && times[r - 1] <= 1.0) {
            return Err(Error::domain(format!("ladder times must increase strictly in (0, 1]: {times:?}")));
        }
        let kernels = times.iter().map(|&t| schedule.kernel(t)).collect::<Result<Vec<_>>>()?;
        let states = init
            .into_iter()
            .zip(&times)
            .map(|(mut s, &t)| {
                s.t = t;
                s
            })
            .collect();
        Ok(Self {
            rngs: (0..r).map(|i| stream(seed, Stream::Replica, i as u64)).collect(),
            swap_rng: stream(seed, Stream::Swap, 0),
            attempts: vec![0; r.saturating_sub(1)],
            accepts: vec![0; r.saturating_sub(1)],
            times,
            kernels,
            adapters,
            states,
            context,
            sweeps: 0,
            parallel: true,
        })
    }

    /// Geometric ladder between `t_lo` and `t_hi`.
    pub fn geometric_times(t_lo: f64, t_hi: f64, r: usize) -> Vec<f64> {
        if r == 1 {
            return vec![t_lo];
        }
        let ratio = (t_hi / t_lo).powf(1.0 / (r - 1) as f64);
        let mut v: Vec<f64> = (0..r).map(|i| t_lo * ratio.powi(i as i32)).collect();
        v[r - 1] = t_hi;
        v
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kernels(&self) -> &[ForwardKernel] {
        &self.kernels
    }

    pub fn states(&self) -> &[AugmentedState<A::State>] {
        &self.states
    }

    pub fn adapter(&self, r: usize) -> &A {
        &self.adapters[r]
    }

    fn uses_context(&self) -> bool {
        matches!(self.context, LadderContext::PerReplica)
    }

    fn weight(&self, replica: usize, state: &AugmentedState<A::State>) -> Result<f64> {
        exchange_weight(
            state,
            &self.adapters[replica],
            &self.kernels[replica],
            self.times[replica],
            self.uses_context(),
        )
    }

    /// Acceptance probability for exchanging replicas `r` and `r + 1`.
    pub fn swap_alpha(&self, r: usize) -> Result<f64> {
        if r + 1 >= self.len() {
            return Err(Error::domain(format!("pair index {r} out of range")));
        }
        let (a, b) = (&self.states[r], &self.states[r + 1]);
        Ok(swap_probability(
            self.weight(r, a)?,
            self.weight(r, b)?,
            self.weight(r + 1, a)?,
            self.weight(r + 1, b)?,
        ))
    }

    /// Attempt the exchange of `r` and `r + 1`; swaps `s` and `x`, keeps `t`.
    pub fn attempt_swap(&mut self, r: usize) -> Result<(bool, f64)> {
        let alpha = self.swap_alpha(r)?;
        let u: f64 = self.swap_rng.random();
        self.attempts[r] += 1;
        let accepted = u < alpha;
        if accepted {
            self.accepts[r] += 1;
            let (lo, hi) = self.states.split_at_mut(r + 1);
            let (a, b) = (&mut lo[r], &mut hi[0]);
            std::mem::swap(&mut a.s, &mut b.s);
            std::mem::swap(&mut a.x, &mut b.x);
        }
        Ok((accepted, alpha))
    }

    /// One Gibbs sweep on every replica followed by the scheduled swaps.
    pub fn sweep(&mut self, priors: &PriorSet, schedule: &NoiseSchedule) -> Result<()> {
        let adapters = &self.adapters;
        let step = |((state, rng), adapter): ((&mut AugmentedState<A::State>, &mut SimRng), &A)| {
            ggpa_sweep(state, adapter, priors, schedule, rng as &mut dyn RngCore)
        };
        if self.parallel && self.len() > 1 {
            self.states
                .par_iter_mut()
                .zip(self.rngs.par_iter_mut())
                .zip(adapters.par_iter())
                .map(step)
                .collect::<Result<()>>()?;
        } else {
            self.states
                .iter_mut()
                .zip(self.rngs.iter_mut())
                .zip(adapters.iter())
                .map(step)
                .collect::<Result<()>>()?;
        }
        self.sweeps += 1;
        for r in pairs_for_sweep(self.sweeps, self.len()).collect::<Vec<_>>() {
            self.attempt_swap(r)?;
        }
        Ok(())
    }

    pub fn swap_report(&self) -> Vec<SwapReportRow> {
        (0..self.attempts.len())
            .map(|r| SwapReportRow {
                pair_lo: r,
                pair_hi: r + 1,
                attempts: self.attempts[r],
                accepts: self.accepts[r],
                rate: if self.attempts[r] == 0 {
                    0.0
                } else {
                    self.accepts[r] as f64 / self.attempts[r] as f64
                },
            })
            .collect()
    }

    /// Kernel sufficient statistics of replica `r`'s current state.
    pub fn kernel_stats(&self, r: usize) -> KernelStats {
        let state = &self.states[r];
        let mut y = vec![0.0; self.adapters[r].projection_len()];
        self.adapters[r].project(&state.s, &mut y);
        KernelStats::from_pair(&y, &state.x)
    }
}

/// Output of a replica-exchange run. `series[0]` is the production replica;
/// with `record_all` every replica has its own series.
pub struct ReRun<T> {
    pub series: Vec<TimeSeries<T>>,
    pub swaps: Vec<SwapReportRow>,
}

/// Run `n_sweeps` ladder sweeps, recording `record(r, state)` after each.
pub fn ggpa_re_run<A, T, F>(
    ladder: &mut ReplicaLadder<A>,
    priors: &PriorSet,
    schedule: &NoiseSchedule,
    n_sweeps: usize,
    burn_in_fraction: f64,
    record_all: bool,
    mut record: F,
) -> Result<ReRun<T>>
where
    A: SystemAdapter,
    F: FnMut(usize, &AugmentedState<A::State>) -> T,
{
    if n_sweeps == 0 {
        return Err(Error::domain("n_sweeps must be >= 1"));
    }
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::domain(format!("burn-in fraction {burn_in_fraction} outside [0, 1)")));
    }
    let recorded = if record_all { ladder.len() } else { 1 };
    let burn_in = burn_in_index(n_sweeps, burn_in_fraction);
    let mut series: Vec<TimeSeries<T>> = (0..recorded)
        .map(|_| TimeSeries {
            values: Vec::with_capacity(n_sweeps),
            burn_in,
        })
        .collect();
    for _ in 0..n_sweeps {
        ladder.sweep(priors, schedule)?;
        for (r, s) in series.iter_mut().enumerate() {
            s.values.push(record(r, &ladder.states()[r]));
        }
    }
    Ok(ReRun {
        series,
        swaps: ladder.swap_report(),
    })
}

/// MBAR reduced potentials `u_k(z_n) = -sum_i log q_{t_k}(Phi_i(s_n) | x_i,n)`
/// for samples pooled from every replica. Prior terms are omitted; shared
/// (fixed-anchor) context terms cancel and are omitted as well.
pub fn mbar_input_from_kernel_stats(per_replica: &[Vec<KernelStats>], kernels: &[ForwardKernel]) -> Result<MbarInput> {
    if per_replica.len() != kernels.len() {
        return Err(Error::DimensionMismatch {
            expected: kernels.len(),
            got: per_replica.len(),
        });
    }
    let u = kernels
        .iter()
        .map(|k| {
            per_replica
                .iter()
                .flat_map(|samples| samples.iter().map(|s| -k.logpdf_from_stats(s)))
                .collect()
        })
        .collect();
    MbarInput::new(u, per_replica.iter().map(|s| s.len()).collect())
}
