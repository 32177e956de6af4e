//! Two-dimensional lattice φ⁴ model
//! `H(phi) = sum_i (phi_i^2 - 1)^2 + J sum_<ij> (phi_i - phi_j)^2 - h sum_i phi_i`
//! on a periodic `L x L` lattice at `T = 1`.
//!
//! Every site carries a copy of the on-site prior `p0(phi) ∝ exp[-(phi^2 - 1)^2]`.
//! The nearest-neighbour coupling and the field form a Gaussian context on the
//! auxiliary field `psi`, diagonal in Fourier space, so aggregation is an
//! exact mode-by-mode draw.

use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::context::Phi4ContextPrecision;
use crate::error::{Error, Result};
use crate::estimators::{autocorr_corrected_se, integrated_autocorrelation_time};
use crate::gibbs::{burn_in_index, ggpa_sweep, AugmentedState, PriorSet, SystemAdapter};
use crate::replica::{ggpa_re_run, LadderContext, ReRun, ReplicaLadder};
use crate::rng::{derive_seed, stream, Stream};
use crate::numeric::{linspace, trapezoid_weight};
use crate::prior::Grid1DPrior;
use crate::schedule::{ForwardKernel, NoiseSchedule};

pub const J_CRITICAL: f64 = 0.436;
/// Ising exponents used for the finite-field collapse.
pub const BETA_ISING: f64 = 1.0 / 8.0;
pub const DELTA_ISING: f64 = 15.0;

/// Real field on a periodic `L x L` lattice, row-major (`values[x * L + y]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub l: usize,
    pub values: Vec<f64>,
}

impl LatticeField {
    pub fn uniform(l: usize, v: f64) -> Self {
        Self {
            l,
            values: vec![v; l * l],
        }
    }

    pub fn from_values(l: usize, values: Vec<f64>) -> Result<Self> {
        if l < 2 || values.len() != l * l {
            return Err(Error::DimensionMismatch {
                expected: l * l,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                term: "lattice field".into(),
            });
        }
        Ok(Self { l, values })
    }

    pub fn sites(&self) -> usize {
        self.l * self.l
    }

    pub fn magnetization(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.sites() as f64
    }

    fn idx(&self, x: usize, y: usize) -> usize {
        x * self.l + y
    }

    /// Left, right, up, down neighbours of site `(x, y)`.
    fn neighbours(&self, x: usize, y: usize) -> [usize; 4] {
        let l = self.l;
        [
            self.idx((x + l - 1) % l, y),
            self.idx((x + 1) % l, y),
            self.idx(x, (y + l - 1) % l),
            self.idx(x, (y + 1) % l),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi4Params {
    pub j: f64,
    pub h: f64,
    pub temperature: f64,
}

impl Phi4Params {
    pub fn new(j: f64, h: f64) -> Self {
        Self { j, h, temperature: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j >= 0.0 && self.h.is_finite() && self.temperature > 0.0) {
            return Err(Error::domain(format!("invalid lattice parameters {self:?}")));
        }
        Ok(())
    }
}

/// Each unordered nearest-neighbour bond is counted once (right and down).
pub fn hamiltonian(field: &LatticeField, p: &Phi4Params) -> f64 {
    let l = field.l;
    let mut h = 0.0;
    for x in 0..l {
        for y in 0..l {
            let v = field.values[field.idx(x, y)];
            let w = v * v - 1.0;
            let r = field.values[field.idx((x + 1) % l, y)];
            let d = field.values[field.idx(x, (y + 1) % l)];
            h += w * w + p.j * ((v - r) * (v - r) + (v - d) * (v - d)) - p.h * v;
        }
    }
    h
}

/// Energy change for setting site `i` at `(x, y)` from its value to `new`.
fn local_delta(field: &LatticeField, x: usize, y: usize, new: f64, p: &Phi4Params) -> f64 {
    let i = field.idx(x, y);
    let old = field.values[i];
    let (wo, wn) = (old * old - 1.0, new * new - 1.0);
    let mut d = wn * wn - wo * wo - p.h * (new - old);
    for n in field.neighbours(x, y) {
        let v = field.values[n];
        d += p.j * ((new - v) * (new - v) - (old - v) * (old - v));
    }
    d
}

/// Orthonormal 2D FFT on `L x L` complex buffers.
pub struct Fft2 {
    l: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("l", &self.l).finish()
    }
}

impl Fft2 {
    pub fn new(l: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            l,
            fwd: planner.plan_fft_forward(l),
            inv: planner.plan_fft_inverse(l),
        }
    }

    fn transpose(&self, buf: &mut [Complex64]) {
        let l = self.l;
        for x in 0..l {
            for y in x + 1..l {
                buf.swap(x * l + y, y * l + x);
            }
        }
    }

    fn run(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        plan.process(buf);
        self.transpose(buf);
        plan.process(buf);
        self.transpose(buf);
        let scale = 1.0 / self.l as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.fwd);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.inv);
    }

    pub fn forward_real(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Index of mode `-k`.
    pub fn conjugate_index(&self, k: usize) -> usize {
        let l = self.l;
        let (kx, ky) = (k / l, k % l);
        ((l - kx) % l) * l + (l - ky) % l
    }
}

/// Lattice adapter: projection is the identity, the context is the annealed
/// Fourier-diagonal Gaussian built at its anchor time.
#[derive(Debug, Clone)]
pub struct Phi4Adapter {
    pub ctx: Arc<Phi4ContextPrecision>,
    fft: Arc<Fft2>,
}

impl Phi4Adapter {
    pub fn new(l: usize, params: &Phi4Params, anchor_t: f64, schedule: &NoiseSchedule) -> Result<Self> {
        params.validate()?;
        if params.temperature != 1.0 {
            return Err(Error::domain("the lattice sampler runs at T = 1"));
        }
        Ok(Self {
            ctx: Arc::new(Phi4ContextPrecision::new(l, params.j, params.h, anchor_t, schedule)?),
            fft: Arc::new(Fft2::new(l)),
        })
    }

    pub fn l(&self) -> usize {
        self.ctx.l
    }

    /// Conditional variances `v_k = 1 / (sigma^-2 + q_k)` of every mode.
    pub fn mode_variances(&self, kernel: &ForwardKernel) -> Vec<f64> {
        self.ctx.q.iter().map(|q| 1.0 / (1.0 / kernel.variance() + q)).collect()
    }

    /// Exact draw of `psi | phi`, returning the field and the largest
    /// imaginary residue left by the inverse transform.
    pub fn aggregate_with_residue(
        &self,
        phi: &[f64],
        kernel: &ForwardKernel,
        rng: &mut dyn RngCore,
    ) -> Result<(LatticeField, f64)> {
        let l = self.l();
        let n = l * l;
        if phi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: phi.len() });
        }
        // One transform of phi + i z carries both spectra.
        let mut w: Vec<Complex64> = phi
            .iter()
            .map(|&p| {
                let z: f64 = StandardNormal.sample(rng);
                Complex64::new(p, z)
            })
            .collect();
        self.fft.forward(&mut w);
        let var = kernel.variance();
        let gain = kernel.alpha / var;
        let b0 = self.ctx.field_coeff * l as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let wc = w[self.fft.conjugate_index(k)].conj();
            let phi_k = 0.5 * (w[k] + wc);
            let z_k = (w[k] - wc) * Complex64::new(0.0, -0.5);
            let v = 1.0 / (1.0 / var + self.ctx.q[k]);
            let b = if k == 0 { b0 } else { 0.0 };
            out[k] = v * (gain * phi_k + b) + v.sqrt() * z_k;
        }
        self.fft.inverse(&mut out);
        let residue = out.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        Ok((
            LatticeField {
                l,
                values: out.iter().map(|c| c.re).collect(),
            },
            residue,
        ))
    }

    /// `-1/2 sum_k q_k |psi_k|^2 + (h / alpha_anchor) sum_i psi_i`.
    pub fn context_energy(&self, psi: &LatticeField) -> f64 {
        let spec = self.fft.forward_real(&psi.values);
        let quad: f64 = spec.iter().zip(&self.ctx.q).map(|(c, q)| q * c.norm_sqr()).sum();
        -0.5 * quad + self.ctx.field_coeff * psi.values.iter().sum::<f64>()
    }
}

impl SystemAdapter for Phi4Adapter {
    type State = LatticeField;

    fn projection_len(&self) -> usize {
        self.l() * self.l()
    }

    fn project(&self, s: &LatticeField, out: &mut [f64]) {
        out.copy_from_slice(&s.values);
    }

    fn log_context(&self, s: &LatticeField, _t: f64) -> f64 {
        self.context_energy(s)
    }

    fn aggregate(&self, x: &[f64], kernel: &ForwardKernel, _t: f64, rng: &mut dyn RngCore) -> Result<LatticeField> {
        self.aggregate_with_residue(x, kernel, rng).map(|(f, _)| f)
    }
}

/// On-site prior `exp[-(phi^2 - 1)^2]`.
pub fn onsite_prior() -> Result<Grid1DPrior> {
    Grid1DPrior::quartic(1.0)
}

/// Independent per-site posterior draws `phi_i | psi_i`.
pub fn phi4_prior_update(
    psi: &LatticeField,
    kernel: &ForwardKernel,
    prior: &Grid1DPrior,
    rng: &mut dyn RngCore,
) -> Result<LatticeField> {
    let values = psi
        .values
        .iter()
        .map(|&y| prior.hybrid_posterior_sample(y, kernel, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(LatticeField { l: psi.l, values })
}

/// Ordered start: `phi ≡ 1` with `psi = alpha phi`.
pub fn ordered_start(l: usize, t: f64, schedule: &NoiseSchedule) -> Result<AugmentedState<LatticeField>> {
    let (alpha, _) = schedule.alpha_sigma(t)?;
    Ok(AugmentedState::new(LatticeField::uniform(l, alpha), vec![1.0; l * l], t))
}

/// One checkerboard sweep (both sublattices, `delta ~ U(-0.5, 0.5)`).
/// Returns the number of accepted proposals.
pub fn checkerboard_sweep<R: Rng + ?Sized>(field: &mut LatticeField, p: &Phi4Params, rng: &mut R) -> usize {
    let l = field.l;
    let mut accepted = 0;
    for parity in 0..2 {
        for x in 0..l {
            for y in 0..l {
                if (x + y) % 2 != parity {
                    continue;
                }
                let i = field.idx(x, y);
                let new = field.values[i] + rng.random_range(-0.5..0.5);
                let d = local_delta(field, x, y, new, p);
                if d <= 0.0 || rng.random::<f64>() < (-d / p.temperature).exp() {
                    field.values[i] = new;
                    accepted += 1;
                }
            }
        }
    }
    accepted
}

/// Metropolis reference chain; records the magnetization after every sweep.
/// Returns the series and the acceptance rate.
pub fn checkerboard_metropolis<R: Rng + ?Sized>(
    field: &mut LatticeField,
    p: &Phi4Params,
    n_sweeps: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    p.validate()?;
    if n_sweeps == 0 {
        return Err(Error::domain("n_sweeps must be >= 1"));
    }
    let mut m = Vec::with_capacity(n_sweeps);
    let mut acc = 0usize;
    for _ in 0..n_sweeps {
        acc += checkerboard_sweep(field, p, rng);
        m.push(field.magnetization());
    }
    Ok((m, acc as f64 / (n_sweeps * field.sites()) as f64))
}

/// `<|m|>`, `chi = L^2 (<m^2> - <|m|>^2)` and their autocorrelation-corrected
/// errors. `se_chi` comes from the linearized series `L^2 (m^2 - 2 <|m|> |m|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mean_abs_m: f64,
    pub chi: f64,
    pub se_m: f64,
    pub se_chi: f64,
    /// `tau_int` of `|m|`.
    pub iat: f64,
    pub n_eff: f64,
}

pub fn observables(m: &[f64], l: usize) -> Result<Observables> {
    if m.is_empty() {
        return Err(Error::domain("empty magnetization series"));
    }
    let abs: Vec<f64> = m.iter().map(|v| v.abs()).collect();
    let n = m.len() as f64;
    let mean_abs = abs.iter().sum::<f64>() / n;
    let m2 = m.iter().map(|v| v * v).sum::<f64>() / n;
    let vol = (l * l) as f64;
    let chi = vol * (m2 - mean_abs * mean_abs);
    if m.len() < 10 {
        return Ok(Observables {
            mean_abs_m: mean_abs,
            chi,
            se_m: f64::NAN,
            se_chi: f64::NAN,
            iat: f64::NAN,
            n_eff: f64::NAN,
        });
    }
    let iat = integrated_autocorrelation_time(&abs)?;
    let lin: Vec<f64> = m.iter().map(|v| vol * (v * v - 2.0 * mean_abs * v.abs())).collect();
    Ok(Observables {
        mean_abs_m: mean_abs,
        chi,
        se_m: autocorr_corrected_se(&abs)?,
        se_chi: autocorr_corrected_se(&lin)?,
        iat: iat.tau_int,
        n_eff: iat.ess(),
    })
}

/// Zero-field coupling grid `J_c + k dJ`, `k = -n_below..=n_above`.
pub fn zero_field_couplings(step: f64, n_below: usize, n_above: usize) -> Vec<f64> {
    (-(n_below as i64)..=n_above as i64).map(|k| J_CRITICAL + k as f64 * step).collect()
}

/// Scaling variable `x = (J - J_c) / h^{1/(beta delta)}`.
pub fn scaling_variable(j: f64, h: f64) -> f64 {
    (j - J_CRITICAL) / h.powf(1.0 / (BETA_ISING * DELTA_ISING))
}

pub fn coupling_for(x: f64, h: f64) -> f64 {
    J_CRITICAL + x * h.powf(1.0 / (BETA_ISING * DELTA_ISING))
}

/// `J` values for a uniform grid of `n` points in `x ∈ [x_lo, x_hi]`, clipped
/// to `[j_lo, j_hi]`.
pub fn collapse_couplings(h: f64, n: usize, x_lo: f64, x_hi: f64, j_lo: f64, j_hi: f64) -> Vec<f64> {
    linspace(x_lo, x_hi, n)
        .into_iter()
        .map(|x| coupling_for(x, h).clamp(j_lo, j_hi))
        .collect()
}

/// One scan point for the collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub j: f64,
    pub h: f64,
    pub mean_abs_m: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapsedPoint {
    pub h: f64,
    pub j: f64,
    pub x: f64,
    pub scaled_m: f64,
    pub scaled_chi: f64,
}

/// `(x, <|m|> h^{-1/delta}, chi h^{(delta-1)/delta})` per point.
pub fn scaling_collapse(points: &[CollapsePoint]) -> Vec<CollapsedPoint> {
    points
        .iter()
        .map(|p| CollapsedPoint {
            h: p.h,
            j: p.j,
            x: scaling_variable(p.j, p.h),
            scaled_m: p.mean_abs_m * p.h.powf(-1.0 / DELTA_ISING),
            scaled_chi: p.chi * p.h.powf((DELTA_ISING - 1.0) / DELTA_ISING),
        })
        .collect()
}

/// Largest relative spread `(max - min) / mean` across curves, over the
/// abscissae in `at`. Each curve is `(abscissa, value)` sorted by abscissa and
/// linearly interpolated; points outside a curve's range are skipped.
pub fn max_relative_spread(curves: &[Vec<(f64, f64)>], at: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &a in at {
        let vals: Vec<f64> = curves.iter().filter_map(|c| interpolate(c, a)).collect();
        if vals.len() < 2 {
            continue;
        }
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if mean.abs() > 0.0 {
            worst = worst.max((hi - lo) / mean.abs());
        }
    }
    worst
}

fn interpolate(curve: &[(f64, f64)], a: f64) -> Option<f64> {
    let first = curve.first()?;
    let last = curve.last()?;
    if a < first.0 - 1e-12 || a > last.0 + 1e-12 {
        return None;
    }
    for w in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if a >= x0 - 1e-12 && a <= x1 + 1e-12 {
            if (x1 - x0).abs() < 1e-15 {
                return Some(0.5 * (y0 + y1));
            }
            return Some(y0 + (y1 - y0) * (a - x0) / (x1 - x0));
        }
    }
    Some(first.1)
}

/// Relative spreads of the collapse: unscaled curves against `J` (on the
/// couplings of the narrowest window) and scaled curves against `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseQuality {
    pub raw_m: f64,
    pub scaled_m: f64,
    pub raw_chi: f64,
    pub scaled_chi: f64,
}

pub fn collapse_quality(points: &[CollapsePoint]) -> Result<CollapseQuality> {
    let mut fields: Vec<f64> = points.iter().map(|p| p.h).collect();
    fields.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fields.dedup();
    if fields.len() < 2 {
        return Err(Error::domain("collapse needs at least two field values"));
    }
    let collapsed = scaling_collapse(points);
    let curve = |h: f64, f: &dyn Fn(&CollapsedPoint) -> (f64, f64)| {
        let mut c: Vec<(f64, f64)> = collapsed.iter().filter(|p| p.h == h).map(f).collect();
        c.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        c.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
        c
    };
    let raw_p = points.iter().find(|p| p.h == fields[0]).map(|p| p.h).unwrap();
    let raw_at: Vec<f64> = curve(raw_p, &|p| (p.j, 0.0)).iter().map(|c| c.0).collect();
    let x_at: Vec<f64> = curve(fields[0], &|p| (p.x, 0.0)).iter().map(|c| c.0).collect();
    let chi_raw = |p: &CollapsedPoint| p.scaled_chi * p.h.powf(-(DELTA_ISING - 1.0) / DELTA_ISING);
    let m_raw = |p: &CollapsedPoint| p.scaled_m * p.h.powf(1.0 / DELTA_ISING);
    let build = |f: &dyn Fn(&CollapsedPoint) -> (f64, f64)| fields.iter().map(|&h| curve(h, f)).collect::<Vec<_>>();
    Ok(CollapseQuality {
        raw_m: max_relative_spread(&build(&|p| (p.j, m_raw(p))), &raw_at),
        scaled_m: max_relative_spread(&build(&|p| (p.x, p.scaled_m)), &x_at),
        raw_chi: max_relative_spread(&build(&|p| (p.j, chi_raw(p))), &raw_at),
        scaled_chi: max_relative_spread(&build(&|p| (p.x, p.scaled_chi)), &x_at),
    })
}

/// Effective stiffness of mode `k` in replica `r` of a fixed-anchor ladder,
/// after integrating out `psi`.
pub fn effective_stiffness(j: f64, lambda: f64, kr: &ForwardKernel, k_anchor: &ForwardKernel) -> f64 {
    let s = 2.0 * j * lambda;
    s * kr.alpha * kr.alpha / (k_anchor.alpha * k_anchor.alpha + s * (kr.variance() - k_anchor.variance()))
}

/// `-log[(p0 * N(0, s^2))(u)]` on the nodes `u`, up to a constant. `s = 0`
/// returns the bare potential.
pub fn blurred_potential(sigma_tilde: f64, u: &[f64]) -> Vec<f64> {
    let p0 = |x: f64| (-(x * x - 1.0) * (x * x - 1.0)).exp();
    if sigma_tilde <= 0.0 {
        return u.iter().map(|&x| (x * x - 1.0) * (x * x - 1.0)).collect();
    }
    let n = 2001;
    let eps = linspace(-8.0, 8.0, n);
    let h = eps[1] - eps[0];
    let gauss: Vec<f64> = eps
        .iter()
        .enumerate()
        .map(|(i, e)| trapezoid_weight(i, n, h) * (-0.5 * e * e).exp())
        .collect();
    u.iter()
        .map(|&x| {
            let g: f64 = eps.iter().zip(&gauss).map(|(e, w)| w * p0(x + sigma_tilde * e)).sum();
            -g.ln()
        })
        .collect()
}

/// Barrier `V(0) - min V` of the blurred on-site potential; zero once the
/// blurred density is unimodal.
pub fn blurred_barrier(sigma_tilde: f64) -> f64 {
    let u = linspace(-3.0, 3.0, 1201);
    let v = blurred_potential(sigma_tilde, &u);
    let centre = v[600];
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    (centre - min).max(0.0)
}

/// Per-replica summary of the fixed-anchor ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSoftening {
    pub t: f64,
    pub sigma_tilde: f64,
    pub j_eff_ir: f64,
    pub barrier: f64,
    /// `kappa_k` for every mode, row-major in `(k_x, k_y)`.
    pub kappa: Vec<f64>,
}

pub fn noise_transition_analysis(
    l: usize,
    j: f64,
    anchor_t: f64,
    times: &[f64],
    schedule: &NoiseSchedule,
) -> Result<Vec<ReplicaSoftening>> {
    // Fails on an inadmissible anchor.
    let ctx = Phi4ContextPrecision::new(l, j, 0.0, anchor_t, schedule)?;
    let ka = schedule.kernel(anchor_t)?;
    times
        .iter()
        .map(|&t| {
            let kr = schedule.kernel(t)?;
            Ok(ReplicaSoftening {
                t,
                sigma_tilde: kr.sigma_tilde(),
                j_eff_ir: j * kr.alpha * kr.alpha / (ka.alpha * ka.alpha),
                barrier: blurred_barrier(kr.sigma_tilde()),
                kappa: ctx.lambda.iter().map(|&lam| effective_stiffness(j, lam, &kr, &ka)).collect(),
            })
        })
        .collect()
}

/// Sampler used for a scan point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phi4Method {
    /// Fixed-time augmented Gibbs chain.
    Ggpa,
    /// Fixed-anchor replica-exchange ladder, production replica recorded.
    GgpaRe,
    /// Checkerboard Metropolis reference.
    Mc,
}

impl Phi4Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phi4Method::Ggpa => "ggpa",
            Phi4Method::GgpaRe => "ggpa-re",
            Phi4Method::Mc => "mc",
        }
    }
}

/// Budgets for one lattice scan point.
///
/// Chains whose production part holds fewer than `target_n_eff` effective
/// samples of `|m|` are continued, doubling their length, up to the caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phi4RunConfig {
    pub l: usize,
    pub t: f64,
    pub n_sweeps: usize,
    pub burn_in_fraction: f64,
    pub mc_equilibration: usize,
    pub mc_measurement: usize,
    pub target_n_eff: f64,
    pub max_sweeps: usize,
    pub mc_max_measurement: usize,
    /// Ladder for [`Phi4Method::GgpaRe`]; `times[0]` is the production time
    /// and the context is frozen there.
    pub re_times: Vec<f64>,
}

impl Default for Phi4RunConfig {
    fn default() -> Self {
        Self {
            l: 32,
            t: 0.1,
            n_sweeps: 10_000,
            burn_in_fraction: 0.3,
            mc_equilibration: 10_000,
            mc_measurement: 30_000,
            target_n_eff: 200.0,
            max_sweeps: 640_000,
            mc_max_measurement: 1_920_000,
            re_times: crate::replica::ReplicaLadder::<Phi4Adapter>::geometric_times(0.1, 0.6, 48),
        }
    }
}

fn short_of_target(production: &[f64], target: f64) -> Result<bool> {
    if target <= 0.0 || production.len() < 10 {
        return Ok(false);
    }
    let abs: Vec<f64> = production.iter().map(|v| v.abs()).collect();
    Ok(integrated_autocorrelation_time(&abs)?.ess() < target)
}

/// Production magnetization series of a fixed-time chain from the ordered
/// start. The burn-in fraction applies to the final length.
pub fn run_ggpa_point(cfg: &Phi4RunConfig, p: &Phi4Params, schedule: &NoiseSchedule, seed: u64) -> Result<Vec<f64>> {
    if cfg.n_sweeps == 0 || !(0.0..1.0).contains(&cfg.burn_in_fraction) {
        return Err(Error::domain("invalid sweep budget"));
    }
    let adapter = Phi4Adapter::new(cfg.l, p, cfg.t, schedule)?;
    let priors = PriorSet::replicated(Arc::new(onsite_prior()?), cfg.l * cfg.l);
    let mut rng = stream(seed, Stream::Chain, 0);
    let mut state = ordered_start(cfg.l, cfg.t, schedule)?;
    let mut m = Vec::with_capacity(cfg.n_sweeps);
    let mut goal = cfg.n_sweeps;
    loop {
        while m.len() < goal {
            ggpa_sweep(&mut state, &adapter, &priors, schedule, &mut rng)?;
            m.push(crate::numeric::mean(&state.x));
        }
        let prod = &m[burn_in_index(m.len(), cfg.burn_in_fraction)..];
        if goal >= cfg.max_sweeps || !short_of_target(prod, cfg.target_n_eff)? {
            return Ok(prod.to_vec());
        }
        goal = (2 * goal).min(cfg.max_sweeps);
    }
}

/// Metropolis reference from the ordered start: equilibration, then one
/// magnetization per measurement sweep.
pub fn run_mc_point(cfg: &Phi4RunConfig, p: &Phi4Params, seed: u64) -> Result<(Vec<f64>, f64)> {
    let mut rng = stream(seed, Stream::Reference, 0);
    let mut field = LatticeField::uniform(cfg.l, 1.0);
    if cfg.mc_equilibration > 0 {
        checkerboard_metropolis(&mut field, p, cfg.mc_equilibration, &mut rng)?;
    }
    let (mut m, mut rate) = checkerboard_metropolis(&mut field, p, cfg.mc_measurement, &mut rng)?;
    while m.len() < cfg.mc_max_measurement && short_of_target(&m, cfg.target_n_eff)? {
        let extra = m.len().min(cfg.mc_max_measurement - m.len());
        let (more, r) = checkerboard_metropolis(&mut field, p, extra, &mut rng)?;
        rate = (rate * m.len() as f64 + r * extra as f64) / (m.len() + extra) as f64;
        m.extend(more);
    }
    Ok((m, rate))
}

/// Fixed-anchor ladder at `cfg.re_times`, recording `(m_phi, m_psi)` per
/// replica (only the production replica unless `record_all`).
pub fn run_re_point(
    cfg: &Phi4RunConfig,
    p: &Phi4Params,
    schedule: &NoiseSchedule,
    seed: u64,
    record_all: bool,
) -> Result<ReRun<(f64, f64)>> {
    let times = cfg.re_times.clone();
    let anchor = *times.first().ok_or_else(|| Error::domain("empty ladder"))?;
    let adapter = Phi4Adapter::new(cfg.l, p, anchor, schedule)?;
    let priors = PriorSet::replicated(Arc::new(onsite_prior()?), cfg.l * cfg.l);
    let init = times
        .iter()
        .map(|&t| ordered_start(cfg.l, t, schedule))
        .collect::<Result<Vec<_>>>()?;
    let mut ladder = ReplicaLadder::new(
        times.clone(),
        vec![adapter; times.len()],
        init,
        LadderContext::FixedAnchor { anchor_t: anchor },
        schedule,
        seed,
    )?;
    ggpa_re_run(
        &mut ladder,
        &priors,
        schedule,
        cfg.n_sweeps,
        cfg.burn_in_fraction,
        record_all,
        |_, s| (crate::numeric::mean(&s.x), s.s.magnetization()),
    )
}

/// Most samples per replica fed to the pooled estimator; longer production
/// series are thinned evenly.
pub const MBAR_SAMPLES_PER_REPLICA: usize = 1000;

/// Production-replica observables from every replica of a fixed-anchor
/// ladder, reweighted to the lowest time with MBAR. Errors, `iat` and
/// `n_eff` are those of the production replica alone, so they are upper
/// bounds for the pooled estimate.
pub fn run_re_point_mbar(
    cfg: &Phi4RunConfig,
    p: &Phi4Params,
    schedule: &NoiseSchedule,
    seed: u64,
) -> Result<(Observables, ReRun<(f64, crate::schedule::KernelStats)>)> {
    let times = cfg.re_times.clone();
    let anchor = *times.first().ok_or_else(|| Error::domain("empty ladder"))?;
    let adapter = Phi4Adapter::new(cfg.l, p, anchor, schedule)?;
    let priors = PriorSet::replicated(Arc::new(onsite_prior()?), cfg.l * cfg.l);
    let init = times
        .iter()
        .map(|&t| ordered_start(cfg.l, t, schedule))
        .collect::<Result<Vec<_>>>()?;
    let mut ladder = ReplicaLadder::new(
        times.clone(),
        vec![adapter; times.len()],
        init,
        LadderContext::FixedAnchor { anchor_t: anchor },
        schedule,
        seed,
    )?;
    let run = ggpa_re_run(&mut ladder, &priors, schedule, cfg.n_sweeps, cfg.burn_in_fraction, true, |_, s| {
        (
            crate::numeric::mean(&s.x),
            crate::schedule::KernelStats::from_pair(&s.s.values, &s.x),
        )
    })?;
    let thinned: Vec<Vec<(f64, crate::schedule::KernelStats)>> = run
        .series
        .iter()
        .map(|s| {
            let prod = s.production();
            let stride = prod.len().div_ceil(MBAR_SAMPLES_PER_REPLICA).max(1);
            prod.iter().step_by(stride).copied().collect()
        })
        .collect();
    let stats: Vec<Vec<_>> = thinned.iter().map(|s| s.iter().map(|v| v.1).collect()).collect();
    let input = crate::replica::mbar_input_from_kernel_stats(&stats, ladder.kernels())?;
    let mbar = crate::estimators::mbar_solve(&input, 1e-9, 100_000)?;
    let m: Vec<f64> = thinned.iter().flat_map(|s| s.iter().map(|v| v.0)).collect();
    let abs: Vec<f64> = m.iter().map(|v| v.abs()).collect();
    let sq: Vec<f64> = m.iter().map(|v| v * v).collect();
    let mean_abs = mbar.expectation(0, &abs);
    let m2 = mbar.expectation(0, &sq);
    let single: Vec<f64> = run.series[0].production().iter().map(|v| v.0).collect();
    let own = observables(&single, cfg.l)?;
    let pooled = Observables {
        mean_abs_m: mean_abs,
        chi: (cfg.l * cfg.l) as f64 * (m2 - mean_abs * mean_abs),
        ..own
    };
    Ok((pooled, run))
}

/// One row of the lattice scan output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    pub method: Phi4Method,
    pub mean_abs_m: f64,
    pub se_m: f64,
    pub chi: f64,
    pub se_chi: f64,
    pub iat: f64,
    pub n_eff: f64,
}

fn scan_row(j: f64, h: f64, method: Phi4Method, o: Observables) -> ScanRow {
    ScanRow {
        j,
        h,
        method,
        mean_abs_m: o.mean_abs_m,
        se_m: o.se_m,
        chi: o.chi,
        se_chi: o.se_chi,
        iat: o.iat,
        n_eff: o.n_eff,
    }
}

/// Runs every `(J, h)` point with every method. Point `i` uses the seed
/// `derive_seed(seed, Scan, i)`; rows come back in point-major order.
pub fn phi4_scan(
    cfg: &Phi4RunConfig,
    points: &[(f64, f64)],
    methods: &[Phi4Method],
    schedule: &NoiseSchedule,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    let jobs: Vec<(usize, Phi4Method)> = (0..points.len())
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, method)| {
            let (j, h) = points[i];
            let p = Phi4Params::new(j, h);
            let s = derive_seed(seed, Stream::Scan, i as u64);
            let m = match method {
                Phi4Method::Ggpa => run_ggpa_point(cfg, &p, schedule, s)?,
                Phi4Method::Mc => run_mc_point(cfg, &p, s)?.0,
                Phi4Method::GgpaRe => {
                    let run = run_re_point(cfg, &p, schedule, s, false)?;
                    run.series[0].production().iter().map(|v| v.0).collect()
                }
            };
            Ok(scan_row(j, h, method, observables(&m, cfg.l)?))
        })
        .collect()
}
