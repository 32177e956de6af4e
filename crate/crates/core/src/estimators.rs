//! Histograms, Jensen-Shannon divergence, integrated autocorrelation times,
//! autocorrelation-corrected standard errors and MBAR.

use rand::{Rng, RngCore};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numeric::logsumexp;

/// Fixed-edge histogram with integer counts. Samples outside the edges are
/// counted in `clipped` and excluded from `total`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub clipped: u64,
}

impl Histogram {
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        let h = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * h).collect();
        edges[bins] = hi;
        Ok(Self {
            edges,
            counts: vec![0; bins],
            total: 0,
            clipped: 0,
        })
    }

    pub fn from_samples(lo: f64, hi: f64, bins: usize, samples: &[f64]) -> Result<Self> {
        let mut hist = Self::uniform(lo, hi, bins)?;
        hist.extend(samples);
        Ok(hist)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.bins()]
    }

    /// Bin index for uniform edges; `None` outside `[lo, hi]`.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        let b = ((x - self.lo()) / (self.hi() - self.lo()) * self.bins() as f64) as usize;
        Some(b.min(self.bins() - 1))
    }

    pub fn add(&mut self, x: f64) {
        match self.bin_of(x) {
            Some(b) => {
                self.counts[b] += 1;
                self.total += 1;
            }
            None => self.clipped += 1,
        }
    }

    pub fn extend(&mut self, xs: &[f64]) {
        for &x in xs {
            self.add(x);
        }
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        check_edges(&self.edges, &other.edges)?;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.clipped += other.clipped;
        Ok(())
    }

    pub fn probabilities(&self) -> BinnedProbabilities {
        let total = self.total.max(1) as f64;
        BinnedProbabilities {
            edges: self.edges.clone(),
            probs: self.counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }
}

/// Bin probabilities from quadrature or a normalized histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedProbabilities {
    pub edges: Vec<f64>,
    pub probs: Vec<f64>,
}

impl BinnedProbabilities {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

fn check_edges(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs())) {
        return Err(Error::domain("histogram edges differ"));
    }
    Ok(())
}

/// JS divergence (natural log) between two binned distributions on the same edges.
pub fn js_divergence(p: &BinnedProbabilities, q: &BinnedProbabilities) -> Result<f64> {
    check_edges(&p.edges, &q.edges)?;
    js_from_probs(&p.probs, &q.probs)
}

pub fn js_histograms(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.total == 0 || q.total == 0 {
        return Err(Error::domain("empty histogram"));
    }
    js_divergence(&p.probabilities(), &q.probabilities())
}

/// JS divergence of two probability vectors; each is renormalized first.
pub fn js_from_probs(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if !(sp > 0.0 && sq > 0.0) || p.iter().chain(q).any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::domain("JS needs nonnegative, non-empty distributions"));
    }
    let kl_half = |a: f64, m: f64| if a > 0.0 { a * (a / m).ln() } else { 0.0 };
    let mut js = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let (a, b) = (a / sp, b / sq);
        let m = 0.5 * (a + b);
        js += 0.5 * (kl_half(a, m) + kl_half(b, m));
    }
    Ok(js.clamp(0.0, std::f64::consts::LN_2))
}

/// Integrated autocorrelation time and statistical inefficiency `g = 1 + 2 tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IatEstimate {
    pub tau_int: f64,
    pub g: f64,
    pub n: usize,
    /// Zero-variance input; `tau_int` is reported as 0.
    pub constant: bool,
}

impl IatEstimate {
    pub fn ess(&self) -> f64 {
        self.n as f64 / self.g
    }
}

/// Unnormalized lag sums `sum_n d_n d_{n+k}` for every lag, via zero-padded FFT.
fn lag_products(d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex64> = d.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(m, Complex64::new(0.0, 0.0));
    fwd.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    buf.iter().take(n).map(|c| c.re / m as f64).collect()
}

/// Sum `(1 - k/n) C(k)/C(0)` up to the first lag with `C(k) <= 0`, where
/// `corr(k)` returns the normalized autocorrelation.
fn truncated_tau(n: usize, mut corr: impl FnMut(usize) -> f64) -> f64 {
    let mut tau = 0.0;
    for k in 1..n.saturating_sub(1) {
        let c = corr(k);
        if c <= 0.0 {
            break;
        }
        tau += (1.0 - k as f64 / n as f64) * c;
    }
    tau
}

const IAT_MIN_LEN: usize = 10;

pub fn integrated_autocorrelation_time(series: &[f64]) -> Result<IatEstimate> {
    pooled_autocorrelation_time(&[series])
}

/// IAT of several equal-purpose chains sharing one global mean and variance.
///
/// Chains stuck in different basins contribute their offset from the global
/// mean as long-lived correlation, instead of appearing constant one by one.
pub fn pooled_autocorrelation_time<S: AsRef<[f64]>>(chains: &[S]) -> Result<IatEstimate> {
    let chains: Vec<&[f64]> = chains.iter().map(|c| c.as_ref()).collect();
    let total: usize = chains.iter().map(|c| c.len()).sum();
    let n = chains.iter().map(|c| c.len()).max().unwrap_or(0);
    if chains.is_empty() || chains.iter().any(|c| c.len() < IAT_MIN_LEN) {
        return Err(Error::domain(format!("IAT needs at least {IAT_MIN_LEN} samples per chain")));
    }
    if chains.iter().flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            term: "IAT input series".into(),
        });
    }
    let mean = chains.iter().flat_map(|c| c.iter()).sum::<f64>() / total as f64;
    let var = chains
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / total as f64;
    if var <= 1e-300 {
        return Ok(IatEstimate {
            tau_int: 0.0,
            g: 1.0,
            n: total,
            constant: true,
        });
    }
    let mut sums = vec![0.0; n];
    let mut pairs = vec![0usize; n];
    for c in &chains {
        let d: Vec<f64> = c.iter().map(|v| v - mean).collect();
        for (k, s) in lag_products(&d).into_iter().enumerate() {
            sums[k] += s;
            pairs[k] += c.len() - k;
        }
    }
    let tau = truncated_tau(n, |k| {
        if pairs[k] == 0 {
            0.0
        } else {
            sums[k] / pairs[k] as f64 / var
        }
    });
    Ok(IatEstimate {
        tau_int: tau,
        g: 1.0 + 2.0 * tau,
        n: total,
        constant: false,
    })
}

/// `std * sqrt(g / N)`; zero for a constant series.
pub fn autocorr_corrected_se(series: &[f64]) -> Result<f64> {
    pooled_autocorr_corrected_se(&[series])
}

pub fn pooled_autocorr_corrected_se<S: AsRef<[f64]>>(chains: &[S]) -> Result<f64> {
    let iat = pooled_autocorrelation_time(chains)?;
    if iat.constant {
        return Ok(0.0);
    }
    let all: Vec<f64> = chains.iter().flat_map(|c| c.as_ref().iter().copied()).collect();
    let sd = crate::numeric::variance(&all).sqrt();
    Ok(sd * (iat.g / iat.n as f64).sqrt())
}

/// Reduced potentials `u[k][n]` of every pooled sample `n` under every state
/// `k`, with samples stored grouped by the state that generated them
/// (`counts[0]` samples from state 0 first, and so on).
#[derive(Debug, Clone, PartialEq)]
pub struct MbarInput {
    pub u: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
}

impl MbarInput {
    pub fn new(u: Vec<Vec<f64>>, counts: Vec<usize>) -> Result<Self> {
        if u.len() != counts.len() || u.is_empty() {
            return Err(Error::domain("MBAR needs one count per state"));
        }
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::domain("MBAR needs at least one sample"));
        }
        for row in &u {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    term: "MBAR reduced potential".into(),
                });
            }
        }
        Ok(Self { u, counts })
    }

    pub fn n_states(&self) -> usize {
        self.counts.len()
    }

    pub fn n_samples(&self) -> usize {
        self.counts.iter().sum()
    }

    fn sample_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.counts
            .iter()
            .map(|&c| {
                let r = start..start + c;
                start += c;
                r
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbarResult {
    /// Dimensionless free energies, `f[0] = 0`.
    pub f: Vec<f64>,
    /// `weights[k][n]`, normalized so each state's weights sum to 1.
    pub weights: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl MbarResult {
    pub fn expectation(&self, state: usize, observable: &[f64]) -> f64 {
        self.weights[state].iter().zip(observable).map(|(w, a)| w * a).sum()
    }
}

/// `log sum_l N_l exp(f_l - u_l(n))` for every sample.
fn log_denominators(input: &MbarInput, f: &[f64]) -> Vec<f64> {
    let n = input.n_samples();
    let mut terms = vec![0.0; input.n_states()];
    (0..n)
        .map(|j| {
            for (l, t) in terms.iter_mut().enumerate() {
                *t = if input.counts[l] == 0 {
                    f64::NEG_INFINITY
                } else {
                    (input.counts[l] as f64).ln() + f[l] - input.u[l][j]
                };
            }
            logsumexp(&terms)
        })
        .collect()
}

fn mbar_update(input: &MbarInput, f: &[f64], scratch: &mut Vec<f64>) -> Vec<f64> {
    let denom = log_denominators(input, f);
    let mut next: Vec<f64> = input
        .u
        .iter()
        .map(|row| {
            scratch.clear();
            scratch.extend(row.iter().zip(&denom).map(|(u, d)| -u - d));
            -logsumexp(scratch)
        })
        .collect();
    let anchor = next[0];
    for v in next.iter_mut() {
        *v -= anchor;
    }
    next
}

pub fn mbar_solve(input: &MbarInput, tol: f64, max_iter: usize) -> Result<MbarResult> {
    let k = input.n_states();
    let mut f = vec![0.0; k];
    let mut scratch = Vec::with_capacity(input.n_samples());
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let next = mbar_update(input, &f, &mut scratch);
        residual = next.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        f = next;
        iterations += 1;
        if residual < tol {
            break;
        }
    }
    if !(residual < tol) {
        return Err(Error::NotConverged {
            what: "MBAR self-consistent iteration",
            iterations,
            residual,
        });
    }
    let denom = log_denominators(input, &f);
    let weights = (0..k)
        .map(|s| {
            let logw: Vec<f64> = input.u[s].iter().zip(&denom).map(|(u, d)| f[s] - u - d).collect();
            let norm = logsumexp(&logw);
            logw.iter().map(|w| (w - norm).exp()).collect()
        })
        .collect();
    Ok(MbarResult { f, weights, iterations })
}

/// Block-bootstrap standard errors of the MBAR free energies. Each state's
/// samples are resampled in contiguous blocks of `block_len`.
pub fn mbar_bootstrap_se(
    input: &MbarInput,
    block_len: usize,
    n_boot: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    if block_len == 0 || n_boot < 2 {
        return Err(Error::domain("bootstrap needs block_len >= 1 and n_boot >= 2"));
    }
    let ranges = input.sample_ranges();
    let k = input.n_states();
    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let mut idx = Vec::with_capacity(input.n_samples());
        for r in &ranges {
            let len = r.len();
            if len == 0 {
                continue;
            }
            let blocks = len.div_ceil(block_len);
            let mut taken = 0;
            for _ in 0..blocks {
                let start = r.start + rng.random_range(0..len.saturating_sub(block_len).max(0) + 1);
                for j in 0..block_len.min(len - taken) {
                    idx.push((start + j).min(r.end - 1));
                }
                taken += block_len.min(len - taken);
            }
        }
        let u = input.u.iter().map(|row| idx.iter().map(|&j| row[j]).collect()).collect();
        let boot = MbarInput::new(u, input.counts.clone())?;
        draws.push(mbar_solve(&boot, tol, 100_000)?.f);
    }
    Ok((0..k)
        .map(|s| {
            let vals: Vec<f64> = draws.iter().map(|d| d[s]).collect();
            let m = crate::numeric::mean(&vals);
            (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n_boot - 1) as f64).sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn js_closed_forms() {
        let p = [0.75, 0.25];
        let q = [0.25, 0.75];
        let expected = 0.75 * (1.5f64).ln() + 0.25 * (0.5f64).ln();
        assert!((js_from_probs(&p, &q).unwrap() - expected).abs() < 1e-12);
        assert_eq!(js_from_probs(&p, &p).unwrap(), 0.0);
        let d = js_from_probs(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn js_rejects_mismatched_edges() {
        let a = Histogram::from_samples(0.0, 1.0, 4, &[0.1]).unwrap();
        let b = Histogram::from_samples(0.0, 2.0, 4, &[0.1]).unwrap();
        assert!(js_histograms(&a, &b).is_err());
    }

    #[test]
    fn histogram_total_excludes_clipped() {
        let h = Histogram::from_samples(-1.0, 1.0, 4, &[-2.0, -1.0, 0.0, 0.999, 1.0, 3.0]).unwrap();
        assert_eq!(h.total, 4);
        assert_eq!(h.clipped, 2);
        assert_eq!(h.counts.iter().sum::<u64>(), h.total);
        assert_eq!(h.counts, vec![1, 0, 1, 2]);
    }

    proptest! {
        #[test]
        fn js_symmetric_and_bounded(p in proptest::collection::vec(0.0f64..1.0, 8), q in proptest::collection::vec(0.0f64..1.0, 8)) {
            prop_assume!(p.iter().sum::<f64>() > 0.0 && q.iter().sum::<f64>() > 0.0);
            let a = js_from_probs(&p, &q).unwrap();
            let b = js_from_probs(&q, &p).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=std::f64::consts::LN_2).contains(&a));
        }

        #[test]
        fn g_at_least_one(xs in proptest::collection::vec(-5.0f64..5.0, 10..200)) {
            let est = integrated_autocorrelation_time(&xs).unwrap();
            prop_assert!(est.g >= 1.0);
            prop_assert!(est.ess() <= est.n as f64 + 1e-9);
        }
    }

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded(seed);
        let mut x = 0.0;
        let sd = (1.0 - phi * phi).sqrt();
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = phi * x + sd * z;
                x
            })
            .collect()
    }

    #[test]
    fn iat_iid_and_alternating() {
        let iid = ar1(0.0, 100_000, 3);
        let est = integrated_autocorrelation_time(&iid).unwrap();
        assert!((est.g - 1.0).abs() < 0.1, "g = {}", est.g);
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(integrated_autocorrelation_time(&alt).unwrap().tau_int, 0.0);
        let c = integrated_autocorrelation_time(&[2.0; 20]).unwrap();
        assert!(c.constant);
        assert_eq!(autocorr_corrected_se(&[2.0; 20]).unwrap(), 0.0);
        assert!(integrated_autocorrelation_time(&[1.0; 5]).is_err());
    }

    #[test]
    fn iat_matches_direct_lag_sum() {
        let xs = ar1(0.7, 500, 9);
        let m = crate::numeric::mean(&xs);
        let v = crate::numeric::variance(&xs);
        let n = xs.len();
        let mut tau = 0.0;
        for k in 1..n - 1 {
            let c: f64 = (0..n - k).map(|i| (xs[i] - m) * (xs[i + k] - m)).sum::<f64>() / (n - k) as f64 / v;
            if c <= 0.0 {
                break;
            }
            tau += (1.0 - k as f64 / n as f64) * c;
        }
        let est = integrated_autocorrelation_time(&xs).unwrap();
        assert!((est.tau_int - tau).abs() < 1e-9);
    }

    #[test]
    fn se_iid_and_duplicated() {
        let xs = ar1(0.0, 50_000, 4);
        let plain = (crate::numeric::variance(&xs) / xs.len() as f64).sqrt();
        let se = autocorr_corrected_se(&xs).unwrap();
        assert!((se / plain - 1.0).abs() < 0.1);
        let dup: Vec<f64> = xs.iter().flat_map(|&v| [v, v]).collect();
        let se_dup = autocorr_corrected_se(&dup).unwrap();
        assert!((se_dup / se - 1.0).abs() < 0.15, "{se_dup} vs {se}");
    }

    #[test]
    fn pooled_iat_sees_stuck_chains() {
        let a = vec![1.0; 100];
        let b = vec![-1.0; 100];
        let est = pooled_autocorrelation_time(&[a, b]).unwrap();
        assert!(!est.constant);
        assert!(est.tau_int > 40.0);
    }

    #[test]
    fn mbar_trivial_cases() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let u: Vec<f64> = xs.iter().map(|x| 0.5 * x * x).collect();
        let one = mbar_solve(&MbarInput::new(vec![u.clone()], vec![50]).unwrap(), 1e-10, 100).unwrap();
        assert_eq!(one.f, vec![0.0]);
        assert!(one.weights[0].iter().all(|w| (w - 0.02).abs() < 1e-12));
        let two = mbar_solve(&MbarInput::new(vec![u.clone(), u], vec![25, 25]).unwrap(), 1e-10, 1000).unwrap();
        assert!(two.f[1].abs() < 1e-8);
    }

    #[test]
    fn mbar_gaussian_ladder_small() {
        let scales = [1.0, 1.5, 2.0];
        let mut rng = seeded(12);
        let n = 2000;
        let xs: Vec<f64> = scales
            .iter()
            .flat_map(|&s| {
                (0..n)
                    .map(|_| { let z: f64 = StandardNormal.sample(&mut rng); s * z })
                    .collect::<Vec<_>>()
            })
            .collect();
        let u = scales.iter().map(|s| xs.iter().map(|x| x * x / (2.0 * s * s)).collect()).collect();
        let input = MbarInput::new(u, vec![n; 3]).unwrap();
        let res = mbar_solve(&input, 1e-10, 10_000).unwrap();
        for k in 1..3 {
            assert!((-res.f[k] - (scales[k] / scales[0]).ln()).abs() < 0.05);
        }
        // Reweighted second moment of state 2 from the pooled data.
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((res.expectation(2, &sq) - 4.0).abs() < 0.3);
        let se = mbar_bootstrap_se(&input, 50, 10, 1e-8, &mut rng).unwrap();
        assert_eq!(se[0], 0.0);
        assert!(se[1] > 0.0 && se[1] < 0.1);
    }
}
