//! Experiment orchestration: runs a configured experiment, writes its CSV
//! tables into the output directory and a `manifest.json` describing them.
//!
//! Seeds: every table draws from `derive_seed(seed, purpose, index)`; rows
//! are sorted by their key columns before writing, so outputs depend only on
//! the configuration and seed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::config::{Experiment, ExperimentConfig};
use crate::context::{max_diffusion_time, doublewell_admissible, ContextMode};
use crate::doublewell::{
    batch_metrics, direct_prior_samples, ground_truth_marginal, histogram_of, langevin_baseline, langevin_iat,
    re_ladder_free_energies, run_fixed_t_chains, run_re_chains,
};
use crate::error::{Error, Result};
use crate::estimators::js_divergence;
use crate::numeric::linspace;
use crate::phi4::{
    blurred_barrier, collapse_couplings, collapse_quality, noise_transition_analysis, observables, phi4_scan,
    run_ggpa_point, run_mc_point, run_re_point, run_re_point_mbar, scaling_collapse, zero_field_couplings, CollapsePoint, Phi4Method,
    Phi4Params, Phi4RunConfig, ScanRow, J_CRITICAL,
};
use crate::prior::GaussianMixturePrior;
use crate::replica::SwapReportRow;
use crate::rng::{derive_seed, Stream};
use crate::schedule::NoiseSchedule;
use crate::split_gibbs::{ar1_mixing_prediction, exact_posterior, scalar_chain_lag1, scan_split_noise, LinearInverseProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellRow {
    pub t: Option<f64>,
    pub mode: String,
    pub js_clean: f64,
    pub js_noisy: Option<f64>,
    pub js_err: Option<f64>,
    pub iat: Option<f64>,
    pub iat_err: Option<f64>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapRow {
    pub pair_lo: usize,
    pub pair_hi: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub attempts: u64,
    pub accepts: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub x: f64,
    pub truth: f64,
    pub annealed: f64,
    pub re: f64,
    pub direct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub sweep: usize,
    pub method: String,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub h: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub x: f64,
    pub mean_abs_m: f64,
    pub se_m: f64,
    pub chi: f64,
    pub se_chi: f64,
    pub scaled_m: f64,
    pub scaled_chi: f64,
    pub iat: f64,
    pub n_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseQualityRow {
    pub observable: String,
    pub raw_spread: f64,
    pub scaled_spread: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ar1Row {
    pub rho: f64,
    pub predicted: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRow {
    pub mu1: f64,
    pub mu2: f64,
    pub prior_weight: f64,
    pub posterior_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SofteningRow {
    pub replica: usize,
    pub t: f64,
    pub sigma_tilde: f64,
    pub j_eff_ir: f64,
    pub barrier: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierRow {
    pub sigma_tilde: f64,
    pub barrier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub replica: usize,
    pub t: f64,
    pub mean_abs_m_phi: f64,
    pub mean_abs_m_psi: f64,
    pub iat_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyRow {
    pub replica: usize,
    pub t: f64,
    pub f: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    /// Git blob hash of the file contents.
    pub sha1: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub version: String,
    pub config: ExperimentConfig,
    pub files: Vec<ManifestFile>,
    pub wall_clock_seconds: f64,
}

/// `sha1("blob <len>\0" + contents)`, as `git hash-object` prints it.
pub fn git_blob_sha1(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        write_csv(&self.dir.join(name), rows)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn by_f64(a: f64, b: f64) -> std::cmp::Ordering {
    a.total_cmp(&b)
}

fn swap_rows(times: &[f64], rows: &[SwapReportRow]) -> Vec<SwapRow> {
    rows.iter()
        .map(|r| SwapRow {
            pair_lo: r.pair_lo,
            pair_hi: r.pair_hi,
            t_lo: times[r.pair_lo],
            t_hi: times[r.pair_hi],
            attempts: r.attempts,
            accepts: r.accepts,
            rate: r.rate,
        })
        .collect()
}

/// Runs the configured experiment and writes its artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut out = Outputs {
        dir: cfg.out_dir.clone(),
        files: Vec::new(),
    };
    match cfg.experiment {
        Experiment::Doublewell => doublewell(cfg, &mut out)?,
        Experiment::Phi4 => phi4_point(cfg, &mut out)?,
        Experiment::Phi4Scan => phi4_zero_field(cfg, &mut out)?,
        Experiment::Phi4Collapse => phi4_collapse(cfg, &mut out)?,
        Experiment::GmmSplit => gmm_split(cfg, &mut out)?,
        Experiment::ReDiagnostics => re_diagnostics(cfg, &mut out)?,
    }
    let mut files = Vec::new();
    for name in &out.files {
        let bytes = std::fs::read(out.dir.join(name))?;
        files.push(ManifestFile {
            path: name.clone(),
            sha1: git_blob_sha1(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = Manifest {
        experiment: cfg.experiment.as_str().to_string(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        files,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    std::fs::write(cfg.out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn doublewell(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let dw = &cfg.doublewell;
    let sched = NoiseSchedule::default();
    let truth = ground_truth_marginal(&dw.params, 4096)?;
    let mut rows = Vec::new();
    let mut annealed_probs = None;
    for (i, (t, mode)) in cfg.doublewell_modes().into_iter().enumerate() {
        let seed = derive_seed(cfg.seed, Stream::Scan, i as u64);
        let batch = run_fixed_t_chains(&dw.params, &sched, t, mode, dw.n_chains, dw.n_sweeps, dw.burn_in, seed)?;
        let m = batch_metrics(&batch, &truth, dw.groups)?;
        if annealed_probs.is_none() && matches!(mode, ContextMode::Annealed { .. }) {
            annealed_probs = Some(histogram_of(&batch.clean_production())?.probabilities());
        }
        rows.push(DoubleWellRow {
            t: Some(t),
            mode: match mode {
                ContextMode::Annealed { .. } => "annealed",
                ContextMode::Unannealed => "unannealed",
            }
            .into(),
            js_clean: m.js_clean,
            js_noisy: Some(m.js_noisy),
            js_err: Some(m.js_err),
            iat: Some(m.iat),
            iat_err: Some(m.iat_err),
            n_samples: m.n_samples,
        });
    }
    let re_seed = derive_seed(cfg.seed, Stream::Replica, 0);
    let (batch, swaps) = run_re_chains(&dw.params, &sched, &dw.re_times, dw.anchor_t, dw.n_chains, dw.n_sweeps, dw.burn_in, re_seed)?;
    let m = batch_metrics(&batch, &truth, dw.groups)?;
    let re_probs = histogram_of(&batch.clean_production())?.probabilities();
    rows.push(DoubleWellRow {
        t: Some(dw.re_times[0]),
        mode: "re".into(),
        js_clean: m.js_clean,
        js_noisy: Some(m.js_noisy),
        js_err: Some(m.js_err),
        iat: Some(m.iat),
        iat_err: Some(m.iat_err),
        n_samples: m.n_samples,
    });

    let frames = langevin_baseline(&dw.params, &dw.langevin, derive_seed(cfg.seed, Stream::Baseline, 0))?;
    let xs: Vec<Vec<f64>> = frames.iter().map(|f| f[crate::gibbs::burn_in_index(f.len(), dw.burn_in)..].iter().map(|p| p.0).collect()).collect();
    let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
    let (iat, iat_err) = langevin_iat(&frames, dw.burn_in)?;
    rows.push(DoubleWellRow {
        t: None,
        mode: "langevin".into(),
        js_clean: js_divergence(&histogram_of(&refs)?.probabilities(), &truth)?,
        js_noisy: None,
        js_err: None,
        iat: Some(iat),
        iat_err: Some(iat_err),
        n_samples: xs.iter().map(|v| v.len()).sum(),
    });

    let direct = direct_prior_samples(&dw.params, dw.direct_samples, derive_seed(cfg.seed, Stream::Baseline, 1))?;
    let direct_probs = histogram_of(&[direct.as_slice()])?.probabilities();
    rows.push(DoubleWellRow {
        t: None,
        mode: "direct".into(),
        js_clean: js_divergence(&direct_probs, &truth)?,
        js_noisy: None,
        js_err: None,
        iat: None,
        iat_err: None,
        n_samples: direct.len(),
    });
    rows.sort_by(|a, b| a.mode.cmp(&b.mode).then(by_f64(a.t.unwrap_or(-1.0), b.t.unwrap_or(-1.0))));
    out.csv("doublewell_metrics.csv", &rows)?;

    let annealed = annealed_probs.unwrap_or_else(|| truth.clone());
    let marginal: Vec<MarginalRow> = truth
        .centers()
        .into_iter()
        .enumerate()
        .map(|(i, x)| MarginalRow {
            x,
            truth: truth.probs[i],
            annealed: annealed.probs[i],
            re: re_probs.probs[i],
            direct: direct_probs.probs[i],
        })
        .collect();
    out.csv("doublewell_marginal.csv", &marginal)?;
    out.csv("doublewell_swaps.csv", &swap_rows(&dw.re_times, &swaps))?;
    Ok(())
}

fn phi4_run(cfg: &ExperimentConfig) -> Phi4RunConfig {
    Phi4RunConfig {
        re_times: cfg.phi4_ladder(),
        ..cfg.phi4.run.clone()
    }
}

fn phi4_point(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let sched = NoiseSchedule::default();
    let run = phi4_run(cfg);
    let p = cfg.phi4_params();
    let seed = derive_seed(cfg.seed, Stream::Scan, 0);
    let g = run_ggpa_point(&run, &p, &sched, seed)?;
    let (m, _) = run_mc_point(&run, &p, seed)?;
    let row = |method, s: &[f64]| -> Result<ScanRow> {
        let o = observables(s, run.l)?;
        Ok(ScanRow {
            j: p.j,
            h: p.h,
            method,
            mean_abs_m: o.mean_abs_m,
            se_m: o.se_m,
            chi: o.chi,
            se_chi: o.se_chi,
            iat: o.iat,
            n_eff: o.n_eff,
        })
    };
    out.csv("phi4_point.csv", &[row(Phi4Method::Ggpa, &g)?, row(Phi4Method::Mc, &m)?])?;
    let series: Vec<SeriesRow> = g
        .iter()
        .enumerate()
        .map(|(i, &v)| SeriesRow { sweep: i, method: "ggpa".into(), m: v })
        .chain(m.iter().enumerate().map(|(i, &v)| SeriesRow { sweep: i, method: "mc".into(), m: v }))
        .collect();
    out.csv("phi4_series.csv", &series)?;
    Ok(())
}

/// Zero-field scan rows plus the replica-exchange row at the grid point
/// closest to the critical coupling, and that ladder's swap report.
pub fn zero_field_scan(cfg: &ExperimentConfig) -> Result<(Vec<ScanRow>, Vec<SwapRow>)> {
    let sched = NoiseSchedule::default();
    let run = phi4_run(cfg);
    let p = &cfg.phi4;
    let js = zero_field_couplings(p.scan_step, p.scan_below, p.scan_above);
    let points: Vec<(f64, f64)> = js.iter().map(|&j| (j, 0.0)).collect();
    let mut rows = phi4_scan(&run, &points, &[Phi4Method::Ggpa, Phi4Method::Mc], &sched, cfg.seed)?;
    let nearest = js
        .iter()
        .copied()
        .min_by(|a, b| by_f64((a - J_CRITICAL).abs(), (b - J_CRITICAL).abs()))
        .ok_or_else(|| Error::domain("empty coupling grid"))?;
    let point = Phi4Params::new(nearest, 0.0);
    let seed = derive_seed(cfg.seed, Stream::Replica, 0);
    let (o, swaps) = if cfg.phi4.re_mbar {
        let (o, re) = run_re_point_mbar(&run, &point, &sched, seed)?;
        (o, re.swaps)
    } else {
        let re = run_re_point(&run, &point, &sched, seed, false)?;
        let m: Vec<f64> = re.series[0].production().iter().map(|v| v.0).collect();
        (observables(&m, run.l)?, re.swaps)
    };
    rows.push(ScanRow {
        j: nearest,
        h: 0.0,
        method: Phi4Method::GgpaRe,
        mean_abs_m: o.mean_abs_m,
        se_m: o.se_m,
        chi: o.chi,
        se_chi: o.se_chi,
        iat: o.iat,
        n_eff: o.n_eff,
    });
    rows.sort_by(|a, b| by_f64(a.j, b.j).then(by_f64(a.h, b.h)).then(a.method.as_str().cmp(b.method.as_str())));
    Ok((rows, swap_rows(&run.re_times, &swaps)))
}

fn phi4_zero_field(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (rows, swaps) = zero_field_scan(cfg)?;
    out.csv("phi4_scan.csv", &rows)?;
    out.csv("phi4_swaps.csv", &swaps)?;
    Ok(())
}

/// Fixed-time scan over the finite-field collapse grid.
pub fn collapse_scan(cfg: &ExperimentConfig) -> Result<Vec<CollapseRow>> {
    let sched = NoiseSchedule::default();
    let p = &cfg.phi4;
    let run = Phi4RunConfig {
        n_sweeps: p.collapse_sweeps,
        ..phi4_run(cfg)
    };
    let mut points = Vec::new();
    for &h in &p.collapse_fields {
        let mut js = collapse_couplings(h, p.collapse_points, p.collapse_x.0, p.collapse_x.1, p.collapse_j.0, p.collapse_j.1);
        js.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        points.extend(js.into_iter().map(|j| (j, h)));
    }
    let rows = phi4_scan(&run, &points, &[Phi4Method::Ggpa], &sched, cfg.seed)?;
    let pts: Vec<CollapsePoint> = rows
        .iter()
        .map(|r| CollapsePoint {
            j: r.j,
            h: r.h,
            mean_abs_m: r.mean_abs_m,
            chi: r.chi,
        })
        .collect();
    let mut out: Vec<CollapseRow> = scaling_collapse(&pts)
        .into_iter()
        .zip(&rows)
        .map(|(c, r)| CollapseRow {
            h: r.h,
            j: r.j,
            x: c.x,
            mean_abs_m: r.mean_abs_m,
            se_m: r.se_m,
            chi: r.chi,
            se_chi: r.se_chi,
            scaled_m: c.scaled_m,
            scaled_chi: c.scaled_chi,
            iat: r.iat,
            n_eff: r.n_eff,
        })
        .collect();
    out.sort_by(|a, b| by_f64(a.h, b.h).then(by_f64(a.j, b.j)));
    Ok(out)
}

pub fn collapse_quality_rows(rows: &[CollapseRow]) -> Result<Vec<CollapseQualityRow>> {
    let pts: Vec<CollapsePoint> = rows
        .iter()
        .map(|r| CollapsePoint {
            j: r.j,
            h: r.h,
            mean_abs_m: r.mean_abs_m,
            chi: r.chi,
        })
        .collect();
    let q = collapse_quality(&pts)?;
    Ok(vec![
        CollapseQualityRow {
            observable: "magnetization".into(),
            raw_spread: q.raw_m,
            scaled_spread: q.scaled_m,
            ratio: q.scaled_m / q.raw_m,
        },
        CollapseQualityRow {
            observable: "susceptibility".into(),
            raw_spread: q.raw_chi,
            scaled_spread: q.scaled_chi,
            ratio: q.scaled_chi / q.raw_chi,
        },
    ])
}

fn phi4_collapse(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let rows = collapse_scan(cfg)?;
    out.csv("phi4_collapse.csv", &rows)?;
    out.csv("phi4_collapse_quality.csv", &collapse_quality_rows(&rows)?)?;
    Ok(())
}

pub fn gmm_problem(cfg: &ExperimentConfig) -> Result<LinearInverseProblem> {
    let g = &cfg.gmm;
    LinearInverseProblem::white(
        nalgebra::DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        nalgebra::DVector::zeros(1),
        g.sigma_eta,
        GaussianMixturePrior::square_grid(&g.levels, g.sigma_x)?,
    )
}

fn gmm_split(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let g = &cfg.gmm;
    let problem = gmm_problem(cfg)?;
    let mut rows = scan_split_noise(&problem, &g.r_values, g.n_steps, g.n_chains, g.burn_in, g.groups, cfg.seed)?;
    rows.sort_by(|a, b| a.method.cmp(&b.method).then(by_f64(a.r, b.r)));
    out.csv("split_scan.csv", &rows)?;
    let ar1 = g
        .ar1_rhos
        .iter()
        .enumerate()
        .map(|(i, &rho)| {
            Ok(Ar1Row {
                rho,
                predicted: ar1_mixing_prediction(g.ar1_sigma_x, 1.0, g.sigma_eta, rho)?,
                empirical: scalar_chain_lag1(g.ar1_sigma_x, 1.0, g.sigma_eta, rho, g.ar1_steps, derive_seed(cfg.seed, Stream::Chain, i as u64))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.csv("split_ar1.csv", &ar1)?;
    let post = exact_posterior(&problem)?;
    let comps: Vec<PosteriorRow> = problem
        .prior
        .means()
        .iter()
        .zip(problem.prior.weights())
        .zip(&post.weights)
        .map(|((m, &w), &pw)| PosteriorRow {
            mu1: m[0],
            mu2: m[1],
            prior_weight: w,
            posterior_weight: pw,
        })
        .collect();
    out.csv("split_posterior.csv", &comps)?;
    Ok(())
}

/// Fixed-anchor lattice ladder at `phi4.noise.j`: per-replica `<|m|>` on the
/// clean and auxiliary fields.
pub fn replica_profile(cfg: &ExperimentConfig) -> Result<(Vec<ProfileRow>, Vec<SwapRow>)> {
    let sched = NoiseSchedule::default();
    let run = Phi4RunConfig {
        n_sweeps: cfg.phi4.noise_sweeps,
        ..phi4_run(cfg)
    };
    let re = run_re_point(&run, &Phi4Params::new(cfg.phi4.noise_j, 0.0), &sched, derive_seed(cfg.seed, Stream::Replica, 1), true)?;
    let rows = re
        .series
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let prod = s.production();
            let phi: Vec<f64> = prod.iter().map(|v| v.0).collect();
            let psi: f64 = prod.iter().map(|v| v.1.abs()).sum::<f64>() / prod.len() as f64;
            let o = observables(&phi, run.l)?;
            Ok(ProfileRow {
                replica: r,
                t: run.re_times[r],
                mean_abs_m_phi: o.mean_abs_m,
                mean_abs_m_psi: psi,
                iat_phi: o.iat,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, swap_rows(&run.re_times, &re.swaps)))
}

fn re_diagnostics(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let sched = NoiseSchedule::default();
    let times = cfg.phi4_ladder();
    let soft = noise_transition_analysis(cfg.phi4.run.l, cfg.phi4.noise_j, cfg.phi4.run.t, &times, &sched)?;
    let rows: Vec<SofteningRow> = soft
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let nonzero = s.kappa.iter().skip(1);
            SofteningRow {
                replica: r,
                t: s.t,
                sigma_tilde: s.sigma_tilde,
                j_eff_ir: s.j_eff_ir,
                barrier: s.barrier,
                kappa_min: nonzero.clone().copied().fold(f64::INFINITY, f64::min),
                kappa_max: nonzero.copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    out.csv("noise_transition.csv", &rows)?;
    let barrier: Vec<BarrierRow> = linspace(0.0, 1.5, 151)
        .into_iter()
        .map(|s| BarrierRow {
            sigma_tilde: s,
            barrier: blurred_barrier(s),
        })
        .collect();
    out.csv("blur_barrier.csv", &barrier)?;
    let (profile, swaps) = replica_profile(cfg)?;
    out.csv("re_profile.csv", &profile)?;
    out.csv("re_swaps.csv", &swaps)?;

    let dw = &cfg.doublewell;
    let (f, se) = re_ladder_free_energies(&dw.params, &sched, &dw.re_times, dw.anchor_t, dw.n_sweeps, dw.burn_in, derive_seed(cfg.seed, Stream::Replica, 2))?;
    let fe: Vec<FreeEnergyRow> = dw
        .re_times
        .iter()
        .enumerate()
        .map(|(r, &t)| FreeEnergyRow { replica: r, t, f: f[r], se: se[r] })
        .collect();
    out.csv("doublewell_mbar.csv", &fe)?;
    Ok(())
}

/// Largest admissible time of the double-well context under the default schedule.
pub fn doublewell_bound(k_c: f64) -> Result<f64> {
    let sched = NoiseSchedule::default();
    max_diffusion_time(|t| doublewell_admissible(k_c, t, &sched), 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn git_blob_hash_matches_git() {
        // `printf 'hello\n' | git hash-object --stdin`
        assert_eq!(git_blob_sha1(b"hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
        assert_eq!(git_blob_sha1(b""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    }

    #[test]
    fn bound_for_default_coupling() {
        assert!((doublewell_bound(4.0).unwrap() - 0.28).abs() < 0.01);
    }
}
