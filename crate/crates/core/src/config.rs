//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! seed = 7
//! doublewell.k_c = 4
//! [phi4]
//! l = 32
//! collapse.fields = 0.008, 0.012, 0.015, 0.02, 0.025
//! ```
//!
//! A `[section]` line prefixes the keys that follow it. Unknown keys are
//! rejected by name; defaults depend on the scale (`ci` or `paper`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::context::ContextMode;
use crate::doublewell::{DoubleWellParams, LangevinConfig};
use crate::error::{Error, Result};
use crate::phi4::{Phi4Params, Phi4RunConfig, J_CRITICAL};
use crate::replica::ReplicaLadder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Doublewell,
    Phi4,
    Phi4Scan,
    Phi4Collapse,
    GmmSplit,
    ReDiagnostics,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Doublewell => "doublewell",
            Experiment::Phi4 => "phi4",
            Experiment::Phi4Scan => "phi4-scan",
            Experiment::Phi4Collapse => "phi4-collapse",
            Experiment::GmmSplit => "gmm-split",
            Experiment::ReDiagnostics => "re-diagnostics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Ci,
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ci" => Ok(Scale::Ci),
            "paper" => Ok(Scale::Paper),
            _ => Err(format!("expected `ci` or `paper`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellSection {
    pub params: DoubleWellParams,
    /// Annealed fixed-time runs (must lie below the admissibility bound).
    pub annealed_times: Vec<f64>,
    pub unannealed_times: Vec<f64>,
    pub re_times: Vec<f64>,
    pub anchor_t: f64,
    pub n_chains: usize,
    pub n_sweeps: usize,
    pub burn_in: f64,
    pub groups: usize,
    pub langevin: LangevinConfig,
    pub direct_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phi4Section {
    pub run: Phi4RunConfig,
    /// Single-point run.
    pub j: f64,
    pub h: f64,
    pub temperature: f64,
    pub re_replicas: usize,
    pub re_t_max: f64,
    /// Reweight every replica to the production time instead of using it alone.
    pub re_mbar: bool,
    pub scan_step: f64,
    pub scan_below: usize,
    pub scan_above: usize,
    pub collapse_fields: Vec<f64>,
    pub collapse_points: usize,
    pub collapse_x: (f64, f64),
    pub collapse_j: (f64, f64),
    pub collapse_sweeps: usize,
    /// Coupling of the noise-transition ladder.
    pub noise_j: f64,
    pub noise_sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmSection {
    pub sigma_eta: f64,
    pub sigma_x: f64,
    pub levels: Vec<f64>,
    pub r_values: Vec<f64>,
    pub n_chains: usize,
    pub n_steps: usize,
    pub burn_in: f64,
    pub groups: usize,
    pub ar1_sigma_x: f64,
    pub ar1_rhos: Vec<f64>,
    pub ar1_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub scale: Scale,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub doublewell: DoubleWellSection,
    pub phi4: Phi4Section,
    pub gmm: GmmSection,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment, scale: Scale) -> Self {
        let paper = scale == Scale::Paper;
        let run = Phi4RunConfig {
            mc_equilibration: if paper { 50_000 } else { 10_000 },
            mc_measurement: if paper { 150_000 } else { 30_000 },
            ..Phi4RunConfig::default()
        };
        Self {
            experiment,
            seed: 0,
            scale,
            out_dir: PathBuf::from("out"),
            threads: None,
            doublewell: DoubleWellSection {
                params: DoubleWellParams::default(),
                annealed_times: vec![0.1, 0.2],
                unannealed_times: vec![0.2, 0.4, 0.6, 0.8],
                re_times: vec![0.1, 0.2, 0.4, 0.8],
                anchor_t: 0.1,
                n_chains: if paper { 1000 } else { 250 },
                n_sweeps: 20_000,
                burn_in: 0.3,
                groups: 5,
                langevin: LangevinConfig::default(),
                direct_samples: 1_000_000,
            },
            phi4: Phi4Section {
                run,
                j: J_CRITICAL,
                h: 0.0,
                temperature: 1.0,
                re_replicas: 48,
                re_t_max: 0.6,
                re_mbar: false,
                scan_step: 0.02,
                scan_below: 7,
                scan_above: 7,
                collapse_fields: vec![0.008, 0.012, 0.015, 0.02, 0.025],
                collapse_points: 10,
                collapse_x: (-2.0, 2.0),
                collapse_j: (0.10, 0.80),
                collapse_sweeps: 10_000,
                noise_j: 0.5,
                noise_sweeps: if paper { 10_000 } else { 3_000 },
            },
            gmm: GmmSection {
                sigma_eta: 2.5,
                sigma_x: 0.8,
                levels: vec![-5.0, -2.5, 0.0, 2.5, 5.0],
                r_values: vec![0.3, 0.5, 0.7, 0.8, 0.9, 0.95],
                n_chains: 32,
                n_steps: if paper { 200_000 } else { 50_000 },
                burn_in: 0.2,
                groups: 4,
                ar1_sigma_x: 1.0,
                ar1_rhos: vec![0.5, 1.0, 1.5],
                ar1_steps: 1_000_000,
            },
        }
    }

    /// Production-replica ladder of the lattice runs.
    pub fn phi4_ladder(&self) -> Vec<f64> {
        ReplicaLadder::<crate::phi4::Phi4Adapter>::geometric_times(self.phi4.run.t, self.phi4.re_t_max, self.phi4.re_replicas)
    }

    pub fn phi4_params(&self) -> Phi4Params {
        Phi4Params {
            j: self.phi4.j,
            h: self.phi4.h,
            temperature: self.phi4.temperature,
        }
    }

    pub fn doublewell_modes(&self) -> Vec<(f64, ContextMode)> {
        let dw = &self.doublewell;
        dw.annealed_times
            .iter()
            .map(|&t| (t, ContextMode::Annealed { anchor_t: t }))
            .chain(dw.unannealed_times.iter().map(|&t| (t, ContextMode::Unannealed)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Err(Error::ConfigValue { key: key.into(), message });
        let dw = &self.doublewell;
        if !(dw.params.a > 0.0) {
            return bad("doublewell.a", format!("must be positive, got {}", dw.params.a));
        }
        if !(dw.params.k_c > 0.0) {
            return bad("doublewell.k_c", format!("must be positive, got {}", dw.params.k_c));
        }
        if !(dw.params.k_b > 0.0) {
            return bad("doublewell.k_b", format!("must be positive, got {}", dw.params.k_b));
        }
        if !dw.params.u_eq.is_finite() {
            return bad("doublewell.u_eq", "must be finite".into());
        }
        for (key, ts) in [
            ("doublewell.annealed_times", &dw.annealed_times),
            ("doublewell.unannealed_times", &dw.unannealed_times),
            ("doublewell.re_times", &dw.re_times),
        ] {
            if ts.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
                return bad(key, "times must lie in (0, 1]".into());
            }
        }
        if dw.re_times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("doublewell.re_times", "ladder times must increase strictly".into());
        }
        check_fraction("doublewell.burn_in", dw.burn_in)?;
        check_positive("doublewell.n_chains", dw.n_chains)?;
        check_positive("doublewell.n_sweeps", dw.n_sweeps)?;
        check_positive("doublewell.groups", dw.groups)?;
        check_positive("doublewell.direct_samples", dw.direct_samples)?;
        if dw.groups > dw.n_chains {
            return bad("doublewell.groups", "cannot exceed n_chains".into());
        }
        if !(dw.langevin.dt > 0.0) {
            return bad("doublewell.langevin.dt", "must be positive".into());
        }
        check_positive("doublewell.langevin.n_samples", dw.langevin.n_samples)?;
        check_positive("doublewell.langevin.record_every", dw.langevin.record_every)?;
        check_positive("doublewell.langevin.n_traj", dw.langevin.n_traj)?;

        let p = &self.phi4;
        if p.run.l < 2 {
            return bad("phi4.l", "lattice side must be >= 2".into());
        }
        if p.temperature != 1.0 {
            return bad("phi4.temperature", "only T = 1 is supported".into());
        }
        if !(p.run.t > 0.0 && p.run.t <= 1.0) {
            return bad("phi4.t", "must lie in (0, 1]".into());
        }
        if !(p.j >= 0.0) || !(p.noise_j >= 0.0) {
            return bad("phi4.j", "couplings must be nonnegative".into());
        }
        if !p.h.is_finite() {
            return bad("phi4.h", "must be finite".into());
        }
        check_fraction("phi4.burn_in", p.run.burn_in_fraction)?;
        check_positive("phi4.n_sweeps", p.run.n_sweeps)?;
        check_positive("phi4.mc_measurement", p.run.mc_measurement)?;
        check_positive("phi4.re_replicas", p.re_replicas)?;
        check_positive("phi4.collapse.points", p.collapse_points)?;
        check_positive("phi4.collapse.sweeps", p.collapse_sweeps)?;
        check_positive("phi4.noise.sweeps", p.noise_sweeps)?;
        if !(p.re_t_max > p.run.t && p.re_t_max <= 1.0) {
            return bad("phi4.re_t_max", "must lie in (t, 1]".into());
        }
        if !(p.scan_step > 0.0) {
            return bad("phi4.scan.step", "must be positive".into());
        }
        if p.collapse_fields.is_empty() || p.collapse_fields.iter().any(|&h| !(h > 0.0)) {
            return bad("phi4.collapse.fields", "fields must be positive".into());
        }
        if !(p.collapse_x.0 < p.collapse_x.1) {
            return bad("phi4.collapse.x_min", "x_min must be below x_max".into());
        }
        if !(p.collapse_j.0 >= 0.0 && p.collapse_j.0 < p.collapse_j.1) {
            return bad("phi4.collapse.j_min", "need 0 <= j_min < j_max".into());
        }

        let g = &self.gmm;
        if !(g.sigma_eta > 0.0) {
            return bad("gmm.sigma_eta", "must be positive".into());
        }
        if !(g.sigma_x > 0.0) || !(g.ar1_sigma_x > 0.0) {
            return bad("gmm.sigma_x", "must be positive".into());
        }
        if g.levels.is_empty() {
            return bad("gmm.levels", "need at least one level".into());
        }
        if g.r_values.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return bad("gmm.r_values", "levels must lie in (0, 1)".into());
        }
        if g.ar1_rhos.iter().any(|&r| !(r > 0.0 && r < g.sigma_eta)) {
            return bad("gmm.ar1_rhos", "split noise must lie in (0, sigma_eta)".into());
        }
        check_fraction("gmm.burn_in", g.burn_in)?;
        check_positive("gmm.n_chains", g.n_chains)?;
        check_positive("gmm.n_steps", g.n_steps)?;
        check_positive("gmm.ar1_steps", g.ar1_steps)?;
        if g.groups == 0 || g.groups > g.n_chains {
            return bad("gmm.groups", "must lie in [1, n_chains]".into());
        }
        if let Some(0) = self.threads {
            return bad("threads", "must be positive".into());
        }
        Ok(())
    }

    /// Applies one `key = value` pair. `line` is used for error positions.
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let f = || parse_f64(key, value);
        let u = || parse_usize(key, value);
        let list = || parse_list(key, value);
        let dw = &mut self.doublewell;
        let p = &mut self.phi4;
        let g = &mut self.gmm;
        match key {
            "seed" => self.seed = value.parse().map_err(|_| value_error(key, value, "an unsigned 64-bit integer"))?,
            "scale" => self.scale = value.parse().map_err(|m: String| Error::ConfigValue { key: key.into(), message: m })?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = Some(u()?),
            "doublewell.a" => dw.params.a = f()?,
            "doublewell.k_c" => dw.params.k_c = f()?,
            "doublewell.k_b" => dw.params.k_b = f()?,
            "doublewell.u_eq" => dw.params.u_eq = f()?,
            "doublewell.annealed_times" => dw.annealed_times = list()?,
            "doublewell.unannealed_times" => dw.unannealed_times = list()?,
            "doublewell.re_times" => dw.re_times = list()?,
            "doublewell.anchor_t" => dw.anchor_t = f()?,
            "doublewell.n_chains" => dw.n_chains = u()?,
            "doublewell.n_sweeps" => dw.n_sweeps = u()?,
            "doublewell.burn_in" => dw.burn_in = f()?,
            "doublewell.groups" => dw.groups = u()?,
            "doublewell.direct_samples" => dw.direct_samples = u()?,
            "doublewell.langevin.dt" => dw.langevin.dt = f()?,
            "doublewell.langevin.n_samples" => dw.langevin.n_samples = u()?,
            "doublewell.langevin.record_every" => dw.langevin.record_every = u()?,
            "doublewell.langevin.n_traj" => dw.langevin.n_traj = u()?,
            "phi4.l" => p.run.l = u()?,
            "phi4.t" => p.run.t = f()?,
            "phi4.j" => p.j = f()?,
            "phi4.h" => p.h = f()?,
            "phi4.temperature" => p.temperature = f()?,
            "phi4.n_sweeps" => p.run.n_sweeps = u()?,
            "phi4.burn_in" => p.run.burn_in_fraction = f()?,
            "phi4.mc_equilibration" => p.run.mc_equilibration = u()?,
            "phi4.mc_measurement" => p.run.mc_measurement = u()?,
            "phi4.target_n_eff" => p.run.target_n_eff = f()?,
            "phi4.max_sweeps" => p.run.max_sweeps = u()?,
            "phi4.mc_max_measurement" => p.run.mc_max_measurement = u()?,
            "phi4.re_replicas" => p.re_replicas = u()?,
            "phi4.re_t_max" => p.re_t_max = f()?,
            "phi4.re_mbar" => p.re_mbar = value.parse().map_err(|_| value_error(key, value, "`true` or `false`"))?,
            "phi4.scan.step" => p.scan_step = f()?,
            "phi4.scan.below" => p.scan_below = u()?,
            "phi4.scan.above" => p.scan_above = u()?,
            "phi4.collapse.fields" => p.collapse_fields = list()?,
            "phi4.collapse.points" => p.collapse_points = u()?,
            "phi4.collapse.x_min" => p.collapse_x.0 = f()?,
            "phi4.collapse.x_max" => p.collapse_x.1 = f()?,
            "phi4.collapse.j_min" => p.collapse_j.0 = f()?,
            "phi4.collapse.j_max" => p.collapse_j.1 = f()?,
            "phi4.collapse.sweeps" => p.collapse_sweeps = u()?,
            "phi4.noise.j" => p.noise_j = f()?,
            "phi4.noise.sweeps" => p.noise_sweeps = u()?,
            "gmm.sigma_eta" => g.sigma_eta = f()?,
            "gmm.sigma_x" => g.sigma_x = f()?,
            "gmm.levels" => g.levels = list()?,
            "gmm.r_values" => g.r_values = list()?,
            "gmm.n_chains" => g.n_chains = u()?,
            "gmm.n_steps" => g.n_steps = u()?,
            "gmm.burn_in" => g.burn_in = f()?,
            "gmm.groups" => g.groups = u()?,
            "gmm.ar1.sigma_x" => g.ar1_sigma_x = f()?,
            "gmm.ar1.rhos" => g.ar1_rhos = list()?,
            "gmm.ar1.steps" => g.ar1_steps = u()?,
            _ => return Err(Error::UnknownKey(key.into())),
        }
        Ok(())
    }
}

fn check_fraction(key: &str, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::ConfigValue {
            key: key.into(),
            message: format!("must lie in [0, 1), got {v}"),
        })
    }
}

fn check_positive(key: &str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::ConfigValue {
            key: key.into(),
            message: "must be at least 1".into(),
        })
    }
}

fn value_error(key: &str, value: &str, expected: &str) -> Error {
    Error::ConfigValue {
        key: key.into(),
        message: format!("expected {expected}, got `{value}`"),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(value_error(key, value, "a finite number")),
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.replace('_', "").parse().map_err(|_| value_error(key, value, "a nonnegative integer"))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

/// Raw `key -> (value, line)` pairs in file order; later keys win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, (String, usize)>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::ConfigParse {
                line: line_no,
                column: indent + trimmed.len(),
                message: "section header is missing `]`".into(),
            })?;
            let name = name.trim();
            if let Some(col) = invalid_key_char(name) {
                return Err(Error::ConfigParse {
                    line: line_no,
                    column: indent + 2 + col,
                    message: format!("invalid character in section name `{name}`"),
                });
            }
            section = name.to_string();
            continue;
        }
        let eq = content.find('=').ok_or_else(|| Error::ConfigParse {
            line: line_no,
            column: indent + trimmed.len() + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = content[..eq].trim();
        let value = content[eq + 1..].trim().trim_matches('"');
        if key.is_empty() {
            return Err(Error::ConfigParse {
                line: line_no,
                column: eq + 1,
                message: "missing key before `=`".into(),
            });
        }
        if let Some(col) = invalid_key_char(key) {
            return Err(Error::ConfigParse {
                line: line_no,
                column: indent + 1 + col,
                message: format!("invalid character in key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::ConfigParse {
                line: line_no,
                column: content.len() + 1,
                message: format!("missing value for `{key}`"),
            });
        }
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        out.insert(full, (value.to_string(), line_no));
    }
    Ok(out)
}

fn invalid_key_char(key: &str) -> Option<usize> {
    key.char_indices()
        .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '.'))
        .map(|(i, _)| i)
}

/// Parses `text` on top of the defaults for `experiment`. A `scale` key in
/// the text selects the defaults before the other keys are applied.
pub fn validate_config(text: &str, experiment: Experiment, scale: Option<Scale>) -> Result<ExperimentConfig> {
    let pairs = parse_pairs(text)?;
    let scale = match (scale, pairs.get("scale")) {
        (Some(s), _) => s,
        (None, Some((v, _))) => v.parse().map_err(|m: String| Error::ConfigValue {
            key: "scale".into(),
            message: m,
        })?,
        (None, None) => Scale::Ci,
    };
    let mut cfg = ExperimentConfig::defaults(experiment, scale);
    for (key, (value, _)) in &pairs {
        if key == "scale" {
            continue;
        }
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: Option<&Path>, experiment: Experiment, scale: Option<Scale>) -> Result<ExperimentConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    validate_config(&text, experiment, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = validate_config("", Experiment::Doublewell, None).unwrap();
        assert_eq!(c.doublewell.params, DoubleWellParams { a: 8.0, k_c: 4.0, k_b: 1.0, u_eq: 1.0 });
        assert_eq!(c.phi4.run.l, 32);
        assert_eq!(c.phi4.temperature, 1.0);
        assert_eq!(c.gmm.sigma_eta, 2.5);
        assert_eq!(c.gmm.levels.len(), 5);
        assert_eq!(c.scale, Scale::Ci);
        assert_eq!(c.phi4.run.mc_measurement, 30_000);
        let paper = validate_config("scale = paper", Experiment::Phi4Scan, None).unwrap();
        assert_eq!(paper.phi4.run.mc_measurement, 150_000);
        assert_eq!(paper.phi4.run.mc_equilibration, 50_000);
    }

    #[test]
    fn sections_and_overrides() {
        let text = "seed = 11\n# comment\n[phi4]\nl = 8 # inline\ncollapse.fields = 0.01, 0.02\n[doublewell]\nk_c = 3.5\n";
        let c = validate_config(text, Experiment::Phi4, None).unwrap();
        assert_eq!(c.seed, 11);
        assert_eq!(c.phi4.run.l, 8);
        assert_eq!(c.phi4.collapse_fields, vec![0.01, 0.02]);
        assert_eq!(c.doublewell.params.k_c, 3.5);
        assert!(!c.phi4.re_mbar);
        assert!(validate_config("[phi4]\nre_mbar = true", Experiment::Phi4Scan, None).unwrap().phi4.re_mbar);
        assert!(matches!(
            validate_config("phi4.re_mbar = yes", Experiment::Phi4Scan, None),
            Err(Error::ConfigValue { .. })
        ));
    }

    #[test]
    fn rejects_bad_values_and_keys() {
        match validate_config("doublewell.k_c = -1", Experiment::Doublewell, None) {
            Err(Error::ConfigValue { key, .. }) => assert_eq!(key, "doublewell.k_c"),
            other => panic!("{other:?}"),
        }
        match validate_config("kc_typo = 3", Experiment::Doublewell, None) {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "kc_typo"),
            other => panic!("{other:?}"),
        }
        match validate_config("[doublewell]\nkc_typo = 3", Experiment::Doublewell, None) {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "doublewell.kc_typo"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            validate_config("phi4.temperature = 2", Experiment::Phi4, None),
            Err(Error::ConfigValue { .. })
        ));
        assert!(matches!(
            validate_config("phi4.l = many", Experiment::Phi4, None),
            Err(Error::ConfigValue { .. })
        ));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_pairs("seed = 1\n  novalue\n") {
            Err(Error::ConfigParse { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("{other:?}"),
        }
        match parse_pairs("a b = 1") {
            Err(Error::ConfigParse { line, column, .. }) => assert_eq!((line, column), (1, 2)),
            other => panic!("{other:?}"),
        }
        match parse_pairs("[phi4\n") {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_pairs("x =\n") {
            Err(Error::ConfigParse { line, column, .. }) => assert_eq!((line, column), (1, 4)),
            other => panic!("{other:?}"),
        }
    }
}
