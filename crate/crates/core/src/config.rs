//! Run configuration files.
//!
//! A run is described by a TOML document with the sections `[model]`,
//! `[profile]`, `[evolve]`, `[perturb]`, `[analysis]` and `[output]`. Unknown
//! keys anywhere are rejected. Every command writes the fully resolved
//! configuration (all defaults filled in) next to its outputs, and that file
//! parses back to the same configuration.
//!
//! ```toml
//! [model]
//! preset = "linear"
//! l = 0
//! alpha = 3.0
//! lambda = 0.1
//!
//! [evolve]
//! t_final = 200.0
//! observation_radii = [5.0]
//!
//! [output]
//! dir = "out/linear"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Tolerances;
use crate::error::{Error, Result};
use crate::evolve::EvolveConfig;
use crate::models::{
    preset, InnerForm, ModelSpec, NonlinearTerm, PotentialSpec, Preset, DEFAULT_CUTOFF, DEFAULT_EPSILON, DEFAULT_LAMBDA,
};
use crate::numerics::Precision;
use crate::perturb::{DuhamelOptions, Stage};
use crate::profiles::ProfileSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Free,
    Linear,
    Power,
    Wavemap5,
    SkyrmePert,
    YangMills,
    QuadraticAnomalous,
    /// Potential and terms given explicitly.
    Custom,
}

/// `[model]`: a preset name with its parameters, or an explicit equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: PresetName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Potential cutoff radius `R`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_form: Option<InnerForm>,
    /// Custom models only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<NonlinearTerm>,
}

impl ModelConfig {
    pub fn from_preset(name: PresetName) -> Self {
        ModelConfig {
            preset: name,
            l: None,
            alpha: None,
            lambda: None,
            p: None,
            epsilon: None,
            cutoff: None,
            inner_form: None,
            terms: vec![],
        }
    }

    fn need<V: Copy>(&self, v: Option<V>, key: &str) -> Result<V> {
        v.ok_or_else(|| Error::Config(format!("[model] preset {:?} needs key `{key}`", self.preset)))
    }

    fn reject(&self, present: bool, key: &str) -> Result<()> {
        if present {
            return Err(Error::Config(format!("[model] key `{key}` does not apply to preset {:?}", self.preset)));
        }
        Ok(())
    }

    /// The equation this section describes.
    pub fn resolve(&self) -> Result<ModelSpec> {
        use PresetName::*;
        let has_potential = matches!(self.preset, Linear | SkyrmePert | Custom);
        let lambda = self.lambda.unwrap_or(DEFAULT_LAMBDA);
        let epsilon = self.epsilon.unwrap_or(DEFAULT_EPSILON);
        if !has_potential {
            self.reject(self.alpha.is_some(), "alpha")?;
            self.reject(self.lambda.is_some(), "lambda")?;
            self.reject(self.cutoff.is_some(), "cutoff")?;
            self.reject(self.inner_form.is_some(), "inner_form")?;
        }
        if self.preset != Custom {
            self.reject(!self.terms.is_empty(), "terms")?;
        }
        if self.preset != Power {
            self.reject(self.p.is_some(), "p")?;
        }
        if matches!(self.preset, Wavemap5 | SkyrmePert | YangMills) {
            self.reject(self.l.is_some_and(|l| l != 1), "l (fixed to 1)")?;
        }
        if matches!(self.preset, Free | Linear) {
            self.reject(self.epsilon.is_some(), "epsilon")?;
        }
        let mut spec = match self.preset {
            Free => preset(Preset::Free { l: self.need(self.l, "l")? })?,
            Linear => {
                preset(Preset::Linear { l: self.need(self.l, "l")?, alpha: self.need(self.alpha, "alpha")?, lambda })?
            }
            Power => preset(Preset::Power { l: self.need(self.l, "l")?, p: self.need(self.p, "p")?, epsilon })?,
            Wavemap5 => preset(Preset::Wavemap5 { epsilon })?,
            SkyrmePert => {
                self.reject(self.alpha.is_some_and(|a| a != 6.0), "alpha (fixed to 6)")?;
                preset(Preset::SkyrmePert { lambda, epsilon })?
            }
            YangMills => preset(Preset::YangMills { epsilon })?,
            QuadraticAnomalous => preset(Preset::QuadraticAnomalous { l: self.need(self.l, "l")?, epsilon })?,
            Custom => {
                let potential = match self.alpha {
                    Some(alpha) => Some(PotentialSpec::new(lambda, alpha)),
                    None => {
                        self.reject(self.lambda.is_some(), "lambda (without alpha)")?;
                        None
                    }
                };
                ModelSpec {
                    l: self.need(self.l, "l")?,
                    potential,
                    terms: self.terms.clone(),
                    data_amplitude: self.epsilon.unwrap_or(1.0),
                }
            }
        };
        if let Some(v) = spec.potential.as_mut() {
            v.cutoff = self.cutoff.unwrap_or(DEFAULT_CUTOFF);
            v.inner_form = self.inner_form.unwrap_or_default();
        }
        spec.validate().map_err(|e| Error::Config(format!("[model] {e}")))?;
        Ok(spec)
    }
}

/// Which perturbative iterate `radtail perturb` computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterateKind {
    /// `O(lambda)` for linear models, the leading nonlinear order otherwise.
    #[default]
    First,
    /// `O(lambda^2)` for linear models, `eps^3` for quadratic nonlinearities.
    Second,
}

impl IterateKind {
    pub fn stage(self) -> Stage {
        match self {
            IterateKind::First => Stage::First,
            IterateKind::Second => Stage::Second,
        }
    }
}

/// `[perturb]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbConfig {
    #[serde(default)]
    pub iterate: IterateKind,
    #[serde(default = "default_quad_n")]
    pub quad_n: usize,
    /// By default `1e-8` in standard and `1e-20` in extended precision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Evaluation points `[t, r]`.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
}

fn default_quad_n() -> usize {
    16
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig { iterate: IterateKind::First, quad_n: default_quad_n(), tolerance: None, points: vec![] }
    }
}

impl PerturbConfig {
    pub fn options(&self, precision: Precision) -> DuhamelOptions {
        let base = match precision {
            Precision::Standard => DuhamelOptions::for_precision::<f64>(),
            Precision::Extended => DuhamelOptions::for_precision::<crate::numerics::DoubleDouble>(),
        };
        DuhamelOptions { quad_n: self.quad_n, tolerance: self.tolerance.unwrap_or(base.tolerance), ..base }
    }
}

/// `[analysis]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_gamma_tol")]
    pub gamma_tolerance: f64,
    #[serde(default = "default_coefficient_tol")]
    pub coefficient_tolerance: f64,
    #[serde(default = "default_plateau_tol")]
    pub plateau_tolerance: f64,
    #[serde(default = "default_check")]
    pub check_coefficient: bool,
    /// Fit window `[t_lo, t_hi]`; by default the last 80% of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Radius whose series is analysed; by default the first one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_obs: Option<f64>,
    /// `radtail huygens`: allowed late residual relative to the peak.
    #[serde(default = "default_huygens")]
    pub huygens_threshold: f64,
    /// `radtail huygens`: start of the "after passage" window; by default
    /// `2 (r_obs + u1) + 6`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<f64>,
}

fn default_gamma_tol() -> f64 {
    Tolerances::default().gamma
}
fn default_coefficient_tol() -> f64 {
    Tolerances::default().coefficient
}
fn default_plateau_tol() -> f64 {
    Tolerances::default().plateau
}
fn default_check() -> bool {
    true
}
fn default_huygens() -> f64 {
    1e-20
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            gamma_tolerance: default_gamma_tol(),
            coefficient_tolerance: default_coefficient_tol(),
            plateau_tolerance: default_plateau_tol(),
            check_coefficient: true,
            window: None,
            r_obs: None,
            huygens_threshold: default_huygens(),
            after: None,
        }
    }
}

impl AnalysisConfig {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            gamma: self.gamma_tolerance,
            coefficient: self.coefficient_tolerance,
            plateau: self.plateau_tolerance,
            check_coefficient: self.check_coefficient,
        }
    }
}

/// `[output]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("radtail-out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub profile: ProfileSpec,
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub perturb: PerturbConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Consistency checks beyond what the schema expresses.
    pub fn check(&self) -> Result<()> {
        let model = self.model.resolve()?;
        let profile = self.profile.build::<f64>().map_err(|e| Error::Config(format!("[profile] {e}")))?;
        let need = model.l + 3;
        if self.profile.m < need {
            return Err(Error::Config(format!(
                "[profile] m = {} is too small for l = {}; need m >= {need}",
                self.profile.m, model.l
            )));
        }
        self.evolve.validate(profile.support()).map_err(|e| Error::Config(format!("[evolve] {e}")))?;
        if self.perturb.quad_n < 8 {
            return Err(Error::Config(format!("[perturb] quad_n = {} must be at least 8", self.perturb.quad_n)));
        }
        for p in &self.perturb.points {
            if !(p[0] >= 0.0 && p[1] > 0.0) {
                return Err(Error::Config(format!("[perturb] point {p:?} needs t >= 0 and r > 0")));
            }
        }
        if let Some([a, b]) = self.analysis.window {
            if !(a > 0.0 && b > a) {
                return Err(Error::Config(format!("[analysis] window [{a}, {b}] is empty")));
            }
        }
        if let Some(r) = self.analysis.r_obs {
            if !self.evolve.observation_radii.contains(&r) {
                return Err(Error::Config(format!("[analysis] r_obs = {r} is not an observation radius")));
            }
        }
        Ok(())
    }

    /// Applies `RADTAIL_PRECISION`, the only setting the environment may
    /// override.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var("RADTAIL_PRECISION") {
            self.evolve.precision = v.parse().map_err(|e: String| Error::Config(format!("RADTAIL_PRECISION: {e}")))?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn fit_window(&self) -> (f64, f64) {
        match self.analysis.window {
            Some([a, b]) => (a, b),
            None => (0.2 * self.evolve.t_final, self.evolve.t_final),
        }
    }

    /// Start of the after-passage window at radius `r`.
    pub fn huygens_after(&self, r: f64) -> f64 {
        self.analysis.after.unwrap_or(2.0 * (r + self.profile.u1) + 6.0)
    }
}
