//! Run configuration: a single TOML document with validated sections for
//! coefficients, nonlinearity, grids, integrator, snapshot schedule, rate
//! analysis, energy weights, initial data, and output policy.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientModel;
use crate::energy::EnergyWeights;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nonlinearity::{NonlinearityModel, TildeForm};
use crate::solver::{IntegratorConfig, Scheme};

/// Target physical-grid spacing; resolves the width-one features of the
/// initial-data family with spectral headroom.
const X_SPACING_TARGET: f64 = 0.4;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub coefficients: CoefficientsSection,
    #[serde(default)]
    pub nonlinearity: NonlinearitySection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub energy_weights: EnergyWeights,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub family: CoefficientFamilyKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientFamilyKind {
    #[default]
    PowerLaw,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub tilde_form: TildeFormKind,
}

fn default_p() -> f64 {
    3.0
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        Self {
            mu: 0.0,
            p: default_p(),
            tilde_form: TildeFormKind::None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TildeFormKind {
    #[default]
    None,
    PowerLaw,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L", default = "default_l")]
    pub l: f64,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_l() -> f64 {
    20.0
}
fn default_n() -> usize {
    1024
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            l: default_l(),
            n: default_n(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_dt_initial")]
    pub dt_initial: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_error_tol")]
    pub error_tol: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default)]
    pub scheme: SchemeKind,
}

fn default_dt_initial() -> f64 {
    1e-4
}
fn default_dt_max() -> f64 {
    0.25
}
fn default_error_tol() -> f64 {
    1e-9
}
fn default_safety() -> f64 {
    0.8
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt_initial: default_dt_initial(),
            dt_max: default_dt_max(),
            error_tol: default_error_tol(),
            safety: default_safety(),
            scheme: SchemeKind::ExpMidpoint,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    #[default]
    ExpMidpoint,
    ExpEuler,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots_per_unit_s: u32,
}

fn default_s_max() -> f64 {
    6.0
}
fn default_snapshots() -> u32 {
    100
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            s_max: default_s_max(),
            snapshots_per_unit_s: default_snapshots(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_fit_window")]
    pub fit_window: (f64, f64),
    #[serde(default = "default_lambda_fraction")]
    pub lambda_fraction: f64,
}

fn default_fit_window() -> (f64, f64) {
    (2.0, 6.0)
}
fn default_lambda_fraction() -> f64 {
    0.9
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            fit_window: default_fit_window(),
            lambda_fraction: default_lambda_fraction(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_epsilon() -> f64 {
    0.05
}
fn default_seed() -> u64 {
    7
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            seed: default_seed(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Artifact selectors: "csv" (tables), "json" (summary mirror),
    /// "snapshots" (full scaled-field dump, large).
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            out_dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

impl RunConfig {
    /// The linear baseline configuration (constant coefficients, no
    /// nonlinearity).
    pub fn linear_baseline() -> Self {
        Self {
            coefficients: CoefficientsSection {
                alpha: 0.0,
                beta: 0.0,
                family: CoefficientFamilyKind::PowerLaw,
            },
            nonlinearity: NonlinearitySection::default(),
            grid: GridSection::default(),
            integrator: IntegratorSection::default(),
            schedule: ScheduleSection::default(),
            analysis: AnalysisSection::default(),
            energy_weights: EnergyWeights::default(),
            data: DataSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("config serialize error: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.coefficients;
        if !(c.alpha.is_finite() && c.beta.is_finite()) {
            return Err(Error::InvalidConfig(
                "alpha and beta must be finite".into(),
            ));
        }
        let n = &self.nonlinearity;
        if !n.mu.is_finite() {
            return Err(Error::InvalidConfig("mu must be finite".into()));
        }
        if !(n.p.is_finite() && n.p >= 3.0) {
            return Err(Error::InvalidConfig(format!(
                "nonlinearity requires p >= 3 (quadratic plus p-th order terms), got p = {}",
                n.p
            )));
        }
        let g = &self.grid;
        if !(g.l.is_finite() && g.l > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid half-width L must be positive, got {}",
                g.l
            )));
        }
        if !(g.n.is_power_of_two() && (64..=65536).contains(&g.n)) {
            return Err(Error::InvalidConfig(format!(
                "grid size n must be a power of two in [64, 65536], got {}",
                g.n
            )));
        }
        let i = &self.integrator;
        if !(i.dt_initial > 0.0 && i.dt_max > 0.0 && i.dt_initial <= i.dt_max) {
            return Err(Error::InvalidConfig(format!(
                "require 0 < dt_initial <= dt_max, got {} and {}",
                i.dt_initial, i.dt_max
            )));
        }
        if !(i.error_tol > 0.0 && i.error_tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "error_tol must lie in (0, 1), got {}",
                i.error_tol
            )));
        }
        if !(i.safety > 0.0 && i.safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "safety must lie in (0, 1], got {}",
                i.safety
            )));
        }
        let s = &self.schedule;
        if !(s.s_max > 0.0 && s.s_max <= 14.0) {
            return Err(Error::InvalidConfig(format!(
                "s_max must lie in (0, 14], got {}",
                s.s_max
            )));
        }
        if !(1..=10000).contains(&s.snapshots_per_unit_s) {
            return Err(Error::InvalidConfig(format!(
                "snapshots_per_unit_s must lie in [1, 10000], got {}",
                s.snapshots_per_unit_s
            )));
        }
        let a = &self.analysis;
        if !(a.fit_window.0 >= 0.0 && a.fit_window.0 < a.fit_window.1) {
            return Err(Error::InvalidConfig(format!(
                "fit_window must satisfy 0 <= lo < hi, got {:?}",
                a.fit_window
            )));
        }
        if a.fit_window.1 > s.s_max + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "fit_window upper end {} exceeds s_max {}",
                a.fit_window.1, s.s_max
            )));
        }
        if !(a.lambda_fraction > 0.0 && a.lambda_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda_fraction must lie in (0, 1], got {}",
                a.lambda_fraction
            )));
        }
        self.energy_weights.validate()?;
        let d = &self.data;
        if !(d.epsilon.is_finite() && d.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                d.epsilon
            )));
        }
        for f in &self.output.formats {
            if !matches!(f.as_str(), "csv" | "json" | "snapshots") {
                return Err(Error::InvalidConfig(format!(
                    "unknown output format {f:?}; expected csv, json, or snapshots"
                )));
            }
        }
        Ok(())
    }

    pub fn coefficient_model(&self) -> Result<CoefficientModel> {
        CoefficientModel::power_law(self.coefficients.alpha, self.coefficients.beta)
    }

    pub fn nonlinearity_model(&self) -> Result<NonlinearityModel> {
        let tilde = match self.nonlinearity.tilde_form {
            TildeFormKind::None => TildeForm::None,
            TildeFormKind::PowerLaw => TildeForm::PowerLaw,
        };
        NonlinearityModel::new(self.nonlinearity.mu, self.nonlinearity.p, tilde)
    }

    pub fn y_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.l, self.grid.n)
    }

    /// Fixed solver grid: wide enough to contain the scaled image of the
    /// y-grid at s_max, fine enough for the initial-data bandwidth.
    pub fn x_grid(&self) -> Result<Grid> {
        let half_width = self.grid.l * (0.5 * self.schedule.s_max).exp();
        let n = ((2.0 * half_width / X_SPACING_TARGET).ceil() as usize)
            .next_power_of_two()
            .max(64);
        Grid::new(half_width, n)
    }

    /// Uniform snapshot schedule in s, including both endpoints.
    pub fn snapshot_s_values(&self) -> Vec<f64> {
        let ds = 1.0 / self.schedule.snapshots_per_unit_s as f64;
        let count = (self.schedule.s_max * self.schedule.snapshots_per_unit_s as f64).round()
            as usize;
        (0..=count).map(|j| j as f64 * ds).collect()
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt_initial: self.integrator.dt_initial,
            dt_max: self.integrator.dt_max,
            safety: self.integrator.safety,
            error_tol: self.integrator.error_tol,
            scheme: match self.integrator.scheme {
                SchemeKind::ExpMidpoint => Scheme::ExpMidpoint,
                SchemeKind::ExpEuler => Scheme::ExpEuler,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrip_through_toml() {
        let config = RunConfig::linear_baseline();
        let text = config.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.grid.n, 1024);
        assert_eq!(back.schedule.snapshots_per_unit_s, 100);
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = RunConfig::from_toml_str(
            "[coefficients]\nalpha = 0.0\nbeta = 0.0\n",
        )
        .unwrap();
        assert_eq!(config.grid.l, 20.0);
        assert_eq!(config.nonlinearity.p, 3.0);
        assert_eq!(config.data.epsilon, 0.05);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml_str(
            "[coefficients]\nalpha = 0.0\nbeta = 0.0\nbogus = 1\n",
        );
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
        let err = RunConfig::from_toml_str(
            "[coefficients]\nalpha = 0.0\nbeta = 0.0\n[mystery]\nx = 1\n",
        );
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn small_p_is_rejected_citing_the_requirement() {
        let err = RunConfig::from_toml_str(
            "[coefficients]\nalpha = 0.0\nbeta = 0.0\n[nonlinearity]\np = 2.5\n",
        );
        match err {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("p >= 3"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn snapshot_schedule_is_uniform() {
        let mut config = RunConfig::linear_baseline();
        config.schedule.s_max = 2.0;
        config.schedule.snapshots_per_unit_s = 4;
        let s = config.snapshot_s_values();
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], 0.0);
        assert!((s[8] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn x_grid_covers_scaled_image() {
        let config = RunConfig::linear_baseline();
        let xg = config.x_grid().unwrap();
        let needed = 20.0 * 3.0_f64.exp();
        assert!(xg.half_width() >= needed - 1e-9);
        assert!(xg.spacing() <= X_SPACING_TARGET + 1e-12);
    }
}
