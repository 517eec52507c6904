//! Flat run configuration: JSON file keys, command-line overrides, and
//! conversion into the solver's typed components.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sg_lattice::{DriveSpec, ModelParams, Scheme, SolverConfig, SpongeMode, SweepSpec, SweepVariable};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// CLI failure classes, mapped onto exit codes: validation errors exit 1,
/// solver and I/O errors exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<sg_lattice::ModelError> for CliError {
    fn from(e: sg_lattice::ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<sg_lattice::SimulateError> for CliError {
    fn from(e: sg_lattice::SimulateError) -> Self {
        match e {
            sg_lattice::SimulateError::Invalid(m) => CliError::Validation(m.to_string()),
            step @ sg_lattice::SimulateError::Step { .. } => CliError::Runtime(step.to_string()),
        }
    }
}

impl From<sg_lattice::SweepError> for CliError {
    fn from(e: sg_lattice::SweepError) -> Self {
        match e {
            sg_lattice::SweepError::Invalid(m) => CliError::Validation(m.to_string()),
            run @ sg_lattice::SweepError::Run { .. } => CliError::Runtime(run.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    S1,
    S2,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::S1 => Scheme::S1,
            SchemeArg::S2 => Scheme::S2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpongeArg {
    Off,
    Verbatim,
    Ramp,
}

impl From<SpongeArg> for SpongeMode {
    fn from(s: SpongeArg) -> Self {
        match s {
            SpongeArg::Off => SpongeMode::Off,
            SpongeArg::Verbatim => SpongeMode::Verbatim,
            SpongeArg::Ramp => SpongeMode::Ramp,
        }
    }
}

/// Command-line overrides; any flag present replaces the config-file value.
#[derive(Debug, Clone, clap::Args)]
pub struct Overrides {
    /// JSON configuration file (flat keys; missing keys take defaults)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Time discretization: s1 or s2
    #[arg(long)]
    pub scheme: Option<SchemeArg>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of time steps
    #[arg(long)]
    pub steps: Option<usize>,
    /// Driving amplitude A
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Driving frequency Omega
    #[arg(long)]
    pub omega: Option<f64>,
    /// Amplitude sweep lower bound
    #[arg(long)]
    pub amin: Option<f64>,
    /// Amplitude sweep upper bound
    #[arg(long)]
    pub amax: Option<f64>,
    /// Amplitude sweep step
    #[arg(long)]
    pub da: Option<f64>,
    /// Frequency sweep lower bound
    #[arg(long)]
    pub fmin: Option<f64>,
    /// Frequency sweep upper bound
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Frequency sweep step
    #[arg(long)]
    pub df: Option<f64>,
    /// Points in the stability xi-grid
    #[arg(long = "xi-points")]
    pub xi_points: Option<usize>,
    /// Steps between energy/snapshot records
    #[arg(long)]
    pub stride: Option<usize>,
}

/// Every run parameter under its config-file key. Unknown keys are rejected;
/// omitted keys take the defaults below. `r = null` (or omitted) means an
/// open output tap (1/R = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    // model
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m2: f64,
    pub j: f64,
    pub r: Option<f64>,
    pub n: usize,
    pub n0: usize,
    pub sponge_mode: SpongeArg,
    // drive
    pub amplitude: f64,
    pub omega: f64,
    pub ramp_steps: usize,
    pub shutoff_step: Option<usize>,
    // solver
    pub dt: f64,
    pub steps: usize,
    pub newton_tol: f64,
    pub newton_tol_audit: f64,
    pub newton_max_iter: usize,
    pub scheme: SchemeArg,
    // sweep grids
    pub amin: f64,
    pub amax: f64,
    pub da: f64,
    pub fmin: f64,
    pub fmax: f64,
    pub df: f64,
    /// Simulated time per sweep grid point; defaults to steps * dt.
    pub sim_time: Option<f64>,
    pub jump_factor: f64,
    // stability
    pub xi_points: usize,
    // io
    pub out: PathBuf,
    /// Steps between records; defaults to 1 for energy-audit, 20 otherwise.
    pub stride: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            c: 5.0,
            beta: 0.0,
            gamma: 0.0,
            m2: 0.0,
            j: 0.0,
            r: None,
            n: 100,
            n0: 50,
            sponge_mode: SpongeArg::Ramp,
            amplitude: 1.0,
            omega: 0.8,
            ramp_steps: 0,
            shutoff_step: None,
            dt: 0.05,
            steps: 12_000,
            newton_tol: 1e-5,
            newton_tol_audit: 1e-12,
            newton_max_iter: 50,
            scheme: SchemeArg::S1,
            amin: 2.0,
            amax: 5.5,
            da: 0.05,
            fmin: 0.3,
            fmax: 0.9,
            df: 0.1,
            sim_time: None,
            jump_factor: 5.0,
            xi_points: 1025,
            out: PathBuf::from("out"),
            stride: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }

    /// Load the file named by `--config` (if any) and fold the flag values
    /// over it.
    pub fn resolve(overrides: &Overrides) -> Result<Self, CliError> {
        let mut config = match &overrides.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        config.apply(overrides);
        Ok(config)
    }

    fn apply(&mut self, ov: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = ov.$field { self.$field = v; })*
            };
        }
        set!(scheme, dt, steps, amplitude, omega, amin, amax, da, fmin, fmax, df, xi_points);
        if let Some(v) = &ov.out {
            self.out = v.clone();
        }
        if let Some(v) = ov.stride {
            self.stride = Some(v);
        }
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        let params = ModelParams {
            c: self.c,
            beta: self.beta,
            gamma: self.gamma,
            m2: self.m2,
            j: self.j,
            r: self.r.unwrap_or(f64::INFINITY),
            n: self.n,
            n0: self.n0,
            sponge: self.sponge_mode.into(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn drive(&self) -> Result<DriveSpec, CliError> {
        let drive = DriveSpec {
            amplitude: self.amplitude,
            omega: self.omega,
            ramp_steps: self.ramp_steps,
            shutoff_step: self.shutoff_step,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let config = SolverConfig {
            dt: self.dt,
            steps: self.steps,
            newton_tol: self.newton_tol,
            newton_tol_audit: self.newton_tol_audit,
            newton_max_iter: self.newton_max_iter,
            scheme: self.scheme.into(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn sweep_spec(&self, variable: SweepVariable) -> Result<SweepSpec, CliError> {
        let (lo, hi, step) = match variable {
            SweepVariable::Amplitude => (self.amin, self.amax, self.da),
            SweepVariable::Frequency => (self.fmin, self.fmax, self.df),
        };
        let spec = SweepSpec {
            variable,
            lo,
            hi,
            step,
            drive: self.drive()?,
            sim_time: self.sim_time.unwrap_or(self.steps as f64 * self.dt),
            params: self.model()?,
            solver: self.solver()?,
            jump_factor: self.jump_factor,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Record stride: explicit value, else 1 for audits and 20 otherwise.
    pub fn stride_for(&self, audit: bool) -> usize {
        self.stride.unwrap_or(if audit { 1 } else { 20 })
    }

    /// The frequency grid of a `sweep-frequency` run.
    pub fn frequency_grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.fmin < self.fmax && self.df > 0.0) {
            return Err(CliError::Validation(format!(
                "bad frequency grid [{}, {}] step {}",
                self.fmin, self.fmax, self.df
            )));
        }
        let count = ((self.fmax - self.fmin) / self.df + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.fmin + i as f64 * self.df).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let config = RunConfig {
            r: Some(12.5),
            shutoff_step: Some(77),
            scheme: SchemeArg::S2,
            ..RunConfig::default()
        };
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"c": 5.0, "coupling": 2.0}"#).unwrap_err();
        assert!(err.to_string().contains("coupling"));
    }

    #[test]
    fn missing_keys_take_defaults() {
        let config: RunConfig = serde_json::from_str(r#"{"n": 16, "n0": 8}"#).unwrap();
        assert_eq!(config.n, 16);
        assert_eq!(config.c, 5.0);
        assert!(config.r.is_none());
        assert!(config.model().unwrap().r.is_infinite());
    }

    #[test]
    fn flags_override_config_values() {
        let mut config = RunConfig::default();
        let ov = Overrides {
            config: None,
            scheme: Some(SchemeArg::S2),
            out: Some(PathBuf::from("elsewhere")),
            dt: Some(0.01),
            steps: Some(5),
            amplitude: None,
            omega: Some(0.5),
            amin: None,
            amax: None,
            da: None,
            fmin: None,
            fmax: None,
            df: None,
            xi_points: Some(65),
            stride: Some(2),
        };
        config.apply(&ov);
        assert_eq!(config.scheme, SchemeArg::S2);
        assert_eq!(config.dt, 0.01);
        assert_eq!(config.steps, 5);
        assert_eq!(config.omega, 0.5);
        assert_eq!(config.amplitude, 1.0);
        assert_eq!(config.out, PathBuf::from("elsewhere"));
        assert_eq!(config.xi_points, 65);
        assert_eq!(config.stride, Some(2));
    }

    #[test]
    fn invalid_model_maps_to_validation_error() {
        let config: RunConfig = serde_json::from_str(r#"{"c": -1.0}"#).unwrap();
        match config.model() {
            Err(CliError::Validation(_)) => {}
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
