//! Supratransmission threshold detection.
//!
//! The procedure: drive the chain at a fixed in-gap frequency, run one
//! simulation per amplitude on a grid, and watch the final total energy.
//! Below the critical amplitude the response is an evanescent boundary
//! profile with modest energy; above it the boundary injects traveling
//! nonlinear modes and the energy jumps by orders of magnitude. The jump is
//! detected as the first grid value whose energy exceeds `jump_factor` times
//! the running maximum of all earlier energies (floored at 1e-12).
//!
//! Grid points are independent simulations and run in parallel; results are
//! merged by grid index, so the outcome does not depend on scheduling.

use crate::integrator::{simulate, Recorders, Scheme, SimulateError, SolverConfig};
use crate::model::{DriveSpec, ModelError, ModelParams};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(#[from] ModelError),
    #[error("simulation at grid value {value} failed: {source}")]
    Run { value: f64, source: SimulateError },
}

/// Which drive parameter the grid walks over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Amplitude,
    Frequency,
}

/// One sweep: a grid over the chosen drive parameter, the fixed remainder of
/// the drive, and the simulation setup shared by every grid point.
///
/// `solver.steps` is ignored; the horizon is `sim_time / solver.dt` rounded
/// to the nearest step.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    /// Drive parameters not being swept (the swept one is overwritten).
    pub drive: DriveSpec,
    /// Total simulated time per grid point.
    pub sim_time: f64,
    pub params: ModelParams,
    pub solver: SolverConfig,
    /// Energy jump ratio that counts as the threshold (> 1, default 5).
    pub jump_factor: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.params.validate()?;
        self.solver.validate()?;
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(ModelError::BadSweepGrid(format!(
                "need lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(ModelError::BadSweepGrid(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        let factor_ok = self.jump_factor.is_finite() && self.jump_factor > 1.0;
        if !factor_ok {
            return Err(ModelError::BadSweepGrid(format!(
                "jump factor must exceed 1, got {}",
                self.jump_factor
            )));
        }
        if !(self.sim_time.is_finite() && self.sim_time > 0.0) {
            return Err(ModelError::BadSweepGrid(format!(
                "sim_time must be positive, got {}",
                self.sim_time
            )));
        }
        if self.variable == SweepVariable::Frequency {
            let edge = self.params.band_gap_edge();
            for omega in self.grid() {
                if !(omega > 0.0 && omega < edge) {
                    return Err(ModelError::FrequencyOutsideGap(omega, edge));
                }
            }
        }
        Ok(())
    }

    /// The swept values: lo, lo + step, ... up to hi (inclusive within one
    /// part in 1e9 of a step).
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + i as f64 * self.step).collect()
    }

    pub fn steps(&self) -> usize {
        (self.sim_time / self.solver.dt).round() as usize
    }

    fn configured(&self, value: f64) -> (DriveSpec, SolverConfig) {
        let mut drive = self.drive.clone();
        match self.variable {
            SweepVariable::Amplitude => drive.amplitude = value,
            SweepVariable::Frequency => drive.omega = value,
        }
        let mut solver = self.solver.clone();
        solver.steps = self.steps();
        (drive, solver)
    }
}

/// Sweep outcome: final energies per grid value and the detected jump, if
/// any.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub grid: Vec<f64>,
    pub energies: Vec<f64>,
    /// Smallest grid value at which the energy jump fires; always strictly
    /// after the first grid point.
    pub threshold: Option<f64>,
    pub threshold_index: Option<usize>,
    /// Energy ratio across the detected edge (>= jump_factor when present).
    pub jump_ratio: Option<f64>,
    /// Grid indices below the threshold where the energy dropped more than
    /// 5% under the running maximum; informational only.
    pub monotonicity_violations: Vec<usize>,
}

/// The jump detector alone: first index i >= 1 with
/// `energies[i] >= jump_factor * max(1e-12, energies[..i])`, plus the ratio.
pub fn detect_threshold(grid: &[f64], energies: &[f64], jump_factor: f64) -> Option<(usize, f64)> {
    debug_assert_eq!(grid.len(), energies.len());
    let mut running_max = 1e-12f64;
    for (i, &e) in energies.iter().enumerate() {
        if i > 0 && e >= jump_factor * running_max {
            return Some((i, e / running_max));
        }
        running_max = running_max.max(e);
    }
    None
}

// Indices where the energy dipped more than 5% under its running maximum;
// sub-threshold curves are expected to grow with the amplitude, so dips get
// flagged (informationally) in the sweep result.
fn flag_dips(energies: &[f64]) -> Vec<usize> {
    let mut violations = Vec::new();
    let mut running_max = f64::NEG_INFINITY;
    for (i, &e) in energies.iter().enumerate() {
        if e < 0.95 * running_max {
            violations.push(i);
        }
        running_max = running_max.max(e);
    }
    violations
}

fn assemble(spec: &SweepSpec, grid: Vec<f64>, energies: Vec<f64>) -> ThresholdResult {
    let detected = detect_threshold(&grid, &energies, spec.jump_factor);
    let below_end = detected.map_or(energies.len(), |(i, _)| i);
    ThresholdResult {
        threshold: detected.map(|(i, _)| grid[i]),
        threshold_index: detected.map(|(i, _)| i),
        jump_ratio: detected.map(|(_, r)| r),
        monotonicity_violations: flag_dips(&energies[..below_end]),
        grid,
        energies,
    }
}

fn run_point(spec: &SweepSpec, value: f64) -> Result<f64, SweepError> {
    let (drive, solver) = spec.configured(value);
    simulate(&spec.params, &drive, &solver, &Recorders::none())
        .map(|r| r.final_energy)
        .map_err(|source| SweepError::Run { value, source })
}

/// Run the sweep with one parallel simulation per grid value.
pub fn sweep(spec: &SweepSpec) -> Result<ThresholdResult, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    let energies = grid
        .par_iter()
        .map(|&v| run_point(spec, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(spec, grid, energies))
}

/// Sequential variant; produces bit-identical results to [`sweep`].
pub fn sweep_sequential(spec: &SweepSpec) -> Result<ThresholdResult, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    let energies = grid
        .iter()
        .map(|&v| run_point(spec, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(spec, grid, energies))
}

/// A labeled parameter set for threshold-diagram families.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVariant {
    pub label: String,
    pub params: ModelParams,
}

/// Per-frequency thresholds for one parameter variant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramLine {
    pub label: String,
    /// (driving frequency, detected threshold) pairs; `None` when no jump
    /// fired inside the amplitude grid.
    pub points: Vec<(f64, Option<f64>)>,
}

/// Threshold diagram: for every variant and every frequency, run the
/// amplitude sweep described by `base` and record the detected threshold.
pub fn frequency_diagram(
    base: &SweepSpec,
    omegas: &[f64],
    variants: &[ParameterVariant],
) -> Result<Vec<DiagramLine>, SweepError> {
    base.validate()?;
    for variant in variants {
        variant.params.validate()?;
        let edge = variant.params.band_gap_edge();
        for &omega in omegas {
            if !(omega > 0.0 && omega < edge) {
                return Err(ModelError::FrequencyOutsideGap(omega, edge).into());
            }
        }
    }

    variants
        .iter()
        .map(|variant| {
            let points = omegas
                .iter()
                .map(|&omega| {
                    let mut spec = base.clone();
                    spec.variable = SweepVariable::Amplitude;
                    spec.params = variant.params.clone();
                    spec.drive.omega = omega;
                    Ok((omega, sweep(&spec)?.threshold))
                })
                .collect::<Result<Vec<_>, SweepError>>()?;
            Ok(DiagramLine {
                label: variant.label.clone(),
                points,
            })
        })
        .collect()
}

/// Paired S1/S2 sweep comparison on an identical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCrossCheck {
    pub grid: Vec<f64>,
    pub e_s1: Vec<f64>,
    pub e_s2: Vec<f64>,
    pub threshold_index_s1: Option<usize>,
    pub threshold_index_s2: Option<usize>,
    /// max |E_S1 - E_S2| over grid points strictly below the earliest
    /// detected threshold (the whole grid when neither scheme fired).
    pub max_abs_diff_below: f64,
    /// max |E_S1 - E_S2| over the remaining grid points.
    pub max_abs_diff_above: f64,
}

/// Run the sweep under both schemes and compare the energy curves.
pub fn scheme_cross_check(spec: &SweepSpec) -> Result<SchemeCrossCheck, SweepError> {
    let mut s1 = spec.clone();
    s1.solver.scheme = Scheme::S1;
    let mut s2 = spec.clone();
    s2.solver.scheme = Scheme::S2;
    let r1 = sweep(&s1)?;
    let r2 = sweep(&s2)?;

    let split = match (r1.threshold_index, r2.threshold_index) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => r1.grid.len(),
    };
    let diff = |range: std::ops::Range<usize>| {
        range
            .map(|i| (r1.energies[i] - r2.energies[i]).abs())
            .fold(0.0f64, f64::max)
    };
    Ok(SchemeCrossCheck {
        max_abs_diff_below: diff(0..split),
        max_abs_diff_above: diff(split..r1.grid.len()),
        grid: r1.grid,
        e_s1: r1.energies,
        e_s2: r2.energies,
        threshold_index_s1: r1.threshold_index,
        threshold_index_s2: r2.threshold_index,
    })
}
