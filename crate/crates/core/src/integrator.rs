//! Implicit time stepping for the driven lattice.
//!
//! Two three-level schemes advance the chain. Writing `lap u = u_{n+1} - 2
//! u_n + u_{n-1}` and centering at step k, site n of scheme S1 satisfies
//!
//! ```text
//! (u^{k+1} - 2u^k + u^{k-1})/dt^2
//!   - (c^2/2) (lap u^{k+1} + lap u^{k-1})
//!   - (beta/2dt) (lap u^{k+1} - lap u^{k-1})
//!   + (gamma_n/2dt) (u^{k+1} - u^{k-1})
//!   + (m2/2) (u^{k+1} + u^{k-1})
//!   + [V(u^{k+1}) - V(u^{k-1})]/(u^{k+1} - u^{k-1})  =  J
//! ```
//!
//! while S2 replaces the first coupling average by the three-level form
//! `(c^2/4)(lap u^{k+1} + 2 lap u^k + lap u^{k-1})`. Both are implicit in
//! `u^{k+1}` only through a tridiagonal coupling plus the scalar nonlinear
//! ratio, so each step is a Newton iteration with a Crout tridiagonal solve.
//!
//! The left ghost site absorbs the drive. For S1 the discrete constraint is
//! the two-level average of `c^2 (u_0 - u_1) + beta (u_0' - u_1') = phi`,
//!
//! ```text
//! c^2 (g^{k+1} + g^{k-1}) + (beta/dt)(g^{k+1} - g^{k-1}) = 2 phi_k,
//! ```
//!
//! with `g = u_0 - u_1`. S2 uses the scheme-consistent three-level average
//!
//! ```text
//! (c^2/2)(g^{k+1} + 2 g^k + g^{k-1}) + (beta/dt)(g^{k+1} - g^{k-1}) = 2 phi_k,
//! ```
//!
//! which pairs with the S2 energy so that an undriven, undamped chain
//! conserves its discrete energy exactly (see the energy module). The right
//! ghost mirrors site N at every level.

use crate::energy;
use crate::model::{DriveSpec, ModelError, ModelParams};
use crate::tridiag::{crout_solve_with, CroutWorkspace, ZeroPivot};
use thiserror::Error;

/// Time discretization selector.
///
/// `S1` averages the coupling over the two outer levels (k-1, k+1); `S2`
/// averages over all three levels with weights 1/4, 1/2, 1/4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    S1,
    S2,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::S1 => write!(f, "s1"),
            Scheme::S2 => write!(f, "s2"),
        }
    }
}

/// Step size, horizon and Newton controls for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    /// Number of time steps to take.
    pub steps: usize,
    /// Newton stop: max-norm of the update between successive iterates.
    pub newton_tol: f64,
    /// Tightened tolerance used by energy-audit runs.
    pub newton_tol_audit: f64,
    pub newton_max_iter: usize,
    pub scheme: Scheme,
}

impl SolverConfig {
    pub fn new(dt: f64, steps: usize, scheme: Scheme) -> Self {
        Self {
            dt,
            steps,
            newton_tol: 1e-5,
            newton_tol_audit: 1e-12,
            newton_max_iter: 50,
            scheme,
        }
    }

    /// Same run with the Newton tolerance tightened for energy audits.
    pub fn for_audit(mut self) -> Self {
        self.newton_tol = self.newton_tol_audit;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ModelError::BadSolverConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) {
            return Err(ModelError::BadSolverConfig(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter < 1 {
            return Err(ModelError::BadSolverConfig(
                "newton_max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-step Newton report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub newton_iters: usize,
    /// Max-norm of the last Newton update; below `newton_tol` on success.
    pub final_update_norm: f64,
    /// Smallest (diagonal - sum of off-diagonals) over Jacobian rows seen
    /// during the step; strictly positive in the supported regime.
    pub jacobian_min_dominance: f64,
}

/// Three time levels of the lattice, sites 0..=N+1 with ghosts at both ends.
///
/// `steps_taken` counts completed steps; a fresh state holds the zero initial
/// data `u^0 = u^1 = 0` demanded by the schemes. After a step the pair
/// (`u_prev`, `u_curr`) is the (k, k+1) level pair the energy formulas index.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    u_prev: Vec<f64>,
    u_curr: Vec<f64>,
    u_next: Vec<f64>,
    k: usize,
    t: f64,
    stepped: bool,
}

impl LatticeState {
    /// Zero initial data on an N-junction chain.
    pub fn new(n: usize) -> Self {
        Self {
            u_prev: vec![0.0; n + 2],
            u_curr: vec![0.0; n + 2],
            u_next: vec![0.0; n + 2],
            k: 0,
            t: 0.0,
            stepped: false,
        }
    }

    /// Start from explicit levels (ghosts included, length N+2). The right
    /// ghost must mirror site N on both levels.
    pub fn from_levels(u_prev: Vec<f64>, u_curr: Vec<f64>) -> Result<Self, SolverError> {
        if u_prev.len() != u_curr.len() || u_prev.len() < 3 {
            return Err(SolverError::InvalidState(format!(
                "levels must share a length of at least 3, got {} and {}",
                u_prev.len(),
                u_curr.len()
            )));
        }
        let last = u_prev.len() - 1;
        for level in [&u_prev, &u_curr] {
            if level[last] != level[last - 1] {
                return Err(SolverError::InvalidState(
                    "right ghost must mirror site N on every level".into(),
                ));
            }
        }
        Ok(Self {
            u_next: vec![0.0; u_prev.len()],
            u_prev,
            u_curr,
            k: 0,
            t: 0.0,
            stepped: false,
        })
    }

    pub fn site_count(&self) -> usize {
        self.u_curr.len() - 2
    }

    /// Completed steps.
    pub fn steps_taken(&self) -> usize {
        self.k
    }

    /// Time k dt of the last step center.
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn u_prev(&self) -> &[f64] {
        &self.u_prev
    }

    pub fn u_curr(&self) -> &[f64] {
        &self.u_curr
    }

    /// The three levels around the last completed step center, oldest first.
    /// `None` until a step has been taken.
    pub fn last_step_levels(&self) -> Option<(&[f64], &[f64], &[f64])> {
        // After rotation the scratch buffer still holds the k-1 level.
        self.stepped
            .then_some((self.u_next.as_slice(), self.u_prev.as_slice(), self.u_curr.as_slice()))
    }

    fn rotate(&mut self, dt: f64) {
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        std::mem::swap(&mut self.u_curr, &mut self.u_next);
        self.k += 1;
        self.t = self.k as f64 * dt;
        self.stepped = true;
    }
}

/// Step-level failures.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("boundary constraint degenerate (c = beta = 0) under nonzero drive phi = {phi}")]
    DegenerateBoundary { phi: f64 },
    #[error(transparent)]
    Pivot(#[from] ZeroPivot),
    #[error("Newton did not reach tol {tol:.1e} in {iters} iterations (update norm {norm:.3e})")]
    NewtonDiverged { iters: usize, norm: f64, tol: f64 },
    #[error("Jacobian lost strict diagonal dominance (margin {margin:.3e})")]
    LostDominance { margin: f64 },
    #[error("invalid lattice state: {0}")]
    InvalidState(String),
}

/// Simulation-level failures: invalid components, or a step failure tagged
/// with the step index at which it occurred.
#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid run configuration: {0}")]
    Invalid(#[from] ModelError),
    #[error("step {step} failed: {source}")]
    Step { step: usize, source: SolverError },
}

// Off-diagonal Jacobian weight: the u^{k+1} Laplacian coefficient.
fn coupling_weight(scheme: Scheme, params: &ModelParams, dt: f64) -> f64 {
    let c2 = params.c * params.c;
    let beta_w = params.beta / (2.0 * dt);
    match scheme {
        Scheme::S1 => 0.5 * c2 + beta_w,
        Scheme::S2 => 0.25 * c2 + beta_w,
    }
}

#[allow(clippy::too_many_arguments)]
fn residual_into(
    scheme: Scheme,
    params: &ModelParams,
    gammas: &[f64],
    dt: f64,
    u_prev: &[f64],
    u_curr: &[f64],
    u_next: &[f64],
    out: &mut [f64],
) {
    let n = params.n;
    let c2 = params.c * params.c;
    let dt2 = dt * dt;
    let beta_w = params.beta / (2.0 * dt);
    let lap = |u: &[f64], site: usize| u[site + 1] - 2.0 * u[site] + u[site - 1];

    for site in 1..=n {
        let lap_next = lap(u_next, site);
        let lap_prev = lap(u_prev, site);
        let coupling = match scheme {
            Scheme::S1 => 0.5 * c2 * (lap_next + lap_prev),
            Scheme::S2 => 0.25 * c2 * (lap_next + 2.0 * lap(u_curr, site) + lap_prev),
        };
        let d2t = u_next[site] - 2.0 * u_curr[site] + u_prev[site];
        let dtu = u_next[site] - u_prev[site];
        out[site - 1] = d2t / dt2 - coupling - beta_w * (lap_next - lap_prev)
            + gammas[site - 1] * dtu / (2.0 * dt)
            + 0.5 * params.m2 * (u_next[site] + u_prev[site])
            + crate::model::nonlinear_ratio(u_next[site], u_prev[site])
            - params.j;
    }
}

/// Residual of the chosen scheme at every interior site, given three levels
/// with consistent ghosts. `out` has length N.
#[allow(clippy::too_many_arguments)]
pub fn residual(
    scheme: Scheme,
    params: &ModelParams,
    dt: f64,
    u_prev: &[f64],
    u_curr: &[f64],
    u_next: &[f64],
    out: &mut [f64],
) {
    let gammas = params.damping_profile();
    residual_into(scheme, params, &gammas, dt, u_prev, u_curr, u_next, out);
}

/// Next-level ghost gap `g^{k+1} = u_0^{k+1} - u_1^{k+1}` from the discrete
/// boundary constraint. Errors when c = beta = 0, where the constraint
/// cannot be solved for the ghost.
pub fn ghost_gap_next(
    scheme: Scheme,
    params: &ModelParams,
    dt: f64,
    gap_prev: f64,
    gap_curr: f64,
    phi: f64,
) -> Result<f64, SolverError> {
    let c2 = params.c * params.c;
    let beta_dt = params.beta / dt;
    match scheme {
        Scheme::S1 => {
            let a = c2 + beta_dt;
            if a == 0.0 {
                return Err(SolverError::DegenerateBoundary { phi });
            }
            Ok((2.0 * phi - (c2 - beta_dt) * gap_prev) / a)
        }
        Scheme::S2 => {
            let a = 0.5 * c2 + beta_dt;
            if a == 0.0 {
                return Err(SolverError::DegenerateBoundary { phi });
            }
            Ok((2.0 * phi - c2 * gap_curr - (0.5 * c2 - beta_dt) * gap_prev) / a)
        }
    }
}

/// Write the next-level ghosts: the driven left ghost from the boundary
/// constraint and the mirrored right ghost `u_{N+1} = u_N`.
pub fn ghost_update(
    scheme: Scheme,
    params: &ModelParams,
    dt: f64,
    u_prev: &[f64],
    u_curr: &[f64],
    u_next: &mut [f64],
    phi: f64,
) -> Result<(), SolverError> {
    let n = params.n;
    let gap = ghost_gap_next(
        scheme,
        params,
        dt,
        u_prev[0] - u_prev[1],
        u_curr[0] - u_curr[1],
        phi,
    )?;
    u_next[0] = u_next[1] + gap;
    u_next[n + 1] = u_next[n];
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn jacobian_into(
    scheme: Scheme,
    params: &ModelParams,
    gammas: &[f64],
    dt: f64,
    u_prev: &[f64],
    u_next: &[f64],
    sub: &mut [f64],
    diag: &mut [f64],
    sup: &mut [f64],
) {
    let n = params.n;
    let w = coupling_weight(scheme, params, dt);
    let base = 1.0 / (dt * dt) + 2.0 * w + 0.5 * params.m2;

    for site in 1..=n {
        let mut d = base
            + gammas[site - 1] / (2.0 * dt)
            + crate::model::nonlinear_ratio_dplus(u_next[site], u_prev[site]);
        // Ghost elimination: u_0^{k+1} and u_{N+1}^{k+1} both move one-for-one
        // with their interior neighbor, folding -w into the boundary rows.
        if site == 1 {
            d -= w;
        }
        if site == n {
            d -= w;
        }
        diag[site - 1] = d;
        if site > 1 {
            sub[site - 2] = -w;
        }
        if site < n {
            sup[site - 1] = -w;
        }
    }
}

/// Jacobian of the reduced residual (ghosts eliminated) with respect to the
/// next-level interior values, as tridiagonal bands.
#[allow(clippy::too_many_arguments)]
pub fn jacobian_tridiagonal(
    scheme: Scheme,
    params: &ModelParams,
    dt: f64,
    u_prev: &[f64],
    u_next: &[f64],
    sub: &mut [f64],
    diag: &mut [f64],
    sup: &mut [f64],
) {
    let gammas = params.damping_profile();
    jacobian_into(scheme, params, &gammas, dt, u_prev, u_next, sub, diag, sup);
}

fn min_dominance(sub: &[f64], diag: &[f64], sup: &[f64]) -> f64 {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let off = (if i > 0 { sub[i - 1].abs() } else { 0.0 })
                + (if i + 1 < n { sup[i].abs() } else { 0.0 });
            diag[i] - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Scratch buffers plus the cached damping profile for one simulation.
pub(crate) struct StepContext {
    gammas: Vec<f64>,
    res: Vec<f64>,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    delta: Vec<f64>,
    crout: CroutWorkspace,
}

impl StepContext {
    pub(crate) fn new(params: &ModelParams) -> Self {
        let n = params.n;
        Self {
            gammas: params.damping_profile(),
            res: vec![0.0; n],
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
            delta: vec![0.0; n],
            crout: CroutWorkspace::new(n),
        }
    }
}

fn step_inner(
    state: &mut LatticeState,
    params: &ModelParams,
    config: &SolverConfig,
    phi: f64,
    ctx: &mut StepContext,
) -> Result<StepDiagnostics, SolverError> {
    let n = params.n;
    if state.site_count() != n {
        return Err(SolverError::InvalidState(format!(
            "state has {} sites but params.n = {}",
            state.site_count(),
            n
        )));
    }
    let dt = config.dt;
    let scheme = config.scheme;

    // With c = beta = 0 the boundary constraint reads 0 = 2 phi: vacuous for
    // an undriven chain (ghosts are inert because the coupling vanishes),
    // unsolvable otherwise.
    let degenerate = params.c == 0.0 && params.beta == 0.0;
    if degenerate && phi != 0.0 {
        return Err(SolverError::DegenerateBoundary { phi });
    }

    // Second-order predictor as the Newton starting point.
    for site in 0..n + 2 {
        state.u_next[site] = 2.0 * state.u_curr[site] - state.u_prev[site];
    }

    let mut min_margin = f64::INFINITY;
    let mut norm = f64::INFINITY;
    for iter in 1..=config.newton_max_iter {
        if degenerate {
            state.u_next[0] = state.u_next[1];
            state.u_next[n + 1] = state.u_next[n];
        } else {
            ghost_update(
                scheme,
                params,
                dt,
                &state.u_prev,
                &state.u_curr,
                &mut state.u_next,
                phi,
            )?;
        }
        residual_into(
            scheme,
            params,
            &ctx.gammas,
            dt,
            &state.u_prev,
            &state.u_curr,
            &state.u_next,
            &mut ctx.res,
        );
        jacobian_into(
            scheme,
            params,
            &ctx.gammas,
            dt,
            &state.u_prev,
            &state.u_next,
            &mut ctx.sub,
            &mut ctx.diag,
            &mut ctx.sup,
        );
        let margin = min_dominance(&ctx.sub, &ctx.diag, &ctx.sup);
        min_margin = min_margin.min(margin);
        if margin <= 0.0 {
            return Err(SolverError::LostDominance { margin });
        }
        crout_solve_with(
            &mut ctx.crout,
            &ctx.sub,
            &ctx.diag,
            &ctx.sup,
            &ctx.res,
            &mut ctx.delta,
        )?;

        norm = 0.0f64;
        for site in 1..=n {
            state.u_next[site] -= ctx.delta[site - 1];
            norm = norm.max(ctx.delta[site - 1].abs());
        }

        if norm < config.newton_tol {
            // Ghosts must match the accepted interior values before the level
            // is stored.
            if degenerate {
                state.u_next[0] = state.u_next[1];
                state.u_next[n + 1] = state.u_next[n];
            } else {
                ghost_update(
                    scheme,
                    params,
                    dt,
                    &state.u_prev,
                    &state.u_curr,
                    &mut state.u_next,
                    phi,
                )?;
            }
            state.rotate(dt);
            return Ok(StepDiagnostics {
                newton_iters: iter,
                final_update_norm: norm,
                jacobian_min_dominance: min_margin,
            });
        }
    }
    Err(SolverError::NewtonDiverged {
        iters: config.newton_max_iter,
        norm,
        tol: config.newton_tol,
    })
}

/// Advance the state by one time level. The step is centered at index
/// `steps_taken() + 1` and `phi` must be the drive value at that center.
pub fn step(
    state: &mut LatticeState,
    params: &ModelParams,
    config: &SolverConfig,
    phi: f64,
) -> Result<StepDiagnostics, SolverError> {
    let mut ctx = StepContext::new(params);
    step_inner(state, params, config, phi, &mut ctx)
}

/// Which series a simulation records, as strides in steps (0 disables).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recorders {
    pub energy_stride: usize,
    pub snapshot_stride: usize,
}

impl Recorders {
    pub fn none() -> Self {
        Self {
            energy_stride: 0,
            snapshot_stride: 0,
        }
    }

    pub fn energy_every(stride: usize) -> Self {
        Self {
            energy_stride: stride,
            snapshot_stride: 0,
        }
    }

    /// Every-step energy ledger, as audits require.
    pub fn audit() -> Self {
        Self::energy_every(1)
    }
}

/// Lattice configuration `u_curr` (ghosts included) after a given step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub u: Vec<f64>,
}

/// Outcome of a full run: final state, recorded series, and summary numbers.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub state: LatticeState,
    pub energy: Vec<energy::EnergyRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Total energy of the final (k, k+1) level pair.
    pub final_energy: f64,
    pub max_newton_iters: usize,
}

/// Run `config.steps` steps from the zero initial data, evaluating the drive
/// at each step center and recording the requested series. Identical inputs
/// produce bit-identical outputs.
pub fn simulate(
    params: &ModelParams,
    drive: &DriveSpec,
    config: &SolverConfig,
    recorders: &Recorders,
) -> Result<SimulationResult, SimulateError> {
    let mut state = LatticeState::new(params.n);
    simulate_from(&mut state, params, drive, config, recorders)
}

/// As [`simulate`], but continuing from an explicit state. Used by audits
/// that study prepared (kicked) configurations.
pub fn simulate_from(
    state: &mut LatticeState,
    params: &ModelParams,
    drive: &DriveSpec,
    config: &SolverConfig,
    recorders: &Recorders,
) -> Result<SimulationResult, SimulateError> {
    params.validate()?;
    drive.validate()?;
    config.validate()?;
    if params.c == 0.0 && params.beta == 0.0 && drive.amplitude > 0.0 {
        return Err(ModelError::DegenerateDrivenBoundary.into());
    }

    let mut ctx = StepContext::new(params);
    let mut energy_records = Vec::new();
    let mut snapshots = Vec::new();
    let mut max_newton_iters = 0;

    for s in 1..=config.steps {
        let phi = drive.phi(state.steps_taken() + 1, config.dt);
        let diag = step_inner(state, params, config, phi, &mut ctx)
            .map_err(|source| SimulateError::Step { step: s, source })?;
        max_newton_iters = max_newton_iters.max(diag.newton_iters);

        if recorders.energy_stride > 0 && s % recorders.energy_stride == 0 {
            let (um1, u0, up1) = state.last_step_levels().expect("just stepped");
            energy_records.push(energy::ledger_record(
                config.scheme,
                params,
                config.dt,
                state.steps_taken(),
                um1,
                u0,
                up1,
            ));
        }
        if recorders.snapshot_stride > 0 && s % recorders.snapshot_stride == 0 {
            snapshots.push(Snapshot {
                step: state.steps_taken(),
                u: state.u_curr().to_vec(),
            });
        }
    }

    let final_energy =
        energy::total_energy(config.scheme, params, config.dt, state.u_prev(), state.u_curr());
    Ok(SimulationResult {
        state: state.clone(),
        energy: energy_records,
        snapshots,
        final_energy,
        max_newton_iters,
    })
}
