//! Solver toolkit for damped, harmonically driven, discrete sine-Gordon
//! lattices (arrays of Josephson junctions coupled through superconducting
//! wires).
//!
//! The crate provides:
//!
//! - two implicit three-level finite-difference schemes with Newton/Crout
//!   stepping ([`integrator`]);
//! - scheme-matched discrete Hamiltonians, total energies, and exact
//!   energy-rate identities for auditing conservation and dissipation
//!   ([`energy`]);
//! - von Neumann stability scans of the linearized schemes ([`stability`]);
//! - supratransmission threshold sweeps over driving amplitude and frequency
//!   ([`mod@sweep`]).
//!
//! Everything is deterministic: there is no randomness anywhere, and sweep
//! parallelism merges results by grid index.

pub mod energy;
pub mod integrator;
pub mod model;
pub mod stability;
pub mod sweep;
pub mod tridiag;

pub use energy::{
    audit_trajectory, ledger_record, rate_parts, rate_rhs, site_hamiltonian, total_energy,
    AuditReport, EnergyError, EnergyRecord, RateParts,
};
pub use integrator::{
    ghost_gap_next, ghost_update, jacobian_tridiagonal, residual, simulate, simulate_from, step,
    LatticeState, Recorders, Scheme, SimulateError, SimulationResult, Snapshot, SolverConfig,
    SolverError, StepDiagnostics,
};
pub use model::{
    continuum_threshold, dispersion_omega2, nonlinear_ratio, nonlinear_ratio_dplus, potential,
    sponge_gamma, uniform_equilibrium, DriveSpec, ModelError, ModelParams, SpongeMode,
};
pub use stability::{
    eigenvalues, inf_norm, scan, spectral_radius, symbols, StabilityError, StabilityParams,
    StabilityReport,
};
pub use sweep::{
    detect_threshold, frequency_diagram, scheme_cross_check, sweep, sweep_sequential, DiagramLine,
    ParameterVariant, SchemeCrossCheck, SweepError, SweepSpec, SweepVariable, ThresholdResult,
};
pub use tridiag::{crout_solve, crout_solve_with, CroutWorkspace, ZeroPivot};
