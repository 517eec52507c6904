//! `sglat`: batch front-end for the sg-lattice solver.
//!
//! Subcommands run simulations, amplitude/frequency threshold sweeps,
//! stability scans, and every-step energy audits, writing CSV artifacts plus
//! a manifest.json with the resolved configuration and file checksums.
//! Exit codes: 0 success, 1 validation error, 2 solver or i/o error.

mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{CliError, Overrides, RunConfig};
use sg_lattice::{
    audit_trajectory, frequency_diagram, scan, simulate, sweep, ParameterVariant, Recorders,
    StabilityParams, SweepVariable,
};
use std::path::Path;

#[derive(Parser)]
#[command(name = "sglat", version, about = "Driven discrete sine-Gordon lattice toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation, recording the energy ledger and lattice snapshots
    Simulate(Overrides),
    /// Sweep the driving amplitude and detect the supratransmission threshold
    SweepAmplitude(Overrides),
    /// Detect the amplitude threshold at each frequency of a grid
    SweepFrequency(Overrides),
    /// Scan the von Neumann amplification matrix over wavenumbers
    Stability(Overrides),
    /// Every-step energy ledger with the exact rate-identity audit
    EnergyAudit(Overrides),
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sglat: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn init_thread_cap() -> Result<(), CliError> {
    match std::env::var("SG_LATTICE_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Validation(format!("SG_LATTICE_THREADS: {e}"))),
        Ok(text) => {
            let threads: usize = text.parse().map_err(|_| {
                CliError::Validation(format!(
                    "SG_LATTICE_THREADS must be a positive integer, got {text:?}"
                ))
            })?;
            if threads == 0 {
                return Err(CliError::Validation(
                    "SG_LATTICE_THREADS must be at least 1".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_thread_cap()?;
    match cli.command {
        Command::Simulate(ov) => cmd_simulate(&ov),
        Command::SweepAmplitude(ov) => cmd_sweep_amplitude(&ov),
        Command::SweepFrequency(ov) => cmd_sweep_frequency(&ov),
        Command::Stability(ov) => cmd_stability(&ov),
        Command::EnergyAudit(ov) => cmd_energy_audit(&ov),
    }
}

fn ensure_out_dir(config: &RunConfig) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&config.out)?;
    Ok(&config.out)
}

fn cmd_simulate(ov: &Overrides) -> Result<(), CliError> {
    let config = RunConfig::resolve(ov)?;
    let (params, drive, solver) = (config.model()?, config.drive()?, config.solver()?);
    let stride = config.stride_for(false);
    if stride == 0 {
        return Err(CliError::Validation("stride must be at least 1".into()));
    }

    let result = simulate(
        &params,
        &drive,
        &solver,
        &Recorders {
            energy_stride: stride,
            snapshot_stride: stride,
        },
    )?;

    let dir = ensure_out_dir(&config)?;
    let artifacts = vec![
        output::write_energy_csv(dir, &result.energy)?,
        output::write_snapshots_csv(dir, &result.snapshots)?,
    ];
    let summary = serde_json::json!({
        "steps": solver.steps,
        "stride": stride,
        "final_energy": result.final_energy,
        "max_newton_iters": result.max_newton_iters,
    });
    output::write_manifest(dir, "simulate", &config, summary, &artifacts)?;
    println!(
        "simulate: {} steps, final energy {:.6e}, wrote {} artifacts to {}",
        solver.steps,
        result.final_energy,
        artifacts.len() + 1,
        dir.display()
    );
    Ok(())
}

fn cmd_sweep_amplitude(ov: &Overrides) -> Result<(), CliError> {
    let config = RunConfig::resolve(ov)?;
    let spec = config.sweep_spec(SweepVariable::Amplitude)?;
    let result = sweep(&spec)?;

    let dir = ensure_out_dir(&config)?;
    let artifacts = vec![output::write_sweep_csv(dir, &result)?];
    let summary = serde_json::json!({
        "grid": { "lo": spec.lo, "hi": spec.hi, "step": spec.step, "count": result.grid.len() },
        "sim_time": spec.sim_time,
        "threshold": result.threshold,
        "jump_ratio": result.jump_ratio,
        "monotonicity_violations": result.monotonicity_violations,
    });
    output::write_manifest(dir, "sweep-amplitude", &config, summary, &artifacts)?;
    match result.threshold {
        Some(a) => println!(
            "sweep-amplitude: threshold {a:.4} (jump x{:.1}) over {} grid points",
            result.jump_ratio.unwrap(),
            result.grid.len()
        ),
        None => println!(
            "sweep-amplitude: no threshold detected over {} grid points",
            result.grid.len()
        ),
    }
    Ok(())
}

fn cmd_sweep_frequency(ov: &Overrides) -> Result<(), CliError> {
    let config = RunConfig::resolve(ov)?;
    let base = config.sweep_spec(SweepVariable::Amplitude)?;
    let omegas = config.frequency_grid()?;
    let variants = [ParameterVariant {
        label: "base".into(),
        params: base.params.clone(),
    }];
    let lines = frequency_diagram(&base, &omegas, &variants)?;
    let line = &lines[0];

    let dir = ensure_out_dir(&config)?;
    let artifacts = vec![output::write_thresholds_csv(dir, line)?];
    let detected = line.points.iter().filter(|(_, t)| t.is_some()).count();
    let summary = serde_json::json!({
        "frequency_grid": { "lo": config.fmin, "hi": config.fmax, "step": config.df, "count": omegas.len() },
        "amplitude_grid": { "lo": base.lo, "hi": base.hi, "step": base.step },
        "detected": detected,
        "thresholds": line.points.iter().map(|(o, t)| serde_json::json!({"omega": o, "threshold": t})).collect::<Vec<_>>(),
    });
    output::write_manifest(dir, "sweep-frequency", &config, summary, &artifacts)?;
    println!(
        "sweep-frequency: thresholds detected at {detected}/{} frequencies",
        omegas.len()
    );
    Ok(())
}

fn cmd_stability(ov: &Overrides) -> Result<(), CliError> {
    let config = RunConfig::resolve(ov)?;
    let params = config.model()?;
    let solver = config.solver()?;
    let report = scan(
        solver.scheme,
        &StabilityParams::from_model(&params, solver.dt),
        config.xi_points,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;

    let dir = ensure_out_dir(&config)?;
    let artifacts = vec![output::write_stability_csv(dir, &report)?];
    let summary = serde_json::json!({
        "xi_points": config.xi_points,
        "max_rho": report.max_rho,
        "max_inf_norm": report.max_inf_norm,
        "necessary_ok": report.necessary_ok,
        "sufficient_ok": report.sufficient_ok,
        "corollary_ok": report.corollary_ok,
    });
    output::write_manifest(dir, "stability", &config, summary, &artifacts)?;
    println!(
        "stability: {} points, max rho {:.12}, max inf-norm {:.12}",
        config.xi_points, report.max_rho, report.max_inf_norm
    );
    Ok(())
}

fn cmd_energy_audit(ov: &Overrides) -> Result<(), CliError> {
    let config = RunConfig::resolve(ov)?;
    let params = config.model()?;
    if !params.is_uniform_damping() {
        return Err(CliError::Validation(
            "energy-audit requires uniform damping: sponge_mode off and r infinite".into(),
        ));
    }
    let drive = config.drive()?;
    let mut solver = config.solver()?;
    solver.newton_tol = solver.newton_tol_audit;
    let stride = config.stride_for(true);
    if stride != 1 {
        return Err(CliError::Validation(
            "energy-audit requires stride 1 (the rate identity is per step)".into(),
        ));
    }

    let result = simulate(&params, &drive, &solver, &Recorders::audit())?;
    let report = audit_trajectory(&params, solver.dt, &result.energy, drive.shutoff_step)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let dir = ensure_out_dir(&config)?;
    let artifacts = vec![output::write_energy_csv(dir, &result.energy)?];
    let summary = serde_json::json!({
        "steps": solver.steps,
        "newton_tol": solver.newton_tol,
        "max_defect": report.max_defect,
        "shutoff_drift": report.shutoff_drift,
        "monotone_after_shutoff": report.monotone_after_shutoff,
        "telescope_rel_err": report.telescope_rel_err,
        "final_energy": result.final_energy,
    });
    output::write_manifest(dir, "energy-audit", &config, summary, &artifacts)?;
    println!(
        "energy-audit: max identity defect {:.3e}{}{}",
        report.max_defect,
        report
            .shutoff_drift
            .map(|d| format!(", post-shutoff drift {d:.3e}"))
            .unwrap_or_default(),
        report
            .telescope_rel_err
            .map(|t| format!(", telescoped-flux error {t:.3e}"))
            .unwrap_or_default(),
    );
    Ok(())
}
