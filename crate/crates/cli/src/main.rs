//! `dotchain`: command-line front end for the dot-chain transfer simulator.
//!
//! Subcommands map one-to-one onto the library's entry points: single
//! transfers, fidelity sweeps, free-evolution studies, timing calibration,
//! effective-coupling evaluation and multi-dot chain runs. Exit codes are
//! stable: 0 success, 2 config/usage problems, 3 runtime failures.

mod config;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dotchain::analysis::{free_evolution_study, sweep_with_tol, SweepSpec};
use dotchain::chain::{n_dot_transfer_with_tol, ChainSpec};
use dotchain::evolution::LogicalState;
use dotchain::hamiltonian::sw_effective_couplings;
use dotchain::params::{DetuningVector, DeviceParams, HBAR_MEV_PS, PS_PER_NS};
use dotchain::protocols::{
    adiabatic_schedule, calibrate_gate_duration, calibrate_wait_time_with_tol,
    pulse_gated_schedule, run_transfer_with_tol, theta_grid, AutoPs, ProtocolConfig,
};

use config::{CalibrateMode, OutputFormat, OutputSettings, RunConfig};

/// Environment variable overriding the worker-thread count (the `--workers`
/// flag wins over it).
const WORKERS_ENV: &str = "DOTCHAIN_WORKERS";

#[derive(Debug)]
pub enum CliError {
    /// Config or usage problem: exit code 2.
    Config(String),
    /// Simulation or I/O failure: exit code 3.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl From<dotchain::Error> for CliError {
    fn from(e: dotchain::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "dotchain",
    version,
    about = "Singlet-triplet qubit state transfer across a linear quantum-dot chain"
)]
struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one transfer and print the result as JSON.
    Simulate {
        config: PathBuf,
        /// Initial polar angle theta, radians in [0, pi].
        #[arg(long)]
        theta: f64,
        /// Initial relative phase phi, radians.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Sweep fidelity over the configured theta/phi/delta-U grid.
    Sweep { config: PathBuf },
    /// Record the average-fidelity trace under free evolution at zero detuning.
    FreeEvolution { config: PathBuf },
    /// Calibrate protocol timing (wait, or jointly gate + wait) and print a report.
    Calibrate { config: PathBuf },
    /// Evaluate the second-order effective couplings and print them as JSON.
    Sw {
        /// Tunnel coupling t, meV.
        #[arg(long)]
        t: f64,
        /// Exchange splitting J_e, meV.
        #[arg(long, default_value_t = 0.0)]
        je: f64,
        /// Intradot Coulomb energy U, meV.
        #[arg(long)]
        u: f64,
        /// Interdot Coulomb energy K, meV.
        #[arg(long)]
        k: f64,
        /// Resonant outer-dot detuning, meV.
        #[arg(long)]
        eps: f64,
    },
    /// Transfer across an N-dot chain by repeated three-dot steps.
    Chain {
        config: PathBuf,
        /// Number of dots (overrides the config's [chain] section).
        #[arg(long)]
        n_dots: Option<usize>,
        /// Initial polar angle theta, radians in [0, pi].
        #[arg(long)]
        theta: f64,
        /// Initial relative phase phi, radians.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_workers(cli.workers)?;
    match cli.cmd {
        Cmd::Simulate { config, theta, phi } => cmd_simulate(&config, theta, phi),
        Cmd::Sweep { config } => cmd_sweep(&config),
        Cmd::FreeEvolution { config } => cmd_free_evolution(&config),
        Cmd::Calibrate { config } => cmd_calibrate(&config),
        Cmd::Sw { t, je, u, k, eps } => cmd_sw(t, je, u, k, eps),
        Cmd::Chain { config, n_dots, theta, phi } => cmd_chain(&config, n_dots, theta, phi),
    }
}

fn configure_workers(flag: Option<usize>) -> Result<(), CliError> {
    let workers = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("worker count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot build worker pool: {e}")))?;
    }
    Ok(())
}

fn logical_state(theta: f64, phi: f64) -> Result<LogicalState, CliError> {
    LogicalState::new(theta, phi).map_err(|e| CliError::Config(e.to_string()))
}

fn print_json(value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("cannot serialize result: {e}")))?;
    println!("{text}");
    Ok(())
}

/// Write an artifact in the configured format to the configured destination
/// (stdout when no path is set).
fn write_artifact(
    out: &OutputSettings,
    to_csv: impl FnOnce() -> String,
    value: &impl Serialize,
) -> Result<(), CliError> {
    let payload = match out.format {
        OutputFormat::Csv => to_csv(),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(value)
                .map_err(|e| CliError::Runtime(format!("cannot serialize result: {e}")))?;
            text.push('\n');
            text
        }
    };
    match &out.path {
        None => {
            print!("{payload}");
            Ok(())
        }
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| CliError::Runtime(format!("cannot write `{path}`: {e}"))),
    }
}

fn cmd_simulate(config_path: &PathBuf, theta: f64, phi: f64) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let initial = logical_state(theta, phi)?;
    let schedule = cfg
        .scheme
        .schedule(&cfg.params)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let result = run_transfer_with_tol(&initial, &cfg.params, &schedule, cfg.ramp_tol)?;
    print_json(&result)
}

fn cmd_sweep(config_path: &PathBuf) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let spec = SweepSpec {
        theta_points: cfg.sweep.theta_points,
        theta_range: cfg.sweep.theta_range,
        phi_values: cfg.sweep.phi_values.clone(),
        delta_u_values: cfg.sweep.delta_u_values.clone(),
        scheme: cfg.scheme,
    };
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let table = sweep_with_tol(&spec, &cfg.params, cfg.ramp_tol)?;
    write_artifact(&cfg.output, || table.to_csv(), &table)
}

fn cmd_free_evolution(config_path: &PathBuf) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let Some(settings) = cfg.free_evolution else {
        return Err(CliError::Config(
            "free-evolution needs scheme = free_evolution in [protocol]".into(),
        ));
    };
    if !(settings.duration_ns >= 0.0) || !settings.duration_ns.is_finite() {
        return Err(CliError::Config(format!(
            "duration_ns must be finite and non-negative (got {})",
            settings.duration_ns
        )));
    }
    if !(settings.sample_dt_ns > 0.0 && settings.sample_dt_ns <= 0.001) {
        return Err(CliError::Config(format!(
            "sample_dt_ns must lie in (0, 0.001] (got {})",
            settings.sample_dt_ns
        )));
    }
    let trace = free_evolution_study(
        &cfg.params,
        settings.duration_ns,
        settings.sample_dt_ns * PS_PER_NS,
        settings.threshold,
    )?;
    write_artifact(&cfg.output, || trace.to_csv(), &trace)
}

#[derive(Serialize)]
struct CalibrationReport {
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_gate_duration_ns: Option<f64>,
    best_wait_ns: f64,
    worst_case_fidelity: f64,
    transfer_time_ns: f64,
}

fn cmd_calibrate(config_path: &PathBuf) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let protocol = cfg.protocol()?;
    let grid = theta_grid(cfg.sweep.theta_points.max(2));
    let grid_points = cfg.calibrate.grid_points;
    let window_ps = cfg.calibrate.window_ns.map(|(lo, hi)| (lo * PS_PER_NS, hi * PS_PER_NS));

    let report = match (cfg.calibrate.mode, protocol) {
        (CalibrateMode::Gate, ProtocolConfig::PulseGated(p)) => {
            let window = window_ps.ok_or_else(|| {
                CliError::Config(
                    "gate calibration needs window_lo_ns / window_hi_ns in [calibrate]".into(),
                )
            })?;
            let cal = calibrate_gate_duration(&grid, &cfg.params, &p, window, grid_points)?;
            CalibrationReport {
                mode: "gate",
                best_gate_duration_ns: Some(cal.best_duration_ps / PS_PER_NS),
                best_wait_ns: cal.best_wait_ps / PS_PER_NS,
                worst_case_fidelity: cal.worst_case_fidelity,
                transfer_time_ns: (cal.best_duration_ps + cal.best_wait_ps) / PS_PER_NS,
            }
        }
        (CalibrateMode::Gate, ProtocolConfig::Adiabatic(_)) => {
            return Err(CliError::Config(
                "gate calibration applies to the pulse_gated scheme only".into(),
            ));
        }
        (CalibrateMode::Wait, ProtocolConfig::PulseGated(p)) => {
            let trial = dotchain::protocols::PulseGatedConfig {
                wait_time: AutoPs::Fixed(0.0),
                ..p
            };
            let template = pulse_gated_schedule(&cfg.params, &trial)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let wait_eps = DetuningVector::new(-p.d_p, 0.0, p.d_p);
            // Default window: one full period of the regime-III residual phase.
            let window = window_ps
                .unwrap_or((0.0, 4.0 * std::f64::consts::PI * HBAR_MEV_PS / p.eps_resonant));
            let cal = calibrate_wait_time_with_tol(
                &grid,
                &cfg.params,
                &template,
                &wait_eps,
                window,
                grid_points,
                cfg.ramp_tol,
            )?;
            CalibrationReport {
                mode: "wait",
                best_gate_duration_ns: None,
                best_wait_ns: cal.best_wait_ps / PS_PER_NS,
                worst_case_fidelity: cal.worst_case_fidelity,
                transfer_time_ns: (template.total_duration() + cal.best_wait_ps) / PS_PER_NS,
            }
        }
        (CalibrateMode::Wait, ProtocolConfig::Adiabatic(a)) => {
            let trial =
                dotchain::protocols::AdiabaticConfig { wait_time: AutoPs::Fixed(0.0), ..a };
            let template = adiabatic_schedule(&cfg.params, &trial)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let wait_eps = DetuningVector::new(-a.d_ad, a.eps_mid, a.eps_mid);
            // The residual phase at the end detunings oscillates with a
            // ~20 ps period for typical exchange splittings; default to a
            // window that covers one such period.
            let window = window_ps.unwrap_or((0.0, 21.0));
            let cal = calibrate_wait_time_with_tol(
                &grid,
                &cfg.params,
                &template,
                &wait_eps,
                window,
                grid_points,
                cfg.ramp_tol,
            )?;
            CalibrationReport {
                mode: "wait",
                best_gate_duration_ns: None,
                best_wait_ns: cal.best_wait_ps / PS_PER_NS,
                worst_case_fidelity: cal.worst_case_fidelity,
                transfer_time_ns: (template.total_duration() + cal.best_wait_ps) / PS_PER_NS,
            }
        }
    };
    print_json(&report)
}

#[derive(Serialize)]
struct SwReport {
    j_s_mev: f64,
    j_t_mev: f64,
}

fn cmd_sw(t: f64, je: f64, u: f64, k: f64, eps: f64) -> Result<(), CliError> {
    let params = DeviceParams::new(t, je, u, k).map_err(|e| CliError::Config(e.to_string()))?;
    let sw = sw_effective_couplings(&params, eps)?;
    print_json(&SwReport { j_s_mev: sw.j_s, j_t_mev: sw.j_t })?;
    let two_k = 2.0 * k;
    if (u - two_k).abs() <= 1e-12 * two_k.max(1.0) {
        eprintln!("pulse-gated condition satisfied");
    }
    Ok(())
}

#[derive(Serialize)]
struct ChainReport {
    n_dots: usize,
    steps: usize,
    step_fidelities: Vec<f64>,
    composed_fidelity: f64,
    product_fidelity: f64,
    total_time_ns: f64,
}

fn cmd_chain(
    config_path: &PathBuf,
    n_dots: Option<usize>,
    theta: f64,
    phi: f64,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let protocol = cfg.protocol()?;
    let initial = logical_state(theta, phi)?;
    let spec = ChainSpec { n_dots: n_dots.unwrap_or(cfg.chain.n_dots), protocol };
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let result = n_dot_transfer_with_tol(&spec, &initial, &cfg.params, cfg.ramp_tol)?;
    print_json(&ChainReport {
        n_dots: spec.n_dots,
        steps: spec.steps(),
        step_fidelities: result.per_step.iter().map(|s| s.fidelity).collect(),
        composed_fidelity: result.composed_fidelity,
        product_fidelity: result.product_fidelity,
        total_time_ns: result.total_time_ns,
    })
}
