//! Transfer protocols: pulse-gated square pulses, adiabatic linear ramps,
//! full transfer runs, and deterministic timing calibration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisIndex, FULL_T0_23, S_23};
use crate::error::Error;
use crate::evolution::{
    propagate_schedule, schedule_propagator, BlockPropagator, DetuningSchedule, LogicalState,
    QubitState, ScheduleSegment, DEFAULT_RAMP_TOL,
};
use crate::params::{DetuningVector, DeviceParams, HBAR_MEV_PS, PS_PER_NS};
use crate::Result;

/// A duration that is either derived from closed-form expressions or fixed
/// explicitly, in ps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AutoPs {
    Auto,
    Fixed(f64),
}

impl AutoPs {
    pub fn resolve(self, auto_value: f64) -> f64 {
        match self {
            AutoPs::Auto => auto_value,
            AutoPs::Fixed(v) => v,
        }
    }
}

/// Square-pulse transfer through three detuning regimes.
///
/// Regime I holds the qubit far detuned at `(+d_p, 0, -d_p)`, regime II
/// brings the outer dots to the resonance `(eps_resonant, 0, eps_resonant)`
/// for `gate_duration`, and regime III parks at `(-d_p, 0, +d_p)` for
/// `wait_time` to cancel the residual singlet-triplet phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseGatedConfig {
    /// Regime-II outer-dot detuning, meV.
    pub eps_resonant: f64,
    /// Far-detuned pulse amplitude, meV.
    pub d_p: f64,
    pub gate_duration: AutoPs,
    pub wait_time: AutoPs,
    /// Optional hold in regime I before the gate, ps.
    pub pre_hold: f64,
    /// Optional extra hold in regime III after the wait, ps.
    pub post_hold: f64,
}

impl PulseGatedConfig {
    pub fn new(eps_resonant: f64, d_p: f64) -> Result<Self> {
        let cfg = Self {
            eps_resonant,
            d_p,
            gate_duration: AutoPs::Auto,
            wait_time: AutoPs::Auto,
            pre_hold: 0.0,
            post_hold: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eps_resonant.is_finite() || !self.d_p.is_finite() {
            return Err(Error::NonFinite("eps_resonant/d_p"));
        }
        if !(self.d_p > self.eps_resonant && self.eps_resonant > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pulse amplitudes must satisfy d_p > eps_resonant > 0 (got d_p = {}, eps_resonant = {})",
                self.d_p, self.eps_resonant
            )));
        }
        if self.pre_hold < 0.0 || self.post_hold < 0.0 {
            return Err(Error::InvalidConfig("hold durations must be non-negative".into()));
        }
        Ok(())
    }

    /// Closed-form regime-II duration `hbar pi / J` with `J = 2 t^2 / (K + eps)`;
    /// only valid at the matched-Coulomb point `U = 2K`.
    pub fn auto_gate_duration(&self, params: &DeviceParams) -> Result<f64> {
        let two_k = 2.0 * params.k;
        if (params.u - two_k).abs() > 1e-12 * two_k.max(1.0) {
            return Err(Error::AutoGateRequiresMatchedCoulomb { u: params.u, two_k });
        }
        let j = 2.0 * params.t * params.t / (params.k + self.eps_resonant);
        Ok(HBAR_MEV_PS * std::f64::consts::PI / j)
    }

    /// Closed-form wait `3 hbar / eps`.
    pub fn auto_wait_time(&self) -> f64 {
        3.0 * HBAR_MEV_PS / self.eps_resonant
    }
}

/// Adiabatic transfer: one linear detuning ramp plus a phase-correcting wait.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticConfig {
    /// Ramp amplitude, meV.
    pub d_ad: f64,
    /// Ramp duration, ns.
    pub ramp_duration_ns: f64,
    /// Fixed middle-dot detuning (and outer-dot endpoint), meV.
    pub eps_mid: f64,
    pub wait_time: AutoPs,
    /// Resonance scale used by the closed-form wait `12 hbar / eps`, meV.
    pub eps_resonant: f64,
}

impl AdiabaticConfig {
    pub fn new(d_ad: f64, ramp_duration_ns: f64) -> Result<Self> {
        let cfg = Self {
            d_ad,
            ramp_duration_ns,
            eps_mid: -1.0,
            wait_time: AutoPs::Auto,
            eps_resonant: 5.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.d_ad, self.ramp_duration_ns, self.eps_mid, self.eps_resonant]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("adiabatic config"));
        }
        if !(self.d_ad > self.eps_mid.abs()) {
            return Err(Error::InvalidConfig(format!(
                "ramp amplitude must exceed |eps_mid| (d_ad = {}, eps_mid = {})",
                self.d_ad, self.eps_mid
            )));
        }
        if !(self.ramp_duration_ns > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "ramp duration must be positive (got {} ns)",
                self.ramp_duration_ns
            )));
        }
        if !(self.eps_resonant > 0.0) {
            return Err(Error::InvalidConfig("eps_resonant must be positive".into()));
        }
        Ok(())
    }

    /// Closed-form wait `12 hbar / eps`.
    pub fn auto_wait_time(&self) -> f64 {
        12.0 * HBAR_MEV_PS / self.eps_resonant
    }
}

/// Either transfer protocol, for callers that dispatch on a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProtocolConfig {
    PulseGated(PulseGatedConfig),
    Adiabatic(AdiabaticConfig),
}

impl ProtocolConfig {
    pub fn schedule(&self, params: &DeviceParams) -> Result<DetuningSchedule> {
        match self {
            ProtocolConfig::PulseGated(cfg) => pulse_gated_schedule(params, cfg),
            ProtocolConfig::Adiabatic(cfg) => adiabatic_schedule(params, cfg),
        }
    }
}

/// Build the three-regime square-pulse schedule.
///
/// Zero-duration holds are omitted, so the default total duration is exactly
/// `gate_duration + wait_time`.
pub fn pulse_gated_schedule(
    params: &DeviceParams,
    cfg: &PulseGatedConfig,
) -> Result<DetuningSchedule> {
    cfg.validate()?;
    let gate = match cfg.gate_duration {
        AutoPs::Auto => cfg.auto_gate_duration(params)?,
        AutoPs::Fixed(v) => v,
    };
    let wait = cfg.wait_time.resolve(cfg.auto_wait_time());
    if !(gate > 0.0) || wait < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gate duration must be positive and wait non-negative (gate = {gate} ps, wait = {wait} ps)"
        )));
    }
    let regime_1 = DetuningVector::new(cfg.d_p, 0.0, -cfg.d_p);
    let regime_2 = DetuningVector::new(cfg.eps_resonant, 0.0, cfg.eps_resonant);
    let regime_3 = DetuningVector::new(-cfg.d_p, 0.0, cfg.d_p);
    let mut segments = Vec::new();
    if cfg.pre_hold > 0.0 {
        segments.push(ScheduleSegment::constant(regime_1, cfg.pre_hold)?);
    }
    segments.push(ScheduleSegment::constant(regime_2, gate)?);
    let tail = wait + cfg.post_hold;
    if tail > 0.0 {
        segments.push(ScheduleSegment::constant(regime_3, tail)?);
    }
    Ok(DetuningSchedule::new(segments))
}

/// Build the linear-ramp adiabatic schedule.
///
/// `eps_1` ramps `eps_mid -> -d_ad` while `eps_3` ramps `-d_ad -> eps_mid`
/// and the middle dot stays at `eps_mid`; a constant wait at the final
/// detunings corrects the accumulated singlet-triplet phase.
pub fn adiabatic_schedule(params: &DeviceParams, cfg: &AdiabaticConfig) -> Result<DetuningSchedule> {
    let _ = params; // schedule shape is device independent
    cfg.validate()?;
    let ramp_ps = cfg.ramp_duration_ns * PS_PER_NS;
    let start = DetuningVector::new(cfg.eps_mid, cfg.eps_mid, -cfg.d_ad);
    let end = DetuningVector::new(-cfg.d_ad, cfg.eps_mid, cfg.eps_mid);
    let wait = cfg.wait_time.resolve(cfg.auto_wait_time());
    let mut segments = vec![ScheduleSegment::ramp(start, end, ramp_ps)?];
    if wait > 0.0 {
        segments.push(ScheduleSegment::constant(end, wait)?);
    }
    Ok(DetuningSchedule::new(segments))
}

/// Outcome of one complete transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub final_state: QubitState,
    /// `|<target|final>|^2` against the logical target on the `(2,3)` pair.
    pub fidelity: f64,
    /// Population of every non-target basis state, keyed by label.
    pub leakage: BTreeMap<String, f64>,
    pub transfer_time_ns: f64,
    pub schedule_used: DetuningSchedule,
}

impl TransferResult {
    /// Total population outside the two target components.
    pub fn leakage_total(&self) -> f64 {
        self.leakage.values().sum()
    }
}

/// Logical transfer target for a given initial state: the same amplitudes
/// moved to `|S>_{2,3}` and `|T0>_{2,3}`.
pub fn target_state(initial: &LogicalState) -> QubitState {
    initial.encode_on(S_23, FULL_T0_23)
}

fn build_result(
    initial: &LogicalState,
    final_state: QubitState,
    schedule: DetuningSchedule,
) -> TransferResult {
    let target = target_state(initial);
    let fidelity = target.overlap(&final_state).norm_sqr();
    let mut leakage = BTreeMap::new();
    for b in BasisIndex::all() {
        let i = b.full_index();
        if i == S_23 || i == FULL_T0_23 {
            continue;
        }
        leakage.insert(b.label().to_string(), final_state.population(i));
    }
    let transfer_time_ns = schedule.total_duration() / PS_PER_NS;
    TransferResult { final_state, fidelity, leakage, transfer_time_ns, schedule_used: schedule }
}

/// Run one transfer with the default ramp tolerance.
pub fn run_transfer(
    initial: &LogicalState,
    params: &DeviceParams,
    schedule: &DetuningSchedule,
) -> Result<TransferResult> {
    run_transfer_with_tol(initial, params, schedule, DEFAULT_RAMP_TOL)
}

/// Run one transfer with an explicit ramp refinement tolerance.
pub fn run_transfer_with_tol(
    initial: &LogicalState,
    params: &DeviceParams,
    schedule: &DetuningSchedule,
    tol: f64,
) -> Result<TransferResult> {
    if schedule.segments.is_empty() {
        return Err(Error::InvalidConfig("schedule must contain at least one segment".into()));
    }
    let final_state = propagate_schedule(&initial.encode(), params, schedule, tol)?;
    Ok(build_result(initial, final_state, schedule.clone()))
}

/// Run one transfer reusing a precomputed whole-schedule propagator.
///
/// Building the propagator once and applying it across a grid of initial
/// states is what makes dense sweeps cheap.
pub fn run_transfer_with_propagator(
    initial: &LogicalState,
    propagator: &BlockPropagator,
    schedule: &DetuningSchedule,
) -> TransferResult {
    let final_state = propagator.apply(&initial.encode(), schedule.total_duration());
    build_result(initial, final_state, schedule.clone())
}

/// Uniform grid of `points` logical states with `theta` spanning `[0, pi]`
/// at `phi = 0`.
pub fn theta_grid(points: usize) -> Vec<LogicalState> {
    assert!(points >= 2, "theta grid needs at least 2 points");
    (0..points)
        .map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (points - 1) as f64;
            LogicalState::new(theta, 0.0).expect("grid angle in range")
        })
        .collect()
}

/// Result of a wait-time calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedWait {
    pub best_wait_ps: f64,
    pub worst_case_fidelity: f64,
}

/// Result of a joint gate-duration and wait-time calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedGate {
    pub best_duration_ps: f64,
    pub best_wait_ps: f64,
    pub worst_case_fidelity: f64,
}

/// Minimum fidelity over the initial-state grid after appending a wait of
/// `wait` ps at `wait_eps` to the template propagator.
fn min_fidelity_with_wait(
    grid: &[LogicalState],
    params: &DeviceParams,
    template: &BlockPropagator,
    template_duration: f64,
    wait_eps: &DetuningVector,
    wait: f64,
) -> Result<f64> {
    let total = if wait > 0.0 {
        BlockPropagator::constant(params, wait_eps, wait)?.then(template)
    } else {
        template.clone()
    };
    let mut worst = f64::INFINITY;
    for initial in grid {
        let fin = total.apply(&initial.encode(), template_duration + wait);
        let f = target_state(initial).overlap(&fin).norm_sqr();
        worst = worst.min(f);
    }
    Ok(worst)
}

/// Deterministic argmax over a candidate list; ties break toward the first
/// (smallest) candidate, so a flat objective returns the window minimum.
fn grid_argmax(
    candidates: &[f64],
    mut objective: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let mut best_x = candidates[0];
    let mut best_f = objective(candidates[0])?;
    for &x in &candidates[1..] {
        let f = objective(x)?;
        if f > best_f {
            best_f = f;
            best_x = x;
        }
    }
    Ok((best_x, best_f))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || hi <= lo {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Two-stage grid search (refinement factor 10) for the wait time that
/// maximizes the minimum fidelity over `initial_grid`.
///
/// `schedule_template` is the transfer schedule *without* the wait segment;
/// candidates are appended as a constant hold at `wait_eps`.
pub fn calibrate_wait_time(
    initial_grid: &[LogicalState],
    params: &DeviceParams,
    schedule_template: &DetuningSchedule,
    wait_eps: &DetuningVector,
    search_window: (f64, f64),
    grid_points: usize,
) -> Result<CalibratedWait> {
    calibrate_wait_time_with_tol(
        initial_grid,
        params,
        schedule_template,
        wait_eps,
        search_window,
        grid_points,
        DEFAULT_RAMP_TOL,
    )
}

pub fn calibrate_wait_time_with_tol(
    initial_grid: &[LogicalState],
    params: &DeviceParams,
    schedule_template: &DetuningSchedule,
    wait_eps: &DetuningVector,
    search_window: (f64, f64),
    grid_points: usize,
    tol: f64,
) -> Result<CalibratedWait> {
    let (lo, hi) = search_window;
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
        return Err(Error::InvalidConfig(format!(
            "wait search window must satisfy 0 <= lo <= hi (got [{lo}, {hi}])"
        )));
    }
    if grid_points < 3 {
        return Err(Error::InvalidConfig("calibration needs at least 3 grid points".into()));
    }
    if initial_grid.is_empty() {
        return Err(Error::InvalidConfig("calibration needs at least one initial state".into()));
    }
    let template = schedule_propagator(params, schedule_template, tol)?;
    let template_duration = schedule_template.total_duration();
    let mut objective = |wait: f64| {
        min_fidelity_with_wait(initial_grid, params, &template, template_duration, wait_eps, wait)
    };

    let coarse = linspace(lo, hi, grid_points);
    let (x0, _) = grid_argmax(&coarse, &mut objective)?;
    let spacing = if hi > lo { (hi - lo) / (grid_points - 1) as f64 } else { 0.0 };
    let fine_lo = (x0 - spacing).max(lo);
    let fine_hi = (x0 + spacing).min(hi);
    let fine = linspace(fine_lo, fine_hi, grid_points);
    let (best_wait_ps, worst_case_fidelity) = grid_argmax(&fine, &mut objective)?;
    Ok(CalibratedWait { best_wait_ps, worst_case_fidelity })
}

/// Jointly calibrate the regime-II gate duration and the regime-III wait of a
/// pulse-gated transfer: two-stage search over the duration, with a nested
/// wait calibration per candidate.
pub fn calibrate_gate_duration(
    initial_grid: &[LogicalState],
    params: &DeviceParams,
    cfg: &PulseGatedConfig,
    search_window: (f64, f64),
    grid_points: usize,
) -> Result<CalibratedGate> {
    cfg.validate()?;
    let (lo, hi) = search_window;
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
        return Err(Error::InvalidConfig(format!(
            "gate search window must satisfy 0 < lo <= hi (got [{lo}, {hi}])"
        )));
    }
    if grid_points < 3 {
        return Err(Error::InvalidConfig("calibration needs at least 3 grid points".into()));
    }
    let wait_eps = DetuningVector::new(-cfg.d_p, 0.0, cfg.d_p);
    // Residual phase is periodic with the singlet-triplet splitting; one
    // period of the regime-III phase rate bounds the useful wait window.
    let wait_window = (0.0, std::f64::consts::PI * HBAR_MEV_PS / cfg.eps_resonant * 4.0);
    let mut best: Option<CalibratedGate> = None;
    let evaluate = |duration: f64| -> Result<CalibratedWait> {
        let trial = PulseGatedConfig {
            gate_duration: AutoPs::Fixed(duration),
            wait_time: AutoPs::Fixed(0.0),
            ..*cfg
        };
        let template = pulse_gated_schedule(params, &trial)?;
        calibrate_wait_time(initial_grid, params, &template, &wait_eps, wait_window, grid_points)
    };
    let search = |candidates: &[f64], best: &mut Option<CalibratedGate>| -> Result<f64> {
        let mut best_x = candidates[0];
        for &x in candidates {
            let w = evaluate(x)?;
            let better = match best {
                None => true,
                Some(b) => w.worst_case_fidelity > b.worst_case_fidelity,
            };
            if better {
                *best = Some(CalibratedGate {
                    best_duration_ps: x,
                    best_wait_ps: w.best_wait_ps,
                    worst_case_fidelity: w.worst_case_fidelity,
                });
                best_x = x;
            }
        }
        Ok(best_x)
    };
    let coarse = linspace(lo, hi, grid_points);
    let x0 = search(&coarse, &mut best)?;
    let spacing = if hi > lo { (hi - lo) / (grid_points - 1) as f64 } else { 0.0 };
    if spacing > 0.0 {
        let fine = linspace((x0 - spacing).max(lo), (x0 + spacing).min(hi), grid_points);
        search(&fine, &mut best)?;
    }
    Ok(best.expect("at least one candidate evaluated"))
}
