//! Acceptance gate: one test per headline criterion, each printing a single
//! PASS/FAIL line with the measured numbers before asserting.
//!
//! Criteria that the implementation does not reach are left red on purpose;
//! the measured values printed here are stable and the assertions state the
//! target exactly. Do not loosen them to make the suite green.

use dotchain::analysis::{average_fidelity, fidelity, free_evolution_study};
use dotchain::chain::{n_dot_transfer, ChainSpec};
use dotchain::evolution::{
    propagate_constant, propagate_schedule, BlockPropagator, LogicalState, ScheduleSegment,
};
use dotchain::hamiltonian::{build_hamiltonian, sw_effective_couplings};
use dotchain::params::{DetuningVector, DeviceParams};
use dotchain::protocols::{
    adiabatic_schedule, calibrate_gate_duration, calibrate_wait_time_with_tol,
    pulse_gated_schedule, run_transfer, run_transfer_with_tol, theta_grid, AdiabaticConfig,
    AutoPs, ProtocolConfig, PulseGatedConfig,
};

const RAMP_TOL: f64 = 1e-6;

fn pulse_params() -> DeviceParams {
    DeviceParams::new(0.12, 0.1, 6.1, 3.05).unwrap()
}

fn adiabatic_params() -> DeviceParams {
    DeviceParams::new(0.12, 0.1, 6.1, 2.3).unwrap()
}

fn alt_params() -> DeviceParams {
    DeviceParams::new(0.12, 0.1, 4.6, 2.3).unwrap()
}

fn verdict(criterion: u32, pass: bool, detail: &str) -> bool {
    eprintln!(
        "ACCEPTANCE CRITERION {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn pulse_fidelities(params: &DeviceParams, cfg: &PulseGatedConfig) -> (Vec<f64>, f64) {
    let schedule = pulse_gated_schedule(params, cfg).unwrap();
    let time_ns = schedule.total_duration() / 1000.0;
    let fids = theta_grid(33)
        .iter()
        .map(|l| run_transfer(l, params, &schedule).unwrap().fidelity)
        .collect();
    (fids, time_ns)
}

/// Criterion 1 — pulse-gated headline band and transfer time.
#[test]
fn criterion_1_pulse_gated_headline() {
    let cfg = PulseGatedConfig::new(5.0, 10.0).unwrap();
    let (fids, time_ns) = pulse_fidelities(&pulse_params(), &cfg);
    let f_min = fids.iter().cloned().fold(f64::INFINITY, f64::min);
    let f_max = fids.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let band_ok = f_min >= 0.985 && f_max <= 0.999;
    let time_ok = (time_ns - 0.58).abs() <= 0.01;
    let pass = verdict(
        1,
        band_ok && time_ok,
        &format!(
            "fidelity band [{f_min:.4}, {f_max:.4}] (target [0.985, 0.999]), \
             T = {time_ns:.4} ns (target 0.58 +/- 0.01)"
        ),
    );
    assert!(pass, "pulse-gated headline band/time not met");
}

/// Criterion 2 — intradot-Coulomb perturbation robustness.
#[test]
fn criterion_2_delta_u_robustness() {
    let params = pulse_params();
    let cfg = PulseGatedConfig::new(5.0, 10.0).unwrap();
    let schedule = pulse_gated_schedule(&params, &cfg).unwrap();
    let grid = theta_grid(33);
    let masked = |fids: &[f64]| -> Vec<f64> {
        grid.iter()
            .zip(fids)
            .filter(|(l, _)| (l.theta - std::f64::consts::FRAC_PI_2).abs() >= 0.1)
            .map(|(_, f)| 1.0 - f)
            .collect()
    };
    let run_band = |du: f64| -> Vec<f64> {
        let p = params.with_u_offset(du);
        grid.iter().map(|l| run_transfer(l, &p, &schedule).unwrap().fidelity).collect()
    };
    let base = run_band(0.0);
    let med0 = median(&mut masked(&base));
    let mid = 16; // theta = pi/2 on the 33-point grid
    let mut factors = Vec::new();
    let mut mid_ok = true;
    for du in [0.061, -0.061] {
        let perturbed = run_band(du);
        factors.push(median(&mut masked(&perturbed)) / med0);
        mid_ok &= (perturbed[mid] - base[mid]).abs() < 1e-8;
    }
    let factors_ok = factors.iter().all(|f| (5.0..=20.0).contains(f));
    let pass = verdict(
        2,
        factors_ok && mid_ok,
        &format!(
            "median infidelity factors {factors:.3?} (target [5, 20] each), \
             theta=pi/2 drift < 1e-8: {mid_ok}"
        ),
    );
    assert!(pass, "delta-U robustness factors not met");
}

/// Criterion 3 — adiabatic headline fidelity floor.
#[test]
fn criterion_3_adiabatic_headline() {
    let params = adiabatic_params();
    let cfg = AdiabaticConfig::new(8.0, 65.8).unwrap();
    let schedule = adiabatic_schedule(&params, &cfg).unwrap();
    let mut f_min = f64::INFINITY;
    // Build the ramp once; the wait segment is already part of the schedule.
    let prop = dotchain::evolution::schedule_propagator(&params, &schedule, RAMP_TOL).unwrap();
    for l in theta_grid(33) {
        let res = dotchain::protocols::run_transfer_with_propagator(&l, &prop, &schedule);
        f_min = f_min.min(res.fidelity);
    }
    let pass = verdict(
        3,
        f_min >= 0.993,
        &format!("min fidelity over theta = {f_min:.4} (target >= 0.993) at wait 12 hbar/eps"),
    );
    assert!(pass, "adiabatic headline floor not met");
}

/// Criterion 4 — free-evolution peaks; the documented fallback Coulomb set
/// must succeed if the default set does not.
#[test]
fn criterion_4_free_evolution() {
    let check = |k: f64| -> Result<String, String> {
        let p12 = DeviceParams::new(0.12, 0.1, 6.1, k).unwrap();
        let trace = free_evolution_study(&p12, 1.2, 1.0, 0.7).unwrap();
        let (pk12_t, pk12_v) = trace.highest_peak().ok_or("no peak for t=0.12")?;
        if (pk12_t - 470.0).abs() > 30.0 {
            return Err(format!("t=0.12 peak at {pk12_t} ps (target 470 +/- 30)"));
        }
        if (pk12_v - 0.96).abs() > 0.02 {
            return Err(format!("t=0.12 peak value {pk12_v:.4} (target 0.96 +/- 0.02)"));
        }
        let ec = trace.earliest_coherent_ps.ok_or("no coherent time for t=0.12")?;
        if (ec - 450.0).abs() > 30.0 {
            return Err(format!("t=0.12 earliest coherent {ec} ps (target 450 +/- 30)"));
        }
        let p30 = DeviceParams::new(0.30, 0.1, 6.1, k).unwrap();
        let trace = free_evolution_study(&p30, 0.3, 0.25, 0.7).unwrap();
        let (pk30_t, pk30_v) = trace.highest_peak().ok_or("no peak for t=0.3")?;
        if (pk30_t - 81.0).abs() > 8.0 {
            return Err(format!("t=0.3 peak at {pk30_t} ps (target 81 +/- 8)"));
        }
        if (pk30_v - 0.91).abs() > 0.02 {
            return Err(format!("t=0.3 peak value {pk30_v:.4} (target 0.91 +/- 0.02)"));
        }
        Ok(format!(
            "t=0.12 peak ({pk12_t} ps, {pk12_v:.4}), earliest {ec} ps; \
             t=0.3 peak ({pk30_t} ps, {pk30_v:.4})"
        ))
    };
    let (pass, detail) = match check(3.05) {
        Ok(d) => (true, format!("default Coulomb set reproduces the peaks: {d}")),
        Err(default_err) => match check(2.3) {
            Ok(d) => (
                true,
                format!(
                    "default set failed ({default_err}); documented fallback K=2.3 \
                     reproduces the peaks: {d}"
                ),
            ),
            Err(fallback_err) => (
                false,
                format!("default set failed ({default_err}); fallback K=2.3 failed ({fallback_err})"),
            ),
        },
    };
    let pass = verdict(4, pass, &detail);
    assert!(pass, "free-evolution peaks not reproduced");
}

/// Criterion 5 — fidelity is independent of the initial relative phase.
#[test]
fn criterion_5_phase_universality() {
    let phis = [0.0, std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_4];
    let thetas: Vec<f64> =
        (0..9).map(|i| std::f64::consts::PI * i as f64 / 8.0).collect();
    let mut max_spread: f64 = 0.0;
    let mut check = |params: &DeviceParams, schedule: &dotchain::evolution::DetuningSchedule| {
        let prop = dotchain::evolution::schedule_propagator(params, schedule, RAMP_TOL).unwrap();
        for &theta in &thetas {
            let fids: Vec<f64> = phis
                .iter()
                .map(|&phi| {
                    let l = LogicalState::new(theta, phi).unwrap();
                    dotchain::protocols::run_transfer_with_propagator(&l, &prop, schedule)
                        .fidelity
                })
                .collect();
            let spread = fids.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - fids.iter().cloned().fold(f64::INFINITY, f64::min);
            max_spread = max_spread.max(spread);
        }
    };
    let p = pulse_params();
    let pulse = pulse_gated_schedule(&p, &PulseGatedConfig::new(5.0, 10.0).unwrap()).unwrap();
    check(&p, &pulse);
    let pa = adiabatic_params();
    let adia = adiabatic_schedule(&pa, &AdiabaticConfig::new(8.0, 65.8).unwrap()).unwrap();
    check(&pa, &adia);
    let pass = verdict(
        5,
        max_spread < 1e-6,
        &format!("max per-theta fidelity spread across phi = {max_spread:.2e} (target < 1e-6)"),
    );
    assert!(pass, "phase universality not met");
}

/// Criterion 6 — alternate Coulomb set: calibrated transfer time and the
/// pulse-vs-adiabatic infidelity ordering.
#[test]
fn criterion_6_alternate_parameters() {
    let params = alt_params();
    let grid = theta_grid(33);
    let cfg = PulseGatedConfig::new(5.0, 10.0).unwrap();
    // The worst-case-fidelity objective oscillates in the gate duration with
    // a ~21 ps period (the residual singlet-triplet phase), so the coarse
    // grid spacing must stay well below that period to avoid aliasing: 121
    // points over 600 ps gives 5 ps.
    let cal = calibrate_gate_duration(&grid, &params, &cfg, (300.0, 900.0), 121).unwrap();
    let total_ns = (cal.best_duration_ps + cal.best_wait_ps) / 1000.0;
    let time_ok = (total_ns - 0.74).abs() <= 0.15 * 0.74;

    // Pulse infidelity curve at the calibrated timings.
    let pulse_sched = pulse_gated_schedule(
        &params,
        &PulseGatedConfig {
            gate_duration: AutoPs::Fixed(cal.best_duration_ps),
            wait_time: AutoPs::Fixed(cal.best_wait_ps),
            ..cfg
        },
    )
    .unwrap();
    let pulse_infid: Vec<f64> = grid
        .iter()
        .map(|l| 1.0 - run_transfer(l, &params, &pulse_sched).unwrap().fidelity)
        .collect();

    // Adiabatic curve for the same parameters, calibrated wait.
    let ramp_only = dotchain::evolution::DetuningSchedule::new(vec![ScheduleSegment::ramp(
        DetuningVector::new(-1.0, -1.0, -8.0),
        DetuningVector::new(-8.0, -1.0, -1.0),
        65_800.0,
    )
    .unwrap()]);
    let wait_eps = DetuningVector::new(-8.0, -1.0, -1.0);
    let wait_cal = calibrate_wait_time_with_tol(
        &grid, &params, &ramp_only, &wait_eps, (0.0, 21.0), 43, RAMP_TOL,
    )
    .unwrap();
    let mut adia_sched = ramp_only.clone();
    adia_sched
        .segments
        .push(ScheduleSegment::constant(wait_eps, wait_cal.best_wait_ps).unwrap());
    let prop = dotchain::evolution::schedule_propagator(&params, &adia_sched, RAMP_TOL).unwrap();
    let adia_infid: Vec<f64> = grid
        .iter()
        .map(|l| {
            1.0 - dotchain::protocols::run_transfer_with_propagator(l, &prop, &adia_sched)
                .fidelity
        })
        .collect();
    let ordering_ok = pulse_infid
        .iter()
        .zip(&adia_infid)
        .all(|(p, a)| p >= &(a - 1e-12));
    let pass = verdict(
        6,
        time_ok && ordering_ok,
        &format!(
            "calibrated transfer time {total_ns:.4} ns (target 0.74 +/- 15%), \
             pulse infidelity above adiabatic at all theta: {ordering_ok}"
        ),
    );
    assert!(pass, "alternate-parameter timing/ordering not met");
}

/// Criterion 7 — closed-form coupling oracle.
#[test]
fn criterion_7_sw_oracle() {
    let sw = sw_effective_couplings(&pulse_params(), 5.0).unwrap();
    let values_ok = (sw.j_s - 3.5776e-3).abs() < 0.5e-7 * 10.0
        && (sw.j_t + 3.5776e-3).abs() < 0.5e-7 * 10.0;
    let mut equal_ok = true;
    for (t, k, eps) in [(0.12, 3.05, 5.0), (0.3, 2.3, 5.0), (0.05, 1.7, 2.0)] {
        let p = DeviceParams::new(t, 0.1, 2.0 * k, k).unwrap();
        let sw = sw_effective_couplings(&p, eps).unwrap();
        equal_ok &= sw.j_s == -sw.j_t;
    }
    let pass = verdict(
        7,
        values_ok && equal_ok,
        &format!(
            "j_s = {:+.4e}, j_t = {:+.4e} (target +/-3.5776e-3), \
             |j_s| = |j_t| bit-exact at U=2K: {equal_ok}",
            sw.j_s, sw.j_t
        ),
    );
    assert!(pass, "coupling oracle not met");
}

/// Criterion 8 — always-on property suite at the frozen reference setups.
#[test]
fn criterion_8_property_suite() {
    let params = pulse_params();
    let mut ok = true;
    let mut notes = Vec::new();

    // Unitarity through the full pulse schedule.
    let sched = pulse_gated_schedule(&params, &PulseGatedConfig::new(5.0, 10.0).unwrap()).unwrap();
    let fin = propagate_schedule(
        &LogicalState::new(0.8, 0.4).unwrap().encode(),
        &params,
        &sched,
        RAMP_TOL,
    )
    .unwrap();
    let norm_err = (fin.norm() - 1.0).abs();
    ok &= norm_err < 1e-10;
    notes.push(format!("norm drift {norm_err:.1e}"));

    // Hermiticity.
    let h = build_hamiltonian(&params, &DetuningVector::new(1.2, -0.4, 3.3)).unwrap();
    let mut herm: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            herm = herm.max((h.h_s[i][j] - h.h_s[j][i]).abs());
        }
    }
    ok &= herm <= 1e-14;
    notes.push(format!("hermiticity {herm:.1e}"));

    // Exact sector conservation.
    let mut amps = [num_complex::Complex64::ZERO; 9];
    amps[dotchain::basis::S_12] = num_complex::Complex64::ONE;
    let fin = propagate_constant(
        &dotchain::evolution::QubitState::new(amps, 0.0),
        &params,
        &DetuningVector::new(5.0, 0.0, 5.0),
        321.0,
    )
    .unwrap();
    let cross: f64 = fin.amps[6..].iter().map(|a| a.norm_sqr()).sum();
    ok &= cross == 0.0;
    notes.push(format!("sector cross-talk {cross:.1e}"));

    // Detuning-gauge fidelity invariance.
    let l = LogicalState::new(0.7, 0.2).unwrap();
    let target = dotchain::protocols::target_state(&l);
    let eps = DetuningVector::new(5.0, 0.0, 5.0);
    let f0 = fidelity(
        &propagate_constant(&l.encode(), &params, &eps, 200.0).unwrap(),
        &target,
    );
    let f1 = fidelity(
        &propagate_constant(&l.encode(), &params, &eps.shifted(1.0), 200.0).unwrap(),
        &target,
    );
    let gauge = (f0 - f1).abs();
    ok &= gauge < 1e-12;
    notes.push(format!("gauge drift {gauge:.1e}"));

    // Simpson quadrature of cos^2.
    let simpson = average_fidelity(|th| th.cos() * th.cos()).unwrap();
    let simpson_err = (simpson - 1.0 / 3.0).abs();
    ok &= simpson_err <= 1e-8;
    notes.push(format!("Simpson cos^2 error {simpson_err:.1e}"));

    // Second-order convergence of the midpoint rule (frozen fine levels).
    let pa = adiabatic_params();
    let seg = ScheduleSegment::ramp(
        DetuningVector::new(-1.0, -1.0, -8.0),
        DetuningVector::new(-8.0, -1.0, -1.0),
        6580.0,
    )
    .unwrap();
    let init = LogicalState::new(0.7, 0.0).unwrap().encode();
    let state_at = |n: u64| {
        BlockPropagator::ramp_fixed(&pa, &seg, n).unwrap().apply(&init, seg.duration)
    };
    let (a, b, c) = (state_at(16_384), state_at(32_768), state_at(65_536));
    let d = |x: &dotchain::evolution::QubitState, y: &dotchain::evolution::QubitState| {
        x.amps
            .iter()
            .zip(y.amps.iter())
            .map(|(p, q)| (p - q).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let ratio = d(&a, &b) / d(&b, &c);
    ok &= (3.5..=4.5).contains(&ratio);
    notes.push(format!("halving ratio {ratio:.3}"));

    let pass = verdict(8, ok, &notes.join(", "));
    assert!(pass, "property suite not met");
}

/// Criterion 9 — chain timing linearity and the projection-composition bound.
#[test]
fn criterion_9_chain_composition() {
    let params = pulse_params();
    let protocol = ProtocolConfig::PulseGated(PulseGatedConfig::new(5.0, 10.0).unwrap());
    let initial = LogicalState::new(std::f64::consts::FRAC_PI_4, 0.0).unwrap();
    let c3 = n_dot_transfer(&ChainSpec { n_dots: 3, protocol }, &initial, &params).unwrap();
    let c4 = n_dot_transfer(&ChainSpec { n_dots: 4, protocol }, &initial, &params).unwrap();
    let c10 = n_dot_transfer(&ChainSpec { n_dots: 10, protocol }, &initial, &params).unwrap();
    let t = c3.total_time_ns;
    let timing_ok =
        (c4.total_time_ns - 2.0 * t).abs() < 1e-12 && (c10.total_time_ns - 8.0 * t).abs() < 1e-12;

    let f3 = c3.composed_fidelity;
    let composed = c4.composed_fidelity;
    let bound_ok = composed >= f3 * f3 && composed <= f3;
    let pass = verdict(
        9,
        timing_ok && bound_ok,
        &format!(
            "T(4) = 2T, T(10) = 8T: {timing_ok}; composed N=4 fidelity {composed:.4} \
             vs bound [{:.4}, {:.4}]",
            f3 * f3,
            f3
        ),
    );
    assert!(pass, "chain timing/composition bound not met");
}

// Single-run transfer sanity used by several criteria: the target accounting
// invariant F <= 1 - (leakage outside the target pair).
#[test]
fn transfer_accounting_invariant() {
    let params = pulse_params();
    let sched = pulse_gated_schedule(&params, &PulseGatedConfig::new(5.0, 10.0).unwrap()).unwrap();
    for l in theta_grid(9) {
        let res = run_transfer_with_tol(&l, &params, &sched, RAMP_TOL).unwrap();
        assert!(res.fidelity <= 1.0 - res.leakage_total() + 1e-10);
    }
}
