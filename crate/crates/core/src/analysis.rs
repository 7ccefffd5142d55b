//! Fidelity metrics, quadrature, parameter sweeps and free-evolution studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::evolution::{
    schedule_propagator, BlockPropagator, DetuningSchedule, LogicalState, QubitState,
    ScheduleSegment, DEFAULT_RAMP_TOL,
};
use crate::params::{DetuningVector, DeviceParams, PS_PER_NS};
use crate::protocols::{run_transfer_with_propagator, target_state, ProtocolConfig};
use crate::Result;

/// `|<target|final>|^2`.
pub fn fidelity(final_state: &QubitState, target: &QubitState) -> f64 {
    target.overlap(final_state).norm_sqr()
}

/// Composite Simpson quadrature of uniformly spaced samples over `[0, pi]`.
///
/// `samples` are values of the integrand (already including any weight);
/// the count must be odd and at least 3.
pub fn simpson_integral(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidConfig(format!(
            "Simpson quadrature needs an odd sample count >= 3 (got {n})"
        )));
    }
    let h = std::f64::consts::PI / (n - 1) as f64;
    let mut acc = samples[0] + samples[n - 1];
    for (i, v) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * h / 3.0)
}

/// `(1/2) integral_0^pi F(theta) sin(theta) d theta` from uniform samples of
/// `F` on `[0, pi]` (odd count).
pub fn average_fidelity_from_samples(f_samples: &[f64]) -> Result<f64> {
    let n = f_samples.len();
    let weighted: Vec<f64> = f_samples
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
            f * theta.sin() * 0.5
        })
        .collect();
    simpson_integral(&weighted)
}

/// Average fidelity of a continuous `F(theta)`, refined by doubling the
/// Simpson grid until successive values differ by less than `1e-6`; the last
/// two levels are Richardson extrapolated, which removes the leading `h^4`
/// truncation term and leaves the result well inside the stopping tolerance.
pub fn average_fidelity(f: impl Fn(f64) -> f64) -> Result<f64> {
    let eval = |points: usize| -> Result<f64> {
        let samples: Vec<f64> = (0..points)
            .map(|i| f(std::f64::consts::PI * i as f64 / (points - 1) as f64))
            .collect();
        average_fidelity_from_samples(&samples)
    };
    let mut points = 5;
    let mut prev = eval(points)?;
    loop {
        points = 2 * (points - 1) + 1;
        let next = eval(points)?;
        if (next - prev).abs() < 1e-6 || points > (1 << 20) {
            return Ok((16.0 * next - prev) / 15.0);
        }
        prev = next;
    }
}

/// Which protocol a sweep exercises. Free evolution is a constant hold with
/// every dot on resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepScheme {
    PulseGated(crate::protocols::PulseGatedConfig),
    Adiabatic(crate::protocols::AdiabaticConfig),
    FreeEvolution { duration_ns: f64 },
}

impl SweepScheme {
    pub fn schedule(&self, params: &DeviceParams) -> Result<DetuningSchedule> {
        match self {
            SweepScheme::PulseGated(cfg) => ProtocolConfig::PulseGated(*cfg).schedule(params),
            SweepScheme::Adiabatic(cfg) => ProtocolConfig::Adiabatic(*cfg).schedule(params),
            SweepScheme::FreeEvolution { duration_ns } => {
                if !(*duration_ns > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "free-evolution duration must be positive (got {duration_ns} ns)"
                    )));
                }
                Ok(DetuningSchedule::new(vec![ScheduleSegment::constant(
                    DetuningVector::ZERO,
                    duration_ns * PS_PER_NS,
                )?]))
            }
        }
    }
}

/// Grid specification for a fidelity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub theta_points: usize,
    /// Inclusive theta range, a subset of `[0, pi]`.
    pub theta_range: (f64, f64),
    pub phi_values: Vec<f64>,
    /// Intradot-Coulomb offsets: each run uses `U + delta_u`.
    pub delta_u_values: Vec<f64>,
    pub scheme: SweepScheme,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta_points < 2 {
            return Err(Error::InvalidConfig(format!(
                "sweep needs at least 2 theta points (got {})",
                self.theta_points
            )));
        }
        let (lo, hi) = self.theta_range;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > std::f64::consts::PI + 1e-12
            || hi < lo
        {
            return Err(Error::InvalidConfig(format!(
                "theta range must be an ordered subset of [0, pi] (got [{lo}, {hi}])"
            )));
        }
        if self.phi_values.is_empty() || self.delta_u_values.is_empty() {
            return Err(Error::InvalidConfig(
                "phi and delta-u lists must be non-empty (use [0] for a single curve)".into(),
            ));
        }
        Ok(())
    }

    pub fn thetas(&self) -> Vec<f64> {
        let (lo, hi) = self.theta_range;
        (0..self.theta_points)
            .map(|i| lo + (hi - lo) * i as f64 / (self.theta_points - 1) as f64)
            .collect()
    }
}

/// One sweep grid point. `error` is set (and the metrics are NaN) when the
/// underlying run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub phi: f64,
    pub delta_u_mev: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    pub leakage_total: f64,
    pub transfer_time_ns: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Deterministically ordered sweep results (theta outer, phi middle,
/// delta-u inner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub records: Vec<SweepRecord>,
}

impl SweepTable {
    pub const CSV_HEADER: &'static str =
        "theta,phi,delta_u_mev,fidelity,infidelity,leakage_total,transfer_time_ns";

    /// Render as CSV with LF line endings and full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.theta,
                r.phi,
                r.delta_u_mev,
                r.fidelity,
                r.infidelity,
                r.leakage_total,
                r.transfer_time_ns
            ));
        }
        out
    }
}

/// Run a full sweep with the default ramp tolerance.
pub fn sweep(spec: &SweepSpec, params: &DeviceParams) -> Result<SweepTable> {
    sweep_with_tol(spec, params, DEFAULT_RAMP_TOL)
}

/// Run a full sweep.
///
/// The whole-schedule propagator depends only on `delta_u` (the schedule is
/// device independent), so one propagator is built per delta-u value — in
/// parallel — and reused across the theta and phi grids.
pub fn sweep_with_tol(spec: &SweepSpec, params: &DeviceParams, tol: f64) -> Result<SweepTable> {
    spec.validate()?;
    let schedule = spec.scheme.schedule(params)?;
    let propagators: Vec<std::result::Result<BlockPropagator, String>> = spec
        .delta_u_values
        .par_iter()
        .map(|&du| {
            schedule_propagator(&params.with_u_offset(du), &schedule, tol)
                .map_err(|e| e.to_string())
        })
        .collect();
    let transfer_time_ns = schedule.total_duration() / PS_PER_NS;
    let mut records = Vec::with_capacity(
        spec.theta_points * spec.phi_values.len() * spec.delta_u_values.len(),
    );
    for theta in spec.thetas() {
        for &phi in &spec.phi_values {
            for (k, &du) in spec.delta_u_values.iter().enumerate() {
                let record = match (&propagators[k], LogicalState::new(theta, phi)) {
                    (Ok(u), Ok(initial)) => {
                        let res = run_transfer_with_propagator(&initial, u, &schedule);
                        SweepRecord {
                            theta,
                            phi,
                            delta_u_mev: du,
                            fidelity: res.fidelity,
                            infidelity: 1.0 - res.fidelity,
                            leakage_total: res.leakage_total(),
                            transfer_time_ns,
                            error: None,
                        }
                    }
                    (Err(msg), _) => failed_record(theta, phi, du, transfer_time_ns, msg.clone()),
                    (_, Err(e)) => failed_record(theta, phi, du, transfer_time_ns, e.to_string()),
                };
                records.push(record);
            }
        }
    }
    Ok(SweepTable { records })
}

fn failed_record(
    theta: f64,
    phi: f64,
    delta_u_mev: f64,
    transfer_time_ns: f64,
    error: String,
) -> SweepRecord {
    SweepRecord {
        theta,
        phi,
        delta_u_mev,
        fidelity: f64::NAN,
        infidelity: f64::NAN,
        leakage_total: f64::NAN,
        transfer_time_ns,
        error: Some(error),
    }
}

/// Time-resolved free-evolution record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEvolutionTrace {
    /// Sample times, ps.
    pub times_ps: Vec<f64>,
    /// Average fidelity per sample time.
    pub average_fidelity: Vec<f64>,
    /// Strict local maxima of the average fidelity, `(time ps, value)`,
    /// sorted by time; plateaus resolve to their earliest sample.
    pub peaks: Vec<(f64, f64)>,
    /// First sample time where the minimum fidelity over theta exceeds the
    /// coherence threshold, if any.
    pub earliest_coherent_ps: Option<f64>,
}

impl FreeEvolutionTrace {
    pub const CSV_HEADER: &'static str = "time_ps,average_fidelity";

    /// Render the time series as CSV (peaks and the coherence time are only
    /// part of the JSON form).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (t, f) in self.times_ps.iter().zip(&self.average_fidelity) {
            out.push_str(&format!("{t:.16e},{f:.16e}\n"));
        }
        out
    }

    /// The highest peak, ties broken toward earlier time.
    pub fn highest_peak(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for &(t, v) in &self.peaks {
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((t, v));
            }
        }
        best
    }
}

/// Default number of initial states for worst-case and average objectives.
pub const DEFAULT_THETA_POINTS: usize = 33;

/// Evolve a theta grid of initial states at zero detuning under constant `H`
/// and record the average-fidelity trace.
///
/// `threshold` is the per-state fidelity bar (0.7: the classical transfer
/// limit rounded up) used for `earliest_coherent_ps`.
pub fn free_evolution_study(
    params: &DeviceParams,
    duration_ns: f64,
    sample_dt_ps: f64,
    threshold: f64,
) -> Result<FreeEvolutionTrace> {
    if !(duration_ns >= 0.0) || !duration_ns.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "duration must be finite and non-negative (got {duration_ns} ns)"
        )));
    }
    if !(sample_dt_ps > 0.0 && sample_dt_ps <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "sample step must lie in (0, 1] ps (got {sample_dt_ps} ps)"
        )));
    }
    let n_theta = DEFAULT_THETA_POINTS;
    let grid: Vec<LogicalState> = crate::protocols::theta_grid(n_theta);
    let targets: Vec<QubitState> = grid.iter().map(target_state).collect();
    let mut states: Vec<QubitState> = grid.iter().map(|l| l.encode()).collect();
    let step =
        BlockPropagator::constant(params, &DetuningVector::ZERO, sample_dt_ps)?;
    let samples = (duration_ns * PS_PER_NS / sample_dt_ps).round() as usize;
    let mut times_ps = Vec::with_capacity(samples + 1);
    let mut avg = Vec::with_capacity(samples + 1);
    let mut earliest = None;
    for i in 0..=samples {
        let tau = i as f64 * sample_dt_ps;
        let fids: Vec<f64> =
            states.iter().zip(&targets).map(|(s, t)| fidelity(s, t)).collect();
        times_ps.push(tau);
        avg.push(average_fidelity_from_samples(&fids)?);
        if earliest.is_none() && fids.iter().all(|&f| f > threshold) {
            earliest = Some(tau);
        }
        if i < samples {
            for s in states.iter_mut() {
                *s = step.apply(s, sample_dt_ps);
            }
        }
    }
    let peaks = find_peaks(&times_ps, &avg);
    Ok(FreeEvolutionTrace {
        times_ps,
        average_fidelity: avg,
        peaks,
        earliest_coherent_ps: earliest,
    })
}

/// Strict local maxima; a plateau counts once, at its earliest sample.
fn find_peaks(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 <= n.saturating_sub(1) {
        if values[i] > values[i - 1] {
            // Walk to the end of any plateau starting here.
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[j] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[j] {
                peaks.push((times[i], values[i]));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::PulseGatedConfig;

    #[test]
    fn simpson_reference_integrals() {
        // (1/2) int sin = 1; cos^2 -> 1/3; sin^2 -> 2/3.
        // 33 fixed samples carry the h^4 Simpson truncation (~1e-6 here);
        // the adaptive version extrapolates it away.
        let ones = vec![1.0; 33];
        assert!((average_fidelity_from_samples(&ones).unwrap() - 1.0).abs() < 1e-5);
        let adaptive = average_fidelity(|_| 1.0).unwrap();
        assert!((adaptive - 1.0).abs() < 1e-10, "constant-1 average = {adaptive}");
        let a = average_fidelity(|th| th.cos() * th.cos()).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-8, "cos^2 average = {a}");
        let b = average_fidelity(|th| th.sin() * th.sin()).unwrap();
        assert!((b - 2.0 / 3.0).abs() < 1e-8, "sin^2 average = {b}");
    }

    #[test]
    fn simpson_rejects_even_counts() {
        assert!(simpson_integral(&[1.0, 2.0]).is_err());
        assert!(simpson_integral(&[1.0, 2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn fidelity_overlap_arithmetic() {
        use crate::basis::{FULL_T0_23, S_23};
        use num_complex::Complex64;
        let target = LogicalState::new(0.0, 0.0).unwrap().encode_on(S_23, FULL_T0_23);
        assert!((fidelity(&target, &target) - 1.0).abs() < 1e-15);
        let disjoint = LogicalState::new(0.0, 0.0).unwrap().encode();
        assert_eq!(fidelity(&disjoint, &target), 0.0);
        let mut amps = [Complex64::ZERO; 9];
        amps[S_23] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[FULL_T0_23] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let half = QubitState::new(amps, 0.0);
        assert!((fidelity(&half, &target) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sweep_rows_ordered_and_deterministic() {
        let params = DeviceParams::new(0.12, 0.1, 6.1, 3.05).unwrap();
        let spec = SweepSpec {
            theta_points: 3,
            theta_range: (0.0, std::f64::consts::PI),
            phi_values: vec![0.0, 0.5],
            delta_u_values: vec![-0.061, 0.0],
            scheme: SweepScheme::PulseGated(PulseGatedConfig::new(5.0, 10.0).unwrap()),
        };
        let a = sweep(&spec, &params).unwrap();
        let b = sweep(&spec, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 12);
        // theta outer, phi middle, delta inner.
        assert_eq!(a.records[0].delta_u_mev, -0.061);
        assert_eq!(a.records[1].delta_u_mev, 0.0);
        assert_eq!(a.records[1].phi, 0.0);
        assert_eq!(a.records[2].phi, 0.5);
        assert_eq!(a.records[0].theta, 0.0);
        assert!((a.records[4].theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        for r in &a.records {
            assert!(r.fidelity >= 0.0 && r.fidelity <= 1.0);
            assert!(r.error.is_none());
        }
    }

    #[test]
    fn sweep_csv_shape() {
        let params = DeviceParams::new(0.12, 0.1, 6.1, 3.05).unwrap();
        let spec = SweepSpec {
            theta_points: 2,
            theta_range: (0.0, 1.0),
            phi_values: vec![0.0],
            delta_u_values: vec![0.0],
            scheme: SweepScheme::FreeEvolution { duration_ns: 0.1 },
        };
        let table = sweep(&spec, &params).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SweepTable::CSV_HEADER);
        assert_eq!(lines.count(), 2);
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn sweep_validation() {
        let base = SweepSpec {
            theta_points: 1,
            theta_range: (0.0, std::f64::consts::PI),
            phi_values: vec![0.0],
            delta_u_values: vec![0.0],
            scheme: SweepScheme::FreeEvolution { duration_ns: 0.1 },
        };
        assert!(base.validate().is_err());
        let bad_range = SweepSpec { theta_points: 5, theta_range: (0.0, 4.0), ..base.clone() };
        assert!(bad_range.validate().is_err());
        let empty_phi = SweepSpec { theta_points: 5, phi_values: vec![], ..base.clone() };
        assert!(empty_phi.validate().is_err());
    }

    #[test]
    fn free_evolution_starts_at_zero_fidelity() {
        let params = DeviceParams::new(0.12, 0.1, 6.1, 3.05).unwrap();
        let trace = free_evolution_study(&params, 0.0, 1.0, 0.7).unwrap();
        assert_eq!(trace.times_ps.len(), 1);
        assert!(trace.average_fidelity[0].abs() < 1e-15);
        assert!(trace.earliest_coherent_ps.is_none());
        assert!(trace.peaks.is_empty());
    }

    #[test]
    fn free_evolution_trace_bounded_and_continuous() {
        let params = DeviceParams::new(0.3, 0.1, 6.1, 2.3).unwrap();
        let trace = free_evolution_study(&params, 0.12, 1.0, 0.7).unwrap();
        for pair in trace.average_fidelity.windows(2) {
            assert!(pair[0] >= 0.0 && pair[0] <= 1.0 + 1e-12);
            // Lipschitz-style continuity bound: ||H||/hbar is O(10) rad/ps
            // here, so adjacent 1 ps samples cannot jump by order one.
            assert!((pair[1] - pair[0]).abs() < 0.2, "jump {} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn peak_detection_plateau_rules() {
        let times: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let vals = [0.0, 1.0, 1.0, 0.5, 0.8, 0.2, 0.9];
        let peaks = find_peaks(&times, &vals);
        assert_eq!(peaks, vec![(1.0, 1.0), (4.0, 0.8)]);
    }
}
