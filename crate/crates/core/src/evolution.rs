//! Time propagation of 9-amplitude states under piecewise detuning schedules.
//!
//! Constant segments use the exact exponential from the Hermitian
//! eigendecomposition of each block. Linear ramps use the exponential
//! midpoint rule: the ramp is split into `n` substeps and each substep
//! applies the exact exponential of the Hamiltonian at its temporal
//! midpoint. `n` is doubled until the result stops changing to within the
//! requested tolerance, which keeps the propagator exactly unitary at every
//! refinement level and converges at second order in the substep size.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{FULL_T0_12, SINGLET_DIM, S_12, TOTAL_DIM, TRIPLET_DIM};
use crate::error::Error;
use crate::hamiltonian::build_hamiltonian;
use crate::linalg::{
    cidentity, cmat_adjoint, cmat_diff_norm, cmat_mul, cmat_vec, propagator, CMat,
};
use crate::params::{DetuningVector, DeviceParams};
use crate::Result;

/// Default relative tolerance for ramp substep refinement.
pub const DEFAULT_RAMP_TOL: f64 = 1e-8;
/// Hard cap on ramp substeps before refinement is abandoned.
pub const MAX_SUBSTEPS: u64 = 1 << 24;

/// Nine complex amplitudes (singlet block then triplet block) plus the
/// current simulation time in ps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub amps: [Complex64; TOTAL_DIM],
    pub time: f64,
}

impl QubitState {
    pub fn new(amps: [Complex64; TOTAL_DIM], time: f64) -> Self {
        Self { amps, time }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &QubitState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Population of the full-vector basis index `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.amps[i].norm_sqr()
    }

    pub fn singlet_amps(&self) -> [Complex64; SINGLET_DIM] {
        let mut out = [Complex64::ZERO; SINGLET_DIM];
        out.copy_from_slice(&self.amps[..SINGLET_DIM]);
        out
    }

    pub fn triplet_amps(&self) -> [Complex64; TRIPLET_DIM] {
        let mut out = [Complex64::ZERO; TRIPLET_DIM];
        out.copy_from_slice(&self.amps[SINGLET_DIM..]);
        out
    }
}

/// Logical qubit state `cos(theta) |S>_{1,2} + e^{i phi} sin(theta) |T0>_{1,2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalState {
    /// Mixing angle in radians, `[0, pi]`.
    pub theta: f64,
    /// Relative phase in radians, `[0, 2 pi)`.
    pub phi: f64,
}

impl LogicalState {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::NonFinite("theta/phi"));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidConfig(format!(
                "mixing angle theta must lie in [0, pi] (got {theta})"
            )));
        }
        Ok(Self { theta, phi: phi.rem_euclid(2.0 * std::f64::consts::PI) })
    }

    /// Encode onto the `(1,2)` dot pair: amplitude `cos(theta)` on `S_12`
    /// and `e^{i phi} sin(theta)` on `T0_12`.
    pub fn encode(&self) -> QubitState {
        let mut amps = [Complex64::ZERO; TOTAL_DIM];
        amps[S_12] = Complex64::new(self.theta.cos(), 0.0);
        amps[FULL_T0_12] = Complex64::from_polar(self.theta.sin(), self.phi);
        QubitState::new(amps, 0.0)
    }

    /// The same logical amplitudes on arbitrary full-vector indices; used to
    /// build transfer targets on the `(2,3)` pair.
    pub fn encode_on(&self, singlet_full: usize, triplet_full: usize) -> QubitState {
        let mut amps = [Complex64::ZERO; TOTAL_DIM];
        amps[singlet_full] = Complex64::new(self.theta.cos(), 0.0);
        amps[triplet_full] = Complex64::from_polar(self.theta.sin(), self.phi);
        QubitState::new(amps, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Constant,
    LinearRamp,
}

/// One piece of a detuning schedule: hold or linear ramp over `duration` ps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub duration: f64,
    pub eps_start: DetuningVector,
    pub eps_end: DetuningVector,
    pub kind: SegmentKind,
}

impl ScheduleSegment {
    pub fn constant(eps: DetuningVector, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "segment duration must be finite and non-negative (got {duration} ps)"
            )));
        }
        Ok(Self { duration, eps_start: eps, eps_end: eps, kind: SegmentKind::Constant })
    }

    pub fn ramp(eps_start: DetuningVector, eps_end: DetuningVector, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ramp duration must be finite and positive (got {duration} ps)"
            )));
        }
        Ok(Self { duration, eps_start, eps_end, kind: SegmentKind::LinearRamp })
    }
}

/// Ordered, contiguous-in-time list of segments.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetuningSchedule {
    pub segments: Vec<ScheduleSegment>,
}

impl DetuningSchedule {
    pub fn new(segments: Vec<ScheduleSegment>) -> Self {
        Self { segments }
    }

    /// Total duration in ps.
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Unitary propagator factored into the two spin-sector blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPropagator {
    pub u_s: CMat<SINGLET_DIM>,
    pub u_t: CMat<TRIPLET_DIM>,
}

impl BlockPropagator {
    pub fn identity() -> Self {
        Self { u_s: cidentity(), u_t: cidentity() }
    }

    /// Propagator of a constant-detuning hold.
    pub fn constant(params: &DeviceParams, eps: &DetuningVector, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "propagation duration must be finite and non-negative (got {duration} ps)"
            )));
        }
        let h = build_hamiltonian(params, eps)?;
        Ok(Self { u_s: propagator(&h.h_s, duration)?, u_t: propagator(&h.h_t, duration)? })
    }

    /// Midpoint-rule propagator of a linear ramp with a fixed substep count.
    pub fn ramp_fixed(
        params: &DeviceParams,
        seg: &ScheduleSegment,
        substeps: u64,
    ) -> Result<Self> {
        let mut acc = Self::identity();
        let h_step = seg.duration / substeps as f64;
        for i in 0..substeps {
            let frac = (i as f64 + 0.5) / substeps as f64;
            let eps = seg.eps_start.lerp(&seg.eps_end, frac);
            let step = Self::constant(params, &eps, h_step)?;
            acc = step.then(&acc);
        }
        Ok(acc)
    }

    /// Midpoint-rule ramp propagator refined by substep doubling until the
    /// propagator change drops below `tol` (Frobenius norm, which bounds the
    /// 2-norm change of any propagated state).
    pub fn ramp(params: &DeviceParams, seg: &ScheduleSegment, tol: f64) -> Result<Self> {
        Self::ramp_with_cap(params, seg, tol, MAX_SUBSTEPS)
    }

    /// As [`BlockPropagator::ramp`] with an explicit substep cap.
    pub fn ramp_with_cap(
        params: &DeviceParams,
        seg: &ScheduleSegment,
        tol: f64,
        max_substeps: u64,
    ) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive (got {tol})")));
        }
        let mut n: u64 = 1;
        let mut prev = Self::ramp_fixed(params, seg, n)?;
        loop {
            n *= 2;
            let next = Self::ramp_fixed(params, seg, n)?;
            let change =
                cmat_diff_norm(&next.u_s, &prev.u_s).hypot(cmat_diff_norm(&next.u_t, &prev.u_t));
            if change < tol {
                return Ok(next);
            }
            if n >= max_substeps {
                return Err(Error::SubstepLimitExceeded { max_substeps, last_change: change });
            }
            prev = next;
        }
    }

    /// Composition `other * self`: apply `self` first, then `other`.
    pub fn then(&self, earlier: &BlockPropagator) -> Self {
        Self { u_s: cmat_mul(&self.u_s, &earlier.u_s), u_t: cmat_mul(&self.u_t, &earlier.u_t) }
    }

    pub fn adjoint(&self) -> Self {
        Self { u_s: cmat_adjoint(&self.u_s), u_t: cmat_adjoint(&self.u_t) }
    }

    /// Apply to a state, advancing its clock by `duration` ps.
    pub fn apply(&self, state: &QubitState, duration: f64) -> QubitState {
        let s = cmat_vec(&self.u_s, &state.singlet_amps());
        let t = cmat_vec(&self.u_t, &state.triplet_amps());
        let mut amps = [Complex64::ZERO; TOTAL_DIM];
        amps[..SINGLET_DIM].copy_from_slice(&s);
        amps[SINGLET_DIM..].copy_from_slice(&t);
        QubitState::new(amps, state.time + duration)
    }
}

/// Full-schedule propagator; reusable across initial states.
pub fn schedule_propagator(
    params: &DeviceParams,
    schedule: &DetuningSchedule,
    tol: f64,
) -> Result<BlockPropagator> {
    let mut acc = BlockPropagator::identity();
    for seg in &schedule.segments {
        let u = match seg.kind {
            SegmentKind::Constant => BlockPropagator::constant(params, &seg.eps_start, seg.duration)?,
            SegmentKind::LinearRamp => BlockPropagator::ramp(params, seg, tol)?,
        };
        acc = u.then(&acc);
    }
    Ok(acc)
}

/// Exact evolution under a constant detuning point.
pub fn propagate_constant(
    state: &QubitState,
    params: &DeviceParams,
    eps: &DetuningVector,
    duration: f64,
) -> Result<QubitState> {
    let u = BlockPropagator::constant(params, eps, duration)?;
    Ok(u.apply(state, duration))
}

/// Evolution through a full schedule with ramp refinement tolerance `tol`.
pub fn propagate_schedule(
    state: &QubitState,
    params: &DeviceParams,
    schedule: &DetuningSchedule,
    tol: f64,
) -> Result<QubitState> {
    let mut cur = *state;
    for seg in &schedule.segments {
        let u = match seg.kind {
            SegmentKind::Constant => BlockPropagator::constant(params, &seg.eps_start, seg.duration)?,
            SegmentKind::LinearRamp => BlockPropagator::ramp(params, seg, tol)?,
        };
        cur = u.apply(&cur, seg.duration);
    }
    Ok(cur)
}
