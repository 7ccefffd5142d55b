use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Reduced Planck constant in meV*ps (CODATA).
///
/// All internal durations are picoseconds and all energies meV; command-line
/// and file interfaces convert from nanoseconds at the boundary.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;

/// Picoseconds per nanosecond.
pub const PS_PER_NS: f64 = 1000.0;

/// Physical constants of the dot chain. Energies in meV.
///
/// `t` is the nearest-neighbour tunnel coupling, `j_e` the spin exchange
/// energy, `u` the intradot Coulomb energy, `k` the nearest-neighbour
/// interdot Coulomb energy and `mu` the common electrochemical potential.
/// `mu` enters only as a uniform diagonal shift (a global phase) and
/// defaults to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub t: f64,
    pub j_e: f64,
    pub u: f64,
    pub k: f64,
    pub mu: f64,
}

impl DeviceParams {
    /// Validated constructor with `mu = 0`.
    pub fn new(t: f64, j_e: f64, u: f64, k: f64) -> Result<Self> {
        Self::with_mu(t, j_e, u, k, 0.0)
    }

    pub fn with_mu(t: f64, j_e: f64, u: f64, k: f64, mu: f64) -> Result<Self> {
        for (v, name) in [(t, "t"), (j_e, "j_e"), (u, "u"), (k, "k"), (mu, "mu")] {
            if !v.is_finite() {
                return Err(Error::NonFinite(match name {
                    "t" => "t",
                    "j_e" => "j_e",
                    "u" => "u",
                    "k" => "k",
                    _ => "mu",
                }));
            }
        }
        if t < 0.0 || j_e < 0.0 || u < 0.0 || k < 0.0 {
            return Err(Error::InvalidParams(format!(
                "t, j_e, u, k must be non-negative (t={t}, j_e={j_e}, u={u}, k={k})"
            )));
        }
        if u < k {
            return Err(Error::InvalidParams(format!(
                "intradot repulsion must not be below interdot repulsion (u={u} < k={k})"
            )));
        }
        Ok(Self { t, j_e, u, k, mu })
    }

    /// Copy with the intradot Coulomb energy offset by `delta_u` meV.
    pub fn with_u_offset(mut self, delta_u: f64) -> Self {
        self.u += delta_u;
        self
    }
}

/// Per-dot detuning energies `(eps_1, eps_2, eps_3)` in meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningVector {
    pub eps: [f64; 3],
}

impl DetuningVector {
    pub fn new(eps1: f64, eps2: f64, eps3: f64) -> Self {
        Self { eps: [eps1, eps2, eps3] }
    }

    pub const ZERO: Self = Self { eps: [0.0; 3] };

    pub fn is_finite(&self) -> bool {
        self.eps.iter().all(|e| e.is_finite())
    }

    /// Uniform shift of all three detunings. Shifts every diagonal entry of
    /// both Hamiltonian blocks by `-2c` and therefore changes dynamics only
    /// by a global phase.
    pub fn shifted(&self, c: f64) -> Self {
        Self { eps: [self.eps[0] + c, self.eps[1] + c, self.eps[2] + c] }
    }

    /// Componentwise linear interpolation, `frac` in `[0, 1]`.
    pub fn lerp(&self, other: &Self, frac: f64) -> Self {
        let mut eps = [0.0; 3];
        for i in 0..3 {
            eps[i] = self.eps[i] + (other.eps[i] - self.eps[i]) * frac;
        }
        Self { eps }
    }
}

impl From<[f64; 3]> for DetuningVector {
    fn from(eps: [f64; 3]) -> Self {
        Self { eps }
    }
}
