//! Block Hamiltonian of the three-dot, two-electron `S_z = 0` subspace and
//! the second-order (Schrieffer-Wolff) effective couplings.
//!
//! Spin sectors never mix (no spin-orbit coupling, no magnetic field), so the
//! Hamiltonian splits into a 6x6 singlet block and a 3x3 triplet block. All
//! entries are real; the blocks are stored as real symmetric matrices and
//! promoted to complex only inside the propagators.

use serde::{Deserialize, Serialize};

use crate::basis::{SINGLET_DIM, TOTAL_DIM, TRIPLET_DIM};
use crate::error::Error;
use crate::linalg::Mat;
use crate::params::{DetuningVector, DeviceParams};
use crate::Result;

/// Magnitude floor below which an energy denominator is treated as singular.
pub const DENOMINATOR_FLOOR: f64 = 1e-9;

/// The two spin-sector blocks of the Hamiltonian, in meV.
///
/// Basis ordering follows [`crate::basis`]: singlet
/// `S_33, S_23, S_13, S_22, S_12, S_11` and triplet `T0_12, T0_13, T0_23`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianBlocks {
    pub h_s: Mat<SINGLET_DIM>,
    pub h_t: Mat<TRIPLET_DIM>,
}

impl HamiltonianBlocks {
    /// Assemble the full block-diagonal 9x9 matrix (singlet block first).
    pub fn full(&self) -> [[f64; TOTAL_DIM]; TOTAL_DIM] {
        let mut m = [[0.0; TOTAL_DIM]; TOTAL_DIM];
        for i in 0..SINGLET_DIM {
            for j in 0..SINGLET_DIM {
                m[i][j] = self.h_s[i][j];
            }
        }
        for i in 0..TRIPLET_DIM {
            for j in 0..TRIPLET_DIM {
                m[SINGLET_DIM + i][SINGLET_DIM + j] = self.h_t[i][j];
            }
        }
        m
    }
}

/// Build both Hamiltonian blocks for the given device and detuning point.
///
/// The doubly-occupied singlets sit at `U - 2(eps_i + mu)`, the separated
/// singlets at `J_e + K - eps_i - eps_j - 2 mu` (`-J_e` for triplets), the
/// (1,0,1) states at `-(eps_1 + eps_3 + 2 mu)`, and hopping couples charge
/// configurations with `-t` (`-sqrt(2) t` where a doubly-occupied dot is
/// involved).
pub fn build_hamiltonian(params: &DeviceParams, eps: &DetuningVector) -> Result<HamiltonianBlocks> {
    if !eps.is_finite() {
        return Err(Error::NonFinite("eps"));
    }
    let DeviceParams { t, j_e, u, k, mu } = *params;
    let [e1, e2, e3] = eps.eps;
    let s2 = std::f64::consts::SQRT_2 * t;
    let h_s = [
        [u - 2.0 * (e3 + mu), -s2, 0.0, 0.0, 0.0, 0.0],
        [-s2, j_e + k - e2 - e3 - 2.0 * mu, -t, -s2, 0.0, 0.0],
        [0.0, -t, -(e1 + e3 + 2.0 * mu), 0.0, -t, 0.0],
        [0.0, -s2, 0.0, u - 2.0 * (e2 + mu), -s2, 0.0],
        [0.0, 0.0, -t, -s2, j_e + k - e1 - e2 - 2.0 * mu, -s2],
        [0.0, 0.0, 0.0, 0.0, -s2, u - 2.0 * (e1 + mu)],
    ];
    let h_t = [
        [-j_e + k - e1 - e2 - 2.0 * mu, -t, 0.0],
        [-t, -(e1 + e3 + 2.0 * mu), -t],
        [0.0, -t, -j_e + k - e2 - e3 - 2.0 * mu],
    ];
    Ok(HamiltonianBlocks { h_s, h_t })
}

/// Second-order effective couplings between the end states, in meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwCouplings {
    /// Coupling between `S_12` and `S_23`.
    pub j_s: f64,
    /// Coupling between `T0_12` and `T0_23`.
    pub j_t: f64,
}

fn checked_denominator(value: f64) -> Result<f64> {
    if value.abs() < DENOMINATOR_FLOOR {
        Err(Error::SingularDenominator { value, floor: DENOMINATOR_FLOOR })
    } else {
        Ok(value)
    }
}

/// Effective couplings at the symmetric resonance point `eps_1 = eps_3 = eps`.
///
/// `j_s = -t^2 (-4/(U - K + eps) + 2/(K + eps))` and
/// `j_t = -t^2 * 2/(K + eps)`. At `U = 2K` the magnitudes coincide:
/// `|j_s| = |j_t| = 2 t^2 / (K + eps)`.
pub fn sw_effective_couplings(params: &DeviceParams, eps_resonant: f64) -> Result<SwCouplings> {
    if !eps_resonant.is_finite() {
        return Err(Error::NonFinite("eps_resonant"));
    }
    let d_s = checked_denominator(params.u - params.k + eps_resonant)?;
    let d_t = checked_denominator(params.k + eps_resonant)?;
    let t2 = params.t * params.t;
    // Both couplings share the rounded 2/(K + eps) factor so that the
    // matched-Coulomb identity |j_s| = |j_t| at U = 2K holds bit-exactly.
    let j_s = -t2 * (-4.0 / d_s + 2.0 / d_t);
    let j_t = -t2 * (2.0 / d_t);
    Ok(SwCouplings { j_s, j_t })
}

/// Leading-order error of the combined coupling when `U = 2K + delta_u`.
///
/// Returns `(approx_error, exact_error)` where the exact value is
/// `j_s(U = 2K + delta_u) + j_t` from the closed-form couplings and the
/// leading-order expansion in `delta_u` is `-4 t^2 delta_u / (K + eps)^2`.
/// Their difference is `O(delta_u^2)`.
pub fn leading_order_coupling_error(
    params: &DeviceParams,
    eps_resonant: f64,
    delta_u: f64,
) -> Result<(f64, f64)> {
    if !delta_u.is_finite() {
        return Err(Error::NonFinite("delta_u"));
    }
    let perturbed = DeviceParams {
        u: 2.0 * params.k + delta_u,
        ..*params
    };
    let sw = sw_effective_couplings(&perturbed, eps_resonant)?;
    let exact_error = sw.j_s + sw.j_t;
    let d_t = checked_denominator(params.k + eps_resonant)?;
    let approx_error = -4.0 * params.t * params.t * delta_u / (d_t * d_t);
    Ok((approx_error, exact_error))
}
