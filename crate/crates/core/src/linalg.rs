//! Dense linear algebra for the tiny (3x3 and 6x6) blocks.
//!
//! The eigensolver is a cyclic Jacobi iteration on real symmetric matrices.
//! All blocks constructed in this crate have real entries, so real symmetric
//! diagonalization is sufficient; complex arithmetic appears only in the
//! unitary propagators built from the spectra.

use num_complex::Complex64;

use crate::error::Error;
use crate::params::HBAR_MEV_PS;
use crate::Result;

/// Real square matrix with static dimension.
pub type Mat<const N: usize> = [[f64; N]; N];
/// Complex square matrix with static dimension.
pub type CMat<const N: usize> = [[Complex64; N]; N];

pub fn czeros<const N: usize>() -> CMat<N> {
    [[Complex64::ZERO; N]; N]
}

pub fn cidentity<const N: usize>() -> CMat<N> {
    let mut m = czeros();
    for i in 0..N {
        m[i][i] = Complex64::ONE;
    }
    m
}

/// Frobenius norm of the strictly off-diagonal part.
fn off_diag_norm<const N: usize>(m: &Mat<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += m[i][j] * m[i][j];
            }
        }
    }
    s.sqrt()
}

fn frobenius<const N: usize>(m: &Mat<N>) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

const MAX_JACOBI_SWEEPS: usize = 64;
const OFF_DIAG_THRESHOLD: f64 = 1e-13;

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns ascending eigenvalues and the matrix whose columns are the
/// corresponding orthonormal eigenvectors. Convergence is declared when the
/// off-diagonal Frobenius norm drops below `1e-13` relative to the matrix
/// scale.
pub fn sym_eigen<const N: usize>(m: &Mat<N>) -> Result<([f64; N], Mat<N>)> {
    let mut a = *m;
    let mut v: Mat<N> = [[0.0; N]; N];
    for i in 0..N {
        v[i][i] = 1.0;
    }
    let scale = frobenius(&a).max(1.0);
    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        if off_diag_norm(&a) <= OFF_DIAG_THRESHOLD * scale {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq.abs() <= f64::EPSILON * scale * 1e-3 {
                    continue;
                }
                // Classic Jacobi rotation annihilating a[p][q].
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..N {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..N {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..N {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged && off_diag_norm(&a) > OFF_DIAG_THRESHOLD * scale {
        return Err(Error::EigenNonConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }
    let mut vals = [0.0; N];
    for i in 0..N {
        vals[i] = a[i][i];
    }
    // Sort ascending, permuting eigenvector columns alongside.
    let mut order: [usize; N] = [0; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let mut sorted_vals = [0.0; N];
    let mut sorted_vecs: Mat<N> = [[0.0; N]; N];
    for (dst, &src) in order.iter().enumerate() {
        sorted_vals[dst] = vals[src];
        for r in 0..N {
            sorted_vecs[r][dst] = v[r][src];
        }
    }
    Ok((sorted_vals, sorted_vecs))
}

/// Unitary `exp(-i H dt / hbar)` for a real symmetric `H` (meV) and `dt` (ps).
pub fn propagator<const N: usize>(h: &Mat<N>, dt: f64) -> Result<CMat<N>> {
    let (vals, vecs) = sym_eigen(h)?;
    let mut u = czeros::<N>();
    // u = V diag(e^{-i w dt/hbar}) V^T
    let phases: Vec<Complex64> = vals
        .iter()
        .map(|w| Complex64::from_polar(1.0, -w * dt / HBAR_MEV_PS))
        .collect();
    for i in 0..N {
        for j in 0..N {
            let mut acc = Complex64::ZERO;
            for k in 0..N {
                acc += phases[k] * vecs[i][k] * vecs[j][k];
            }
            u[i][j] = acc;
        }
    }
    Ok(u)
}

pub fn cmat_mul<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = czeros::<N>();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == Complex64::ZERO {
                continue;
            }
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn cmat_vec<const N: usize>(a: &CMat<N>, x: &[Complex64; N]) -> [Complex64; N] {
    let mut out = [Complex64::ZERO; N];
    for i in 0..N {
        let mut acc = Complex64::ZERO;
        for j in 0..N {
            acc += a[i][j] * x[j];
        }
        out[i] = acc;
    }
    out
}

/// Conjugate transpose.
pub fn cmat_adjoint<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut out = czeros::<N>();
    for i in 0..N {
        for j in 0..N {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Frobenius norm of the elementwise difference.
pub fn cmat_diff_norm<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}
