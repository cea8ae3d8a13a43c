//! Tridiagonal direct solvers used by the elliptic and parabolic solves.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Thomas algorithm for a scalar tridiagonal system.
///
/// `lower[i]` couples row i to i-1 (lower[0] unused), `upper[i]` couples row i
/// to i+1 (last entry unused).
pub fn thomas_solve(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < f64::MIN_POSITIVE {
        return Err(Error::SingularSystem {
            context: "tridiagonal solve",
        });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.abs() < f64::MIN_POSITIVE {
            return Err(Error::SingularSystem {
                context: "tridiagonal solve",
            });
        }
        c[i] = upper[i] / pivot;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Block Thomas algorithm for a tridiagonal system with 3x3 blocks.
///
/// Conventions match `thomas_solve`; block inverses exist because the
/// assembled systems are symmetric positive definite.
pub fn block_thomas_solve(
    lower: &[Matrix3<f64>],
    diag: &[Matrix3<f64>],
    upper: &[Matrix3<f64>],
    rhs: &[Vector3<f64>],
) -> Result<Vec<Vector3<f64>>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c: Vec<Matrix3<f64>> = Vec::with_capacity(n);
    let mut d: Vec<Vector3<f64>> = Vec::with_capacity(n);
    let inv = diag[0].try_inverse().ok_or(Error::SingularSystem {
        context: "block tridiagonal solve",
    })?;
    c.push(inv * upper[0]);
    d.push(inv * rhs[0]);
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        let inv = denom.try_inverse().ok_or(Error::SingularSystem {
            context: "block tridiagonal solve",
        })?;
        c.push(inv * upper[i]);
        d.push(inv * (rhs[i] - lower[i] * d[i - 1]));
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}
