//! Quasi-static elastic subsystem for a given order parameter and body force.
//!
//! Two independent routes are provided. The production path evaluates the
//! closed-form representation of (u, T): a rank-one nonlocal term in the
//! integral of S plus a correction boundary value problem that carries the
//! body force. The oracle path discretizes the equilibrium equation directly
//! as a block-tridiagonal system; it exists so the closed form can be
//! cross-validated instead of trusted.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::{block_thomas_solve, thomas_solve};
use crate::material::MaterialParams;
use crate::tensor::{strain_of_gradient, ProjectionData, SymMat3};

/// Nodal displacement and stress fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticSolution {
    pub displacement: Vec<Vector3<f64>>,
    pub stress: Vec<SymMat3>,
}

impl ElasticSolution {
    pub fn zeros(n: usize) -> Self {
        Self {
            displacement: vec![Vector3::zeros(); n],
            stress: vec![SymMat3::ZERO; n],
        }
    }

    /// Nodal values of dot(T, m); the only trace of T the scalar evolution sees.
    pub fn stress_dot(&self, m: &SymMat3) -> Vec<f64> {
        self.stress.iter().map(|t| t.dot(m)).collect()
    }

    /// Max residual of the discrete equilibrium -(T^1)_x = b over the
    /// stencil-uniform interior (the two nodes touching the one-sided
    /// boundary gradients are excluded; the second-order estimate does not
    /// cover the stencil transition).
    pub fn equilibrium_residual(&self, b: &[Vector3<f64>], grid: &Grid1D) -> f64 {
        let n = grid.len();
        let dx = grid.dx();
        let mut worst = 0.0f64;
        for i in 2..n - 2 {
            let t1x = (self.stress[i + 1].first_column() - self.stress[i - 1].first_column())
                / (2.0 * dx);
            worst = worst.max((t1x + b[i]).amax());
        }
        worst
    }
}

/// Correction fields transporting the body force: w solves the constant
/// coefficient boundary value problem, sigma is its stress.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub w: Vec<Vector3<f64>>,
    pub sigma: Vec<SymMat3>,
}

impl Correction {
    pub fn zeros(n: usize) -> Self {
        Self {
            w: vec![Vector3::zeros(); n],
            sigma: vec![SymMat3::ZERO; n],
        }
    }
}

/// Solve A w_xx = -b with w = 0 at both ends by second-order central
/// differences: three scalar tridiagonal solves after pulling A^{-1} through.
/// The returned stress is D eps(w_x) with the gradient by second-order
/// differences.
pub fn solve_correction(
    b: &[Vector3<f64>],
    grid: &Grid1D,
    proj: &ProjectionData,
    params: &MaterialParams,
) -> Result<Correction> {
    let n = grid.len();
    debug_assert_eq!(b.len(), n);
    let chol = proj
        .correction_matrix()
        .cholesky()
        .ok_or(Error::NonPositiveDefinite {
            context: "correction matrix",
        })?;

    // g = A^{-1} b nodewise, then w'' = -g componentwise.
    let g: Vec<Vector3<f64>> = b.iter().map(|bi| chol.solve(bi)).collect();

    let dx2 = grid.dx() * grid.dx();
    let m = n - 2;
    let lower = vec![-1.0; m];
    let diag = vec![2.0; m];
    let upper = vec![-1.0; m];
    let mut w = vec![Vector3::zeros(); n];
    for comp in 0..3 {
        let rhs: Vec<f64> = (1..n - 1).map(|i| dx2 * g[i][comp]).collect();
        let sol = thomas_solve(&lower, &diag, &upper, &rhs)?;
        for (i, v) in sol.into_iter().enumerate() {
            w[i + 1][comp] = v;
        }
    }

    let sigma = stress_from_displacement_gradient(&w, grid, params);
    Ok(Correction { w, sigma })
}

fn stress_from_displacement_gradient(
    u: &[Vector3<f64>],
    grid: &Grid1D,
    params: &MaterialParams,
) -> Vec<SymMat3> {
    let grads = vector_derivative(u, grid);
    grads
        .iter()
        .map(|g| params.elasticity.apply(&strain_of_gradient(g)))
        .collect()
}

/// Componentwise second-order derivative of a nodal vector field.
pub fn vector_derivative(u: &[Vector3<f64>], grid: &Grid1D) -> Vec<Vector3<f64>> {
    let mut out = vec![Vector3::zeros(); u.len()];
    for comp in 0..3 {
        let scalar: Vec<f64> = u.iter().map(|v| v[comp]).collect();
        for (o, d) in out.iter_mut().zip(grid.derivative(&scalar)) {
            o[comp] = d;
        }
    }
    out
}

/// Closed-form representation of the elastic solution for a given order
/// parameter: a cumulative integral of S carried by the projected misfit
/// plus the correction fields.
pub fn solve_elastic(
    s: &[f64],
    correction: &Correction,
    proj: &ProjectionData,
    params: &MaterialParams,
    grid: &Grid1D,
) -> ElasticSolution {
    let n = grid.len();
    debug_assert_eq!(s.len(), n);
    let cumulative = grid.cumulative_trapezoid(s);
    let total = cumulative[n - 1];
    let length = grid.length();

    let d_star = params.elasticity.apply(proj.eps_star());
    let d_star_minus_misfit = params
        .elasticity
        .apply(&proj.eps_star().sub(&params.misfit));
    let mean_term = d_star.scale(-total / length);

    let mut displacement = Vec::with_capacity(n);
    let mut stress = Vec::with_capacity(n);
    for i in 0..n {
        let frac = (grid.x(i) - grid.a()) / length;
        displacement.push(proj.u_star() * (cumulative[i] - frac * total) + correction.w[i]);
        stress.push(
            d_star_minus_misfit
                .scale(s[i])
                .add(&mean_term)
                .add(&correction.sigma[i]),
        );
    }
    ElasticSolution {
        displacement,
        stress,
    }
}

/// Independent oracle: discretize -(D(eps(u_x) - misfit S))^1_x = b in flux
/// form as a block-tridiagonal SPD system in the nodal displacements, then
/// recover T from the constitutive relation with a second-order gradient.
pub fn fd_elastic_oracle(
    s: &[f64],
    b: &[Vector3<f64>],
    params: &MaterialParams,
    grid: &Grid1D,
) -> Result<ElasticSolution> {
    let n = grid.len();
    debug_assert!(s.len() == n && b.len() == n);
    let dx = grid.dx();

    // A v = first column of D eps(v); d_bar = first column of D misfit.
    let mut a = Matrix3::zeros();
    for k in 0..3 {
        let mut unit = Vector3::zeros();
        unit[k] = 1.0;
        let col = params
            .elasticity
            .apply(&strain_of_gradient(&unit))
            .first_column();
        for j in 0..3 {
            a[(j, k)] = col[j];
        }
    }
    let d_bar = params.elasticity.apply(&params.misfit).first_column();

    let m = n - 2;
    if m == 0 {
        return Err(Error::SingularSystem {
            context: "elastic oracle assembly",
        });
    }
    let lower = vec![-a; m];
    let upper = vec![-a; m];
    let diag = vec![a * 2.0; m];
    let rhs: Vec<Vector3<f64>> = (1..n - 1)
        .map(|i| b[i] * dx * dx - d_bar * (0.5 * dx * (s[i + 1] - s[i - 1])))
        .collect();
    let interior = block_thomas_solve(&lower, &diag, &upper, &rhs)?;

    let mut displacement = vec![Vector3::zeros(); n];
    for (i, v) in interior.into_iter().enumerate() {
        displacement[i + 1] = v;
    }

    let grads = vector_derivative(&displacement, grid);
    let stress: Vec<SymMat3> = grads
        .iter()
        .zip(s)
        .map(|(g, &si)| {
            params
                .elasticity
                .apply(&strain_of_gradient(g).sub(&params.misfit.scale(si)))
        })
        .collect();
    Ok(ElasticSolution {
        displacement,
        stress,
    })
}
