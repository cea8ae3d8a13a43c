//! Symmetric 3x3 tensor algebra, the elasticity tensor, and the projections
//! used to reduce the coupled system to a scalar equation with a nonlocal term.
//!
//! A symmetric matrix is stored as its six independent entries. The scalar
//! product is the full double contraction, so off-diagonal entries count
//! twice. The elasticity tensor is represented as a 6x6 matrix in the
//! orthonormal basis
//!
//! ```text
//! E11, E22, E33, (E12 + E21)/sqrt(2), (E13 + E31)/sqrt(2), (E23 + E32)/sqrt(2)
//! ```
//!
//! (Mandel components), which makes the 6x6 representation symmetric exactly
//! when the map is symmetric with respect to the double contraction, so
//! symmetry and positive-definiteness checks act directly on the matrix.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Symmetric 3x3 matrix; houses strains, stresses and the misfit strain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat3 {
    pub a11: f64,
    pub a22: f64,
    pub a33: f64,
    pub a12: f64,
    pub a13: f64,
    pub a23: f64,
}

impl SymMat3 {
    pub const ZERO: SymMat3 = SymMat3 {
        a11: 0.0,
        a22: 0.0,
        a33: 0.0,
        a12: 0.0,
        a13: 0.0,
        a23: 0.0,
    };

    pub fn new(a11: f64, a22: f64, a33: f64, a12: f64, a13: f64, a23: f64) -> Self {
        Self {
            a11,
            a22,
            a33,
            a12,
            a13,
            a23,
        }
    }

    pub fn diag(a11: f64, a22: f64, a33: f64) -> Self {
        Self::new(a11, a22, a33, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::diag(1.0, 1.0, 1.0)
    }

    /// Full double contraction; off-diagonal entries count twice.
    pub fn dot(&self, other: &SymMat3) -> f64 {
        self.a11 * other.a11
            + self.a22 * other.a22
            + self.a33 * other.a33
            + 2.0 * (self.a12 * other.a12 + self.a13 * other.a13 + self.a23 * other.a23)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22 + self.a33
    }

    pub fn scale(&self, s: f64) -> SymMat3 {
        SymMat3::new(
            s * self.a11,
            s * self.a22,
            s * self.a33,
            s * self.a12,
            s * self.a13,
            s * self.a23,
        )
    }

    pub fn add(&self, other: &SymMat3) -> SymMat3 {
        SymMat3::new(
            self.a11 + other.a11,
            self.a22 + other.a22,
            self.a33 + other.a33,
            self.a12 + other.a12,
            self.a13 + other.a13,
            self.a23 + other.a23,
        )
    }

    pub fn sub(&self, other: &SymMat3) -> SymMat3 {
        self.add(&other.scale(-1.0))
    }

    /// First column (equals the first row); the traction direction in 1D.
    pub fn first_column(&self) -> Vector3<f64> {
        Vector3::new(self.a11, self.a12, self.a13)
    }

    /// Reconstruction to a full 3x3 matrix (exactly symmetric).
    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.a11, self.a12, self.a13, self.a12, self.a22, self.a23, self.a13, self.a23,
            self.a33,
        )
    }

    /// Coordinates in the orthonormal basis used for the 6x6 representation.
    pub fn to_mandel(&self) -> Vector6<f64> {
        Vector6::new(
            self.a11,
            self.a22,
            self.a33,
            SQRT2 * self.a12,
            SQRT2 * self.a13,
            SQRT2 * self.a23,
        )
    }

    pub fn from_mandel(v: &Vector6<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3] / SQRT2, v[4] / SQRT2, v[5] / SQRT2)
    }
}

/// Symmetrized gradient of a displacement that varies only in x:
/// eps(v) = ((v,0,0) + (v,0,0)^t) / 2.
pub fn strain_of_gradient(v: &Vector3<f64>) -> SymMat3 {
    SymMat3::new(v[0], 0.0, 0.0, 0.5 * v[1], 0.5 * v[2], 0.0)
}

/// Linear, positive definite, symmetric map on symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityTensor {
    rep: Matrix6<f64>,
}

impl ElasticityTensor {
    /// Build from an explicit 6x6 representation in the documented basis.
    ///
    /// Rejects representations that are not symmetric to machine precision or
    /// not positive definite.
    pub fn from_matrix(rep: Matrix6<f64>) -> Result<Self> {
        let scale = rep.amax().max(1.0);
        for i in 0..6 {
            for j in (i + 1)..6 {
                if (rep[(i, j)] - rep[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "elasticity tensor representation is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if rep.cholesky().is_none() {
            return Err(Error::NonPositiveDefinite {
                context: "elasticity tensor",
            });
        }
        Ok(Self { rep })
    }

    /// Build from the 21 upper-triangle entries of the 6x6 representation,
    /// row-major: (0,0), (0,1), ..., (0,5), (1,1), ..., (5,5).
    pub fn from_upper_triangle(entries: &[f64; 21]) -> Result<Self> {
        let mut rep = Matrix6::zeros();
        let mut k = 0;
        for i in 0..6 {
            for j in i..6 {
                rep[(i, j)] = entries[k];
                rep[(j, i)] = entries[k];
                k += 1;
            }
        }
        Self::from_matrix(rep)
    }

    /// Isotropic tensor from the Lame pair: D eps = lambda tr(eps) I + 2 mu eps.
    ///
    /// Requires mu > 0 and 3 lambda + 2 mu > 0 (positive bulk modulus).
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "isotropic elasticity needs mu > 0 and 3*lambda + 2*mu > 0, got lambda = {lambda}, mu = {mu}"
            )));
        }
        let mut rep = Matrix6::zeros();
        for i in 0..3 {
            for j in 0..3 {
                rep[(i, j)] = lambda;
            }
            rep[(i, i)] += 2.0 * mu;
            rep[(i + 3, i + 3)] = 2.0 * mu;
        }
        Self::from_matrix(rep)
    }

    /// The identity map on symmetric matrices.
    pub fn identity() -> Self {
        Self {
            rep: Matrix6::identity(),
        }
    }

    pub fn representation(&self) -> &Matrix6<f64> {
        &self.rep
    }

    /// Apply the map: matrix-vector product in the documented basis.
    pub fn apply(&self, sigma: &SymMat3) -> SymMat3 {
        SymMat3::from_mandel(&(self.rep * sigma.to_mandel()))
    }
}

/// Projection data for the subspace of strains realizable by an x-dependent
/// displacement (only first-row/column entries nonzero).
///
/// Carries the projected misfit strain, its generating displacement gradient,
/// and the 3x3 matrix that maps a displacement gradient to the first column
/// of the associated stress.
#[derive(Debug, Clone)]
pub struct ProjectionData {
    /// Gram matrix of the subspace basis in the D-weighted scalar product.
    gram: Matrix3<f64>,
    /// D-orthogonal projection of the misfit strain onto the subspace.
    eps_star: SymMat3,
    /// Displacement gradient generating `eps_star`.
    u_star: Vector3<f64>,
    /// A v = first column of D eps(v); symmetric positive definite.
    correction_matrix: Matrix3<f64>,
}

/// Basis of the realizable-strain subspace: eps of the three unit directions.
fn subspace_basis() -> [SymMat3; 3] {
    [
        strain_of_gradient(&Vector3::new(1.0, 0.0, 0.0)),
        strain_of_gradient(&Vector3::new(0.0, 1.0, 0.0)),
        strain_of_gradient(&Vector3::new(0.0, 0.0, 1.0)),
    ]
}

/// Assemble the projection of the misfit strain and the correction matrix.
///
/// Solves the 3x3 system G c = rhs with G_kl = dot(D e_k, e_l) and
/// rhs_k = dot(D misfit, e_k), then reads the projected strain off the
/// basis coefficients.
pub fn build_projection(d: &ElasticityTensor, misfit: &SymMat3) -> Result<ProjectionData> {
    let basis = subspace_basis();
    let d_basis = [
        d.apply(&basis[0]),
        d.apply(&basis[1]),
        d.apply(&basis[2]),
    ];

    let mut gram = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    let d_misfit = d.apply(misfit);
    for k in 0..3 {
        for l in 0..3 {
            gram[(k, l)] = d_basis[k].dot(&basis[l]);
        }
        rhs[k] = d_misfit.dot(&basis[k]);
    }

    let chol = gram.cholesky().ok_or(Error::NonPositiveDefinite {
        context: "projection Gram matrix",
    })?;
    let coeffs = chol.solve(&rhs);

    let mut eps_star = SymMat3::ZERO;
    for k in 0..3 {
        eps_star = eps_star.add(&basis[k].scale(coeffs[k]));
    }
    let u_star = Vector3::new(eps_star.a11, 2.0 * eps_star.a12, 2.0 * eps_star.a13);

    // A_jk = (D eps(unit_k)) first column, j-th entry.
    let mut correction_matrix = Matrix3::zeros();
    for k in 0..3 {
        let col = d_basis[k].first_column();
        for j in 0..3 {
            correction_matrix[(j, k)] = col[j];
        }
    }
    if correction_matrix.cholesky().is_none() {
        return Err(Error::NonPositiveDefinite {
            context: "correction matrix",
        });
    }

    Ok(ProjectionData {
        gram,
        eps_star,
        u_star,
        correction_matrix,
    })
}

impl ProjectionData {
    pub fn gram(&self) -> &Matrix3<f64> {
        &self.gram
    }

    pub fn eps_star(&self) -> &SymMat3 {
        &self.eps_star
    }

    pub fn u_star(&self) -> &Vector3<f64> {
        &self.u_star
    }

    pub fn correction_matrix(&self) -> &Matrix3<f64> {
        &self.correction_matrix
    }
}
