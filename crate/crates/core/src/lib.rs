//! One-dimensional simulator for martensitic phase transitions driven by
//! configurational forces.
//!
//! The model couples quasi-static linear elasticity with eigenstrain to a
//! degenerate parabolic evolution of a scalar order parameter. The crate
//! provides
//!
//! - exact small-dimension tensor algebra and the projections that reduce the
//!   coupled system to a scalar equation with a rank-one nonlocal term
//!   ([`tensor`]),
//! - the constitutive laws: double-well potential, free energy and the sharp
//!   and regularized Hamiltonians ([`material`]),
//! - a closed-form elastic solver plus an independent finite-difference
//!   oracle ([`elasticity`]),
//! - kappa-regularized time integration of the order-parameter equation
//!   ([`evolution`]),
//! - executable analogues of the model's structural properties: maximum
//!   principle and energy monitors, a dissipation check, and a sampled
//!   verifier of the viscosity-solution inequalities ([`diagnostics`]),
//! - a sharp-interface reference integrator for the free-boundary form of
//!   the model ([`sharp`]).

pub mod diagnostics;
pub mod elasticity;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod linalg;
pub mod material;
pub mod presets;
pub mod sharp;
pub mod study;
pub mod tensor;

pub use error::{Error, Result};
pub use grid::Grid1D;
pub use material::{DoubleWell, MaterialParams};
pub use tensor::{ElasticityTensor, SymMat3};
