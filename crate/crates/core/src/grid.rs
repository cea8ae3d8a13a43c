//! Uniform node-centered 1D grid.

use crate::error::{Error, Result};

/// Uniform grid on a closed interval, boundary nodes included.
///
/// Dirichlet conditions are imposed exactly on the first and last node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    a: f64,
    d: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(a: f64, d: f64, n: usize) -> Result<Self> {
        if !(a < d) {
            return Err(Error::InvalidParameter(format!(
                "domain endpoints must satisfy a < d, got a = {a}, d = {d}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 nodes, got {n}"
            )));
        }
        Ok(Self { a, d, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Domain length d - a.
    pub fn length(&self) -> f64 {
        self.d - self.a
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.d - self.a) / (self.n - 1) as f64
    }

    /// Coordinate of node `i`; endpoints land exactly on `a` and `d`.
    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.d
        } else {
            self.a + i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Refined grid with the same endpoints and doubled resolution
    /// (every coarse node is also a fine node).
    pub fn refined(&self) -> Self {
        Self {
            a: self.a,
            d: self.d,
            n: 2 * self.n - 1,
        }
    }

    /// Composite trapezoid rule over the whole domain.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        let dx = self.dx();
        let interior: f64 = f[1..self.n - 1].iter().sum();
        dx * (0.5 * (f[0] + f[self.n - 1]) + interior)
    }

    /// Cumulative trapezoid integral from `a` to every node.
    pub fn cumulative_trapezoid(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.n);
        let dx = self.dx();
        let mut out = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 1..self.n {
            acc += 0.5 * dx * (f[i - 1] + f[i]);
            out.push(acc);
        }
        out
    }

    /// Second-order first derivative: central in the interior, one-sided at the ends.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.n);
        let dx = self.dx();
        let n = self.n;
        let mut out = vec![0.0; n];
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
        for i in 1..n - 1 {
            out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
        }
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
        out
    }

    /// Second difference (f[i-1] - 2 f[i] + f[i+1]) / dx^2 in the interior, 0 at the ends.
    pub fn second_difference(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.n);
        let dx2 = self.dx() * self.dx();
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / dx2;
        }
        out
    }
}
