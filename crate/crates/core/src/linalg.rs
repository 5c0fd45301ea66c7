//! Banded solvers shared by the lifting problem and the time stepper.

use crate::{Error, Result};

/// LU factorisation of a tridiagonal matrix with partial (row) pivoting.
///
/// Same elimination order as LAPACK `?gttrf`: a row interchange introduces a
/// second super-diagonal in `U`.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    upper2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    /// Factor the matrix with sub-diagonal `lower`, diagonal `diag` and
    /// super-diagonal `upper`.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty tridiagonal system".into()));
        }
        if lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::DimensionMismatch { expected: n - 1, got: lower.len().min(upper.len()) });
        }
        let scale = diag
            .iter()
            .chain(lower)
            .chain(upper)
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }

        let tiny = f64::EPSILON * n as f64 * scale;
        if let Some(i) = d.iter().position(|p| p.abs() <= tiny) {
            return Err(Error::SingularSystem(format!(
                "zero pivot at row {i} of a {n}x{n} tridiagonal system"
            )));
        }
        Ok(Self { lower: dl, diag: d, upper: du, upper2: du2, swapped })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Overwrite `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.diag.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = rhs[i];
                rhs[i] = rhs[i + 1];
                rhs[i + 1] = temp - self.lower[i] * rhs[i];
            } else {
                rhs[i + 1] -= self.lower[i] * rhs[i];
            }
        }
        rhs[n - 1] /= self.diag[n - 1];
        if n > 1 {
            rhs[n - 2] = (rhs[n - 2] - self.upper[n - 2] * rhs[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            rhs[i] = (rhs[i] - self.upper[i] * rhs[i + 1] - self.upper2[i] * rhs[i + 2]) / self.diag[i];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
