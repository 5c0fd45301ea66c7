//! Spectrum of `𝒜u = −u_xx − αu` on (0,1) with Dirichlet conditions.
//!
//! Eigenpairs are known in closed form: `λ_j = (πj)² − α` with
//! `φ_j(x) = sin(πjx)`. Eigenfunctions are kept unnormalised, so
//! `⟨φ_i, φ_j⟩ = δ_ij / 2`; the feedback law is written against this
//! convention.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Tolerance for treating a cutoff or shift as coinciding with an eigenvalue.
pub const EIGEN_COINCIDENCE_TOL: f64 = 1e-9;

/// Coefficients of `u_t = u_xx + αu − βu²`. `beta = 0` is the linearised model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ModelParams {
    /// `alpha = 0` is accepted so that the pure heat equation can be used as a
    /// reference problem for the stepper.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn linearized(self) -> Self {
        Self { beta: 0.0, ..self }
    }
}

/// `λ_j = (πj)² − α`.
pub fn eigenvalue(alpha: f64, j: usize) -> f64 {
    debug_assert!(j >= 1, "modes are indexed from 1");
    let k = PI * j as f64;
    k * k - alpha
}

/// `φ_j′(1) = πj·cos(πj) = πj·(−1)^j`.
pub fn boundary_normal_derivative(j: usize) -> f64 {
    debug_assert!(j >= 1, "modes are indexed from 1");
    let k = PI * j as f64;
    if j.is_multiple_of(2) {
        k
    } else {
        -k
    }
}

/// Largest `N` with `λ_N < ρ`. Errors when `ρ` sits on an eigenvalue.
pub fn unstable_mode_count(alpha: f64, rho: f64) -> Result<usize> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::InvalidParameter(format!("rho must be finite and > 0, got {rho}")));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be finite, got {alpha}")));
    }
    let mut n = 0;
    loop {
        let j = n + 1;
        let lambda = eigenvalue(alpha, j);
        if (lambda - rho).abs() <= EIGEN_COINCIDENCE_TOL {
            return Err(Error::AmbiguousCutoff { rho, j, lambda });
        }
        if lambda >= rho {
            return Ok(n);
        }
        n = j;
    }
}

/// Eigen-data of the modes below the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    alpha: f64,
    rho: f64,
    lambdas: Vec<f64>,
    normal_derivs: Vec<f64>,
}

impl SpectralData {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        let n = unstable_mode_count(alpha, rho)?;
        Ok(Self {
            alpha,
            rho,
            lambdas: (1..=n).map(|j| eigenvalue(alpha, j)).collect(),
            normal_derivs: (1..=n).map(boundary_normal_derivative).collect(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n_unstable(&self) -> usize {
        self.lambdas.len()
    }

    /// `λ_1 … λ_N`, strictly increasing.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `φ_1′(1) … φ_N′(1)`.
    pub fn normal_derivs(&self) -> &[f64] {
        &self.normal_derivs
    }

    /// Eigenvalue of any mode, including those above the cutoff.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        eigenvalue(self.alpha, j)
    }
}

/// Uniform mesh `x_i = i/m`, `i = 0..=m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    m: usize,
    h: f64,
}

impl Grid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 intervals, got {m}")));
        }
        Ok(Self { m, h: 1.0 / m as f64 })
    }

    /// Number of intervals.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.m {
            1.0
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m).map(|i| self.x(i)).collect()
    }

    /// Composite trapezoid weights over the whole mesh.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.h; self.m + 1];
        w[0] *= 0.5;
        w[self.m] *= 0.5;
        w
    }
}

/// A solution profile sampled on a [`Grid`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl StateField {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at node {i}")));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values, time }
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self { grid, values: vec![0.0; grid.len()], time }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn left(&self) -> f64 {
        self.values[0]
    }

    pub fn right(&self) -> f64 {
        self.values[self.grid.m]
    }
}

/// `φ_j` sampled at the nodes, endpoints pinned to zero.
pub fn eigenfunction_values(j: usize, grid: &Grid) -> StateField {
    let k = PI * j as f64;
    let mut field = StateField::from_fn(*grid, 0.0, |x| (k * x).sin());
    let m = grid.m();
    field.values[0] = 0.0;
    field.values[m] = 0.0;
    field
}

/// Observation window `[a, b] ⊆ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidWindow { a, b, reason: "endpoints must be finite" });
        }
        if a < 0.0 || b > 1.0 {
            return Err(Error::InvalidWindow { a, b, reason: "window must lie inside [0, 1]" });
        }
        if a >= b {
            return Err(Error::InvalidWindow { a, b, reason: "window is empty or inverted" });
        }
        Ok(Self { a, b })
    }

    pub fn full() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn is_full(&self) -> bool {
        self.a == 0.0 && self.b == 1.0
    }

    /// Node indices of the endpoints after snapping to the nearest nodes.
    pub fn snap(&self, grid: &Grid) -> Result<(usize, usize)> {
        let m = grid.m() as f64;
        let lo = (self.a * m).round() as usize;
        let hi = (self.b * m).round() as usize;
        if hi < lo + 2 {
            return Err(Error::InvalidWindow {
                a: self.a,
                b: self.b,
                reason: "window narrower than 2 grid cells",
            });
        }
        Ok((lo, hi))
    }
}

/// Precomputed trapezoid weights `w_i·sin(πj x_i)` over a snapped window.
#[derive(Debug, Clone)]
pub struct ModalProjector {
    lo: usize,
    hi: usize,
    n_points: usize,
    weights: Vec<Vec<f64>>,
}

impl ModalProjector {
    pub fn new(grid: &Grid, n_modes: usize, window: Window) -> Result<Self> {
        let (lo, hi) = window.snap(grid)?;
        let h = grid.h();
        let weights = (1..=n_modes)
            .map(|j| {
                let k = PI * j as f64;
                (lo..=hi)
                    .map(|i| {
                        let w = if i == lo || i == hi { 0.5 * h } else { h };
                        w * (k * grid.x(i)).sin()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { lo, hi, n_points: grid.len(), weights })
    }

    pub fn n_modes(&self) -> usize {
        self.weights.len()
    }

    pub fn project_mode(&self, values: &[f64], j: usize) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        self.weights[j - 1]
            .iter()
            .zip(&values[self.lo..=self.hi])
            .map(|(w, u)| w * u)
            .sum()
    }

    /// The modal vector `(⟨u, φ_1⟩_{[a,b]}, …, ⟨u, φ_N⟩_{[a,b]})`.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        (1..=self.n_modes()).map(|j| self.project_mode(values, j)).collect()
    }
}

/// Trapezoid approximation of `∫_a^b u(x) sin(πjx) dx` with the window
/// snapped to the mesh.
pub fn modal_projection(field: &StateField, j: usize, window: Window) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidParameter("modes are indexed from 1".into()));
    }
    let (lo, hi) = window.snap(field.grid())?;
    let h = field.grid().h();
    let k = PI * j as f64;
    let grid = field.grid();
    Ok((lo..=hi)
        .map(|i| {
            let w = if i == lo || i == hi { 0.5 * h } else { h };
            w * field.values[i] * (k * grid.x(i)).sin()
        })
        .sum())
}
