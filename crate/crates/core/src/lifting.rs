//! The lifting map `D_γ`, the modal identities it satisfies, and the
//! reduced closed-loop dynamics of the unstable modes.
//!
//! `D_γ V = ψ` solves, on (0,1),
//!
//! ```text
//! γψ − ψ″ − αψ − 2 Σ_{k≤N} λ_k ⟨ψ, φ̃_k⟩ φ̃_k = 0,   ψ(0) = 0,   ψ(1) = V
//! ```
//!
//! with `φ̃_k = √2 sin(πkx)` normalised in L². Projecting onto `φ_i` gives
//! `⟨ψ, φ_i⟩ (γ − λ_i) = −V φ_i′(1)`, i.e. the normalisation constant
//! [`C_NORM`] is one. None of this is needed to apply the feedback; it is
//! used to check the closed-loop structure.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::analysis::l2_norm;
use crate::gains::{FeedbackLaw, GainSet};
use crate::linalg::TridiagonalLu;
use crate::spectral::{modal_projection, Grid, SpectralData, StateField, Window};
use crate::{Error, Result};

/// Constant in `⟨ψ, φ_i⟩ (γ − λ_i) = −c · V · φ_i′(1)` for the convention above.
pub const C_NORM: f64 = 1.0;

/// Lyapunov certificate tolerance relative to `‖B‖`.
pub const LYAPUNOV_TOL: f64 = 1e-8;

/// Boundary compatibility tolerance for [`v_transform`], relative to `‖u‖`.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LiftingSolution {
    pub gamma: f64,
    pub v_boundary: f64,
    pub psi: StateField,
}

impl LiftingSolution {
    /// Max-norm residual of the discrete equations at the interior nodes.
    pub fn residual(&self, spectral: &SpectralData) -> f64 {
        let grid = self.psi.grid();
        let (m, h) = (grid.m(), grid.h());
        let psi = self.psi.values();
        let coupling: Vec<(f64, Vec<f64>)> = (1..=spectral.n_unstable())
            .map(|k| {
                let phi: Vec<f64> = (0..=m).map(|i| normalized_mode(k, grid.x(i))).collect();
                let proj = h * (1..m).map(|i| psi[i] * phi[i]).sum::<f64>();
                (2.0 * spectral.lambdas()[k - 1] * proj, phi)
            })
            .collect();
        (1..m)
            .map(|i| {
                let lap = (psi[i - 1] - 2.0 * psi[i] + psi[i + 1]) / (h * h);
                let nonlocal: f64 = coupling.iter().map(|(c, phi)| c * phi[i]).sum();
                ((self.gamma - spectral.alpha()) * psi[i] - lap - nonlocal).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn normalized_mode(k: usize, x: f64) -> f64 {
    SQRT_2 * (PI * k as f64 * x).sin()
}

/// Second-order finite-difference solution of the lifting problem.
///
/// The rank-`N` coupling is eliminated with a capacitance (Woodbury) system
/// on top of a pivoted tridiagonal factorisation; if the tridiagonal part is
/// itself singular the full matrix is factored densely instead.
pub fn solve_lift(gamma: f64, v_boundary: f64, grid: &Grid, spectral: &SpectralData) -> Result<LiftingSolution> {
    let n_modes = spectral.n_unstable();
    if grid.m() < 8 * n_modes {
        return Err(Error::GridTooCoarse { m: grid.m(), required: 8 * n_modes });
    }
    if !gamma.is_finite() || !v_boundary.is_finite() {
        return Err(Error::InvalidParameter("lifting inputs must be finite".into()));
    }
    let (m, h) = (grid.m(), grid.h());
    let n = m - 1;
    let inv_h2 = 1.0 / (h * h);
    let diag = vec![gamma - spectral.alpha() + 2.0 * inv_h2; n];
    let off = vec![-inv_h2; n - 1];
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = v_boundary * inv_h2;

    // columns φ̃_k at interior nodes, weights E = diag(2λ_k h)
    let phi = DMatrix::from_fn(n, n_modes, |i, k| normalized_mode(k + 1, grid.x(i + 1)));
    let e = DVector::from_iterator(n_modes, spectral.lambdas().iter().map(|l| 2.0 * l * h));

    let interior = match woodbury_solve(&off, &diag, &rhs, &phi, &e) {
        Some(x) => x,
        None => dense_solve(&off, &diag, &rhs, &phi, &e)?,
    };

    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    values.extend(interior.iter());
    values.push(v_boundary);
    Ok(LiftingSolution {
        gamma,
        v_boundary,
        psi: StateField::new(*grid, values, 0.0)?,
    })
}

fn woodbury_solve(
    off: &[f64],
    diag: &[f64],
    rhs: &[f64],
    phi: &DMatrix<f64>,
    e: &DVector<f64>,
) -> Option<DVector<f64>> {
    let lu = TridiagonalLu::factor(off, diag, off).ok()?;
    let n = diag.len();
    let z = DVector::from_vec(lu.solve(rhs));
    if phi.ncols() == 0 {
        return Some(z);
    }
    let mut y = DMatrix::zeros(n, phi.ncols());
    for k in 0..phi.ncols() {
        let col = lu.solve(phi.column(k).as_slice());
        y.set_column(k, &DVector::from_vec(col));
    }
    let e_diag = DMatrix::from_diagonal(e);
    let cap = DMatrix::identity(phi.ncols(), phi.ncols()) - &e_diag * phi.transpose() * &y;
    let c = cap.lu().solve(&(&e_diag * phi.transpose() * &z))?;
    let x = z + y * c;
    if !x.iter().all(|v| v.is_finite()) {
        return None;
    }
    // near-singular tridiagonal part: accept only if the coupled residual is clean
    let coupled = phi * e.component_mul(&(phi.transpose() * &x));
    let scale = diag.iter().chain(off).fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut ax = diag[i] * x[i] - coupled[i];
        if i > 0 {
            ax += off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            ax += off[i] * x[i + 1];
        }
        worst = worst.max((ax - rhs[i]).abs());
    }
    let rhs_max = rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    (worst <= 1e-9 * (rhs_max + scale * x.amax())).then_some(x)
}

fn dense_solve(
    off: &[f64],
    diag: &[f64],
    rhs: &[f64],
    phi: &DMatrix<f64>,
    e: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = diag.len();
    let mut a = -(phi * DMatrix::from_diagonal(e) * phi.transpose());
    for i in 0..n {
        a[(i, i)] += diag[i];
        if i + 1 < n {
            a[(i, i + 1)] += off[i];
            a[(i + 1, i)] += off[i];
        }
    }
    let lu = a.full_piv_lu();
    if !lu.is_invertible() {
        return Err(Error::SingularSystem("lifting operator is singular for this shift".into()));
    }
    lu.solve(&DVector::from_column_slice(rhs))
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::SingularSystem("lifting operator is singular for this shift".into()))
}

/// `|⟨ψ, φ_i⟩ (γ − λ_i) + V φ_i′(1) C_NORM|` for `i = 1..=N`.
pub fn verify_modal_identity(lift: &LiftingSolution, spectral: &SpectralData) -> Result<Vec<f64>> {
    spectral
        .lambdas()
        .iter()
        .zip(spectral.normal_derivs())
        .enumerate()
        .map(|(i, (lambda, d))| {
            let p = modal_projection(&lift.psi, i + 1, Window::full())?;
            Ok((p * (lift.gamma - lambda) + lift.v_boundary * d * C_NORM).abs())
        })
        .collect()
}

/// Modal identity residuals for each grid size in `ms`: `out[r][i]` is the
/// residual of mode `i + 1` at `ms[r]`.
pub fn modal_identity_refinement(gamma: f64, v_boundary: f64, spectral: &SpectralData, ms: &[usize]) -> Result<Vec<Vec<f64>>> {
    ms.iter()
        .map(|&m| {
            let lift = solve_lift(gamma, v_boundary, &Grid::new(m)?, spectral)?;
            verify_modal_identity(&lift, spectral)
        })
        .collect()
}

/// `log(e_coarse / e_fine) / log(m_fine / m_coarse)` between consecutive
/// refinements, per mode.
pub fn observed_orders(ms: &[usize], residuals: &[Vec<f64>]) -> Vec<Vec<f64>> {
    ms.windows(2)
        .zip(residuals.windows(2))
        .map(|(m, r)| {
            let ratio = (m[1] as f64 / m[0] as f64).ln();
            r[0].iter().zip(&r[1]).map(|(c, f)| (c / f).ln() / ratio).collect()
        })
        .collect()
}

/// Cached unit lifts `D_{γ_k} 1` for repeated application of
/// `v = u − Σ_k D_{γ_k} U_k`.
#[derive(Debug, Clone)]
pub struct VTransform {
    law: FeedbackLaw,
    unit_lifts: Vec<StateField>,
}

impl VTransform {
    pub fn new(law: &FeedbackLaw, grid: &Grid) -> Result<Self> {
        let unit_lifts = law
            .gammas()
            .iter()
            .map(|&g| solve_lift(g, 1.0, grid, law.spectral()).map(|l| l.psi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { law: law.clone(), unit_lifts })
    }

    pub fn apply(&self, u: &StateField) -> Result<StateField> {
        if let Some(first) = self.unit_lifts.first() {
            if first.grid() != u.grid() {
                return Err(Error::DimensionMismatch { expected: first.grid().len(), got: u.grid().len() });
            }
        }
        let norm = l2_norm(u);
        let tol = COMPATIBILITY_TOL * norm;
        let modes = self.law.modal_vector(u)?;
        let control = self.law.control_from_modes(&modes);
        if u.left().abs() > tol {
            return Err(Error::BoundaryMismatch(format!("u(0) = {:e} (tolerance {tol:e})", u.left())));
        }
        if (u.right() - control).abs() > tol {
            return Err(Error::BoundaryMismatch(format!(
                "u(1) = {:e} but F(u) = {control:e} (tolerance {tol:e})",
                u.right()
            )));
        }
        let shifts = self.law.shift_controls(&modes);
        let mut v = u.values().to_vec();
        for (uk, lift) in shifts.iter().zip(&self.unit_lifts) {
            for (vi, pi) in v.iter_mut().zip(lift.values()) {
                *vi -= uk * pi;
            }
        }
        StateField::new(*u.grid(), v, u.time())
    }
}

/// `v = u − Σ_k D_{γ_k} U_k` for a state satisfying `u(0) = 0`, `u(1) = F(u)`.
pub fn v_transform(u: &StateField, law: &FeedbackLaw, grid: &Grid) -> Result<StateField> {
    VTransform::new(law, grid)?.apply(u)
}

/// `dv/dt = M v` for the modal amplitudes of the transformed state, with the
/// weight matrix `B` of its Lyapunov function.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub m_matrix: DMatrix<f64>,
    pub b_matrix: DMatrix<f64>,
    pub gamma1: f64,
    pub gamma_max: f64,
}

impl ReducedSystem {
    pub fn n(&self) -> usize {
        self.m_matrix.nrows()
    }
}

/// `M = −γ₁ I + Σ_{k≥2} (γ₁ − γ_k) B_k B`.
pub fn reduced_matrix(gains: &GainSet) -> ReducedSystem {
    let n = gains.n();
    let gamma1 = gains.gammas[0];
    let mut m = DMatrix::identity(n, n) * -gamma1;
    for (gk, bk) in gains.gammas.iter().zip(&gains.bk).skip(1) {
        m += bk * &gains.b * (gamma1 - gk);
    }
    ReducedSystem {
        m_matrix: m,
        b_matrix: gains.b.clone(),
        gamma1,
        gamma_max: *gains.gammas.last().unwrap_or(&gamma1),
    }
}

/// `−Λ − d gᵀ`: the modal dynamics `m′ = −Λ m − d U` closed with `U = ⟨g, m⟩`.
pub fn closed_loop_modal_matrix(gains: &GainSet, gain: &DVector<f64>) -> DMatrix<f64> {
    let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&gains.lambdas));
    -lambda - &gains.d * gain.transpose()
}

/// Reduced system whose state matrix is the closed-loop modal matrix of the
/// given gain vector, weighted by `gains.b`.
pub fn reduced_from_closed_loop(gains: &GainSet, gain: &DVector<f64>) -> ReducedSystem {
    ReducedSystem {
        m_matrix: closed_loop_modal_matrix(gains, gain),
        ..reduced_matrix(gains)
    }
}

/// Largest eigenvalue of `BM + MᵀB + 2γ₁B`.
pub fn lyapunov_certificate(rs: &ReducedSystem) -> f64 {
    let bm = &rs.b_matrix * &rs.m_matrix;
    let q = &bm + bm.transpose() + &rs.b_matrix * (2.0 * rs.gamma1);
    let q = (&q + q.transpose()) * 0.5;
    SymmetricEigen::new(q).eigenvalues.max()
}

/// Spectral norm of a symmetric matrix.
pub fn symmetric_norm(b: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(b.clone()).eigenvalues.amax()
}

pub fn certificate_passes(rs: &ReducedSystem) -> bool {
    lyapunov_certificate(rs) <= LYAPUNOV_TOL * symmetric_norm(&rs.b_matrix)
}

/// `‖B^{1/2} v‖ = sqrt(vᵀ B v)`.
pub fn weighted_norm(b: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(b * v)).max(0.0).sqrt()
}

/// Classic RK4 on `dv/dt = M v`. The step is shortened uniformly so the last
/// sample lands on `t_end`.
pub fn reduced_ode_integrate(
    rs: &ReducedSystem,
    v0: &DVector<f64>,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, DVector<f64>)>> {
    if v0.len() != rs.n() {
        return Err(Error::DimensionMismatch { expected: rs.n(), got: v0.len() });
    }
    let limit = 0.1 / rs.gamma_max.abs().max(f64::MIN_POSITIVE);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::StepSize { dt, limit });
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {t_end}")));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let step = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let m = &rs.m_matrix;
    let mut out = Vec::with_capacity(steps + 1);
    let mut v = v0.clone();
    out.push((0.0, v.clone()));
    for s in 1..=steps {
        let k1 = m * &v;
        let k2 = m * (&v + &k1 * (0.5 * step));
        let k3 = m * (&v + &k2 * (0.5 * step));
        let k4 = m * (&v + &k3 * step);
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
        out.push((s as f64 * step, v.clone()));
    }
    Ok(out)
}
