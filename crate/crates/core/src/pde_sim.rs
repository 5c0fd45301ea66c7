//! IMEX finite-difference integration of
//! `u_t = u_xx + αu − βu²`, `u(0,t) = 0`, `u(1,t) = U(t)`.
//!
//! Crank–Nicolson on `u_xx + αu`, forward Euler on `−βu²`. The control is
//! evaluated from the state at `t_n` and held on the boundary over
//! `[t_n, t_{n+1}]`.

use std::f64::consts::PI;

use crate::analysis::{h1_norm, l2_norm};
use crate::gains::{feedback_control, FeedbackLaw};
use crate::linalg::TridiagonalLu;
use crate::spectral::{Grid, ModalProjector, ModelParams, StateField};
use crate::{Error, Result};

/// Integration stops with the blowup flag once `max|u|` exceeds this.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Largest step accepted; the explicit nonlinear term is only first order.
pub const MAX_DT: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `5x eˣ`
    FiveXExp,
    /// `sin(πjx)`
    Sine(usize),
    /// Nodal values, one per grid node.
    Samples(Vec<f64>),
}

impl InitialCondition {
    /// Parses the presets `5xexp` and `sine(j)`.
    pub fn preset(name: &str) -> Option<Self> {
        let name = name.trim();
        if name.eq_ignore_ascii_case("5xexp") {
            return Some(Self::FiveXExp);
        }
        let inner = name.strip_prefix("sine(")?.strip_suffix(')')?;
        inner.trim().parse().ok().filter(|j| *j >= 1).map(Self::Sine)
    }

    pub fn sample(&self, grid: &Grid) -> Result<StateField> {
        match self {
            Self::FiveXExp => Ok(StateField::from_fn(*grid, 0.0, |x| 5.0 * x * x.exp())),
            Self::Sine(j) => {
                let k = PI * *j as f64;
                let mut f = StateField::from_fn(*grid, 0.0, |x| (k * x).sin());
                let m = grid.m();
                f.values_mut()[0] = 0.0;
                f.values_mut()[m] = 0.0;
                Ok(f)
            }
            Self::Samples(v) => StateField::new(*grid, v.clone(), 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub grid_m: usize,
    pub dt: f64,
    pub t_end: f64,
    /// `None` runs the open loop with `U ≡ 0`.
    pub law: Option<FeedbackLaw>,
    pub u0: InitialCondition,
    /// Keep every `n`-th state (and the last); 0 keeps none.
    pub snapshot_every: usize,
}

impl SimConfig {
    pub fn new(params: ModelParams, u0: InitialCondition) -> Self {
        Self {
            params,
            grid_m: 200,
            dt: 1e-4,
            t_end: 2.0,
            law: None,
            u0,
            snapshot_every: 0,
        }
    }

    pub fn with_law(mut self, law: FeedbackLaw) -> Self {
        self.law = Some(law);
        self
    }

    pub fn validate(&self) -> Result<Grid> {
        if !(self.dt > 0.0) || self.dt > MAX_DT {
            return Err(Error::StepSize { dt: self.dt, limit: MAX_DT });
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        let grid = Grid::new(self.grid_m)?;
        if let Some(law) = &self.law {
            law.window().snap(&grid)?;
        }
        Ok(grid)
    }
}

/// Time series of norms and control values, one row per time step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub control: Vec<f64>,
    pub blowup_flag: bool,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, field: &StateField, control: f64) {
        self.times.push(field.time());
        self.l2.push(l2_norm(field));
        self.h1.push(h1_norm(field));
        self.control.push(control);
    }

    /// Last index with `times[i] <= t` (within rounding).
    pub fn index_at(&self, t: f64) -> Option<usize> {
        self.times.iter().rposition(|&s| s <= t + 1e-9)
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trace: Trace,
    pub snapshots: Vec<StateField>,
}

pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    let grid = config.validate()?;
    let (m, h, dt) = (grid.m(), grid.h(), config.dt);
    let ModelParams { alpha, beta } = config.params;

    let u0 = config.u0.sample(&grid)?;
    let projector = match &config.law {
        Some(law) if law.n_modes() > 0 => Some((law, ModalProjector::new(&grid, law.n_modes(), law.window())?)),
        _ => None,
    };
    let control_of = |u: &[f64]| -> f64 {
        projector
            .as_ref()
            .map_or(0.0, |(law, p)| law.control_from_modes(&p.project(u)))
    };

    let r = dt / (h * h);
    let n = m - 1;
    let lhs_off = vec![-0.5 * r; n - 1];
    let lhs_diag = vec![1.0 + r - 0.5 * dt * alpha; n];
    let lu = TridiagonalLu::factor(&lhs_off, &lhs_diag, &lhs_off)
        .map_err(|e| Error::SolverBreakdown(format!("Crank-Nicolson matrix: {e}")))?;

    let steps = ((config.t_end / dt).round() as usize).max(1);
    let mut trace = Trace::default();
    let mut snapshots = Vec::new();
    let keep = |k: usize| config.snapshot_every > 0 && (k.is_multiple_of(config.snapshot_every) || k == steps);

    let mut control = control_of(u0.values());
    trace.push(&u0, control);
    if keep(0) {
        snapshots.push(u0.clone());
    }
    let mut u = u0.into_values();
    let mut rhs = vec![0.0; n];

    for k in 1..=steps {
        u[0] = 0.0;
        u[m] = control;
        for i in 1..m {
            let ui = u[i];
            rhs[i - 1] = ui + 0.5 * r * (u[i - 1] - 2.0 * ui + u[i + 1]) + 0.5 * dt * alpha * ui - dt * beta * ui * ui;
        }
        rhs[n - 1] += 0.5 * r * control;
        lu.solve_in_place(&mut rhs);
        u[1..m].copy_from_slice(&rhs);

        let t = k as f64 * dt;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        control = control_of(&u);
        u[m] = control;
        let field = StateField::new(grid, u.clone(), t)?;
        trace.push(&field, control);
        let blown = u.iter().any(|v| v.abs() > BLOWUP_THRESHOLD);
        if keep(k) || blown {
            snapshots.push(field);
        }
        if blown {
            trace.blowup_flag = true;
            break;
        }
    }
    Ok(SimOutput { trace, snapshots })
}

/// Residuals of the compatibility conditions `u(0) = 0`, `u(1) = F(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    pub left_residual: f64,
    pub boundary_residual: f64,
    pub feedback_value: f64,
    pub compatible: bool,
}

pub fn compatibility_check(u0: &StateField, law: &FeedbackLaw) -> Result<CompatibilityReport> {
    let feedback_value = feedback_control(u0, law)?;
    let left_residual = u0.left().abs();
    let boundary_residual = (u0.right() - feedback_value).abs();
    let tol = 1e-6 * (1.0 + h1_norm(u0));
    Ok(CompatibilityReport {
        left_residual,
        boundary_residual,
        feedback_value,
        compatible: left_residual <= tol && boundary_residual <= tol,
    })
}
