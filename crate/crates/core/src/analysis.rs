//! Norms, exponential-decay fits, stability verdicts and window sweeps.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::gains::{feedback_control, FeedbackLaw};
use crate::lifting::{reduced_ode_integrate, ReducedSystem, VTransform};
use crate::pde_sim::{simulate, SimConfig, Trace};
use crate::spectral::{ModalProjector, StateField, Window};
use crate::{Error, Result};

/// Norm samples at or below this are excluded from decay fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// Minimum number of samples above [`FIT_FLOOR`] for a fit.
pub const MIN_FIT_SAMPLES: usize = 10;

/// `‖u(T)‖ / ‖u(0)‖` must not exceed this for a run to count as stabilized.
pub const STABILIZED_RATIO: f64 = 1e-2;

/// Shortest horizon accepted by [`classify_stability`].
pub const MIN_HORIZON: f64 = 2.0;

/// Spacing of the coarse grid in [`sweep_window`].
pub const SWEEP_GRID_STEP: f64 = 0.05;

/// Trapezoid L² norm.
pub fn l2_norm(field: &StateField) -> f64 {
    let w = field.grid().trapezoid_weights();
    w.iter().zip(field.values()).map(|(w, u)| w * u * u).sum::<f64>().sqrt()
}

/// Discrete derivative: centred in the interior, second-order one-sided at
/// the endpoints.
pub fn derivative(field: &StateField) -> Vec<f64> {
    let u = field.values();
    let h = field.grid().h();
    let m = u.len() - 1;
    let mut du = vec![0.0; m + 1];
    for i in 1..m {
        du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    }
    if m >= 2 {
        du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        du[m] = (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * h);
    } else {
        du[0] = (u[1] - u[0]) / h;
        du[m] = du[0];
    }
    du
}

/// Full H¹ norm `sqrt(‖u‖² + ‖u_x‖²)`.
pub fn h1_norm(field: &StateField) -> f64 {
    let w = field.grid().trapezoid_weights();
    let du = derivative(field);
    let l2 = l2_norm(field);
    let grad: f64 = w.iter().zip(&du).map(|(w, d)| w * d * d).sum();
    (l2 * l2 + grad).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    H1,
}

/// Least-squares fit `log‖u(t)‖ ≈ log_c − μ t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub mu: f64,
    pub log_c: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub fn fit_decay(trace: &Trace, t_lo: f64, t_hi: f64, kind: NormKind) -> Result<DecayFit> {
    if !(t_lo < t_hi) {
        return Err(Error::InvalidParameter(format!("empty fit window [{t_lo}, {t_hi}]")));
    }
    let norms = match kind {
        NormKind::L2 => &trace.l2,
        NormKind::H1 => &trace.h1,
    };
    let tol = 1e-9 * t_hi.abs().max(1.0);
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(norms)
        .filter(|(t, y)| **t >= t_lo - tol && **t <= t_hi + tol && **y > FIT_FLOOR && y.is_finite())
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples above {FIT_FLOOR:e} in [{t_lo}, {t_hi}], need {MIN_FIT_SAMPLES}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - t_mean).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - t_mean) * (p.1 - y_mean)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - y_mean).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::InsufficientData("all fit samples share one time".into()));
    }
    let slope = sty / stt;
    let intercept = y_mean - slope * t_mean;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // a flat series is fitted exactly
    let r_squared = if syy <= f64::EPSILON * y_mean.abs().max(1.0) * n {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit { mu: -slope, log_c: intercept, r_squared, window: (t_lo, t_hi), samples: pts.len() })
}

/// Fit over `[0.2 T, T]`, skipping the initial transient.
pub fn fit_decay_default(trace: &Trace, kind: NormKind) -> Result<DecayFit> {
    let (t0, t1) = horizon(trace)?;
    fit_decay(trace, t0 + 0.2 * (t1 - t0), t1, kind)
}

fn horizon(trace: &Trace) -> Result<(f64, f64)> {
    match (trace.times.first(), trace.times.last()) {
        (Some(a), Some(b)) => Ok((*a, *b)),
        _ => Err(Error::InsufficientData("empty trace".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stabilized,
    NotStabilized,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stabilized => "stabilized",
            Verdict::NotStabilized => "not_stabilized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub final_ratio: f64,
    /// L² decay rate fitted over the last half of the horizon.
    pub tail_mu: Option<f64>,
}

/// Stabilized iff no blowup, `‖u(T)‖/‖u(0)‖ ≤ 1e-2` and a positive decay
/// rate over `[T/2, T]`.
pub fn stability_report(trace: &Trace) -> Result<StabilityReport> {
    let (t0, t1) = horizon(trace)?;
    let initial = trace.l2[0];
    let last = *trace.l2.last().unwrap();
    let final_ratio = if initial > 0.0 { last / initial } else if last == 0.0 { 0.0 } else { f64::INFINITY };
    if trace.blowup_flag {
        return Ok(StabilityReport { verdict: Verdict::NotStabilized, final_ratio, tail_mu: None });
    }
    if t1 - t0 < MIN_HORIZON - 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "classification needs a horizon of at least {MIN_HORIZON}, trace covers {}",
            t1 - t0
        )));
    }
    if initial == 0.0 && last == 0.0 {
        // the equilibrium itself
        return Ok(StabilityReport { verdict: Verdict::Stabilized, final_ratio, tail_mu: None });
    }
    let tail_mu = fit_decay(trace, t0 + 0.5 * (t1 - t0), t1, NormKind::L2).ok().map(|f| f.mu);
    let stabilized = final_ratio <= STABILIZED_RATIO && tail_mu.is_some_and(|mu| mu > 0.0);
    let verdict = if stabilized { Verdict::Stabilized } else { Verdict::NotStabilized };
    Ok(StabilityReport { verdict, final_ratio, tail_mu })
}

pub fn classify_stability(trace: &Trace) -> Result<Verdict> {
    stability_report(trace).map(|r| r.verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointOutcome {
    Classified(StabilityReport),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub a: f64,
    pub outcome: PointOutcome,
}

impl SweepPoint {
    pub fn verdict(&self) -> Option<Verdict> {
        match &self.outcome {
            PointOutcome::Classified(r) => Some(r.verdict),
            PointOutcome::Failed(_) => None,
        }
    }

    pub fn is_stabilized(&self) -> bool {
        self.verdict() == Some(Verdict::Stabilized)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Every evaluated point, grid and bisection alike, sorted by `a`.
    pub points: Vec<SweepPoint>,
    /// Midpoint of the final bisection bracket; `None` without a
    /// stabilized-to-not transition in range.
    pub critical_a: Option<f64>,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn a_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.a).collect()
    }

    pub fn verdicts(&self) -> Vec<Option<Verdict>> {
        self.points.iter().map(SweepPoint::verdict).collect()
    }

    pub fn point(&self, a: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.a - a).abs() < 1e-12)
    }
}

/// Simulate and classify with the observation window `[a, b]`.
pub fn evaluate_window(base: &SimConfig, a: f64, b: f64) -> SweepPoint {
    let outcome = (|| {
        let law = base
            .law
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("window sweep needs a feedback law".into()))?;
        let cfg = SimConfig { law: Some(law.with_window(Window::new(a, b)?)), snapshot_every: 0, ..base.clone() };
        let out = simulate(&cfg)?;
        stability_report(&out.trace)
    })();
    SweepPoint {
        a,
        outcome: match outcome {
            Ok(r) => PointOutcome::Classified(r),
            Err(e) => PointOutcome::Failed(e.to_string()),
        },
    }
}

/// Classify closed-loop runs with window `[a, b]` on a grid of `a`, then
/// bisect the first stabilized → not-stabilized transition down to
/// `resolution`.
pub fn sweep_window(base: &SimConfig, b: f64, a_min: f64, a_max: f64, resolution: f64) -> Result<SweepResult> {
    if base.law.is_none() {
        return Err(Error::InvalidParameter("window sweep needs a feedback law".into()));
    }
    if !(0.0..=1.0).contains(&b) || !(a_min >= 0.0) || !(a_min <= a_max) || !(a_max < b) {
        return Err(Error::InvalidParameter(format!(
            "sweep range must satisfy 0 <= a_min <= a_max < b <= 1, got a in [{a_min}, {a_max}], b = {b}"
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
    }

    let mut grid_a = Vec::new();
    let mut k = 0usize;
    loop {
        let a = a_min + k as f64 * SWEEP_GRID_STEP;
        if a >= a_max - 1e-12 {
            break;
        }
        grid_a.push(a);
        k += 1;
    }
    grid_a.push(a_max);

    let mut points: Vec<SweepPoint> = grid_a.par_iter().map(|&a| evaluate_window(base, a, b)).collect();
    let mut warnings = Vec::new();

    let first_not = points.iter().position(|p| !p.is_stabilized());
    if let Some(i) = first_not {
        if points[i + 1..].iter().any(SweepPoint::is_stabilized) {
            warnings.push(format!(
                "verdicts are not monotone in a: stabilized again above a = {:.4}",
                points[i].a
            ));
        }
        for p in &points {
            if let PointOutcome::Failed(msg) = &p.outcome {
                warnings.push(format!("a = {:.4} failed: {msg}", p.a));
            }
        }
    }

    let critical_a = match first_not {
        Some(0) => {
            warnings.push(format!("not stabilized already at a_min = {a_min}"));
            None
        }
        None => None,
        Some(i) => {
            let (mut lo, mut hi) = (points[i - 1].a, points[i].a);
            while hi - lo > resolution {
                let mid = 0.5 * (lo + hi);
                let p = evaluate_window(base, mid, b);
                if p.is_stabilized() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                points.push(p);
            }
            Some(0.5 * (lo + hi))
        }
    };
    points.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(SweepResult { points, critical_a, warnings })
}

/// Full-window modal amplitudes of `v = u − Σ_k D_{γ_k} U_k` for each
/// closed-loop snapshot. `u(1)` is reset to `F(u)` first; this only touches
/// the raw initial datum and leaves every projection unchanged.
pub fn transformed_modal_series(snapshots: &[StateField], law: &FeedbackLaw) -> Result<Vec<(f64, DVector<f64>)>> {
    let Some(first) = snapshots.first() else {
        return Ok(Vec::new());
    };
    let grid = *first.grid();
    let transform = VTransform::new(law, &grid)?;
    let projector = ModalProjector::new(&grid, law.n_modes(), Window::full())?;
    snapshots
        .iter()
        .map(|u| {
            let mut u = u.clone();
            let m = grid.m();
            let control = feedback_control(&u, law)?;
            u.values_mut()[0] = 0.0;
            u.values_mut()[m] = control;
            let v = transform.apply(&u)?;
            Ok((u.time(), DVector::from_vec(projector.project(v.values()))))
        })
        .collect()
}

/// `max_t ‖v_PDE(t) − v_ODE(t)‖ / ‖v(0)‖` over the first 0.5 time units of
/// the series, with the ODE started from the first PDE sample.
pub fn pde_vs_reduced_check(series: &[(f64, DVector<f64>)], rs: &ReducedSystem) -> Result<f64> {
    const SPAN: f64 = 0.5;
    let Some((t0, v0)) = series.first() else {
        return Err(Error::InsufficientData("empty modal series".into()));
    };
    for (_, v) in series {
        if v.len() != rs.n() {
            return Err(Error::DimensionMismatch { expected: rs.n(), got: v.len() });
        }
    }
    let scale = v0.norm();
    if scale == 0.0 {
        let worst = series.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        return Ok(if worst == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let dt = (0.1 / rs.gamma_max.abs().max(1e-12)).min(1e-4);
    let mut state = v0.clone();
    let mut t_prev = *t0;
    let mut worst = 0.0_f64;
    for (t, v) in series.iter().skip(1) {
        if t - t0 > SPAN + 1e-9 {
            break;
        }
        let span = t - t_prev;
        if span < 0.0 {
            return Err(Error::InvalidParameter("modal series times must be increasing".into()));
        }
        if span > 0.0 {
            state = reduced_ode_integrate(rs, &state, span, dt)?.pop().unwrap().1;
        }
        worst = worst.max((v - &state).norm() / scale);
        t_prev = *t;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eigenfunction_values, Grid};
    use approx::assert_abs_diff_eq;

    fn synthetic(f: impl Fn(f64) -> f64, n: usize, t_end: f64) -> Trace {
        let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let l2: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        Trace { h1: l2.clone(), control: vec![0.0; times.len()], l2, times, blowup_flag: false }
    }

    #[test]
    fn norms_of_reference_fields() {
        let grid = Grid::new(200).unwrap();
        let h2 = grid.h() * grid.h();
        let s = eigenfunction_values(1, &grid);
        assert_abs_diff_eq!(l2_norm(&s), std::f64::consts::FRAC_1_SQRT_2, epsilon = 2.0 * h2);
        let pi2 = std::f64::consts::PI.powi(2);
        assert_abs_diff_eq!(h1_norm(&s), ((1.0 + pi2) / 2.0).sqrt(), epsilon = 5e-3);
        let x = StateField::from_fn(grid, 0.0, |x| x);
        assert_abs_diff_eq!(h1_norm(&x), (4.0_f64 / 3.0).sqrt(), epsilon = 5e-3);
        let z = StateField::zeros(grid, 0.0);
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(h1_norm(&z), 0.0);
        let e = std::f64::consts::E;
        let f = StateField::from_fn(grid, 0.0, |x| 5.0 * x * x.exp());
        assert_abs_diff_eq!(l2_norm(&f), 2.5 * (e * e - 1.0).sqrt(), epsilon = 1e-3);
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let tr = synthetic(|t| 3.0 * (-2.0 * t).exp(), 200, 2.0);
        let fit = fit_decay(&tr, 0.0, 2.0, NormKind::L2).unwrap();
        assert_abs_diff_eq!(fit.mu, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.log_c, 3.0_f64.ln(), epsilon = 1e-6);
        assert!(fit.r_squared >= 0.999_999);
    }

    #[test]
    fn fit_of_constant_trace() {
        let tr = synthetic(|_| 4.2, 50, 2.0);
        let fit = fit_decay(&tr, 0.0, 2.0, NormKind::H1).unwrap();
        assert_abs_diff_eq!(fit.mu, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn fit_needs_samples_above_floor() {
        let tr = synthetic(|t| if t < 0.1 { 1.0 } else { 0.0 }, 100, 2.0);
        assert!(matches!(fit_decay(&tr, 0.5, 2.0, NormKind::L2), Err(Error::InsufficientData(_))));
        assert!(fit_decay(&tr, 1.0, 1.0, NormKind::L2).is_err());
    }

    #[test]
    fn classification_rules() {
        let decaying = synthetic(|t| (-5.0 * t).exp(), 400, 2.0);
        assert_eq!(classify_stability(&decaying).unwrap(), Verdict::Stabilized);
        let slow = synthetic(|t| (-1.0 * t).exp(), 400, 2.0);
        assert_eq!(classify_stability(&slow).unwrap(), Verdict::NotStabilized);
        let growing = synthetic(|t| (3.0 * t).exp(), 400, 2.0);
        assert_eq!(classify_stability(&growing).unwrap(), Verdict::NotStabilized);
        let mut blown = decaying.clone();
        blown.blowup_flag = true;
        assert_eq!(classify_stability(&blown).unwrap(), Verdict::NotStabilized);
        let short = synthetic(|t| (-5.0 * t).exp(), 100, 1.0);
        assert!(classify_stability(&short).is_err());
    }

    #[test]
    fn h1_dominates_l2() {
        let grid = Grid::new(50).unwrap();
        for k in 0..10 {
            let f = StateField::from_fn(grid, 0.0, |x| ((k + 1) as f64 * x).cos() * x.powi(k));
            assert!(h1_norm(&f) >= l2_norm(&f));
        }
    }

    #[test]
    fn zero_modal_series_has_no_discrepancy() {
        let rs = ReducedSystem {
            m_matrix: nalgebra::DMatrix::identity(2, 2) * -15.0,
            b_matrix: nalgebra::DMatrix::identity(2, 2),
            gamma1: 15.0,
            gamma_max: 15.0,
        };
        let series: Vec<_> = (0..10).map(|i| (i as f64 * 0.05, DVector::zeros(2))).collect();
        assert_eq!(pde_vs_reduced_check(&series, &rs).unwrap(), 0.0);
        let bad = vec![(0.0, DVector::zeros(3))];
        assert!(matches!(pde_vs_reduced_check(&bad, &rs), Err(Error::DimensionMismatch { .. })));
        // exact exponential data reproduces itself
        let exact: Vec<_> = (0..=20)
            .map(|i| {
                let t = i as f64 * 0.025;
                (t, DVector::from_column_slice(&[(-15.0 * t).exp(), -2.0 * (-15.0 * t).exp()]))
            })
            .collect();
        assert!(pde_vs_reduced_check(&exact, &rs).unwrap() < 1e-10);
    }
}
