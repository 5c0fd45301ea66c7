//! Subcommand implementations. Each returns a `CliError` carrying the exit code.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fisher_stab::analysis::{
    fit_decay_default, pde_vs_reduced_check, stability_report, sweep_window, transformed_modal_series, NormKind,
    PointOutcome, StabilityReport,
};
use fisher_stab::gains::{
    assemble_gains, cauchy_determinant_check, gain_vector, gain_vector_from, sum_of_feedbacks, t_matrix_form,
    FeedbackLaw, GainConfig, GainSet,
};
use fisher_stab::lifting::{
    lyapunov_certificate, modal_identity_refinement, observed_orders, reduced_from_closed_loop,
    reduced_matrix, solve_lift, symmetric_norm, LYAPUNOV_TOL,
};
use fisher_stab::pde_sim::{compatibility_check, simulate, SimConfig, SimOutput};
use fisher_stab::spectral::{eigenvalue, boundary_normal_derivative, Grid, ModelParams, SpectralData, Window};
use fisher_stab::Error;

use crate::config::RunConfig;
use crate::output::{self, real, CsvFile};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GAINS: i32 = 3;
pub const EXIT_SIMULATION: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// Default horizon for single runs.
pub const RUN_HORIZON: f64 = 2.0;
/// Default horizon for window runs, long enough to separate slow decay from none.
pub const WINDOW_HORIZON: f64 = 4.0;

const FORM_SEED: u64 = 0x5eed_f15e;
const FORM_DRAWS: usize = 20;
const FORM_TOL: f64 = 1e-10;
const CAUCHY_TOL: f64 = 1e-8;
const CONSISTENCY_TOL: f64 = 1e-8;
const ORDER_TARGET: f64 = 2.0;
const ORDER_BAND: f64 = 0.3;
const LIFT_RESIDUAL_TOL: f64 = 1e-8;
const PDE_ODE_TOL: f64 = 0.05;
const PDE_ODE_SPAN: f64 = 0.5;
const REFINEMENT: [usize; 3] = [100, 200, 400];

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        Self { code: EXIT_CONFIG, message: msg.to_string() }
    }

    pub fn gains(msg: impl fmt::Display) -> Self {
        Self { code: EXIT_GAINS, message: format!("gain synthesis failed: {msg}") }
    }

    pub fn verify(msg: impl fmt::Display) -> Self {
        Self { code: EXIT_VERIFY, message: msg.to_string() }
    }

    /// Numerical failures exit 4; anything that points back at the inputs is a
    /// configuration error.
    pub fn simulation(e: Error) -> Self {
        match e {
            Error::NonFiniteState { .. } | Error::SolverBreakdown(_) | Error::SingularSystem(_) => {
                Self { code: EXIT_SIMULATION, message: format!("simulation failed: {e}") }
            }
            other => Self::config(other),
        }
    }

    fn io(e: std::io::Error, dir: &Path) -> Self {
        Self::config(format!("cannot write to {}: {e}", dir.display()))
    }
}

type CmdResult = Result<(), CliError>;

fn params(cfg: &RunConfig) -> Result<ModelParams, CliError> {
    ModelParams::new(cfg.alpha, cfg.beta).map_err(CliError::config)
}

fn spectrum(cfg: &RunConfig) -> Result<SpectralData, CliError> {
    SpectralData::new(cfg.alpha, cfg.rho).map_err(CliError::config)
}

fn synthesize(cfg: &RunConfig, s: &SpectralData) -> Result<GainSet, CliError> {
    let gc = match &cfg.gammas {
        Some(g) => GainConfig::new(g.clone(), cfg.rho),
        None => GainConfig::evenly_spaced(cfg.rho, s.n_unstable()),
    }
    .map_err(CliError::gains)?;
    assemble_gains(&gc, s).map_err(CliError::gains)
}

/// Feedback law over `window`, or the zero law when nothing is unstable.
fn feedback(cfg: &RunConfig, s: &SpectralData, window: Window) -> Result<FeedbackLaw, CliError> {
    if s.n_unstable() == 0 {
        return Ok(FeedbackLaw::zero(s));
    }
    Ok(FeedbackLaw::new(&synthesize(cfg, s)?, s, window))
}

fn config_window(cfg: &RunConfig) -> Result<Window, CliError> {
    Window::new(cfg.window_a, cfg.window_b).map_err(CliError::config)
}

fn base_sim(cfg: &RunConfig, params: ModelParams, t_end: f64) -> Result<SimConfig, CliError> {
    let mut sim = SimConfig::new(params, cfg.initial_condition().map_err(CliError::config)?);
    sim.grid_m = cfg.grid_m;
    sim.dt = cfg.dt;
    sim.t_end = t_end;
    sim.snapshot_every = cfg.snapshot_every;
    Ok(sim)
}

fn run(sim: &SimConfig) -> Result<SimOutput, CliError> {
    simulate(sim).map_err(CliError::simulation)
}

fn trace_stride(dt: f64) -> usize {
    ((1e-3 / dt).round() as usize).max(1)
}

fn steps(sim: &SimConfig) -> usize {
    ((sim.t_end / sim.dt).round() as usize).max(1)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> CmdResult {
    let s = spectrum(cfg)?;
    let n = s.n_unstable();
    let dir = cfg.resolved_out_dir();
    println!("alpha = {}, rho = {}, unstable modes N = {n}", cfg.alpha, cfg.rho);
    println!("{:>4} {:>24} {:>24}", "j", "lambda_j", "dphi_j(1)");
    let mut csv = CsvFile::create(&dir, "spectrum.csv", output::SPECTRUM_HEADER).map_err(|e| CliError::io(e, &dir))?;
    for j in 1..=n + 3 {
        let (lambda, d) = (eigenvalue(cfg.alpha, j), boundary_normal_derivative(j));
        let mark = if j <= n { "*" } else { " " };
        println!("{j:>4} {lambda:>24.12} {d:>24.12} {mark}");
        csv.row(&[j.to_string(), real(lambda), real(d)]).map_err(|e| CliError::io(e, &dir))?;
    }
    let path = csv.finish().map_err(|e| CliError::io(e, &dir))?;
    if eigenvalue(cfg.alpha, 1) > 0.0 {
        eprintln!("warning: every eigenvalue is positive; the zero state is already stable and no control is needed");
    } else if n == 0 {
        eprintln!("warning: no eigenvalue lies below rho; nothing would be fed back");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn push_matrix(rows: &mut Vec<[String; 4]>, name: &str, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            rows.push([name.into(), (i + 1).to_string(), (j + 1).to_string(), real(m[(i, j)])]);
        }
    }
}

fn push_scalar(rows: &mut Vec<[String; 4]>, name: &str, v: f64) {
    rows.push([name.into(), "0".into(), "0".into(), real(v)]);
}

pub fn cmd_gains(cfg: &RunConfig) -> CmdResult {
    let s = spectrum(cfg)?;
    let gs = synthesize(cfg, &s)?;
    let g = gain_vector(&gs);
    let (det_numeric, det_closed) = cauchy_determinant_check(&gs.gammas, &gs.lambdas).map_err(CliError::gains)?;
    let rs = reduced_from_closed_loop(&gs, &g);
    let cert = lyapunov_certificate(&rs);
    let det_sum = gs.sum_bk.determinant();

    let mut rows = Vec::new();
    push_matrix(&mut rows, "b0", &gs.b0);
    for (k, bk) in gs.bk.iter().enumerate() {
        push_matrix(&mut rows, &format!("b{}", k + 1), bk);
    }
    push_matrix(&mut rows, "sum_bk", &gs.sum_bk);
    push_matrix(&mut rows, "b", &gs.b);
    push_matrix(&mut rows, "t", &gs.t);
    push_matrix(&mut rows, "g", &DMatrix::from_column_slice(g.len(), 1, g.as_slice()));
    push_scalar(&mut rows, "det_sum_bk", det_sum);
    push_scalar(&mut rows, "cond_b", gs.cond_b);
    push_scalar(&mut rows, "min_eig_sum_bk", gs.min_eig_sum);
    push_scalar(&mut rows, "cauchy_det_numeric", det_numeric);
    push_scalar(&mut rows, "cauchy_det_closed_form", det_closed);
    push_scalar(&mut rows, "lyapunov_certificate", cert);

    let dir = cfg.resolved_out_dir();
    let mut csv = CsvFile::create(&dir, "gains.csv", output::GAINS_HEADER).map_err(|e| CliError::io(e, &dir))?;
    for r in &rows {
        csv.row(r).map_err(|e| CliError::io(e, &dir))?;
    }
    let path = csv.finish().map_err(|e| CliError::io(e, &dir))?;

    println!("N = {}, gammas = {:?}", gs.n(), gs.gammas);
    for (k, bk) in gs.bk.iter().enumerate() {
        println!("B_{} ={bk}", k + 1);
    }
    println!("B = (sum B_k)^-1 ={}", gs.b);
    println!("g = {:?}", g.as_slice());
    println!("det(sum B_k)         = {det_sum:.10e}");
    println!("cond(sum B_k)        = {:.6e}", gs.cond_b);
    println!("min eig(sum B_k)     = {:.6e}", gs.min_eig_sum);
    println!("Cauchy det numeric   = {det_numeric:.15e}");
    println!("Cauchy det closed    = {det_closed:.15e}");
    println!(
        "Lyapunov certificate = {cert:.6e} (bound {:.3e})",
        LYAPUNOV_TOL * symmetric_norm(&gs.b)
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopMode {
    Open,
    Closed,
}

pub fn cmd_simulate(cfg: &RunConfig, mode: LoopMode, linearized: bool) -> CmdResult {
    let s = spectrum(cfg)?;
    let mut p = params(cfg)?;
    if linearized {
        p = p.linearized();
    }
    let mut sim = base_sim(cfg, p, cfg.horizon_or(RUN_HORIZON))?;
    if mode == LoopMode::Closed {
        let law = feedback(cfg, &s, config_window(cfg)?)?;
        let grid = Grid::new(cfg.grid_m).map_err(CliError::config)?;
        let u0 = sim.u0.sample(&grid).map_err(CliError::config)?;
        if let Ok(c) = compatibility_check(&u0, &law) {
            if !c.compatible {
                println!(
                    "note: u0 is outside the compatibility set (|u0(0)| = {:.3e}, |u0(1) - F(u0)| = {:.3e})",
                    c.left_residual, c.boundary_residual
                );
            }
        }
        sim = sim.with_law(law);
    }
    let out = run(&sim)?;
    let dir = cfg.resolved_out_dir();
    let trace_path = output::write_trace(&dir, "trace.csv", &out.trace, 1).map_err(|e| CliError::io(e, &dir))?;
    println!("wrote {}", trace_path.display());
    if cfg.snapshot_every > 0 {
        let p = output::write_snapshots(&dir, "snapshots.csv", &out.snapshots).map_err(|e| CliError::io(e, &dir))?;
        println!("wrote {}", p.display());
    }
    let t = &out.trace;
    let (l0, l1) = (t.l2[0], *t.l2.last().unwrap_or(&0.0));
    println!(
        "{} loop{}: t = {:.4}, |u0| = {l0:.6e}, |u(T)| = {l1:.6e}, ratio = {:.6e}{}",
        if mode == LoopMode::Open { "open" } else { "closed" },
        if linearized { " (linearized)" } else { "" },
        t.times.last().copied().unwrap_or(0.0),
        if l0 > 0.0 { l1 / l0 } else { 0.0 },
        if t.blowup_flag { ", BLOWUP" } else { "" }
    );
    Ok(())
}

pub struct SweepArgs {
    pub b: Option<f64>,
    pub a_min: f64,
    pub a_max: f64,
    pub resolution: f64,
}

pub fn cmd_sweep(cfg: &RunConfig, args: &SweepArgs) -> CmdResult {
    let b = args.b.unwrap_or(cfg.window_b);
    if !(args.a_min <= args.a_max) {
        return Err(CliError::config(format!("--a-min {} exceeds --a-max {}", args.a_min, args.a_max)));
    }
    if !(args.a_max < b && b <= 1.0 && args.a_min >= 0.0) {
        return Err(CliError::config(format!("need 0 <= a-min <= a-max < b <= 1, got b = {b}")));
    }
    let s = spectrum(cfg)?;
    if s.n_unstable() == 0 {
        return Err(CliError::config("no unstable modes: there is no feedback to restrict"));
    }
    let law = feedback(cfg, &s, Window::full())?;
    let base = base_sim(cfg, params(cfg)?, cfg.horizon_or(WINDOW_HORIZON))?.with_law(law);
    base.validate().map_err(CliError::simulation)?;
    let result = sweep_window(&base, b, args.a_min, args.a_max, args.resolution).map_err(CliError::config)?;

    let dir = cfg.resolved_out_dir();
    let mut csv = CsvFile::create(&dir, "sweep.csv", output::SWEEP_HEADER).map_err(|e| CliError::io(e, &dir))?;
    println!("{:>10} {:>16} {:>14} {:>14}", "a", "verdict", "mu_fit", "final_ratio");
    for p in &result.points {
        let (verdict, mu, ratio) = match &p.outcome {
            PointOutcome::Classified(r) => (r.verdict.as_str(), r.tail_mu.unwrap_or(f64::NAN), r.final_ratio),
            PointOutcome::Failed(_) => ("failed", f64::NAN, f64::NAN),
        };
        println!("{:>10.6} {verdict:>16} {mu:>14.6e} {ratio:>14.6e}", p.a);
        csv.row(&[real(p.a), verdict.into(), real(mu), real(ratio)]).map_err(|e| CliError::io(e, &dir))?;
    }
    let path = csv.finish().map_err(|e| CliError::io(e, &dir))?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    match result.critical_a {
        Some(a) => println!("critical_a = {a:.6} (b = {b}, resolution {})", args.resolution),
        None => println!("critical_a = none (no stabilized to not-stabilized transition in range)"),
    }
    println!("wrote {}", path.display());
    if result.points.iter().all(|p| matches!(p.outcome, PointOutcome::Failed(_))) {
        return Err(CliError { code: EXIT_SIMULATION, message: "every sweep point failed".into() });
    }
    Ok(())
}

struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }

    fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value > threshold }
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

pub fn cmd_verify(cfg: &RunConfig, inject_identity_b: bool) -> CmdResult {
    let s = spectrum(cfg)?;
    let mut gs = synthesize(cfg, &s)?;
    let n = gs.n();
    let mut checks = Vec::new();

    checks.push(Check::above("lemma_min_eig_sum_bk", gs.min_eig_sum, 0.0));
    let (det_numeric, det_closed) = cauchy_determinant_check(&gs.gammas, &gs.lambdas).map_err(CliError::gains)?;
    checks.push(Check::at_most("cauchy_determinant", rel_diff(det_numeric, det_closed), CAUCHY_TOL));
    checks.push(Check::above("cauchy_nonzero", det_closed.abs(), 0.0));
    let identity_err = max_abs(&(&gs.b * &gs.sum_bk - DMatrix::identity(n, n)));
    checks.push(Check::at_most("inverse_identity", identity_err, 1e-10 * gs.cond_b.max(1.0)));

    if inject_identity_b {
        gs.b = DMatrix::identity(n, n);
    }
    let g = gain_vector(&gs);

    let mut rng = ChaCha8Rng::seed_from_u64(FORM_SEED);
    let mut form_err: f64 = 0.0;
    for _ in 0..FORM_DRAWS {
        let m = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let collapsed = g.dot(&m);
        let sum = sum_of_feedbacks(&gs, &m);
        let tform = t_matrix_form(&gs, &m);
        let scale = collapsed.abs().max(sum.abs()).max(tform.abs()).max(f64::MIN_POSITIVE);
        form_err = form_err.max(((collapsed - sum).abs().max((collapsed - tform).abs())) / scale);
    }
    checks.push(Check::at_most("form_equivalence", form_err, FORM_TOL));
    let g_direct = gain_vector_from(&gs.b, &gs.t);
    checks.push(Check::at_most("gain_vector_consistency", (&g - &g_direct).amax() / g.amax().max(1e-300), FORM_TOL));

    let closed = reduced_from_closed_loop(&gs, &g);
    let cert = lyapunov_certificate(&closed);
    checks.push(Check::at_most("lyapunov_certificate", cert, LYAPUNOV_TOL * symmetric_norm(&gs.b)));
    let reduced = reduced_matrix(&gs);
    let consistency = max_abs(&(&reduced.m_matrix - &closed.m_matrix)) / max_abs(&closed.m_matrix);
    checks.push(Check::at_most("reduced_matrix_consistency", consistency, CONSISTENCY_TOL));

    for (k, &gamma) in gs.gammas.iter().enumerate() {
        let residuals = modal_identity_refinement(gamma, 1.0, &s, &REFINEMENT).map_err(CliError::gains)?;
        let orders = observed_orders(&REFINEMENT, &residuals);
        for i in 0..n {
            let worst = orders.iter().map(|o| (o[i] - ORDER_TARGET).abs()).fold(0.0, f64::max);
            checks.push(Check::at_most(format!("modal_identity_order_k{}_j{}", k + 1, i + 1), worst, ORDER_BAND));
        }
        let grid = Grid::new(*REFINEMENT.last().unwrap_or(&400)).map_err(CliError::config)?;
        let lift = solve_lift(gamma, 1.0, &grid, &s).map_err(CliError::gains)?;
        checks.push(Check::at_most(format!("lift_residual_k{}", k + 1), lift.residual(&s), LIFT_RESIDUAL_TOL));
    }

    let law = FeedbackLaw::new(&gs, &s, Window::full());
    let mut sim = base_sim(cfg, params(cfg)?.linearized(), PDE_ODE_SPAN)?.with_law(law.clone());
    sim.snapshot_every = ((0.005 / cfg.dt).round() as usize).max(1);
    let out = run(&sim)?;
    let series = transformed_modal_series(&out.snapshots, &law).map_err(CliError::simulation)?;
    let discrepancy = pde_vs_reduced_check(&series, &reduced).map_err(CliError::simulation)?;
    checks.push(Check::at_most("pde_vs_reduced", discrepancy, PDE_ODE_TOL));

    let dir = cfg.resolved_out_dir();
    let mut csv = CsvFile::create(&dir, "verify.csv", output::VERIFY_HEADER).map_err(|e| CliError::io(e, &dir))?;
    println!("{:<32} {:>14} {:>14}  result", "check", "value", "threshold");
    for c in &checks {
        println!(
            "{:<32} {:>14.6e} {:>14.6e}  {}",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "pass" } else { "FAIL" }
        );
        csv.row(&[c.name.clone(), real(c.value), real(c.threshold), if c.pass { "1" } else { "0" }.into()])
            .map_err(|e| CliError::io(e, &dir))?;
    }
    let path = csv.finish().map_err(|e| CliError::io(e, &dir))?;
    println!("wrote {}", path.display());
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(CliError::verify(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}

fn snapshot_stride(sim: &SimConfig, cfg: &RunConfig) -> usize {
    if cfg.snapshot_every > 0 {
        cfg.snapshot_every
    } else {
        (steps(sim) / 20).max(1)
    }
}

fn write_bundle(dir: &Path, out: &SimOutput, dt: f64) -> CmdResult {
    output::write_trace(dir, "trace.csv", &out.trace, trace_stride(dt)).map_err(|e| CliError::io(e, dir))?;
    output::write_snapshots(dir, "snapshots.csv", &out.snapshots).map_err(|e| CliError::io(e, dir))?;
    Ok(())
}

fn describe(name: &str, out: &SimOutput, report: Option<&StabilityReport>) {
    let t = &out.trace;
    let ratio = t.l2.last().copied().unwrap_or(0.0) / t.l2[0].max(f64::MIN_POSITIVE);
    let verdict = report.map_or(String::new(), |r| format!(", {}", r.verdict.as_str()));
    println!(
        "{name}: T = {:.3}, |u(T)|/|u0| = {ratio:.4e}{}{verdict}",
        t.times.last().copied().unwrap_or(0.0),
        if t.blowup_flag { ", blowup" } else { "" }
    );
}

pub fn cmd_figures(cfg: &RunConfig) -> CmdResult {
    let s = spectrum(cfg)?;
    let p = params(cfg)?;
    let root = cfg.resolved_out_dir();

    let mut open = base_sim(cfg, p, cfg.horizon_or(RUN_HORIZON))?;
    open.snapshot_every = snapshot_stride(&open, cfg);
    let out = run(&open)?;
    write_bundle(&root.join("fig1"), &out, cfg.dt)?;
    describe("fig1 open loop", &out, None);

    let law = feedback(cfg, &s, Window::full())?;
    let mut closed = base_sim(cfg, p, cfg.horizon_or(RUN_HORIZON))?.with_law(law.clone());
    closed.snapshot_every = snapshot_stride(&closed, cfg);
    let out = run(&closed)?;
    write_bundle(&root.join("fig2"), &out, cfg.dt)?;
    describe("fig2 closed loop", &out, stability_report(&out.trace).ok().as_ref());

    let windowed = |a: f64| -> Result<SimOutput, CliError> {
        let w = Window::new(a, cfg.window_b).map_err(CliError::config)?;
        let mut sim = base_sim(cfg, p, cfg.horizon_or(WINDOW_HORIZON))?.with_law(law.with_window(w));
        sim.snapshot_every = snapshot_stride(&sim, cfg);
        let out = run(&sim)?;
        Ok(out)
    };
    for (name, a) in [("fig3a", 0.24), ("fig3b", 0.25)] {
        let out = windowed(a)?;
        write_bundle(&root.join(name), &out, cfg.dt)?;
        describe(&format!("{name} window [{a}, {}]", cfg.window_b), &out, stability_report(&out.trace).ok().as_ref());
    }

    let dir4 = root.join("fig4");
    let mut h1 = CsvFile::create(&dir4, "h1.csv", output::H1_HEADER).map_err(|e| CliError::io(e, &dir4))?;
    let mut fits = CsvFile::create(&dir4, "fit.csv", output::FIT_HEADER).map_err(|e| CliError::io(e, &dir4))?;
    for a in [0.0, 0.15, 0.24] {
        let out = windowed(a)?;
        let t = &out.trace;
        let stride = trace_stride(cfg.dt);
        for i in (0..t.len()).filter(|i| i % stride == 0 || i + 1 == t.len()) {
            h1.row(&[real(a), real(t.times[i]), real(t.h1[i])]).map_err(|e| CliError::io(e, &dir4))?;
        }
        let fit = fit_decay_default(t, NormKind::H1).map_err(CliError::simulation)?;
        let verdict = stability_report(t).map(|r| r.verdict.as_str()).unwrap_or("unclassified");
        fits.row(&[real(a), real(fit.mu), real(fit.r_squared), verdict.into()]).map_err(|e| CliError::io(e, &dir4))?;
        println!("fig4 a = {a:.2}: H1 decay rate mu = {:.4} (r^2 = {:.4}), {verdict}", fit.mu, fit.r_squared);
    }
    h1.finish().map_err(|e| CliError::io(e, &dir4))?;
    fits.finish().map_err(|e| CliError::io(e, &dir4))?;
    println!("wrote figure bundles under {}", root.display());
    Ok(())
}
