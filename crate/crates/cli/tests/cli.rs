use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fisher-stab");

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, body: &str) -> PathBuf {
        let p = self.path("run.cfg");
        fs::write(&p, body).unwrap();
        p
    }

    fn exec(&self, cfg: Option<&Path>, args: &[&str]) -> Output {
        let mut cmd = Command::new(BIN);
        cmd.current_dir(self.dir.path()).env("FISHER_STAB_OUT", self.path("out"));
        if let Some(c) = cfg {
            cmd.arg("--config").arg(c);
        }
        cmd.args(args).output().unwrap()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path("out").join(name)).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn header(text: &str) -> &str {
    text.lines().next().unwrap()
}

const SMALL: &str = "grid_m = 60\ndt = 5e-4\nt_end = 0.4\nsnapshot_every = 200\n";

#[test]
fn spectrum_golden_header_and_rows() {
    let r = Run::new();
    let o = r.exec(None, &["spectrum"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = r.read("spectrum.csv");
    assert_eq!(header(&csv), "j,lambda,dphi1");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    let lambda1: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((lambda1 + 20.130395598910641).abs() <= 1e-12);
    assert!(String::from_utf8_lossy(&o.stdout).contains("N = 2"));
}

#[test]
fn stable_spectrum_warns() {
    let r = Run::new();
    let cfg = r.config("alpha = 0.5\nrho = 5\n");
    let o = r.exec(Some(&cfg), &["spectrum"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("N = 0"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no control is needed"));
    assert_eq!(r.read("spectrum.csv").lines().count(), 4);

    // λ₁ = π² − 0.5 lies below the default cutoff, so it is counted but stable
    let cfg = r.config("alpha = 0.5\n");
    let o = r.exec(Some(&cfg), &["spectrum"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("N = 1"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no control is needed"));
}

#[test]
fn gains_golden_header_and_reference_entries() {
    let r = Run::new();
    let o = r.exec(None, &["gains"]);
    assert_eq!(code(&o), 0);
    let csv = r.read("gains.csv");
    assert_eq!(header(&csv), "quantity,row,col,value");
    let get = |q: &str, i: &str, j: &str| -> f64 {
        csv.lines()
            .map(|l| l.split(',').collect::<Vec<_>>())
            .find(|f| f[0] == q && f[1] == i && f[2] == j)
            .unwrap()[3]
            .parse()
            .unwrap()
    };
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((get("b1", "1", "1") - pi2 / (45.0 - pi2).powi(2)).abs() <= 1e-15);
    assert!((get("det_sum_bk", "0", "0") - 1.27e-3).abs() <= 5e-5);
    assert!((get("g", "1", "1") + 15.156).abs() <= 1e-3);
}

#[test]
fn single_mode_gains() {
    let r = Run::new();
    let cfg = r.config("alpha = 15\nrho = 1\n");
    assert_eq!(code(&r.exec(Some(&cfg), &["gains"])), 0);
    assert!(r.read("gains.csv").lines().any(|l| l.starts_with("b,1,1,")));
    assert!(!r.read("gains.csv").lines().any(|l| l.starts_with("b,2,")));
}

#[test]
fn simulate_golden_headers() {
    let r = Run::new();
    let cfg = r.config(SMALL);
    let o = r.exec(Some(&cfg), &["simulate", "--closed-loop"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = r.read("trace.csv");
    assert_eq!(header(&trace), "t,l2,h1,u_control,blowup");
    assert_eq!(trace.lines().count(), 1 + 801);
    assert!(trace.lines().skip(1).all(|l| l.ends_with(",0")));
    let snaps = r.read("snapshots.csv");
    assert_eq!(header(&snaps), "t,x,u");
    assert_eq!(snaps.lines().count(), 1 + 5 * 61);
}

#[test]
fn no_snapshots_without_request() {
    let r = Run::new();
    let cfg = r.config("grid_m = 40\ndt = 1e-3\nt_end = 0.1\n");
    assert_eq!(code(&r.exec(Some(&cfg), &["simulate", "--open-loop"])), 0);
    assert!(!r.path("out").join("snapshots.csv").exists());
}

#[test]
fn open_loop_grows_and_closed_loop_decays() {
    let r = Run::new();
    let cfg = r.config("t_end = 1\n");
    let last_l2 = |csv: &str| -> (f64, f64) {
        let col = |l: &str| l.split(',').nth(1).unwrap().parse::<f64>().unwrap();
        let mut rows = csv.lines().skip(1);
        let first = col(rows.next().unwrap());
        (first, col(rows.last().unwrap()))
    };
    assert_eq!(code(&r.exec(Some(&cfg), &["simulate", "--open-loop"])), 0);
    let (a, b) = last_l2(&r.read("trace.csv"));
    assert!(b > a);
    assert_eq!(code(&r.exec(Some(&cfg), &["simulate", "--closed-loop", "--linearized"])), 0);
    let (a, b) = last_l2(&r.read("trace.csv"));
    assert!(b <= 1e-2 * a);
}

#[test]
fn zero_initial_condition_gives_zero_trace() {
    let r = Run::new();
    fs::write(r.path("zero.txt"), "0\n".repeat(41)).unwrap();
    let cfg = r.config("grid_m = 40\ndt = 1e-3\nt_end = 0.2\nu0 = zero.txt\n");
    assert_eq!(code(&r.exec(Some(&cfg), &["simulate"])), 0);
    for line in r.read("trace.csv").lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[1..4].iter().all(|v| v.parse::<f64>().unwrap() == 0.0), "{line}");
    }
}

#[test]
fn outputs_are_deterministic() {
    let r = Run::new();
    let cfg = r.config(SMALL);
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert_eq!(code(&r.exec(Some(&cfg), &["simulate"])), 0);
        assert_eq!(code(&r.exec(Some(&cfg), &["verify"])), 0);
        runs.push([r.read("trace.csv"), r.read("snapshots.csv"), r.read("verify.csv")]);
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn sweep_golden_header_and_determinism() {
    let r = Run::new();
    let cfg = r.config("grid_m = 50\ndt = 1e-3\n");
    let args = ["sweep", "--a-min", "0.2", "--a-max", "0.3", "--resolution", "0.05"];
    let o = r.exec(Some(&cfg), &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = r.read("sweep.csv");
    assert_eq!(header(&first), "a,verdict,mu_fit,final_ratio");
    assert!(String::from_utf8_lossy(&o.stdout).contains("critical_a"));
    assert_eq!(code(&r.exec(Some(&cfg), &args)), 0);
    assert_eq!(first, r.read("sweep.csv"));
}

#[test]
fn verify_golden_header_and_pass() {
    let r = Run::new();
    let o = r.exec(None, &["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = r.read("verify.csv");
    assert_eq!(header(&csv), "check,value,threshold,pass");
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",1")));
    for check in ["lyapunov_certificate", "cauchy_determinant", "form_equivalence", "pde_vs_reduced"] {
        assert!(csv.lines().any(|l| l.starts_with(check)), "{check}");
    }
}

#[test]
fn verify_single_mode() {
    let r = Run::new();
    let cfg = r.config("alpha = 15\nrho = 1\n");
    let o = r.exec(Some(&cfg), &["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn exit_2_on_config_errors() {
    let r = Run::new();
    for body in ["alpha = 30\nbogus = 1\n", "alpha = x\n", "alpha\n", "grid_m = 1\n", "dt = 1\n"] {
        let cfg = r.config(body);
        assert_eq!(code(&r.exec(Some(&cfg), &["simulate"])), 2, "{body}");
    }
    assert_eq!(code(&r.exec(Some(&r.path("missing.cfg")), &["spectrum"])), 2);
    assert_eq!(code(&r.exec(None, &["sweep", "--a-min", "0.3", "--a-max", "0.1"])), 2);
    assert_eq!(code(&r.exec(None, &["frobnicate"])), 2);
    let cfg = r.config(&format!("rho = {}\n", std::f64::consts::PI.powi(2) * 4.0 - 30.0));
    assert_eq!(code(&r.exec(Some(&cfg), &["spectrum"])), 2);
}

#[test]
fn exit_3_on_gain_synthesis_failure() {
    let r = Run::new();
    for body in ["gammas = 15, 15\n", "gammas = 8, 20\n", "gammas = 15\n"] {
        let cfg = r.config(body);
        let o = r.exec(Some(&cfg), &["gains"]);
        assert_eq!(code(&o), 3, "{body}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn exit_4_on_numerical_failure() {
    let r = Run::new();
    fs::write(r.path("huge.txt"), "1e200\n".repeat(41)).unwrap();
    let cfg = r.config("grid_m = 40\nu0 = huge.txt\n");
    let o = r.exec(Some(&cfg), &["simulate"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_5_on_sabotaged_weight() {
    let r = Run::new();
    let o = r.exec(None, &["verify", "--inject-identity-b"]);
    assert_eq!(code(&o), 5);
    let csv = r.read("verify.csv");
    let lyap = csv.lines().find(|l| l.starts_with("lyapunov_certificate")).unwrap();
    assert!(lyap.ends_with(",0"));
    let help = r.exec(None, &["verify", "--help"]);
    assert!(!String::from_utf8_lossy(&help.stdout).contains("inject"));
}

#[test]
fn env_overrides_out_dir() {
    let r = Run::new();
    let cfg = r.config(&format!("out_dir = {}\n", r.path("elsewhere").display()));
    assert_eq!(code(&r.exec(Some(&cfg), &["spectrum"])), 0);
    assert!(r.path("out").join("spectrum.csv").exists());
    assert!(!r.path("elsewhere").exists());
    let o = Command::new(BIN)
        .current_dir(r.dir.path())
        .env_remove("FISHER_STAB_OUT")
        .args(["--config", cfg.to_str().unwrap(), "spectrum"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(r.path("elsewhere").join("spectrum.csv").exists());
}

#[test]
fn figures_bundles() {
    let r = Run::new();
    let cfg = r.config("grid_m = 50\ndt = 1e-3\n");
    let o = r.exec(Some(&cfg), &["figures"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for fig in ["fig1", "fig2", "fig3a", "fig3b"] {
        assert_eq!(header(&r.read(&format!("{fig}/trace.csv"))), "t,l2,h1,u_control,blowup");
        assert_eq!(header(&r.read(&format!("{fig}/snapshots.csv"))), "t,x,u");
    }
    assert_eq!(header(&r.read("fig4/h1.csv")), "a,t,h1");
    assert_eq!(header(&r.read("fig4/fit.csv")), "a,mu_h1,r_squared,verdict");
}
