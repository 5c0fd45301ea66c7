//! Plain CSV emission with fixed headers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fisher_stab::pde_sim::Trace;
use fisher_stab::spectral::StateField;

pub const SPECTRUM_HEADER: &str = "j,lambda,dphi1";
pub const GAINS_HEADER: &str = "quantity,row,col,value";
pub const TRACE_HEADER: &str = "t,l2,h1,u_control,blowup";
pub const SNAPSHOT_HEADER: &str = "t,x,u";
pub const SWEEP_HEADER: &str = "a,verdict,mu_fit,final_ratio";
pub const VERIFY_HEADER: &str = "check,value,threshold,pass";
pub const H1_HEADER: &str = "a,t,h1";
pub const FIT_HEADER: &str = "a,mu_h1,r_squared,verdict";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, header: &str) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "{header}")?;
        Ok(Self { path, out })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> std::io::Result<()> {
        let mut first = true;
        for f in fields {
            if !first {
                self.out.write_all(b",")?;
            }
            self.out.write_all(f.as_ref().as_bytes())?;
            first = false;
        }
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// Every `stride`-th row of the trace plus the last one. The blowup column is
/// 1 only on the row where the run was truncated.
pub fn write_trace(dir: &Path, name: &str, trace: &Trace, stride: usize) -> std::io::Result<PathBuf> {
    let mut csv = CsvFile::create(dir, name, TRACE_HEADER)?;
    let n = trace.len();
    let stride = stride.max(1);
    for i in 0..n {
        if i % stride != 0 && i + 1 != n {
            continue;
        }
        let blown = trace.blowup_flag && i + 1 == n;
        csv.row(&[
            real(trace.times[i]),
            real(trace.l2[i]),
            real(trace.h1[i]),
            real(trace.control[i]),
            if blown { "1".into() } else { "0".into() },
        ])?;
    }
    csv.finish()
}

pub fn write_snapshots(dir: &Path, name: &str, snapshots: &[StateField]) -> std::io::Result<PathBuf> {
    let mut csv = CsvFile::create(dir, name, SNAPSHOT_HEADER)?;
    for s in snapshots {
        let t = real(s.time());
        for (i, u) in s.values().iter().enumerate() {
            csv.row(&[t.clone(), real(s.grid().x(i)), real(*u)])?;
        }
    }
    csv.finish()
}
