//! Atomic file writes and CSV emitters for plot data.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Writes via a temporary file in the same directory plus rename, so
/// interrupted campaigns never leave half-written artifacts.
pub fn atomic_write(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp-{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// delta_norm,fidelity_gap rows (neighborhood scatter).
pub fn write_scatter(path: &Path, scatter: &[(f64, f64)]) -> std::io::Result<()> {
    let mut buf = String::from("delta_norm,fidelity_gap\n");
    for (d, g) in scatter {
        buf.push_str(&format!("{d},{g}\n"));
    }
    atomic_write(path, buf.as_bytes())
}

/// run,iteration,error rows (convergence histories).
pub fn write_histories(path: &Path, histories: &[Vec<f64>]) -> std::io::Result<()> {
    let mut buf = String::from("run,iteration,error\n");
    for (run, h) in histories.iter().enumerate() {
        for (it, e) in h.iter().enumerate() {
            buf.push_str(&format!("{run},{it},{e}\n"));
        }
    }
    atomic_write(path, buf.as_bytes())
}

/// error,count rows (cumulative run counts).
pub fn write_cumulative(path: &Path, cumulative: &[(f64, usize)]) -> std::io::Result<()> {
    let mut buf = String::from("error,count\n");
    for (e, c) in cumulative {
        buf.push_str(&format!("{e},{c}\n"));
    }
    atomic_write(path, buf.as_bytes())
}

/// lo,hi,count rows (terminal-error histogram).
pub fn write_histogram(
    path: &Path,
    bins: &[landscape_lab::optimize::HistogramBin],
) -> std::io::Result<()> {
    let mut buf = String::from("lo,hi,count\n");
    for b in bins {
        buf.push_str(&format!("{},{},{}\n", b.lo, b.hi, b.count));
    }
    atomic_write(path, buf.as_bytes())
}

/// t,f rows (sampled control, one channel).
pub fn write_sampled_control(path: &Path, times: &[f64], values: &[f64]) -> std::io::Result<()> {
    let mut buf = String::from("t,f\n");
    for (t, f) in times.iter().zip(values) {
        buf.push_str(&format!("{t},{f}\n"));
    }
    atomic_write(path, buf.as_bytes())
}

/// Dense real matrix as plain CSV rows.
pub fn write_matrix(path: &Path, m: &ndarray::Array2<f64>) -> std::io::Result<()> {
    let mut buf = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[[i, j]])).collect();
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())
}
