//! Result files. Everything is written to a temporary sibling and renamed
//! into place, so readers never see a half-written file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// A number with its error estimate: quadrature error, tolerance or
/// measured discretisation error, depending on the record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Output(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = std::fs::File::create(&tmp).map_err(err)?;
        f.write_all(bytes).map_err(err)?;
        f.sync_all().map_err(err)?;
    }
    std::fs::rename(&tmp, path).map_err(err)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// CSV with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let e = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(e)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v}"))).map_err(e)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Creates the directory and checks that it accepts files.
pub fn prepare_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let probe = dir.join(format!(".probe.{}", std::process::id()));
    std::fs::write(&probe, b"").map_err(|e| CliError::Output(format!("{} is not writable: {e}", dir.display())))?;
    let _ = std::fs::remove_file(&probe);
    Ok(dir.to_path_buf())
}

/// Gnuplot script plotting columns `x:y` (1-based) of a CSV, one curve per
/// `(column, title)`.
pub fn gnuplot_script(csv: &str, xlabel: &str, ylabel: &str, logscale: bool, curves: &[(usize, usize, &str)]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key top right\n");
    s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"));
    if logscale {
        s.push_str("set logscale xy\n");
    }
    let plots: Vec<String> = curves
        .iter()
        .map(|(x, y, title)| format!("'{csv}' using {x}:{y} skip 1 with linespoints title '{title}'"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
