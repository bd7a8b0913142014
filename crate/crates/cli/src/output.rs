use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use proxgn_core::IterationRecord;
use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_HEADER: &str =
    "index,sigma,step_norm,residual_norm,smallest_singular,stationarity_residual";

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("--out: cannot create {}: {e}", dir.display())))?;
    let target = dir.join(name);
    let io = |e: std::io::Error| {
        CliError::usage(format!("--out: cannot write {}: {e}", target.display()))
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("cannot serialize {name}: {e}")))?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

fn cell(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, "{v:e}");
    } else {
        let _ = write!(out, "{v}");
    }
}

pub fn trace_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let _ = write!(out, "{},", r.index);
        if let Some(s) = r.sigma {
            cell(&mut out, s);
        }
        for v in [
            r.step_norm,
            r.residual_norm,
            r.smallest_singular,
            r.stationarity_residual,
        ] {
            out.push(',');
            cell(&mut out, v);
        }
        out.push('\n');
    }
    out
}
