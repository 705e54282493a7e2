use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::RunRecord;
use crate::error::Result;
use crate::optimizer::TracePoint;

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never observe a truncated file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per run: `problem,cht,run_index,seed,best_f,best_viol,feasible,success,min_fes`.
pub fn results_csv(problem: &str, cht: &str, records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "problem", "cht", "run_index", "seed", "best_f", "best_viol", "feasible", "success", "min_fes",
    ])?;
    for r in records {
        w.write_record([
            problem.to_string(),
            cht.to_string(),
            r.run_index.to_string(),
            r.seed.to_string(),
            r.best_f.to_string(),
            r.best_viol.to_string(),
            r.feasible.to_string(),
            opt(r.success),
            opt(r.min_fes),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// `fes,best_f,best_viol`; `best_f` is empty until a feasible point is found.
pub fn trace_csv(trace: &[TracePoint]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fes", "best_f", "best_viol"])?;
    for t in trace {
        w.write_record([t.fes.to_string(), opt(t.best_f), t.best_viol.to_string()])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn write_results_csv(path: &Path, problem: &str, cht: &str, records: &[RunRecord]) -> Result<()> {
    write_atomic(path, &results_csv(problem, cht, records)?)
}

pub fn write_trace_csv(path: &Path, trace: &[TracePoint]) -> Result<()> {
    write_atomic(path, &trace_csv(trace)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
