use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{EvalError, MaeReport, Result, Trace};
use crate::format::{atomic_write, sig6};

pub fn render_mae_csv(report: &MaeReport) -> String {
    let mut out =
        String::from("mechanism,param_name,param_value,empirical_mae_wh,analytic_mae_wh,std_error_wh,n_readings\n");
    for e in &report.entries {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.mechanism,
            e.param_name,
            sig6(e.param_value),
            sig6(e.empirical_mae_wh),
            sig6(e.analytic_mae_wh),
            sig6(e.std_error_wh),
            e.n_readings
        )
        .unwrap();
    }
    out
}

pub fn render_trace_csv(trace: &Trace) -> String {
    let mut out = String::from("timestamp_min,original_wh,protected_wh\n");
    for p in &trace.points {
        writeln!(
            out,
            "{},{},{}",
            p.timestamp_min,
            sig6(p.original_wh),
            sig6(p.protected_wh)
        )
        .unwrap();
    }
    out
}

/// `trace_<mechanism>_<param>_<value>.csv`
pub fn trace_file_name(trace: &Trace) -> String {
    format!(
        "trace_{}_{}_{}.csv",
        trace.mechanism,
        trace.param_name,
        sig6(trace.param_value)
    )
}

#[derive(Serialize)]
struct JsonReport<'a> {
    entries: &'a [super::MaeEntry],
    strictly_decreasing: &'a std::collections::BTreeMap<crate::dp::Mechanism, bool>,
}

/// Writes `mae.csv`, `mae.json` and one trace CSV per trace into `out_dir`.
///
/// All file contents are rendered before anything is written, and each file
/// is replaced atomically. Returns the written paths in order.
pub fn emit_report(report: &MaeReport, traces: &[Trace], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if report.is_empty() {
        return Err(EvalError::InvalidArgument("empty report".into()));
    }
    let json = JsonReport {
        entries: &report.entries,
        strictly_decreasing: &report.strictly_decreasing,
    };
    let mut files: Vec<(PathBuf, String)> = vec![
        (out_dir.join("mae.csv"), render_mae_csv(report)),
        (
            out_dir.join("mae.json"),
            serde_json::to_string_pretty(&json).expect("report serializes") + "\n",
        ),
    ];
    for trace in traces {
        files.push((out_dir.join(trace_file_name(trace)), render_trace_csv(trace)));
    }

    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EvalError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    for (path, contents) in &files {
        atomic_write(path, contents.as_bytes()).map_err(io(path))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
