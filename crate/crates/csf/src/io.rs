//! On-disk formats: flow traces as snapshot directories, the wedge table as
//! CSV with a JSON sidecar, run configurations and reports as JSON, and flat
//! CSV exports for plotting. All numeric text uses Rust's shortest
//! round-trip formatting, so write/read cycles are bit-exact.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::estimates::EstimateReport;
use crate::solver::{eval_piecewise, Boundary, FlowTrace, Grid, InitialData, SchemeInfo};
use crate::wedge::WedgeProfile;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("trace directory {0} has no meta.json")]
    MissingMeta(PathBuf),
    #[error("{path}: expected {expected} data rows, found {found}")]
    SnapshotShape {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    BadConfig(String),
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, detail: impl ToString) -> IoError {
    IoError::Malformed {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

/// Root for relative data paths: `$CSF_DATA_DIR` if set, else the current
/// directory.
pub fn data_dir() -> PathBuf {
    std::env::var_os("CSF_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Everything needed to reproduce a flow run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub initial: InitialData,
    pub half_width: f64,
    pub intervals: usize,
    /// `"dirichlet"` or `"neumann"`; prescribed boundaries carry closures
    /// and exist only in code.
    pub boundary: String,
    pub snapshot_times: Vec<f64>,
    pub safety: f64,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid, IoError> {
        Grid::new(self.half_width, self.intervals)
            .map_err(|e| IoError::BadConfig(e.to_string()))
    }

    pub fn boundary(&self) -> Result<Boundary, IoError> {
        match self.boundary.as_str() {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(IoError::BadConfig(format!(
                "boundary must be \"dirichlet\" or \"neumann\", got \"{other}\""
            ))),
        }
    }
}

/// Serialize any report or config as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| malformed(path, e))?;
    fs::write(path, text + "\n").map_err(file_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(file_err(path))?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TraceMeta {
    grid: Grid,
    times: Vec<f64>,
    boundary_flux: Vec<f64>,
    scheme: SchemeInfo,
    snapshots: Vec<String>,
}

fn snapshot_name(t: f64) -> String {
    format!("t_{t:.6}.csv")
}

/// Write a trace as a directory: `meta.json` plus one `t_<time>.csv` per
/// snapshot with full-precision `x,y` columns.
pub fn write_trace(dir: &Path, trace: &FlowTrace) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(file_err(dir))?;
    let names: Vec<String> = trace.times.iter().map(|&t| snapshot_name(t)).collect();
    for w in names.windows(2) {
        if w[0] == w[1] {
            return Err(IoError::BadConfig(format!(
                "snapshot times collide at microsecond precision: {}",
                w[0]
            )));
        }
    }
    let meta = TraceMeta {
        grid: trace.grid,
        times: trace.times.clone(),
        boundary_flux: trace.boundary_flux.clone(),
        scheme: trace.scheme.clone(),
        snapshots: names.clone(),
    };
    write_json(&dir.join("meta.json"), &meta)?;
    for (k, name) in names.iter().enumerate() {
        let path = dir.join(name);
        let mut out = String::with_capacity(trace.grid.nodes() * 32);
        out.push_str("x,y\n");
        for (i, y) in trace.states[k].iter().enumerate() {
            out.push_str(&format!("{},{}\n", trace.grid.x(i), y));
        }
        fs::write(&path, out).map_err(file_err(&path))?;
    }
    Ok(())
}

/// Read back a trace directory, checking each snapshot against the grid.
pub fn read_trace(dir: &Path) -> Result<FlowTrace, IoError> {
    let meta_path = dir.join("meta.json");
    if !meta_path.exists() {
        return Err(IoError::MissingMeta(dir.to_path_buf()));
    }
    let meta: TraceMeta = read_json(&meta_path)?;
    if meta.snapshots.len() != meta.times.len() {
        return Err(malformed(
            &meta_path,
            format!(
                "{} snapshot files listed for {} times",
                meta.snapshots.len(),
                meta.times.len()
            ),
        ));
    }
    let nodes = meta.grid.nodes();
    let mut states = Vec::with_capacity(meta.snapshots.len());
    for name in &meta.snapshots {
        let path = dir.join(name);
        let text = fs::read_to_string(&path).map_err(file_err(&path))?;
        let mut lines = text.lines();
        match lines.next() {
            Some("x,y") => {}
            other => {
                return Err(malformed(
                    &path,
                    format!("expected header \"x,y\", found {other:?}"),
                ))
            }
        }
        let mut values = Vec::with_capacity(nodes);
        for (lineno, line) in lines.enumerate() {
            let (_, y_text) = line.split_once(',').ok_or_else(|| {
                malformed(&path, format!("line {}: no comma", lineno + 2))
            })?;
            let y: f64 = y_text.parse().map_err(|e| {
                malformed(&path, format!("line {}: {e}", lineno + 2))
            })?;
            values.push(y);
        }
        if values.len() != nodes {
            return Err(IoError::SnapshotShape {
                path,
                expected: nodes,
                found: values.len(),
            });
        }
        states.push(values);
    }
    Ok(FlowTrace {
        grid: meta.grid,
        times: meta.times,
        states,
        boundary_flux: meta.boundary_flux,
        scheme: meta.scheme,
    })
}

/// Constants stored beside the wedge table so a reader can cross-check the
/// rebuilt profile without re-deriving them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeSidecar {
    pub symmetric_point: f64,
    pub d: f64,
    pub tail_coefficient: f64,
    pub x_max: f64,
    pub tolerance: f64,
    pub area_check: f64,
    pub first_integral_spread: f64,
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Write the wedge sample table as `x,w,wprime` CSV plus a JSON sidecar of
/// derived constants.
pub fn write_wedge_csv(path: &Path, profile: &WedgeProfile) -> Result<(), IoError> {
    let (xs, ws, wps) = profile.samples();
    let mut out = String::with_capacity(xs.len() * 64);
    out.push_str("x,w,wprime\n");
    for i in 0..xs.len() {
        out.push_str(&format!("{},{},{}\n", xs[i], ws[i], wps[i]));
    }
    fs::write(path, out).map_err(file_err(path))?;
    let sidecar = WedgeSidecar {
        symmetric_point: profile.symmetric_point,
        d: profile.d,
        tail_coefficient: profile.tail_coefficient,
        x_max: profile.x_max,
        tolerance: profile.tolerance,
        area_check: profile.total_area(),
        first_integral_spread: profile.first_integral_spread(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

/// Rebuild a profile from a wedge CSV; the sidecar supplies the recorded
/// shot tolerance when present.
pub fn read_wedge_csv(path: &Path) -> Result<WedgeProfile, IoError> {
    let text = fs::read_to_string(path).map_err(file_err(path))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("x,w,wprime") => {}
        other => {
            return Err(malformed(
                path,
                format!("expected header \"x,w,wprime\", found {other:?}"),
            ))
        }
    }
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    let mut wps = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let mut parts = line.split(',');
        let mut parse = |field: &str| -> Result<f64, IoError> {
            parts
                .next()
                .ok_or_else(|| {
                    malformed(path, format!("line {}: missing {field}", lineno + 2))
                })?
                .parse()
                .map_err(|e| malformed(path, format!("line {}: {field}: {e}", lineno + 2)))
        };
        xs.push(parse("x")?);
        ws.push(parse("w")?);
        wps.push(parse("wprime")?);
    }
    if xs.len() < 2 {
        return Err(malformed(path, "need at least two samples"));
    }
    let tolerance = match read_json::<WedgeSidecar>(&sidecar_path(path)) {
        Ok(sidecar) => sidecar.tolerance,
        Err(_) => crate::wedge::DEFAULT_BISECTION_TOL,
    };
    Ok(WedgeProfile::from_samples(xs, ws, wps, tolerance))
}

/// Flat CSV exports for plotting.
pub enum PlotData<'a> {
    /// Rows `t,x,y` over every snapshot.
    Snapshots(&'a FlowTrace),
    /// Rows `t,x,y,wedge_bound` with the scaled wedge sampled at `|x|`;
    /// the `t = 0` snapshot is skipped since the bound degenerates there.
    WedgeOverlay {
        trace: &'a FlowTrace,
        wedge: &'a WedgeProfile,
    },
    /// Rows `estimate,t,margin` listing each verifier's signed worst
    /// violation per applying snapshot.
    EstimateMargins(&'a [EstimateReport]),
}

pub fn export_plot_data(path: &Path, data: &PlotData) -> Result<(), IoError> {
    let mut out = String::new();
    match data {
        PlotData::Snapshots(trace) => {
            out.push_str("t,x,y\n");
            for (t, state) in trace.iter() {
                for (i, y) in state.iter().enumerate() {
                    out.push_str(&format!("{t},{},{y}\n", trace.grid.x(i)));
                }
            }
        }
        PlotData::WedgeOverlay { trace, wedge } => {
            out.push_str("t,x,y,wedge_bound\n");
            let h = trace.grid.h();
            for (t, state) in trace.iter() {
                if t <= 0.0 {
                    continue;
                }
                for (i, y) in state.iter().enumerate() {
                    let x = trace.grid.x(i);
                    let bound = wedge.scaled(x.abs().max(h / 2.0), t);
                    out.push_str(&format!("{t},{x},{y},{bound}\n"));
                }
            }
        }
        PlotData::EstimateMargins(reports) => {
            out.push_str("estimate,t,margin\n");
            for report in reports.iter() {
                for check in &report.per_snapshot {
                    if let Some(v) = check.max_violation {
                        out.push_str(&format!("{},{},{v}\n", report.name, check.t));
                    }
                }
            }
        }
    }
    fs::write(path, out).map_err(file_err(path))
}

/// Replace every file-backed `Samples` node with the table read from disk.
/// Relative paths resolve against `base`. Mollified wrappers are kept;
/// expanding them is the experiments layer's job.
pub fn resolve_initial(data: &InitialData, base: &Path) -> Result<InitialData, IoError> {
    match data {
        InitialData::Samples { path } => {
            let full = if Path::new(path).is_absolute() {
                PathBuf::from(path)
            } else {
                base.join(path)
            };
            let (xs, ys) = read_samples_csv(&full)?;
            Ok(InitialData::PiecewiseLinear { xs, ys })
        }
        InitialData::Mollified { base: inner, radius } => Ok(InitialData::Mollified {
            base: Box::new(resolve_initial(inner, base)?),
            radius: *radius,
        }),
        other => Ok(other.clone()),
    }
}

/// Read `x,y` sample pairs; abscissas must be non-decreasing.
pub fn read_samples_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let text = fs::read_to_string(path).map_err(file_err(path))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("x,y") => {}
        other => {
            return Err(malformed(
                path,
                format!("expected header \"x,y\", found {other:?}"),
            ))
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let (x_text, y_text) = line
            .split_once(',')
            .ok_or_else(|| malformed(path, format!("line {}: no comma", lineno + 2)))?;
        let x: f64 = x_text
            .parse()
            .map_err(|e| malformed(path, format!("line {}: x: {e}", lineno + 2)))?;
        let y: f64 = y_text
            .parse()
            .map_err(|e| malformed(path, format!("line {}: y: {e}", lineno + 2)))?;
        xs.push(x);
        ys.push(y);
    }
    if xs.len() < 2 {
        return Err(malformed(path, "need at least two samples"));
    }
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(malformed(path, "abscissas must be non-decreasing"));
    }
    Ok((xs, ys))
}

/// Evaluate file-backed samples without materializing an `InitialData`.
pub fn sample_file_at(path: &Path, x: f64) -> Result<f64, IoError> {
    let (xs, ys) = read_samples_csv(path)?;
    Ok(eval_piecewise(&xs, &ys, x))
}
