//! Explicit finite-difference solver for the graphical flow
//!
//! ```text
//! y_t = (arctan y_x)_x
//! ```
//!
//! on a uniform grid over `[-half_width, half_width]`. The scheme is the
//! conservative forward-Euler discretization with edge fluxes
//! `F_{i+1/2} = arctan((y_{i+1} - y_i)/h)` and update
//! `y_i += (dt/h)(F_{i+1/2} - F_{i-1/2})`. It is monotone exactly when
//! `dt <= h²/2`, which [`run`] enforces; under that bound the comparison
//! principle and the maximum principle hold at the discrete level.
//!
//! Snapshots are taken at exactly the requested times by shortening the final
//! step into each target. Every trace carries the cumulative boundary flux
//! `∫ (F_right - F_left) dt`, which for held (Dirichlet) ends accounts for the
//! change of the trapezoid area exactly, up to rounding: the interior update
//! telescopes.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Uniform grid on `[-half_width, half_width]` with `intervals + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub intervals: usize,
}

impl Grid {
    pub fn new(half_width: f64, intervals: usize) -> Result<Self, SolverError> {
        if !(half_width > 0.0) || !half_width.is_finite() || intervals < 2 {
            return Err(SolverError::BadGrid {
                half_width,
                intervals,
            });
        }
        Ok(Grid {
            half_width,
            intervals,
        })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.intervals as f64
    }

    pub fn nodes(&self) -> usize {
        self.intervals + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| self.x(i)).collect()
    }
}

/// Nodal values of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.nodes() {
            return Err(SolverError::LengthMismatch {
                got: values.len(),
                want: grid.nodes(),
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.grid.x(i)
    }
}

/// Initial condition, either closed-form or tabulated. `Samples` and
/// `Mollified` are placeholders that must be resolved (file loaded,
/// convolution performed) into one of the other variants before
/// [`sample_initial`] can evaluate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialData {
    /// The spike `n(1 - n|x|)₊`: unit mass, height `n`, support `2/n`.
    WitchHat { n: u32 },
    /// Piecewise-linear interpolation of `(xs, ys)` with `xs` non-decreasing.
    /// A repeated abscissa encodes a jump; sampling exactly at the jump
    /// returns the midpoint of the two one-sided values. Outside the table
    /// the end values continue constantly.
    PiecewiseLinear { xs: Vec<f64>, ys: Vec<f64> },
    /// Values to be loaded from a two-column CSV file.
    Samples { path: String },
    /// `base` convolved with a compactly supported bump of the given radius.
    Mollified { base: Box<InitialData>, radius: f64 },
}

impl InitialData {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialData::WitchHat { .. } => "witch_hat",
            InitialData::PiecewiseLinear { .. } => "piecewise_linear",
            InitialData::Samples { .. } => "samples",
            InitialData::Mollified { .. } => "mollified",
        }
    }
}

/// End-node policy applied after each interior update.
#[derive(Clone)]
pub enum Boundary {
    /// Ends keep their initial values.
    Dirichlet,
    /// Ends copy their inner neighbor (zero discrete slope).
    Neumann,
    /// Ends follow prescribed functions of time, evaluated at the time level
    /// just reached. Used for fixtures whose exact solution is known.
    Prescribed {
        left: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        right: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl Boundary {
    pub fn prescribed(
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Boundary::Prescribed {
            left: Arc::new(left),
            right: Arc::new(right),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
            Boundary::Prescribed { .. } => "prescribed",
        }
    }
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Discretization parameters recorded alongside a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeInfo {
    pub h: f64,
    pub dt: f64,
    pub safety: f64,
    pub boundary: String,
    pub steps: u64,
}

/// Snapshots of one run: `times[0] == 0` holds the initial state, and
/// `boundary_flux[k]` is the cumulative `∫ (F_right - F_left) dt` up to
/// `times[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub boundary_flux: Vec<f64>,
    pub scheme: SchemeInfo,
}

impl FlowTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Pairs `(t, state)` in time order, starting at `t = 0`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times
            .iter()
            .copied()
            .zip(self.states.iter().map(|s| s.as_slice()))
    }

    /// State at the snapshot time closest to `t` within one part in 10⁹.
    pub fn state_at(&self, t: f64) -> Option<&[f64]> {
        let i = self
            .times
            .iter()
            .position(|&ti| (ti - t).abs() <= 1e-9 * t.abs().max(1.0))?;
        Some(&self.states[i])
    }

    pub fn function(&self, index: usize) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.states[index].clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("grid needs positive half-width and at least two intervals, got {half_width} and {intervals}")]
    BadGrid { half_width: f64, intervals: usize },
    #[error("value vector has {got} entries but the grid has {want} nodes")]
    LengthMismatch { got: usize, want: usize },
    #[error("time step {dt:e} exceeds the monotonicity bound h²/2 = {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("snapshot times must be finite, positive and strictly increasing")]
    BadSnapshotTimes,
    #[error("solution lost finiteness by t = {t}")]
    NonFinite { t: f64 },
    #[error("initial values must be finite")]
    NonFiniteInitial,
    #[error("initial data of kind `{0}` must be resolved before sampling")]
    UnresolvedInitialData(&'static str),
    #[error("piecewise-linear table invalid: {0}")]
    BadPiecewise(String),
}

/// Largest monotone time step for spacing `h`, derated by `safety`.
pub fn cfl_dt(h: f64, safety: f64) -> f64 {
    safety * h * h / 2.0
}

/// One forward-Euler step. `flux` is scratch of length `y.len() - 1`; it
/// holds the edge fluxes of the state *before* the update on return. The
/// returned pair is `(F_left, F_right)`, the outermost fluxes acting on the
/// interior during this step.
pub fn step(
    y: &mut [f64],
    flux: &mut [f64],
    h: f64,
    dt: f64,
    boundary: &Boundary,
    t_new: f64,
) -> (f64, f64) {
    let n = y.len();
    debug_assert_eq!(flux.len(), n - 1);
    let inv_h = 1.0 / h;
    for (f, w) in flux.iter_mut().zip(y.windows(2)) {
        *f = ((w[1] - w[0]) * inv_h).atan();
    }
    let scale = dt * inv_h;
    for (yi, fw) in y[1..n - 1].iter_mut().zip(flux.windows(2)) {
        *yi += scale * (fw[1] - fw[0]);
    }
    match boundary {
        Boundary::Dirichlet => {}
        Boundary::Neumann => {
            y[0] = y[1];
            y[n - 1] = y[n - 2];
        }
        Boundary::Prescribed { left, right } => {
            y[0] = left(t_new);
            y[n - 1] = right(t_new);
        }
    }
    (flux[0], flux[n - 2])
}

/// Marches `initial` forward and records the state at each requested time.
///
/// Times must be finite, positive and strictly increasing; `t = 0` is always
/// stored as the first snapshot. The step is `cfl_dt(h, safety)` and the last
/// step into each target is shortened so snapshot times are hit exactly.
/// Finiteness is checked at every snapshot; losing it is fatal.
pub fn run(
    initial: &GridFunction,
    boundary: &Boundary,
    snapshot_times: &[f64],
    safety: f64,
) -> Result<FlowTrace, SolverError> {
    let grid = initial.grid;
    if initial.values.len() != grid.nodes() {
        return Err(SolverError::LengthMismatch {
            got: initial.values.len(),
            want: grid.nodes(),
        });
    }
    if initial.values.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteInitial);
    }
    let mut previous = 0.0;
    for &t in snapshot_times {
        if !t.is_finite() || t <= previous {
            return Err(SolverError::BadSnapshotTimes);
        }
        previous = t;
    }

    let h = grid.h();
    let limit = h * h / 2.0;
    let dt = cfl_dt(h, safety);
    if !(safety > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(SolverError::CflViolation { dt, limit });
    }

    let mut y = initial.values.clone();
    let mut flux = vec![0.0; grid.nodes() - 1];
    let mut times = Vec::with_capacity(snapshot_times.len() + 1);
    let mut states = Vec::with_capacity(snapshot_times.len() + 1);
    let mut budget = Vec::with_capacity(snapshot_times.len() + 1);
    times.push(0.0);
    states.push(y.clone());
    budget.push(0.0);

    let mut t = 0.0;
    let mut cumulative = 0.0;
    let mut steps: u64 = 0;
    for &target in snapshot_times {
        loop {
            let remaining = target - t;
            if remaining <= 0.0 {
                break;
            }
            let hitting = remaining <= dt;
            let dt_step = if hitting { remaining } else { dt };
            let t_new = if hitting { target } else { t + dt_step };
            let (fl, fr) = step(&mut y, &mut flux, h, dt_step, boundary, t_new);
            cumulative += dt_step * (fr - fl);
            steps += 1;
            t = t_new;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { t: target });
        }
        times.push(target);
        states.push(y.clone());
        budget.push(cumulative);
    }

    Ok(FlowTrace {
        grid,
        times,
        states,
        boundary_flux: budget,
        scheme: SchemeInfo {
            h,
            dt,
            safety,
            boundary: boundary.name().to_string(),
            steps,
        },
    })
}

/// Evaluates resolved initial data at the grid nodes.
///
/// `Samples` and `Mollified` are rejected here; loading files and performing
/// convolutions are the callers' jobs and happen in the io and experiments
/// layers.
pub fn sample_initial(data: &InitialData, grid: &Grid) -> Result<Vec<f64>, SolverError> {
    match data {
        InitialData::WitchHat { n } => {
            if *n == 0 {
                return Err(SolverError::BadPiecewise(
                    "witch hat needs n >= 1".to_string(),
                ));
            }
            let nf = *n as f64;
            Ok((0..grid.nodes())
                .map(|i| (nf * (1.0 - nf * grid.x(i).abs())).max(0.0))
                .collect())
        }
        InitialData::PiecewiseLinear { xs, ys } => {
            validate_table(xs, ys)?;
            Ok((0..grid.nodes())
                .map(|i| eval_piecewise(xs, ys, grid.x(i)))
                .collect())
        }
        InitialData::Samples { .. } | InitialData::Mollified { .. } => {
            Err(SolverError::UnresolvedInitialData(data.kind()))
        }
    }
}

fn validate_table(xs: &[f64], ys: &[f64]) -> Result<(), SolverError> {
    if xs.len() != ys.len() {
        return Err(SolverError::BadPiecewise(format!(
            "{} abscissas vs {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(SolverError::BadPiecewise(
            "need at least two breakpoints".to_string(),
        ));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(SolverError::BadPiecewise(
            "non-finite breakpoint".to_string(),
        ));
    }
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(SolverError::BadPiecewise(
            "abscissas must be non-decreasing".to_string(),
        ));
    }
    Ok(())
}

/// Piecewise-linear evaluation with the jump conventions of
/// [`InitialData::PiecewiseLinear`].
pub fn eval_piecewise(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let lo = xs.partition_point(|&u| u < x);
    if lo == xs.len() {
        return *ys.last().unwrap();
    }
    if xs[lo] == x {
        // All table entries equal to x span lo..hi; two or more encode a
        // jump, sampled at its midpoint.
        let hi = xs.partition_point(|&u| u <= x);
        return if hi - lo >= 2 {
            0.5 * (ys[lo] + ys[hi - 1])
        } else {
            ys[lo]
        };
    }
    if lo == 0 {
        return ys[0];
    }
    let (x0, x1) = (xs[lo - 1], xs[lo]);
    let s = (x - x0) / (x1 - x0);
    ys[lo - 1] + s * (ys[lo] - ys[lo - 1])
}
