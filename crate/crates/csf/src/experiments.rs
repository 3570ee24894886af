//! End-to-end constructions on top of the solver and the wedge profile: the
//! witch-hat delta-approximation family, the mollification pipeline for L¹
//! data, Lᵖ smoothing sweeps, the grim-reaper convergence fixture, and the
//! sharpness check for the height-gradient bound. Each experiment returns an
//! [`ExperimentReport`] with flat numeric tables and named pass/fail
//! conclusions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::PI;
use thiserror::Error;

use crate::analysis::{norms, trapezoid_area};
use crate::estimates::{default_slack, verify_separation, EstimateError};
use crate::solver::{
    eval_piecewise, run, sample_initial, Boundary, FlowTrace, Grid, GridFunction, InitialData,
    SolverError,
};
use crate::wedge::{WedgeError, WedgeProfile};

/// CFL derating used by every experiment run.
pub const DEFAULT_SAFETY: f64 = 0.8;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("grid spacing {h} too coarse or misaligned for witch hat n = {n}: need h ≤ 1/(10n) with ±1/n on nodes")]
    GridTooCoarse { n: u32, h: f64 },
    #[error("{0}")]
    BadParameter(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Wedge(#[from] WedgeError),
}

/// Flat numeric table, one row per measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows where the named column equals `value` within one part in 10⁹.
    pub fn select(&self, name: &str, value: f64) -> Vec<&Vec<f64>> {
        match self.column(name) {
            Some(i) => self
                .rows
                .iter()
                .filter(|r| (r[i] - value).abs() <= 1e-9 * value.abs().max(1.0))
                .collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: serde_json::Value,
    pub tables: Vec<Table>,
    pub conclusions: Vec<Conclusion>,
}

impl ExperimentReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn conclusion(&self, name: &str) -> Option<&Conclusion> {
        self.conclusions.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.conclusions.iter().all(|c| c.pass)
    }
}

/// The unit-mass spike `n(1 - n|x|)₊`: height `n`, support `[-1/n, 1/n]`,
/// `‖·‖₁ = 1` for every `n`, threshold time `τ = 1/π`.
pub fn witch_hat(n: u32) -> InitialData {
    InitialData::WitchHat { n }
}

/// Requires the grid to resolve the hat for `n`: at least ten intervals per
/// half-support, breakpoints `±1/n` on nodes, and a node at the center.
pub fn check_delta_grid(n: u32, grid: &Grid) -> Result<(), ExperimentError> {
    let h = grid.h();
    let width = 1.0 / n as f64;
    let per_side = width / h;
    let aligned = (per_side - per_side.round()).abs() < 1e-9 && grid.intervals % 2 == 0;
    if h > width / 10.0 * (1.0 + 1e-12) || !aligned {
        return Err(ExperimentError::GridTooCoarse { n, h });
    }
    Ok(())
}

fn max_even_asymmetry(values: &[f64]) -> f64 {
    let n = values.len();
    (0..n / 2)
        .map(|i| (values[i] - values[n - 1 - i]).abs())
        .fold(0.0, f64::max)
}

/// Delta-approximation runs plus the report built from them, for callers
/// that need the raw traces as well.
pub struct DeltaExperiment {
    pub report: ExperimentReport,
    pub traces: Vec<(u32, FlowTrace)>,
}

/// Flows the witch-hat family and checks the trends expected on the way to
/// the delta-function limit:
///
/// (a) before τ the sup and Lipschitz norms grow with n;
/// (b) the center height stays above `n/2·(1 - πt)`;
/// (c) after τ the slope obeys the delayed bound `tan(¼(1/t + π))`;
/// (d) before τ and on `x ∈ [0.5, 2]` the profiles approach the scaled wedge
///     as n grows.
///
/// All runs share one grid, which must resolve the finest hat: `h ≤ 1/(10n)`
/// with the breakpoints `±1/n` on nodes. Snapshot times must straddle
/// `τ = 1/π`.
pub fn run_delta_experiment_full(
    ns: &[u32],
    grid: &Grid,
    times: &[f64],
    wedge: &WedgeProfile,
) -> Result<DeltaExperiment, ExperimentError> {
    validate_delta_inputs(ns, grid, times)?;
    let mut traces = Vec::with_capacity(ns.len());
    for &n in ns {
        let values = sample_initial(&witch_hat(n), grid)?;
        let initial = GridFunction::new(*grid, values)?;
        traces.push((n, run(&initial, &Boundary::Dirichlet, times, DEFAULT_SAFETY)?));
    }
    let report = delta_report_from_traces(&traces, grid, times, wedge)?;
    Ok(DeltaExperiment { report, traces })
}

fn validate_delta_inputs(ns: &[u32], grid: &Grid, times: &[f64]) -> Result<(), ExperimentError> {
    let tau = 1.0 / PI;
    if ns.is_empty() {
        return Err(ExperimentError::BadParameter("need at least one n".into()));
    }
    if !times.iter().any(|&t| t < tau) || !times.iter().any(|&t| t > tau) {
        return Err(ExperimentError::BadParameter(format!(
            "snapshot times must straddle τ = {tau:.5}"
        )));
    }
    for &n in ns {
        check_delta_grid(n, grid)?;
    }
    Ok(())
}

/// Build the delta-family report from traces that were run elsewhere (for
/// callers that parallelize the flows). Every trace must live on `grid` with
/// the given snapshot list.
pub fn delta_report_from_traces(
    traces: &[(u32, FlowTrace)],
    grid: &Grid,
    times: &[f64],
    wedge: &WedgeProfile,
) -> Result<ExperimentReport, ExperimentError> {
    let ns: Vec<u32> = traces.iter().map(|(n, _)| *n).collect();
    let ns = ns.as_slice();
    validate_delta_inputs(ns, grid, times)?;
    for (n, trace) in traces {
        if trace.grid != *grid || trace.times.split_first().map(|(_, rest)| rest) != Some(times)
        {
            return Err(ExperimentError::BadParameter(format!(
                "trace for n = {n} does not match the shared grid and times"
            )));
        }
    }
    let tau = 1.0 / PI;
    let h = grid.h();
    let slack = default_slack(h);
    let center = grid.nodes() / 2;

    let mut norms_table = Table::new("norms", &["n", "t", "sup_y", "lip", "center_y"]);
    let mut deviation_table = Table::new("wedge_deviation", &["n", "t", "max_rel_deviation"]);
    let mut post_tau_table = Table::new("post_tau_gradient", &["n", "t", "lip", "bound"]);
    let mut worst_asymmetry = 0.0f64;

    for (n, trace) in traces {
        let nf = *n as f64;
        for (k, (t, state)) in trace.iter().enumerate() {
            if t <= 0.0 {
                continue;
            }
            let gf = trace.function(k);
            let m = norms(&gf, 2.0);
            norms_table
                .rows
                .push(vec![nf, t, m.sup, m.lip, state[center]]);
            worst_asymmetry = worst_asymmetry.max(max_even_asymmetry(state));
            if t < tau {
                let mut dev = 0.0f64;
                for i in 0..grid.nodes() {
                    let x = grid.x(i);
                    if (0.5..=2.0).contains(&x) {
                        let target = wedge.scaled(x, t);
                        dev = dev.max((state[i] - target).abs() / target);
                    }
                }
                deviation_table.rows.push(vec![nf, t, dev]);
            } else {
                let bound = (0.25 * (1.0 / t + PI)).tan();
                post_tau_table.rows.push(vec![nf, t, m.lip, bound]);
            }
        }
    }

    let mut conclusions = Vec::new();
    let pre_tau: Vec<f64> = times.iter().copied().filter(|&t| t < tau).collect();
    let post_tau: Vec<f64> = times.iter().copied().filter(|&t| t > tau).collect();

    for (metric, col) in [("sup_growth_pre_tau", "sup_y"), ("lip_growth_pre_tau", "lip")] {
        let idx = norms_table.column(col).unwrap();
        let mut pass = true;
        let mut detail = String::new();
        for &t in &pre_tau {
            let by_n: Vec<f64> = ns
                .iter()
                .map(|&n| {
                    norms_table
                        .select("n", n as f64)
                        .into_iter()
                        .find(|r| (r[1] - t).abs() < 1e-12)
                        .map(|r| r[idx])
                        .unwrap_or(f64::NAN)
                })
                .collect();
            if !by_n.windows(2).all(|w| w[1] > w[0]) {
                pass = false;
            }
            detail.push_str(&format!("t={t}: {by_n:?}; "));
        }
        conclusions.push(Conclusion {
            name: metric.to_string(),
            pass,
            detail,
        });
    }

    {
        let mut pass = true;
        let mut worst = f64::INFINITY;
        for (n, trace) in traces {
            let nf = *n as f64;
            for (t, state) in trace.iter() {
                if t <= 0.0 || t >= tau {
                    continue;
                }
                let margin = state[center] - (0.5 * nf * (1.0 - PI * t) - nf * slack);
                worst = worst.min(margin);
                if margin < 0.0 {
                    pass = false;
                }
            }
        }
        conclusions.push(Conclusion {
            name: "center_height_lower_bound".to_string(),
            pass,
            detail: format!("worst margin {worst:.3e} (slack scaled by n)"),
        });
    }

    {
        let mut pass = true;
        let mut worst = f64::NEG_INFINITY;
        for row in &post_tau_table.rows {
            let violation = row[2] - row[3] - slack;
            worst = worst.max(violation);
            if violation > 0.0 {
                pass = false;
            }
        }
        conclusions.push(Conclusion {
            name: "post_tau_gradient_cap".to_string(),
            pass: pass && !post_tau.is_empty(),
            detail: format!("worst violation {worst:.3e} against tan(¼(1/t + π)) + slack"),
        });
    }

    {
        // Convergence toward the scaled wedge: deviations on [0.5, 2] shrink
        // as n grows, at every pre-τ time.
        let mut pass = true;
        let mut detail = String::new();
        for &t in &pre_tau {
            let by_n: Vec<f64> = ns
                .iter()
                .map(|&n| {
                    deviation_table
                        .select("n", n as f64)
                        .into_iter()
                        .find(|r| (r[1] - t).abs() < 1e-12)
                        .map(|r| r[2])
                        .unwrap_or(f64::NAN)
                })
                .collect();
            if !by_n.windows(2).all(|w| w[1] < w[0]) {
                pass = false;
            }
            detail.push_str(&format!("t={t}: {by_n:?}; "));
        }
        conclusions.push(Conclusion {
            name: "wedge_deviation_decreasing".to_string(),
            pass,
            detail,
        });
    }

    conclusions.push(Conclusion {
        name: "evenness_preserved".to_string(),
        pass: worst_asymmetry
            <= 1e-9 * ns.iter().map(|&n| n as f64).fold(1.0, f64::max),
        detail: format!("max |y(x) - y(-x)| = {worst_asymmetry:.3e}"),
    });

    Ok(ExperimentReport {
        name: "delta_family".to_string(),
        parameters: json!({
            "ns": ns,
            "grid": grid,
            "times": times,
            "safety": DEFAULT_SAFETY,
            "slack": slack,
        }),
        tables: vec![norms_table, deviation_table, post_tau_table],
        conclusions,
    })
}

/// [`run_delta_experiment_full`] without the traces.
pub fn run_delta_experiment(
    ns: &[u32],
    grid: &Grid,
    times: &[f64],
    wedge: &WedgeProfile,
) -> Result<ExperimentReport, ExperimentError> {
    Ok(run_delta_experiment_full(ns, grid, times, wedge)?.report)
}

/// Rewrites `data` into a directly sampleable variant, performing nested
/// mollifications. File-backed samples cannot be resolved here and error.
pub fn resolve_closed_form(data: &InitialData) -> Result<InitialData, ExperimentError> {
    match data {
        InitialData::WitchHat { .. } | InitialData::PiecewiseLinear { .. } => Ok(data.clone()),
        InitialData::Mollified { base, radius } => {
            let inner = resolve_closed_form(base)?;
            mollify(&inner, *radius)
        }
        InitialData::Samples { .. } => Err(ExperimentError::Solver(
            SolverError::UnresolvedInitialData(data.kind()),
        )),
    }
}

fn support_bounds(data: &InitialData) -> (f64, f64) {
    match data {
        InitialData::WitchHat { n } => (-1.0 / *n as f64, 1.0 / *n as f64),
        InitialData::PiecewiseLinear { xs, .. } => (xs[0], *xs.last().unwrap()),
        _ => (-1.0, 1.0),
    }
}

fn eval_initial(data: &InitialData, x: f64) -> f64 {
    match data {
        InitialData::WitchHat { n } => {
            let nf = *n as f64;
            (nf * (1.0 - nf * x.abs())).max(0.0)
        }
        InitialData::PiecewiseLinear { xs, ys } => eval_piecewise(xs, ys, x),
        _ => f64::NAN,
    }
}

/// Convolves `base` with the unit-mass bump
/// `φ_r(s) ∝ exp(-1/(1 - (s/r)²))` supported on `[-r, r]`, tabulating the
/// result as a dense piecewise-linear descriptor. The discrete kernel
/// weights are normalized to sum to one, so constants are reproduced
/// exactly and the positive-part mass never exceeds the base's.
pub fn mollify(base: &InitialData, radius: f64) -> Result<InitialData, ExperimentError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(ExperimentError::BadParameter(format!(
            "mollification radius must be positive, got {radius}"
        )));
    }
    let base = resolve_closed_form(base)?;

    const QUAD: usize = 200;
    let ds = 2.0 * radius / QUAD as f64;
    let mut offsets = Vec::with_capacity(QUAD + 1);
    let mut weights = Vec::with_capacity(QUAD + 1);
    for j in 0..=QUAD {
        let s = -radius + j as f64 * ds;
        let u = s / radius;
        let phi = if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        };
        let trap = if j == 0 || j == QUAD { 0.5 } else { 1.0 };
        offsets.push(s);
        weights.push(phi * trap * ds);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }

    let (lo, hi) = support_bounds(&base);
    let step = radius / 40.0;
    let start = lo - radius;
    let count = ((hi + radius - start) / step).ceil() as usize + 1;
    let mut xs = Vec::with_capacity(count);
    let mut ys = Vec::with_capacity(count);
    for i in 0..count {
        let x = start + i as f64 * step;
        let value: f64 = offsets
            .iter()
            .zip(&weights)
            .map(|(s, w)| w * eval_initial(&base, x - s))
            .sum();
        xs.push(x);
        ys.push(value);
    }
    Ok(InitialData::PiecewiseLinear { xs, ys })
}

/// Mollifies `y0` at each radius, flows every mollification, and measures
/// how the flows converge to each other (consecutive radii) and back to the
/// unmollified data at small times. Pairwise separation bounds are verified;
/// a failing pair is rechecked once on a grid with doubled resolution before
/// it is flagged, since the bound is exact only in the continuum.
pub fn run_l1_pipeline(
    y0: &InitialData,
    radii: &[f64],
    grid: &Grid,
    t_probe: &[f64],
) -> Result<ExperimentReport, ExperimentError> {
    if radii.len() < 2 {
        return Err(ExperimentError::BadParameter(
            "need at least two radii".into(),
        ));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ExperimentError::BadParameter(
            "radii must be strictly decreasing".into(),
        ));
    }
    let base = resolve_closed_form(y0)?;
    let slack = default_slack(grid.h());

    let flows = |grid: &Grid| -> Result<(Vec<f64>, Vec<FlowTrace>), ExperimentError> {
        let base_values = sample_initial(&base, grid)?;
        let mut traces = Vec::with_capacity(radii.len());
        for &r in radii {
            let data = mollify(&base, r)?;
            let values = sample_initial(&data, grid)?;
            let initial = GridFunction::new(*grid, values)?;
            traces.push(run(&initial, &Boundary::Dirichlet, t_probe, DEFAULT_SAFETY)?);
        }
        Ok((base_values, traces))
    };
    let (base_values, traces) = flows(grid)?;
    let h = grid.h();

    let mut attainment = Table::new("attainment", &["radius", "t", "l1_distance_to_base"]);
    for (ri, trace) in traces.iter().enumerate() {
        for (t, state) in trace.iter() {
            if t <= 0.0 {
                continue;
            }
            let diff: Vec<f64> = state
                .iter()
                .zip(&base_values)
                .map(|(a, b)| (a - b).abs())
                .collect();
            attainment
                .rows
                .push(vec![radii[ri], t, trapezoid_area(h, &diff)]);
        }
    }

    let mut cauchy = Table::new("cauchy", &["radius_coarse", "radius_fine", "t", "l1_distance"]);
    for w in 0..radii.len() - 1 {
        for (k, &t) in traces[w].times.iter().enumerate() {
            if t <= 0.0 {
                continue;
            }
            let diff: Vec<f64> = traces[w].states[k]
                .iter()
                .zip(&traces[w + 1].states[k])
                .map(|(a, b)| (a - b).abs())
                .collect();
            cauchy
                .rows
                .push(vec![radii[w], radii[w + 1], t, trapezoid_area(h, &diff)]);
        }
    }

    let mut separation_pass = true;
    let mut separation_detail = String::new();
    for i in 0..traces.len() {
        for j in 0..traces.len() {
            if i == j {
                continue;
            }
            let mut report = verify_separation(&traces[i], &traces[j], slack)?;
            if !report.pass {
                // Retry on a finer grid before flagging: the bound holds for
                // the continuum flow, so scheme error must be ruled out.
                let fine = Grid::new(grid.half_width, grid.intervals * 2)?;
                let (_, fine_traces) = flows(&fine)?;
                report =
                    verify_separation(&fine_traces[i], &fine_traces[j], default_slack(fine.h()))?;
                separation_detail.push_str(&format!(
                    "pair ({}, {}) retried at h/2; ",
                    radii[i], radii[j]
                ));
            }
            if !report.pass {
                separation_pass = false;
                separation_detail.push_str(&format!(
                    "pair ({}, {}) violates by {:.3e}; ",
                    radii[i],
                    radii[j],
                    report.worst.map(|w| w.violation).unwrap_or(f64::NAN)
                ));
            }
        }
    }

    let mut conclusions = Vec::new();
    let t_min = t_probe
        .iter()
        .copied()
        .filter(|&t| t > 0.0)
        .fold(f64::INFINITY, f64::min);
    {
        let by_radius: Vec<f64> = radii
            .iter()
            .map(|&r| {
                attainment
                    .select("radius", r)
                    .into_iter()
                    .find(|row| (row[1] - t_min).abs() < 1e-12)
                    .map(|row| row[2])
                    .unwrap_or(f64::NAN)
            })
            .collect();
        conclusions.push(Conclusion {
            name: "attainment_improves_with_radius".to_string(),
            pass: by_radius.windows(2).all(|w| w[1] < w[0]),
            detail: format!("‖y(t={t_min}) - y₀‖₁ by radius: {by_radius:?}"),
        });
    }
    {
        let mut pass = true;
        for &t in t_probe {
            let along: Vec<f64> = (0..radii.len() - 1)
                .filter_map(|w| {
                    cauchy
                        .rows
                        .iter()
                        .find(|row| row[0] == radii[w] && (row[2] - t).abs() < 1e-12)
                        .map(|row| row[3])
                })
                .collect();
            if along.len() >= 2 && !along.windows(2).all(|w| w[1] < w[0]) {
                pass = false;
            }
        }
        conclusions.push(Conclusion {
            name: "cauchy_distances_shrink".to_string(),
            pass,
            detail: "consecutive-radius flow distances decrease".to_string(),
        });
    }
    conclusions.push(Conclusion {
        name: "separation_pairwise".to_string(),
        pass: separation_pass,
        detail: if separation_detail.is_empty() {
            "all ordered pairs within 2πΔt".to_string()
        } else {
            separation_detail
        },
    });

    Ok(ExperimentReport {
        name: "l1_pipeline".to_string(),
        parameters: json!({
            "initial": y0,
            "radii": radii,
            "grid": grid,
            "times": t_probe,
            "safety": DEFAULT_SAFETY,
            "slack": slack,
        }),
        tables: vec![attainment, cauchy],
        conclusions,
    })
}

/// Lᵖ smoothing sweep over precomputed witch-hat traces: tabulates the
/// normalized cap `sup y(t)·t^{1/(p-1)}/‖y₀‖ₚ^{p/(p-1)}` inside the theorem's
/// window `t < ‖y₀‖ₚ^{2p/(p+1)}` and checks that, per p, the per-n caps agree
/// within a factor 1.2. Exponents in `(1, 1.05]` are tabulated but marked out
/// of the validated range, since `t^{-1/(p-1)}` degenerates as p → 1⁺.
pub fn lp_sweep_on_traces(
    p_list: &[f64],
    traces: &[(u32, FlowTrace)],
) -> Result<ExperimentReport, ExperimentError> {
    if p_list.iter().any(|&p| p <= 1.0) {
        return Err(ExperimentError::BadParameter(
            "every exponent must satisfy p > 1".into(),
        ));
    }
    let validated: Vec<f64> = p_list.iter().copied().filter(|&p| p > 1.05).collect();
    let degenerate: Vec<f64> = p_list.iter().copied().filter(|&p| p <= 1.05).collect();

    let mut caps = Table::new("caps", &["p", "n", "t", "cap", "in_window"]);
    let mut conclusions = Vec::new();
    for &p in &validated {
        let mut per_n = Vec::new();
        for (n, trace) in traces {
            let norm_p = norms(&trace.function(0), p).lp;
            let window = norm_p.powf(2.0 * p / (p + 1.0));
            let scale = norm_p.powf(p / (p - 1.0));
            let mut best = f64::NEG_INFINITY;
            for (t, state) in trace.iter() {
                if t <= 0.0 {
                    continue;
                }
                let sup = state.iter().cloned().fold(0.0, f64::max);
                let cap = sup * t.powf(1.0 / (p - 1.0)) / scale;
                let in_window = t < window;
                caps.rows
                    .push(vec![p, *n as f64, t, cap, if in_window { 1.0 } else { 0.0 }]);
                if in_window {
                    best = best.max(cap);
                }
            }
            per_n.push(best);
        }
        let hi = per_n.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = per_n.iter().cloned().fold(f64::INFINITY, f64::min);
        conclusions.push(Conclusion {
            name: format!("cap_uniform_p_{p}"),
            pass: lo > 0.0 && hi / lo <= 1.2,
            detail: format!("caps by n: {per_n:?}, spread factor {:.4}", hi / lo),
        });
    }
    if !degenerate.is_empty() {
        conclusions.push(Conclusion {
            name: "p_out_of_validated_range".to_string(),
            pass: true,
            detail: format!("skipped p ≤ 1.05: {degenerate:?}"),
        });
    }

    Ok(ExperimentReport {
        name: "lp_sweep".to_string(),
        parameters: json!({
            "p_list": p_list,
            "ns": traces.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        }),
        tables: vec![caps],
        conclusions,
    })
}

/// Runs the witch-hat family on `grid` and sweeps the exponents.
pub fn lp_sweep(
    p_list: &[f64],
    n_list: &[u32],
    grid: &Grid,
    times: &[f64],
) -> Result<ExperimentReport, ExperimentError> {
    let mut traces = Vec::with_capacity(n_list.len());
    for &n in n_list {
        check_delta_grid(n, grid)?;
        let values = sample_initial(&witch_hat(n), grid)?;
        let initial = GridFunction::new(*grid, values)?;
        traces.push((n, run(&initial, &Boundary::Dirichlet, times, DEFAULT_SAFETY)?));
    }
    lp_sweep_on_traces(p_list, &traces)
}

/// The translating exact solution `y(x, t) = t - log cos x` on
/// `(-π/2, π/2)`.
pub fn grim_reaper(x: f64, t: f64) -> f64 {
    t - x.cos().ln()
}

/// Flows the grim reaper from its exact initial values with prescribed
/// boundary heights and returns `(sup error, L¹ error)` at `t_end`.
pub fn grim_reaper_errors(
    half_width: f64,
    intervals: usize,
    t_end: f64,
) -> Result<(f64, f64), ExperimentError> {
    if half_width >= std::f64::consts::FRAC_PI_2 {
        return Err(ExperimentError::BadParameter(
            "grim reaper lives on (-π/2, π/2)".into(),
        ));
    }
    let grid = Grid::new(half_width, intervals)?;
    let values: Vec<f64> = (0..grid.nodes()).map(|i| grim_reaper(grid.x(i), 0.0)).collect();
    let initial = GridFunction::new(grid, values)?;
    let edge = half_width;
    let boundary = Boundary::prescribed(
        move |t| grim_reaper(-edge, t),
        move |t| grim_reaper(edge, t),
    );
    let trace = run(&initial, &boundary, &[t_end], DEFAULT_SAFETY)?;
    let state = trace.state_at(t_end).unwrap();
    let errs: Vec<f64> = (0..grid.nodes())
        .map(|i| (state[i] - grim_reaper(grid.x(i), t_end)).abs())
        .collect();
    let sup = errs.iter().cloned().fold(0.0, f64::max);
    let l1 = trapezoid_area(grid.h(), &errs);
    Ok((sup, l1))
}

/// Refinement study on the grim-reaper fixture: runs each spacing and checks
/// that errors shrink at the scheme's order, i.e. consecutive error ratios
/// match `(h_i/h_{i+1})²` within ±12.5%.
pub fn grim_reaper_convergence(
    hs: &[f64],
    half_width: f64,
    t_end: f64,
) -> Result<ExperimentReport, ExperimentError> {
    if hs.len() < 2 {
        return Err(ExperimentError::BadParameter(
            "need at least two spacings".into(),
        ));
    }
    let mut table = Table::new("errors", &["h", "sup_error", "l1_error"]);
    for &h in hs {
        let intervals = (2.0 * half_width / h).round() as usize;
        let (sup, l1) = grim_reaper_errors(half_width, intervals, t_end)?;
        table.rows.push(vec![2.0 * half_width / intervals as f64, sup, l1]);
    }
    let mut pass = true;
    let mut detail = String::new();
    for w in table.rows.windows(2) {
        let expected = (w[0][0] / w[1][0]).powi(2);
        let ratio = w[0][1] / w[1][1];
        let normalized = ratio / expected;
        if !(0.875..=1.125).contains(&normalized) {
            pass = false;
        }
        detail.push_str(&format!(
            "h {} → {}: sup-error ratio {ratio:.3} (expected {expected:.3}); ",
            w[0][0], w[1][0]
        ));
    }
    Ok(ExperimentReport {
        name: "grim_reaper_convergence".to_string(),
        parameters: json!({ "hs": hs, "half_width": half_width, "t_end": t_end }),
        tables: vec![table],
        conclusions: vec![Conclusion {
            name: "second_order_in_h".to_string(),
            pass,
            detail,
        }],
    })
}

/// Deterministic nonnegative piecewise-linear data: `kinks` interior
/// breakpoints drawn uniformly from `[-span, span]` with heights in
/// `[0, max_height]`, pinned to zero at `±span_outer`.
pub fn random_piecewise_data(
    seed: u64,
    kinks: usize,
    span: f64,
    max_height: f64,
    span_outer: f64,
) -> InitialData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..kinks).map(|_| rng.gen_range(-span..span)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ys: Vec<f64> = (0..kinks).map(|_| rng.gen_range(0.0..max_height)).collect();
    let mut full_xs = Vec::with_capacity(kinks + 2);
    let mut full_ys = Vec::with_capacity(kinks + 2);
    full_xs.push(-span_outer);
    full_ys.push(0.0);
    full_xs.extend(xs);
    full_ys.extend(ys);
    full_xs.push(span_outer);
    full_ys.push(0.0);
    InitialData::PiecewiseLinear {
        xs: full_xs,
        ys: full_ys,
    }
}

/// Samples the exact scaled wedge on a grid at each time and measures the
/// ratio `|y_x| / tan 𝒜₁(y/√t)` at interior nodes with `x ∈ [x_lo, x_hi]`.
/// On the wedge the bound is an identity, so the ratios should straddle 1
/// up to differencing error; the table records their range per time.
pub fn wedge_sharpness_experiment(
    wedge: &WedgeProfile,
    times: &[f64],
    half_width: f64,
    intervals: usize,
    x_lo: f64,
    x_hi: f64,
) -> Result<ExperimentReport, ExperimentError> {
    let grid = Grid::new(half_width, intervals)?;
    let h = grid.h();
    let mut table = Table::new("sharpness", &["t", "min_ratio", "max_ratio"]);
    for &t in times {
        if !(t > 0.0) {
            return Err(ExperimentError::BadParameter(format!(
                "sharpness check needs t > 0, got {t}"
            )));
        }
        let values: Vec<f64> = (0..grid.nodes())
            .map(|i| wedge.scaled(grid.x(i).abs().max(h / 2.0), t))
            .collect();
        let sqrt_t = t.sqrt();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 1..grid.nodes() - 1 {
            let x = grid.x(i);
            if x < x_lo || x > x_hi {
                continue;
            }
            let slope = (values[i + 1] - values[i - 1]) / (2.0 * h);
            let bound = wedge.area_a1(values[i] / sqrt_t).tan();
            let ratio = slope.abs() / bound;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        table.rows.push(vec![t, lo, hi]);
    }
    let pass = table
        .rows
        .iter()
        .all(|r| r[1] >= 0.95 && r[2] <= 1.0 + 1e-2);
    Ok(ExperimentReport {
        name: "wedge_sharpness".to_string(),
        parameters: json!({
            "times": times,
            "half_width": half_width,
            "intervals": intervals,
            "x_range": [x_lo, x_hi],
        }),
        tables: vec![table],
        conclusions: vec![Conclusion {
            name: "ratio_within_band".to_string(),
            pass,
            detail: "|y_x| / tan 𝒜₁(y/√t) within [0.95, 1.01] on the window".to_string(),
        }],
    })
}
