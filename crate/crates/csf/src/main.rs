//! Command line front end: solve the wedge profile, run flows from JSON
//! configs, export plot data, verify stored traces against the regularity
//! estimates, and drive the canned experiments.
//!
//! Exit codes: 0 all checks passed, 1 an estimate or experiment conclusion
//! failed, 2 usage or input error, 3 numerical failure.

use clap::{Parser, Subcommand};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use csf::estimates::{default_slack, run_suite, EstimateReport, SuiteOptions, ESTIMATE_NAMES};
use csf::experiments::{
    check_delta_grid, delta_report_from_traces, lp_sweep_on_traces, resolve_closed_form,
    run_l1_pipeline, witch_hat, ExperimentError, ExperimentReport, DEFAULT_SAFETY,
};
use csf::io::{
    data_dir, export_plot_data, read_json, read_trace, read_wedge_csv, resolve_initial,
    write_json, write_trace, write_wedge_csv, PlotData, RunConfig,
};
use csf::solver::{run, sample_initial, FlowTrace, Grid, GridFunction, InitialData, SolverError};
use csf::wedge::{solve_wedge, solve_wedge_with, WedgeProfile, DEFAULT_ODE_TOL};

#[derive(Parser)]
#[command(
    name = "csf",
    version,
    about = "Graphical curve shortening flow: wedge profile, flows, and regularity checks"
)]
struct Cli {
    /// Worker threads for commands that run several flows.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the wedge profile and write its sample table plus sidecar.
    Wedge {
        /// Acceptance tolerance for the shooting residual.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Where the sample table hands over to the asymptotic tail.
        #[arg(long, default_value_t = csf::wedge::DEFAULT_X_MAX)]
        xmax: f64,
        /// Output CSV path; the JSON sidecar lands beside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a flow described by a JSON config and store the trace.
    Flow {
        #[arg(long)]
        config: PathBuf,
        /// Override the CFL safety factor from the config.
        #[arg(long)]
        safety: Option<f64>,
        /// Trace output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Export plot-ready CSV from a stored trace.
    Export {
        #[arg(long)]
        trace: PathBuf,
        /// One of: snapshots, wedge-overlay, estimate-margins.
        #[arg(long)]
        kind: String,
        /// Wedge table; solved fresh when omitted and needed.
        #[arg(long)]
        wedge: Option<PathBuf>,
        /// Estimates for the margins export (comma separated, or "all").
        #[arg(long, default_value = "all")]
        estimates: String,
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a stored trace against the regularity estimates.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        /// Wedge table; solved fresh when omitted.
        #[arg(long)]
        wedge: Option<PathBuf>,
        /// Comma-separated estimate names, or "all".
        #[arg(long, default_value = "all")]
        estimates: String,
        /// Tolerance in the estimate's natural units; defaults to
        /// max(10⁻³, 5h) for the trace's spacing h.
        #[arg(long)]
        slack: Option<f64>,
        /// Enable the wedge-barrier check with this support shift.
        #[arg(long)]
        barrier_shift: Option<f64>,
        /// Enable the Lᵖ smoothing check at this exponent.
        #[arg(long)]
        lp_exponent: Option<f64>,
        /// Vertical shift for the height-gradient check.
        #[arg(long, default_value_t = 0.0)]
        height_shift: f64,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Canned experiment suites; each writes an ExperimentReport as JSON.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Witch-hat delta-approximation family.
    WitchHat {
        /// Hat heights, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Snapshot times; must straddle the threshold 1/π ≈ 0.318.
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long, default_value_t = 12.0)]
        half_width: f64,
        /// Grid spacing; defaults to 1/(10·max n).
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mollification pipeline for rough initial data.
    L1 {
        /// JSON file holding the initial data descriptor.
        #[arg(long)]
        init: PathBuf,
        /// Mollification radii, strictly decreasing.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        /// Probe times.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01])]
        times: Vec<f64>,
        #[arg(long, default_value_t = 6.0)]
        half_width: f64,
        #[arg(long, default_value_t = 0.005)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lᵖ smoothing sweep over witch-hat data.
    Lp {
        /// Exponents, comma separated; p ≤ 1.05 is reported but unvalidated.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.5, 1.0])]
        times: Vec<f64>,
        #[arg(long, default_value_t = 12.0)]
        half_width: f64,
        /// Grid spacing; defaults to 1/(10·max n).
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
}

type CliResult<T> = Result<T, Failure>;

fn usage<E: Display>(context: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Usage(format!("{context}: {e}"))
}

fn from_experiment(context: &str) -> impl Fn(ExperimentError) -> Failure + '_ {
    move |e| match &e {
        ExperimentError::Solver(
            SolverError::NonFinite { .. } | SolverError::NonFiniteInitial,
        )
        | ExperimentError::Wedge(_) => Failure::Numerical(format!("{context}: {e}")),
        _ => Failure::Usage(format!("{context}: {e}")),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            3
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    if cli.jobs == 0 {
        return Err(Failure::Usage("--jobs: must be at least 1".into()));
    }
    let jobs = cli.jobs;
    match cli.command {
        Command::Wedge { tol, xmax, out } => cmd_wedge(tol, xmax, &out),
        Command::Flow {
            config,
            safety,
            out,
        } => cmd_flow(&config, safety, &out),
        Command::Export {
            trace,
            kind,
            wedge,
            estimates,
            slack,
            out,
        } => cmd_export(&trace, &kind, wedge.as_deref(), &estimates, slack, &out),
        Command::Verify {
            trace,
            wedge,
            estimates,
            slack,
            barrier_shift,
            lp_exponent,
            height_shift,
            report,
        } => cmd_verify(
            &trace,
            wedge.as_deref(),
            &estimates,
            slack,
            SuiteOptions {
                barrier_shift,
                lp_exponent,
                height_shift,
            },
            report.as_deref(),
        ),
        Command::Experiment(cmd) => cmd_experiment(cmd, jobs),
    }
}

fn cmd_wedge(tol: f64, xmax: f64, out: &Path) -> CliResult<bool> {
    if !(tol > 0.0) {
        return Err(Failure::Usage(format!(
            "--tol: must be positive, got {tol}"
        )));
    }
    if !(xmax > 1.0) {
        return Err(Failure::Usage(format!(
            "--xmax: handover must sit past the symmetric point, got {xmax}"
        )));
    }
    let profile = solve_wedge_with(tol, DEFAULT_ODE_TOL, xmax)
        .map_err(|e| Failure::Numerical(format!("wedge solve: {e}")))?;
    write_wedge_csv(out, &profile).map_err(usage("--out"))?;
    println!(
        "wedge profile: {} samples, d = {:.12}, total area = {:.12}",
        profile.samples().0.len(),
        profile.d,
        profile.total_area()
    );
    Ok(true)
}

fn load_config(path: &Path) -> CliResult<RunConfig> {
    read_json(path).map_err(usage("--config"))
}

fn cmd_flow(config_path: &Path, safety_flag: Option<f64>, out: &Path) -> CliResult<bool> {
    let config = load_config(config_path)?;
    let safety = safety_flag.unwrap_or(config.safety);
    if !(safety > 0.0 && safety < 1.0) {
        let flag = if safety_flag.is_some() {
            "--safety"
        } else {
            "--config: safety"
        };
        return Err(Failure::Usage(format!(
            "{flag}: must lie in (0, 1), got {safety}"
        )));
    }
    let grid = config.grid().map_err(usage("--config"))?;
    let boundary = config.boundary().map_err(usage("--config"))?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_else(data_dir);
    let initial = resolve_initial(&config.initial, &base).map_err(usage("--config"))?;
    let initial = resolve_closed_form(&initial).map_err(from_experiment("--config"))?;
    let values = sample_initial(&initial, &grid).map_err(usage("--config"))?;
    let gf = GridFunction::new(grid, values).map_err(usage("--config"))?;
    let trace = run(&gf, &boundary, &config.snapshot_times, safety).map_err(|e| match e {
        SolverError::NonFinite { .. } | SolverError::NonFiniteInitial => {
            Failure::Numerical(format!("flow: {e}"))
        }
        other => Failure::Usage(format!("--config: {other}")),
    })?;
    write_trace(out, &trace).map_err(usage("--out"))?;
    println!(
        "flow: {} snapshots on {} nodes, {} steps at dt = {:.3e}",
        trace.times.len(),
        trace.grid.nodes(),
        trace.scheme.steps,
        trace.scheme.dt
    );
    Ok(true)
}

fn load_wedge(path: Option<&Path>) -> CliResult<WedgeProfile> {
    match path {
        Some(p) => read_wedge_csv(p).map_err(usage("--wedge")),
        None => solve_wedge(1e-8).map_err(|e| Failure::Numerical(format!("wedge solve: {e}"))),
    }
}

fn split_names(estimates: &str) -> CliResult<Vec<&str>> {
    let names: Vec<&str> = estimates
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(Failure::Usage(
            "--estimates: expected \"all\" or a comma-separated list".into(),
        ));
    }
    for name in &names {
        if *name != "all" && !ESTIMATE_NAMES.contains(name) {
            return Err(Failure::Usage(format!(
                "--estimates: unknown estimate \"{name}\"; valid names: {}",
                ESTIMATE_NAMES.join(", ")
            )));
        }
    }
    Ok(names)
}

fn check_slack(slack: Option<f64>, h: f64) -> CliResult<f64> {
    match slack {
        Some(s) if s > 0.0 => Ok(s),
        Some(s) => Err(Failure::Usage(format!(
            "--slack: must be positive, got {s}"
        ))),
        None => Ok(default_slack(h)),
    }
}

fn print_reports(reports: &[EstimateReport]) {
    for r in reports {
        let status = if r.pass { "PASS" } else { "FAIL" };
        match &r.worst {
            Some(w) => println!(
                "{:-26} {status}  worst violation {:+.3e} at t = {} (slack {:.1e})",
                r.name, w.violation, w.t, r.slack
            ),
            None => println!("{:-26} {status}  no applying snapshots", r.name),
        }
    }
}

fn cmd_verify(
    trace_dir: &Path,
    wedge_path: Option<&Path>,
    estimates: &str,
    slack: Option<f64>,
    opts: SuiteOptions,
    report_path: Option<&Path>,
) -> CliResult<bool> {
    let trace = read_trace(trace_dir).map_err(usage("--trace"))?;
    let wedge = load_wedge(wedge_path)?;
    let names = split_names(estimates)?;
    let slack = check_slack(slack, trace.grid.h())?;
    let reports = run_suite(&trace, &wedge, &names, slack, &opts)
        .map_err(usage("--estimates"))?;
    print_reports(&reports);
    if let Some(path) = report_path {
        write_json(path, &reports).map_err(usage("--report"))?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn cmd_export(
    trace_dir: &Path,
    kind: &str,
    wedge_path: Option<&Path>,
    estimates: &str,
    slack: Option<f64>,
    out: &Path,
) -> CliResult<bool> {
    let trace = read_trace(trace_dir).map_err(usage("--trace"))?;
    match kind {
        "snapshots" => {
            export_plot_data(out, &PlotData::Snapshots(&trace)).map_err(usage("--out"))?;
        }
        "wedge-overlay" => {
            let wedge = load_wedge(wedge_path)?;
            export_plot_data(
                out,
                &PlotData::WedgeOverlay {
                    trace: &trace,
                    wedge: &wedge,
                },
            )
            .map_err(usage("--out"))?;
        }
        "estimate-margins" => {
            let wedge = load_wedge(wedge_path)?;
            let names = split_names(estimates)?;
            let slack = check_slack(slack, trace.grid.h())?;
            let reports = run_suite(&trace, &wedge, &names, slack, &SuiteOptions::default())
                .map_err(usage("--estimates"))?;
            export_plot_data(out, &PlotData::EstimateMargins(&reports))
                .map_err(usage("--out"))?;
        }
        other => {
            return Err(Failure::Usage(format!(
                "--kind: unknown export \"{other}\"; expected snapshots, wedge-overlay, or estimate-margins"
            )))
        }
    }
    println!("wrote {}", out.display());
    Ok(true)
}

/// Run `f` over `items` on up to `jobs` threads, preserving input order.
fn run_parallel<T, U, F>(jobs: usize, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let inputs: Vec<Mutex<Option<T>>> =
        items.into_iter().map(|x| Mutex::new(Some(x))).collect();
    let outputs: Vec<Mutex<Option<U>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(inputs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= inputs.len() {
                    break;
                }
                let item = inputs[i].lock().unwrap().take().unwrap();
                let out = f(item);
                *outputs[i].lock().unwrap() = Some(out);
            });
        }
    });
    outputs
        .into_iter()
        .map(|m| m.into_inner().unwrap().unwrap())
        .collect()
}

fn grid_for(half_width: f64, h: f64, flag: &str) -> CliResult<Grid> {
    if !(h > 0.0) || !(half_width > 0.0) {
        return Err(Failure::Usage(format!(
            "{flag}: grid dimensions must be positive (half-width {half_width}, h {h})"
        )));
    }
    let intervals = (2.0 * half_width / h).round() as usize;
    Grid::new(half_width, intervals).map_err(usage(flag))
}

fn default_h(ns: &[u32]) -> f64 {
    let n_max = ns.iter().copied().max().unwrap_or(1).max(1);
    1.0 / (10.0 * n_max as f64)
}

fn build_hat_traces(
    ns: &[u32],
    grid: &Grid,
    times: &[f64],
    jobs: usize,
) -> CliResult<Vec<(u32, FlowTrace)>> {
    for &n in ns {
        check_delta_grid(n, grid).map_err(from_experiment("--h"))?;
    }
    let runs: Vec<CliResult<(u32, FlowTrace)>> = run_parallel(jobs, ns.to_vec(), |n| {
        let values = sample_initial(&witch_hat(n), grid).map_err(usage("--n"))?;
        let gf = GridFunction::new(*grid, values).map_err(usage("--n"))?;
        let trace = run(
            &gf,
            &csf::solver::Boundary::Dirichlet,
            times,
            DEFAULT_SAFETY,
        )
        .map_err(|e| Failure::Numerical(format!("flow for n = {n}: {e}")))?;
        Ok((n, trace))
    });
    runs.into_iter().collect()
}

fn print_experiment(report: &ExperimentReport) {
    for c in &report.conclusions {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{:-32} {status}  {}", c.name, c.detail);
    }
}

fn finish_experiment(report: &ExperimentReport, out: &Path) -> CliResult<bool> {
    print_experiment(report);
    write_json(out, report).map_err(usage("--out"))?;
    println!("wrote {}", out.display());
    Ok(report.all_pass())
}

fn cmd_experiment(cmd: ExperimentCmd, jobs: usize) -> CliResult<bool> {
    match cmd {
        ExperimentCmd::WitchHat {
            n,
            times,
            half_width,
            h,
            out,
        } => {
            let wedge = load_wedge(None)?;
            let h = h.unwrap_or_else(|| default_h(&n));
            let grid = grid_for(half_width, h, "--h")?;
            let traces = build_hat_traces(&n, &grid, &times, jobs)?;
            let report = delta_report_from_traces(&traces, &grid, &times, &wedge)
                .map_err(from_experiment("--n"))?;
            finish_experiment(&report, &out)
        }
        ExperimentCmd::L1 {
            init,
            radii,
            times,
            half_width,
            h,
            out,
        } => {
            let data: InitialData = read_json(&init).map_err(usage("--init"))?;
            let base = init.parent().map(Path::to_path_buf).unwrap_or_else(data_dir);
            let data = resolve_initial(&data, &base).map_err(usage("--init"))?;
            let grid = grid_for(half_width, h, "--h")?;
            let report = run_l1_pipeline(&data, &radii, &grid, &times)
                .map_err(from_experiment("--radii"))?;
            finish_experiment(&report, &out)
        }
        ExperimentCmd::Lp {
            p,
            n,
            times,
            half_width,
            h,
            out,
        } => {
            let h = h.unwrap_or_else(|| default_h(&n));
            let grid = grid_for(half_width, h, "--h")?;
            let traces = build_hat_traces(&n, &grid, &times, jobs)?;
            let report =
                lp_sweep_on_traces(&p, &traces).map_err(from_experiment("--p"))?;
            finish_experiment(&report, &out)
        }
    }
}
