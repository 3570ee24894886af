//! Acceptance gate: one test per release criterion, each printing a single
//! PASS/FAIL line with the measured value against its threshold.
//!
//! Shared fixtures: the wedge profile (solved once, timed) and three
//! witch-hat flows. The hats for n = 10 and 20 share one grid so they can be
//! compared pointwise; n = 40 runs at its own resolution h = 1/(10n).

use std::fmt::Display;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::sync::OnceLock;
use std::time::Instant;

use csf::analysis::{norms, trapezoid_area};
use csf::estimates::{verify_harnack, verify_separation};
use csf::experiments::{
    grim_reaper_errors, lp_sweep_on_traces, random_piecewise_data, run_l1_pipeline,
    wedge_sharpness_experiment, witch_hat, DEFAULT_SAFETY,
};
use csf::solver::{run, sample_initial, Boundary, FlowTrace, Grid, GridFunction, InitialData};
use csf::wedge::{solve_wedge, WedgeProfile};

const SNAPSHOT_TIMES: [f64; 7] = [0.1, 0.2, 0.3, 0.35, 0.5, 2.0 / PI, 1.0];

fn report(number: u32, name: &str, pass: bool, detail: impl Display) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number:02} {name}: {verdict} ({detail})");
    assert!(pass, "criterion {number:02} {name}: {detail}");
}

fn wedge() -> &'static (WedgeProfile, f64) {
    static CELL: OnceLock<(WedgeProfile, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let profile = solve_wedge(1e-8).expect("wedge profile");
        (profile, start.elapsed().as_secs_f64())
    })
}

fn hat_run(n: u32, grid: Grid) -> (u32, FlowTrace) {
    let values = sample_initial(&witch_hat(n), &grid).unwrap();
    let initial = GridFunction::new(grid, values).unwrap();
    let trace = run(&initial, &Boundary::Dirichlet, &SNAPSHOT_TIMES, DEFAULT_SAFETY).unwrap();
    (n, trace)
}

fn hats() -> &'static Vec<(u32, FlowTrace)> {
    static CELL: OnceLock<Vec<(u32, FlowTrace)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let shared = Grid::new(20.0, 8000).unwrap();
        let fine = Grid::new(12.0, 9600).unwrap();
        vec![hat_run(10, shared), hat_run(20, shared), hat_run(40, fine)]
    })
}

fn hat(n: u32) -> &'static FlowTrace {
    &hats().iter().find(|(m, _)| *m == n).unwrap().1
}

fn snapshot(trace: &FlowTrace, t: f64) -> (&[f64], usize) {
    let k = trace
        .times
        .iter()
        .position(|&s| (s - t).abs() < 1e-12)
        .unwrap_or_else(|| panic!("no snapshot at t = {t}"));
    (&trace.states[k], k)
}

#[test]
fn criterion_01_wedge_area() {
    let (p, secs) = wedge();
    let rel = (p.total_area() - FRAC_PI_2).abs() / FRAC_PI_2;
    report(
        1,
        "wedge area pi/2",
        rel < 1e-4 && *secs < 5.0,
        format!("relative error {rel:.3e} vs 1e-4, solved in {secs:.2} s"),
    );
}

#[test]
fn criterion_02_wedge_involution() {
    let (p, _) = wedge();
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let x = 0.2 * 25.0_f64.powf(k as f64 / 99.0);
        worst = worst.max((p.w(p.w(x)) - x).abs());
    }
    report(
        2,
        "involution W(W(x)) = x",
        worst < 1e-6,
        format!("max deviation {worst:.3e} vs 1e-6"),
    );
}

#[test]
fn criterion_03_first_integral() {
    let (p, _) = wedge();
    let spread = p.first_integral_spread();
    let d2 = p.d * p.d;
    report(
        3,
        "first integral constant, d^2 <= pi/2",
        spread < 1e-6 && d2 <= FRAC_PI_2 + 1e-6,
        format!("relative spread {spread:.3e} vs 1e-6, d^2 = {d2:.6}"),
    );
}

#[test]
fn criterion_04_slope_area_identity() {
    let (p, _) = wedge();
    let mut worst = 0.0_f64;
    let mut x = 0.2;
    while x <= 5.0 {
        worst = worst.max(((-p.wprime(x)).atan() - p.area_a0(x)).abs());
        x += 0.01;
    }
    report(
        4,
        "arctan(-W') = A0",
        worst < 1e-5,
        format!("max deviation {worst:.3e} vs 1e-5"),
    );
}

#[test]
fn criterion_05_solver_order() {
    let t0 = Instant::now();
    let (coarse_sup, coarse_l1) = grim_reaper_errors(1.2, 120, 0.5).unwrap();
    let coarse_secs = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (fine_sup, fine_l1) = grim_reaper_errors(1.2, 240, 0.5).unwrap();
    let fine_secs = t1.elapsed().as_secs_f64();
    let ratio_sup = coarse_sup / fine_sup;
    let ratio_l1 = coarse_l1 / fine_l1;
    let in_band = |r: f64| (3.5..=4.5).contains(&r);
    report(
        5,
        "second-order convergence on the grim reaper",
        in_band(ratio_sup) && in_band(ratio_l1) && coarse_secs < 10.0 && fine_secs < 10.0,
        format!(
            "error ratios h=0.02/h=0.01: sup {ratio_sup:.3}, L1 {ratio_l1:.3} vs [3.5, 4.5]; \
             runs {coarse_secs:.2} s and {fine_secs:.2} s"
        ),
    );
}

#[test]
fn criterion_06_area_conservation() {
    let trace = hat(20);
    let h = trace.grid.h();
    let a0 = trapezoid_area(h, &trace.states[0]);
    let (state, _) = snapshot(trace, 1.0);
    let drift = (trapezoid_area(h, state) - a0).abs() / a0;
    report(
        6,
        "area conserved to t = 1",
        drift < 1e-6,
        format!("relative drift {drift:.3e} vs 1e-6"),
    );
}

#[test]
fn criterion_07_harnack_suite() {
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut all_pass = true;
    for (n, trace) in hats() {
        let a0 = trapezoid_area(trace.grid.h(), &trace.states[0]);
        let r = verify_harnack(trace, a0, 1e-2).unwrap();
        all_pass &= r.pass;
        worst = worst.max(r.worst.map_or(f64::NEG_INFINITY, |w| w.violation));
        if !r.pass {
            println!("  harnack fails on the hat n = {n}");
        }
    }
    let grid = Grid::new(6.0, 2400).unwrap();
    for seed in 1..=5u64 {
        let data = random_piecewise_data(seed, 8, 3.0, 2.0, 6.0);
        let values = sample_initial(&data, &grid).unwrap();
        let initial = GridFunction::new(grid, values).unwrap();
        let trace = run(&initial, &Boundary::Dirichlet, &[0.1, 0.2, 0.5], DEFAULT_SAFETY)
            .unwrap();
        let a0 = trapezoid_area(grid.h(), &trace.states[0]);
        let r = verify_harnack(&trace, a0, 1e-2).unwrap();
        all_pass &= r.pass;
        worst = worst.max(r.worst.map_or(f64::NEG_INFINITY, |w| w.violation));
        if !r.pass {
            println!("  harnack fails on the random dataset seed = {seed}");
        }
    }
    report(
        7,
        "Harnack bound on hats and random data",
        all_pass,
        format!("worst violation {worst:+.3e} vs slack 1e-2"),
    );
}

#[test]
fn criterion_08_delayed_gradient_uniform() {
    let bound = FRAC_PI_8 + FRAC_PI_4 + 1e-2;
    let mut worst = f64::NEG_INFINITY;
    for (_, trace) in hats() {
        let (_, k) = snapshot(trace, 2.0 / PI);
        let angle = norms(&trace.function(k), 2.0).lip.atan();
        worst = worst.max(angle);
    }
    report(
        8,
        "gradient angle at t = 2/pi",
        worst <= bound,
        format!("max arctan|y_x| = {worst:.4} vs {bound:.4}"),
    );
}

#[test]
fn criterion_09_pre_threshold_blowup_trend() {
    let lip = |n: u32| {
        let trace = hat(n);
        let (_, k) = snapshot(trace, 0.2);
        norms(&trace.function(k), 2.0).lip
    };
    let ratio = lip(40) / lip(10);
    report(
        9,
        "gradient grows with n before the threshold",
        ratio >= 3.0,
        format!("sup|y_x| ratio n=40 over n=10 at t=0.2: {ratio:.1} vs 3"),
    );
}

#[test]
fn criterion_10_delta_flow_matches_wedge() {
    let (p, _) = wedge();
    let trace = hat(40);
    let (state, _) = snapshot(trace, 0.2);
    let mut worst = 0.0_f64;
    for i in 0..trace.grid.nodes() {
        let x = trace.grid.x(i);
        if (0.5..=2.0).contains(&x) {
            let target = p.scaled(x, 0.2);
            worst = worst.max((state[i] - target).abs() / target);
        }
    }
    report(
        10,
        "n = 40 within 5% of the scaled wedge",
        worst < 0.05,
        format!("max relative deviation on [0.5, 2] at t=0.2: {worst:.4} vs 0.05"),
    );
}

#[test]
fn criterion_11_delayed_height() {
    let (p, _) = wedge();
    let c = p.derived_constants().c_refine_cor;
    let two_tau = 2.0 / PI;
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for (_, trace) in hats() {
        for &t in &[0.35, 0.5, 1.0] {
            let (state, _) = snapshot(trace, t);
            let sup = state.iter().cloned().fold(0.0, f64::max);
            let bound = t.sqrt() * p.w(p.inverse_sigma(1.0 / (2.0 * t)).unwrap()) + 1e-2;
            all &= sup <= bound;
            worst = worst.max(sup - bound);
        }
        let (state, _) = snapshot(trace, two_tau);
        let sup = state.iter().cloned().fold(0.0, f64::max);
        let bound = c * two_tau.sqrt() + 1e-2;
        all &= sup <= bound;
        worst = worst.max(sup - bound);
    }
    report(
        11,
        "height bounds past the threshold",
        all,
        format!("worst sup y minus bound {worst:+.3e}"),
    );
}

#[test]
fn criterion_12_height_gradient_sharpness() {
    let (p, _) = wedge();
    let r = wedge_sharpness_experiment(p, &[0.5, 1.0, 2.0], 4.0, 1600, 0.25, 4.0).unwrap();
    let table = r.table("sharpness").unwrap();
    let lo = table.rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    let hi = table.rows.iter().map(|r| r[2]).fold(f64::NEG_INFINITY, f64::max);
    report(
        12,
        "gradient bound is sharp on the wedge",
        lo >= 0.95 && hi <= 1.0 + 1e-2,
        format!("ratio range [{lo:.6}, {hi:.6}] vs [0.95, 1.01]"),
    );
}

#[test]
fn criterion_13_separation() {
    let r = verify_separation(hat(10), hat(20), 1e-3).unwrap();
    let worst = r.worst.as_ref().map_or(f64::NEG_INFINITY, |w| w.violation);
    report(
        13,
        "positive-part separation grows at most 2 pi per unit time",
        r.pass,
        format!("worst growth excess {worst:+.3e} vs slack 1e-3"),
    );
}

#[test]
fn criterion_14_l1_attainment_with_a_jump() {
    // Unit-area ramp with a 0.06 jump at the origin.
    let datum = InitialData::PiecewiseLinear {
        xs: vec![-4.0, 0.0, 0.0, 4.0],
        ys: vec![0.0, 0.28, 0.22, 0.0],
    };
    let grid = Grid::new(6.0, 4800).unwrap();
    let r = run_l1_pipeline(&datum, &[0.1, 0.05, 0.025], &grid, &[0.01]).unwrap();
    let attainment = r.table("attainment").unwrap();
    let best = attainment
        .select("radius", 0.025)
        .first()
        .map(|row| row[2])
        .unwrap();
    report(
        14,
        "L1 attainment from jump data",
        best < 5e-2,
        format!("|y(0.01) - y0|_1 = {best:.4} vs 5e-2 at radius 0.025"),
    );
}

#[test]
fn criterion_15_lp_smoothing_uniform_cap() {
    let r = lp_sweep_on_traces(&[2.0], hats()).unwrap();
    let c = r.conclusion("cap_uniform_p_2").unwrap();
    report(15, "L2 smoothing cap uniform in n", c.pass, &c.detail);
}
