//! Diagnostics extracted from grid states: accumulated area, norms, discrete
//! gradients, the Harnack quantity `𝒜 - 2t·arctan y_x`, level crossings, and
//! the positive-part mass. These are the raw quantities the estimate
//! verifiers compare against their thresholds.

use crate::solver::GridFunction;

/// Trapezoid mass `∫ y` over the whole grid.
pub fn trapezoid_area(h: f64, values: &[f64]) -> f64 {
    let sum: f64 = values.iter().sum();
    h * (sum - 0.5 * (values[0] + values[values.len() - 1]))
}

/// Running trapezoid integral from the left end: entry `i` approximates
/// `∫_{-L}^{x_i} y`. On data supported inside the grid this is the area
/// function `𝒜(x)` of the flow.
pub fn accumulated_area(gf: &GridFunction) -> Vec<f64> {
    let h = gf.h();
    let mut out = Vec::with_capacity(gf.values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in gf.values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Norm bundle of one state: `L¹`, `Lᵖ` for the requested `p`, sup, and the
/// discrete Lipschitz constant (largest slope between adjacent nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub lp: f64,
    pub sup: f64,
    pub lip: f64,
}

pub fn norms(gf: &GridFunction, p: f64) -> Norms {
    assert!(p >= 1.0, "Lᵖ norms need p >= 1, got {p}");
    let h = gf.h();
    let abs: Vec<f64> = gf.values.iter().map(|v| v.abs()).collect();
    let l1 = trapezoid_area(h, &abs);
    let powed: Vec<f64> = abs.iter().map(|v| v.powf(p)).collect();
    let lp = trapezoid_area(h, &powed).max(0.0).powf(1.0 / p);
    let sup = abs.iter().cloned().fold(0.0, f64::max);
    let lip = gf
        .values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / h)
        .fold(0.0, f64::max);
    Norms { l1, lp, sup, lip }
}

/// Discrete spatial gradient: central differences inside, one-sided at the
/// two ends.
pub fn gradient(gf: &GridFunction) -> Vec<f64> {
    let v = &gf.values;
    let n = v.len();
    let h = gf.h();
    let mut out = Vec::with_capacity(n);
    out.push((v[1] - v[0]) / h);
    for i in 1..n - 1 {
        out.push((v[i + 1] - v[i - 1]) / (2.0 * h));
    }
    out.push((v[n - 1] - v[n - 2]) / h);
    out
}

/// Nodal Harnack quantity `ℋ = 𝒜 - 2t·arctan y_x`. The differential Harnack
/// estimate confines it to `[-tπ/2, ‖y₀‖₁ + tπ/2]` for nonnegative data.
pub fn harnack_quantity(gf: &GridFunction, t: f64) -> Vec<f64> {
    accumulated_area(gf)
        .into_iter()
        .zip(gradient(gf))
        .map(|(a, g)| a - 2.0 * t * g.atan())
        .collect()
}

/// Number of sign changes of `y - level`. A run of exact zeros counts as one
/// crossing only if the signs on its two sides differ; touching the level and
/// returning does not count.
pub fn crossing_count(values: &[f64], level: f64) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for &v in values {
        let d = v - level;
        let s = if d > 0.0 {
            1i8
        } else if d < 0.0 {
            -1i8
        } else {
            0i8
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Trapezoid mass of the positive part `max(y, 0)`.
pub fn positive_part_l1(gf: &GridFunction) -> f64 {
    let clipped: Vec<f64> = gf.values.iter().map(|v| v.max(0.0)).collect();
    trapezoid_area(gf.h(), &clipped)
}
