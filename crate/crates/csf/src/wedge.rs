//! The self-similar wedge profile and its derived area functions.
//!
//! A right-angled wedge (the vertical ray `{x = 0, y ≥ 0}` joined to the
//! horizontal ray `{y = 0, x ≥ 0}`) evolves under curve shortening flow as the
//! expanding graph `𝒲(x,t) = √t · W(x/√t)`, where the time-1 profile
//! `W : (0,∞) → (0,∞)` solves
//!
//! ```text
//!     2 W″ = (1 + W′²)(W − x W′),
//! ```
//!
//! is a strictly decreasing convex involution (`W⁻¹ = W`), has total area
//! `∫₀^∞ W = π/2`, and decays like `c·e^{−x²/4}/x²` with `c = 2d·e^{d²/4}`,
//! `d` being the distance from the origin to the graph.
//!
//! The profile is found by shooting from the symmetric point `(x₀, x₀)` with
//! slope −1 (so `d = √2·x₀` and one shot covers both branches via the
//! involution) and bisecting `x₀` until the terminal state at `x_max` sits on
//! the decaying branch, i.e. `W′ = −W(x/2 + 2/x)` up to the next asymptotic
//! order.  Bisecting on the terminal slope itself would converge to a start
//! value offset by `O(|W′(x_max)|)` and pollute the tail of the table.  Two
//! exact identities act as built-in oracles:
//!
//! * the first integral `(−xW′ + W)² e^{(x² + W²)/2} / (1 + W′²)`, constant
//!   along solutions and equal to `2x₀²e^{x₀²}` at the symmetric point;
//! * the slope–area identity `−arctan W′(x) = 𝒜₀(x)`, where
//!   `𝒜₀(x) = ½xW(x) + σ(x)` and `σ(x) = ∫ₓ^∞ W` is the tail area.

use thiserror::Error;

/// Stopping point of the asymptotic tail: beyond `x_max` the closed-form
/// `c·e^{−x²/4}/x²` replaces the table.
pub const DEFAULT_X_MAX: f64 = 8.0;
/// Adaptive ODE tolerance (relative, per step).
pub const DEFAULT_ODE_TOL: f64 = 1e-10;
/// Acceptance threshold for the tail-consistency residual after bisection.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-8;

const SCAN_LO: f64 = 0.30;
const SCAN_HI: f64 = 1.00;
const SCAN_STEP: f64 = 0.02;
/// Step cap keeps the sample table dense enough that cubic Hermite
/// interpolation stays far below every downstream tolerance.
const MAX_STEP: f64 = 2e-3;

#[derive(Debug, Error)]
pub enum WedgeError {
    /// The coarse scan of starting points found no sign change of the
    /// terminal angle; the shooting map should be monotone across the wedge
    /// value, so this signals an implementation bug.
    #[error("no bisection bracket in x0 scan over [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    /// More than one sign change: the empirical monotonicity the bisection
    /// relies on does not hold at this resolution.
    #[error("terminal angle changes sign {count} times over the x0 scan; expected exactly once")]
    NonMonotoneScan { count: usize },
    #[error("integration from x0 = {x0} blew up near x = {x}")]
    Blowup { x0: f64, x: f64 },
    /// Bisection converged in `x₀` but the terminal state still deviates
    /// from the decaying tail by more than the requested tolerance.
    #[error("tail-consistency residual {residual:e} exceeds tolerance {tol:e} after bisection")]
    TailResidual { residual: f64, tol: f64 },
    #[error("profile evaluation requires x > 0, got {0}")]
    NonPositiveArgument(f64),
    #[error("area argument {0} outside (0, pi/2)")]
    AreaOutOfRange(f64),
}

/// Why a single shot stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotOutcome {
    /// Reached `x_max`; carries the terminal tangent angle `arctan W′(x_max)`.
    Reached { terminal_angle: f64 },
    /// `W` hit zero before `x_max`: the start value was too small.
    Undershoot { x: f64 },
    /// `W′` hit zero while `W > 0`: the start value was too large.
    Overshoot { x: f64 },
}

/// One integration of the profile ODE from the symmetric point.
#[derive(Debug, Clone)]
pub struct Shot {
    /// Sample abscissae, increasing from `x₀`.
    pub xs: Vec<f64>,
    /// `W` at the samples.
    pub ws: Vec<f64>,
    /// `W′` at the samples.
    pub wps: Vec<f64>,
    pub outcome: ShotOutcome,
}

impl Shot {
    /// How far the terminal state is from the decaying branch, on which
    /// `W′ + W(x/2 + 2/x) = O(W/x⁴)`.  Starts that are too small leave a
    /// negative residual (`W` dives toward zero), too-large starts a positive
    /// one, so this is the bisection's sign function.
    pub fn tail_residual(&self) -> f64 {
        let x = *self.xs.last().unwrap();
        let w = *self.ws.last().unwrap();
        let wp = *self.wps.last().unwrap();
        wp + w * (x / 2.0 + 2.0 / x)
    }

    /// Signed residual with early stops mapped to the worst value of their
    /// sign, so the bisection can consume every outcome uniformly.
    fn shooting_residual(&self) -> f64 {
        match self.outcome {
            ShotOutcome::Reached { .. } => self.tail_residual(),
            ShotOutcome::Undershoot { .. } => -std::f64::consts::FRAC_PI_2,
            ShotOutcome::Overshoot { .. } => std::f64::consts::FRAC_PI_2,
        }
    }
}

/// Right-hand side of the first-order system for `(W, W′)`.
#[inline]
fn rhs(x: f64, w: f64, wp: f64) -> (f64, f64) {
    (wp, 0.5 * (1.0 + wp * wp) * (w - x * wp))
}

// Dormand–Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order minus 4th-order weights (error estimator).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate the profile ODE from the symmetric state `(x0, W = x0, W′ = −1)`
/// forward to `x_max`, recording every accepted step.
///
/// Error control is purely relative (`tol·|value|` with a vanishing absolute
/// floor) so the tail, which decays below `10⁻⁸`, keeps full relative
/// accuracy.  Stops early when `W ≤ 0` (undershoot) or `W′ ≥ 0` (overshoot):
/// only the sign of the stop matters to the caller, so the event is not
/// localized further.
pub fn shoot_profile(x0: f64, x_max: f64, tol: f64) -> Result<Shot, WedgeError> {
    assert!(x0 > 0.0 && x_max > x0 && tol > 0.0, "shoot_profile preconditions");
    // Absolute floor far below the tail scale: keeps the controller purely
    // relative without dividing by zero.
    let atol = 1e-300;

    let mut x = x0;
    let (mut w, mut wp) = (x0, -1.0);
    let mut xs = vec![x];
    let mut ws = vec![w];
    let mut wps = vec![wp];

    let mut h = 1e-6_f64; // warm-up step; the controller grows it immediately
    let (mut k1, mut k1p) = rhs(x, w, wp);
    let mut steps = 0usize;

    while x < x_max {
        steps += 1;
        if steps > 2_000_000 {
            return Err(WedgeError::Blowup { x0, x });
        }
        h = h.min(MAX_STEP).min(x_max - x);

        let (k2, k2p) = rhs(x + A21 * h, w + h * A21 * k1, wp + h * A21 * k1p);
        let (k3, k3p) = rhs(
            x + 0.3 * h,
            w + h * (A31 * k1 + A32 * k2),
            wp + h * (A31 * k1p + A32 * k2p),
        );
        let (k4, k4p) = rhs(
            x + 0.8 * h,
            w + h * (A41 * k1 + A42 * k2 + A43 * k3),
            wp + h * (A41 * k1p + A42 * k2p + A43 * k3p),
        );
        let (k5, k5p) = rhs(
            x + 8.0 / 9.0 * h,
            w + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            wp + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p),
        );
        let (k6, k6p) = rhs(
            x + h,
            w + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            wp + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p),
        );
        let w_new = w + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let wp_new = wp + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p);
        let (k7, k7p) = rhs(x + h, w_new, wp_new);

        let err_w = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let err_wp = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p);
        let scale_w = atol + tol * w.abs().max(w_new.abs());
        let scale_wp = atol + tol * wp.abs().max(wp_new.abs());
        let err = (err_w / scale_w).abs().max((err_wp / scale_wp).abs());

        if err <= 1.0 {
            x += h;
            w = w_new;
            wp = wp_new;
            k1 = k7; // first-same-as-last
            k1p = k7p;
            xs.push(x);
            ws.push(w);
            wps.push(wp);
            if !w.is_finite() || !wp.is_finite() {
                return Err(WedgeError::Blowup { x0, x });
            }
            if w <= 0.0 {
                return Ok(Shot { xs, ws, wps, outcome: ShotOutcome::Undershoot { x } });
            }
            if wp >= 0.0 {
                return Ok(Shot { xs, ws, wps, outcome: ShotOutcome::Overshoot { x } });
            }
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }

    let terminal_angle = wp.atan();
    Ok(Shot { xs, ws, wps, outcome: ShotOutcome::Reached { terminal_angle } })
}

/// Constants read off a solved profile that the estimates quote.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DerivedConstants {
    /// `W(σ⁻¹(π/4))` — the height-bound constant at twice the threshold time,
    /// where the area argument `A₀/2t` equals `π/4`.
    pub c_refine_cor: f64,
    /// Smallest `C₁` with `1/(−W′(y)) ≤ C₁·(y·e^{y²/4} + 1)` over the table.
    pub c1_gradient: f64,
}

/// The solved wedge profile: sample table plus everything derived from it.
///
/// Evaluation branches: cubic Hermite interpolation on `[x₀, x_max]` (the ODE
/// supplies exact derivatives, so no differencing enters); the involution
/// `W(x) = W⁻¹(x)` for `x < x₀`; the asymptotic tail for `x ≥ x_max`.
#[derive(Debug, Clone)]
pub struct WedgeProfile {
    xs: Vec<f64>,
    ws: Vec<f64>,
    wps: Vec<f64>,
    /// `σ(x_i) = ∫_{x_i}^∞ W`, accumulated backwards from the tail.
    sigma_at: Vec<f64>,
    /// `x₀`: the abscissa with `W(x₀) = x₀`, `W′(x₀) = −1`.
    pub symmetric_point: f64,
    /// Distance from the origin to the graph, `d = √2·x₀`.
    pub d: f64,
    /// `c = 2d·e^{d²/4}` in the tail form `W ≈ c·e^{−x²/4}/x²`.
    pub tail_coefficient: f64,
    /// Where the table hands over to the asymptotic tail.
    pub x_max: f64,
    /// Tail-consistency residual of the accepted shot (see
    /// [`Shot::tail_residual`]).
    pub tolerance: f64,
    /// Relative gap between the table and the tail formula at `x_max`; the
    /// asymptotics carry an unquantified `o(1)`, so the gap is reported
    /// rather than hidden.
    pub splice_mismatch: f64,
    total_area: f64,
}

/// Exact integral of the cubic Hermite interpolant over one segment.
#[inline]
fn hermite_segment_integral(dx: f64, w0: f64, w1: f64, wp0: f64, wp1: f64) -> f64 {
    dx * (0.5 * (w0 + w1) + dx * (wp0 - wp1) / 12.0)
}

/// Cubic Hermite value at local coordinate `s ∈ [0, 1]` of the segment.
#[inline]
fn hermite_value(s: f64, dx: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + y1 * (3.0 * s2 - 2.0 * s3)
        + dx * (d0 * (s3 - 2.0 * s2 + s) + d1 * (s3 - s2))
}

/// Solve for the wedge profile by scanning and bisecting the symmetric point.
///
/// The scan step is coarse (0.02 over `[0.30, 1.00)`) and classifies each
/// start as undershoot/overshoot; the shooting-residual map is verified to
/// change sign exactly once before bisection is trusted, since no
/// monotonicity theorem backs it.
pub fn solve_wedge(tol: f64) -> Result<WedgeProfile, WedgeError> {
    solve_wedge_with(tol, DEFAULT_ODE_TOL, DEFAULT_X_MAX)
}

/// [`solve_wedge`] with explicit ODE tolerance and tail handover point.
pub fn solve_wedge_with(tol: f64, ode_tol: f64, x_max: f64) -> Result<WedgeProfile, WedgeError> {
    assert!(tol > 0.0 && ode_tol > 0.0 && x_max > 1.0, "solve_wedge preconditions");

    // Coarse scan: bracket the sign change of the shooting residual.
    let mut brackets = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut x0 = SCAN_LO;
    while x0 < SCAN_HI {
        let sign = shoot_profile(x0, x_max, ode_tol.max(1e-8))?.shooting_residual();
        if let Some((px, ps)) = prev {
            if ps * sign < 0.0 {
                brackets.push((px, x0));
            }
        }
        prev = Some((x0, sign));
        x0 += SCAN_STEP;
    }
    match brackets.len() {
        0 => return Err(WedgeError::NoBracket { lo: SCAN_LO, hi: SCAN_HI }),
        1 => {}
        count => return Err(WedgeError::NonMonotoneScan { count }),
    }

    // Bisection to f64 exhaustion: the terminal angle at the converged start
    // is far below any practical tolerance, so iteration count is cheap
    // insurance rather than the accuracy limit.
    let (mut lo, mut hi) = brackets[0];
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let sign = shoot_profile(mid, x_max, ode_tol)?.shooting_residual();
        if sign < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x0 = 0.5 * (lo + hi);
    let shot = shoot_profile(x0, x_max, ode_tol)?;
    // The converged midpoint must reach x_max; an early stop reports the
    // sentinel residual, which exceeds any sane tolerance below π/2.
    let residual = shot.shooting_residual();
    if residual.abs() > tol {
        return Err(WedgeError::TailResidual { residual, tol });
    }

    Ok(WedgeProfile::from_samples(shot.xs, shot.ws, shot.wps, residual.abs()))
}

impl WedgeProfile {
    /// Assemble a profile from a sample table (the converged shot, or a table
    /// read back from disk).  Recomputes `d`, the tail coefficient, the
    /// suffix areas, and the splice diagnostics.
    pub fn from_samples(xs: Vec<f64>, ws: Vec<f64>, wps: Vec<f64>, tolerance: f64) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ws.len() && xs.len() == wps.len());
        let x0 = xs[0];
        let x_max = *xs.last().unwrap();
        let d = std::f64::consts::SQRT_2 * x0;
        let tail_coefficient = 2.0 * d * (d * d / 4.0).exp();

        let tail_at_xmax = tail_coefficient * (-x_max * x_max / 4.0).exp() / (x_max * x_max);
        let w_end = *ws.last().unwrap();
        let splice_mismatch = ((tail_at_xmax - w_end) / w_end).abs();

        // σ at every sample: asymptotic tail beyond x_max, then exact
        // integrals of the Hermite segments accumulated right to left.
        let n = xs.len();
        let mut sigma_at = vec![0.0; n];
        sigma_at[n - 1] = sigma_tail(tail_coefficient, x_max);
        for i in (0..n - 1).rev() {
            let dx = xs[i + 1] - xs[i];
            sigma_at[i] = sigma_at[i + 1]
                + hermite_segment_integral(dx, ws[i], ws[i + 1], wps[i], wps[i + 1]);
        }
        // ∫₀^∞ W = x₀² + 2σ(x₀): the square at the symmetric point plus the
        // tail and its mirror image under the involution.
        let total_area = x0 * x0 + 2.0 * sigma_at[0];

        WedgeProfile {
            xs,
            ws,
            wps,
            sigma_at,
            symmetric_point: x0,
            d,
            tail_coefficient,
            x_max,
            tolerance,
            splice_mismatch,
            total_area,
        }
    }

    /// Sample table as `(x, W, W′)` triples (borrowed column views).
    pub fn samples(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.xs, &self.ws, &self.wps)
    }

    /// `∫₀^∞ W` as computed from the table plus tail; equals `π/2` for the
    /// true profile.
    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    fn segment_of(&self, x: f64) -> usize {
        debug_assert!(x >= self.symmetric_point && x <= self.x_max);
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    fn w_table(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        let dx = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / dx;
        hermite_value(s, dx, self.ws[i], self.ws[i + 1], self.wps[i], self.wps[i + 1])
    }

    fn wp_table(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        let dx = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / dx;
        // W″ from the ODE itself gives derivative data for interpolating W′.
        let wpp0 = rhs(self.xs[i], self.ws[i], self.wps[i]).1;
        let wpp1 = rhs(self.xs[i + 1], self.ws[i + 1], self.wps[i + 1]).1;
        hermite_value(s, dx, self.wps[i], self.wps[i + 1], wpp0, wpp1)
    }

    fn w_tail(&self, x: f64) -> f64 {
        self.tail_coefficient * (-x * x / 4.0).exp() / (x * x)
    }

    /// Invert the table branch: the `x ∈ [x₀, x_max]` with `W(x) = value`.
    fn invert_table(&self, value: f64) -> f64 {
        debug_assert!(value <= self.ws[0] && value >= *self.ws.last().unwrap());
        let (mut lo, mut hi) = (self.symmetric_point, self.x_max);
        // W is strictly decreasing, so plain bisection on the interpolant.
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if self.w_table(mid) > value {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Invert the asymptotic tail: the `y > x_max` with `c·e^{−y²/4}/y² = value`.
    fn invert_tail(&self, value: f64) -> f64 {
        // Fixed-point on y² /4 + 2·ln y = ln(c/value), starting from the
        // Gaussian-only guess; converges in a handful of rounds.
        let rhs_log = (self.tail_coefficient / value).ln();
        let mut y = (4.0 * rhs_log).sqrt().max(self.x_max);
        for _ in 0..60 {
            let next = (4.0 * (rhs_log - 2.0 * y.ln())).max(self.x_max * self.x_max).sqrt();
            if (next - y).abs() <= f64::EPSILON * y {
                y = next;
                break;
            }
            y = next;
        }
        y
    }

    /// `W(x)` for any `x > 0`.
    pub fn w(&self, x: f64) -> f64 {
        assert!(x > 0.0, "W is defined for x > 0, got {x}");
        if x >= self.x_max {
            self.w_tail(x)
        } else if x >= self.symmetric_point {
            self.w_table(x)
        } else if x >= *self.ws.last().unwrap() {
            // Below the symmetric point: use W = W⁻¹ and invert the table.
            self.invert_table(x)
        } else {
            self.invert_tail(x)
        }
    }

    /// `W′(x)` for any `x > 0`.
    ///
    /// Beyond `x_max` this returns `−x·W(x)/2`, the leading asymptotic form
    /// with its `o(1)` dropped; the neglected relative correction is `4/x²`.
    pub fn wprime(&self, x: f64) -> f64 {
        assert!(x > 0.0, "W' is defined for x > 0, got {x}");
        if x >= self.x_max {
            -0.5 * x * self.w_tail(x)
        } else if x >= self.symmetric_point {
            self.wp_table(x)
        } else {
            // Inverse-function rule through the involution: W′(x) = 1/W′(W(x)).
            let y = self.w(x);
            let slope_at_y = if y >= self.x_max {
                -0.5 * y * self.w_tail(y)
            } else {
                self.wp_table(y)
            };
            1.0 / slope_at_y
        }
    }

    /// Tail area `σ(x) = ∫ₓ^∞ W` for any `x > 0`; strictly decreasing with
    /// range `(0, π/2)`.
    pub fn tail_area(&self, x: f64) -> f64 {
        assert!(x > 0.0, "sigma is defined for x > 0, got {x}");
        if x >= self.x_max {
            sigma_tail(self.tail_coefficient, x)
        } else if x >= self.symmetric_point {
            let i = self.segment_of(x);
            let dx = self.xs[i + 1] - self.xs[i];
            let s = (x - self.xs[i]) / dx;
            // Suffix at the right node plus the exact cubic integral of the
            // partial segment [x, x_{i+1}].
            let w_here = self.w_table(x);
            let wp_here = self.wp_table(x);
            self.sigma_at[i + 1]
                + hermite_segment_integral(
                    dx * (1.0 - s),
                    w_here,
                    self.ws[i + 1],
                    wp_here,
                    self.wps[i + 1],
                )
        } else {
            // Mirror branch: the region under W over [0, x] splits into the
            // rectangle x·W(x) and a reflected copy of the tail past W(x).
            let w_here = self.w(x);
            self.total_area - x * w_here - self.tail_area(w_here)
        }
    }

    /// `𝒜₀(x) = ½·x·W(x) + σ(x)` — the triangle-plus-tail area whose arctan
    /// identity `−arctan W′ = 𝒜₀` drives the sharp gradient bounds.
    ///
    /// Accepts `x = 0` with the limiting value `π/2` (the triangle term
    /// vanishes since `W` grows only like `2√ln(1/x)`), so gradient bounds
    /// degrade gracefully to zero where a solution touches zero height.
    pub fn area_a0(&self, x: f64) -> f64 {
        assert!(x >= 0.0, "𝒜₀ is defined for x ≥ 0, got {x}");
        if x == 0.0 {
            return std::f64::consts::FRAC_PI_2;
        }
        0.5 * x * self.w(x) + self.tail_area(x)
    }

    /// `𝒜₁(x) = π/2 − 𝒜₀(x)`, computed as the exact complement.
    pub fn area_a1(&self, x: f64) -> f64 {
        std::f64::consts::FRAC_PI_2 - self.area_a0(x)
    }

    /// `σ⁻¹(a)`: the abscissa whose tail area equals `a ∈ (0, π/2)`.
    pub fn inverse_sigma(&self, a: f64) -> Result<f64, WedgeError> {
        if !(a > 0.0 && a < std::f64::consts::FRAC_PI_2) {
            return Err(WedgeError::AreaOutOfRange(a));
        }
        let (mut lo, mut hi) = (1e-12, 60.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.tail_area(mid) > a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `F(a) = 𝒜₀(σ⁻¹(a))`: strictly increasing from 0 to `π/2`, with
    /// `F′ > ½` and `F(a) < π/4 + a/2`.
    pub fn big_f(&self, a: f64) -> Result<f64, WedgeError> {
        Ok(self.area_a0(self.inverse_sigma(a)?))
    }

    /// The expanding solution `𝒲(x,t) = √t·W(x/√t)`.
    pub fn scaled(&self, x: f64, t: f64) -> f64 {
        assert!(x > 0.0 && t > 0.0, "scaled wedge needs x > 0 and t > 0");
        let rt = t.sqrt();
        rt * self.w(x / rt)
    }

    /// First integral `(−xW′ + W)²·e^{(x²+W²)/2}/(1+W′²)` at sample `i`.
    pub fn first_integral_at(&self, i: usize) -> f64 {
        let (x, w, wp) = (self.xs[i], self.ws[i], self.wps[i]);
        let q = -x * wp + w;
        q * q * ((x * x + w * w) / 2.0).exp() / (1.0 + wp * wp)
    }

    /// Relative spread of the first integral across the whole table — the
    /// profile's primary integration-accuracy oracle.
    pub fn first_integral_spread(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..self.xs.len() {
            let v = self.first_integral_at(i);
            min = min.min(v);
            max = max.max(v);
        }
        (max - min) / max
    }

    /// Constants used by the corollary-form bounds.
    pub fn derived_constants(&self) -> DerivedConstants {
        let c_refine_cor = self.w(
            self.inverse_sigma(std::f64::consts::FRAC_PI_4)
                .expect("pi/4 is inside the range of sigma"),
        );
        let mut c1_gradient: f64 = 0.0;
        for i in 0..self.xs.len() {
            let y = self.xs[i];
            let denom = (-self.wps[i]) * (1.0 + y * (y * y / 4.0).exp());
            c1_gradient = c1_gradient.max(1.0 / denom);
        }
        DerivedConstants { c_refine_cor, c1_gradient }
    }
}

/// `σ` beyond the table: `c·∫ₓ^∞ e^{−s²/4}/s² ds` by the integration-by-parts
/// series `e^{−x²/4}·(2/x³)·(1 − 6/x² + 60/x⁴ − 840/x⁶)`.  Truncation error is
/// below `10⁻³` relative at `x = 8`, i.e. `~10⁻¹²` absolute — invisible at
/// every downstream tolerance.
fn sigma_tail(c: f64, x: f64) -> f64 {
    let x2 = x * x;
    c * (-x2 / 4.0).exp() * (2.0 / (x2 * x))
        * (1.0 - 6.0 / x2 + 60.0 / (x2 * x2) - 840.0 / (x2 * x2 * x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn profile() -> &'static WedgeProfile {
        use std::sync::OnceLock;
        static P: OnceLock<WedgeProfile> = OnceLock::new();
        P.get_or_init(|| solve_wedge(DEFAULT_BISECTION_TOL).expect("wedge solve"))
    }

    // Reference values from an independent implementation (adaptive
    // Runge-Kutta shooting at tolerance 1e-12 with dense output), frozen so
    // any regression in the integrator, interpolant, or bisection shows up
    // as a direct numeric mismatch.
    const X0_REF: f64 = 0.7385645418705371;
    const W_REF: [(f64, f64); 5] = [
        (0.2, 1.6823148305693922),
        (0.5, 1.0287788975436865),
        (1.0, 0.5197336982859353),
        (2.0, 0.12299968165976108),
        (5.0, 1.7451079386829901e-4),
    ];
    const WP_REF: [(f64, f64); 4] = [
        (0.2, -3.376777822496232),
        (0.5, -1.4857822231337152),
        (1.0, -0.698546720476586),
        (2.0, -0.19462931302836503),
    ];

    #[test]
    fn symmetric_point_matches_reference() {
        let p = profile();
        assert_relative_eq!(p.symmetric_point, X0_REF, max_relative = 1e-9);
        assert_relative_eq!(p.d, std::f64::consts::SQRT_2 * X0_REF, max_relative = 1e-9);
    }

    #[test]
    fn distance_bound_d_squared_at_most_pi_over_2() {
        let p = profile();
        assert!(
            p.d * p.d <= FRAC_PI_2 + 1e-9,
            "d^2 = {} should not exceed pi/2 = {}",
            p.d * p.d,
            FRAC_PI_2
        );
    }

    #[test]
    fn profile_values_match_reference() {
        let p = profile();
        for &(x, w) in &W_REF {
            assert_relative_eq!(p.w(x), w, max_relative = 1e-8);
        }
        for &(x, wp) in &WP_REF {
            assert_relative_eq!(p.wprime(x), wp, max_relative = 1e-8);
        }
    }

    #[test]
    fn symmetric_point_is_fixed_point_with_slope_minus_one() {
        let p = profile();
        assert_relative_eq!(p.w(p.symmetric_point), p.symmetric_point, max_relative = 1e-12);
        assert_relative_eq!(p.wprime(p.symmetric_point), -1.0, max_relative = 1e-12);
    }

    #[test]
    fn total_area_is_pi_over_2() {
        let p = profile();
        assert_relative_eq!(p.total_area(), FRAC_PI_2, max_relative = 1e-8);
    }

    #[test]
    fn first_integral_is_constant_and_matches_symmetric_value() {
        let p = profile();
        let spread = p.first_integral_spread();
        assert!(spread < 1e-8, "first-integral relative spread {spread:e} too large");
        let x0 = p.symmetric_point;
        assert_relative_eq!(
            p.first_integral_at(0),
            2.0 * x0 * x0 * (x0 * x0).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn involution_on_both_branches() {
        let p = profile();
        // Log-spaced points spanning the inverted branch, the table, and a
        // stretch of the tail.
        let mut x = 0.05_f64;
        while x < 7.0 {
            let roundtrip = p.w(p.w(x));
            assert!(
                (roundtrip - x).abs() < 1e-7 * x.max(1.0),
                "W(W({x})) = {roundtrip}"
            );
            x *= 1.25;
        }
    }

    #[test]
    fn ode_residual_small_against_differenced_second_derivative() {
        // Residual of 2W″ − (1+W′²)(W − xW′) with W″ from second differences
        // of the stored table. The budget covers the truncation of the
        // non-uniform stencil, O(Δ²) plus O(|dr − dl|) where the adaptive
        // step size changed, and the f64 rounding floor ε·|W|/Δ², which at
        // Δ ≈ 2e-3 dominates any integrator error.
        let p = profile();
        let (xs, ws, wps) = p.samples();
        for i in (1..xs.len() - 1).step_by(7) {
            let dl = xs[i] - xs[i - 1];
            let dr = xs[i + 1] - xs[i];
            // Non-uniform central second difference.
            let wpp = 2.0 * (dl * ws[i + 1] - (dl + dr) * ws[i] + dr * ws[i - 1])
                / (dl * dr * (dl + dr));
            let residual = 2.0 * wpp - (1.0 + wps[i] * wps[i]) * (ws[i] - xs[i] * wps[i]);
            let dx = dl.max(dr);
            let budget = 10.0
                * (dx * dx
                    + (dr - dl).abs()
                    + f64::EPSILON * ws[i].abs().max(1.0) / (dx * dx));
            assert!(
                residual.abs() < budget,
                "ODE residual {residual:e} at x = {} exceeds budget {budget:e}",
                xs[i]
            );
        }
    }

    #[test]
    fn monotone_decreasing_and_convex_table() {
        let p = profile();
        let (_, ws, wps) = p.samples();
        for i in 1..ws.len() {
            assert!(ws[i] < ws[i - 1], "W should strictly decrease along the table");
            assert!(wps[i] < 0.0, "W' should stay negative");
            assert!(wps[i] > wps[i - 1], "W' should strictly increase (convexity)");
        }
    }

    #[test]
    fn slope_area_identity() {
        let p = profile();
        for &x in &[0.2, 0.5, 1.0, 2.0, 3.5, 5.0] {
            let lhs = -(p.wprime(x)).atan();
            let rhs = p.area_a0(x);
            assert!(
                (lhs - rhs).abs() < 1e-7,
                "-arctan W'({x}) = {lhs} vs A0({x}) = {rhs}"
            );
        }
    }

    #[test]
    fn area_complement_and_reflection() {
        let p = profile();
        let x0 = p.symmetric_point;
        assert_relative_eq!(p.area_a0(x0), FRAC_PI_4, max_relative = 1e-8);
        assert_relative_eq!(p.area_a1(x0), FRAC_PI_4, max_relative = 1e-8);
        for &x in &[0.5, 2.0] {
            // 𝒜₁(x) = 𝒜₀(W(x)): reflecting the region across y = x.
            assert!(
                (p.area_a1(x) - p.area_a0(p.w(x))).abs() < 1e-8,
                "A1 vs A0∘W mismatch at x = {x}"
            );
        }
    }

    #[test]
    fn sigma_derivative_and_a0_derivative() {
        let p = profile();
        let h = 1e-5;
        for &x in &[0.8, 1.5, 3.0] {
            let dsigma = (p.tail_area(x + h) - p.tail_area(x - h)) / (2.0 * h);
            assert!(
                (dsigma + p.w(x)).abs() < 1e-6,
                "sigma'({x}) = {dsigma} should equal -W"
            );
            let da0 = (p.area_a0(x + h) - p.area_a0(x - h)) / (2.0 * h);
            let expected = 0.5 * (x * p.wprime(x) - p.w(x));
            assert!(
                (da0 - expected).abs() < 1e-6,
                "A0'({x}) = {da0} vs (xW' - W)/2 = {expected}"
            );
        }
    }

    #[test]
    fn sigma_bounds_and_limits() {
        let p = profile();
        // σ ↑ π/2 as x ↓ 0.
        assert!((p.tail_area(1e-3) - FRAC_PI_2).abs() < 1e-2);
        // σ(x) ≤ 2W(x)/x.
        for &x in &[1.0, 2.0, 4.0] {
            assert!(p.tail_area(x) <= 2.0 * p.w(x) / x);
        }
        // Independent quadrature oracle on [1, 40]: plain trapezoid of w().
        let mut acc = 0.0;
        let m = 40_000;
        let (a, b) = (1.0, 40.0);
        let dx = (b - a) / m as f64;
        for i in 0..m {
            let xl = a + i as f64 * dx;
            acc += 0.5 * dx * (p.w(xl) + p.w(xl + dx));
        }
        assert_relative_eq!(p.tail_area(1.0), acc, max_relative = 1e-6);
    }

    #[test]
    fn decay_comparison_between_samples() {
        // W(s) ≤ W(x)·e^{(x²−s²)/4} for x < s: rapid-decay comparison.
        let p = profile();
        let pts = [0.8, 1.2, 2.0, 3.0, 4.5, 6.0];
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (x, s) = (pts[i], pts[j]);
                let bound = p.w(x) * ((x * x - s * s) / 4.0).exp() * (1.0 + 1e-9);
                assert!(p.w(s) <= bound, "decay bound fails from {x} to {s}");
            }
        }
    }

    #[test]
    fn tail_splice_quality() {
        let p = profile();
        // The leading-order tail formula runs above the true profile by the
        // next terms of the asymptotic series (the same alternating series
        // that the σ tail uses, by the linearized ODE 2u″ − xu′ − 2u = 0).
        // The recorded splice mismatch must match that prediction, not be an
        // integration artifact of some other size.
        let series = |x2: f64| 1.0 - 6.0 / x2 + 60.0 / (x2 * x2) - 840.0 / (x2 * x2 * x2);
        let expected = 1.0 / series(p.x_max * p.x_max) - 1.0;
        assert!(
            (p.splice_mismatch - expected).abs() < 0.1 * expected,
            "splice mismatch {} far from the next-order prediction {expected}",
            p.splice_mismatch
        );
        // Two units inside the table the correction is larger still; the
        // interpolant must sit below the leading-order form by the series
        // factor.
        let tail6 = p.tail_coefficient * (-9.0_f64).exp() / 36.0;
        let ratio = p.w(6.0) / tail6;
        assert!(
            (ratio - series(36.0)).abs() < 0.02,
            "W(6)/leading-tail ratio {ratio} vs series {}",
            series(36.0)
        );
    }

    #[test]
    fn tail_slope_consistency_at_handover() {
        let p = profile();
        // Beyond x_max the slope uses −xW/2 with the o(1) dropped, so the
        // quotient is exactly one there...
        let q = -p.wprime(p.x_max + 1e-9) / (0.5 * (p.x_max + 1e-9) * p.w(p.x_max + 1e-9));
        assert_relative_eq!(q, 1.0, max_relative = 1e-12);
        // ...while just inside the table the true correction 1 + 4/x² + …
        // is visible and bounded.
        let x = p.x_max - 0.1;
        let q_in = -p.wprime(x) / (0.5 * x * p.w(x));
        assert!(q_in > 1.0 && q_in < 1.1, "interior slope quotient {q_in}");
    }

    #[test]
    fn big_f_limits_monotonicity_and_bounds() {
        let p = profile();
        assert!(p.big_f(1e-3).unwrap() < 1e-2);
        assert!(FRAC_PI_2 - p.big_f(FRAC_PI_2 - 1e-3).unwrap() < 1e-2);
        for &a in &[0.1, 0.5, 1.0, 1.5] {
            assert!(
                p.big_f(a).unwrap() < FRAC_PI_4 + a / 2.0,
                "F({a}) should stay below pi/4 + a/2"
            );
        }
        let h = 1e-4;
        for &a in &[0.2, 0.8, 1.4] {
            let slope = (p.big_f(a + h).unwrap() - p.big_f(a).unwrap()) / h;
            assert!(slope > 0.5, "F'({a}) = {slope} should exceed 1/2");
        }
    }

    #[test]
    fn inverse_sigma_round_trip() {
        let p = profile();
        for &a in &[0.1, 0.5, 1.0, 1.5] {
            let x = p.inverse_sigma(a).unwrap();
            assert_relative_eq!(p.tail_area(x), a, max_relative = 1e-9);
        }
        assert!(p.inverse_sigma(2.0).is_err());
        assert!(p.inverse_sigma(-0.1).is_err());
    }

    #[test]
    fn scaled_wedge_identities() {
        let p = profile();
        assert_relative_eq!(p.scaled(1.3, 1.0), p.w(1.3), max_relative = 1e-14);
        // Parabolic scaling 𝒲(λx, λ²t) = λ𝒲(x,t).
        let lambda = 3.0;
        assert_relative_eq!(
            p.scaled(lambda * 0.7, lambda * lambda * 0.4),
            lambda * p.scaled(0.7, 0.4),
            max_relative = 1e-12
        );
        // Barrier form: 𝒲(x,t) ≤ c·t^{3/2}·e^{−x²/4t}/x² for x ≥ √t, with the
        // tail coefficient as the constant (W·ξ²·e^{ξ²/4} increases to c).
        for &(x, t) in &[(1.0_f64, 0.5_f64), (2.0, 0.1), (3.0, 1.0)] {
            let bound = p.tail_coefficient * t.powf(1.5) * (-x * x / (4.0 * t)).exp() / (x * x);
            assert!(
                p.scaled(x, t) <= bound * (1.0 + 1e-9),
                "scaled wedge exceeds its decay barrier at ({x}, {t})"
            );
        }
    }

    #[test]
    fn derived_constants_match_reference_and_are_scan_stable() {
        let p = profile();
        let dc = p.derived_constants();
        // Frozen from the independent reference implementation.
        assert_relative_eq!(dc.c_refine_cor, 1.1229674435514565, max_relative = 1e-7);
        assert_relative_eq!(dc.c1_gradient, 0.8242722990196979, max_relative = 1e-4);
        // Scan-refinement stability: the same constant from a twice-denser
        // scan of the bound's argument moves by far less than 5%.
        let mut refined: f64 = 0.0;
        let (xs, _, _) = p.samples();
        let mut x = xs[0];
        while x < p.x_max {
            let denom = (-p.wprime(x)) * (1.0 + x * (x * x / 4.0).exp());
            refined = refined.max(1.0 / denom);
            x += 5e-4;
        }
        assert!((refined - dc.c1_gradient).abs() / dc.c1_gradient < 0.05);
    }

    #[test]
    fn shooting_oracle_signs_are_opposite_around_the_root() {
        // ±10% perturbations of the converged start land on opposite sides.
        let lo = shoot_profile(0.9 * X0_REF, 8.0, 1e-10).unwrap();
        let hi = shoot_profile(1.1 * X0_REF, 8.0, 1e-10).unwrap();
        assert!(lo.shooting_residual() < 0.0, "undershoot side should be negative");
        assert!(hi.shooting_residual() > 0.0, "overshoot side should be positive");
        assert!(matches!(lo.outcome, ShotOutcome::Undershoot { .. }));
        assert!(matches!(hi.outcome, ShotOutcome::Overshoot { .. }));
    }

    #[test]
    fn first_integral_holds_at_symmetric_start_for_any_x0() {
        // At (x0, x0, −1) the first-integral expression reduces to 2x0²e^{x0²}
        // regardless of x0: the identity costs nothing at the start point.
        for &x0 in &[0.4_f64, 0.7, 1.0] {
            let q = -x0 * (-1.0) + x0;
            let value = q * q * ((x0 * x0 + x0 * x0) / 2.0).exp() / (1.0 + 1.0);
            assert_relative_eq!(value, 2.0 * x0 * x0 * (x0 * x0).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_harnack_sector_identity() {
        // The polar sector between the positive x-axis and the ray to
        // (x, W(x)), bounded outward by the graph, has area
        // ½∫ₓ^∞ (W − sW′) ds; the zero-Harnack identity says this equals
        // −arctan W′(x).  Quadrature along the curve keeps the check
        // independent of the σ-based 𝒜₀ implementation.
        let p = profile();
        for k in 0..20 {
            let x = 0.3 + 0.25 * k as f64;
            let (mut sector, m, b) = (0.0, 20_000, 40.0);
            let dx = (b - x) / m as f64;
            for i in 0..m {
                let s0 = x + i as f64 * dx;
                let s1 = s0 + dx;
                let f0 = p.w(s0) - s0 * p.wprime(s0);
                let f1 = p.w(s1) - s1 * p.wprime(s1);
                sector += 0.25 * dx * (f0 + f1);
            }
            assert!(
                (sector - -(p.wprime(x)).atan()).abs() < 1e-5,
                "sector-area identity fails at x = {x}: sector {sector}"
            );
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let a = solve_wedge(1e-8).unwrap();
        let b = solve_wedge(1e-8).unwrap();
        assert_eq!(a.symmetric_point, b.symmetric_point);
        assert_eq!(a.samples().1, b.samples().1);
    }
}
