//! Numerical laboratory for graphical curve shortening flow,
//!
//! ```text
//!     y_t = (arctan y_x)_x = y_xx / (1 + y_x²),
//! ```
//!
//! built around three pieces:
//!
//! * [`wedge`] — the self-similar expanding profile `W` from a right-angled
//!   wedge and the area functions (`σ`, `𝒜₀`, `𝒜₁`, `F`) through which the
//!   sharp height and gradient bounds are expressed;
//! * [`solver`] — an explicit conservative-flux finite-difference scheme whose
//!   discrete total area is exact up to boundary flux;
//! * [`estimates`] — verifiers that replay each quantitative bound
//!   (Harnack-type propagation, delayed gradient and height control after the
//!   threshold time `τ = A₀/π`, Lᵖ smoothing, separation, comparison) against
//!   computed flow traces.
//!
//! [`analysis`] holds the derived quantities the bounds are phrased in,
//! [`experiments`] the end-to-end studies (witch-hat family, L¹ attainment
//! pipeline, Lᵖ sweeps, convergence fixtures), and [`io`] the CSV/JSON file
//! formats behind the `csf` command-line tool.

pub mod analysis;
pub mod estimates;
pub mod experiments;
pub mod io;
pub mod solver;
pub mod wedge;

pub use solver::{FlowTrace, Grid, GridFunction, InitialData};
pub use wedge::WedgeProfile;
