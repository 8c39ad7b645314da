//! Complete-intersection varieties, the affine chart on the family of
//! `p`-planes, fiber solving, and the Veronese lift.
//!
//! Conventions used everywhere downstream:
//!
//! * variables are ordered `(x_1, …, x_n, y_1, …, y_p)`;
//! * the plane with chart coordinates `(a, b)` is cut out by
//!   `l_i = x_i − Σ_j a_i^j y_j − b_i`, `1 ≤ i ≤ n`;
//! * the Jacobian of a fiber point is the determinant of the derivative of
//!   `(f_1, …, f_p, l_1, …, l_n)` with respect to all `n + p` variables, in
//!   that row and column order.

mod chart;
mod domain;
mod solve;
mod variety;
mod veronese;

pub use chart::PlaneChart;
pub use domain::{DomainSpec, ParamSpace, Probe, SampleLayout, SamplingPlan};
pub use solve::{solve_fiber, solve_fiber_with, solve_section, Fiber, FiberPoint, FiberWarning, SolveOptions};
pub use variety::{plane_substitute, FiberDegree, ResidueData, VarietySpec};
pub use veronese::{hypersurface_family, lift_residue_data, veronese_lift, VeroneseLift};

use crate::numeric::NumericError;

/// Errors from the geometry layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid variety: {0}")]
    InvalidVariety(String),
    #[error("fiber degree dropped to {found} (expected {expected}): roots escaped to infinity")]
    DegreeDrop { expected: usize, found: usize },
    #[error("fiber has {found} points, more than the generic degree {expected}")]
    UnexpectedDegree { expected: usize, found: usize },
    #[error("unsupported system shape: {0}")]
    UnsupportedSystem(String),
    #[error("Veronese lift needs at most 3 ambient variables, got {0}")]
    UnsupportedDimension(usize),
    #[error("fiber point fails the equations (relative residual {residual:e})")]
    InaccuratePoint { residual: f64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}
