//! Numerical tolerances used across the crate, in one place.
//!
//! Every threshold below is load-bearing for some classification or test;
//! none of them are ad-hoc per call site.

/// Components of an equilibrium above this (negative) value count as zero:
/// the closed forms are exact, so anything beyond a few ulps of cancellation
/// is a genuinely negative, biologically infeasible component.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Relative residual bound for closed-form equilibria: `‖rhs‖` must stay
/// below `EQ_RESIDUAL_REL * max(1, ‖state‖)` when the formulas are evaluated
/// at consistent parameters.
pub const EQ_RESIDUAL_REL: f64 = 1e-10;

/// Two distinct equilibria closer than this in state-space norm are reported
/// as a collision (a bifurcation is in progress); they are never merged.
pub const COLLISION_TOL: f64 = 1e-8;

/// Trajectories may undershoot zero by integration truncation. Components in
/// `(-ORTHANT_TOL, 0)` are clamped to zero; anything below aborts the run as
/// an integrator failure, since the exact flow preserves the orthant.
pub const ORTHANT_TOL: f64 = 1e-9;

/// `|max Re λ|` below this classifies an equilibrium as marginal. Chosen
/// well above the Schur backward error on a 7x7 and well below the spacing
/// of eigenvalue crossings along parameter sweeps.
pub const MARGINAL_TOL: f64 = 1e-7;

/// A zero crossing of an eigenvalue pair counts as a Hopf point only when
/// `|Im λ|` exceeds this, separating it from transcritical zero crossings.
pub const HOPF_IM_TOL: f64 = 1e-6;

/// Parameter tolerance for bisecting Hopf crossings found by scanning.
pub const HOPF_BISECT_TOL: f64 = 1e-8;

/// Parameter tolerance for closed-form curve roots and intersections.
pub const CURVE_ROOT_TOL: f64 = 1e-10;

/// Quadratic leading coefficients below this trigger the linear reduction of
/// the coexistence quadratic.
pub const QUADRATIC_DEGENERATE_TOL: f64 = 1e-12;

/// Discriminants within this of zero are treated as a double root (a fold of
/// the coexistence pair).
pub const DISCRIMINANT_FOLD_TOL: f64 = 1e-12;

/// `‖rhs‖` at the end of a run below this counts as settled on an
/// equilibrium (attractor classification, step 1).
pub const ATTRACTOR_RESIDUAL_TOL: f64 = 1e-8;

/// Maximum state-space distance between a settled trajectory endpoint and
/// the equilibrium it is identified with.
pub const ATTRACTOR_MATCH_TOL: f64 = 1e-5;

/// Successive norm maxima must agree to this fraction of the orbit amplitude
/// to count as periodic. Loose enough to absorb sampling error on a 0.1
/// grid, tight enough to tell a period-1 orbit from a period-doubled one.
pub const PEAK_EQUALITY_REL_TOL: f64 = 1e-4;

/// Minimum peak-to-peak amplitude of the norm signal for an orbit to be
/// periodic rather than a slowly converging spiral.
pub const PO_MIN_AMPLITUDE: f64 = 1e-6;

/// Largest Lyapunov exponents above this flag a chaos candidate.
pub const CHAOS_LLE_TOL: f64 = 1e-3;
