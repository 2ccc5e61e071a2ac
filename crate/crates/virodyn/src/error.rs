use thiserror::Error;

/// Errors produced by model construction, root finding, eigenanalysis, and
/// time integration.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter set violates the model assumptions.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A state or configuration value is out of range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A `key=value` parameter file could not be parsed.
    #[error("parameter file error: {0}")]
    Config(String),

    /// The QR/Schur iteration did not converge on a Jacobian.
    #[error("eigenvalue solver failed to converge")]
    EigenFailure,

    /// A closed-form critical point escaped to infinity (a pole of its
    /// formula), so it has no spectrum or distance to anything.
    #[error("{name} has no finite critical point at these rates (formula pole)")]
    EquilibriumAtInfinity { name: String },

    /// A bracketed root search found no sign change.
    #[error("no sign change of {what} in [{lo}, {hi}]")]
    NoBracket { what: String, lo: f64, hi: f64 },

    /// A bifurcation curve is not defined at the requested rate.
    #[error("curve {label} undefined at alpha = {alpha} (pole)")]
    CurveUndefined { label: String, alpha: f64 },

    /// All coefficients of the coexistence quadratic vanished.
    #[error("degenerate coexistence quadratic: all coefficients are zero")]
    DegenerateQuadratic,

    /// An intersection query was posed with the same curve on both sides.
    #[error("degenerate intersection: {0} with itself")]
    DegenerateIntersection(String),

    /// Adaptive step control shrank the step below representable size.
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// A trajectory left the nonnegative orthant beyond tolerance, which the
    /// exact flow cannot do; treated as an integrator failure.
    #[error("state left the nonnegative orthant at t = {t} (min component {min:e})")]
    NegativeState { t: f64, min: f64 },

    /// The tangent vector collapsed during Lyapunov accumulation.
    #[error("tangent vector vanished at t = {t}")]
    TangentCollapse { t: f64 },
}

impl Error {
    /// True for errors caused by bad user input rather than a numerical
    /// failure. The command-line interface maps these to exit code 1 and
    /// everything else to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_) | Error::InvalidInput(_) | Error::Config(_)
        )
    }
}
