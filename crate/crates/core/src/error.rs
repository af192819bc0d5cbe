use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid, tolerance or size parameter is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// A coefficient table does not match the requested dimension/mode.
    #[error("shape error: {0}")]
    Shape(String),

    /// The ODE integrator failed (step size underflow) at radius `radius`.
    #[error("integrator failure at r = {radius}: {reason}")]
    Integrator { radius: f64, reason: String },

    /// The shooting slope sweep exhausted its range without bracketing the
    /// requested nodal count.
    #[error(
        "slope search failed for m = {target_zones}: swept [{slope_min:e}, {slope_max:e}] \
         with zero counts {zeros_min}..{zeros_max}"
    )]
    SlopeSearch {
        target_zones: usize,
        slope_min: f64,
        slope_max: f64,
        zeros_min: usize,
        zeros_max: usize,
    },

    /// An iteration failed to reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    /// A profile is identically zero (or below tolerance everywhere).
    #[error("degenerate profile: all samples below tolerance")]
    DegenerateProfile,

    /// No sign change of nu_1(p) + lambda_n was found on the sampled range.
    #[error("no sign change on [{p_min}, {p_max}] for lambda = {lambda}: {samples} samples, g in [{g_min:e}, {g_max:e}]")]
    BracketNotFound {
        p_min: f64,
        p_max: f64,
        lambda: f64,
        samples: usize,
        g_min: f64,
        g_max: f64,
    },

    /// The cone index is undefined at a degeneracy point.
    #[error("at degeneracy: |nu_1 + lambda_{sym_order}| = {value:e} below tolerance, index undefined")]
    AtDegeneracy { sym_order: u32, value: f64 },

    /// A crossing test was inconclusive at the given window half-width.
    #[error("ambiguous crossing for (i, j) = ({i}, {j}) at delta = {delta}: shrink the window")]
    AmbiguousCrossing { i: usize, j: u32, delta: f64 },

    /// Newton's method left its basin or stalled.
    #[error("Newton diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    /// A result contradicts an invariant the theory guarantees.
    #[error("inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_) | Error::Shape(_))
    }
}
