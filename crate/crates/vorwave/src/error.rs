use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A structured input failed validation; names the offending field.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: &'static str, message: String },

    /// Adaptive ODE integration underflowed its step size.
    #[error("integration failed at Y = {last_y}: {message}")]
    Integration { last_y: f64, message: String },

    /// A quadrature did not converge under panel refinement.
    #[error("quadrature failed to converge on [{a}, {b}] (last estimate {estimate})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    /// The requested evaluation lies outside the mathematically valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A generic numerical failure (non-convergence, loss of precision).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The requested branch has no finite depth at this parameter value.
    #[error("branch {branch} unavailable at s = {s}: {reason}")]
    BranchUnavailable { branch: String, s: f64, reason: String },

    /// A quantity needed for the computation degenerates (e.g. dh/ds = 0).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A computed census disagrees with the theoretical prediction.
    #[error("classification mismatch: {0}")]
    Classification(String),

    /// A bracketing or minimization search failed to locate its target.
    #[error("search failed: {0}")]
    Search(String),

    /// The shooting solution is too close to a Dirichlet eigenvalue.
    #[error("pole proximity at tau = {tau}")]
    PoleProximity { tau: f64 },

    /// Wave amplitude outside the validity range of the linearization.
    #[error("amplitude {t} too large for depth {h}")]
    Amplitude { t: f64, h: f64 },

    /// Continuation lost its root between steps.
    #[error("continuation lost the root near s = {s}: {trace}")]
    Continuation { s: f64, trace: String },

    /// Eigenvalue count from scanning disagrees with the oscillation count.
    #[error("eigenvalue census mismatch: {0}")]
    EigenvalueCensus(String),

    /// An internal cross-check between two computation routes failed.
    #[error("consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
