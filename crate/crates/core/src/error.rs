use thiserror::Error;

/// Errors shared by the solver modules.
#[derive(Debug, Error)]
pub enum LabError {
    /// The requested number of shooting zeros was not reached before rho_max.
    #[error("requested {wanted} zeros but only {found} found before rho = exp({ln_rho_max})")]
    MaxSpanExceeded {
        wanted: usize,
        found: usize,
        ln_rho_max: f64,
    },

    /// The adaptive integrator underflowed its step size.
    #[error("adaptive step size underflow at t = {t} (dt = {dt})")]
    StepFailure { t: f64, dt: f64 },

    /// A rescaled window does not fit inside the domain.
    #[error("rescaled window exceeds domain: s_max * mu = {window} >= {limit}")]
    WindowExceedsDomain { window: f64, limit: f64 },

    /// A sup over an empty region was requested (R mu_p^+ too large).
    #[error("empty region: R * mu_p^+ = {r_mu} >= {limit}")]
    EmptyRegion { r_mu: f64, limit: f64 },

    /// Inverse iteration failed to converge.
    #[error("eigenvalue solve diverged: {0}")]
    EigenSolveDiverged(String),

    /// The computed ground state is not sign-definite; grid too coarse.
    #[error("ground state changed sign beyond roundoff (min = {min_value}); refine the grid")]
    NonNegativeGroundState { min_value: f64 },

    /// A sweep parameter list was empty.
    #[error("empty sweep: {0}")]
    EmptySweep(&'static str),

    /// Invalid configuration value.
    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: &'static str, message: String },

    /// Time stepping collapsed without sup-norm growth.
    #[error("step underflow without growth at t = {t} (dt = {dt}, sup = {sup})")]
    StepUnderflowWithoutGrowth { t: f64, dt: f64, sup: f64 },

    /// Newton projection onto the discrete steady state failed.
    #[error("stationary projection failed: {0}")]
    ProjectionFailed(String),

    /// Cache file malformed or checksum mismatch.
    #[error("cache corrupt: {0}")]
    CacheCorrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
