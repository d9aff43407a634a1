use thiserror::Error;

/// Errors from the steady-state, continuation and evolution solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] nlkpp_core::Error),
    #[error("grid: {0}")]
    Grid(String),
    #[error("max W = {max_w:.3e} exceeds the overflow guard")]
    OverflowGuard { max_w: f64 },
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("converged to a deflated root (distance {distance:.3e})")]
    ConvergedToDeflated { distance: f64 },
    #[error("continuation step fell below {min_step:.1e} at D = {d:.6e}")]
    StepUnderflow { min_step: f64, d: f64 },
    #[error("eigenvalue computation failed: {0}")]
    EigFailure(String),
    #[error("no fold found down to D = {d_floor:.3e}")]
    NoFoldFound { d_floor: f64 },
    #[error("solution blew up: max u = {max_u:.3e} at t = {t:.6e}")]
    BlowUp { max_u: f64, t: f64 },
    #[error("time step underflow at t = {t:.6e}")]
    TimeStepUnderflow { t: f64 },
    #[error("window not stationary: max |u_t| = {max_ut:.3e}")]
    NotStationary { max_ut: f64 },
    #[error("no u = 1/2 crossing")]
    NoFront,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 1 for configuration problems and invalid inputs,
    /// 2 for solver failures.
    pub fn exit_code(&self) -> i32 {
        use nlkpp_core::Error as Core;
        match self {
            Error::Config(_)
            | Error::Grid(_)
            | Error::Core(Core::Admissibility { .. } | Core::Domain(_) | Core::Table(_)) => 1,
            _ => 2,
        }
    }
}
