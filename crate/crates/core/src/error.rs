use core::fmt;

/// Result alias for the core crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// The total kernel `φ_T + φ̄` would be negative somewhere.
    Admissibility {
        /// Offending perturbation amplitude.
        eps_bar: f64,
    },
    /// An argument lies outside the domain of the operation.
    Domain(&'static str),
    /// A tabulated perturbation is malformed.
    Table(&'static str),
    /// The requested instability tongue has no positive-D segment.
    EmptyTongue {
        /// Tongue index (1-based).
        tongue: usize,
    },
    /// The diffusivity is at or above the bifurcation value.
    Supercritical {
        /// Requested diffusivity.
        d: f64,
        /// Neutral-curve value at the requested wavelength.
        d0: f64,
    },
    /// A root bracket could not be established.
    Bracket(&'static str),
    /// An iterative method failed to converge.
    Convergence(&'static str),
    /// The converged eigenvector changed sign.
    Positivity,
    /// Parameters outside the validity range of an asymptotic regime.
    Range(&'static str),
    /// A checked inequality failed.
    BoundViolation {
        /// Measured value.
        value: f64,
        /// Bound it should not exceed.
        bound: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Admissibility { eps_bar } => write!(
                f,
                "inadmissible kernel: amplitude {eps_bar} makes the kernel negative"
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Table(msg) => write!(f, "bad perturbation table: {msg}"),
            Error::EmptyTongue { tongue } => write!(f, "tongue {tongue} is empty"),
            Error::Supercritical { d, d0 } => {
                write!(f, "D = {d} is not below the neutral value D0 = {d0}")
            }
            Error::Bracket(msg) => write!(f, "no root bracket: {msg}"),
            Error::Convergence(msg) => write!(f, "no convergence: {msg}"),
            Error::Positivity => write!(f, "eigenvector is not of one sign"),
            Error::Range(msg) => write!(f, "outside regime validity: {msg}"),
            Error::BoundViolation { value, bound } => {
                write!(f, "bound violated: {value} > {bound}")
            }
        }
    }
}

impl core::error::Error for Error {}
