use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the equations of state.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Dimensional conversion requested without the constants `a`, `b`, `R`.
    #[error("dimensional constants a, b, R are required for unit conversion")]
    MissingConstants,

    /// The requested temperature has no two-phase solution (T >= T_c).
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("{what} failed to converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("entropy level s0 = {s0} does not exceed the invertibility threshold {threshold}")]
    NonInvertible { s0: f64, threshold: f64 },

    #[error("adaptive quadrature exceeded its refinement limit on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    /// The superposed potential is at or above the supremum of Q.
    #[error("potential value {target} is not below the supremum {sup}")]
    OutOfRange { target: f64, sup: f64 },

    #[error("temperature {temperature} is below the coexistence table minimum {t_min}")]
    OutOfTable { temperature: f64, t_min: f64 },

    #[error("field evaluated at source location {0:?}")]
    SingularPoint([f64; 3]),
}
