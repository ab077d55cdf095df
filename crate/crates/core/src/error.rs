use thiserror::Error;

/// Everything that can go wrong inside the kernel, the oracle, the quadrature
/// and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate ellipse: semi-axes a={a}, b={b} must satisfy a >= b > 0")]
    DegenerateShape { a: f64, b: f64 },

    #[error("zero-length vector where a direction was required")]
    ZeroVector,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("no physical root of the contact quartic in [1, {upper}] (ferrari q = {ferrari}, in-bracket oracle roots = {in_bracket})")]
    NoPhysicalRoot {
        upper: f64,
        ferrari: f64,
        in_bracket: usize,
    },

    #[error("centers coincide (|r12| = {0:e}); ellipses always overlap")]
    ConcentricCenters(f64),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("adaptive quadrature hit its recursion limit before reaching tolerance {tol:e}")]
    AdaptiveLimitReached { tol: f64 },

    #[error("packing infeasible: {0}")]
    PackingInfeasible(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
