use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("torus {l}x{m} is too small, both extents must be at least {min}")]
    TorusTooSmall { l: usize, m: usize, min: usize },

    #[error("{what}: size {size} exceeds the bound {bound}")]
    SizeExceeded {
        what: &'static str,
        size: usize,
        bound: usize,
    },

    #[error("quadrature did not converge after {doublings} doublings (last estimates {previous:e} and {last:e})")]
    QuadratureNotConverged {
        doublings: u32,
        previous: f64,
        last: f64,
    },

    #[error("power iteration did not converge within {iterations} iterations")]
    PowerIterationStalled { iterations: usize },

    #[error("determinant factor {value:e} is negative beyond tolerance")]
    NegativeFactor { value: f64 },

    #[error("beta = {beta} lies within {radius:e} of the critical point {beta_c}")]
    NearCritical { beta: f64, beta_c: f64, radius: f64 },

    #[error("field h = {h} lies within {radius:e} of the quantum critical point")]
    NearQuantumCritical { h: f64, radius: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
