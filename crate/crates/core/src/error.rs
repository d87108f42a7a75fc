use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular configuration: {what} distance {distance:e} is below the floor {floor:e}")]
    Singular {
        what: String,
        distance: f64,
        floor: f64,
    },

    #[error("model describes {expected} electron(s) but the configuration has {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("|psi| = {value:e} is below the node floor; local quantities are undefined")]
    Node { value: f64 },

    #[error("exponent {exponent:.3} exceeds the cap {cap}")]
    ExponentCap { exponent: f64, cap: f64 },

    #[error("finite-difference stencil touches a singular point: {0}")]
    StencilSingular(String),

    #[error("finite-difference stencil leaves the domain: {0}")]
    StencilOutsideDomain(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("quadrature tail did not converge: tail contributes {tail:e} of {total:e}")]
    NonConvergentTail { tail: f64, total: f64 },

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("profiles are tabulated on different grids")]
    GridMismatch,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
