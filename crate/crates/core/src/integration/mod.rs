//! Numeric infrastructure: sphere and radial quadrature, the reduced
//! two-electron integral, Metropolis sampling, finite differences.

mod estimate;
mod fd;
mod fit;
mod metropolis;
mod radial;
mod reduced;
mod sphere;

pub use estimate::{EstimateMethod, EstimateWithError};
pub use fd::{
    fd_derivative, fd_derivative_forward, fd_derivative_in, fd_gradient, fd_laplacian,
    fd_radial_laplacian, fd_second_derivative, FdScheme,
};
pub use fit::{fornberg_weights, lagrange_extrapolation_weights, polyfit, PolyFit};
pub use metropolis::{
    chain_means, importance_integrate, importance_integrate_r3, mc_expectation, mc_mean, metropolis_sample, ChainSamples,
    McConfig,
};
pub use radial::RadialGrid;
pub use reduced::{
    reduced_two_electron_integral, reduced_two_electron_integral_vec, ReducedPoint,
    ReducedQuadrature,
};
pub use sphere::{gauss_legendre, sphere_average, SphereRule};
