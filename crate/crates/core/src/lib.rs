//! Numerical laboratory for atomic N-electron wavefunctions and their
//! one-electron densities.
//!
//! Units follow `H = -Δ + V` with no factor ½ on the kinetic term. Energies
//! are therefore half their Hartree values: the hydrogen-like ground state
//! sits at `-Z²/4`, and the helium product trial at `-1.4238` instead of
//! `-2.8477`. Spherical integrals use the unnormalised measure on the unit
//! sphere, total mass `4π`.

pub mod ansatz;
pub mod density;
pub mod error;
pub mod integration;
pub mod model;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
pub use integration::{EstimateWithError, FdScheme, McConfig, RadialGrid, SphereRule};
pub use model::{Configuration, Nucleus, SystemSpec, Vec3, WavefunctionModel};
