//! One-electron density `ρ`, its spherical average `ρ̃`, the source term `h`,
//! the kinetic density `t₁` and the decomposition of `ρ̃` near the nucleus.
//!
//! `ρ̃` obeys `-½Δρ̃ - (Z/r)ρ̃ + h̃ = 0` for an eigenfunction; for a trial
//! function the left side equals the spherical average of `∫ψ²(E_L - E) dx'`,
//! which every profile carries alongside `h̃`.

mod curvature;
mod point;
mod profile;

pub use curvature::{curvature_decomposition, CurvatureDecomposition, ETA_STENCIL};
pub use point::{
    h_point, observables_at, pair_decay_rate, rho_point, rho_point_mc, HPoint, PointObservables,
    APPROACH_RADIUS, MC_DENSITY_SAMPLES,
};
pub use profile::{
    csv, h_tilde_profile, radial_observables, rho_tilde_profile, t1_profile, DensityProfile,
    HComponents, HProfile, RadialObservables, T1Profile,
};
