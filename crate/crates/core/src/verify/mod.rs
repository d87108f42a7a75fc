//! Numerical checks of identities that hold for exact eigenfunctions, each
//! returning a report with measured and expected values, tolerances and a
//! digest of its inputs.

mod pointwise;
mod profile_checks;
mod report;

pub use pointwise::{
    ball_integral, check_delta_f, check_h_bounds, gradient_ratio, gradient_ratio_refinement, gradient_ratio_scan,
    h_sample_points, halton_ball, holder_exponent, holder_pair_geometry, holder_panel, interpolate_rho,
    log_separations, HolderExpectation, HolderFit, BALL_SAMPLES,
};
pub use profile_checks::{
    check_curvature, check_cusp, check_pde_residual, check_t1_continuity, check_tail_monotonicity, PdeReference,
    PdeWindow,
};
pub use report::{
    CheckReport, Digest, Expectation, Outcome, ScanReport, ScanSummary, SuiteEntry, SuiteReport, Tolerances,
};
