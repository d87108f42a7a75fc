//! The physical system and the evaluable wavefunctions built on it.

mod system;
mod wavefunction;

pub use system::{potential_v, Configuration, Nucleus, SystemSpec, Vec3, DEFAULT_SINGULAR_FLOOR};
pub use wavefunction::{
    evaluate_grad_psi, evaluate_laplacian_psi, evaluate_psi, local_energy, EigenEstimate,
    JastrowPrefactor, ModelKind, PsiDerivs, WavefunctionModel, NODE_FLOOR,
};
