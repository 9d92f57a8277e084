//! Fixtures shared by the benchmarks.

use phasefront_core::tensor_reduction::{ElasticSystem, ElasticityTensor, SymMatrix};
use phasefront_core::{init_from_profile, solve_profile, DoubleWell, ModelKind, SimParams, SimState};

/// Isotropic 3D system with a uniaxial transformation strain.
pub fn uniaxial_system() -> ElasticSystem {
    ElasticSystem::new(
        ElasticityTensor::isotropic(3, 1.0, 1.0),
        SymMatrix::zeros(3),
        SymMatrix::diag(&[1.0, 0.0, 0.0]),
    )
    .expect("dimensions agree")
}

/// Quartic-well profile state on `[-l, l]`.
pub fn profile_state(model: ModelKind, mu: f64, l: f64, dx: f64) -> SimState {
    let well = DoubleWell::quartic();
    let profile = solve_profile(&well, l, 1e-3, model.conservation()).expect("equal wells");
    init_from_profile(&profile, &well, &SimParams::new(model, mu, l, dx)).expect("valid grid")
}
