//! Configurational-force phase-field models in one space dimension.
//!
//! Modules, in dependency order: [`tensor_reduction`] collapses the
//! elastic coupling to a scalar forcing, [`potential`] certifies a
//! double-well potential, [`profile`] builds the connecting waves,
//! [`pde_sim`] integrates the time-dependent equations, and [`analysis`]
//! measures what the runs produce.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod fit;
pub mod pde_sim;
pub mod poly;
pub mod potential;
pub mod profile;
pub mod tensor_reduction;

pub use fit::{line_fit, LineFit};
pub use pde_sim::{
    init_from_profile, init_random, run, step, BoundaryCondition, ModelKind, SimError, SimParams,
    SimState, Trajectory,
};
pub use potential::{diagnostics, DoubleWell, PotentialError, PotentialSpec, WellDiagnostics};
pub use profile::{
    decay_rates, existence_gate, residual_3_15, solve_profile, wave_speed, Conservation, DecayFit,
    GateReport, ProfileError, WaveProfile,
};
pub use tensor_reduction::{
    reduce, validate, ElasticSystem, ElasticityTensor, ReducedCoefficients, ReductionError,
    SymMatrix, ValidationReport,
};
