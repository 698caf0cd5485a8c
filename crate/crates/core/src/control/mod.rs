//! Indirect control of a free-fermion chain through a field on its first
//! site.

mod grape;
mod ladder;
pub mod many_body;
mod scaling;

pub use grape::{
    gate_fidelity, grape_optimize, hermitian_exp, propagate, subspace_fidelity, Ascent, ControlProblem, GrapeOptions,
    GrapeOutcome, PulseSchedule, TargetGate,
};
pub use ladder::{closed_form, control_matrix, generator_ladder, hopping_matrix, ladder_sign, GeneratorLadder};
pub use scaling::{scaling_study, ScalingRow, ScalingTarget};
