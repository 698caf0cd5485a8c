//! Indirect Hamiltonian tomography from gateway records.
//!
//! Gateway records are turned into [`SpectralData`] (simulated exactly or
//! estimated by Fourier analysis), and the infection order of the gateway
//! then recovers every coupling and field.

mod fourier;
mod quadratic;
mod reconstruct;
mod sampling;
mod signal;
mod spectral;

pub use fourier::{extract_spectrum, resolution, FourierOptions};
pub use quadratic::{reconstruct_quadratic_chain, QuadraticPrior, LADDER_MIN_ASYMMETRY};
pub use reconstruct::{
    check_nondegenerate, estimate_sector, parameters_from_sector, reconstruct_couplings, reconstruct_fields,
    CouplingEstimate, FieldEstimate, ReconstructionOptions, ReconstructionResult, SectorEstimate,
};
pub use sampling::{quadratic_sampling_requirements, sampling_requirements, SamplingOptions, SamplingPlan};
pub use signal::{add_noise, simulate_quadratic_signal, simulate_signal, NoiseModel, TimeSeries};
pub use spectral::{
    exact_quadratic_spectral_data, exact_spectral_data, spectral_data_of_matrix, SpectralData, GAUGE_TOL,
};
