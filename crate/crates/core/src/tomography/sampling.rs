use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{min_gap, spectral_radius, sym_eigen};
use crate::network::{build_m_matrix, build_single_excitation_matrix, vacuum_energy, QuadraticSpec, SpinNetwork};

#[derive(Debug, Clone)]
pub struct SamplingOptions {
    /// Sampling rate as a multiple of `f_min`.
    pub oversample: f64,
    /// Record length as a multiple of `T_min`.
    pub resolution_margin: f64,
    /// Gaps below this times the spectral radius count as degenerate.
    pub degeneracy_rel_tol: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions { oversample: 2.0, resolution_margin: 40.0, degeneracy_rel_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingPlan {
    /// Gershgorin bound on `|E_j − E_0|`.
    pub e_max: f64,
    /// `2 f_min = E_max`.
    pub f_min: f64,
    pub min_gap: f64,
    /// `1/(ΔE)_min`; infinite for a degenerate spectrum.
    pub t_min: f64,
    pub dt: f64,
    /// Recommended number of samples; `None` when degenerate.
    pub steps: Option<usize>,
    pub degenerate: bool,
}

impl SamplingPlan {
    pub fn duration(&self) -> Option<f64> {
        self.steps.map(|k| (k - 1) as f64 * self.dt)
    }
}

fn gershgorin(h: &DMatrix<f64>, shift: f64) -> f64 {
    (0..h.nrows())
        .map(|i| (h[(i, i)] - shift).abs() + (0..h.ncols()).filter(|&j| j != i).map(|j| h[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn plan(h: &DMatrix<f64>, shift: f64, opts: &SamplingOptions) -> SamplingPlan {
    let bound = gershgorin(h, shift);
    let e_max = if bound > 0.0 { bound } else { 1.0 };
    let f_min = e_max / 2.0;
    let dt = 1.0 / (opts.oversample * f_min);
    let values = sym_eigen(h).values;
    let gap = if values.len() > 1 { min_gap(&values) } else { f64::INFINITY };
    let degenerate = values.len() > 1 && gap <= opts.degeneracy_rel_tol * spectral_radius(&values).max(f64::MIN_POSITIVE);
    let t_min = if degenerate {
        f64::INFINITY
    } else if gap.is_finite() {
        1.0 / gap
    } else {
        0.0
    };
    let steps = (!degenerate).then(|| (opts.resolution_margin * t_min / dt).ceil() as usize + 1).map(|k| k.max(2));
    SamplingPlan { e_max, f_min, min_gap: gap, t_min, dt, steps, degenerate }
}

/// Nyquist and resolution requirements for single-excitation records.
pub fn sampling_requirements(net: &SpinNetwork, opts: &SamplingOptions) -> Result<SamplingPlan> {
    let h = build_single_excitation_matrix(net)?;
    Ok(plan(&h, vacuum_energy(net), opts))
}

/// The same for records on the dual-rail graph of `M`.
pub fn quadratic_sampling_requirements(spec: &QuadraticSpec, opts: &SamplingOptions) -> Result<SamplingPlan> {
    Ok(plan(&build_m_matrix(spec)?, 0.0, opts))
}
