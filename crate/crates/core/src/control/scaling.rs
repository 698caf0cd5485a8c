use rayon::prelude::*;

use super::grape::{grape_optimize, ControlProblem, GrapeOptions, TargetGate};
use super::ladder::{control_matrix, hopping_matrix};
use crate::error::{Error, Result};

/// Which gate each chain length is asked to realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingTarget {
    /// `exp(−iπh_{1,N}/2)`.
    PhysicalEnd,
    /// The farthest logical qubit `N/2` moved to the control end.
    LogicalEnd,
}

impl ScalingTarget {
    pub fn gate(self, n: usize) -> Result<TargetGate> {
        match self {
            ScalingTarget::PhysicalEnd => TargetGate::swap(n, 1, n),
            ScalingTarget::LogicalEnd => TargetGate::logical_swap(n, n / 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub duration: f64,
    pub segments: usize,
    pub infidelity: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One GRAPE run per chain length on a uniform chain with unit couplings and
/// `T_N = N²`. Runs are independent and execute in parallel; rows come back in
/// the order of `ns`.
pub fn scaling_study(ns: &[usize], target: ScalingTarget, opts: &GrapeOptions) -> Result<Vec<ScalingRow>> {
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("chain length {n} is too short to steer")));
    }
    ns.par_iter()
        .map(|&n| {
            let problem = ControlProblem::new(hopping_matrix(&vec![1.0; n - 1]), control_matrix(n), target.gate(n)?)?;
            let duration = (n * n) as f64;
            let out = grape_optimize(&problem, duration, opts)?;
            Ok(ScalingRow {
                n,
                duration,
                segments: out.schedule.segments(),
                infidelity: out.schedule.infidelity.unwrap_or(1.0),
                iterations: out.iterations,
                converged: out.converged,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_range_gives_empty_table() {
        assert!(scaling_study(&[], ScalingTarget::LogicalEnd, &GrapeOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn loose_threshold_is_met_at_iteration_zero() {
        let opts = GrapeOptions { epsilon: 1.0, ..Default::default() };
        let rows = scaling_study(&[4, 6], ScalingTarget::LogicalEnd, &opts).unwrap();
        assert_eq!(rows.iter().map(|r| (r.n, r.iterations, r.converged)).collect::<Vec<_>>(), vec![(4, 0, true), (6, 0, true)]);
        assert_eq!(rows[1].segments, 360);
    }

    #[test]
    fn logical_target_needs_two_logical_qubits() {
        assert!(scaling_study(&[3], ScalingTarget::LogicalEnd, &GrapeOptions::default()).is_err());
        assert!(scaling_study(&[1], ScalingTarget::PhysicalEnd, &GrapeOptions::default()).is_err());
    }

    #[test]
    fn small_chains_reach_the_threshold() {
        let rows = scaling_study(&[4, 6], ScalingTarget::LogicalEnd, &GrapeOptions { seed: 1, ..Default::default() }).unwrap();
        for r in rows {
            assert!(r.converged && r.infidelity <= 1e-4, "{r:?}");
        }
    }
}
