use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::SpectralData;
use crate::error::{Error, Refusal, Result};
use crate::infection::{closure_on, InfectionSequence};
use crate::linalg::cluster_levels;
use crate::network::{GatewaySet, SpinNetwork, Topology};

#[derive(Debug, Clone)]
pub struct ReconstructionOptions {
    /// Levels closer than this times the spectral spread count as degenerate.
    pub degeneracy_rel_tol: f64,
    /// Couplings whose normalization falls below this times the spread are
    /// treated as absent.
    pub vanishing_rel_tol: f64,
    /// Largest acceptable condition number of the field equations.
    pub max_field_condition: f64,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        ReconstructionOptions { degeneracy_rel_tol: 1e-9, vanishing_rel_tol: 1e-9, max_field_condition: 1e10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingEstimate {
    pub a: usize,
    pub b: usize,
    pub value: f64,
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldEstimate {
    pub node: usize,
    pub value: f64,
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub couplings: Vec<CouplingEstimate>,
    pub fields: Vec<FieldEstimate>,
    /// `⟨0|H|0⟩` implied by the estimates.
    pub e0: Option<f64>,
    pub field_condition: Option<f64>,
}

fn rel(value: f64, truth: f64) -> f64 {
    let err = (value - truth).abs();
    if truth == 0.0 {
        err
    } else {
        err / truth.abs()
    }
}

impl ReconstructionResult {
    /// Attaches ground truth; couplings absent from `truth` compare against 0.
    pub fn with_truth(mut self, truth: &SpinNetwork) -> Self {
        for c in &mut self.couplings {
            c.truth = Some(truth.coupling(c.a, c.b).unwrap_or(0.0));
        }
        for f in &mut self.fields {
            f.truth = truth.fields.get(f.node - 1).copied();
        }
        self
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.couplings
            .iter()
            .filter_map(|c| c.truth.map(|t| (c.value, t)))
            .chain(self.fields.iter().filter_map(|f| f.truth.map(|t| (f.value, t))))
    }

    pub fn max_abs_error(&self) -> Option<f64> {
        self.pairs().map(|(v, t)| (v - t).abs()).reduce(f64::max)
    }

    /// Relative to `|truth|`, or absolute where the truth is zero.
    pub fn max_rel_error(&self) -> Option<f64> {
        self.pairs().map(|(v, t)| rel(v, t)).reduce(f64::max)
    }

    /// The estimates as a network on the given topology.
    pub fn to_network(&self, template: &SpinNetwork) -> SpinNetwork {
        let mut net = template.clone();
        for c in &mut net.couplings {
            if let Some(e) = self.couplings.iter().find(|e| e.a == c.key().0 && e.b == c.key().1) {
                c.strength = e.value;
            }
        }
        for f in &self.fields {
            net.fields[f.node - 1] = f.value;
        }
        net
    }
}

/// Sector matrix and full overlap table estimated from gateway data, in the
/// eigenvalue frame of the data.
#[derive(Debug, Clone)]
pub struct SectorEstimate {
    pub h: DMatrix<f64>,
    /// Row `m − 1` holds `⟨m|E_j⟩`.
    pub overlaps: DMatrix<Complex64>,
    pub sequence: InfectionSequence,
}

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    (hi - lo).max(values.iter().map(|x| x.abs()).fold(0.0, f64::max)).max(f64::MIN_POSITIVE)
}

/// Refuses when two levels are closer than `rel_tol` times the spectral scale.
pub fn check_nondegenerate(eigenvalues: &[f64], rel_tol: f64) -> Result<()> {
    let tol = rel_tol * spread(eigenvalues);
    let clusters = cluster_levels(eigenvalues, tol);
    let levels: Vec<(usize, usize)> =
        clusters.iter().filter(|c| c.len() > 1).map(|c| (c[0], *c.last().unwrap())).collect();
    if levels.is_empty() {
        Ok(())
    } else {
        Err(Refusal::DegenerateSpectrum { levels, tolerance: tol }.into())
    }
}

fn weighted_inner(e: &[f64], u: &[Complex64], v: &[Complex64]) -> Complex64 {
    e.iter().zip(u).zip(v).map(|((e, a), b)| a * b.conj() * *e).sum()
}

/// Walks the infection order, recovering one coupling and one row of
/// overlaps per step from `Σ_m H_km ⟨m|E_j⟩ = E_j ⟨k|E_j⟩`.
pub fn estimate_sector(
    topology: &Topology,
    gateway: &GatewaySet,
    sd: &SpectralData,
    opts: &ReconstructionOptions,
) -> Result<SectorEstimate> {
    let n = topology.n;
    if sd.len() != n {
        return Err(Error::DimensionMismatch(format!("{} levels for a {n}-node sector", sd.len())));
    }
    for &c in gateway.nodes() {
        if c > n {
            return Err(Error::GatewayOutOfRange(c));
        }
        if !sd.overlaps.contains_key(&c) {
            return Err(Error::InvalidArgument(format!("spectral data has no overlaps for gateway node {c}")));
        }
    }
    let infection = closure_on(&topology.adjacency(), n, gateway.nodes());
    if !infection.covers(n) {
        return Err(Refusal::NotInfecting.into());
    }
    check_nondegenerate(&sd.eigenvalues, opts.degeneracy_rel_tol)?;
    let weights: Vec<f64> = (0..n).map(|j| gateway.nodes().iter().map(|c| sd.overlaps[c][j].norm_sqr()).sum()).collect();
    if let Some(j) = weights.iter().position(|&w| w < 1e-20) {
        return Err(Refusal::DarkState { level: j }.into());
    }

    let e = &sd.eigenvalues;
    let scale = spread(e);
    let mut u: Vec<Option<Vec<Complex64>>> = vec![None; n + 1];
    for &c in gateway.nodes() {
        u[c] = Some(sd.overlaps[&c].clone());
    }
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut fixed = DMatrix::<bool>::from_element(n, n, false);
    for (step, &(k, l)) in infection.sequence.steps.iter().enumerate() {
        let known = &infection.sequence.sets[step];
        let uk = u[k].clone().expect("infector is known");
        let mut r: Vec<Complex64> = uk.iter().zip(e).map(|(a, e)| a * *e).collect();
        for &m in known {
            let um = u[m].as_ref().expect("known node");
            let hkm = if fixed[(k - 1, m - 1)] { Complex64::from(h[(k - 1, m - 1)]) } else { weighted_inner(e, &uk, um) };
            r.iter_mut().zip(um).for_each(|(r, x)| *r -= hkm * x);
        }
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= opts.vanishing_rel_tol * scale {
            return Err(Refusal::VanishingCoupling { a: k.min(l), b: k.max(l), magnitude: norm / 2.0 }.into());
        }
        let idx = topology
            .edge_index(k, l)
            .ok_or_else(|| Error::Inconsistent(format!("infection step {k}->{l} is not an edge")))?;
        let hkl = topology.signs[idx].value() * norm;
        h[(k - 1, l - 1)] = hkl;
        h[(l - 1, k - 1)] = hkl;
        fixed[(k - 1, l - 1)] = true;
        fixed[(l - 1, k - 1)] = true;
        u[l] = Some(r.into_iter().map(|z| z / hkl).collect());
    }

    let rows: Vec<Vec<Complex64>> = u.into_iter().skip(1).map(|v| v.expect("all nodes infected")).collect();
    for a in 0..n {
        for b in a..n {
            if !fixed[(a, b)] {
                let v = weighted_inner(e, &rows[a], &rows[b]).re;
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
    }
    let overlaps = DMatrix::from_fn(n, n, |m, j| rows[m][j]);
    Ok(SectorEstimate { h, overlaps, sequence: infection.sequence })
}

/// Solves `d_m = E_0 − 2ΔΣ_{n∈N(m)} c_mn − 2b_m` for every node together with
/// either the known vacuum energy or `E_0 = ΔΣ c + Σ b`. Returns
/// `(b, E_0 in the data frame, condition number)`.
pub fn reconstruct_fields(
    topology: &Topology,
    couplings: &[f64],
    diagonal: &[f64],
    e0_offset: Option<f64>,
    max_condition: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let n = topology.n;
    if couplings.len() != topology.edges.len() || diagonal.len() != n {
        return Err(Error::DimensionMismatch("couplings or diagonal do not match the topology".into()));
    }
    let mut neighbour_sum = vec![0.0; n];
    for (&(a, b), &c) in topology.edges.iter().zip(couplings) {
        neighbour_sum[a - 1] += c;
        neighbour_sum[b - 1] += c;
    }
    let total: f64 = couplings.iter().sum();
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for m in 0..n {
        a[(m, m)] = 2.0;
        a[(m, n)] = -1.0;
        rhs[m] = -2.0 * topology.delta * neighbour_sum[m] - diagonal[m];
    }
    match e0_offset {
        Some(e0) => {
            a[(n, n)] = 1.0;
            rhs[n] = e0;
        }
        None => {
            for m in 0..n {
                a[(n, m)] = -1.0;
            }
            a[(n, n)] = 1.0;
            rhs[n] = topology.delta * total;
        }
    }
    let svd = a.clone().svd(true, true);
    let (smax, smin) = svd.singular_values.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > max_condition {
        return Err(Refusal::SingularFieldSystem { condition }.into());
    }
    let x = a.lu().solve(&rhs).ok_or(Refusal::SingularFieldSystem { condition })?;
    Ok((x.rows(0, n).iter().copied().collect(), x[n], condition))
}

/// Couplings and fields from an estimated sector matrix.
pub fn parameters_from_sector(
    topology: &Topology,
    h: &DMatrix<f64>,
    e0_offset: Option<f64>,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    let couplings: Vec<f64> = topology.edges.iter().map(|&(a, b)| h[(a - 1, b - 1)] / 2.0).collect();
    let diagonal: Vec<f64> = (0..topology.n).map(|m| h[(m, m)]).collect();
    let (fields, _, condition) = reconstruct_fields(topology, &couplings, &diagonal, e0_offset, opts.max_field_condition)?;
    let e0 = topology.delta * couplings.iter().sum::<f64>() + fields.iter().sum::<f64>();
    Ok(ReconstructionResult {
        couplings: topology
            .edges
            .iter()
            .zip(&couplings)
            .map(|(&(a, b), &value)| CouplingEstimate { a, b, value, truth: None })
            .collect(),
        fields: fields.iter().enumerate().map(|(i, &value)| FieldEstimate { node: i + 1, value, truth: None }).collect(),
        e0: Some(e0),
        field_condition: Some(condition),
    })
}

/// All couplings and fields of an excitation-preserving network from
/// gateway spectral data.
pub fn reconstruct_couplings(
    topology: &Topology,
    gateway: &GatewaySet,
    sd: &SpectralData,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    let sector = estimate_sector(topology, gateway, sd, opts)?;
    parameters_from_sector(topology, &sector.h, sd.e0_offset, opts)
}
