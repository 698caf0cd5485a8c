//! Degenerate levels of the single-excitation sector and gateway fields that
//! lift them.
//!
//! For a degenerate level with eigenvectors `|E^d⟩`, the gateway components
//! `φ_d` (rows `C` of the eigenvectors) are linearly independent whenever `C`
//! infects the network. Completing them to a basis gives an invertible `S`
//! with `S e_d = φ_d`, and `B = Σ_d ε_d (Sᵀ)⁻¹ e_d e_dᵀ S⁻¹` shifts the level
//! `d` by `ε_d` to first order while acting only on `C`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Refusal, Result};
use crate::infection::is_infecting;
use crate::linalg::{cluster_levels, spectral_radius, sym_eigen};
use crate::network::{build_single_excitation_matrix, vacuum_energy, GatewaySet, SpinNetwork, Topology};
use crate::pauli::{PauliSum, PauliWord};
use crate::tomography::{estimate_sector, parameters_from_sector, ReconstructionOptions, ReconstructionResult, SpectralData};

/// Levels closer than this times the spectral radius count as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-9;
/// Smallest singular value ratio accepted for the gateway components.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateLevel {
    pub energy: f64,
    /// Indices into the ascending spectrum.
    pub indices: Vec<usize>,
}

impl DegenerateLevel {
    pub fn multiplicity(&self) -> usize {
        self.indices.len()
    }
}

fn tolerance(values: &[f64]) -> f64 {
    DEGENERACY_REL_TOL * spectral_radius(values).max(f64::MIN_POSITIVE)
}

/// Degenerate groups of a real symmetric sector matrix.
pub fn degenerate_levels(h: &DMatrix<f64>) -> Vec<DegenerateLevel> {
    let values = sym_eigen(h).values;
    cluster_levels(&values, tolerance(&values))
        .into_iter()
        .filter(|g| g.len() > 1)
        .map(|indices| DegenerateLevel { energy: indices.iter().map(|&i| values[i]).sum::<f64>() / indices.len() as f64, indices })
        .collect()
}

pub fn detect_degeneracies(net: &SpinNetwork) -> Result<Vec<DegenerateLevel>> {
    Ok(degenerate_levels(&build_single_excitation_matrix(net)?))
}

/// Gateway restrictions of the eigenvectors of each degenerate level, as
/// `|C| × D` matrices.
pub fn gateway_components(h: &DMatrix<f64>, gateway: &GatewaySet) -> Vec<DMatrix<f64>> {
    let eig = sym_eigen(h);
    cluster_levels(&eig.values, tolerance(&eig.values))
        .into_iter()
        .filter(|g| g.len() > 1)
        .map(|g| DMatrix::from_fn(gateway.len(), g.len(), |r, d| eig.vectors[(gateway.nodes()[r] - 1, g[d])]))
        .collect()
}

/// Ratio of smallest to largest singular value; zero when there are more
/// columns than rows.
pub fn independence(phi: &DMatrix<f64>) -> f64 {
    if phi.ncols() > phi.nrows() {
        return 0.0;
    }
    let sv = phi.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max > 0.0 { sv.min() / max } else { 0.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPlan {
    /// `δ` as a fraction of the smallest nonzero gap; level `d` of a group
    /// is shifted by `d·δ`.
    pub relative_spacing: f64,
    pub max_halvings: usize,
    /// `‖λB‖` closer than this (relative to the spectral radius) to an
    /// existing gap counts as a collision.
    pub collision_rel_tol: f64,
    pub max_rounds: usize,
}

impl Default for ShiftPlan {
    fn default() -> Self {
        ShiftPlan { relative_spacing: 0.1, max_halvings: 40, collision_rel_tol: 1e-6, max_rounds: 8 }
    }
}

/// A Hermitian operator on the single-excitation sector supported on the
/// gateway. It is real symmetric because the sector matrix is.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingOperator {
    pub gateway: GatewaySet,
    /// `N × N`, zero outside the gateway rows and columns.
    pub matrix: DMatrix<f64>,
    /// `ε_d` of every lifted group, in construction order.
    pub shifts: Vec<Vec<f64>>,
    /// `λ` of every lifted group.
    pub strengths: Vec<f64>,
}

impl LiftingOperator {
    pub fn zero(n: usize, gateway: GatewaySet) -> LiftingOperator {
        LiftingOperator { gateway, matrix: DMatrix::zeros(n, n), shifts: Vec::new(), strengths: Vec::new() }
    }

    /// `h·Σ_{c∈C} |c⟩⟨c|`.
    pub fn homogeneous_field(n: usize, gateway: GatewaySet, h: f64) -> LiftingOperator {
        let mut op = LiftingOperator::zero(n, gateway);
        for &c in op.gateway.nodes() {
            op.matrix[(c - 1, c - 1)] = h;
        }
        op
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|&x| x == 0.0)
    }

    /// The same operator on the full spin register:
    /// `Σ_{a<b} B_ab (X_aX_b + Y_aY_b)/2 + Σ_a B_aa (I − Z_a)/2`.
    pub fn to_pauli(&self) -> PauliSum {
        let n = self.n();
        let mut out = PauliSum::zero(n);
        let nodes = self.gateway.nodes();
        for (i, &a) in nodes.iter().enumerate() {
            let d = self.matrix[(a - 1, a - 1)];
            if d != 0.0 {
                out.add_term(PauliWord::IDENTITY, d / 2.0);
                out.add_term(PauliWord::site(a, 'Z'), -d / 2.0);
            }
            for &b in &nodes[i + 1..] {
                let v = self.matrix[(a - 1, b - 1)];
                if v != 0.0 {
                    for letter in ['X', 'Y'] {
                        let w = PauliWord::site(a, letter);
                        let (_, ab) = w.product(PauliWord::site(b, letter));
                        out.add_term(ab, v / 2.0);
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self, min_gap: f64) -> String {
        let nodes = self.gateway.nodes();
        let mut entries = Vec::new();
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i..] {
                let v = self.matrix[(a - 1, b - 1)];
                if v != 0.0 {
                    entries.push((a, b, v));
                }
            }
        }
        let file = LiftingFile {
            n: self.n(),
            gateway: nodes.to_vec(),
            entries,
            shifts: self.shifts.clone(),
            strengths: self.strengths.clone(),
            min_gap,
        };
        serde_json::to_string_pretty(&file).expect("lifting operator serializes")
    }
}

#[derive(Serialize)]
struct LiftingFile {
    n: usize,
    gateway: Vec<usize>,
    /// Upper triangle `(a, b, B_ab)`, nodes 1-based.
    entries: Vec<(usize, usize, f64)>,
    shifts: Vec<Vec<f64>>,
    strengths: Vec<f64>,
    min_gap: f64,
}

/// `S = [φ | orthonormal complement of span φ]`.
fn completion(phi: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, d) = phi.shape();
    let mut s = DMatrix::zeros(rows, rows);
    s.columns_mut(0, d).copy_from(phi);
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    let orth = |v: nalgebra::DVector<f64>, basis: &Vec<nalgebra::DVector<f64>>| {
        let mut v = v;
        for _ in 0..2 {
            for b in basis {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        v
    };
    for j in 0..d {
        let v = orth(phi.column(j).into_owned(), &basis);
        let norm = v.norm();
        basis.push(v / norm);
    }
    let mut col = d;
    for e in 0..rows {
        if col == rows {
            break;
        }
        let v = orth(nalgebra::DVector::from_fn(rows, |i, _| if i == e { 1.0 } else { 0.0 }), &basis);
        let norm = v.norm();
        if norm > 1e-6 {
            let v = v / norm;
            s.set_column(col, &v);
            basis.push(v);
            col += 1;
        }
    }
    s
}

/// `B = Σ_d ε_d (Sᵀ)⁻¹ e_d e_dᵀ S⁻¹` on the gateway block.
pub fn group_operator(phi: &DMatrix<f64>, shifts: &[f64]) -> Result<DMatrix<f64>> {
    let s = completion(phi);
    let inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Inconsistent("gateway components of a degenerate level are linearly dependent".into()))?;
    let mut b = DMatrix::zeros(s.nrows(), s.nrows());
    for (d, &eps) in shifts.iter().enumerate() {
        let row = inv.row(d);
        b += row.transpose() * row * eps;
    }
    Ok(b)
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn smallest_nonzero_gap(values: &[f64], tol: f64) -> Option<f64> {
    values.windows(2).map(|w| w[1] - w[0]).filter(|&g| g > tol).min_by(f64::total_cmp)
}

/// Builds `B_C = Σ_k λ_k B_kC` so that `H + B_C` has a simple spectrum in
/// the single-excitation sector. Requires full knowledge of `H`.
pub fn construct_lifting_operator(net: &SpinNetwork, gateway: &GatewaySet, plan: &ShiftPlan) -> Result<LiftingOperator> {
    let h = build_single_excitation_matrix(net)?;
    if gateway.nodes().iter().any(|&c| c > net.n) {
        return Err(Error::GatewayOutOfRange(*gateway.nodes().last().unwrap()));
    }
    if !is_infecting(net, gateway) {
        return Err(Refusal::NotInfecting.into());
    }
    let n = net.n;
    let nodes = gateway.nodes();
    let mut op = LiftingOperator::zero(n, gateway.clone());
    let original = sym_eigen(&h).values;
    let tol = tolerance(&original);
    let radius = spectral_radius(&original).max(f64::MIN_POSITIVE);
    let delta = plan.relative_spacing * smallest_nonzero_gap(&original, tol).unwrap_or(radius);

    for _ in 0..plan.max_rounds {
        let current = &h + &op.matrix;
        let groups = gateway_components(&current, gateway);
        if groups.is_empty() {
            return Ok(op);
        }
        let eig = sym_eigen(&current);
        let gaps: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| eig.values[j] - eig.values[i]).collect();
        for phi in groups {
            if phi.ncols() > nodes.len() || independence(&phi) < INDEPENDENCE_TOL {
                return Err(Error::Inconsistent(format!(
                    "a {}-fold level has linearly dependent gateway components on {} nodes",
                    phi.ncols(),
                    nodes.len()
                )));
            }
            let shifts: Vec<f64> = (1..=phi.ncols()).map(|d| d as f64 * delta).collect();
            let block = group_operator(&phi, &shifts)?;
            let norm = spectral_norm(&block);
            let mut lambda = 1.0;
            for _ in 0..plan.max_halvings {
                let collides = gaps.iter().any(|&g| (lambda * norm - g).abs() <= plan.collision_rel_tol * radius);
                if !collides {
                    break;
                }
                lambda /= 2.0;
            }
            for (r, &a) in nodes.iter().enumerate() {
                for (c, &b) in nodes.iter().enumerate() {
                    op.matrix[(a - 1, b - 1)] += lambda * block[(r, c)];
                }
            }
            op.shifts.push(shifts);
            op.strengths.push(lambda);
        }
    }
    if gateway_components(&(&h + &op.matrix), gateway).is_empty() {
        Ok(op)
    } else {
        Err(Error::Inconsistent(format!("degeneracies remain after {} lifting rounds", plan.max_rounds)))
    }
}

/// Sector matrix of `H + B_C`.
pub fn lifted_sector(net: &SpinNetwork, op: &LiftingOperator) -> Result<DMatrix<f64>> {
    let h = build_single_excitation_matrix(net)?;
    if op.n() != net.n {
        return Err(Error::DimensionMismatch(format!("lifting operator on {} nodes for a {}-node network", op.n(), net.n)));
    }
    Ok(h + &op.matrix)
}

/// Smallest level spacing of `H + B_C` in the single-excitation sector.
pub fn verify_lifted(net: &SpinNetwork, op: &LiftingOperator) -> Result<f64> {
    let values = sym_eigen(&lifted_sector(net, op)?).values;
    Ok(crate::linalg::min_gap(&values))
}

/// Exact gateway eigendata of `H + B_C`. The lift annihilates the vacuum, so
/// `E_0` is unchanged.
pub fn lifted_spectral_data(net: &SpinNetwork, op: &LiftingOperator) -> Result<SpectralData> {
    crate::tomography::spectral_data_of_matrix(&lifted_sector(net, op)?, &op.gateway, Some(vacuum_energy(net)))
}

/// Reconstructs `H` from spectral data of `H + B_C` by estimating the
/// perturbed sector and subtracting the known lift.
pub fn reconstruct_lifted(
    topology: &Topology,
    sd: &SpectralData,
    op: &LiftingOperator,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    if op.n() != topology.n {
        return Err(Error::DimensionMismatch(format!("lifting operator on {} nodes for a {}-node topology", op.n(), topology.n)));
    }
    let sector = estimate_sector(topology, &op.gateway, sd, opts)?;
    parameters_from_sector(topology, &(sector.h - &op.matrix), sd.e0_offset, opts)
}
