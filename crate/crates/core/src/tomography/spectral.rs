use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::network::{build_m_matrix, build_single_excitation_matrix, vacuum_energy, GatewaySet, QuadraticSpec, SpinNetwork};

/// Overlaps below this magnitude cannot carry the gauge.
pub const GAUGE_TOL: f64 = 1e-12;

/// Eigenvalues of the probed sector and their overlaps with gateway nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Gateway node → `⟨n|E_j⟩` for every `j`.
    pub overlaps: BTreeMap<usize, Vec<Complex64>>,
    /// Energy of the all-down state in the frame of `eigenvalues`, when known.
    /// Fourier estimates measure `E_j − E_0`, so they carry `Some(0.0)`.
    pub e0_offset: Option<f64>,
    pub reference_node: usize,
}

impl SpectralData {
    /// Sorts levels ascending (carrying overlaps along) and fixes the gauge.
    pub fn new(
        eigenvalues: Vec<f64>,
        overlaps: BTreeMap<usize, Vec<Complex64>>,
        e0_offset: Option<f64>,
        reference_node: usize,
    ) -> Result<SpectralData> {
        let m = eigenvalues.len();
        if let Some((n, v)) = overlaps.iter().find(|(_, v)| v.len() != m) {
            return Err(Error::DimensionMismatch(format!("node {n} has {} overlaps for {m} levels", v.len())));
        }
        if !overlaps.contains_key(&reference_node) {
            return Err(Error::InvalidArgument(format!("reference node {reference_node} has no overlaps")));
        }
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let mut sd = SpectralData {
            eigenvalues: order.iter().map(|&j| eigenvalues[j]).collect(),
            overlaps: overlaps
                .into_iter()
                .map(|(n, v)| (n, order.iter().map(|&j| v[j]).collect()))
                .collect(),
            e0_offset,
            reference_node,
        };
        sd.fix_gauge();
        Ok(sd)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Makes `⟨n₀|E_j⟩` real and positive for every `j`. When it vanishes the
    /// next gateway node (in index order, wrapping) carries the phase.
    pub fn fix_gauge(&mut self) {
        let nodes: Vec<usize> = self.overlaps.keys().copied().collect();
        let start = nodes.iter().position(|&n| n == self.reference_node).unwrap_or(0);
        for j in 0..self.eigenvalues.len() {
            let carrier = (0..nodes.len())
                .map(|k| nodes[(start + k) % nodes.len()])
                .find(|n| self.overlaps[n][j].norm() > GAUGE_TOL);
            let Some(carrier) = carrier else { continue };
            let z = self.overlaps[&carrier][j];
            let phase = z.conj() / z.norm();
            for v in self.overlaps.values_mut() {
                v[j] *= phase;
            }
            if let Some(v) = self.overlaps.get_mut(&carrier) {
                v[j] = Complex64::new(v[j].norm(), 0.0);
            }
        }
    }

    /// `Σ_{n∈C} |⟨n|E_j⟩|²` per level.
    pub fn gateway_weight(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.overlaps.values().map(|v| v[j].norm_sqr()).sum()).collect()
    }

    pub fn shifted(&self, s: f64) -> SpectralData {
        let mut out = self.clone();
        out.eigenvalues.iter_mut().for_each(|e| *e += s);
        out.e0_offset = out.e0_offset.map(|e| e + s);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpectralFile::from(self)).expect("spectrum serializes")
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<SpectralData> {
        let f: SpectralFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse { path: origin.to_path_buf(), message: e.to_string() })?;
        let overlaps = f
            .overlaps
            .into_iter()
            .map(|(n, v)| (n, v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
            .collect();
        SpectralData::new(f.eigenvalues, overlaps, f.e0_offset, f.reference_node)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralFile {
    eigenvalues: Vec<f64>,
    overlaps: BTreeMap<usize, Vec<[f64; 2]>>,
    e0_offset: Option<f64>,
    reference_node: usize,
}

impl From<&SpectralData> for SpectralFile {
    fn from(sd: &SpectralData) -> Self {
        SpectralFile {
            eigenvalues: sd.eigenvalues.clone(),
            overlaps: sd.overlaps.iter().map(|(&n, v)| (n, v.iter().map(|z| [z.re, z.im]).collect())).collect(),
            e0_offset: sd.e0_offset,
            reference_node: sd.reference_node,
        }
    }
}

fn from_eigenvectors(values: Vec<f64>, vectors: &DMatrix<f64>, nodes: &[usize], e0: Option<f64>) -> Result<SpectralData> {
    let overlaps = nodes
        .iter()
        .map(|&n| (n, vectors.row(n - 1).iter().map(|&x| Complex64::new(x, 0.0)).collect()))
        .collect();
    SpectralData::new(values, overlaps, e0, nodes[0])
}

/// Exact single-excitation eigendata restricted to the gateway, with absolute
/// eigenvalues and `E_0` known.
pub fn exact_spectral_data(net: &SpinNetwork, gateway: &GatewaySet) -> Result<SpectralData> {
    if gateway.nodes().iter().any(|&c| c > net.n) {
        return Err(Error::GatewayOutOfRange(*gateway.nodes().last().unwrap()));
    }
    let eig = sym_eigen(&build_single_excitation_matrix(net)?);
    from_eigenvectors(eig.values, &eig.vectors, gateway.nodes(), Some(vacuum_energy(net)))
}

/// Eigendata of a given sector matrix (used for perturbed Hamiltonians).
pub fn spectral_data_of_matrix(h: &DMatrix<f64>, gateway: &GatewaySet, e0: Option<f64>) -> Result<SpectralData> {
    let eig = sym_eigen(h);
    from_eigenvectors(eig.values, &eig.vectors, gateway.nodes(), e0)
}

/// Eigendata of `M` seen from the fictitious nodes `1` and `N + 1`.
pub fn exact_quadratic_spectral_data(spec: &QuadraticSpec) -> Result<SpectralData> {
    let m = build_m_matrix(spec)?;
    let eig = sym_eigen(&m);
    from_eigenvectors(eig.values, &eig.vectors, &[1, spec.n() + 1], Some(0.0))
}
