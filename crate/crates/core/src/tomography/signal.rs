use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::network::{build_m_matrix, build_single_excitation_matrix, vacuum_energy, GatewaySet, QuadraticSpec, SpinNetwork};

/// Gateway records on a uniform grid `t_k = k·dt`, `k = 0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub values: BTreeMap<usize, Vec<Complex64>>,
    /// The node the excitation starts on; its record is the autocorrelation.
    pub reference_node: usize,
}

/// Relative tolerance on grid spacing when reading records back.
const GRID_TOL: f64 = 1e-9;

pub(crate) fn check_grid(dt: f64, k: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidGrid(format!("time step must be positive, got {dt}")));
    }
    if k < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 samples, got {k}")));
    }
    Ok(())
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn duration(&self) -> f64 {
        (self.len().saturating_sub(1)) as f64 * self.dt
    }

    /// Builds a series from `(t, node, value)` records in any order. Times
    /// must form a uniform grid starting at zero, shared by every node.
    pub fn from_records(records: &[(f64, usize, Complex64)], reference_node: usize) -> Result<TimeSeries> {
        let mut by_node: BTreeMap<usize, Vec<(f64, Complex64)>> = BTreeMap::new();
        for &(t, n, z) in records {
            by_node.entry(n).or_default().push((t, z));
        }
        let Some(reference) = by_node.get(&reference_node) else {
            return Err(Error::InvalidArgument(format!("no samples for reference node {reference_node}")));
        };
        let mut times: Vec<f64> = reference.iter().map(|p| p.0).collect();
        times.sort_by(f64::total_cmp);
        if times.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 samples".into()));
        }
        let dt = times[1] - times[0];
        check_grid(dt, times.len())?;
        for (k, &t) in times.iter().enumerate() {
            if (t - k as f64 * dt).abs() > GRID_TOL * (1.0 + t.abs()) {
                return Err(Error::InvalidGrid(format!("sample {k} at t = {t} is off the uniform grid (dt = {dt})")));
            }
        }
        let mut values = BTreeMap::new();
        for (n, mut samples) in by_node {
            if samples.len() != times.len() {
                return Err(Error::InvalidGrid(format!("node {n} has {} samples, expected {}", samples.len(), times.len())));
            }
            samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            values.insert(n, samples.into_iter().map(|p| p.1).collect());
        }
        Ok(TimeSeries { dt, values, reference_node })
    }

    pub fn records(&self) -> Vec<(f64, usize, Complex64)> {
        let mut out = Vec::with_capacity(self.len() * self.values.len());
        for k in 0..self.len() {
            for (&n, v) in &self.values {
                out.push((k as f64 * self.dt, n, v[k]));
            }
        }
        out
    }
}

/// Evolves `|start⟩` under a real symmetric `h` (shifted by `offset`) and
/// records the amplitudes at `nodes`.
fn evolve_records(h: &DMatrix<f64>, offset: f64, start: usize, nodes: &[usize], dt: f64, k: usize) -> BTreeMap<usize, Vec<Complex64>> {
    let eig = sym_eigen(h);
    let freqs: Vec<f64> = eig.values.iter().map(|e| e - offset).collect();
    nodes
        .iter()
        .map(|&n| {
            let weights: Vec<f64> = (0..freqs.len()).map(|j| eig.vectors[(n - 1, j)] * eig.vectors[(start - 1, j)]).collect();
            let samples = (0..k)
                .map(|s| {
                    let t = s as f64 * dt;
                    weights.iter().zip(&freqs).map(|(w, f)| Complex64::from_polar(*w, -f * t)).sum()
                })
                .collect();
            (n, samples)
        })
        .collect()
}

/// `e^{iE_0 t}⟨n|U(t)|1⟩` for every gateway node `n`.
pub fn simulate_signal(net: &SpinNetwork, gateway: &GatewaySet, dt: f64, k: usize) -> Result<TimeSeries> {
    check_grid(dt, k)?;
    if !gateway.contains(1) {
        return Err(Error::InvalidArgument("the gateway must contain node 1, where the excitation starts".into()));
    }
    let h = build_single_excitation_matrix(net)?;
    let values = evolve_records(&h, vacuum_energy(net), 1, gateway.nodes(), dt, k);
    Ok(TimeSeries { dt, values, reference_node: 1 })
}

/// Amplitudes `⟨1|e^{−iMt}|1⟩` and `⟨N+1|e^{−iMt}|1⟩` on the fictitious
/// `2N`-node graph of `M`.
pub fn simulate_quadratic_signal(spec: &QuadraticSpec, dt: f64, k: usize) -> Result<TimeSeries> {
    check_grid(dt, k)?;
    let m = build_m_matrix(spec)?;
    let values = evolve_records(&m, 0.0, 1, &[1, spec.n() + 1], dt, k);
    Ok(TimeSeries { dt, values, reference_node: 1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    /// Independent Gaussian noise of standard deviation `sigma` on the real
    /// and imaginary part of every sample.
    Gaussian { sigma: f64 },
    /// Each quadrature estimated from `shots` two-outcome measurements.
    Shots { shots: u64 },
}

pub fn add_noise<R: Rng + ?Sized>(ts: &TimeSeries, noise: NoiseModel, rng: &mut R) -> Result<TimeSeries> {
    let mut out = ts.clone();
    match noise {
        NoiseModel::None => {}
        NoiseModel::Gaussian { sigma } => {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidArgument(format!("noise sigma must be non-negative, got {sigma}")));
            }
            if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma).expect("valid sigma");
                for v in out.values.values_mut() {
                    for z in v.iter_mut() {
                        *z += Complex64::new(normal.sample(rng), normal.sample(rng));
                    }
                }
            }
        }
        NoiseModel::Shots { shots } => {
            if shots == 0 {
                return Err(Error::InvalidArgument("shot count must be positive".into()));
            }
            let estimate = |x: f64, rng: &mut R| {
                let p = ((1.0 + x.clamp(-1.0, 1.0)) / 2.0).clamp(0.0, 1.0);
                let ups = Binomial::new(shots, p).expect("valid probability").sample(rng);
                2.0 * ups as f64 / shots as f64 - 1.0
            };
            for v in out.values.values_mut() {
                for z in v.iter_mut() {
                    *z = Complex64::new(estimate(z.re, rng), estimate(z.im, rng));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{quadratic_spec_from_chain, uniform_chain, Coupling, ModelKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gw(nodes: &[usize], n: usize) -> GatewaySet {
        GatewaySet::new(nodes.iter().copied(), n).unwrap()
    }

    #[test]
    fn starts_at_node_one() {
        let net = uniform_chain(4, 1.0, 1.0);
        let ts = simulate_signal(&net, &gw(&[1, 2, 3], 4), 0.1, 5).unwrap();
        assert!((ts.values[&1][0] - 1.0).norm() < 1e-14);
        assert!(ts.values[&2][0].norm() < 1e-14 && ts.values[&3][0].norm() < 1e-14);
    }

    #[test]
    fn single_spin_phase() {
        let b = 0.3;
        let net = SpinNetwork::heisenberg(1, 1.0, &[], vec![b]);
        let ts = simulate_signal(&net, &gw(&[1], 1), 0.25, 20).unwrap();
        // E_1 − E_0 = −b − b.
        for (k, z) in ts.values[&1].iter().enumerate() {
            let t = k as f64 * 0.25;
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!((z - Complex64::from_polar(1.0, 2.0 * b * t)).norm() < 1e-13);
        }
    }

    #[test]
    fn two_site_autocorrelation_is_cosine() {
        let net = uniform_chain(2, 1.0, 0.0);
        let ts = simulate_signal(&net, &gw(&[1], 2), 0.05, 200).unwrap();
        for (k, z) in ts.values[&1].iter().enumerate() {
            assert!((z - Complex64::new((2.0 * k as f64 * 0.05).cos(), 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn grid_errors() {
        let net = uniform_chain(2, 1.0, 0.0);
        assert!(matches!(simulate_signal(&net, &gw(&[1], 2), 0.0, 10), Err(Error::InvalidGrid(_))));
        assert!(matches!(simulate_signal(&net, &gw(&[1], 2), 0.1, 1), Err(Error::InvalidGrid(_))));
        assert!(simulate_signal(&net, &gw(&[2], 2), 0.1, 10).is_err());
    }

    #[test]
    fn xx_chain_never_reaches_the_lower_rail() {
        let couplings = vec![Coupling::new(1, 2, 1.0), Coupling::new(2, 3, 0.7)];
        let net = SpinNetwork::new(3, ModelKind::QuadraticFermion, 0.0, 0.0, couplings, vec![0.2, -0.1, 0.3]);
        let ts = simulate_quadratic_signal(&quadratic_spec_from_chain(&net).unwrap(), 0.1, 100).unwrap();
        assert!((ts.values[&1][0] - 1.0).norm() < 1e-14);
        assert!(ts.values[&4].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn records_round_trip() {
        let net = uniform_chain(3, 1.0, 0.5);
        let ts = simulate_signal(&net, &gw(&[1, 3], 3), 0.1, 7).unwrap();
        let mut recs = ts.records();
        recs.reverse();
        assert_eq!(TimeSeries::from_records(&recs, 1).unwrap(), ts);
        recs.pop();
        assert!(TimeSeries::from_records(&recs, 1).is_err());
    }

    #[test]
    fn noise_models() {
        let net = uniform_chain(2, 1.0, 0.0);
        let ts = simulate_signal(&net, &gw(&[1], 2), 0.1, 2000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noisy = add_noise(&ts, NoiseModel::Gaussian { sigma: 0.01 }, &mut rng).unwrap();
        let diffs: Vec<f64> = noisy.values[&1].iter().zip(&ts.values[&1]).map(|(a, b)| (a - b).re).collect();
        let sd = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
        assert!((sd - 0.01).abs() < 0.001, "{sd}");
        let shots = add_noise(&ts, NoiseModel::Shots { shots: 10_000 }, &mut rng).unwrap();
        let max = shots.values[&1].iter().zip(&ts.values[&1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(max < 0.1, "{max}");
        assert!(add_noise(&ts, NoiseModel::Gaussian { sigma: -1.0 }, &mut rng).is_err());
    }
}
