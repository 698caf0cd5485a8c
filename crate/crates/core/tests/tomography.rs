use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spingate::error::{Error, Refusal};
use spingate::network::*;
use spingate::tomography::*;

fn gw(nodes: &[usize], n: usize) -> GatewaySet {
    GatewaySet::new(nodes.iter().copied(), n).unwrap()
}

fn signed_ranges() -> ParameterRanges {
    ParameterRanges { random_sign: true, ..Default::default() }
}

#[test]
fn exact_round_trip_on_chains_and_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for i in 0..16 {
        let (net, g) = if i % 2 == 0 {
            let n = rng.random_range(2..=9);
            (random_chain(n, 1.0, &signed_ranges(), &mut rng), gw(&[1], n))
        } else {
            let cols = rng.random_range(2..=3);
            let net = grid_graph(3, cols, 1.0, &signed_ranges(), &mut rng);
            (net, gw(&(1..=cols).collect::<Vec<_>>(), 3 * cols))
        };
        let sd = exact_spectral_data(&net, &g).unwrap();
        let r = reconstruct_couplings(&net.topology(), &g, &sd, &Default::default()).unwrap().with_truth(&net);
        assert!(r.max_abs_error().unwrap() < 1e-8, "{net:?}: {:e}", r.max_abs_error().unwrap());
    }
}

#[test]
fn unknown_vacuum_energy_is_solved_for() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let net = random_chain(5, 1.0, &signed_ranges(), &mut rng);
    let g = gw(&[1], 5);
    let mut sd = exact_spectral_data(&net, &g).unwrap();
    sd.e0_offset = None;
    let r = reconstruct_couplings(&net.topology(), &g, &sd, &Default::default()).unwrap().with_truth(&net);
    assert!(r.max_abs_error().unwrap() < 1e-8);
    assert!((r.e0.unwrap() - vacuum_energy(&net)).abs() < 1e-8);
}

#[test]
fn fourier_pipeline_on_a_short_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let net = random_chain(5, 1.0, &ParameterRanges::default(), &mut rng);
    let g = gw(&[1], 5);
    let plan = sampling_requirements(&net, &SamplingOptions::default()).unwrap();
    let ts = simulate_signal(&net, &g, plan.dt, plan.steps.unwrap()).unwrap();
    let sd = extract_spectrum(&ts, &FourierOptions::expecting(5)).unwrap();
    let r = reconstruct_couplings(&net.topology(), &g, &sd, &Default::default()).unwrap().with_truth(&net);
    assert!(r.max_rel_error().unwrap() < 1e-6, "{:e}", r.max_rel_error().unwrap());
}

#[test]
fn records_and_spectra_survive_serialization() {
    let net = random_chain(4, 1.0, &ParameterRanges::default(), &mut ChaCha8Rng::seed_from_u64(34));
    let g = gw(&[1, 2], 4);
    let ts = simulate_signal(&net, &g, 0.1, 50).unwrap();
    assert_eq!(TimeSeries::from_records(&ts.records(), 1).unwrap(), ts);

    let sd = exact_spectral_data(&net, &g).unwrap();
    let back = SpectralData::from_json(&sd.to_json(), Path::new("mem")).unwrap();
    assert_eq!(back.eigenvalues, sd.eigenvalues);
    assert_eq!(back.e0_offset, sd.e0_offset);
    for (node, v) in &sd.overlaps {
        assert!(v.iter().zip(&back.overlaps[node]).all(|(a, b)| (a - b).norm() < 1e-15));
    }
}

#[test]
fn degenerate_and_uninfected_inputs_are_refused() {
    let k3 = complete_graph(3, 1.0, 1.0);
    let sd = exact_spectral_data(&k3, &gw(&[1, 2], 3)).unwrap();
    let err = reconstruct_couplings(&k3.topology(), &gw(&[1, 2], 3), &sd, &Default::default()).unwrap_err();
    assert!(matches!(err, Error::Refused(Refusal::DegenerateSpectrum { .. })), "{err}");

    let star = star_graph(4, 1.0);
    let sd = exact_spectral_data(&star, &gw(&[1], 4)).unwrap();
    let err = reconstruct_couplings(&star.topology(), &gw(&[1], 4), &sd, &Default::default()).unwrap_err();
    assert!(matches!(err, Error::Refused(Refusal::NotInfecting)), "{err}");
}

#[test]
fn record_length_grows_quadratically_with_chain_length() {
    let t = |n| sampling_requirements(&uniform_chain(n, 1.0, 1.0), &SamplingOptions::default()).unwrap().t_min;
    let slope = (t(24) / t(12)).ln() / 2f64.ln();
    assert!((1.7..2.3).contains(&slope), "slope {slope}");
}

/// A γ = 0 fermionic chain with couplings `c` is the `Δ = 0` excitation
/// preserving chain with couplings `c/2`.
#[test]
fn hopping_chain_agrees_with_the_excitation_preserving_picture() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for n in 3..=7 {
        let c: Vec<f64> = (1..n).map(|_| rng.random_range(0.5..1.5)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let couplings = c.iter().enumerate().map(|(i, &x)| Coupling::new(i + 1, i + 2, x)).collect();
        let fermions = SpinNetwork::new(n, ModelKind::QuadraticFermion, 0.0, 0.0, couplings, b.clone());
        let sd = exact_quadratic_spectral_data(&quadratic_spec_from_chain(&fermions).unwrap()).unwrap();
        let prior = QuadraticPrior { n, gamma: 0.0, coupling_signs: &fermions.signs, field_signs: None };
        let q = reconstruct_quadratic_chain(&prior, &sd, &Default::default()).unwrap();

        let edges: Vec<(usize, usize, f64)> = c.iter().enumerate().map(|(i, &x)| (i + 1, i + 2, x / 2.0)).collect();
        let spins = SpinNetwork::heisenberg(n, 0.0, &edges, b.clone());
        let g = gw(&[1], n);
        let e = reconstruct_couplings(&spins.topology(), &g, &exact_spectral_data(&spins, &g).unwrap(), &Default::default()).unwrap();

        for (x, y) in q.couplings.iter().zip(&e.couplings) {
            assert!((x.value - 2.0 * y.value).abs() < 1e-8, "n={n}: {} vs {}", x.value, 2.0 * y.value);
        }
        for (x, y) in q.fields.iter().zip(&e.fields) {
            assert!((x.value - y.value).abs() < 1e-8, "n={n}: {} vs {}", x.value, y.value);
        }
    }
}
