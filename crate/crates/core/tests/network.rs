use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spingate::network::*;

fn arbitrary_network() -> impl Strategy<Value = SpinNetwork> {
    (2usize..8, 0.0f64..0.8, prop_oneof![Just(0.0), Just(0.5), Just(1.0)], any::<u64>()).prop_map(|(n, p, delta, seed)| {
        let ranges = ParameterRanges { random_sign: true, ..Default::default() };
        random_connected(n, p, delta, &ranges, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn files_round_trip(net in arbitrary_network()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_network(&net, &path).unwrap();
        let back = load_network(&path).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(network_to_json(&back), network_to_json(&net));
    }

    /// The one-excitation block of the dense Hamiltonian, read off state by
    /// state, is the sector matrix.
    #[test]
    fn sector_is_the_one_excitation_block(net in arbitrary_network()) {
        let full = build_full_hamiltonian(&net, DEFAULT_DENSE_CAP).unwrap();
        let sector = build_single_excitation_matrix(&net).unwrap();
        let n = net.n;
        let state = |k: usize| 1usize << (n - k);
        for a in 1..=n {
            for b in 1..=n {
                prop_assert!((sector[(a - 1, b - 1)] - full[(state(a), state(b))]).abs() < 1e-12);
            }
        }
        prop_assert!((vacuum_energy(&net) - full[(0, 0)]).abs() < 1e-12);
    }

    /// `H` commutes with the total excitation number.
    #[test]
    fn excitations_are_conserved(net in arbitrary_network()) {
        let full = build_full_hamiltonian(&net, DEFAULT_DENSE_CAP).unwrap();
        for r in 0..full.nrows() {
            for c in 0..full.ncols() {
                if (r as u32).count_ones() != (c as u32).count_ones() {
                    prop_assert_eq!(full[(r, c)], 0.0);
                }
            }
        }
    }
}

#[test]
fn fermionic_m_spectrum_is_symmetric() {
    let couplings = vec![Coupling::new(1, 2, 1.0), Coupling::new(2, 3, -0.7), Coupling::new(3, 4, 0.4)];
    let net = SpinNetwork::new(4, ModelKind::QuadraticFermion, 0.0, 0.6, couplings, vec![0.3, -0.2, 0.5, 0.1]);
    let m = build_m_matrix(&quadratic_spec_from_chain(&net).unwrap()).unwrap();
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    for (lo, hi) in values.iter().zip(values.iter().rev()) {
        assert!((lo + hi).abs() < 1e-12);
    }
}

#[test]
fn invalid_files_are_rejected_with_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n": 2, "couplings": [[1, 3, 1.0]]}"#).unwrap();
    let err = load_network(&path).unwrap_err().to_string();
    assert!(err.contains("bad.json"), "{err}");
    assert!(load_network(dir.path().join("missing.json")).is_err());
}
