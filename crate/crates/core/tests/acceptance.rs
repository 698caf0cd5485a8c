//! End-to-end acceptance checks. Each test prints one `PASS` or `FAIL` line
//! and then asserts the same condition.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spingate::control::{control_matrix, grape_optimize, hopping_matrix, ControlProblem, GrapeOptions, TargetGate};
use spingate::degeneracy::*;
use spingate::infection::{is_infecting, minimal_infecting_set, SearchMode, DEFAULT_EXHAUSTIVE_CAP};
use spingate::lie::*;
use spingate::network::*;
use spingate::pauli::{heisenberg_coupling, local_su2, PauliSum};
use spingate::tomography::*;

fn report(label: &str, pass: bool, detail: String) {
    println!("{} {label}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{label}: {detail}");
}

fn gw(nodes: &[usize], n: usize) -> GatewaySet {
    GatewaySet::new(nodes.iter().copied(), n).unwrap()
}

#[test]
fn su4_propagation() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for delta in [0.0, 0.5, 1.0] {
        for c in [1.0, -0.4, 2.5] {
            let h = heisenberg_coupling(2, 1, 2, c, delta);
            let propagating = is_algebraically_propagating(&h).unwrap();
            let mut gens: Vec<PauliSum> = local_su2(2, 1).iter().map(|s| spingate::pauli::commutator(&h, s)).collect();
            gens.extend(local_su2(2, 1));
            let dim = closure(&gens, DEFAULT_CLOSURE_CAP).unwrap().dim();
            pass &= propagating && dim == 15;
            if c == 1.0 {
                lines.push(format!("Δ={delta} dim {dim}"));
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    report("su(4) propagation", pass, format!("{} in {elapsed:.2?}", lines.join(", ")));
}

#[test]
fn chain_end_controllability() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ranges = ParameterRanges { coupling: (0.5, 1.5), ..Default::default() };
    let mut pass = true;
    let mut lines = Vec::new();
    for n in 2..=4 {
        let net = random_chain(n, 1.0, &ranges, &mut rng);
        let start = Instant::now();
        let c = is_controllable(&net, &gw(&[1], n), DEFAULT_CLOSURE_CAP).unwrap();
        let elapsed = start.elapsed();
        pass &= c.dim == (1 << (2 * n)) - 1 && elapsed < Duration::from_secs(120);
        lines.push(format!("N={n} dim {}/{} in {elapsed:.2?}", c.dim, c.target));
    }
    report("chain-end controllability", pass, lines.join(", "));
}

#[test]
fn theorem_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut tested, mut controllable) = (0, 0);
    while tested < 50 {
        let n = rng.random_range(2..=5);
        let net = random_connected(n, rng.random_range(0.0..0.6), 1.0, &ParameterRanges::default(), &mut rng);
        let g = minimal_infecting_set(&net, SearchMode::Exhaustive, DEFAULT_EXHAUSTIVE_CAP).unwrap().gateway;
        assert!(is_infecting(&net, &g));
        tested += 1;
        controllable += usize::from(is_controllable(&net, &g, DEFAULT_CLOSURE_CAP).unwrap().controllable);
    }
    report("theorem consistency", controllable == 50, format!("{controllable}/{tested} infecting gateways controllable"));
}

#[test]
fn random_pair_universality() {
    let rate = random_pair_universality_test(2, 50, 7, DEFAULT_CLOSURE_CAP).unwrap();
    report("random-pair universality", rate == 1.0, format!("{}/50 pairs reach dim 16", (rate * 50.0).round()));
}

fn forcing_fixed_point(adj: &[Vec<usize>], start: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut infected = start.clone();
    loop {
        let newly: Vec<usize> = infected
            .iter()
            .filter_map(|&v| {
                let healthy: Vec<usize> = adj[v].iter().copied().filter(|w| !infected.contains(w)).collect();
                (healthy.len() == 1).then(|| healthy[0])
            })
            .collect();
        if newly.is_empty() {
            return infected;
        }
        infected.extend(newly);
    }
}

fn brute_force_minimum(net: &SpinNetwork) -> usize {
    let adj = net.adjacency();
    (1..=net.n)
        .find(|&size| {
            (0u32..1 << net.n).filter(|m| m.count_ones() as usize == size).any(|m| {
                let start = (1..=net.n).filter(|v| m & (1 << (v - 1)) != 0).collect();
                forcing_fixed_point(&adj, &start).len() == net.n
            })
        })
        .unwrap()
}

#[test]
fn zero_forcing_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    for _ in 0..30 {
        let n = rng.random_range(2..=10);
        let net = random_connected(n, rng.random_range(0.0..0.5), 1.0, &ParameterRanges::default(), &mut rng);
        let found = minimal_infecting_set(&net, SearchMode::Exhaustive, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        agree += usize::from(found.gateway.len() == brute_force_minimum(&net) && is_infecting(&net, &found.gateway));
    }
    let nnn = next_nearest_chain(6, 1.0, 1.0);
    let size = minimal_infecting_set(&nnn, SearchMode::Exhaustive, DEFAULT_EXHAUSTIVE_CAP).unwrap().gateway.len();
    let witness = is_infecting(&nnn, &gw(&[1, 2], 6));
    report(
        "zero-forcing oracle equivalence",
        agree == 30 && size == 2 && witness,
        format!("{agree}/30 agree with enumeration; next-nearest chain minimum {size}, end pair infects: {witness}"),
    );
}

#[test]
fn tomography_exact_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ranges = ParameterRanges { random_sign: true, ..Default::default() };
    let shapes = [(2, 2), (3, 2), (4, 2), (5, 2), (3, 3)];
    let (mut worst, mut cases) = (0.0f64, 0);
    while cases < 40 {
        let (net, g) = if cases < 20 {
            let n = rng.random_range(2..=10);
            (random_chain(n, 1.0, &ranges, &mut rng), gw(&[1], n))
        } else {
            let (rows, cols) = shapes[rng.random_range(0..shapes.len())];
            let net = grid_graph(rows, cols, 1.0, &ranges, &mut rng);
            (net, gw(&(1..=cols).collect::<Vec<_>>(), rows * cols))
        };
        assert!(is_infecting(&net, &g));
        if !detect_degeneracies(&net).unwrap().is_empty() {
            continue;
        }
        cases += 1;
        let sd = exact_spectral_data(&net, &g).unwrap();
        let r = reconstruct_couplings(&net.topology(), &g, &sd, &Default::default()).unwrap().with_truth(&net);
        worst = worst.max(r.max_abs_error().unwrap());
    }
    report("tomography exact round trip", worst < 1e-8, format!("20 chains + 20 grids, max |error| {worst:.1e}"));
}

fn disordered_chain(n: usize, rng: &mut ChaCha8Rng) -> SpinNetwork {
    let edges: Vec<(usize, usize, f64)> = (1..n).map(|i| (i, i + 1, rng.random_range(0.8..1.2))).collect();
    let fields = (0..n)
        .map(|_| {
            let m = rng.random_range(0.1..0.3);
            if rng.random_bool(0.5) {
                -m
            } else {
                m
            }
        })
        .collect();
    SpinNetwork::heisenberg(n, 1.0, &edges, fields)
}

#[test]
fn tomography_fourier_round_trip() {
    let n = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let net = disordered_chain(n, &mut rng);
    let g = gw(&[1], n);
    let plan = sampling_requirements(&net, &SamplingOptions { resolution_margin: 400.0, ..Default::default() }).unwrap();
    let clean = simulate_signal(&net, &g, plan.dt, plan.steps.unwrap()).unwrap();
    let mut error = |sigma: f64| {
        let ts = add_noise(&clean, NoiseModel::Gaussian { sigma }, &mut rng).unwrap();
        let sd = extract_spectrum(&ts, &FourierOptions::expecting(n)).unwrap();
        let r = reconstruct_couplings(&net.topology(), &g, &sd, &Default::default()).unwrap().with_truth(&net);
        r.max_rel_error().unwrap()
    };
    let noiseless = error(0.0);
    let sigmas = [1e-4, 1e-3, 1e-2];
    let errors: Vec<f64> = sigmas.iter().map(|&s| error(s)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = sigmas.iter().zip(&errors).map(|(s, e)| (s.log10(), e.log10())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    report(
        "tomography Fourier round trip",
        noiseless < 1e-2 && slope <= 1.5,
        format!(
            "N={n}, T={:.0} ({} samples), noiseless {noiseless:.1e}, σ→error {:?}, slope {slope:.2}",
            plan.duration().unwrap(),
            plan.steps.unwrap(),
            sigmas.iter().zip(&errors).map(|(s, e)| format!("{s:.0e}:{e:.1e}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn degeneracy_suite() {
    let chains_clean = (2..=10).all(|n| detect_degeneracies(&uniform_chain(n, 1.0, 1.0)).unwrap().is_empty());
    let k3 = detect_degeneracies(&complete_graph(3, 1.0, 1.0)).unwrap();
    let k3_ok = k3.len() == 1 && k3[0].multiplicity() == 2;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut bounded, mut degenerate, mut lifted, mut worst_gap, mut worst_error) = (0, 0, 0, f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(3..=8);
        let ranges = ParameterRanges { field: (0.0, 0.0), ..Default::default() };
        let net = random_connected(n, rng.random_range(0.0..0.7), 1.0, &ranges, &mut rng).with_uniform_couplings(1.0);
        let g = minimal_infecting_set(&net, SearchMode::Exhaustive, DEFAULT_EXHAUSTIVE_CAP).unwrap().gateway;
        let levels = detect_degeneracies(&net).unwrap();
        bounded += usize::from(levels.iter().all(|l| l.multiplicity() <= g.len()));
        if levels.is_empty() {
            continue;
        }
        degenerate += 1;
        let op = construct_lifting_operator(&net, &g, &ShiftPlan::default()).unwrap();
        let gap = verify_lifted(&net, &op).unwrap();
        let sd = lifted_spectral_data(&net, &op).unwrap();
        let r = reconstruct_lifted(&net.topology(), &sd, &op, &Default::default()).unwrap().with_truth(&net);
        let err = r.max_abs_error().unwrap();
        lifted += usize::from(gap > 1e-6 && err < 1e-6);
        worst_gap = worst_gap.min(gap);
        worst_error = worst_error.max(err);
    }
    report(
        "degeneracy suite",
        chains_clean && k3_ok && bounded == 100 && lifted == degenerate && degenerate > 0,
        format!(
            "chains nondegenerate: {chains_clean}, K3 one 2-fold level: {k3_ok}, multiplicity ≤ |C| in {bounded}/100, \
             lifted and recovered {lifted}/{degenerate} (min gap {worst_gap:.1e}, max error {worst_error:.1e})"
        ),
    );
}

fn fermion_chain(c: &[f64], b: &[f64], gamma: f64) -> SpinNetwork {
    let couplings = c.iter().enumerate().map(|(i, &x)| Coupling::new(i + 1, i + 2, x)).collect();
    SpinNetwork::new(b.len(), ModelKind::QuadraticFermion, 0.0, gamma, couplings, b.to_vec())
}

#[test]
fn quadratic_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ising = 0.0f64;
    let mut cross = 0.0f64;
    for n in 3..=8 {
        let c: Vec<f64> = (1..n).map(|_| rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.8) * if rng.random_bool(0.5) { -1.0 } else { 1.0 }).collect();

        let net = fermion_chain(&c, &b, 1.0);
        let sd = exact_quadratic_spectral_data(&quadratic_spec_from_chain(&net).unwrap()).unwrap();
        let field_signs: Vec<Sign> = b.iter().map(|&x| Sign::of(x)).collect();
        let prior = QuadraticPrior { n, gamma: 1.0, coupling_signs: &net.signs, field_signs: Some(&field_signs) };
        let r = reconstruct_quadratic_chain(&prior, &sd, &Default::default()).unwrap().with_truth(&net);
        assert_eq!(r.couplings.len() + r.fields.len(), 2 * n - 1);
        ising = ising.max(r.max_abs_error().unwrap());

        let hop = fermion_chain(&c, &b, 0.0);
        let sd = exact_quadratic_spectral_data(&quadratic_spec_from_chain(&hop).unwrap()).unwrap();
        let prior = QuadraticPrior { n, gamma: 0.0, coupling_signs: &hop.signs, field_signs: None };
        let q = reconstruct_quadratic_chain(&prior, &sd, &Default::default()).unwrap();
        let edges: Vec<(usize, usize, f64)> = c.iter().enumerate().map(|(i, &x)| (i + 1, i + 2, x / 2.0)).collect();
        let spins = SpinNetwork::heisenberg(n, 0.0, &edges, b.clone());
        let g = gw(&[1], n);
        let e = reconstruct_couplings(&spins.topology(), &g, &exact_spectral_data(&spins, &g).unwrap(), &Default::default()).unwrap();
        for (x, y) in q.couplings.iter().zip(&e.couplings) {
            cross = cross.max((x.value - 2.0 * y.value).abs());
        }
        for (x, y) in q.fields.iter().zip(&e.fields) {
            cross = cross.max((x.value - y.value).abs());
        }
    }
    report(
        "quadratic chain",
        ising < 1e-8 && cross < 1e-8,
        format!("Ising N=3..8 max |error| {ising:.1e}; γ=0 against excitation-preserving {cross:.1e}"),
    );
}

#[test]
fn grape_scaling() {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut pass = true;
    for n in [4, 6, 8, 10, 12] {
        let problem = ControlProblem::new(hopping_matrix(&vec![1.0; n - 1]), control_matrix(n), TargetGate::swap(n, 1, n).unwrap()).unwrap();
        let out = grape_optimize(&problem, (n * n) as f64, &GrapeOptions { seed: 1, ..Default::default() }).unwrap();
        let eps = out.schedule.infidelity.unwrap();
        pass &= eps <= 1e-4;
        rows.push(format!("N={n} ε={eps:.1e} ({} it)", out.iterations));
    }
    let elapsed = start.elapsed();

    let n = 6;
    let problem = ControlProblem::new(hopping_matrix(&vec![1.0; n - 1]), control_matrix(n), TargetGate::swap(n, 1, n).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let amps: Vec<f64> = (0..24).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (_, grad) = problem.fidelity_and_gradient(36.0, &amps);
        let fd: Vec<f64> = (0..amps.len())
            .map(|s| {
                let (mut up, mut down) = (amps.clone(), amps.clone());
                up[s] += h;
                down[s] -= h;
                (problem.fidelity_and_gradient(36.0, &up).0 - problem.fidelity_and_gradient(36.0, &down).0) / (2.0 * h)
            })
            .collect();
        let scale = fd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let diff = grad.iter().zip(&fd).fold(0.0f64, |m, (g, f)| m.max((g - f).abs()));
        worst = worst.max(diff / scale);
    }
    pass &= elapsed < Duration::from_secs(1800) && worst < 1e-5;
    report(
        "GRAPE scaling",
        pass,
        format!("{} in {elapsed:.1?}; gradient vs central differences {worst:.1e} relative at 10 points", rows.join(", ")),
    );
}
