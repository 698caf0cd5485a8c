use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use spingate::control::many_body::{many_body_propagate, many_body_swaps, sector_fidelities};
use spingate::control::*;
use spingate::lie::{closure, DEFAULT_CLOSURE_CAP};
use spingate::network::{Coupling, ModelKind, SpinNetwork};
use spingate::pauli::{network_operator, PauliSum};

fn uniform_problem(n: usize, target: TargetGate) -> ControlProblem {
    ControlProblem::new(hopping_matrix(&vec![1.0; n - 1]), control_matrix(n), target).unwrap()
}

fn xx_chain(c: &[f64]) -> SpinNetwork {
    let couplings = c.iter().enumerate().map(|(i, &x)| Coupling::new(i + 1, i + 2, x)).collect();
    SpinNetwork::new(c.len() + 1, ModelKind::QuadraticFermion, 0.0, 0.0, couplings, vec![0.0; c.len() + 1])
}

#[test]
fn three_site_control_algebra_has_dimension_n_squared() {
    let h = network_operator(&xx_chain(&[1.0, 0.7]));
    let z1 = PauliSum::parse_term("ZII", 1.0).unwrap();
    let span = closure(&[z1, h], DEFAULT_CLOSURE_CAP).unwrap();
    assert_eq!(span.dim(), 9);
}

#[test]
fn four_site_swap_at_sixteen_time_units() {
    let problem = uniform_problem(4, TargetGate::swap(4, 1, 3).unwrap());
    let opts = GrapeOptions { segments: Some(160), seed: 1, ..Default::default() };
    let out = grape_optimize(&problem, 16.0, &opts).unwrap();
    assert!(out.converged);
    let eps = out.schedule.infidelity.unwrap();
    assert!(eps <= 1e-4, "{eps:e}");
    assert!((1.0 - problem.fidelity(&out.schedule) - eps).abs() < 1e-12);

    let u = propagate(&out.schedule, &problem.drift, &problem.control);
    let reduced = subspace_fidelity(&u, &problem.target.matrix, &[1, 3]).unwrap();
    assert!(reduced >= 1.0 - 1e-4, "reduced fidelity {reduced}");
}

#[test]
fn optimization_is_deterministic_in_the_seed() {
    let problem = uniform_problem(4, TargetGate::swap(4, 1, 4).unwrap());
    let run = |seed| grape_optimize(&problem, 16.0, &GrapeOptions { seed, ..Default::default() }).unwrap();
    let (a, b, c) = (run(5), run(5), run(6));
    assert_eq!(a.schedule, b.schedule);
    assert_ne!(a.schedule.amplitudes, c.schedule.amplitudes);
}

#[test]
fn plain_gradient_ascent_also_converges() {
    let problem = uniform_problem(4, TargetGate::swap(4, 1, 4).unwrap());
    let opts = GrapeOptions { ascent: Ascent::Gradient, seed: 1, ..Default::default() };
    let out = grape_optimize(&problem, 16.0, &opts).unwrap();
    assert!(out.converged && out.schedule.infidelity.unwrap() <= 1e-4);
    assert!(out.schedule.amplitudes.iter().all(|u| u.abs() <= opts.bound));
}

/// The single-particle pulse drives the full register to the many-body swap,
/// block by block in excitation number.
fn many_body_check(n: usize, pair: (usize, usize)) {
    let target = TargetGate::swap(n, pair.0, pair.1).unwrap();
    let problem = uniform_problem(n, target);
    let out = grape_optimize(&problem, (n * n) as f64, &GrapeOptions { seed: 1, ..Default::default() }).unwrap();
    let eps = out.schedule.infidelity.unwrap();
    assert!(eps <= 1e-4);
    let u = many_body_propagate(&vec![1.0; n - 1], &out.schedule).unwrap();
    let want = many_body_swaps(n, &[pair]).unwrap();
    for (m, f) in sector_fidelities(&u, &want).unwrap().into_iter().enumerate() {
        assert!(1.0 - f <= 10.0 * n as f64 * eps, "N={n} {pair:?} sector {m}: F = {f}");
    }
}

#[test]
fn pulses_implement_the_many_body_gate() {
    many_body_check(4, (1, 3));
    many_body_check(4, (1, 4));
    many_body_check(6, (1, 6));
    many_body_check(8, (1, 5));
}

#[test]
fn logical_swap_moves_both_rails() {
    let g = TargetGate::logical_swap(6, 3).unwrap();
    let mag = g.matrix.map(|z| z.norm());
    for (src, dst) in [(1, 5), (5, 1), (2, 6), (6, 2), (3, 3), (4, 4)] {
        assert!((mag[(dst - 1, src - 1)] - 1.0).abs() < 1e-12, "{src}->{dst}");
    }
}

fn random_unitary(n: usize, seed: &[f64]) -> DMatrix<Complex64> {
    let h = DMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (seed[(r * n + c) % seed.len()], seed[(c * n + r) % seed.len()]);
        Complex64::new(a + b, if r < c { a - b } else if r > c { b - a } else { 0.0 })
    });
    hermitian_exp(&h, 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn propagation_is_unitary(n in 2usize..7, amps in prop::collection::vec(-10.0f64..10.0, 1..40), t in 0.1f64..30.0) {
        let schedule = PulseSchedule::new(t, amps).unwrap();
        let u = propagate(&schedule, &hopping_matrix(&vec![1.0; n - 1]), &control_matrix(n));
        let defect = (u.adjoint() * &u - DMatrix::identity(n, n)).camax();
        prop_assert!(defect < 1e-9, "{defect:e}");
    }

    #[test]
    fn fidelity_is_invariant_under_phase_and_basis_change(
        seed in prop::collection::vec(-1.0f64..1.0, 9),
        phi in -3.2f64..3.2,
    ) {
        let u = random_unitary(3, &seed);
        let g = random_unitary(3, &seed[3..]);
        let w = random_unitary(3, &seed[1..]);
        let f = gate_fidelity(&u, &g).unwrap();
        let phased = g.map(|z| z * Complex64::from_polar(1.0, phi));
        prop_assert!((gate_fidelity(&u, &phased).unwrap() - f).abs() < 1e-12);
        let rotated = gate_fidelity(&(w.adjoint() * &u * &w), &(w.adjoint() * &g * &w)).unwrap();
        prop_assert!((rotated - f).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
    }

    #[test]
    fn ladder_reproduces_closed_forms(c in prop::collection::vec(prop_oneof![-2.0f64..-0.2, 0.2f64..2.0], 1..7)) {
        let n = c.len() + 1;
        let ladder = generator_ladder(&c).unwrap();
        for k in 1..=n {
            for l in k + 1..=n {
                let h = ladder.get(k, l).unwrap();
                prop_assert!((h - h.adjoint()).camax() < 1e-12);
                let err = (h - closed_form(n, k, l).map(|z| z * ladder_sign(k, l))).camax();
                prop_assert!(err < 1e-9, "h_{k}{l} off by {err:e}");
            }
        }
    }
}
