//! Piecewise-constant control of `H(t) = H_0 + u(t)·H_c` and gradient
//! optimization of the gate fidelity.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ladder::closed_form;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, unitarity_defect};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenvalues and eigenvectors of a Hermitian matrix, using the real
/// solver when the matrix has no imaginary part.
pub(crate) fn hermitian_eigen(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    if a.iter().all(|z| z.im == 0.0) {
        let eig = sym_eigen(&a.map(|z| z.re));
        (eig.values, eig.vectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(a.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }
}

/// `exp(−i·a·t)` for Hermitian `a`.
pub fn hermitian_exp(a: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let (values, v) = hermitian_eigen(a);
    phase_product(&values, &v, t)
}

fn phase_product(values: &[f64], v: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::from_polar(1.0, -values[j] * t);
    }
    scaled * v.adjoint()
}

/// Piecewise-constant amplitudes on `S` equal segments of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub duration: f64,
    pub amplitudes: Vec<f64>,
    /// `1 − F` against the target the schedule was optimized for.
    pub infidelity: Option<f64>,
}

impl PulseSchedule {
    pub fn new(duration: f64, amplitudes: Vec<f64>) -> Result<PulseSchedule> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("a schedule needs at least one segment".into()));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
        }
        if amplitudes.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(PulseSchedule { duration, amplitudes, infidelity: None })
    }

    pub fn segments(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.segments() as f64
    }

    /// `(segment, t_start, amplitude)` rows.
    pub fn rows(&self) -> Vec<(usize, f64, f64)> {
        self.amplitudes.iter().enumerate().map(|(s, &u)| (s, s as f64 * self.dt(), u)).collect()
    }
}

/// `U(T) = U_S ⋯ U_1` with `U_s = exp(−i(H_0 + u_s H_c)·T/S)`.
pub fn propagate(schedule: &PulseSchedule, drift: &DMatrix<Complex64>, control: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dt = schedule.dt();
    let mut u = DMatrix::<Complex64>::identity(drift.nrows(), drift.ncols());
    for &a in &schedule.amplitudes {
        u = hermitian_exp(&(drift + control * Complex64::new(a, 0.0)), dt) * u;
    }
    u
}

/// `(|tr U†U_g| / dim)²`.
pub fn gate_fidelity(u: &DMatrix<Complex64>, target: &DMatrix<Complex64>) -> Result<f64> {
    if u.shape() != target.shape() || !u.is_square() {
        return Err(Error::DimensionMismatch(format!("{:?} against {:?}", u.shape(), target.shape())));
    }
    let overlap: Complex64 = u.iter().zip(target.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok((overlap.norm() / u.nrows() as f64).powi(2))
}

/// Fidelity restricted to the span of the given (1-based) basis states.
pub fn subspace_fidelity(u: &DMatrix<Complex64>, target: &DMatrix<Complex64>, states: &[usize]) -> Result<f64> {
    if u.shape() != target.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} against {:?}", u.shape(), target.shape())));
    }
    let mut overlap = ZERO;
    for &a in states {
        for &b in states {
            overlap += u[(b - 1, a - 1)].conj() * target[(b - 1, a - 1)];
        }
    }
    Ok((overlap.norm() / states.len() as f64).powi(2))
}

/// A unitary to reach, optionally labelled by the `h_kl` it exponentiates.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetGate {
    pub matrix: DMatrix<Complex64>,
    pub label: Option<(usize, usize)>,
}

impl TargetGate {
    pub fn new(matrix: DMatrix<Complex64>, label: Option<(usize, usize)>) -> Result<TargetGate> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("target gate must be square".into()));
        }
        let defect = unitarity_defect(&matrix);
        if defect > 1e-10 {
            return Err(Error::InvalidArgument(format!("target gate is not unitary (defect {defect:e})")));
        }
        Ok(TargetGate { matrix, label })
    }

    /// `exp(−iπh_kl/2)` in the single-particle picture of an `n`-site chain.
    pub fn swap(n: usize, k: usize, l: usize) -> Result<TargetGate> {
        let (k, l) = (k.min(l), k.max(l));
        if k == l || k == 0 || l > n {
            return Err(Error::InvalidArgument(format!("swap {k},{l} is not a pair of distinct sites of 1..={n}")));
        }
        TargetGate::new(hermitian_exp(&closed_form(n, k, l), std::f64::consts::FRAC_PI_2), Some((k, l)))
    }

    /// Moves logical qubit `m` (physical sites `2m − 1, 2m`) to the control
    /// end: `exp(−iπh_{1,2m−1}/2)·exp(−iπh_{2,2m}/2)`.
    pub fn logical_swap(n: usize, m: usize) -> Result<TargetGate> {
        if m < 2 || 2 * m > n {
            return Err(Error::InvalidArgument(format!("logical qubit {m} does not fit a {n}-site chain beyond the control pair")));
        }
        let a = TargetGate::swap(n, 1, 2 * m - 1)?;
        let b = TargetGate::swap(n, 2, 2 * m)?;
        TargetGate::new(a.matrix * b.matrix, None)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub drift: DMatrix<Complex64>,
    pub control: DMatrix<Complex64>,
    pub target: TargetGate,
}

impl ControlProblem {
    pub fn new(drift: DMatrix<Complex64>, control: DMatrix<Complex64>, target: TargetGate) -> Result<ControlProblem> {
        let d = target.dim();
        if drift.shape() != (d, d) || control.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "drift {:?} and control {:?} for a {d}-dimensional target",
                drift.shape(),
                control.shape()
            )));
        }
        for (name, m) in [("drift", &drift), ("control", &control)] {
            if (m - m.adjoint()).camax() > 1e-12 {
                return Err(Error::InvalidArgument(format!("{name} is not Hermitian")));
            }
        }
        Ok(ControlProblem { drift, control, target })
    }

    pub fn fidelity(&self, schedule: &PulseSchedule) -> f64 {
        let u = propagate(schedule, &self.drift, &self.control);
        gate_fidelity(&u, &self.target.matrix).expect("shapes checked at construction")
    }

    /// `F` and its exact gradient with respect to every amplitude.
    pub fn fidelity_and_gradient(&self, duration: f64, amplitudes: &[f64]) -> (f64, Vec<f64>) {
        let d = self.target.dim();
        let s = amplitudes.len();
        let dt = duration / s as f64;
        let eigs: Vec<(Vec<f64>, DMatrix<Complex64>)> =
            amplitudes.iter().map(|&a| hermitian_eigen(&(&self.drift + &self.control * Complex64::new(a, 0.0)))).collect();
        let steps: Vec<DMatrix<Complex64>> = eigs.iter().map(|(l, v)| phase_product(l, v, dt)).collect();

        // forward[s] = U_s ⋯ U_1, forward[0] = I.
        let mut forward = Vec::with_capacity(s + 1);
        forward.push(DMatrix::<Complex64>::identity(d, d));
        for step in &steps {
            let next = step * forward.last().unwrap();
            forward.push(next);
        }
        let gt = self.target.matrix.adjoint();
        let g: Complex64 = (&gt * &forward[s]).trace();
        let norm = (d * d) as f64;

        let mut grad = vec![0.0; s];
        let mut back = gt;
        for idx in (0..s).rev() {
            let (values, v) = &eigs[idx];
            let x = v.adjoint() * &self.control * v;
            let w = v.adjoint() * &forward[idx] * &back * v;
            let mut dg = ZERO;
            for j in 0..d {
                let ej = Complex64::from_polar(1.0, -values[j] * dt);
                for k in 0..d {
                    let diff = values[j] - values[k];
                    let phi = if (diff * dt).abs() > 1e-9 {
                        (ej - Complex64::from_polar(1.0, -values[k] * dt)) / Complex64::new(0.0, -diff * dt)
                    } else {
                        ej
                    };
                    dg += w[(k, j)] * phi * x[(j, k)];
                }
            }
            dg *= Complex64::new(0.0, -dt);
            grad[idx] = 2.0 * (g.conj() * dg).re / norm;
            back *= &steps[idx];
        }
        (g.norm_sqr() / norm, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ascent {
    /// Steepest ascent with backtracking.
    Gradient,
    /// Limited-memory BFGS directions with the same backtracking.
    Lbfgs { memory: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrapeOptions {
    /// Segment count; `None` uses `10·T`.
    pub segments: Option<usize>,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Amplitudes are kept within `±bound`.
    pub bound: f64,
    pub seed: u64,
    pub ascent: Ascent,
    pub initial_step: f64,
    pub max_halvings: usize,
}

impl Default for GrapeOptions {
    fn default() -> Self {
        GrapeOptions {
            segments: None,
            epsilon: 1e-4,
            max_iterations: 5000,
            bound: 10.0,
            seed: 0,
            ascent: Ascent::Lbfgs { memory: 20 },
            initial_step: 1.0,
            max_halvings: 30,
        }
    }
}

impl GrapeOptions {
    pub fn segments_for(&self, duration: f64) -> usize {
        self.segments.unwrap_or_else(|| ((10.0 * duration).round() as usize).max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrapeOutcome {
    pub schedule: PulseSchedule,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-loop recursion for the ascent direction `H·g`.
fn lbfgs_direction(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y) in history.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(q, y)| *q -= a * y);
        alphas.push((a, rho));
    }
    if let Some((s, y)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|q| *q *= gamma);
    } else {
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if scale > 0.0 {
            q.iter_mut().for_each(|q| *q /= scale);
        }
    }
    for ((s, y), (a, rho)) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(q, s)| *q += (a - b) * s);
    }
    q
}

/// Maximizes the gate fidelity over piecewise-constant amplitudes. Stops at
/// `1 − F ≤ ε`, at the iteration cap, or when no step improves `F`; the
/// achieved infidelity is reported either way.
pub fn grape_optimize(problem: &ControlProblem, duration: f64, opts: &GrapeOptions) -> Result<GrapeOutcome> {
    let s = opts.segments_for(duration);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let initial: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..=1.0) / duration).collect();
    let mut schedule = PulseSchedule::new(duration, initial)?;
    let clamp = |u: f64| u.clamp(-opts.bound, opts.bound);
    schedule.amplitudes.iter_mut().for_each(|u| *u = clamp(*u));

    let (mut f, mut grad) = problem.fidelity_and_gradient(duration, &schedule.amplitudes);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    let mut iterations = 0;
    while 1.0 - f > opts.epsilon && iterations < opts.max_iterations {
        iterations += 1;
        let mut direction = match opts.ascent {
            Ascent::Gradient => grad.clone(),
            Ascent::Lbfgs { .. } => lbfgs_direction(&grad, &history),
        };
        if dot(&direction, &grad) <= 0.0 {
            history.clear();
            direction = lbfgs_direction(&grad, &history);
        }
        let slope = dot(&direction, &grad);
        let mut step = opts.initial_step;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = schedule.amplitudes.iter().zip(&direction).map(|(u, d)| clamp(u + step * d)).collect();
            let (ft, gt) = problem.fidelity_and_gradient(duration, &trial);
            if ft > f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step /= 2.0;
        }
        let Some((trial, ft, gt)) = accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };
        if let Ascent::Lbfgs { memory } = opts.ascent {
            let sv: Vec<f64> = trial.iter().zip(&schedule.amplitudes).map(|(a, b)| a - b).collect();
            // Ascent on F is descent on −F: y = ∇(−F)_new − ∇(−F)_old.
            let yv: Vec<f64> = grad.iter().zip(&gt).map(|(a, b)| a - b).collect();
            if dot(&sv, &yv) > 1e-12 * dot(&yv, &yv).sqrt() * dot(&sv, &sv).sqrt() {
                history.push_back((sv, yv));
                if history.len() > memory {
                    history.pop_front();
                }
            }
        }
        schedule.amplitudes = trial;
        f = ft;
        grad = gt;
    }
    schedule.infidelity = Some((1.0 - f).max(0.0));
    Ok(GrapeOutcome { converged: 1.0 - f <= opts.epsilon, schedule, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{control_matrix, hopping_matrix};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn fidelity_basics() {
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert_eq!(gate_fidelity(&id, &x).unwrap(), 0.0);
        assert!((gate_fidelity(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let phased = &x * Complex64::from_polar(1.0, 0.7);
        assert!((gate_fidelity(&x, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert!(gate_fidelity(&id, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn zero_amplitudes_give_free_evolution() {
        let h = hopping_matrix(&[1.0, 0.6, 1.2]);
        let schedule = PulseSchedule::new(2.5, vec![0.0; 7]).unwrap();
        let u = propagate(&schedule, &h, &control_matrix(4));
        assert!((u - hermitian_exp(&h, 2.5)).camax() < 1e-12);
    }

    #[test]
    fn single_segment_z_rotation() {
        let z = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]));
        let t = 2.0;
        let schedule = PulseSchedule::new(t, vec![std::f64::consts::PI / t]).unwrap();
        let u = propagate(&schedule, &DMatrix::zeros(2, 2), &z);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -std::f64::consts::PI)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, std::f64::consts::PI)).norm() < 1e-14);
    }

    #[test]
    fn repeated_segments_split_consistently() {
        let h = hopping_matrix(&[1.0, 0.8]);
        let ctrl = control_matrix(3);
        let coarse = PulseSchedule::new(3.0, vec![0.4, -0.9, 1.3]).unwrap();
        let fine = PulseSchedule::new(3.0, coarse.amplitudes.iter().flat_map(|&u| [u, u]).collect()).unwrap();
        assert!((propagate(&coarse, &h, &ctrl) - propagate(&fine, &h, &ctrl)).camax() < 1e-12);
        assert!(unitarity_defect(&propagate(&fine, &h, &ctrl)) < 1e-12);
    }

    #[test]
    fn swap_targets_are_unitary_swaps() {
        let t = TargetGate::swap(5, 2, 4).unwrap();
        assert!(unitarity_defect(&t.matrix) < 1e-13);
        assert!(t.matrix[(1, 1)].norm() < 1e-14 && (t.matrix[(3, 1)].norm() - 1.0).abs() < 1e-14);
        assert!((t.matrix[(0, 0)] - c(1.0)).norm() < 1e-14);
        assert!(TargetGate::swap(5, 3, 3).is_err());
        assert!(TargetGate::logical_swap(6, 3).is_ok());
        assert!(TargetGate::logical_swap(6, 4).is_err());
    }

    #[test]
    fn free_evolution_target_is_met_at_once() {
        let h = hopping_matrix(&[1.0, 1.0, 1.0]);
        let target = TargetGate::new(hermitian_exp(&h, 4.0), None).unwrap();
        let problem = ControlProblem::new(h, control_matrix(4), target).unwrap();
        let opts = GrapeOptions { epsilon: 1e-3, ..Default::default() };
        let out = grape_optimize(&problem, 4.0, &opts).unwrap();
        assert!(out.converged && out.iterations <= 2, "{out:?}");
    }

    #[test]
    fn gradient_matches_central_differences() {
        let problem = ControlProblem::new(hopping_matrix(&[1.0, 0.8, 1.1]), control_matrix(4), TargetGate::swap(4, 1, 4).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let amps: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (f, grad) = problem.fidelity_and_gradient(3.0, &amps);
        let h = 1e-6;
        for s in 0..amps.len() {
            let mut up = amps.clone();
            up[s] += h;
            let mut down = amps.clone();
            down[s] -= h;
            let fd = (problem.fidelity_and_gradient(3.0, &up).0 - problem.fidelity_and_gradient(3.0, &down).0) / (2.0 * h);
            assert!((fd - grad[s]).abs() <= 1e-5 * grad[s].abs().max(1e-3), "segment {s}: {fd} vs {}", grad[s]);
        }
        let schedule = PulseSchedule::new(3.0, amps).unwrap();
        assert!((problem.fidelity(&schedule) - f).abs() < 1e-13);
    }

    #[test]
    fn epsilon_one_stops_immediately() {
        let problem = ControlProblem::new(hopping_matrix(&[1.0; 3]), control_matrix(4), TargetGate::swap(4, 1, 3).unwrap()).unwrap();
        let out = grape_optimize(&problem, 16.0, &GrapeOptions { epsilon: 1.0, ..Default::default() }).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
    }
}
