//! The `h_kl` generators reachable from a controlled end field on a
//! free-fermion chain, in the single-particle picture where a quadratic
//! operator `Σ A_ab a_a†a_b` is the `N × N` matrix `A` and commutators of
//! operators are commutators of matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn unit(n: usize, a: usize, b: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n, n);
    m[(a - 1, b - 1)] = Complex64::new(1.0, 0.0);
    m
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// Hilbert–Schmidt projection coefficient of `x` on `y`.
fn coefficient(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> Complex64 {
    y.dotc(x) / y.norm_squared()
}

/// Nearest-neighbour hopping `Σ c_n (|n⟩⟨n+1| + |n+1⟩⟨n|)`.
pub fn hopping_matrix(c: &[f64]) -> DMatrix<Complex64> {
    let n = c.len() + 1;
    let mut h = DMatrix::zeros(n, n);
    for (i, &x) in c.iter().enumerate() {
        h[(i, i + 1)] = Complex64::new(x, 0.0);
        h[(i + 1, i)] = Complex64::new(x, 0.0);
    }
    h
}

/// `h_1 = Z_1 = 1 − 2a_1†a_1` without its identity part.
pub fn control_matrix(n: usize) -> DMatrix<Complex64> {
    unit(n, 1, 1) * Complex64::new(-2.0, 0.0)
}

/// Closed form of `h_kl` for `k < l`: `|k⟩⟨l| + |l⟩⟨k|` when `l − k` is odd
/// and `−i(|k⟩⟨l| − |l⟩⟨k|)` when it is even.
pub fn closed_form(n: usize, k: usize, l: usize) -> DMatrix<Complex64> {
    let (kl, lk) = (unit(n, k, l), unit(n, l, k));
    if (l - k) % 2 == 1 {
        kl + lk
    } else {
        (kl - lk) * -I
    }
}

/// Sign relating the commutator construction to [`closed_form`]: the
/// double commutator gives `ih_12 = −i(a_1†a_2 + a_2†a_1)`, and the sign
/// alternates in pairs along the distance `l − k`.
pub fn ladder_sign(k: usize, l: usize) -> f64 {
    if matches!(l.abs_diff(k) % 4, 0 | 1) {
        -1.0
    } else {
        1.0
    }
}

/// `h_kl` for every `1 ≤ k < l ≤ N`, built from `h_1` and `H` by commutators.
#[derive(Debug, Clone)]
pub struct GeneratorLadder {
    pub n: usize,
    pub h1: DMatrix<Complex64>,
    pub drift: DMatrix<Complex64>,
    pub h: BTreeMap<(usize, usize), DMatrix<Complex64>>,
}

impl GeneratorLadder {
    pub fn get(&self, k: usize, l: usize) -> Option<&DMatrix<Complex64>> {
        self.h.get(&(k.min(l), k.max(l)))
    }
}

/// Raises `h_12` along the chain: the commutator `[ih_{1l}, iH]` equals
/// `c_l·ih_{1,l+1}` plus components along `h_{1,l−1}` and `h_{2,l}`, which are
/// projected out. Lower-left elements follow from `ih_kl ∝ [ih_{1k}, ih_{1l}]`.
pub fn generator_ladder(c: &[f64]) -> Result<GeneratorLadder> {
    let n = c.len() + 1;
    if n < 2 {
        return Err(Error::InvalidArgument("the ladder needs at least two sites".into()));
    }
    if let Some(k) = c.iter().position(|&x| x == 0.0) {
        return Err(Error::LadderBroken(k + 1));
    }
    let drift = hopping_matrix(c);
    let h1 = control_matrix(n);
    let (ih1, ih) = (&h1 * I, &drift * I);
    let mut h: BTreeMap<(usize, usize), DMatrix<Complex64>> = BTreeMap::new();
    let ih12 = commutator(&ih1, &commutator(&ih1, &ih)) / Complex64::new(4.0 * c[0], 0.0);
    h.insert((1, 2), &ih12 * -I);
    for l in 2..n {
        let ih1l = &h[&(1, l)] * I;
        let mut raised = commutator(&ih1l, &ih);
        let mut known: Vec<DMatrix<Complex64>> = (2..l).map(|m| h[&(1, m)].clone()).collect();
        if l > 2 {
            known.push(commutator(&(&h[&(1, 2)] * I), &ih1l) * -I);
        }
        known.extend((1..=n).map(|j| unit(n, j, j)));
        for k in known {
            let k = k * I;
            let a = coefficient(&raised, &k);
            raised -= k * a;
        }
        h.insert((1, l + 1), raised * (-I / c[l - 1]));
    }
    for k in 2..n {
        for l in k + 1..=n {
            let ikl = commutator(&(&h[&(1, k)] * I), &(&h[&(1, l)] * I));
            h.insert((k, l), ikl * -I);
        }
    }
    Ok(GeneratorLadder { n, h1, drift, h })
}
