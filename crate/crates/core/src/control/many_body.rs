//! Dense `2^N` cross-checks of single-particle control results.
//!
//! Occupation means spin up, `a_k = σ_k⁻ ∏_{m<k} Z_m` with node `k` on bit
//! `N − k`, so `Z_k = 1 − 2a_k†a_k`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::grape::{hermitian_exp, propagate, PulseSchedule};
use super::ladder::{closed_form, hopping_matrix};
use crate::error::{Error, Result};

/// Largest chain handled by the dense check.
pub const MANY_BODY_CAP: usize = 10;

fn bit(n: usize, k: usize) -> usize {
    1 << (n - k)
}

/// Annihilation operators `a_1..a_N` as dense real matrices.
pub fn annihilators(n: usize) -> Result<Vec<DMatrix<f64>>> {
    if n == 0 || n > MANY_BODY_CAP {
        return Err(Error::DimensionCap { what: "dense fermion register", n, cap: MANY_BODY_CAP });
    }
    let dim = 1 << n;
    Ok((1..=n)
        .map(|k| {
            let mut a = DMatrix::zeros(dim, dim);
            for state in 0..dim {
                if state & bit(n, k) != 0 {
                    let before = (1..k).filter(|&m| state & bit(n, m) != 0).count();
                    a[(state ^ bit(n, k), state)] = if before % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
            a
        })
        .collect())
}

/// `Σ_ab A_ab a_a†a_b` for a single-particle matrix `A`.
pub fn quadratic_operator(single: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = single.nrows();
    let a = annihilators(n)?;
    let dim = 1 << n;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let coef = single[(i, j)];
            if coef != Complex64::new(0.0, 0.0) {
                let term = a[i].transpose() * &a[j];
                out += term.map(|x| coef * x);
            }
        }
    }
    Ok(out)
}

/// `Z_1` on the full register.
pub fn z_first(n: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            Complex64::new(0.0, 0.0)
        } else if r & bit(n, 1) != 0 {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Runs the pulse on the full register with drift `Σ c_n(a_n†a_{n+1} + h.c.)`
/// and control `Z_1`.
pub fn many_body_propagate(couplings: &[f64], schedule: &PulseSchedule) -> Result<DMatrix<Complex64>> {
    let n = couplings.len() + 1;
    let drift = quadratic_operator(&hopping_matrix(couplings))?;
    Ok(propagate(schedule, &drift, &z_first(n)))
}

/// `∏ exp(−iπh_kl/2)` on the full register, applied right to left.
pub fn many_body_swaps(n: usize, pairs: &[(usize, usize)]) -> Result<DMatrix<Complex64>> {
    let dim = 1 << n;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for &(k, l) in pairs.iter().rev() {
        let q = quadratic_operator(&closed_form(n, k.min(l), k.max(l)))?;
        u = hermitian_exp(&q, std::f64::consts::FRAC_PI_2) * u;
    }
    Ok(u)
}

/// Gate fidelity within each fixed-excitation-number block. A single-particle
/// global phase `e^{iφ}` becomes `e^{iφm}` on block `m`, so only block-wise
/// agreement is meaningful.
pub fn sector_fidelities(u: &DMatrix<Complex64>, target: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if u.shape() != target.shape() || !u.nrows().is_power_of_two() {
        return Err(Error::DimensionMismatch(format!("{:?} against {:?}", u.shape(), target.shape())));
    }
    let n = u.nrows().trailing_zeros() as usize;
    Ok((0..=n)
        .map(|m| {
            let states: Vec<usize> = (0..u.nrows()).filter(|s| s.count_ones() as usize == m).collect();
            let mut overlap = Complex64::new(0.0, 0.0);
            for &a in &states {
                for &b in &states {
                    overlap += u[(b, a)].conj() * target[(b, a)];
                }
            }
            (overlap.norm() / states.len() as f64).powi(2)
        })
        .collect())
}
