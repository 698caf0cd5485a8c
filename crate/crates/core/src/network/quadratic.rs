//! Quadratic (free quasi-particle) Hamiltonians `Σ A a†a + ½(B a†a† + h.c.)`
//! and their `2N × 2N` coefficient matrix `M = [[A, B], [−εB*, −εA*]]`.

use nalgebra::DMatrix;

use super::{ensure_valid, ModelKind, SpinNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Fermion,
    Boson,
}

impl Statistics {
    /// ε = +1 for fermions, −1 for bosons.
    pub fn epsilon(self) -> f64 {
        match self {
            Statistics::Fermion => 1.0,
            Statistics::Boson => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    /// Hopping block, real symmetric.
    pub a: DMatrix<f64>,
    /// Pairing block; antisymmetric for fermions, symmetric for bosons.
    pub b: DMatrix<f64>,
    pub statistics: Statistics,
}

const HERMITICITY_TOL: f64 = 1e-12;

impl QuadraticSpec {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// `A = Aᵀ` and `Bᵀ = −εB`.
    pub fn check(&self) -> Result<()> {
        let n = self.a.nrows();
        if self.a.ncols() != n || self.b.nrows() != n || self.b.ncols() != n {
            return Err(Error::InvalidQuadraticSpec("A and B must both be N×N".into()));
        }
        let scale = 1.0 + self.a.amax().max(self.b.amax());
        if (&self.a - self.a.transpose()).amax() > HERMITICITY_TOL * scale {
            return Err(Error::InvalidQuadraticSpec("A must be symmetric".into()));
        }
        let eps = self.statistics.epsilon();
        if (self.b.transpose() + &self.b * eps).amax() > HERMITICITY_TOL * scale {
            let want = if eps > 0.0 { "antisymmetric" } else { "symmetric" };
            return Err(Error::InvalidQuadraticSpec(format!("B must be {want}")));
        }
        Ok(())
    }
}

pub fn build_m_matrix(spec: &QuadraticSpec) -> Result<DMatrix<f64>> {
    spec.check()?;
    let n = spec.n();
    let eps = spec.statistics.epsilon();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&spec.a);
    m.view_mut((0, n), (n, n)).copy_from(&spec.b);
    m.view_mut((n, 0), (n, n)).copy_from(&(&spec.b * -eps));
    m.view_mut((n, n), (n, n)).copy_from(&(&spec.a * -eps));
    Ok(m)
}

/// Hopping and pairing blocks of a quadratic chain: `A` tridiagonal with
/// `−2b_n` on the diagonal and `c_n` beside it, `B` with `±γc_n` beside the
/// diagonal (antisymmetric for fermions, symmetric for bosons).
pub fn quadratic_spec_from_chain(net: &SpinNetwork) -> Result<QuadraticSpec> {
    let statistics = match net.model {
        ModelKind::QuadraticFermion => Statistics::Fermion,
        ModelKind::QuadraticBoson => Statistics::Boson,
        ModelKind::ExcitationPreserving => {
            return Err(Error::WrongModel {
                operation: "quadratic_spec_from_chain",
                expected: "quadratic_fermion or quadratic_boson",
            })
        }
    };
    ensure_valid(net)?;
    let n = net.n;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = -2.0 * net.fields[i];
    }
    for c in &net.couplings {
        let (lo, hi) = (c.key().0 - 1, c.key().1 - 1);
        a[(lo, hi)] = c.strength;
        a[(hi, lo)] = c.strength;
        b[(lo, hi)] = net.gamma * c.strength;
        b[(hi, lo)] = -statistics.epsilon() * net.gamma * c.strength;
    }
    Ok(QuadraticSpec { a, b, statistics })
}
