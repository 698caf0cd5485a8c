//! Dense matrix representations of the excitation-preserving Hamiltonian
//!
//! `H = Σ_(m,n)∈E c_mn (X_m X_n + Y_m Y_n + Δ Z_m Z_n) + Σ_n b_n Z_n`
//!
//! Computational basis: bit `N − k` of the state index is set iff spin `k`
//! is up, so node 1 is the most significant position and index 0 is the
//! all-down state. `Z` acts as `+1` on down and `−1` on up.

use nalgebra::DMatrix;

use super::{ensure_valid, ModelKind, SpinNetwork};
use crate::error::{Error, Result};

pub const DEFAULT_DENSE_CAP: usize = 12;

#[inline]
fn node_bit(n: usize, node: usize) -> usize {
    1usize << (n - node)
}

#[inline]
fn z_value(n: usize, state: usize, node: usize) -> f64 {
    if state & node_bit(n, node) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨s|H|s⟩` for a computational basis state.
fn diagonal_energy(net: &SpinNetwork, state: usize) -> f64 {
    let n = net.n;
    let zz: f64 = net
        .couplings
        .iter()
        .map(|c| c.strength * net.delta * z_value(n, state, c.a) * z_value(n, state, c.b))
        .sum();
    let z: f64 = net
        .fields
        .iter()
        .enumerate()
        .map(|(i, b)| b * z_value(n, state, i + 1))
        .sum();
    zz + z
}

/// `⟨s'|XX + YY|s⟩` is 2 when the edge's spins are anti-aligned in `s` and
/// `s'` flips both of them.
const FLIP_FLOP: f64 = 2.0;

fn require_excitation_preserving(net: &SpinNetwork, operation: &'static str) -> Result<()> {
    if net.model != ModelKind::ExcitationPreserving {
        return Err(Error::WrongModel { operation, expected: "excitation_preserving" });
    }
    Ok(())
}

pub fn build_full_hamiltonian(net: &SpinNetwork, cap: usize) -> Result<DMatrix<f64>> {
    require_excitation_preserving(net, "build_full_hamiltonian")?;
    ensure_valid(net)?;
    if net.n > cap {
        return Err(Error::DimensionCap { what: "dense 2^N Hamiltonian", n: net.n, cap });
    }
    let n = net.n;
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        h[(s, s)] = diagonal_energy(net, s);
        for c in &net.couplings {
            let (ba, bb) = (node_bit(n, c.a), node_bit(n, c.b));
            let up_a = s & ba != 0;
            let up_b = s & bb != 0;
            if up_a != up_b {
                let t = s ^ ba ^ bb;
                h[(t, s)] += FLIP_FLOP * c.strength;
            }
        }
    }
    Ok(h)
}

/// `H` restricted to the single-excitation states `|m⟩ = only spin m up`,
/// ordered by node index.
pub fn build_single_excitation_matrix(net: &SpinNetwork) -> Result<DMatrix<f64>> {
    require_excitation_preserving(net, "build_single_excitation_matrix")?;
    ensure_valid(net)?;
    let n = net.n;
    let mut h = DMatrix::zeros(n, n);
    for m in 1..=n {
        h[(m - 1, m - 1)] = diagonal_energy(net, node_bit(n, m));
    }
    for c in &net.couplings {
        h[(c.a - 1, c.b - 1)] += FLIP_FLOP * c.strength;
        h[(c.b - 1, c.a - 1)] += FLIP_FLOP * c.strength;
    }
    Ok(h)
}

/// Energy `E_0 = ⟨0|H|0⟩` of the all-down state.
pub fn vacuum_energy(net: &SpinNetwork) -> f64 {
    diagonal_energy(net, 0)
}
