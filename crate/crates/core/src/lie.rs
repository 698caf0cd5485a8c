//! Dynamical Lie-algebra closures over Pauli-word coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{GatewaySet, SpinNetwork};
use crate::pauli::{commutator_into, local_su2, network_operator, PauliSum, PauliWord};

pub const DEFAULT_CLOSURE_CAP: usize = 6;
/// Residual norm a normalized candidate must keep after orthogonalization.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

/// Orthonormal basis of a real span of `i·(Pauli words)`, under the
/// normalized trace inner product `tr(A†B)/2^N`.
#[derive(Debug, Clone)]
pub struct OperatorSpan {
    pub n: usize,
    pub basis: Vec<Vec<f64>>,
}

impl OperatorSpan {
    pub fn new(n: usize) -> OperatorSpan {
        OperatorSpan { n, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Removes the span's components from `v` (modified Gram-Schmidt, twice).
    fn orthogonalize(&self, v: &mut [f64]) {
        for _ in 0..2 {
            for b in &self.basis {
                let d = dot(b, v);
                if d != 0.0 {
                    v.iter_mut().zip(b).for_each(|(y, x)| *y -= d * x);
                }
            }
        }
    }

    /// Adds the normalized residual of `v` if it is independent; returns
    /// the new basis vector.
    fn try_add(&mut self, mut v: Vec<f64>) -> Option<&[f64]> {
        let norm = l2(&v);
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        self.orthogonalize(&mut v);
        let r = l2(&v);
        if r <= INDEPENDENCE_TOL {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= r);
        self.basis.push(v);
        self.basis.last().map(|b| b.as_slice())
    }

    pub fn contains(&self, op: &PauliSum) -> bool {
        let mut v = op.to_dense();
        let norm = l2(&v);
        if norm == 0.0 {
            return true;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        self.orthogonalize(&mut v);
        l2(&v) <= INDEPENDENCE_TOL
    }

    pub fn basis_operators(&self) -> Vec<PauliSum> {
        self.basis.iter().map(|b| PauliSum::from_dense(self.n, b, 0.0)).collect()
    }
}

/// Eight independent lanes so the reduction vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

fn l2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn sparse(v: &[f64], n: usize) -> Vec<(PauliWord, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(i, &a)| (PauliWord::from_index(i, n), a))
        .collect()
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::DimensionCap { what: "Lie closure", n, cap });
    }
    Ok(())
}

/// Smallest real Lie algebra containing the generators.
///
/// Breadth first: every newly admitted basis element is commuted with each
/// generator. Stops once a sweep adds nothing or the space is exhausted.
pub fn closure(generators: &[PauliSum], cap: usize) -> Result<OperatorSpan> {
    let Some(first) = generators.first() else {
        return Err(Error::InvalidArgument("closure needs at least one generator".into()));
    };
    let n = first.n;
    if generators.iter().any(|g| g.n != n) {
        return Err(Error::DimensionMismatch("generators act on different numbers of sites".into()));
    }
    check_cap(n, cap)?;
    let len = 1usize << (2 * n);
    let has_identity = generators.iter().any(|g| g.coefficient(PauliWord::IDENTITY) != 0.0);
    let max_dim = if has_identity { len } else { len - 1 };

    let gens: Vec<Vec<(PauliWord, f64)>> =
        generators.iter().map(|g| g.terms.iter().map(|(&w, &a)| (w, a)).collect()).collect();
    let mut span = OperatorSpan::new(n);
    let mut queue = std::collections::VecDeque::new();
    for g in generators {
        if let Some(b) = span.try_add(g.to_dense()) {
            queue.push_back(sparse(b, n));
        }
    }
    let mut scratch = vec![0.0; len];
    while let Some(v) = queue.pop_front() {
        for g in &gens {
            if span.dim() == max_dim {
                return Ok(span);
            }
            scratch.iter_mut().for_each(|x| *x = 0.0);
            commutator_into(n, g, &v, &mut scratch);
            if let Some(b) = span.try_add(scratch.clone()) {
                queue.push_back(sparse(b, n));
            }
        }
    }
    Ok(span)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Controllability {
    pub controllable: bool,
    pub dim: usize,
    /// `4^N − 1`, the dimension of `su(2^N)`.
    pub target: usize,
}

/// Closure of `iH` with full local control on every gateway node.
pub fn is_controllable(net: &SpinNetwork, gateway: &GatewaySet, cap: usize) -> Result<Controllability> {
    crate::network::ensure_valid(net)?;
    check_cap(net.n, cap)?;
    let mut gens = vec![network_operator(net)];
    for &c in gateway.nodes() {
        gens.extend(local_su2(net.n, c));
    }
    let span = closure(&gens, cap)?;
    let target = (1usize << (2 * net.n)) - 1;
    Ok(Controllability { controllable: span.dim() >= target, dim: span.dim(), target })
}

/// Whether the closure of `[iH_nm, 𝓛(n)] ∪ 𝓛(n)` is all of `𝓛(n, m)`, with
/// `n` the lower-numbered site in the coupling's support.
pub fn is_algebraically_propagating(coupling: &PauliSum) -> Result<bool> {
    let support = coupling.support();
    match support.count_ones() {
        0 | 1 => return Ok(false),
        2 => {}
        k => return Err(Error::InvalidArgument(format!("coupling acts on {k} sites, expected 2"))),
    }
    let sites: Vec<usize> = (1..=coupling.n).filter(|k| support & (1 << (k - 1)) != 0).collect();
    let h = coupling.restrict(&sites)?;
    let local = local_su2(2, 1);
    let mut gens: Vec<PauliSum> = local.iter().map(|s| crate::pauli::commutator(&h, s)).collect();
    gens.extend(local);
    let span = closure(&gens, 2)?;
    Ok(span.dim() == 15)
}

/// All words of weight at most two, identity included.
fn two_body_words(n: usize) -> Vec<PauliWord> {
    (0..1usize << (2 * n))
        .map(|i| PauliWord::from_index(i, n))
        .filter(|w| w.weight() <= 2)
        .collect()
}

pub fn random_two_body<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliSum {
    let mut s = PauliSum::zero(n);
    for w in two_body_words(n) {
        s.add_term(w, rng.random_range(-1.0..=1.0));
    }
    s
}

/// `dim` of the closure of `{iA, iB}` and whether it is all of `u(2^N)`.
pub fn pair_closure_dim(a: &PauliSum, b: &PauliSum, cap: usize) -> Result<(bool, usize)> {
    let span = closure(&[a.clone(), b.clone()], cap)?;
    Ok((span.dim() == 1 << (2 * a.n), span.dim()))
}

/// Fraction of random two-body pairs `(A, B)` whose closure is `u(2^N)`.
pub fn random_pair_universality_test(n: usize, trials: usize, seed: u64, cap: usize) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    check_cap(n, cap)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..trials).map(|_| master.random()).collect();
    let hits = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let a = random_two_body(n, &mut rng);
            let b = random_two_body(n, &mut rng);
            pair_closure_dim(&a, &b, cap).map(|(full, _)| full as usize)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / trials as f64)
}
