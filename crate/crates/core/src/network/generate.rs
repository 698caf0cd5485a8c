//! Standard and random network families.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Coupling, SpinNetwork};

/// Sampling ranges for random couplings and fields.
#[derive(Debug, Clone)]
pub struct ParameterRanges {
    pub coupling: (f64, f64),
    pub field: (f64, f64),
    /// Flip each coupling's sign with probability ½.
    pub random_sign: bool,
}

impl Default for ParameterRanges {
    fn default() -> Self {
        ParameterRanges { coupling: (0.5, 1.5), field: (-0.5, 0.5), random_sign: false }
    }
}

impl ParameterRanges {
    fn coupling<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let c = rng.random_range(self.coupling.0..=self.coupling.1);
        if self.random_sign && rng.random_bool(0.5) {
            -c
        } else {
            c
        }
    }

    fn fields<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                if self.field.0 == self.field.1 {
                    self.field.0
                } else {
                    rng.random_range(self.field.0..=self.field.1)
                }
            })
            .collect()
    }
}

fn build(n: usize, delta: f64, edges: Vec<(usize, usize, f64)>, fields: Vec<f64>) -> SpinNetwork {
    SpinNetwork::heisenberg(n, delta, &edges, fields)
}

pub fn uniform_chain(n: usize, c: f64, delta: f64) -> SpinNetwork {
    build(n, delta, (1..n).map(|i| (i, i + 1, c)).collect(), vec![0.0; n])
}

pub fn random_chain<R: Rng + ?Sized>(n: usize, delta: f64, ranges: &ParameterRanges, rng: &mut R) -> SpinNetwork {
    let edges = (1..n).map(|i| (i, i + 1, ranges.coupling(rng))).collect();
    build(n, delta, edges, ranges.fields(n, rng))
}

/// Chain with nearest and next-nearest neighbour couplings.
pub fn next_nearest_chain(n: usize, c: f64, delta: f64) -> SpinNetwork {
    let mut edges = Vec::new();
    for i in 1..=n {
        if i < n {
            edges.push((i, i + 1, c));
        }
        if i + 2 <= n {
            edges.push((i, i + 2, c));
        }
    }
    build(n, delta, edges, vec![0.0; n])
}

/// Node 1 at the centre, nodes `2..=n` as leaves.
pub fn star_graph(n: usize, c: f64) -> SpinNetwork {
    build(n, 1.0, (2..=n).map(|i| (1, i, c)).collect(), vec![0.0; n])
}

pub fn complete_graph(n: usize, c: f64, delta: f64) -> SpinNetwork {
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            edges.push((a, b, c));
        }
    }
    build(n, delta, edges, vec![0.0; n])
}

pub fn cycle_graph(n: usize, c: f64, delta: f64) -> SpinNetwork {
    let mut edges: Vec<_> = (1..n).map(|i| (i, i + 1, c)).collect();
    if n > 2 {
        edges.push((1, n, c));
    }
    build(n, delta, edges, vec![0.0; n])
}

/// `rows × cols` square lattice, nodes numbered row-major.
pub fn grid_graph<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    delta: f64,
    ranges: &ParameterRanges,
    rng: &mut R,
) -> SpinNetwork {
    let id = |r: usize, c: usize| r * cols + c + 1;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1), ranges.coupling(rng)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c), ranges.coupling(rng)));
            }
        }
    }
    let n = rows * cols;
    build(n, delta, edges, ranges.fields(n, rng))
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability `extra_edge_prob`.
pub fn random_connected<R: Rng + ?Sized>(
    n: usize,
    extra_edge_prob: f64,
    delta: f64,
    ranges: &ParameterRanges,
    rng: &mut R,
) -> SpinNetwork {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut present = std::collections::BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        let child = order[i];
        present.insert((parent.min(child), parent.max(child)));
    }
    for a in 1..=n {
        for b in a + 1..=n {
            if !present.contains(&(a, b)) && rng.random_bool(extra_edge_prob) {
                present.insert((a, b));
            }
        }
    }
    let edges = present.into_iter().map(|(a, b)| (a, b, ranges.coupling(rng))).collect();
    build(n, delta, edges, ranges.fields(n, rng))
}

impl SpinNetwork {
    /// Same graph and fields with every coupling replaced by `c`.
    pub fn with_uniform_couplings(mut self, c: f64) -> Self {
        for (k, e) in self.couplings.iter_mut().enumerate() {
            *e = Coupling::new(e.a, e.b, c);
            self.signs[k] = super::Sign::of(c);
        }
        self
    }
}
