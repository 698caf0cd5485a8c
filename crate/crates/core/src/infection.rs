//! Graph infection (zero forcing).
//!
//! An infected node with exactly one healthy neighbour infects that
//! neighbour. A gateway is *infecting* when repeated application of the rule
//! reaches every node; the order in which nodes were infected drives both the
//! controllability argument and the tomography induction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{GatewaySet, SpinNetwork};

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 20;

/// Ordered record of an infection run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfectionSequence {
    /// `(infector n_k, newly infected m_k)` in firing order.
    pub steps: Vec<(usize, usize)>,
    /// `P_1 = C ⊆ P_2 ⊆ …`, each sorted; one entry per step plus the start.
    pub sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfectionOutcome {
    /// Fixed point of the forcing rule, sorted.
    pub infected: Vec<usize>,
    pub sequence: InfectionSequence,
}

impl InfectionOutcome {
    pub fn covers(&self, n: usize) -> bool {
        self.infected.len() == n
    }
}

/// Applies the forcing rule to a fixed point. Infected nodes are scanned in
/// ascending order and the first applicable force fires.
pub fn infection_closure(net: &SpinNetwork, gateway: &GatewaySet) -> InfectionOutcome {
    closure_on(&net.adjacency(), net.n, gateway.nodes())
}

pub(crate) fn closure_on(adj: &[Vec<usize>], n: usize, start: &[usize]) -> InfectionOutcome {
    let mut infected = vec![false; n + 1];
    for &v in start {
        infected[v] = true;
    }
    let mut current: Vec<usize> = (1..=n).filter(|&v| infected[v]).collect();
    let mut steps = Vec::new();
    let mut sets = vec![current.clone()];
    loop {
        let force = current.iter().find_map(|&v| {
            let mut healthy = adj[v].iter().filter(|&&w| !infected[w]);
            match (healthy.next(), healthy.next()) {
                (Some(&w), None) => Some((v, w)),
                _ => None,
            }
        });
        let Some((v, w)) = force else { break };
        infected[w] = true;
        let pos = current.partition_point(|&x| x < w);
        current.insert(pos, w);
        steps.push((v, w));
        sets.push(current.clone());
    }
    InfectionOutcome { infected: current, sequence: InfectionSequence { steps, sets } }
}

pub fn is_infecting(net: &SpinNetwork, gateway: &GatewaySet) -> bool {
    infection_closure(net, gateway).covers(net.n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalSet {
    pub gateway: GatewaySet,
    /// True when produced by the greedy heuristic (no optimality promise).
    pub heuristic: bool,
}

/// Neighbour bitmasks, bit `v - 1` for node `v`.
fn neighbour_masks(net: &SpinNetwork) -> Vec<u64> {
    let adj = net.adjacency();
    (1..=net.n)
        .map(|v| adj[v].iter().fold(0u64, |m, &w| m | 1 << (w - 1)))
        .collect()
}

fn closure_mask(nbrs: &[u64], start: u64) -> u64 {
    let mut mask = start;
    loop {
        let mut changed = false;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let healthy = nbrs[v] & !mask;
            if healthy.count_ones() == 1 {
                mask |= healthy;
                changed = true;
            }
        }
        if !changed {
            return mask;
        }
    }
}

/// Lexicographic `k`-subsets of `0..n` as bitmasks.
fn combinations(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0u64, |m, &i| m | 1 << i));
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn mask_to_gateway(mask: u64, n: usize) -> GatewaySet {
    let nodes = (1..=n).filter(|v| mask & (1 << (v - 1)) != 0);
    GatewaySet::new(nodes, n).expect("non-empty in-range mask")
}

/// Smallest infecting set (exhaustive: increasing size, then lexicographic),
/// or a heuristic infecting set (greedy).
pub fn minimal_infecting_set(net: &SpinNetwork, mode: SearchMode, cap: usize) -> Result<MinimalSet> {
    if net.n == 0 {
        return Err(Error::InvalidArgument("empty network".into()));
    }
    let cap = cap.min(63);
    match mode {
        SearchMode::Exhaustive if net.n > cap => {
            Err(Error::DimensionCap { what: "exhaustive infecting-set search", n: net.n, cap })
        }
        SearchMode::Exhaustive => {
            let nbrs = neighbour_masks(net);
            let full = (1u64 << net.n) - 1;
            for k in 1..=net.n {
                let hit = combinations(net.n, k)
                    .into_par_iter()
                    .find_first(|&m| closure_mask(&nbrs, m) == full);
                if let Some(m) = hit {
                    return Ok(MinimalSet { gateway: mask_to_gateway(m, net.n), heuristic: false });
                }
            }
            unreachable!("the full node set always infects")
        }
        SearchMode::Greedy => Ok(MinimalSet { gateway: greedy(net), heuristic: true }),
    }
}

/// Seed with the highest-degree node, repeatedly add the lowest-index node
/// that maximizes closure growth, then drop members that are not needed.
fn greedy(net: &SpinNetwork) -> GatewaySet {
    let n = net.n;
    let nbrs = neighbour_masks(net);
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let seed = (0..n).max_by_key(|&v| (nbrs[v].count_ones(), std::cmp::Reverse(v))).unwrap();
    let mut chosen = 1u64 << seed;
    let mut reach = closure_mask(&nbrs, chosen);
    while reach != full {
        let mut best = (0u32, 0usize);
        for v in 0..n {
            if reach & (1 << v) != 0 {
                continue;
            }
            let grown = closure_mask(&nbrs, chosen | 1 << v).count_ones();
            if grown > best.0 {
                best = (grown, v);
            }
        }
        chosen |= 1 << best.1;
        reach = closure_mask(&nbrs, chosen);
    }
    for v in 0..n {
        let without = chosen & !(1 << v);
        if chosen & (1 << v) != 0 && without != 0 && closure_mask(&nbrs, without) == full {
            chosen = without;
        }
    }
    mask_to_gateway(chosen, n)
}
