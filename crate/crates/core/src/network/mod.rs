//! Spin-network data model.
//!
//! A [`SpinNetwork`] is the single source of truth for a Hamiltonian: graph
//! topology, coupling strengths with their a-priori signs, local fields and
//! the anisotropy parameters. Nodes are 1-based everywhere in the public API.

mod generate;
mod hamiltonian;
mod io;
mod quadratic;

pub use generate::{
    complete_graph, cycle_graph, grid_graph, next_nearest_chain, random_chain, random_connected,
    star_graph, uniform_chain, ParameterRanges,
};
pub use hamiltonian::{
    build_full_hamiltonian, build_single_excitation_matrix, vacuum_energy, DEFAULT_DENSE_CAP,
};
pub use io::{load_network, network_from_json, network_to_json, save_network};
pub use quadratic::{build_m_matrix, quadratic_spec_from_chain, QuadraticSpec, Statistics};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `Σ c (XX + YY + Δ ZZ) + Σ b Z`; conserves total magnetization.
    ExcitationPreserving,
    /// `Σ ½c[(1+γ)XX + (1−γ)YY] + Σ b Z` on a chain, fermionic quasi-particles.
    QuadraticFermion,
    /// Same quadratic form read with bosonic statistics.
    QuadraticBoson,
}

impl ModelKind {
    pub fn is_quadratic(self) -> bool {
        !matches!(self, ModelKind::ExcitationPreserving)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ExcitationPreserving => "excitation_preserving",
            ModelKind::QuadraticFermion => "quadratic_fermion",
            ModelKind::QuadraticBoson => "quadratic_boson",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x.is_sign_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// An undirected edge with its coupling strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    pub strength: f64,
}

impl Coupling {
    pub fn new(a: usize, b: usize, strength: f64) -> Self {
        Coupling { a, b, strength }
    }

    /// Endpoints ordered low-high.
    pub fn key(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinNetwork {
    pub n: usize,
    pub model: ModelKind,
    pub delta: f64,
    pub gamma: f64,
    pub couplings: Vec<Coupling>,
    /// A-priori coupling signs, aligned with `couplings`.
    pub signs: Vec<Sign>,
    pub fields: Vec<f64>,
    /// Declared gateway from the network file; may be empty.
    pub gateway: Vec<usize>,
}

impl SpinNetwork {
    /// Network whose signs are taken from the coupling values.
    pub fn new(
        n: usize,
        model: ModelKind,
        delta: f64,
        gamma: f64,
        couplings: Vec<Coupling>,
        fields: Vec<f64>,
    ) -> Self {
        let signs = couplings.iter().map(|c| Sign::of(c.strength)).collect();
        SpinNetwork { n, model, delta, gamma, couplings, signs, fields, gateway: Vec::new() }
    }

    /// Excitation-preserving network from `(a, b, c)` triples.
    pub fn heisenberg(n: usize, delta: f64, edges: &[(usize, usize, f64)], fields: Vec<f64>) -> Self {
        let couplings = edges.iter().map(|&(a, b, c)| Coupling::new(a, b, c)).collect();
        SpinNetwork::new(n, ModelKind::ExcitationPreserving, delta, 0.0, couplings, fields)
    }

    pub fn with_gateway(mut self, gateway: Vec<usize>) -> Self {
        self.gateway = gateway;
        self
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    /// Neighbour lists indexed by node (index 0 unused).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        adjacency(self.n, self.couplings.iter().map(Coupling::key))
    }

    pub fn topology(&self) -> Topology {
        Topology {
            n: self.n,
            edges: self.couplings.iter().map(Coupling::key).collect(),
            signs: self.signs.clone(),
            delta: self.delta,
        }
    }

    /// The coupling on edge `{a, b}`, if declared.
    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.couplings.iter().find(|c| c.key() == key).map(|c| c.strength)
    }

    pub fn is_path(&self) -> bool {
        is_path_graph(self.n, self.couplings.iter().map(Coupling::key))
    }

    pub fn is_connected(&self) -> bool {
        is_connected(self.n, &self.adjacency())
    }
}

/// The a-priori knowledge used by tomography: graph, coupling signs and Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub n: usize,
    /// Edges with endpoints ordered low-high.
    pub edges: Vec<(usize, usize)>,
    pub signs: Vec<Sign>,
    pub delta: f64,
}

impl Topology {
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        adjacency(self.n, self.edges.iter().copied())
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().position(|&e| e == key)
    }
}

pub(crate) fn adjacency(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n + 1];
    for (a, b) in edges {
        if a == b || a == 0 || b == 0 || a > n || b > n {
            continue;
        }
        if !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

fn is_connected(n: usize, adj: &[Vec<usize>]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n + 1];
    let mut stack = vec![1];
    seen[1] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen[1..].iter().all(|&s| s)
}

fn is_path_graph(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let got: BTreeSet<(usize, usize)> = edges.collect();
    let want: BTreeSet<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
    got == want
}

/// The accessible subset C of a network, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GatewaySet(Vec<usize>);

impl GatewaySet {
    pub fn new(nodes: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let set: BTreeSet<usize> = nodes.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyGateway);
        }
        if let Some(&bad) = set.iter().find(|&&v| v == 0 || v > n) {
            return Err(Error::GatewayOutOfRange(bad));
        }
        Ok(GatewaySet(set.into_iter().collect()))
    }

    pub fn nodes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

impl fmt::Display for GatewaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// One broken invariant of a [`SpinNetwork`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation { field: field.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Checks every network invariant; never aborts.
pub fn validate(net: &SpinNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    if net.n == 0 {
        out.push(Violation::new("n", "network must have at least one node"));
    }
    if net.fields.len() != net.n {
        out.push(Violation::new(
            "fields",
            format!("expected {} field values, found {}", net.n, net.fields.len()),
        ));
    }
    if let Some(i) = net.fields.iter().position(|b| !b.is_finite()) {
        out.push(Violation::new(format!("fields[{}]", i + 1), "field must be finite"));
    }
    if !net.delta.is_finite() {
        out.push(Violation::new("delta", "anisotropy must be finite"));
    }
    if !(0.0..=1.0).contains(&net.gamma) {
        out.push(Violation::new("gamma", "anisotropy gamma must lie in [0, 1]"));
    }
    if net.signs.len() != net.couplings.len() {
        out.push(Violation::new("signs", "one sign is required per edge"));
    }

    let mut seen = BTreeSet::new();
    for (i, c) in net.couplings.iter().enumerate() {
        let field = format!("edges[{i}]");
        if c.a == 0 || c.b == 0 || c.a > net.n || c.b > net.n {
            out.push(Violation::new(&field, format!("edge ({}, {}) references a missing node", c.a, c.b)));
            continue;
        }
        if c.a == c.b {
            out.push(Violation::new(&field, "self-loop"));
            continue;
        }
        if !seen.insert(c.key()) {
            out.push(Violation::new(&field, format!("duplicate edge ({}, {})", c.a, c.b)));
        }
        if !c.strength.is_finite() {
            out.push(Violation::new(&field, "coupling must be finite"));
        } else if c.strength == 0.0 {
            out.push(Violation::new(&field, "zero coupling on declared edge"));
        } else if let Some(&s) = net.signs.get(i) {
            if Sign::of(c.strength) != s {
                out.push(Violation::new(&field, "coupling sign disagrees with declared sign"));
            }
        }
    }

    if net.model.is_quadratic() && !net.is_path() {
        out.push(Violation::new("edges", "quadratic model requires path graph"));
    }
    for &g in &net.gateway {
        if g == 0 || g > net.n {
            out.push(Violation::new("gateway", format!("gateway node {g} is not a node")));
        }
    }
    out
}

pub(crate) fn ensure_valid(net: &SpinNetwork) -> Result<()> {
    let v = validate(net);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidNetwork(v))
    }
}
