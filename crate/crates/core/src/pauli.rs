//! Pauli words and real combinations `i·Σ a_P P` of them.
//!
//! A word over `{I, X, Y, Z}` on `N` sites is stored as two bitmasks with
//! bit `k − 1` describing node `k`: `Y` has both bits set. The dense index of
//! a word is `x | z << N`, so the coordinate space has `4^N` entries.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::{ModelKind, SpinNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord {
    pub x: u32,
    pub z: u32,
}

pub const MAX_SITES: usize = 15;

impl PauliWord {
    pub const IDENTITY: PauliWord = PauliWord { x: 0, z: 0 };

    /// Parses `"XIZ"` (node 1 first).
    pub fn parse(s: &str) -> Result<PauliWord> {
        let mut w = PauliWord::IDENTITY;
        for (k, ch) in s.chars().enumerate() {
            let bit = 1u32 << k;
            match ch {
                'I' => {}
                'X' => w.x |= bit,
                'Y' => {
                    w.x |= bit;
                    w.z |= bit
                }
                'Z' => w.z |= bit,
                _ => return Err(Error::InvalidArgument(format!("bad Pauli letter `{ch}` in `{s}`"))),
            }
        }
        Ok(w)
    }

    /// Single-site operator `σ^α` on `node` (1-based), `α ∈ {X, Y, Z}`.
    pub fn site(node: usize, letter: char) -> PauliWord {
        let bit = 1u32 << (node - 1);
        match letter {
            'X' => PauliWord { x: bit, z: 0 },
            'Y' => PauliWord { x: bit, z: bit },
            'Z' => PauliWord { x: 0, z: bit },
            _ => panic!("letter must be X, Y or Z"),
        }
    }

    pub fn index(self, n: usize) -> usize {
        (self.x | self.z << n) as usize
    }

    pub fn from_index(index: usize, n: usize) -> PauliWord {
        let mask = (1u32 << n) - 1;
        PauliWord { x: index as u32 & mask, z: (index >> n) as u32 & mask }
    }

    pub fn support(self) -> u32 {
        self.x | self.z
    }

    pub fn weight(self) -> u32 {
        self.support().count_ones()
    }

    pub fn letter(self, node: usize) -> char {
        let bit = 1u32 << (node - 1);
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    pub fn to_string(self, n: usize) -> String {
        (1..=n).map(|k| self.letter(k)).collect()
    }

    /// `PQ = i^k R`; returns `(k mod 4, R)`.
    pub fn product(self, other: PauliWord) -> (u32, PauliWord) {
        let (x1, y1, z1) = (self.x & !self.z, self.x & self.z, !self.x & self.z);
        let (x2, y2, z2) = (other.x & !other.z, other.x & other.z, !other.x & other.z);
        let forward = ((x1 & y2) | (y1 & z2) | (z1 & x2)).count_ones();
        let backward = ((y1 & x2) | (z1 & y2) | (x1 & z2)).count_ones();
        let k = (forward + 3 * backward) % 4;
        (k, PauliWord { x: self.x ^ other.x, z: self.z ^ other.z })
    }

    pub fn anticommutes(self, other: PauliWord) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 1
    }

    /// Dense `2^N × 2^N` matrix. Node 1 is the most significant state bit.
    pub fn to_matrix(self, n: usize) -> DMatrix<Complex64> {
        let dim = 1usize << n;
        let (mut xs, mut zs) = (0usize, 0usize);
        for k in 1..=n {
            let state_bit = 1usize << (n - k);
            if self.x & (1 << (k - 1)) != 0 {
                xs |= state_bit;
            }
            if self.z & (1 << (k - 1)) != 0 {
                zs |= state_bit;
            }
        }
        let ys = (xs & zs).count_ones();
        let base = Complex64::i().powu(ys);
        let mut m = DMatrix::zeros(dim, dim);
        for s in 0..dim {
            let sign = if (zs & s).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(s ^ xs, s)] = base * sign;
        }
        m
    }
}

/// The anti-Hermitian operator `i·Σ_P a_P P` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub n: usize,
    pub terms: BTreeMap<PauliWord, f64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> PauliSum {
        assert!(n <= MAX_SITES, "at most {MAX_SITES} sites");
        PauliSum { n, terms: BTreeMap::new() }
    }

    pub fn term(n: usize, word: PauliWord, coefficient: f64) -> PauliSum {
        let mut s = PauliSum::zero(n);
        s.add_term(word, coefficient);
        s
    }

    pub fn parse_term(word: &str, coefficient: f64) -> Result<PauliSum> {
        Ok(PauliSum::term(word.len(), PauliWord::parse(word)?, coefficient))
    }

    pub fn add_term(&mut self, word: PauliWord, coefficient: f64) {
        let e = self.terms.entry(word).or_insert(0.0);
        *e += coefficient;
        if *e == 0.0 {
            self.terms.remove(&word);
        }
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (&w, &a) in &other.terms {
            out.add_term(w, a);
        }
        out
    }

    pub fn scale(&self, s: f64) -> PauliSum {
        let mut out = PauliSum::zero(self.n);
        for (&w, &a) in &self.terms {
            out.add_term(w, a * s);
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn coefficient(&self, word: PauliWord) -> f64 {
        self.terms.get(&word).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> u32 {
        self.terms.keys().fold(0, |m, w| m | w.support())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1 << (2 * self.n)];
        for (&w, &a) in &self.terms {
            v[w.index(self.n)] = a;
        }
        v
    }

    pub fn from_dense(n: usize, v: &[f64], drop_below: f64) -> PauliSum {
        let mut s = PauliSum::zero(n);
        for (i, &a) in v.iter().enumerate() {
            if a.abs() > drop_below {
                s.terms.insert(PauliWord::from_index(i, n), a);
            }
        }
        s
    }

    /// Hermitian matrix `Σ a_P P` (the sum without the factor `i`).
    pub fn hermitian_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (&w, &a) in &self.terms {
            m += w.to_matrix(self.n) * Complex64::from(a);
        }
        m
    }

    /// Keeps only the listed sites, renumbered in order. Terms acting
    /// elsewhere are an error.
    pub fn restrict(&self, sites: &[usize]) -> Result<PauliSum> {
        let mut out = PauliSum::zero(sites.len());
        let keep: u32 = sites.iter().fold(0, |m, &s| m | 1 << (s - 1));
        for (&w, &a) in &self.terms {
            if w.support() & !keep != 0 {
                return Err(Error::InvalidArgument("operator acts outside the requested sites".into()));
            }
            let mut nw = PauliWord::IDENTITY;
            for (j, &s) in sites.iter().enumerate() {
                let bit = 1u32 << (s - 1);
                if w.x & bit != 0 {
                    nw.x |= 1 << j;
                }
                if w.z & bit != 0 {
                    nw.z |= 1 << j;
                }
            }
            out.add_term(nw, a);
        }
        Ok(out)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, a)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{a}·i{}", w.to_string(self.n))?;
        }
        Ok(())
    }
}

/// Accumulates the real coefficients of `[iΣa_P P, iΣb_Q Q]` into `out`.
///
/// For anticommuting words `PQ = ±iR`, so `[iaP, ibQ] = −2ab·PQ = i·(∓2ab)R`.
pub(crate) fn commutator_into(n: usize, a: &[(PauliWord, f64)], b: &[(PauliWord, f64)], out: &mut [f64]) {
    for &(p, x) in a {
        for &(q, y) in b {
            if !p.anticommutes(q) {
                continue;
            }
            let (k, r) = p.product(q);
            let sign = if k == 1 { -1.0 } else { 1.0 };
            out[r.index(n)] += sign * 2.0 * x * y;
        }
    }
}

pub fn commutator(a: &PauliSum, b: &PauliSum) -> PauliSum {
    assert_eq!(a.n, b.n, "commutator of operators on different sizes");
    let ta: Vec<_> = a.terms.iter().map(|(&w, &c)| (w, c)).collect();
    let tb: Vec<_> = b.terms.iter().map(|(&w, &c)| (w, c)).collect();
    let mut out = BTreeMap::new();
    for &(p, x) in &ta {
        for &(q, y) in &tb {
            if !p.anticommutes(q) {
                continue;
            }
            let (k, r) = p.product(q);
            let sign = if k == 1 { -1.0 } else { 1.0 };
            *out.entry(r).or_insert(0.0) += sign * 2.0 * x * y;
        }
    }
    out.retain(|_, c: &mut f64| *c != 0.0);
    PauliSum { n: a.n, terms: out }
}

/// `iH` for a network: `Σ c(XX + YY + ΔZZ) + Σ bZ` in the excitation-preserving
/// model and `Σ ½c[(1+γ)XX + (1−γ)YY] + Σ bZ` in the quadratic ones.
pub fn network_operator(net: &SpinNetwork) -> PauliSum {
    let n = net.n;
    let mut h = PauliSum::zero(n);
    let pair = |a: usize, b: usize, l: char| {
        let (p, q) = (PauliWord::site(a, l), PauliWord::site(b, l));
        PauliWord { x: p.x | q.x, z: p.z | q.z }
    };
    for c in &net.couplings {
        let (xx, yy, zz) = match net.model {
            ModelKind::ExcitationPreserving => (c.strength, c.strength, c.strength * net.delta),
            _ => (0.5 * c.strength * (1.0 + net.gamma), 0.5 * c.strength * (1.0 - net.gamma), 0.0),
        };
        h.add_term(pair(c.a, c.b, 'X'), xx);
        h.add_term(pair(c.a, c.b, 'Y'), yy);
        h.add_term(pair(c.a, c.b, 'Z'), zz);
    }
    for (k, &b) in net.fields.iter().enumerate() {
        h.add_term(PauliWord::site(k + 1, 'Z'), b);
    }
    h
}

/// `{iX_k, iY_k, iZ_k}`.
pub fn local_su2(n: usize, node: usize) -> [PauliSum; 3] {
    ['X', 'Y', 'Z'].map(|l| PauliSum::term(n, PauliWord::site(node, l), 1.0))
}

/// `c(XX + YY + ΔZZ)` between nodes `a` and `b`.
pub fn heisenberg_coupling(n: usize, a: usize, b: usize, c: f64, delta: f64) -> PauliSum {
    let net = SpinNetwork::heisenberg(n, delta, &[(a, b, c)], vec![0.0; n]);
    let mut h = network_operator(&net);
    h.terms.retain(|_, v| *v != 0.0);
    h
}
