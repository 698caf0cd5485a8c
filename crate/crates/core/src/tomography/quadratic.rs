//! Chain reconstruction for quadratic Hamiltonians on the dual-rail graph.
//!
//! With `|n±⟩ = (|n⟩ ± |N+n⟩)/√2` the fermionic `M` only couples `+` to `−`
//! nodes: `⟨n+|M|n−⟩ = −2b_n`, `⟨n−|M|(n+1)+⟩ = (1+γ)c_n` and
//! `⟨n+|M|(n+1)−⟩ = (1−γ)c_n`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::reconstruct::{check_nondegenerate, CouplingEstimate, FieldEstimate, ReconstructionOptions, ReconstructionResult};
use super::SpectralData;
use crate::error::{Error, Refusal, Result};
use crate::network::Sign;

/// At `1 − γ` below this the `n+ → (n+1)−` rungs vanish and the path
/// recursion (which needs field signs) is used instead.
pub const LADDER_MIN_ASYMMETRY: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QuadraticPrior<'a> {
    pub n: usize,
    pub gamma: f64,
    pub coupling_signs: &'a [Sign],
    /// Needed only at γ = 1, where field signs are not observable.
    pub field_signs: Option<&'a [Sign]>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn times_e(e: &[f64], v: &[Complex64]) -> Vec<Complex64> {
    v.iter().zip(e).map(|(z, e)| z * *e).collect()
}

fn axpy(y: &mut [Complex64], a: f64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += x * a);
}

fn scaled(v: &[Complex64], s: f64) -> Vec<Complex64> {
    v.iter().map(|z| z * s).collect()
}

/// Couplings `c_1..c_{N−1}` and fields `b_1..b_N` of a fermionic chain from
/// eigendata of `M` seen at fictitious nodes `1` and `N + 1`.
pub fn reconstruct_quadratic_chain(
    prior: &QuadraticPrior<'_>,
    sd: &SpectralData,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    let n = prior.n;
    if n == 0 || prior.coupling_signs.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!("{} coupling signs for {n} sites", prior.coupling_signs.len())));
    }
    if !(0.0..=1.0).contains(&prior.gamma) {
        return Err(Error::InvalidArgument(format!("γ must lie in [0, 1], got {}", prior.gamma)));
    }
    if sd.len() != 2 * n {
        return Err(Error::DimensionMismatch(format!("{} levels for a {}-node dual-rail graph", sd.len(), 2 * n)));
    }
    let (Some(top), Some(bottom)) = (sd.overlaps.get(&1), sd.overlaps.get(&(n + 1))) else {
        return Err(Error::InvalidArgument(format!("spectral data needs overlaps for nodes 1 and {}", n + 1)));
    };
    let e = &sd.eigenvalues;
    let tol = opts.vanishing_rel_tol * e.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let plus: Vec<Complex64> = top.iter().zip(bottom).map(|(a, b)| (a + b) * FRAC_1_SQRT_2).collect();

    let (c, b) = if 1.0 - prior.gamma < LADDER_MIN_ASYMMETRY {
        let Some(field_signs) = prior.field_signs else {
            return Err(Error::InvalidArgument("field signs are required at γ = 1".into()));
        };
        if field_signs.len() != n {
            return Err(Error::DimensionMismatch(format!("{} field signs for {n} sites", field_signs.len())));
        }
        path_recursion(n, prior, field_signs, e, plus, tol)?
    } else {
        let minus: Vec<Complex64> = top.iter().zip(bottom).map(|(a, b)| (a - b) * FRAC_1_SQRT_2).collect();
        ladder_recursion(n, prior, e, plus, minus, tol)?
    };
    check_nondegenerate(e, opts.degeneracy_rel_tol)?;

    Ok(ReconstructionResult {
        couplings: c
            .iter()
            .enumerate()
            .map(|(i, &value)| CouplingEstimate { a: i + 1, b: i + 2, value, truth: None })
            .collect(),
        fields: b.iter().enumerate().map(|(i, &value)| FieldEstimate { node: i + 1, value, truth: None }).collect(),
        e0: None,
        field_condition: None,
    })
}

/// γ = 1: `1+, 1−, 2+, 2−, …` is a path with weights `−2b_1, 2c_1, −2b_2, …`
/// and zero diagonal, recovered from `⟨1+|E_j⟩` alone.
fn path_recursion(
    n: usize,
    prior: &QuadraticPrior<'_>,
    field_signs: &[Sign],
    e: &[f64],
    first: Vec<Complex64>,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut c, mut b) = (Vec::with_capacity(n - 1), Vec::with_capacity(n));
    let mut prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); e.len()];
    let mut prev_w = 0.0;
    let mut cur = first;
    for k in 1..2 * n {
        let mut r = times_e(e, &cur);
        axpy(&mut r, -prev_w, &prev);
        let magnitude = norm(&r);
        let site = k.div_ceil(2);
        let (name, sign) = if k % 2 == 1 {
            (format!("b_{site}"), -field_signs[site - 1].value())
        } else {
            (format!("c_{site}"), prior.coupling_signs[site - 1].value())
        };
        if magnitude <= tol {
            return Err(Refusal::VanishingParameter { step: k, parameter: name, magnitude }.into());
        }
        let w = sign * magnitude;
        if k % 2 == 1 {
            b.push(-w / 2.0);
        } else {
            c.push(w / (1.0 + prior.gamma));
        }
        prev = std::mem::replace(&mut cur, scaled(&r, 1.0 / w));
        prev_w = w;
    }
    Ok((c, b))
}

/// γ < 1: both rails are observed, so fields come out with their signs and
/// each rung pair yields the next `u_{n±}`.
fn ladder_recursion(
    n: usize,
    prior: &QuadraticPrior<'_>,
    e: &[f64],
    mut up: Vec<Complex64>,
    mut um: Vec<Complex64>,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = prior.gamma;
    let (mut c, mut b) = (Vec::with_capacity(n - 1), Vec::with_capacity(n));
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>, f64)> = None;
    for site in 1..=n {
        let w: Complex64 = e.iter().zip(&up).zip(&um).map(|((e, p), m)| p * m.conj() * *e).sum();
        let bn = -w.re / 2.0;
        b.push(bn);
        if site == n {
            break;
        }
        let mut r_minus = times_e(e, &um);
        axpy(&mut r_minus, 2.0 * bn, &up);
        let mut r_plus = times_e(e, &up);
        axpy(&mut r_plus, 2.0 * bn, &um);
        if let Some((pp, pm, cp)) = &prev {
            axpy(&mut r_minus, -(1.0 - g) * cp, pp);
            axpy(&mut r_plus, -(1.0 + g) * cp, pm);
        }
        let magnitude = norm(&r_minus);
        if magnitude <= tol {
            return Err(Refusal::VanishingParameter { step: 2 * site, parameter: format!("c_{site}"), magnitude }.into());
        }
        let cn = prior.coupling_signs[site - 1].value() * magnitude / (1.0 + g);
        c.push(cn);
        let next_up = scaled(&r_minus, 1.0 / ((1.0 + g) * cn));
        let next_um = scaled(&r_plus, 1.0 / ((1.0 - g) * cn));
        prev = Some((std::mem::replace(&mut up, next_up), std::mem::replace(&mut um, next_um), cn));
    }
    Ok((c, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{quadratic_spec_from_chain, Coupling, ModelKind, SpinNetwork};
    use crate::tomography::exact_quadratic_spectral_data;

    fn chain(c: &[f64], b: &[f64], gamma: f64) -> SpinNetwork {
        let couplings = c.iter().enumerate().map(|(i, &x)| Coupling::new(i + 1, i + 2, x)).collect();
        SpinNetwork::new(b.len(), ModelKind::QuadraticFermion, 0.0, gamma, couplings, b.to_vec())
    }

    fn run(net: &SpinNetwork) -> Result<ReconstructionResult> {
        let sd = exact_quadratic_spectral_data(&quadratic_spec_from_chain(net).unwrap()).unwrap();
        let field_signs: Vec<Sign> = net.fields.iter().map(|&x| Sign::of(x)).collect();
        let prior = QuadraticPrior { n: net.n, gamma: net.gamma, coupling_signs: &net.signs, field_signs: Some(&field_signs) };
        reconstruct_quadratic_chain(&prior, &sd, &Default::default()).map(|r| r.with_truth(net))
    }

    #[test]
    fn three_site_ising() {
        let net = chain(&[1.0, 0.8], &[0.5, -0.3, 0.2], 1.0);
        let r = run(&net).unwrap();
        assert!(r.max_abs_error().unwrap() < 1e-8, "{r:?}");
    }

    #[test]
    fn anisotropic_chains() {
        for gamma in [0.0, 0.3, 0.9] {
            let net = chain(&[1.0, -0.8, 1.2, 0.6], &[0.5, -0.3, 0.2, 0.35, -0.45], gamma);
            let r = run(&net).unwrap();
            assert!(r.max_abs_error().unwrap() < 1e-8, "γ = {gamma}: {r:?}");
        }
    }

    #[test]
    fn vanishing_first_field_is_refused() {
        let net = chain(&[1.0, 0.8], &[0.0, -0.3, 0.2], 1.0);
        let err = run(&net).unwrap_err();
        assert!(matches!(err, Error::Refused(Refusal::VanishingParameter { step: 1, .. })), "{err}");
    }

    #[test]
    fn ising_needs_field_signs() {
        let net = chain(&[1.0], &[0.5, 0.2], 1.0);
        let sd = exact_quadratic_spectral_data(&quadratic_spec_from_chain(&net).unwrap()).unwrap();
        let prior = QuadraticPrior { n: 2, gamma: 1.0, coupling_signs: &net.signs, field_signs: None };
        assert!(reconstruct_quadratic_chain(&prior, &sd, &Default::default()).is_err());
    }
}
