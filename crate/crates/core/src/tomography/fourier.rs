//! Spectral estimation from gateway records.
//!
//! The reference record is `Σ_j a_j e^{−iω_j t}` with `a_j = |⟨1|E_j⟩|²` and
//! `ω_j = E_j − E_0`. Peaks of a windowed, zero-padded DFT seed the
//! frequencies; a joint least-squares fit over all gateway records then
//! refines frequencies and complex amplitudes together. When a known number
//! of levels is expected, weak lines hidden under the window sidelobes are
//! found one at a time in the spectrum of the fit residual.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{SpectralData, TimeSeries};
use crate::error::{Refusal, Result};

#[derive(Debug, Clone)]
pub struct FourierOptions {
    pub pad_factor: usize,
    /// Peaks below this fraction of the largest are ignored.
    pub relative_threshold: f64,
    /// Peaks must also exceed this multiple of the median spectral magnitude.
    pub noise_floor_factor: f64,
    /// Number of levels to report; fewer resolved peaks is a refusal.
    pub expected_levels: Option<usize>,
    pub refine: bool,
    pub max_refine_iterations: usize,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions {
            pad_factor: 8,
            relative_threshold: 1e-3,
            noise_floor_factor: 8.0,
            expected_levels: None,
            refine: true,
            max_refine_iterations: 60,
        }
    }
}

impl FourierOptions {
    pub fn expecting(levels: usize) -> Self {
        FourierOptions { expected_levels: Some(levels), ..Default::default() }
    }
}

/// Angular frequency resolution `2π/T` of a record.
pub fn resolution(ts: &TimeSeries) -> f64 {
    2.0 * PI / ts.duration()
}

fn blackman_harris(k: usize) -> Vec<f64> {
    const A: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];
    let d = (k - 1) as f64;
    (0..k)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / d;
            A[0] - A[1] * x.cos() + A[2] * (2.0 * x).cos() - A[3] * (3.0 * x).cos()
        })
        .collect()
}

/// `|Σ_k w_k s_k e^{+iω t_k}|` on the padded grid `ω_m = 2πm/(L·dt)`.
fn windowed_spectrum(samples: &[Complex64], dt: f64, pad: usize) -> (Vec<f64>, Vec<f64>) {
    let k = samples.len();
    let l = k * pad.max(1);
    let w = blackman_harris(k);
    let mut buf: Vec<Complex64> = samples.iter().zip(&w).map(|(s, w)| (s * w).conj()).collect();
    buf.resize(l, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(l).process(&mut buf);
    let mags = buf.iter().map(|z| z.norm()).collect();
    let omegas = (0..l)
        .map(|m| {
            let m = if m < l.div_ceil(2) { m as f64 } else { m as f64 - l as f64 };
            2.0 * PI * m / (l as f64 * dt)
        })
        .collect();
    (mags, omegas)
}

struct Peak {
    omega: f64,
    height: f64,
}

fn find_peaks(mags: &[f64], omegas: &[f64], threshold: f64) -> Vec<Peak> {
    let l = mags.len();
    let bin = (omegas[1] - omegas[0]).abs();
    let mut peaks = Vec::new();
    for m in 0..l {
        let (prev, next) = (mags[(m + l - 1) % l], mags[(m + 1) % l]);
        let here = mags[m];
        if here < threshold || here <= prev || here < next {
            continue;
        }
        // Parabola through the log-magnitudes of the three bins.
        let (a, b, c) = (prev.max(1e-300).ln(), here.ln(), next.max(1e-300).ln());
        let denom = a - 2.0 * b + c;
        let delta = if denom.abs() > 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        peaks.push(Peak { omega: omegas[m] + delta * bin, height: here });
    }
    peaks
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

/// Least-squares complex amplitudes of `e^{−iω_j t}` in each record.
fn fit_amplitudes(ts: &TimeSeries, omegas: &[f64]) -> BTreeMap<usize, Vec<Complex64>> {
    let k = ts.len();
    let j = omegas.len();
    let phi = DMatrix::from_fn(k, j, |t, a| Complex64::from_polar(1.0, -omegas[a] * t as f64 * ts.dt));
    let gram = phi.adjoint() * &phi;
    let lu = gram.lu();
    ts.values
        .iter()
        .map(|(&n, s)| {
            let rhs = phi.adjoint() * DVector::from_column_slice(s);
            let g = lu.solve(&rhs).unwrap_or_else(|| DVector::zeros(j));
            (n, g.iter().copied().collect())
        })
        .collect()
}

fn residual_norm2(ts: &TimeSeries, omegas: &[f64], amps: &BTreeMap<usize, Vec<Complex64>>) -> f64 {
    let mut total = 0.0;
    for (n, s) in &ts.values {
        let g = &amps[n];
        for (t, z) in s.iter().enumerate() {
            let tt = t as f64 * ts.dt;
            let model: Complex64 = omegas.iter().zip(g).map(|(w, c)| c * Complex64::from_polar(1.0, -w * tt)).sum();
            total += (z - model).norm_sqr();
        }
    }
    total
}

/// Levenberg-Marquardt on frequencies and amplitudes of all records jointly.
fn refine(ts: &TimeSeries, omegas: &mut Vec<f64>, amps: &mut BTreeMap<usize, Vec<Complex64>>, max_iter: usize) {
    let nodes: Vec<usize> = ts.values.keys().copied().collect();
    let (k, j, c) = (ts.len(), omegas.len(), nodes.len());
    let n_par = j + 2 * j * c;
    let mut cost = residual_norm2(ts, omegas, amps);
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        let mut jac = DMatrix::<f64>::zeros(2 * k * c, n_par);
        let mut res = DVector::<f64>::zeros(2 * k * c);
        for (ci, n) in nodes.iter().enumerate() {
            let s = &ts.values[n];
            let g = &amps[n];
            for (t, &st) in s.iter().enumerate().take(k) {
                let tt = t as f64 * ts.dt;
                let row = 2 * (ci * k + t);
                let mut model = Complex64::new(0.0, 0.0);
                for a in 0..j {
                    let phi = Complex64::from_polar(1.0, -omegas[a] * tt);
                    model += g[a] * phi;
                    // d(model)/dω = −i t g φ; d/dRe g = φ; d/dIm g = iφ.
                    let dw = Complex64::new(0.0, -tt) * g[a] * phi;
                    jac[(row, a)] = dw.re;
                    jac[(row + 1, a)] = dw.im;
                    let col = j + 2 * (ci * j + a);
                    jac[(row, col)] = phi.re;
                    jac[(row + 1, col)] = phi.im;
                    jac[(row, col + 1)] = -phi.im;
                    jac[(row + 1, col + 1)] = phi.re;
                }
                let r = st - model;
                res[row] = r.re;
                res[row + 1] = r.im;
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for p in 0..n_par {
                a[(p, p)] += lambda * jtj[(p, p)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial_w: Vec<f64> = (0..j).map(|x| omegas[x] + step[x]).collect();
            let trial_g: BTreeMap<usize, Vec<Complex64>> = nodes
                .iter()
                .enumerate()
                .map(|(ci, &n)| {
                    let g = (0..j)
                        .map(|a| {
                            let col = j + 2 * (ci * j + a);
                            amps[&n][a] + Complex64::new(step[col], step[col + 1])
                        })
                        .collect();
                    (n, g)
                })
                .collect();
            let trial_cost = residual_norm2(ts, &trial_w, &trial_g);
            if trial_cost < cost {
                let gain = (cost - trial_cost) / cost.max(1e-300);
                *omegas = trial_w;
                *amps = trial_g;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = gain > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
}

fn reference_residual(ts: &TimeSeries, omegas: &[f64], amps: &BTreeMap<usize, Vec<Complex64>>) -> Vec<Complex64> {
    let g = &amps[&ts.reference_node];
    ts.values[&ts.reference_node]
        .iter()
        .enumerate()
        .map(|(t, z)| {
            let tt = t as f64 * ts.dt;
            z - omegas.iter().zip(g).map(|(w, c)| c * Complex64::from_polar(1.0, -w * tt)).sum::<Complex64>()
        })
        .collect()
}

fn fit(ts: &TimeSeries, omegas: &mut Vec<f64>, opts: &FourierOptions) -> BTreeMap<usize, Vec<Complex64>> {
    omegas.sort_by(f64::total_cmp);
    let mut amps = fit_amplitudes(ts, omegas);
    if opts.refine {
        refine(ts, omegas, &mut amps, opts.max_refine_iterations);
    }
    amps
}

/// Estimates `E_j − E_0` and gateway overlaps from simulated or measured
/// records. The result carries `e0_offset = Some(0.0)`.
pub fn extract_spectrum(ts: &TimeSeries, opts: &FourierOptions) -> Result<SpectralData> {
    let reference = &ts.values[&ts.reference_node];
    let k = reference.len();
    let res = resolution(ts);
    let (mags, grid) = windowed_spectrum(reference, ts.dt, opts.pad_factor);
    let top = mags.iter().copied().fold(0.0, f64::max);
    let floor = opts.noise_floor_factor * median(&mags);

    let mut peaks = find_peaks(&mags, &grid, (opts.relative_threshold * top).max(floor));
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    if let Some(want) = opts.expected_levels {
        peaks.truncate(want);
    }
    if peaks.is_empty() {
        return Err(Refusal::UnresolvedPeaks { found: 0, expected: opts.expected_levels.unwrap_or(1), resolution: res }.into());
    }
    let mut omegas: Vec<f64> = peaks.iter().map(|p| p.omega).collect();
    let mut amps = fit(ts, &mut omegas, opts);

    if let Some(want) = opts.expected_levels {
        while omegas.len() < want {
            let residual = reference_residual(ts, &omegas, &amps);
            let (rmags, _) = windowed_spectrum(&residual, ts.dt, opts.pad_factor);
            let rfloor = opts.noise_floor_factor * median(&rmags);
            let mut candidates = find_peaks(&rmags, &grid, rfloor);
            candidates.retain(|p| omegas.iter().all(|w| (w - p.omega).abs() >= res));
            let Some(best) = candidates.into_iter().max_by(|a, b| a.height.total_cmp(&b.height)) else {
                return Err(Refusal::UnresolvedPeaks { found: omegas.len(), expected: want, resolution: res }.into());
            };
            omegas.push(best.omega);
            amps = fit(ts, &mut omegas, opts);
        }
    }
    let distinct = 1 + omegas.windows(2).filter(|w| w[1] - w[0] >= res).count();
    if distinct < omegas.len() {
        return Err(Refusal::UnresolvedPeaks { found: distinct, expected: omegas.len(), resolution: res }.into());
    }

    let sigma = (residual_norm2(ts, &omegas, &amps) / (2 * k * ts.values.len()) as f64).sqrt();
    let amplitude_floor = 10.0 * sigma / (k as f64).sqrt();

    let ref_amps = &amps[&ts.reference_node];
    let mut overlaps: BTreeMap<usize, Vec<Complex64>> = ts.values.keys().map(|&n| (n, Vec::new())).collect();
    for (a, g) in ref_amps.iter().enumerate() {
        if g.re <= amplitude_floor {
            return Err(Refusal::BelowNoiseFloor { amplitude: g.re, floor: amplitude_floor }.into());
        }
        let root = g.re.sqrt();
        for (n, v) in overlaps.iter_mut() {
            v.push(if *n == ts.reference_node { Complex64::new(root, 0.0) } else { amps[n][a] / root });
        }
    }
    SpectralData::new(omegas, overlaps, Some(0.0), ts.reference_node)
}
