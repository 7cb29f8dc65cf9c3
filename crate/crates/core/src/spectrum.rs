//! Eigenvalues of the mode blocks, the spectral abscissa, the high-frequency
//! strip of the complex pairs, and decay-rate fits.

use rayon::prelude::*;

use crate::cubic::{relative_residual, solve_monic_cubic, RootKind, C64};
use crate::error::{Error, Result};
use crate::model::{ModelParams, SpectralDomain};
use crate::propagator::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpectrum {
    pub lambda: f64,
    /// For a complex pair: the real root, then the pair with `Im > 0` first.
    pub roots: [C64; 3],
    pub kind: RootKind,
    /// Coefficients `(a₂, a₁, a₀)` of the monic characteristic cubic.
    pub coefficients: [f64; 3],
    pub max_residual: f64,
}

impl ModeSpectrum {
    pub fn max_real_part(&self) -> f64 {
        self.roots
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The root with positive imaginary part, when there is a pair.
    pub fn upper_pair_root(&self) -> Option<C64> {
        match self.kind {
            RootKind::OneRealPair => Some(self.roots[1]),
            RootKind::ThreeReal => None,
        }
    }
}

/// Coefficients of `z³ + μz² + (κ + ε)z + κμ`.
pub fn characteristic_coefficients(params: &ModelParams, lambda: f64) -> [f64; 3] {
    let ModelParams { rho, a, c, eta, .. } = *params;
    let mu = params.dissipation_symbol(lambda) / a;
    let kappa = c / rho * lambda * lambda;
    let eps = eta * eta / (rho * a) * lambda * lambda;
    [mu, kappa + eps, kappa * mu]
}

pub fn mode_eigenvalues(params: &ModelParams, lambda: f64) -> ModeSpectrum {
    let coefficients = characteristic_coefficients(params, lambda);
    let r = solve_monic_cubic(coefficients[0], coefficients[1], coefficients[2]);
    let max_residual = r
        .roots
        .iter()
        .map(|z| relative_residual(&coefficients, *z))
        .fold(0.0, f64::max);
    ModeSpectrum {
        lambda,
        roots: r.roots,
        kind: r.kind,
        coefficients,
        max_residual,
    }
}

/// Largest real part over the eigenvalues of the first `mode_count` modes.
pub fn spectral_abscissa(params: &ModelParams, domain: &SpectralDomain, mode_count: usize) -> f64 {
    let lambdas: Vec<f64> = domain
        .enumerate_modes(mode_count)
        .iter()
        .map(|m| m.lambda)
        .collect();
    abscissa_of(params, &lambdas)
}

pub fn abscissa_of(params: &ModelParams, lambdas: &[f64]) -> f64 {
    lambdas
        .par_iter()
        .map(|&l| mode_eigenvalues(params, l).max_real_part())
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// `count` points from `lo` to `hi`, equally spaced in `log10`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripPoint {
    pub lambda: f64,
    /// `None` when all three roots are real.
    pub pair: Option<C64>,
    pub max_residual: f64,
    pub max_real_part: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripReport {
    pub points: Vec<StripPoint>,
    /// Dominant-balance limit `−η²/(2ρd)` of the pair's real part.
    pub predicted_limit: f64,
    /// `|Re z − limit|` at the largest λ carrying a pair.
    pub final_gap: f64,
    pub max_residual: f64,
    pub max_real_part: f64,
    /// Least real part of the pair over the scan (the strip's left edge).
    pub strip_left: f64,
}

pub fn asymptotic_strip(params: &ModelParams, lambdas: &[f64]) -> Result<StripReport> {
    params.require_stable()?;
    let points: Vec<StripPoint> = lambdas
        .par_iter()
        .map(|&lambda| {
            let s = mode_eigenvalues(params, lambda);
            StripPoint {
                lambda,
                pair: s.upper_pair_root(),
                max_residual: s.max_residual,
                max_real_part: s.max_real_part(),
            }
        })
        .collect();
    let predicted_limit = -params.eta * params.eta / (2.0 * params.rho * params.d);
    let final_gap = points
        .iter()
        .rev()
        .find_map(|p| p.pair)
        .map(|z| (z.re - predicted_limit).abs())
        .unwrap_or(f64::INFINITY);
    let max_residual = points.iter().map(|p| p.max_residual).fold(0.0, f64::max);
    let max_real_part = points
        .iter()
        .map(|p| p.max_real_part)
        .fold(f64::NEG_INFINITY, f64::max);
    let strip_left = points
        .iter()
        .filter_map(|p| p.pair)
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    Ok(StripReport {
        points,
        predicted_limit,
        final_gap,
        max_residual,
        max_real_part,
        strip_left,
    })
}

/// `E(t) ≈ M e^{−2γt}` fitted on the samples with `t ≥ window_start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gamma: f64,
    pub prefactor: f64,
    /// Largest absolute deviation of `log E` from the fitted line.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, max |deviation|)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).abs())
        .fold(0.0, f64::max);
    (slope, intercept, residual)
}

pub fn fit_decay(trajectory: &Trajectory, window_start: f64) -> Result<DecayFit> {
    let window: Vec<(usize, f64, f64)> = trajectory
        .samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.t >= window_start)
        .map(|(i, s)| (i, s.t, s.energy.total))
        .collect();
    fit_exponential(&window, |e| e / 2.0)
}

/// Fits `log values` against time on `(index, t, value)` triples that must
/// be positive and strictly decreasing; `rate` maps `−slope` to the
/// reported exponent.
pub(crate) fn fit_exponential(
    window: &[(usize, f64, f64)],
    rate: impl Fn(f64) -> f64,
) -> Result<DecayFit> {
    if window.len() < 10 {
        return Err(Error::InsufficientSamples {
            needed: 10,
            got: window.len(),
        });
    }
    for (k, &(i, _, e)) in window.iter().enumerate() {
        if !(e > 0.0) {
            return Err(Error::NonPositiveEnergy { index: i });
        }
        if k > 0 && e >= window[k - 1].2 {
            return Err(Error::NonDecreasingEnergy { index: i });
        }
    }
    let t: Vec<f64> = window.iter().map(|w| w.1).collect();
    let y: Vec<f64> = window.iter().map(|w| w.2.ln()).collect();
    let (slope, intercept, residual) = fit_line(&t, &y);
    Ok(DecayFit {
        gamma: rate(-slope),
        prefactor: intercept.exp(),
        residual,
        samples: window.len(),
    })
}
