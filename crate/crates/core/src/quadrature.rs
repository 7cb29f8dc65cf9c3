//! Cumulative quadrature of sampled time series.

use crate::error::{Error, Result};

/// Weights `w` such that `∫_from^to q(x) dx = Σ wᵢ q(xᵢ)` for every
/// quadratic `q` interpolating at the three nodes.
fn quadratic_weights(nodes: [f64; 3], from: f64, to: f64) -> [f64; 3] {
    let origin = nodes[1];
    let x = nodes.map(|v| v - origin);
    let (p, q) = (from - origin, to - origin);
    let mut w = [0.0; 3];
    for i in 0..3 {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (a, b) = (x[j], x[k]);
        let antiderivative = |s: f64| s * s * s / 3.0 - (a + b) * s * s / 2.0 + a * b * s;
        w[i] = (antiderivative(q) - antiderivative(p)) / ((x[i] - a) * (x[i] - b));
    }
    w
}

/// `∫_{t_i}^{t_{i+1}}` of the interpolant through up to six surrounding
/// samples, integrated exactly by three-point Gauss–Legendre.
fn interval_integral(times: &[f64], values: &[f64], i: usize) -> f64 {
    let n = times.len();
    let width = n.min(6);
    let start = i.saturating_sub(2).min(n - width);
    let nodes = &times[start..start + width];
    let f = &values[start..start + width];
    let (lo, hi) = (times[i], times[i + 1]);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    const GAUSS: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        (0.774_596_669_241_483_4, 5.0 / 9.0),
    ];
    GAUSS
        .iter()
        .map(|&(x, w)| {
            let s = mid + half * x;
            let interp: f64 = (0..width)
                .map(|k| {
                    let basis: f64 = (0..width)
                        .filter(|&j| j != k)
                        .map(|j| (s - nodes[j]) / (nodes[k] - nodes[j]))
                        .product();
                    basis * f[k]
                })
                .sum();
            w * interp
        })
        .sum::<f64>()
        * half
}

/// `I_i = ∫_{t_0}^{t_i} f` for every sample. Even samples use composite
/// Simpson; odd samples add a single interval integrated with a
/// higher-order local interpolant, so that the error at every sample is the
/// smooth Simpson error of its even neighbour. Nonuniform spacing is
/// allowed.
pub fn cumulative_simpson(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n != values.len() {
        return Err(Error::InvalidTimeGrid(format!(
            "{} times but {} values",
            n,
            values.len()
        )));
    }
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let nodes = [times[i], times[i + 1], times[i + 2]];
        let f = [values[i], values[i + 1], values[i + 2]];
        out[i + 1] = acc + interval_integral(times, values, i);
        let full = quadratic_weights(nodes, nodes[0], nodes[2]);
        acc += dot(&full, &f);
        out[i + 2] = acc;
        i += 2;
    }
    if i + 1 < n {
        out[i + 1] = acc + interval_integral(times, values, i);
    }
    Ok(out)
}

fn dot(w: &[f64; 3], f: &[f64; 3]) -> f64 {
    w[0] * f[0] + w[1] * f[1] + w[2] * f[2]
}

fn is_uniform(times: &[f64]) -> bool {
    let h = times[1] - times[0];
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
}

/// Cumulative Simpson with one Richardson step against the grid of every
/// other sample.
///
/// On a uniform grid the Simpson error at the points shared by both grids
/// (every fourth sample) behaves like `C h⁴`, so `(16 I_h − I_{2h}) / 15`
/// removes the leading term there. The correction is interpolated linearly
/// to the remaining samples. Nonuniform grids, or grids too short for the
/// coarse pass, fall back to plain Simpson.
pub fn cumulative_richardson(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let fine = cumulative_simpson(times, values)?;
    let n = times.len();
    if n < 9 || !is_uniform(times) {
        return Ok(fine);
    }
    let coarse_t: Vec<f64> = times.iter().step_by(2).copied().collect();
    let coarse_f: Vec<f64> = values.iter().step_by(2).copied().collect();
    let coarse = cumulative_simpson(&coarse_t, &coarse_f)?;

    let anchors: Vec<usize> = (0..n).step_by(4).collect();
    let correction: Vec<f64> = anchors
        .iter()
        .map(|&i| (fine[i] - coarse[i / 2]) / 15.0)
        .collect();
    let mut out = fine.clone();
    for i in 0..n {
        let k = i / 4;
        let delta = if i % 4 == 0 {
            correction[k]
        } else if k + 1 < anchors.len() {
            let s = (i % 4) as f64 / 4.0;
            correction[k] * (1.0 - s) + correction[k + 1] * s
        } else {
            correction[k]
        };
        out[i] += delta;
    }
    Ok(out)
}

/// `∫_{t_0}^{t_i} f` at every sample from values at the quarter points of
/// each interval (`values[4i + k]` at `t_i + k(t_{i+1} − t_i)/4`). Each
/// interval combines Simpson on the half and quarter steps as
/// `(16 S_{h/4} − S_{h/2}) / 15`.
pub fn cumulative_refined(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    if values.len() != 4 * (n - 1) + 1 {
        return Err(Error::InvalidTimeGrid(format!(
            "{} samples need {} quarter-point values, got {}",
            n,
            4 * (n - 1) + 1,
            values.len()
        )));
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 0..n - 1 {
        let w = times[i + 1] - times[i];
        let f = &values[4 * i..4 * i + 5];
        let half = w / 6.0 * (f[0] + 4.0 * f[2] + f[4]);
        let quarter = w / 12.0 * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]);
        acc += (16.0 * quarter - half) / 15.0;
        out.push(acc);
    }
    Ok(out)
}
