//! Singular values of small complex matrices by one-sided Jacobi.

use nalgebra::{Complex, Matrix3};

use crate::cubic::C64;

const MAX_SWEEPS: usize = 60;

/// Singular values in descending order.
///
/// Columns are rotated pairwise until mutually orthogonal; each complex
/// rotation first removes the phase of the column inner product, then
/// applies the real Jacobi rotation that zeroes it. The column norms are
/// the singular values.
pub fn singular_values(m: &Matrix3<C64>) -> [f64; 3] {
    let mut a = *m;
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return [scale; 3];
    }
    a /= Complex::new(scale, 0.0);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..2 {
            for q in p + 1..3 {
                let alpha: f64 = a.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = a
                    .column(p)
                    .iter()
                    .zip(a.column(q).iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..3 {
                    let x = a[(i, p)];
                    let y = a[(i, q)] * phase.conj();
                    a[(i, p)] = x * c - y * s;
                    a[(i, q)] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s = [0.0; 3];
    for (j, v) in s.iter_mut().enumerate() {
        *v = a.column(j).norm() * scale;
    }
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn max_singular_value(m: &Matrix3<C64>) -> f64 {
    singular_values(m)[0]
}
