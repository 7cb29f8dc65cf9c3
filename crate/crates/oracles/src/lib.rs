//! Reference computations for the test suites.
//!
//! Everything here is deliberately independent of the library's own
//! numerics: explicit adaptive Runge–Kutta instead of matrix exponentials,
//! finite differences instead of spectral symbols, companion-matrix
//! eigenvalues instead of closed-form cubic roots, dense LU and SVD from
//! nalgebra instead of structured elimination and Jacobi sweeps.

use nalgebra::{Complex, Matrix3, Vector3};

pub type C64 = Complex<f64>;

/// Dormand–Prince 5(4) with step-size control, integrating `x' = M x`.
///
/// The error of each step is measured component-wise against
/// `atol + rtol·|x|`, in an RMS norm.
pub fn integrate_linear(
    m: &Matrix3<f64>,
    x0: &Vector3<f64>,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Vector3<f64> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let _ = C;
    let mut t = 0.0;
    let mut x = *x0;
    let norm = m.abs().max().max(1e-300);
    let mut h = (0.01 / norm).min(t_end);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let mut k = [Vector3::zeros(); 7];
        for s in 0..7 {
            let mut xs = x;
            for (j, kj) in k.iter().enumerate().take(s) {
                xs += kj * (h * A[s][j]);
            }
            k[s] = m * xs;
        }
        let mut x5 = x;
        let mut x4 = x;
        for s in 0..7 {
            x5 += k[s] * (h * B5[s]);
            x4 += k[s] * (h * B4[s]);
        }
        let mut err = 0.0;
        for i in 0..3 {
            let sc = atol + rtol * x[i].abs().max(x5[i].abs());
            err += ((x5[i] - x4[i]) / sc).powi(2);
        }
        let err = (err / 3.0).sqrt();
        if err <= 1.0 {
            t += h;
            x = x5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    x
}

/// Projects the hinged plate/heat operator onto `sin(nπx/L)` using second-
/// order finite differences on `points` interior nodes. `Δ²` is built as the
/// discrete Laplacian applied twice, which enforces `u = Δu = 0`.
#[allow(clippy::too_many_arguments)]
pub fn fd_mode_matrix(
    rho: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    eta: f64,
    length: f64,
    n: u32,
    points: usize,
    backward: bool,
) -> [[f64; 3]; 3] {
    let h = length / (points + 1) as f64;
    let phi: Vec<f64> = (1..=points)
        .map(|i| (n as f64 * std::f64::consts::PI * i as f64 * h / length).sin())
        .collect();
    let lap = |f: &[f64]| -> Vec<f64> {
        (0..f.len())
            .map(|i| {
                let left = if i == 0 { 0.0 } else { f[i - 1] };
                let right = if i + 1 == f.len() { 0.0 } else { f[i + 1] };
                (left - 2.0 * f[i] + right) / (h * h)
            })
            .collect()
    };
    let lap_phi = lap(&phi);
    let bilap_phi = lap(&lap_phi);
    let norm: f64 = phi.iter().map(|x| x * x).sum();
    let project = |f: &[f64]| f.iter().zip(&phi).map(|(x, y)| x * y).sum::<f64>() / norm;
    let lap_c = project(&lap_phi);
    let bilap_c = project(&bilap_phi);
    let heat_sign = if backward { -1.0 } else { 1.0 };
    // u_t = v;  ρ v_t = −cΔ²u + ηΔθ;  a θ_t = ±(bΔθ − dΔ²θ) − ηΔv
    [
        [0.0, 1.0, 0.0],
        [-c * bilap_c / rho, 0.0, eta * lap_c / rho],
        [
            0.0,
            -eta * lap_c / a,
            heat_sign * (b * lap_c - d * bilap_c) / a,
        ],
    ]
}

/// Roots of `z³ + a₂z² + a₁z + a₀` as eigenvalues of the companion matrix.
pub fn companion_roots(a2: f64, a1: f64, a0: f64) -> Vec<C64> {
    #[rustfmt::skip]
    let m = Matrix3::new(
        0.0, 0.0, -a0,
        1.0, 0.0, -a1,
        0.0, 1.0, -a2,
    );
    m.complex_eigenvalues().iter().copied().collect()
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm <= 0.0) == (flo <= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense LU solve with partial pivoting.
pub fn lu_solve(m: &Matrix3<C64>, rhs: &Vector3<C64>) -> Vector3<C64> {
    m.lu().solve(rhs).expect("singular matrix")
}

/// Largest singular value from nalgebra's bidiagonal SVD.
pub fn max_singular_value(m: &Matrix3<C64>) -> f64 {
    m.singular_values().max()
}

/// All singular values, descending.
pub fn singular_values(m: &Matrix3<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk_matches_rotation() {
        let m = Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -2.0);
        let x = integrate_linear(&m, &Vector3::new(1.0, 0.0, 1.0), 1.0, 1e-12, 1e-14);
        assert!((x[0] - 1f64.cos()).abs() < 1e-11);
        assert!((x[1] + 1f64.sin()).abs() < 1e-11);
        assert!((x[2] - (-2f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn companion_of_known_cubic() {
        let mut r: Vec<f64> = companion_roots(-6.0, 11.0, -6.0)
            .iter()
            .map(|z| z.re)
            .collect();
        r.sort_by(f64::total_cmp);
        for (x, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - want).abs() < 1e-12);
        }
    }
}
