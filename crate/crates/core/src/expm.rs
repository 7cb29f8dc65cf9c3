//! Exponentials of real 3×3 matrices.
//!
//! The matrix is first balanced by an exact power-of-two diagonal
//! similarity, then diagonalised through its characteristic cubic. When the
//! eigenvector basis is ill-conditioned (near-defective blocks) the
//! propagator switches to scaling and squaring with a degree-13 Padé
//! approximant.

use nalgebra::{Complex, Matrix3, Vector3};

use crate::cubic::{solve_monic_cubic, C64};

/// Eigenvector condition number above which the Padé route is used.
pub const EIGENVECTOR_CONDITION_LIMIT: f64 = 1e8;

#[derive(Debug, Clone)]
enum Route {
    Eigen {
        values: [C64; 3],
        vectors: Matrix3<C64>,
        inverse: Matrix3<C64>,
    },
    Pade,
}

/// Reusable `t ↦ exp(tA)` for a fixed matrix `A`.
#[derive(Debug, Clone)]
pub struct Exponential3 {
    /// Balanced matrix `D⁻¹AD`.
    balanced: Matrix3<f64>,
    scale: Vector3<f64>,
    route: Route,
    condition: f64,
}

impl Exponential3 {
    pub fn new(a: &Matrix3<f64>) -> Self {
        let (balanced, scale) = balance(a);
        let (route, condition) = match eigen_route(&balanced) {
            Some((values, vectors, inverse, cond)) if cond <= EIGENVECTOR_CONDITION_LIMIT => (
                Route::Eigen {
                    values,
                    vectors,
                    inverse,
                },
                cond,
            ),
            Some((.., cond)) => (Route::Pade, cond),
            None => (Route::Pade, f64::INFINITY),
        };
        Exponential3 {
            balanced,
            scale,
            route,
            condition,
        }
    }

    /// Condition number of the (column-normalised) eigenvector matrix of
    /// the balanced matrix, in the Frobenius norm.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn uses_pade(&self) -> bool {
        matches!(self.route, Route::Pade)
    }

    /// `exp(tA)·x`.
    pub fn apply(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        let y = x.component_div(&self.scale);
        let z = match &self.route {
            Route::Eigen {
                values,
                vectors,
                inverse,
            } => {
                let yc = y.map(|v| Complex::new(v, 0.0));
                let mut coeff = inverse * yc;
                for (c, lam) in coeff.iter_mut().zip(values) {
                    *c *= (lam * t).exp();
                }
                (vectors * coeff).map(|v| v.re)
            }
            Route::Pade => expm_pade(&(self.balanced * t)) * y,
        };
        z.component_mul(&self.scale)
    }

    /// `exp(tA)` as a matrix.
    pub fn matrix(&self, t: f64) -> Matrix3<f64> {
        let mut out = Matrix3::zeros();
        for j in 0..3 {
            let e = Vector3::ith(j, 1.0);
            out.set_column(j, &self.apply(t, &e));
        }
        out
    }
}

/// Osborne balancing with power-of-two factors: returns `(D⁻¹AD, diag D)`.
fn balance(a: &Matrix3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let mut b = *a;
    let mut d = Vector3::new(1.0, 1.0, 1.0);
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..3 {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..3 {
                if j != i {
                    col += b[(j, i)].abs();
                    row += b[(i, j)].abs();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let (mut c, mut r) = (col, row);
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r) < 0.95 * total {
                changed = true;
                d[i] *= f;
                for j in 0..3 {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (b, d)
}

type EigenParts = ([C64; 3], Matrix3<C64>, Matrix3<C64>, f64);

fn eigen_route(k: &Matrix3<f64>) -> Option<EigenParts> {
    let trace = k.trace();
    let minors = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)] + k[(0, 0)] * k[(2, 2)]
        - k[(0, 2)] * k[(2, 0)]
        + k[(1, 1)] * k[(2, 2)]
        - k[(1, 2)] * k[(2, 1)];
    let det = k.determinant();
    let values = solve_monic_cubic(-trace, minors, -det).roots;
    if values
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return None;
    }
    let kc = k.map(|v| Complex::new(v, 0.0));
    let mut vectors = Matrix3::<C64>::zeros();
    for (j, lam) in values.iter().enumerate() {
        let shifted = kc - Matrix3::from_diagonal_element(*lam);
        let rows = [
            shifted.row(0).transpose(),
            shifted.row(1).transpose(),
            shifted.row(2).transpose(),
        ];
        let candidates = [
            cross(&rows[0], &rows[1]),
            cross(&rows[0], &rows[2]),
            cross(&rows[1], &rows[2]),
        ];
        let best = candidates
            .into_iter()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))?;
        let n = best.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        vectors.set_column(j, &(best / Complex::new(n, 0.0)));
    }
    let inverse = vectors.try_inverse()?;
    let cond = vectors.norm() * inverse.norm();
    if !cond.is_finite() {
        return None;
    }
    Some((values, vectors, inverse, cond))
}

fn cross(x: &Vector3<C64>, y: &Vector3<C64>) -> Vector3<C64> {
    Vector3::new(
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    )
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling-and-squaring exponential with the [13/13] Padé approximant.
pub fn expm_pade(a: &Matrix3<f64>) -> Matrix3<f64> {
    const THETA13: f64 = 5.371920351148152;
    let norm1 = (0..3).map(|j| a.column(j).abs().sum()).fold(0.0, f64::max);
    if !norm1.is_finite() {
        return Matrix3::from_element(f64::NAN);
    }
    let squarings = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings);
    let b = &PADE13;
    let id = Matrix3::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner =
        a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3] + id * b[1];
    let u = a * u_inner;
    let v =
        a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
    let mut r = match (v - u).lu().solve(&(v + u)) {
        Some(r) => r,
        None => return Matrix3::from_element(f64::NAN),
    };
    for _ in 0..squarings {
        r = r * r;
    }
    r
}
