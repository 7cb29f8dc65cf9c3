//! Monic real cubic `z³ + a₂z² + a₁z + a₀` with residual verification.
//!
//! The dominant real root comes from the trigonometric (three real roots)
//! or Cardano (one real root) formula on a rescaled, depressed cubic and is
//! Newton-polished. The remaining pair is obtained by deflation, choosing
//! whichever of the two algebraically equivalent quotient formulas avoids
//! cancellation. Residuals are evaluated in double-double arithmetic.

use std::f64::consts::PI;

use nalgebra::Complex;

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    ThreeReal,
    /// One real root followed by a complex-conjugate pair (`Im > 0` first).
    OneRealPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub roots: [C64; 3],
    pub kind: RootKind,
}

impl CubicRoots {
    pub fn max_real_part(&self) -> f64 {
        self.roots
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn solve_monic_cubic(a2: f64, a1: f64, a0: f64) -> CubicRoots {
    let coeffs = [a2, a1, a0];
    let raw = if a0 == 0.0 {
        let (z1, z2, complex) = quadratic(a2, a1);
        finish([C64::new(0.0, 0.0), z1, z2], complex)
    } else {
        solve_scaled(a2, a1, a0)
    };
    let mut roots = raw.roots;
    for z in roots.iter_mut() {
        *z = polish(&coeffs, *z);
    }
    if raw.kind == RootKind::OneRealPair {
        // Keep the pair exactly conjugate after polishing.
        let pair = if roots[1].im >= 0.0 {
            roots[1]
        } else {
            roots[1].conj()
        };
        roots[1] = pair;
        roots[2] = pair.conj();
        roots[0].im = 0.0;
    }
    CubicRoots {
        roots,
        kind: raw.kind,
    }
}

fn solve_scaled(a2: f64, a1: f64, a0: f64) -> CubicRoots {
    let s = a2.abs().max(a1.abs().sqrt()).max(a0.abs().cbrt());
    let (b2, b1, b0) = (a2 / s, a1 / (s * s), a0 / (s * s * s));
    let shift = b2 / 3.0;
    let p = b1 - b2 * b2 / 3.0;
    let q = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    let dominant = if disc > 0.0 {
        let big = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        big + small - shift
    } else if p == 0.0 {
        -shift
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(-shift)
    };
    let r = polish_real(&[b2, b1, b0], dominant);

    // (z - r)(z² + pz + q) = z³ + (p - r)z² + (q - pr)z - qr
    let q2 = -b0 / r;
    let via_sum = b2 + r;
    let via_linear = (q2 - b1) / r;
    let cond_sum = (b2.abs() + r.abs()) / via_sum.abs();
    let cond_linear = (q2.abs() + b1.abs()) / (q2 - b1).abs();
    let p2 = if cond_sum <= cond_linear {
        via_sum
    } else {
        via_linear
    };
    let (z1, z2, complex) = quadratic(p2, q2);
    let out = finish([C64::new(r, 0.0), z1, z2], complex);
    CubicRoots {
        roots: out.roots.map(|z| z * s),
        kind: out.kind,
    }
}

/// Roots of `z² + pz + q`; the flag is true for a complex pair.
fn quadratic(p: f64, q: f64) -> (C64, C64, bool) {
    let disc = p * p - 4.0 * q;
    if disc < 0.0 {
        let re = -p / 2.0;
        let im = (-disc).sqrt() / 2.0;
        (C64::new(re, im), C64::new(re, -im), true)
    } else {
        let t = -(p + p.signum() * disc.sqrt()) / 2.0;
        let t = if p == 0.0 { disc.sqrt() / 2.0 } else { t };
        let other = if t != 0.0 { q / t } else { 0.0 };
        (C64::new(t, 0.0), C64::new(other, 0.0), false)
    }
}

fn finish(mut roots: [C64; 3], complex: bool) -> CubicRoots {
    if complex {
        CubicRoots {
            roots,
            kind: RootKind::OneRealPair,
        }
    } else {
        roots.sort_by(|x, y| x.re.total_cmp(&y.re));
        CubicRoots {
            roots,
            kind: RootKind::ThreeReal,
        }
    }
}

fn eval_plain(coeffs: &[f64; 3], z: C64) -> (C64, C64) {
    let mut p = C64::new(1.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn polish_real(coeffs: &[f64; 3], mut r: f64) -> f64 {
    let value = |x: f64| {
        let (p, dp) = eval_plain(coeffs, C64::new(x, 0.0));
        (p.re, dp.re)
    };
    let mut best = value(r).0.abs();
    for _ in 0..4 {
        let (p, dp) = value(r);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let next = r - p / dp;
        let res = value(next).0.abs();
        if res < best {
            best = res;
            r = next;
        } else {
            break;
        }
    }
    r
}

fn polish(coeffs: &[f64; 3], mut z: C64) -> C64 {
    let mut best = relative_residual(coeffs, z);
    for _ in 0..3 {
        if best == 0.0 {
            break;
        }
        let (p, dp) = eval_plain(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        let res = relative_residual(coeffs, next);
        if res < best {
            best = res;
            z = next;
        } else {
            break;
        }
    }
    z
}

/// `|P(z)| / Σ|a_k||z|^k` with `P` evaluated by compensated Horner.
pub fn relative_residual(coeffs: &[f64; 3], z: C64) -> f64 {
    let value = compensated_eval(coeffs, z).norm();
    let r = z.norm();
    let scale = r * r * r + coeffs[0].abs() * r * r + coeffs[1].abs() * r + coeffs[2].abs();
    if scale == 0.0 {
        value
    } else {
        value / scale
    }
}

/// Monic cubic evaluated in double-double complex arithmetic.
pub fn compensated_eval(coeffs: &[f64; 3], z: C64) -> C64 {
    let mut re = Dd::from(1.0);
    let mut im = Dd::from(0.0);
    for &c in coeffs {
        let nre = re.mul_f64(z.re).sub(im.mul_f64(z.im)).add_f64(c);
        let nim = re.mul_f64(z.im).add(im.mul_f64(z.re));
        re = nre;
        im = nim;
    }
    C64::new(re.value(), im.value())
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn renorm(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::renorm(s, e + self.lo + o.lo)
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(Dd {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    fn add_f64(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        Dd::renorm(s, e + self.lo)
    }

    fn mul_f64(self, x: f64) -> Dd {
        let (p, e) = two_prod(self.hi, x);
        Dd::renorm(p, e + self.lo * x)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}
