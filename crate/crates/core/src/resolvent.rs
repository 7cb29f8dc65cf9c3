//! Resolvent of the mode blocks along the imaginary axis and the
//! sequence showing that its norm does not vanish at high frequency.

use nalgebra::{Complex, Matrix3, Vector3};
use rayon::prelude::*;

use crate::cubic::C64;
use crate::error::{Error, Result};
use crate::model::{
    hilbert_weight, mode_matrix, Direction, ModeIndex, ModelParams, SpectralDomain,
};
use crate::propagator::ModeState;
use crate::svd::max_singular_value;

/// Right-hand side `G = (g₁, g₂, g₃)` of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventRhs {
    pub g1: C64,
    pub g2: C64,
    pub g3: C64,
}

impl ResolventRhs {
    pub fn new(g1: C64, g2: C64, g3: C64) -> Self {
        ResolventRhs { g1, g2, g3 }
    }

    pub fn real(g1: f64, g2: f64, g3: f64) -> Self {
        ResolventRhs::new(
            Complex::new(g1, 0.0),
            Complex::new(g2, 0.0),
            Complex::new(g3, 0.0),
        )
    }

    pub fn to_vector(self) -> Vector3<C64> {
        Vector3::new(self.g1, self.g2, self.g3)
    }
}

impl ModeState<C64> {
    pub fn to_vector(self) -> Vector3<C64> {
        Vector3::new(self.u, self.v, self.theta)
    }
}

/// Solves `(iω − M_λ)x = g` by eliminating `v` and `θ`:
///
/// ```text
/// v = iωu − g₁
/// θ = (g₃ + γv) / (iω + μ)
/// (κ − ω² + iωβγ/(iω + μ)) u = g₂ + iωg₁ − β(g₃ − γg₁)/(iω + μ)
/// ```
///
/// with `κ = cλ²/ρ`, `β = ηλ/ρ`, `γ = ηλ/a`, `μ = (bλ + dλ²)/a`.
pub fn solve_mode_resolvent(
    params: &ModelParams,
    lambda: f64,
    omega: f64,
    rhs: ResolventRhs,
) -> Result<ModeState<C64>> {
    params.require_stable()?;
    solve_unchecked(params, lambda, omega, rhs)
}

fn solve_unchecked(
    params: &ModelParams,
    lambda: f64,
    omega: f64,
    rhs: ResolventRhs,
) -> Result<ModeState<C64>> {
    let ModelParams { rho, a, c, eta, .. } = *params;
    let kappa = c * lambda * lambda / rho;
    let beta = eta * lambda / rho;
    let gamma = eta * lambda / a;
    let mu = params.dissipation_symbol(lambda) / a;
    let iw = Complex::new(0.0, omega);
    let heat = iw + mu;
    let pivot = Complex::new(kappa - omega * omega, 0.0) + iw * (beta * gamma) / heat;
    if pivot.norm() == 0.0 || !pivot.norm().is_finite() {
        return Err(Error::SingularSystem { lambda, omega });
    }
    let ResolventRhs { g1, g2, g3 } = rhs;
    let u = (g2 + iw * g1 - (g3 - g1 * gamma) * beta / heat) / pivot;
    let v = iw * u - g1;
    let theta = (g3 + v * gamma) / heat;
    Ok(ModeState { u, v, theta })
}

/// `‖(iω − M)x − g‖∞ / (‖iω − M‖∞‖x‖∞ + ‖g‖∞)`.
pub fn resolvent_residual(
    params: &ModelParams,
    lambda: f64,
    omega: f64,
    rhs: ResolventRhs,
    x: &ModeState<C64>,
) -> f64 {
    let op = shifted_operator(params, lambda, omega);
    let g = rhs.to_vector();
    let xv = x.to_vector();
    let r = op * xv - g;
    let inf = |v: &Vector3<C64>| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let op_norm = (0..3)
        .map(|i| op.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let scale = op_norm * inf(&xv) + inf(&g);
    if scale == 0.0 {
        inf(&r)
    } else {
        inf(&r) / scale
    }
}

/// `iω·I − M_λ` as a complex matrix.
pub fn shifted_operator(params: &ModelParams, lambda: f64, omega: f64) -> Matrix3<C64> {
    let m = mode_matrix(params, lambda, Direction::Forward).entries;
    Matrix3::from_diagonal_element(Complex::new(0.0, omega)) - m.map(|x| Complex::new(x, 0.0))
}

/// `Re⟨x, y⟩` in the energy inner product of eigenvalue `lambda`.
pub fn energy_inner_re(
    params: &ModelParams,
    lambda: f64,
    x: &ModeState<C64>,
    y: &ModeState<C64>,
) -> f64 {
    let w = hilbert_weight(params, lambda);
    w.u * (x.u * y.u.conj()).re
        + w.v * (x.v * y.v.conj()).re
        + w.theta * (x.theta * y.theta.conj()).re
}

pub fn energy_norm(params: &ModelParams, lambda: f64, x: &ModeState<C64>) -> f64 {
    energy_inner_re(params, lambda, x, x).max(0.0).sqrt()
}

/// Energy-weighted resolvent of one mode, `W^{1/2}(iω − M)⁻¹W^{−1/2}`.
pub fn weighted_resolvent(params: &ModelParams, lambda: f64, omega: f64) -> Result<Matrix3<C64>> {
    params.require_stable()?;
    let w = hilbert_weight(params, lambda).as_array().map(f64::sqrt);
    let mut out = Matrix3::zeros();
    for j in 0..3 {
        let mut g = [0.0; 3];
        g[j] = 1.0 / w[j];
        let x = solve_unchecked(params, lambda, omega, ResolventRhs::real(g[0], g[1], g[2]))?;
        out[(0, j)] = x.u * w[0];
        out[(1, j)] = x.v * w[1];
        out[(2, j)] = x.theta * w[2];
    }
    Ok(out)
}

/// Operator norm of the mode resolvent in the energy norm.
pub fn mode_resolvent_norm(params: &ModelParams, lambda: f64, omega: f64) -> Result<f64> {
    Ok(max_singular_value(&weighted_resolvent(
        params, lambda, omega,
    )?))
}

/// Supremum of the mode resolvent norms over the first `mode_count` modes.
pub fn resolvent_norm(
    params: &ModelParams,
    domain: &SpectralDomain,
    omega: f64,
    mode_count: usize,
) -> Result<f64> {
    let lambdas: Vec<f64> = domain
        .enumerate_modes(mode_count)
        .iter()
        .map(|m| m.lambda)
        .collect();
    sup_norm(params, &lambdas, omega)
}

fn sup_norm(params: &ModelParams, lambdas: &[f64], omega: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for &l in lambdas {
        best = best.max(mode_resolvent_norm(params, l, omega)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventScan {
    pub omega_grid: Vec<f64>,
    pub norms: Vec<f64>,
    pub mode_count: usize,
    pub sup: f64,
    /// Smallest norm over the part of the grid with `|ω| ≥ ½ max|ω|`.
    pub tail_min: f64,
    /// Norm at the middle grid point.
    pub midpoint: f64,
}

pub fn scan_imaginary_axis(
    params: &ModelParams,
    domain: &SpectralDomain,
    omega_grid: &[f64],
    mode_count: usize,
) -> Result<ResolventScan> {
    params.require_stable()?;
    if omega_grid.is_empty() {
        return Err(Error::InvalidTimeGrid("empty frequency grid".into()));
    }
    let lambdas: Vec<f64> = domain
        .enumerate_modes(mode_count)
        .iter()
        .map(|m| m.lambda)
        .collect();
    let norms: Vec<f64> = omega_grid
        .par_iter()
        .map(|&w| sup_norm(params, &lambdas, w))
        .collect::<Result<Vec<_>>>()?;
    let sup = norms.iter().copied().fold(0.0, f64::max);
    let reach = omega_grid.iter().map(|w| w.abs()).fold(0.0, f64::max);
    let tail_min = omega_grid
        .iter()
        .zip(&norms)
        .filter(|(w, _)| w.abs() >= 0.5 * reach)
        .map(|(_, n)| *n)
        .fold(f64::INFINITY, f64::min);
    let midpoint = norms[norms.len() / 2];
    Ok(ResolventScan {
        omega_grid: omega_grid.to_vec(),
        norms,
        mode_count,
        sup,
        tail_min,
        midpoint,
    })
}

/// The frequencies `√(c/ρ)λ_n` of the first `mode_count` modes that fall in
/// `[omega_min, omega_max]`, without repeats.
pub fn resonance_grid(
    params: &ModelParams,
    domain: &SpectralDomain,
    mode_count: usize,
    omega_min: f64,
    omega_max: f64,
) -> Vec<f64> {
    let speed = (params.c.abs() / params.rho).sqrt();
    let mut grid: Vec<f64> = domain
        .enumerate_modes(mode_count)
        .iter()
        .map(|m| speed * m.lambda)
        .filter(|w| (omega_min..=omega_max).contains(w))
        .collect();
    grid.dedup();
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(Error::InvalidParams(format!("unknown branch '{other}'"))),
        }
    }
}

/// One term of the sequence `U_n = (p φ_n, iω_n p φ_n, q φ_n)` solving
/// `(iω_n − A)U_n = (0, φ_n, 0)` with the momentum equation carrying `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondiffSequencePoint {
    pub n: usize,
    pub index: ModeIndex,
    pub lambda: f64,
    pub omega: f64,
    pub p: C64,
    pub q: f64,
    /// `‖U_n‖²` in the energy norm.
    pub norm_u_sq: f64,
    /// `|ω_n p|²`, the plain L² norm of `v_n`.
    pub norm_v_sq: f64,
    /// `ρ|ω_n p|²`, the energy-weighted norm of `v_n`.
    pub norm_v_sq_weighted: f64,
    /// Relative residuals of the two algebraic equations for `(p, q)`.
    pub residual_first: f64,
    pub residual_second: f64,
}

/// Term `n` (1-based, in enumeration order) of the sequence.
pub fn nondiff_sequence(
    params: &ModelParams,
    domain: &SpectralDomain,
    n: usize,
    branch: Branch,
) -> Result<NondiffSequencePoint> {
    params.require_stable()?;
    if n == 0 {
        return Err(Error::InvalidParams("sequence index starts at 1".into()));
    }
    let mode = domain.enumerate_modes(n)[n - 1];
    let ModelParams {
        rho,
        a,
        b,
        c,
        d,
        eta,
        ..
    } = *params;
    let lambda = mode.lambda;
    let omega = branch.sign() * (c / rho).sqrt() * lambda;
    let iw = Complex::new(0.0, omega);
    let q = 1.0 / (eta * lambda);
    let heat = iw * a + d * lambda * lambda + b * lambda;
    let p = heat * q / (iw * eta * lambda);

    let stiffness = c * lambda * lambda - rho * omega * omega;
    let first = p * stiffness + q * eta * lambda - 1.0;
    let first_scale =
        p.norm() * (c * lambda * lambda + rho * omega * omega) + (q * eta * lambda).abs() + 1.0;
    let coupling = -iw * eta * lambda * p;
    let second = coupling + heat * q;
    let second_scale = coupling.norm() + heat.norm() * q.abs();

    let v_sq = (iw * p).norm_sqr();
    let w = hilbert_weight(params, lambda);
    Ok(NondiffSequencePoint {
        n,
        index: mode.index,
        lambda,
        omega,
        p,
        q,
        norm_u_sq: w.u * p.norm_sqr() + w.v * v_sq + w.theta * q * q,
        norm_v_sq: v_sq,
        norm_v_sq_weighted: rho * v_sq,
        residual_first: first.norm() / first_scale,
        residual_second: second.norm() / second_scale,
    })
}

/// `|v_n|²` from a direct solve with right-hand side `(0, 1/ρ, 0)`.
pub fn nondiff_direct_v_sq(params: &ModelParams, point: &NondiffSequencePoint) -> Result<f64> {
    let x = solve_mode_resolvent(
        params,
        point.lambda,
        point.omega,
        ResolventRhs::real(0.0, 1.0 / params.rho, 0.0),
    )?;
    Ok(x.v.norm_sqr())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondiffLimitReport {
    pub points: Vec<NondiffSequencePoint>,
    /// `d²/η⁴`, the limit of the L² values.
    pub target: f64,
    /// `|‖v_n‖² − target| / target` at the last term.
    pub relative_gap: f64,
    /// `ρd/η²`: lower bound scale for the resolvent norm at `ω_n`.
    pub resolvent_scale: f64,
}

pub fn nondiff_limit_check(
    params: &ModelParams,
    domain: &SpectralDomain,
    n_max: usize,
    branch: Branch,
) -> Result<NondiffLimitReport> {
    if n_max < 10 {
        return Err(Error::InvalidParams(format!(
            "n_max must be at least 10, got {n_max}"
        )));
    }
    let points = (1..=n_max)
        .map(|n| nondiff_sequence(params, domain, n, branch))
        .collect::<Result<Vec<_>>>()?;
    let target = params.d * params.d / params.eta.powi(4);
    let last = points[n_max - 1].norm_v_sq;
    Ok(NondiffLimitReport {
        points,
        target,
        relative_gap: (last - target).abs() / target,
        resolvent_scale: params.rho * params.d / (params.eta * params.eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gradiplate_oracles as oracle;
    use std::f64::consts::PI;

    fn line() -> SpectralDomain {
        SpectralDomain::interval(PI).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let x = solve_mode_resolvent(
            &ModelParams::unit(),
            1.0,
            0.0,
            ResolventRhs::real(0.0, 0.0, 0.0),
        )
        .unwrap();
        assert_eq!(x, ModeState::default());
    }

    #[test]
    fn matches_dense_solve() {
        let p = ModelParams::unit();
        for (lambda, omega) in [(1.0, 0.0), (4.0, 3.7), (100.0, -1e4), (1e4, 1e4)] {
            let rhs = ResolventRhs::new(
                Complex::new(1.0, 0.0),
                Complex::new(0.3, -2.0),
                Complex::new(0.0, 1.0),
            );
            let x = solve_mode_resolvent(&p, lambda, omega, rhs).unwrap();
            assert!(resolvent_residual(&p, lambda, omega, rhs, &x) <= 1e-12);
            let want = oracle::lu_solve(&shifted_operator(&p, lambda, omega), &rhs.to_vector());
            let err = (x.to_vector() - want).norm() / want.norm();
            assert!(err < 1e-10, "λ={lambda} ω={omega}: {err}");
        }
    }

    #[test]
    fn dissipation_identity() {
        let p = ModelParams::new(2.0, 0.5, 1.5, 3.0, 0.7, -1.3).unwrap();
        for (lambda, omega) in [(1.0, 0.0), (9.0, 2.0), (50.0, -300.0)] {
            let rhs = ResolventRhs::new(
                Complex::new(0.2, 1.0),
                Complex::new(-1.0, 0.5),
                Complex::new(2.0, 0.0),
            );
            let x = solve_mode_resolvent(&p, lambda, omega, rhs).unwrap();
            let g = ModeState {
                u: rhs.g1,
                v: rhs.g2,
                theta: rhs.g3,
            };
            let lhs = energy_inner_re(&p, lambda, &x, &g);
            let rhs_val = p.dissipation_symbol(lambda) * x.theta.norm_sqr();
            let scale = energy_norm(&p, lambda, &x) * energy_norm(&p, lambda, &g);
            assert!((lhs - rhs_val).abs() <= 1e-10 * scale, "{lhs} vs {rhs_val}");
        }
    }

    #[test]
    fn weighted_norm_matches_reference_svd() {
        let p = ModelParams::unit();
        for (lambda, omega) in [(1.0, 0.0), (4.0, 4.0), (16.0, -7.0)] {
            let r = weighted_resolvent(&p, lambda, omega).unwrap();
            let ours = max_singular_value(&r);
            let want = oracle::max_singular_value(&r);
            assert!((ours - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn zero_frequency_dominated_by_first_mode() {
        let p = ModelParams::unit();
        let dom = line();
        let total = resolvent_norm(&p, &dom, 0.0, 16).unwrap();
        let each: Vec<f64> = dom
            .enumerate_modes(16)
            .iter()
            .map(|m| mode_resolvent_norm(&p, m.lambda, 0.0).unwrap())
            .collect();
        assert!(total.is_finite());
        assert_eq!(total, each[0]);
        assert!(each.iter().skip(1).all(|n| *n < each[0]));
    }

    #[test]
    fn symmetric_in_frequency() {
        let p = ModelParams::unit();
        for w in [0.5, 3.0, 250.0] {
            let a = resolvent_norm(&p, &line(), w, 8).unwrap();
            let b = resolvent_norm(&p, &line(), -w, 8).unwrap();
            assert!((a - b).abs() <= 1e-13 * a);
        }
    }

    #[test]
    fn single_point_scan() {
        let s = scan_imaginary_axis(&ModelParams::unit(), &line(), &[0.0], 4).unwrap();
        assert_eq!(s.norms.len(), 1);
        assert!(s.norms[0].is_finite());
    }

    #[test]
    fn rejects_negative_elasticity() {
        let p = ModelParams::new(1.0, 1.0, 1.0, -1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            resolvent_norm(&p, &line(), 1.0, 2),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn sequence_values() {
        let p = ModelParams::unit();
        let s2 = nondiff_sequence(&p, &line(), 2, Branch::Plus).unwrap();
        assert_eq!(s2.q, 0.25);
        assert!((s2.norm_v_sq - 1.625).abs() < 1e-13);
        let s3 = nondiff_sequence(&p, &line(), 3, Branch::Plus).unwrap();
        assert!((s3.norm_v_sq - 8181.0 / 6561.0).abs() < 1e-13);
        for s in [s2, s3] {
            assert!(s.residual_first <= 1e-12 && s.residual_second <= 1e-12);
            let direct = nondiff_direct_v_sq(&p, &s).unwrap();
            assert!((direct - s.norm_v_sq).abs() <= 1e-10 * s.norm_v_sq);
        }
    }

    #[test]
    fn branches_are_conjugate() {
        let p = ModelParams::new(2.0, 1.0, 0.5, 3.0, 1.5, 0.8).unwrap();
        for n in 1..6 {
            let plus = nondiff_sequence(&p, &line(), n, Branch::Plus).unwrap();
            let minus = nondiff_sequence(&p, &line(), n, Branch::Minus).unwrap();
            assert_eq!(minus.p, plus.p.conj());
            assert_eq!(minus.norm_v_sq, plus.norm_v_sq);
        }
    }

    #[test]
    fn limit_targets() {
        for (d, eta, target) in [(1.0, 1.0, 1.0), (2.0, 1.0, 4.0), (1.0, 2.0, 0.0625)] {
            let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, d, eta).unwrap();
            let r = nondiff_limit_check(&p, &line(), 30, Branch::Plus).unwrap();
            assert_eq!(r.target, target);
            assert!(r.relative_gap <= 0.01, "d={d} η={eta}: {}", r.relative_gap);
        }
    }
}
