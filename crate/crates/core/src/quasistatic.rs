//! One-dimensional quasi-static reduction. Without inertia the plate
//! equation gives `c u_xx = ηθ`, and the temperature obeys
//!
//! ```text
//! (a + η²/c) θ_t = b θ_xx − d θ_xxxx
//! ```

use crate::error::{Error, Result};
use crate::model::{ModelParams, SpectralDomain};
use crate::spectrum::{fit_exponential, DecayFit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiParams {
    pub params: ModelParams,
    /// `a + η²/c`.
    pub a_eff: f64,
}

pub fn effective_capacity(params: &ModelParams) -> Result<f64> {
    if !(params.c < 0.0) {
        return Err(Error::RegimeMismatch(format!(
            "quasi-static reduction requires c < 0, got c = {}",
            params.c
        )));
    }
    let a_eff = params.a + params.eta * params.eta / params.c;
    if a_eff > 0.0 {
        Ok(a_eff)
    } else {
        Err(Error::DegenerateCapacity { a_eff })
    }
}

impl QuasiParams {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(QuasiParams {
            params,
            a_eff: effective_capacity(&params)?,
        })
    }

    /// Decay rate `(bλ + dλ²)/a_eff` of a temperature mode.
    pub fn rate(&self, lambda: f64) -> f64 {
        self.params.dissipation_symbol(lambda) / self.a_eff
    }

    /// Displacement coefficient slaved to `θ`: `u = −ηθ/(cλ)`.
    pub fn displacement(&self, lambda: f64, theta: f64) -> f64 {
        -self.params.eta * theta / (self.params.c * lambda)
    }

    /// `sup_n |iω + rate_n|⁻¹` over the given eigenvalues.
    pub fn resolvent_norm(&self, lambdas: &[f64], omega: f64) -> f64 {
        lambdas
            .iter()
            .map(|&l| 1.0 / omega.hypot(self.rate(l)))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiState {
    pub t: f64,
    pub lambdas: Vec<f64>,
    pub theta: Vec<f64>,
    pub u: Vec<f64>,
}

impl QuasiState {
    /// `Σλ²u²`, the mode form of `∫|u_xx|²`.
    pub fn h2_seminorm(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.u)
            .map(|(l, u)| l * l * u * u)
            .sum()
    }

    pub fn theta_l2_sq(&self) -> f64 {
        self.theta.iter().map(|x| x * x).sum()
    }

    /// Largest relative residual of `−cλu − ηθ = 0` over the modes.
    pub fn reduction_residual(&self, params: &ModelParams) -> f64 {
        self.lambdas
            .iter()
            .zip(self.u.iter().zip(&self.theta))
            .map(|(l, (u, th))| {
                let lhs = -params.c * l * u;
                let rhs = params.eta * th;
                let scale = lhs.abs() + rhs.abs();
                if scale == 0.0 {
                    0.0
                } else {
                    (lhs - rhs).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

/// First `theta0.len()` interval modes evolved to time `t`.
pub fn evolve_theta(
    qp: &QuasiParams,
    domain: &SpectralDomain,
    theta0: &[f64],
    t: f64,
) -> Result<QuasiState> {
    let lambdas: Vec<f64> = domain
        .enumerate_modes(theta0.len())
        .iter()
        .map(|m| m.lambda)
        .collect();
    Ok(state_at(qp, &lambdas, theta0, t))
}

fn state_at(qp: &QuasiParams, lambdas: &[f64], theta0: &[f64], t: f64) -> QuasiState {
    let theta: Vec<f64> = lambdas
        .iter()
        .zip(theta0)
        .map(|(&l, &th)| th * (-qp.rate(l) * t).exp())
        .collect();
    let u = lambdas
        .iter()
        .zip(&theta)
        .map(|(&l, &th)| qp.displacement(l, th))
        .collect();
    QuasiState {
        t,
        lambdas: lambdas.to_vec(),
        theta,
        u,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDecayReport {
    pub a_eff: f64,
    /// Rate of the lowest mode.
    pub rate1: f64,
    pub states: Vec<QuasiState>,
    pub h2: Vec<f64>,
    pub theta_l2_sq: Vec<f64>,
    /// `sup_t Σλ²u²(t) / (e^{−2·rate₁·t} Σθ_n(0)²)`.
    pub k_measured: f64,
    /// `η²/c²`, the constant given by the reduction.
    pub k_bound: f64,
    /// Largest `−c·h2 − k‖θ‖·√h2` with `k = |η|`; nonpositive when the
    /// Schwarz bound holds.
    pub schwarz_excess: f64,
    pub schwarz_k: f64,
    pub max_reduction_residual: f64,
    /// Log-linear fit of the seminorm; `gamma` is `−slope`.
    pub fit: Option<DecayFit>,
}

pub fn quasi_decay_report(
    qp: &QuasiParams,
    domain: &SpectralDomain,
    theta0: &[f64],
    t_grid: &[f64],
) -> Result<QuasiDecayReport> {
    if theta0.is_empty() {
        return Err(Error::InvalidParams(
            "at least one temperature mode is needed".into(),
        ));
    }
    let lambdas: Vec<f64> = domain
        .enumerate_modes(theta0.len())
        .iter()
        .map(|m| m.lambda)
        .collect();
    let rate1 = qp.rate(lambdas[0]);
    let initial: f64 = theta0.iter().map(|x| x * x).sum();
    let states: Vec<QuasiState> = t_grid
        .iter()
        .map(|&t| state_at(qp, &lambdas, theta0, t))
        .collect();
    let h2: Vec<f64> = states.iter().map(QuasiState::h2_seminorm).collect();
    let theta_l2_sq: Vec<f64> = states.iter().map(QuasiState::theta_l2_sq).collect();
    let k_measured = if initial > 0.0 {
        t_grid
            .iter()
            .zip(&h2)
            .map(|(t, h)| h / ((-2.0 * rate1 * t).exp() * initial))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let p = qp.params;
    let schwarz_k = p.eta.abs();
    let schwarz_excess = h2
        .iter()
        .zip(&theta_l2_sq)
        .map(|(h, th)| -p.c * h - schwarz_k * th.sqrt() * h.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    let max_reduction_residual = states
        .iter()
        .map(|s| s.reduction_residual(&p))
        .fold(0.0, f64::max);
    let window: Vec<(usize, f64, f64)> = t_grid
        .iter()
        .zip(&h2)
        .enumerate()
        .map(|(i, (t, h))| (i, *t, *h))
        .collect();
    let fit = if initial > 0.0 {
        Some(fit_exponential(&window, |slope| slope)?)
    } else {
        None
    };
    Ok(QuasiDecayReport {
        a_eff: qp.a_eff,
        rate1,
        states,
        h2,
        theta_l2_sq,
        k_measured,
        k_bound: p.eta * p.eta / (p.c * p.c),
        schwarz_excess,
        schwarz_k,
        max_reduction_residual,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Regime;
    use gradiplate_oracles as oracle;
    use nalgebra::{Matrix3, Vector3};
    use std::f64::consts::PI;

    fn params(a: f64, eta: f64, c: f64) -> ModelParams {
        ModelParams::with_regime(1.0, a, 1.0, c, 1.0, eta, Regime::QuasiStatic).unwrap()
    }

    fn unit_interval() -> SpectralDomain {
        SpectralDomain::interval(1.0).unwrap()
    }

    #[test]
    fn capacity_cases() {
        assert_eq!(effective_capacity(&params(1.0, 1.0, -2.0)).unwrap(), 0.5);
        assert!(
            matches!(effective_capacity(&params(1.0, 2.0, -2.0)), Err(Error::DegenerateCapacity { a_eff }) if a_eff == -1.0)
        );
        assert!(
            matches!(effective_capacity(&params(1.0, 1.0, -1.0)), Err(Error::DegenerateCapacity { a_eff }) if a_eff == 0.0)
        );
        assert!(matches!(
            effective_capacity(&ModelParams::unit()),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn first_mode_rate_matches_integration() {
        let qp = QuasiParams::new(params(1.0, 1.0, -2.0)).unwrap();
        let p2 = PI * PI;
        let rate = qp.rate(p2);
        let want = 2.0 * (p2 + p2 * p2);
        assert!((rate - want).abs() <= 1e-13 * want);
        assert!((rate - 214.557).abs() < 1e-3);
        let t = 0.01;
        let s = evolve_theta(&qp, &unit_interval(), &[1.0], t).unwrap();
        let m = Matrix3::from_diagonal(&Vector3::new(-rate, 0.0, 0.0));
        let x = oracle::integrate_linear(&m, &Vector3::new(1.0, 0.0, 0.0), t, 1e-13, 1e-30);
        assert!((s.theta[0] - x[0]).abs() <= 1e-10 * x[0]);
        assert!((s.u[0] - s.theta[0] / (2.0 * p2)).abs() <= 1e-15 * s.u[0]);
        assert!(s.reduction_residual(&qp.params) <= 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let qp = QuasiParams::new(params(1.0, 1.0, -2.0)).unwrap();
        let s = evolve_theta(&qp, &unit_interval(), &[0.0, 0.0], 1.0).unwrap();
        assert!(s.theta.iter().chain(&s.u).all(|x| *x == 0.0));
        let r = quasi_decay_report(&qp, &unit_interval(), &[0.0], &[0.0, 0.1]).unwrap();
        assert!(r.h2.iter().all(|x| *x == 0.0));
        assert!(r.fit.is_none());
    }

    #[test]
    fn single_mode_seminorm_rate() {
        let qp = QuasiParams::new(params(1.0, 1.0, -2.0)).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 1e-3).collect();
        let r = quasi_decay_report(&qp, &unit_interval(), &[1.0], &grid).unwrap();
        let fit = r.fit.unwrap();
        assert!((fit.gamma - 2.0 * r.rate1).abs() <= 1e-6 * 2.0 * r.rate1);
        assert!(fit.residual <= 1e-6);
        assert!(r.k_measured <= r.k_bound * (1.0 + 1e-12));
        assert!(r.schwarz_excess <= 1e-12 * r.h2[0]);
    }

    #[test]
    fn multimode_tail_rate() {
        let qp = QuasiParams::new(params(1.0, 1.0, -2.0)).unwrap();
        let grid: Vec<f64> = (0..40).map(|i| 0.05 + i as f64 * 2e-3).collect();
        let r = quasi_decay_report(&qp, &unit_interval(), &[1.0, 1.0, 1.0], &grid).unwrap();
        let fit = r.fit.unwrap();
        assert!((fit.gamma - 2.0 * r.rate1).abs() <= 1e-6 * 2.0 * r.rate1);
        let rates: Vec<f64> = r.states[0].lambdas.iter().map(|&l| qp.rate(l)).collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn scalar_resolvent_vanishes() {
        let qp = QuasiParams::new(params(1.0, 1.0, -2.0)).unwrap();
        let lambdas: Vec<f64> = unit_interval()
            .enumerate_modes(32)
            .iter()
            .map(|m| m.lambda)
            .collect();
        for w in [1e3, 1e4, 1e5] {
            let n = qp.resolvent_norm(&lambdas, w);
            assert!(n * w <= 1.0 && n * w > 0.9);
        }
    }
}
