//! Lagrange-identity functionals of the backward system and the convexity
//! functional used for `c < 0`.

use crate::error::{Error, Result};
use crate::model::{Direction, ModelParams};
use crate::propagator::{SpectralState, Trajectory};
use crate::quadrature::{cumulative_richardson, cumulative_simpson};

/// Label of the time weight added to `F`.
pub const TIME_WEIGHT: &str = "omega*(t+t0)^2";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    /// `½Σ(ρv² + cλ²u² + aθ²)`.
    pub l1: f64,
    /// `½Σ(ρv² + cλ²u² − aθ²)`.
    pub l2: f64,
    /// `L₂ + εL₁`.
    pub l: f64,
    pub epsilon: f64,
}

pub fn lagrange_functionals(
    params: &ModelParams,
    state: &SpectralState,
    epsilon: f64,
) -> Result<LyapunovSample> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let (mechanical, thermal) = quadratic_parts(params, state);
    let l1 = 0.5 * (mechanical + thermal);
    let l2 = 0.5 * (mechanical - thermal);
    Ok(LyapunovSample {
        l1,
        l2,
        l: l2 + epsilon * l1,
        epsilon,
    })
}

/// `(Σ ρv² + cλ²u², Σ aθ²)`.
fn quadratic_parts(params: &ModelParams, state: &SpectralState) -> (f64, f64) {
    let mut mechanical = 0.0;
    let mut thermal = 0.0;
    for (m, s) in &state.modes {
        mechanical += params.rho * s.v * s.v + params.c * m.lambda * m.lambda * s.u * s.u;
        thermal += params.a * s.theta * s.theta;
    }
    (mechanical, thermal)
}

/// Right-hand sides of the backward identities:
/// `dL₁/dt = Σμ̃θ²` and `dL₂/dt = −Σμ̃θ² − 2ηΣλvθ`, with `μ̃ = bλ + dλ²`.
pub fn backward_rates(params: &ModelParams, state: &SpectralState) -> (f64, f64) {
    let mut dissipation = 0.0;
    let mut coupling = 0.0;
    for (m, s) in &state.modes {
        dissipation += params.dissipation_symbol(m.lambda) * s.theta * s.theta;
        coupling += m.lambda * s.v * s.theta;
    }
    (dissipation, -dissipation - 2.0 * params.eta * coupling)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardIdentityReport {
    pub times: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    /// Centered differences at interior samples (first and last are NaN).
    pub dl1_fd: Vec<f64>,
    pub dl2_fd: Vec<f64>,
    pub dl1_exact: Vec<f64>,
    pub dl2_exact: Vec<f64>,
    pub max_abs_residual_l1: f64,
    pub max_abs_residual_l2: f64,
    /// Residuals divided by the largest `|dL/dt|` along the trajectory.
    pub max_rel_residual_l1: f64,
    pub max_rel_residual_l2: f64,
}

impl BackwardIdentityReport {
    pub fn max_rel_residual(&self) -> f64 {
        self.max_rel_residual_l1.max(self.max_rel_residual_l2)
    }
}

pub fn verify_backward_identities(
    params: &ModelParams,
    trajectory: &Trajectory,
) -> Result<BackwardIdentityReport> {
    if trajectory.direction != Direction::Backward {
        return Err(Error::PreconditionUnmet(
            "trajectory must come from the backward system".into(),
        ));
    }
    let n = trajectory.samples.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let times = trajectory.times();
    let h = times[1] - times[0];
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h)
    {
        return Err(Error::InvalidTimeGrid(
            "centered differences need a uniform grid".into(),
        ));
    }
    let mut l1 = Vec::with_capacity(n);
    let mut l2 = Vec::with_capacity(n);
    let mut dl1_exact = Vec::with_capacity(n);
    let mut dl2_exact = Vec::with_capacity(n);
    for s in &trajectory.samples {
        let (mech, therm) = quadratic_parts(params, &s.state);
        l1.push(0.5 * (mech + therm));
        l2.push(0.5 * (mech - therm));
        let (r1, r2) = backward_rates(params, &s.state);
        dl1_exact.push(r1);
        dl2_exact.push(r2);
    }
    let centered = |f: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if i == 0 || i + 1 == n {
                    f64::NAN
                } else {
                    (f[i + 1] - f[i - 1]) / (times[i + 1] - times[i - 1])
                }
            })
            .collect()
    };
    let dl1_fd = centered(&l1);
    let dl2_fd = centered(&l2);
    let stats = |fd: &[f64], exact: &[f64]| {
        let abs = (1..n - 1)
            .map(|i| (fd[i] - exact[i]).abs())
            .fold(0.0, f64::max);
        let scale = exact.iter().map(|x| x.abs()).fold(0.0, f64::max);
        (abs, if scale > 0.0 { abs / scale } else { abs })
    };
    let (a1, r1) = stats(&dl1_fd, &dl1_exact);
    let (a2, r2) = stats(&dl2_fd, &dl2_exact);
    Ok(BackwardIdentityReport {
        times,
        l1,
        l2,
        dl1_fd,
        dl2_fd,
        dl1_exact,
        dl2_exact,
        max_abs_residual_l1: a1,
        max_abs_residual_l2: a2,
        max_rel_residual_l1: r1,
        max_rel_residual_l2: r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GronwallOutcome {
    /// The smallest `k*` with `L(t) ≤ L(0)e^{k*t}` on the samples.
    Bound { k_star: f64 },
    /// `L(0) = 0` and `L` vanishes at every sample.
    IdenticallyZero,
    /// `L(0) = 0` but `L` does not vanish.
    ZeroDataViolated { max_abs: f64 },
    /// `L(0) < 0`: the exponential bound carries no information.
    NotApplicable { l0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub epsilon: f64,
    pub l: Vec<f64>,
    pub l0: f64,
    pub outcome: GronwallOutcome,
}

pub fn gronwall_check(
    params: &ModelParams,
    trajectory: &Trajectory,
    epsilon: f64,
) -> Result<GronwallReport> {
    let l = trajectory
        .samples
        .iter()
        .map(|s| lagrange_functionals(params, &s.state, epsilon).map(|x| x.l))
        .collect::<Result<Vec<_>>>()?;
    let l0 = *l
        .first()
        .ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    let outcome = if l0 == 0.0 {
        let max_abs = l.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if max_abs == 0.0 {
            GronwallOutcome::IdenticallyZero
        } else {
            GronwallOutcome::ZeroDataViolated { max_abs }
        }
    } else if l0 < 0.0 {
        GronwallOutcome::NotApplicable { l0 }
    } else {
        let k_star = trajectory
            .samples
            .iter()
            .zip(&l)
            .skip(1)
            .filter(|(_, v)| **v > 0.0)
            .map(|(s, v)| (v / l0).ln() / s.t)
            .fold(f64::NEG_INFINITY, f64::max);
        GronwallOutcome::Bound { k_star }
    };
    Ok(GronwallReport {
        epsilon,
        l,
        l0,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiReport {
    /// `Φ_n = −(aθ_n − ηλ_n u_n)/(bλ_n + dλ_n²)`, one per mode.
    pub phi: Vec<f64>,
    /// `ν = Σ(bλ_n + dλ_n²)Φ_n²`.
    pub nu: f64,
    pub max_residual: f64,
}

/// Mode coefficients of the solution of `bΔΦ − dΔ²Φ = aθ(0) + ηΔu(0)`.
pub fn phi_coefficients(params: &ModelParams, initial: &SpectralState) -> PhiReport {
    let mut phi = Vec::with_capacity(initial.modes.len());
    let mut nu = 0.0;
    let mut max_residual = 0.0f64;
    for (m, s) in &initial.modes {
        let symbol = params.dissipation_symbol(m.lambda);
        let source = params.a * s.theta - params.eta * m.lambda * s.u;
        let value = -source / symbol;
        let scale = (symbol * value).abs()
            + (params.a * s.theta).abs()
            + (params.eta * m.lambda * s.u).abs();
        let residual = (-symbol * value - source).abs();
        max_residual = max_residual.max(if scale > 0.0 {
            residual / scale
        } else {
            residual
        });
        nu += symbol * value * value;
        phi.push(value);
    }
    PhiReport {
        phi,
        nu,
        max_residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityState {
    pub t: f64,
    pub f: f64,
    pub fdot: f64,
    pub fddot: f64,
    pub nu: f64,
    pub omega_const: f64,
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityRun {
    pub states: Vec<ConvexityState>,
    pub phi: PhiReport,
    /// Always [`TIME_WEIGHT`].
    pub time_weight: &'static str,
}

/// `F(t) = ρΣu² + ∫₀ᵗΣμ̃Ψ² + ω(t+t₀)²` with `Ψ = Φ + ∫₀ᵗθ`, and
///
/// ```text
/// Ḟ = 2ρΣuv + Σμ̃Ψ² + 2ω(t+t₀)
/// F̈ = 2ρΣv² − 2Σ(cλ²u² + aθ²) + 2ω
/// ```
///
/// where `F̈` uses the integrated heat equation `μ̃Ψ = ηλu − aθ`.
pub fn convexity_trajectory(
    params: &ModelParams,
    trajectory: &Trajectory,
    omega_const: f64,
    t0: f64,
) -> Result<ConvexityRun> {
    if trajectory.direction != Direction::Forward {
        return Err(Error::PreconditionUnmet(
            "convexity functional needs a forward trajectory".into(),
        ));
    }
    if !(omega_const >= 0.0 && t0 >= 0.0) {
        return Err(Error::PreconditionUnmet(format!(
            "omega_const = {omega_const} and t0 = {t0} must be ≥ 0"
        )));
    }
    let n = trajectory.samples.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let times = trajectory.times();
    let initial = &trajectory.samples[0].state;
    let phi = phi_coefficients(params, initial);
    let modes = initial.modes.len();

    let mut psi_term = vec![0.0; n];
    for k in 0..modes {
        let theta: Vec<f64> = trajectory
            .samples
            .iter()
            .map(|s| s.state.modes[k].1.theta)
            .collect();
        let alpha = cumulative_richardson(&times, &theta)?;
        let symbol = params.dissipation_symbol(initial.modes[k].0.lambda);
        for (acc, a) in psi_term.iter_mut().zip(&alpha) {
            let psi = phi.phi[k] + a;
            *acc += symbol * psi * psi;
        }
    }
    let psi_integral = if n >= 9 {
        cumulative_richardson(&times, &psi_term)?
    } else {
        cumulative_simpson(&times, &psi_term)?
    };

    let states = trajectory
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (mut uu, mut uv, mut vv, mut potential) = (0.0, 0.0, 0.0, 0.0);
            for (m, x) in &s.state.modes {
                uu += x.u * x.u;
                uv += x.u * x.v;
                vv += x.v * x.v;
                potential +=
                    params.c * m.lambda * m.lambda * x.u * x.u + params.a * x.theta * x.theta;
            }
            let shifted = s.t + t0;
            ConvexityState {
                t: s.t,
                f: params.rho * uu + psi_integral[i] + omega_const * shifted * shifted,
                fdot: 2.0 * params.rho * uv + psi_term[i] + 2.0 * omega_const * shifted,
                fddot: 2.0 * params.rho * vv - 2.0 * potential + 2.0 * omega_const,
                nu: phi.nu,
                omega_const,
                t0,
            }
        })
        .collect();
    Ok(ConvexityRun {
        states,
        phi,
        time_weight: TIME_WEIGHT,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    /// `F̈F − (Ḟ−ν)² + 2(ω + E₀)F` at every sample.
    pub residuals: Vec<f64>,
    pub min_residual: f64,
    /// Largest of `F²`, `(Ḟ−ν)²` and `|F̈F|` along the run.
    pub scale: f64,
    pub tolerance: f64,
    pub holds: bool,
}

pub fn convexity_residual_check(states: &[ConvexityState], e0: f64) -> ConvexityReport {
    let mut scale = 0.0f64;
    let residuals: Vec<f64> = states
        .iter()
        .map(|s| {
            let lead = s.fddot * s.f;
            let square = (s.fdot - s.nu) * (s.fdot - s.nu);
            scale = scale.max(s.f * s.f).max(square).max(lead.abs());
            lead - square + 2.0 * (s.omega_const + e0) * s.f
        })
        .collect();
    let min_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let tolerance = 1e-8 * scale;
    let holds = residuals.is_empty() || min_residual >= -tolerance;
    ConvexityReport {
        residuals,
        min_residual,
        scale,
        tolerance,
        holds,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstabilityReport {
    /// `(Ḟ₀ − 2ν)/F₀`.
    pub exponent: f64,
    pub bound: Vec<f64>,
    /// Smallest `(F − bound)/max(F, bound)` over the samples.
    pub min_relative_margin: f64,
    pub holds: bool,
    /// `Ḟ/(2F)` at the last sample.
    pub growth_rate: f64,
    /// Slope of `log F` over the final quarter of the samples.
    pub log_slope: f64,
}

/// Checks `F(t) ≥ (Ḟ₀F₀/(Ḟ₀−2ν))e^{kt} − 2νF₀/(Ḟ₀−2ν)` with `k = (Ḟ₀−2ν)/F₀`.
pub fn instability_lower_bound(states: &[ConvexityState], e0: f64) -> Result<InstabilityReport> {
    let first = states
        .first()
        .ok_or(Error::InsufficientSamples { needed: 2, got: 0 })?;
    let (f0, fd0, nu) = (first.f, first.fdot, first.nu);
    if e0 > 0.0 {
        return Err(Error::PreconditionUnmet(format!("E(0) = {e0} must be ≤ 0")));
    }
    if e0 == 0.0 && !(fd0 > 0.0) {
        return Err(Error::PreconditionUnmet(format!(
            "E(0) = 0 needs Ḟ(0) > 0, got {fd0}"
        )));
    }
    if !(f0 > 0.0) {
        return Err(Error::PreconditionUnmet(format!("F(0) = {f0} must be > 0")));
    }
    if !(fd0 > 2.0 * nu) {
        return Err(Error::PreconditionUnmet(format!(
            "Ḟ(0) = {fd0} must exceed 2ν = {}",
            2.0 * nu
        )));
    }
    let gap = fd0 - 2.0 * nu;
    let exponent = gap / f0;
    let bound: Vec<f64> = states
        .iter()
        .map(|s| fd0 * f0 / gap * (exponent * (s.t - first.t)).exp() - 2.0 * nu * f0 / gap)
        .collect();
    let min_relative_margin = states
        .iter()
        .zip(&bound)
        .map(|(s, b)| (s.f - b) / s.f.abs().max(b.abs()))
        .fold(f64::INFINITY, f64::min);
    let last = states.last().unwrap_or(first);
    let tail = &states[states.len() - states.len() / 4 - 1..];
    let t: Vec<f64> = tail.iter().map(|s| s.t).collect();
    let y: Vec<f64> = tail.iter().map(|s| s.f.ln()).collect();
    let log_slope = if t.len() >= 2 {
        crate::spectrum::fit_line(&t, &y).0
    } else {
        f64::NAN
    };
    Ok(InstabilityReport {
        exponent,
        bound,
        min_relative_margin,
        holds: min_relative_margin >= -1e-12,
        growth_rate: last.fdot / (2.0 * last.f),
        log_slope,
    })
}

/// `Ḟ(0) = 2ρΣu₀v₀ + ν + 2ωt₀`.
pub fn initial_fdot(
    params: &ModelParams,
    initial: &SpectralState,
    omega_const: f64,
    t0: f64,
) -> f64 {
    let uv: f64 = initial.modes.iter().map(|(_, s)| s.u * s.v).sum();
    2.0 * params.rho * uv + phi_coefficients(params, initial).nu + 2.0 * omega_const * t0
}

/// Smallest `t₀` in `{0, 2⁻¹⁰, …, 1, 2, 4, …}` up to `horizon` with
/// `Ḟ(0) > 2ν`.
pub fn find_t0(
    params: &ModelParams,
    initial: &SpectralState,
    omega_const: f64,
    horizon: f64,
) -> Result<f64> {
    let nu = phi_coefficients(params, initial).nu;
    let ok = |t0: f64| initial_fdot(params, initial, omega_const, t0) > 2.0 * nu;
    if ok(0.0) {
        return Ok(0.0);
    }
    let mut t0 = 2f64.powi(-10);
    while t0 <= horizon {
        if ok(t0) {
            return Ok(t0);
        }
        t0 *= 2.0;
    }
    Err(Error::PreconditionUnmet(format!(
        "no t0 ≤ {horizon} gives Ḟ(0) > 2ν = {}",
        2.0 * nu
    )))
}
