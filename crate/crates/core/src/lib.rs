//! Spectral simulation and semigroup diagnostics for hinged thermoelastic
//! plates whose heat equation carries a second-gradient (bi-Laplacian)
//! term:
//!
//! ```text
//! ρ u_tt = −c Δ²u + η Δθ
//! a θ_t  =  b Δθ − d Δ²θ − η Δu_t
//! ```
//!
//! with `u = Δu = θ = Δθ = 0` on the boundary of an interval or rectangle.
//! Every quantity is computed mode by mode in the sine eigenbasis.

pub mod cubic;
pub mod error;
pub mod expm;
pub mod functionals;
pub mod model;
pub mod propagator;
pub mod quadrature;
pub mod quasistatic;
pub mod resolvent;
pub mod spectrum;
pub mod svd;

pub use error::{Error, Result};
pub use functionals::{
    convexity_residual_check, convexity_trajectory, find_t0, gronwall_check,
    instability_lower_bound, lagrange_functionals, phi_coefficients, verify_backward_identities,
    BackwardIdentityReport, ConvexityReport, ConvexityRun, ConvexityState, GronwallOutcome,
    GronwallReport, InstabilityReport, LyapunovSample, PhiReport,
};
pub use model::{
    hilbert_weight, mode_matrix, Direction, HilbertWeight, Mode, ModeIndex, ModeMatrix,
    ModelParams, Point, Regime, SpectralDomain,
};
pub use propagator::{
    energy_balance_report, evolve, evolve_mode, synthesize_field, uniform_times, EnergyBalance,
    EnergyBreakdown, FieldValue, ModePropagator, ModeState, SpectralState, Trajectory,
    TrajectorySample,
};
pub use quasistatic::{
    effective_capacity, evolve_theta, quasi_decay_report, QuasiDecayReport, QuasiParams, QuasiState,
};
pub use resolvent::{
    mode_resolvent_norm, nondiff_direct_v_sq, nondiff_limit_check, nondiff_sequence,
    resolvent_norm, resonance_grid, scan_imaginary_axis, solve_mode_resolvent, Branch,
    NondiffLimitReport, NondiffSequencePoint, ResolventRhs, ResolventScan,
};
pub use spectrum::{
    asymptotic_strip, fit_decay, log_spaced, mode_eigenvalues, spectral_abscissa, DecayFit,
    ModeSpectrum, StripReport,
};
