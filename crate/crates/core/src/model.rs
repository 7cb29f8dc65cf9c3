//! Constitutive parameters, hinged spectral domains and the per-mode
//! generator blocks.
//!
//! On an interval or a rectangle the hinged conditions
//! `u = Δu = θ = Δθ = 0` are diagonalised by unit-normalised sine
//! eigenfunctions of the Dirichlet Laplacian, `-Δφ = λφ`. Projecting the
//! plate and heat equations onto one such eigenfunction replaces `Δ` by `-λ`
//! and `Δ²` by `λ²`, leaving a 3×3 real linear system in the coefficients
//! `(u, v = u_t, θ)`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::Matrix3;

use crate::error::{Error, Result};

/// Which sign convention the elastic coefficient is expected to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `c > 0`: contraction semigroup, exponential stability.
    Stable,
    /// `c < 0`: pre-stressed plate, unique but exponentially unstable.
    Unstable,
    /// `c < 0` with inertia dropped; `a + η²/c > 0` is checked at use sites.
    QuasiStatic,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Stable => "stable",
            Regime::Unstable => "unstable",
            Regime::QuasiStatic => "quasistatic",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stable" => Ok(Regime::Stable),
            "unstable" => Ok(Regime::Unstable),
            "quasistatic" | "quasi-static" | "quasi_static" => Ok(Regime::QuasiStatic),
            other => Err(Error::InvalidParams(format!("unknown regime `{other}`"))),
        }
    }
}

/// Constitutive constants of the coupled plate/heat system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Mass density.
    pub rho: f64,
    /// Heat capacity.
    pub a: f64,
    /// Thermal conductivity.
    pub b: f64,
    /// Elasticity coefficient.
    pub c: f64,
    /// Second-gradient (bi-Laplacian) heat coefficient.
    pub d: f64,
    /// Thermoelastic coupling.
    pub eta: f64,
    pub regime: Regime,
}

impl ModelParams {
    /// Builds a parameter set, inferring the regime from the sign of `c`.
    pub fn new(rho: f64, a: f64, b: f64, c: f64, d: f64, eta: f64) -> Result<Self> {
        let regime = if c > 0.0 {
            Regime::Stable
        } else {
            Regime::Unstable
        };
        Self::with_regime(rho, a, b, c, d, eta, regime)
    }

    pub fn with_regime(
        rho: f64,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        eta: f64,
        regime: Regime,
    ) -> Result<Self> {
        let p = ModelParams {
            rho,
            a,
            b,
            c,
            d,
            eta,
            regime,
        };
        p.validate()?;
        Ok(p)
    }

    /// All six constants equal to one, stable regime.
    pub fn unit() -> Self {
        ModelParams {
            rho: 1.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            eta: 1.0,
            regime: Regime::Stable,
        }
    }

    /// The classical (`d = 0`) plate used as a contrast run. This is the only
    /// constructor that admits `d = 0`.
    pub fn classical_contrast(rho: f64, a: f64, b: f64, c: f64, eta: f64) -> Result<Self> {
        let p = ModelParams {
            rho,
            a,
            b,
            c,
            d: 1.0,
            eta,
            regime: Regime::Stable,
        };
        p.validate()?;
        Ok(ModelParams { d: 0.0, ..p })
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("rho", self.rho),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("eta", self.eta),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} = {value} is not finite"
                )));
            }
        }
        for (name, value) in [
            ("rho", self.rho),
            ("a", self.a),
            ("b", self.b),
            ("d", self.d),
        ] {
            if value <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} = {value} must be > 0"
                )));
            }
        }
        if self.eta == 0.0 {
            return Err(Error::InvalidParams("eta must be nonzero".into()));
        }
        if self.c == 0.0 {
            return Err(Error::InvalidParams("c must be nonzero".into()));
        }
        match self.regime {
            Regime::Stable if self.c < 0.0 => Err(Error::RegimeMismatch(format!(
                "stable regime requires c > 0, got c = {}",
                self.c
            ))),
            Regime::Unstable | Regime::QuasiStatic if self.c > 0.0 => {
                Err(Error::RegimeMismatch(format!(
                    "{} regime requires c < 0, got c = {}",
                    self.regime.name(),
                    self.c
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn require_stable(&self) -> Result<()> {
        if self.c > 0.0 {
            Ok(())
        } else {
            Err(Error::RegimeMismatch(format!(
                "operation requires c > 0, got c = {}",
                self.c
            )))
        }
    }

    /// Heat dissipation symbol `bλ + dλ²` of one mode.
    pub fn dissipation_symbol(&self, lambda: f64) -> f64 {
        self.b * lambda + self.d * lambda * lambda
    }
}

/// Index of a sine eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeIndex {
    Line(u32),
    Plane(u32, u32),
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Line(n) => write!(f, "{n}"),
            ModeIndex::Plane(j, k) => write!(f, "{j}_{k}"),
        }
    }
}

/// A Dirichlet-Laplacian eigenpair label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub index: ModeIndex,
    pub lambda: f64,
}

/// A point where the sine series is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Line(f64),
    Plane(f64, f64),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Line(x) => write!(f, "({x})"),
            Point::Plane(x, y) => write!(f, "({x}, {y})"),
        }
    }
}

/// Interval `(0, L)` or rectangle `(0, L1) × (0, L2)` with hinged edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDomain {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

impl SpectralDomain {
    pub fn interval(length: f64) -> Result<Self> {
        check_length("length", length)?;
        Ok(SpectralDomain::Interval { length })
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self> {
        check_length("lx", lx)?;
        check_length("ly", ly)?;
        Ok(SpectralDomain::Rectangle { lx, ly })
    }

    pub fn dimension(&self) -> usize {
        match self {
            SpectralDomain::Interval { .. } => 1,
            SpectralDomain::Rectangle { .. } => 2,
        }
    }

    /// Eigenvalue of the Dirichlet Laplacian for `index`.
    pub fn eigenvalue(&self, index: ModeIndex) -> f64 {
        match (*self, index) {
            (SpectralDomain::Interval { length }, ModeIndex::Line(n)) => {
                let k = n as f64 * PI / length;
                k * k
            }
            (SpectralDomain::Rectangle { lx, ly }, ModeIndex::Plane(j, k)) => {
                let (j, k) = (j as f64, k as f64);
                PI * PI * (j * j / (lx * lx) + k * k / (ly * ly))
            }
            _ => f64::NAN,
        }
    }

    /// The `count` modes of smallest eigenvalue, ascending, ties broken
    /// lexicographically on the index.
    pub fn enumerate_modes(&self, count: usize) -> Vec<Mode> {
        match *self {
            SpectralDomain::Interval { .. } => (1..=count as u32)
                .map(|n| {
                    let index = ModeIndex::Line(n);
                    Mode {
                        index,
                        lambda: self.eigenvalue(index),
                    }
                })
                .collect(),
            SpectralDomain::Rectangle { lx, ly } => {
                if count == 0 {
                    return Vec::new();
                }
                // Every mode with j ≤ J, k ≤ K where J, K cover a disc of
                // radius large enough to hold `count` lattice points.
                let mut reach = (count as f64).sqrt().ceil() as u32 + 1;
                loop {
                    let threshold = {
                        let r = reach as f64;
                        PI * PI * (r * r) / (lx.max(ly) * lx.max(ly))
                    };
                    let jmax = (threshold.sqrt() * lx / PI).floor() as u32 + 1;
                    let kmax = (threshold.sqrt() * ly / PI).floor() as u32 + 1;
                    let mut modes: Vec<Mode> = (1..=jmax)
                        .flat_map(|j| (1..=kmax).map(move |k| ModeIndex::Plane(j, k)))
                        .map(|index| Mode {
                            index,
                            lambda: self.eigenvalue(index),
                        })
                        .filter(|m| m.lambda <= threshold)
                        .collect();
                    if modes.len() >= count {
                        modes.sort_by(compare_modes);
                        modes.truncate(count);
                        return modes;
                    }
                    reach *= 2;
                }
            }
        }
    }

    pub fn contains(&self, point: Point) -> bool {
        match (*self, point) {
            (SpectralDomain::Interval { length }, Point::Line(x)) => (0.0..=length).contains(&x),
            (SpectralDomain::Rectangle { lx, ly }, Point::Plane(x, y)) => {
                (0.0..=lx).contains(&x) && (0.0..=ly).contains(&y)
            }
            _ => false,
        }
    }

    fn on_boundary(&self, point: Point) -> bool {
        match (*self, point) {
            (SpectralDomain::Interval { length }, Point::Line(x)) => x == 0.0 || x == length,
            (SpectralDomain::Rectangle { lx, ly }, Point::Plane(x, y)) => {
                x == 0.0 || x == lx || y == 0.0 || y == ly
            }
            _ => false,
        }
    }

    /// Value of the unit-normalised eigenfunction at `point`. Boundary
    /// points return exactly zero.
    pub fn eigenfunction(&self, index: ModeIndex, point: Point) -> Result<f64> {
        if !self.contains(point) {
            return Err(Error::PointOutsideDomain(point.to_string()));
        }
        if self.on_boundary(point) {
            return Ok(0.0);
        }
        match (*self, index, point) {
            (SpectralDomain::Interval { length }, ModeIndex::Line(n), Point::Line(x)) => {
                Ok((2.0 / length).sqrt() * (n as f64 * PI * x / length).sin())
            }
            (SpectralDomain::Rectangle { lx, ly }, ModeIndex::Plane(j, k), Point::Plane(x, y)) => {
                let norm = 2.0 / (lx * ly).sqrt();
                Ok(norm * (j as f64 * PI * x / lx).sin() * (k as f64 * PI * y / ly).sin())
            }
            _ => Err(Error::InvalidParams(format!(
                "mode index {index} does not belong to this domain"
            ))),
        }
    }
}

fn check_length(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{name} = {value} must be a positive length"
        )))
    }
}

fn compare_modes(x: &Mode, y: &Mode) -> Ordering {
    x.lambda.total_cmp(&y.lambda).then(x.index.cmp(&y.index))
}

/// Time orientation of the heat equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    /// The backward-in-time system: the heat dissipation terms change sign.
    Backward,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// Generator block of one mode acting on `(u, v, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatrix {
    pub entries: Matrix3<f64>,
    pub direction: Direction,
}

/// Projects the plate/heat system onto a mode of eigenvalue `lambda`.
pub fn mode_matrix(params: &ModelParams, lambda: f64, direction: Direction) -> ModeMatrix {
    let ModelParams { rho, a, c, eta, .. } = *params;
    let heat = params.dissipation_symbol(lambda) / a;
    let heat = match direction {
        Direction::Forward => -heat,
        Direction::Backward => heat,
    };
    #[rustfmt::skip]
    let entries = Matrix3::new(
        0.0,                        1.0,               0.0,
        -(c / rho) * lambda * lambda, 0.0,             -(eta / rho) * lambda,
        0.0,                        (eta / a) * lambda, heat,
    );
    ModeMatrix { entries, direction }
}

/// Per-mode weights of the energy norm `c‖Δu‖² + ρ‖v‖² + a‖θ‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilbertWeight {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    /// Set when `c < 0`: the weight uses `|c|` and the quadratic form is
    /// not the (indefinite) energy.
    pub pseudo_norm: bool,
}

impl HilbertWeight {
    pub fn as_array(&self) -> [f64; 3] {
        [self.u, self.v, self.theta]
    }
}

pub fn hilbert_weight(params: &ModelParams, lambda: f64) -> HilbertWeight {
    HilbertWeight {
        u: params.c.abs() * lambda * lambda,
        v: params.rho,
        theta: params.a,
        pseudo_norm: params.c < 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_eigenvalues() {
        let dom = SpectralDomain::interval(PI).unwrap();
        let l: Vec<f64> = dom.enumerate_modes(3).iter().map(|m| m.lambda).collect();
        for (got, want) in l.iter().zip([1.0, 4.0, 9.0]) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
        let unit = SpectralDomain::interval(1.0).unwrap().enumerate_modes(1);
        assert_relative_eq!(unit[0].lambda, PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn square_degeneracy_is_lexicographic() {
        let dom = SpectralDomain::rectangle(PI, PI).unwrap();
        let modes = dom.enumerate_modes(4);
        let idx: Vec<ModeIndex> = modes.iter().map(|m| m.index).collect();
        assert_eq!(
            idx,
            vec![
                ModeIndex::Plane(1, 1),
                ModeIndex::Plane(1, 2),
                ModeIndex::Plane(2, 1),
                ModeIndex::Plane(2, 2)
            ]
        );
        for (m, want) in modes.iter().zip([2.0, 5.0, 5.0, 8.0]) {
            assert_relative_eq!(m.lambda, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn rectangle_enumeration_matches_brute_force() {
        let dom = SpectralDomain::rectangle(1.0, 2.7).unwrap();
        let modes = dom.enumerate_modes(40);
        let mut all: Vec<Mode> = (1..60u32)
            .flat_map(|j| (1..60u32).map(move |k| ModeIndex::Plane(j, k)))
            .map(|index| Mode {
                index,
                lambda: dom.eigenvalue(index),
            })
            .collect();
        all.sort_by(compare_modes);
        assert_eq!(modes, all[..40].to_vec());
        assert!(modes.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    }

    #[test]
    fn unit_mode_matrices() {
        let p = ModelParams::unit();
        let f = mode_matrix(&p, 1.0, Direction::Forward).entries;
        assert_eq!(
            f,
            Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.0, -2.0)
        );
        let b = mode_matrix(&p, 1.0, Direction::Backward).entries;
        assert_eq!(
            b,
            Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.0, 2.0)
        );
    }

    #[test]
    fn trace_is_heat_symbol() {
        let p = ModelParams::new(2.0, 3.0, 0.5, 1.5, 0.25, -0.7).unwrap();
        let lambda = 7.3;
        let m = mode_matrix(&p, lambda, Direction::Forward).entries;
        assert_eq!(m.trace(), -(p.b * lambda + p.d * lambda * lambda) / p.a);
    }

    #[test]
    fn boundary_values_vanish() {
        let dom = SpectralDomain::interval(2.5).unwrap();
        for n in 1..20 {
            assert_eq!(
                dom.eigenfunction(ModeIndex::Line(n), Point::Line(0.0))
                    .unwrap(),
                0.0
            );
            assert_eq!(
                dom.eigenfunction(ModeIndex::Line(n), Point::Line(2.5))
                    .unwrap(),
                0.0
            );
        }
        let rect = SpectralDomain::rectangle(1.0, 2.0).unwrap();
        assert_eq!(
            rect.eigenfunction(ModeIndex::Plane(3, 2), Point::Plane(0.4, 2.0))
                .unwrap(),
            0.0
        );
        assert!(matches!(
            dom.eigenfunction(ModeIndex::Line(1), Point::Line(3.0)),
            Err(Error::PointOutsideDomain(_))
        ));
    }

    #[test]
    fn regime_validation() {
        assert!(matches!(
            ModelParams::with_regime(1.0, 1.0, 1.0, -1.0, 1.0, 1.0, Regime::Stable),
            Err(Error::RegimeMismatch(_))
        ));
        assert!(
            ModelParams::with_regime(1.0, 1.0, 1.0, -1.0, 1.0, 1.0, Regime::QuasiStatic).is_ok()
        );
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1.0, -1.0, 1.0).is_err());
        assert_eq!(
            ModelParams::classical_contrast(1.0, 1.0, 1.0, 1.0, 1.0)
                .unwrap()
                .d,
            0.0
        );
        assert!(SpectralDomain::interval(0.0).is_err());
    }

    #[test]
    fn weights() {
        let w = hilbert_weight(&ModelParams::unit(), 2.0);
        assert_eq!(w.as_array(), [4.0, 1.0, 1.0]);
        assert!(!w.pseudo_norm);
        let neg = ModelParams::new(1.0, 1.0, 1.0, -1.0, 1.0, 1.0).unwrap();
        let w = hilbert_weight(&neg, 1.0);
        assert_eq!(w.as_array(), [1.0, 1.0, 1.0]);
        assert!(w.pseudo_norm);
    }
}
