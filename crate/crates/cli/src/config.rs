//! Plain-text run configuration: one `key = value` per line, `#` starts a
//! comment. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use gradiplate_core::{
    Branch, ModeIndex, ModeState, ModelParams, Regime, SpectralDomain, SpectralState,
};

use crate::CliError;

pub const KEYS: &[&str] = &[
    "rho",
    "a",
    "b",
    "c",
    "d",
    "eta",
    "regime",
    "classical",
    "domain",
    "length",
    "lx",
    "ly",
    "modes",
    "t_end",
    "dt",
    "samples",
    "initial",
    "u",
    "v",
    "theta",
    "omega_grid",
    "omega_min",
    "omega_max",
    "omega_count",
    "omega_values",
    "epsilon",
    "omega_const",
    "t0",
    "t0_horizon",
    "n_max",
    "branch",
    "fit_window",
    "energy_tolerance",
    "nondiff_tolerance",
    "strip_lambda_min",
    "strip_lambda_max",
    "strip_count",
    "strip_tolerance",
    "convexity_window",
    "growth_tolerance",
    "field_points",
    "seed",
];

/// Raw key/value pairs in insertion-independent (sorted) order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `k=v` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{o}' is not k=v")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Zero,
    FirstModeBend,
    ThermalPulse,
    Coefficients,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaGrid {
    Log,
    Linear,
    Resonance,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Auto {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub domain: SpectralDomain,
    pub modes: usize,
    pub t_end: f64,
    pub dt: f64,
    pub initial: Vec<Preset>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega_grid: OmegaGrid,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_count: usize,
    pub omega_values: Vec<f64>,
    pub epsilon: f64,
    pub omega_const: Auto,
    pub t0: Auto,
    pub t0_horizon: f64,
    pub n_max: usize,
    pub branch: Branch,
    pub fit_window: f64,
    pub energy_tolerance: f64,
    pub nondiff_tolerance: f64,
    pub strip_lambda_min: f64,
    pub strip_lambda_max: f64,
    pub strip_count: usize,
    pub strip_tolerance: f64,
    pub convexity_window: f64,
    pub growth_tolerance: f64,
    pub field_points: usize,
    pub seed: u64,
    /// Every key with its resolved value, for the manifest.
    pub echo: Vec<(String, String)>,
}

struct Reader<'a> {
    raw: &'a RawConfig,
    defaults: &'a [(&'a str, &'a str)],
    echo: Vec<(String, String)>,
}

impl Reader<'_> {
    fn text(&mut self, key: &str, fallback: &str) -> String {
        let v = self
            .raw
            .entries
            .get(key)
            .cloned()
            .or_else(|| {
                self.defaults
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, v)| v.to_string())
            })
            .unwrap_or_else(|| fallback.to_string());
        self.echo.push((key.to_string(), v.clone()));
        v
    }

    fn num(&mut self, key: &str, fallback: &str) -> Result<f64, CliError> {
        let v = self.text(key, fallback);
        parse_f64(key, &v)
    }

    fn count(&mut self, key: &str, fallback: &str) -> Result<usize, CliError> {
        let v = self.text(key, fallback);
        v.parse()
            .map_err(|_| CliError::Config(format!("{key} = '{v}' is not a nonnegative integer")))
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.text(key, "");
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_f64(key, s))
            .collect()
    }

    fn auto(&mut self, key: &str, fallback: &str) -> Result<Auto, CliError> {
        let v = self.text(key, fallback);
        if v == "auto" {
            Ok(Auto::Auto)
        } else {
            Ok(Auto::Value(parse_f64(key, &v)?))
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .parse()
        .map_err(|_| CliError::Config(format!("{key} = '{v}' is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key} = '{v}' is not finite")))
    }
}

fn positive(key: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key} must be > 0, got {x}")))
    }
}

impl RunConfig {
    /// Resolves a raw configuration; `defaults` supply per-command values
    /// for keys the user did not set.
    pub fn resolve(raw: &RawConfig, defaults: &[(&str, &str)]) -> Result<Self, CliError> {
        let mut r = Reader {
            raw,
            defaults,
            echo: Vec::new(),
        };
        let rho = r.num("rho", "1")?;
        let a = r.num("a", "1")?;
        let b = r.num("b", "1")?;
        let c = r.num("c", "1")?;
        let d = r.num("d", "1")?;
        let eta = r.num("eta", "1")?;
        let regime = r.text("regime", "auto");
        let classical = match r.text("classical", "false").as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(CliError::Config(format!(
                    "classical = '{other}' must be true or false"
                )))
            }
        };
        let params = if classical {
            if regime != "auto" && regime != "stable" {
                return Err(CliError::Config(
                    "classical contrast runs are stable".into(),
                ));
            }
            ModelParams::classical_contrast(rho, a, b, c, eta)?
        } else if regime == "auto" {
            ModelParams::new(rho, a, b, c, d, eta)?
        } else {
            let reg: Regime = regime.parse()?;
            ModelParams::with_regime(rho, a, b, c, d, eta, reg)?
        };

        let domain = match r.text("domain", "interval").as_str() {
            "interval" => {
                SpectralDomain::interval(positive("length", r.num("length", &PI.to_string())?)?)?
            }
            "rectangle" => {
                let lx = positive("lx", r.num("lx", &PI.to_string())?)?;
                let ly = positive("ly", r.num("ly", &PI.to_string())?)?;
                SpectralDomain::rectangle(lx, ly)?
            }
            other => {
                return Err(CliError::Config(format!(
                    "domain = '{other}' must be interval or rectangle"
                )))
            }
        };
        let modes = r.count("modes", "16")?;
        if modes == 0 {
            return Err(CliError::Config("modes must be ≥ 1".into()));
        }
        let t_end = positive("t_end", r.num("t_end", "10")?)?;
        let samples = r.count("samples", "0")?;
        let dt = if samples > 0 {
            if samples < 2 {
                return Err(CliError::Config("samples must be ≥ 2".into()));
            }
            t_end / (samples - 1) as f64
        } else {
            positive("dt", r.num("dt", "1e-3")?)?
        };

        let initial = r
            .text("initial", "first-mode-bend")
            .split('+')
            .map(|s| match s.trim() {
                "zero" => Ok(Preset::Zero),
                "first-mode-bend" => Ok(Preset::FirstModeBend),
                "thermal-pulse" => Ok(Preset::ThermalPulse),
                "coefficients" => Ok(Preset::Coefficients),
                other => Err(CliError::Config(format!(
                    "unknown initial preset '{other}'"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let u = r.list("u")?;
        let v = r.list("v")?;
        let theta = r.list("theta")?;
        let longest = u.len().max(v.len()).max(theta.len());
        if longest > modes {
            return Err(CliError::Config(format!(
                "{longest} coefficients given for {modes} modes"
            )));
        }
        if longest > 0 && !initial.contains(&Preset::Coefficients) {
            return Err(CliError::Config(
                "u/v/theta lists need `coefficients` in initial".into(),
            ));
        }

        let omega_grid = match r.text("omega_grid", "log").as_str() {
            "log" => OmegaGrid::Log,
            "linear" => OmegaGrid::Linear,
            "resonance" => OmegaGrid::Resonance,
            "list" => OmegaGrid::List,
            other => {
                return Err(CliError::Config(format!(
                    "omega_grid = '{other}' is not log/linear/resonance/list"
                )))
            }
        };
        let omega_min = r.num("omega_min", "10")?;
        let omega_max = r.num("omega_max", "1e4")?;
        let omega_count = r.count("omega_count", "200")?;
        let omega_values = r.list("omega_values")?;
        if omega_grid == OmegaGrid::Log && !(omega_min > 0.0 && omega_max >= omega_min) {
            return Err(CliError::Config(
                "log grid needs 0 < omega_min ≤ omega_max".into(),
            ));
        }
        if omega_grid == OmegaGrid::List && omega_values.is_empty() {
            return Err(CliError::Config(
                "omega_grid = list needs omega_values".into(),
            ));
        }

        let epsilon = r.num("epsilon", "0.5")?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(CliError::Config(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let omega_const = r.auto("omega_const", "auto")?;
        let t0 = r.auto("t0", "auto")?;
        for (k, x) in [("omega_const", omega_const), ("t0", t0)] {
            if let Auto::Value(x) = x {
                if x < 0.0 {
                    return Err(CliError::Config(format!("{k} must be ≥ 0, got {x}")));
                }
            }
        }
        let t0_horizon = positive("t0_horizon", r.num("t0_horizon", "1e6")?)?;
        let n_max = r.count("n_max", "30")?;
        let branch: Branch = r.text("branch", "plus").parse()?;
        let fit_window = r.num("fit_window", "5")?;
        let energy_tolerance = positive("energy_tolerance", r.num("energy_tolerance", "1e-8")?)?;
        let nondiff_tolerance = positive("nondiff_tolerance", r.num("nondiff_tolerance", "0.01")?)?;
        let strip_lambda_min = positive("strip_lambda_min", r.num("strip_lambda_min", "1")?)?;
        let strip_lambda_max = positive("strip_lambda_max", r.num("strip_lambda_max", "1e8")?)?;
        let strip_count = r.count("strip_count", "10000")?;
        let strip_tolerance = positive("strip_tolerance", r.num("strip_tolerance", "1e-3")?)?;
        let convexity_window = positive("convexity_window", r.num("convexity_window", "5")?)?;
        let growth_tolerance = positive("growth_tolerance", r.num("growth_tolerance", "1e-6")?)?;
        let field_points = r.count("field_points", "0")?;
        let seed = r.count("seed", "0")? as u64;

        Ok(RunConfig {
            params,
            domain,
            modes,
            t_end,
            dt,
            initial,
            u,
            v,
            theta,
            omega_grid,
            omega_min,
            omega_max,
            omega_count,
            omega_values,
            epsilon,
            omega_const,
            t0,
            t0_horizon,
            n_max,
            branch,
            fit_window,
            energy_tolerance,
            nondiff_tolerance,
            strip_lambda_min,
            strip_lambda_max,
            strip_count,
            strip_tolerance,
            convexity_window,
            growth_tolerance,
            field_points,
            seed,
            echo: r.echo,
        })
    }

    /// The initial state over the first `modes` modes: the sum of the
    /// configured presets.
    pub fn initial_state(&self) -> SpectralState {
        let mut state = SpectralState::zero(self.domain, self.modes);
        for preset in &self.initial {
            match preset {
                Preset::Zero => {}
                Preset::FirstModeBend => state.modes[0].1.u += 1.0,
                Preset::ThermalPulse => {
                    for (index, weight) in thermal_pulse(&self.domain) {
                        if let Some(k) = state.mode_position(index) {
                            state.modes[k].1.theta += weight;
                        }
                    }
                }
                Preset::Coefficients => {
                    for (k, (_, s)) in state.modes.iter_mut().enumerate() {
                        let at = |xs: &[f64]| xs.get(k).copied().unwrap_or(0.0);
                        *s = ModeState::new(
                            s.u + at(&self.u),
                            s.v + at(&self.v),
                            s.theta + at(&self.theta),
                        );
                    }
                }
            }
        }
        state
    }

    pub fn times(&self) -> Vec<f64> {
        gradiplate_core::uniform_times(self.t_end, self.dt)
    }
}

/// Sine coefficients of `θ = sin³(πx/L)` (times `sin³(πy/L₂)` on a
/// rectangle), using `sin³s = (3 sin s − sin 3s)/4`.
fn thermal_pulse(domain: &SpectralDomain) -> Vec<(ModeIndex, f64)> {
    let line = [(1u32, 0.75), (3u32, -0.25)];
    match *domain {
        SpectralDomain::Interval { length } => {
            let norm = (length / 2.0).sqrt();
            line.iter()
                .map(|&(n, w)| (ModeIndex::Line(n), w * norm))
                .collect()
        }
        SpectralDomain::Rectangle { lx, ly } => {
            let norm = (lx * ly).sqrt() / 2.0;
            let mut out = Vec::new();
            for &(j, wj) in &line {
                for &(k, wk) in &line {
                    out.push((ModeIndex::Plane(j, k), wj * wk * norm));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_unknown_keys() {
        let raw = RawConfig::parse("# header\nrho = 2 # trailing\n\nmodes=4\n").unwrap();
        assert_eq!(raw.entries["rho"], "2");
        assert_eq!(raw.entries["modes"], "4");
        assert!(matches!(
            RawConfig::parse("colour = red"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RawConfig::parse("rho 2"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn overrides_win() {
        let mut raw = RawConfig::parse("c = 2").unwrap();
        raw.apply_overrides(&["c=3".into()]).unwrap();
        let cfg = RunConfig::resolve(&raw, &[]).unwrap();
        assert_eq!(cfg.params.c, 3.0);
    }

    #[test]
    fn regime_mismatch_is_a_config_error() {
        let raw = RawConfig::parse("c = -1\nregime = stable").unwrap();
        assert!(matches!(
            RunConfig::resolve(&raw, &[]),
            Err(CliError::Core(gradiplate_core::Error::RegimeMismatch(_)))
        ));
    }

    #[test]
    fn thermal_pulse_reconstructs_sin_cubed() {
        let raw = RawConfig::parse("initial = thermal-pulse\nmodes = 4").unwrap();
        let cfg = RunConfig::resolve(&raw, &[]).unwrap();
        let s = cfg.initial_state();
        for x in [0.3, 1.0, 2.2] {
            let value: f64 = s
                .modes
                .iter()
                .map(|(m, st)| {
                    st.theta
                        * cfg
                            .domain
                            .eigenfunction(m.index, gradiplate_core::Point::Line(x))
                            .unwrap()
                })
                .sum();
            assert!((value - x.sin().powi(3)).abs() < 1e-14);
        }
    }

    #[test]
    fn presets_add_up() {
        let raw = RawConfig::parse(
            "initial = first-mode-bend + coefficients\nu = 0.5, 2\ntheta = 0, 0, 1",
        )
        .unwrap();
        let s = RunConfig::resolve(&raw, &[("modes", "3")])
            .unwrap()
            .initial_state();
        assert_eq!(s.modes[0].1, ModeState::new(1.5, 0.0, 0.0));
        assert_eq!(s.modes[1].1, ModeState::new(2.0, 0.0, 0.0));
        assert_eq!(s.modes[2].1, ModeState::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn classical_contrast_sets_d_to_zero() {
        let raw = RawConfig::parse("classical = true").unwrap();
        assert_eq!(RunConfig::resolve(&raw, &[]).unwrap().params.d, 0.0);
        let raw = RawConfig::parse("d = 0").unwrap();
        assert!(RunConfig::resolve(&raw, &[]).is_err());
    }
}
