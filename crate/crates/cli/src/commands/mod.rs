//! One function per subcommand. Each maps a resolved config to a
//! [`Report`] of tables, checks and recorded values.

mod backward;
mod instability;
mod nondiff;
mod quasistatic;
mod scan;
mod simulate;
mod spectrum;

pub use backward::backward;
pub use instability::instability;
pub use nondiff::nondiff;
pub use quasistatic::quasistatic;
pub use scan::{omega_grid, resolvent_scan};
pub use simulate::simulate;
pub use spectrum::spectrum;

use crate::config::RunConfig;
use crate::output::Report;
use crate::CliError;

pub const NAMES: &[&str] = &[
    "simulate",
    "resolvent-scan",
    "nondiff",
    "spectrum",
    "backward",
    "instability",
    "quasistatic",
];

/// Values used for keys absent from the config.
pub fn defaults(name: &str) -> &'static [(&'static str, &'static str)] {
    match name {
        "simulate" => &[("modes", "64"), ("t_end", "10"), ("dt", "1e-3")],
        "resolvent-scan" => &[("modes", "128")],
        "spectrum" => &[("modes", "64")],
        "backward" => &[("modes", "16"), ("t_end", "1"), ("dt", "1e-3")],
        "instability" => &[("c", "-1"), ("modes", "1"), ("t_end", "20"), ("dt", "1e-3")],
        "quasistatic" => &[
            ("c", "-2"),
            ("length", "1"),
            ("modes", "1"),
            ("t_end", "0.05"),
            ("dt", "1e-3"),
            ("initial", "thermal-pulse"),
        ],
        _ => &[],
    }
}

pub fn dispatch(name: &str, cfg: &RunConfig) -> Result<Report, CliError> {
    match name {
        "simulate" => simulate(cfg),
        "resolvent-scan" => resolvent_scan(cfg),
        "nondiff" => nondiff(cfg),
        "spectrum" => spectrum(cfg),
        "backward" => backward(cfg),
        "instability" => instability(cfg),
        "quasistatic" => quasistatic(cfg),
        other => Err(CliError::Config(format!("unknown subcommand '{other}'"))),
    }
}
