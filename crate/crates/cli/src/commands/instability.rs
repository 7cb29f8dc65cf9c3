use gradiplate_core::functionals::TIME_WEIGHT;
use gradiplate_core::{
    convexity_residual_check, convexity_trajectory, evolve, find_t0, instability_lower_bound,
    spectral_abscissa, Direction, EnergyBreakdown,
};

use crate::config::{Auto, RunConfig};
use crate::output::{num, Check, Report, Table};
use crate::CliError;

pub fn instability(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let initial = cfg.initial_state();
    let e0 = EnergyBreakdown::of(p, &initial).total;
    let omega = match cfg.omega_const {
        Auto::Auto => (-e0).max(0.0),
        Auto::Value(w) => w,
    };
    let t0 = match cfg.t0 {
        Auto::Auto => find_t0(p, &initial, omega, cfg.t0_horizon)?,
        Auto::Value(t) => t,
    };
    let traj = evolve(p, &initial, &cfg.times(), Direction::Forward)?;
    let run = convexity_trajectory(p, &traj, omega, t0)?;
    let convexity = convexity_residual_check(&run.states, e0);
    let bound = instability_lower_bound(&run.states, e0)?;

    let mut table = Table::new(
        "instability.csv",
        &[
            "t",
            "F",
            "Fdot",
            "Fddot",
            "convexity_residual",
            "lower_bound",
        ],
    );
    for ((s, r), b) in run
        .states
        .iter()
        .zip(&convexity.residuals)
        .zip(&bound.bound)
    {
        table.push_nums(&[s.t, s.f, s.fdot, s.fddot, *r, *b]);
    }

    let upto = run
        .states
        .iter()
        .take_while(|s| s.t <= cfg.convexity_window)
        .count();
    let windowed = convexity_residual_check(&run.states[..upto], e0);

    let root = spectral_abscissa(p, &cfg.domain, cfg.modes);
    let mut report = Report::default();
    report.value("E0", e0);
    report.value("omega_const", omega);
    report.value("t0", t0);
    report.text(
        "omega_const_source",
        if cfg.omega_const == Auto::Auto {
            "auto"
        } else {
            "config"
        },
    );
    report.text(
        "t0_source",
        if cfg.t0 == Auto::Auto {
            "auto"
        } else {
            "config"
        },
    );
    report.text("time_weight", TIME_WEIGHT);
    report.value("nu", run.phi.nu);
    report.value("phi.max_residual", run.phi.max_residual);
    report.value("exponent", bound.exponent);
    report.value("growth_rate", bound.growth_rate);
    report.value("log_slope", bound.log_slope);
    report.value("positive_root", root);
    report.value("convexity.min_residual_full_run", convexity.min_residual);
    report.value("convexity.scale", windowed.scale);
    report.value("convexity.window", cfg.convexity_window);

    report.check(Check::at_least(
        "convexity",
        windowed.min_residual,
        -windowed.tolerance,
    ));
    report.check(Check::at_least(
        "lower_bound",
        bound.min_relative_margin,
        -1e-12,
    ));
    report.check(Check::at_most(
        "growth_rate",
        (bound.growth_rate - root).abs(),
        cfg.growth_tolerance,
    ));
    report.check(Check::flag(
        "exponent_below_growth",
        bound.exponent <= bound.log_slope,
        num(bound.exponent),
        format!("<= log slope {}", num(bound.log_slope)),
    ));
    report.tables.push(table);
    Ok(report)
}
