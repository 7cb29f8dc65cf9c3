use gradiplate_core::{
    energy_balance_report, evolve, fit_decay, spectral_abscissa, synthesize_field, Direction,
    Error, Point, Regime, SpectralDomain,
};

use crate::config::RunConfig;
use crate::output::{num, Check, Report, Table};
use crate::CliError;

/// Relative slack allowed in the monotonicity of `E` on the stable branch.
const MONOTONE_SLACK: f64 = 1e-12;

pub fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    if p.regime == Regime::QuasiStatic {
        return Err(Error::RegimeMismatch(
            "simulate evolves the full system; use the quasistatic subcommand".into(),
        )
        .into());
    }
    let initial = cfg.initial_state();
    let times = cfg.times();
    let traj = evolve(p, &initial, &times, Direction::Forward)?;
    let balance = energy_balance_report(p, &traj)?;

    let mut table = Table::new(
        "trajectory.csv",
        &[
            "t",
            "E",
            "kinetic",
            "bending",
            "thermal",
            "D",
            "energy_balance_residual",
        ],
    );
    for (s, r) in traj.samples.iter().zip(&balance.residuals) {
        let e = s.energy;
        table.push_nums(&[
            s.t,
            e.total,
            e.kinetic,
            e.bending,
            e.thermal,
            e.dissipation_rate,
            *r,
        ]);
    }

    let mut report = Report::default();
    report.value("E0", balance.e0);
    report.value("energy_balance_max_abs", balance.max_abs_residual);
    report.check(Check::at_most(
        "energy_balance",
        balance.max_rel_residual,
        cfg.energy_tolerance,
    ));

    let energies = traj.energies();
    report.value(
        "spectral_abscissa",
        spectral_abscissa(p, &cfg.domain, cfg.modes),
    );
    if p.c > 0.0 {
        let slack = MONOTONE_SLACK * balance.e0.abs();
        let worst = energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        report.check(Check::at_most("energy_monotone", worst, slack));
        match fit_decay(&traj, cfg.fit_window) {
            Ok(fit) => {
                report.value("decay_fit.gamma", fit.gamma);
                report.value("decay_fit.prefactor", fit.prefactor);
                report.value("decay_fit.residual", fit.residual);
                report.text("decay_fit.samples", fit.samples.to_string());
            }
            Err(e) => report.text("decay_fit", format!("unavailable: {e}")),
        }
    }
    let finite = energies.iter().all(|e| e.is_finite());
    report.check(Check::flag("finite", finite, finite.to_string(), "true"));
    report.tables.push(table);

    if cfg.field_points > 0 {
        report.tables.push(field_table(
            cfg,
            &traj.samples[traj.samples.len() - 1].state,
        )?);
    }
    Ok(report)
}

fn field_table(cfg: &RunConfig, state: &gradiplate_core::SpectralState) -> Result<Table, CliError> {
    let n = cfg.field_points.max(2);
    let along = |len: f64, i: usize| {
        if i + 1 == n {
            len
        } else {
            len * i as f64 / (n - 1) as f64
        }
    };
    match cfg.domain {
        SpectralDomain::Interval { length } => {
            let grid: Vec<Point> = (0..n).map(|i| Point::Line(along(length, i))).collect();
            let values = synthesize_field(state, &grid)?;
            let mut t = Table::new("field.csv", &["x", "u", "ut", "theta"]);
            for (pt, v) in grid.iter().zip(values) {
                if let Point::Line(x) = pt {
                    t.push(vec![num(*x), num(v.u), num(v.ut), num(v.theta)]);
                }
            }
            Ok(t)
        }
        SpectralDomain::Rectangle { lx, ly } => {
            let grid: Vec<Point> = (0..n)
                .flat_map(|i| (0..n).map(move |j| Point::Plane(along(lx, i), along(ly, j))))
                .collect();
            let values = synthesize_field(state, &grid)?;
            let mut t = Table::new("field.csv", &["x", "y", "u", "ut", "theta"]);
            for (pt, v) in grid.iter().zip(values) {
                if let Point::Plane(x, y) = pt {
                    t.push(vec![num(*x), num(*y), num(v.u), num(v.ut), num(v.theta)]);
                }
            }
            Ok(t)
        }
    }
}
