use gradiplate_core::{quasi_decay_report, Error, QuasiParams};

use crate::config::RunConfig;
use crate::output::{Check, Report, Table};
use crate::CliError;

pub fn quasistatic(cfg: &RunConfig) -> Result<Report, CliError> {
    let qp = QuasiParams::new(cfg.params)?;
    let initial = cfg.initial_state();
    if initial.modes.iter().any(|(_, s)| s.u != 0.0 || s.v != 0.0) {
        return Err(Error::InvalidParams(
            "quasi-static data is a temperature field; u and v are slaved to it".into(),
        )
        .into());
    }
    let theta0: Vec<f64> = initial.modes.iter().map(|(_, s)| s.theta).collect();
    let lambdas: Vec<f64> = initial.modes.iter().map(|(m, _)| m.lambda).collect();
    let times = cfg.times();
    let q = quasi_decay_report(&qp, &cfg.domain, &theta0, &times)?;
    let initial_sq: f64 = theta0.iter().map(|x| x * x).sum();

    let mut table = Table::new(
        "quasistatic.csv",
        &["t", "theta1", "u1", "h2", "theta_l2_sq", "h2_bound"],
    );
    for ((s, h), th) in q.states.iter().zip(&q.h2).zip(&q.theta_l2_sq) {
        let bound = q.k_bound * (-2.0 * q.rate1 * s.t).exp() * initial_sq;
        table.push_nums(&[s.t, s.theta[0], s.u[0], *h, *th, bound]);
    }

    let mut report = Report::default();
    report.value("a_eff", q.a_eff);
    report.value("rate1", q.rate1);
    report.value("K_measured", q.k_measured);
    report.value("K_bound", q.k_bound);
    report.value("schwarz_k", q.schwarz_k);
    report.value("schwarz_excess", q.schwarz_excess);
    let omega = cfg.omega_max;
    report.value("resolvent_probe_omega", omega);
    report.value(
        "resolvent_norm_times_omega",
        qp.resolvent_norm(&lambdas, omega) * omega,
    );

    report.check(Check::at_most(
        "K_within_bound",
        q.k_measured - q.k_bound,
        1e-12 * q.k_bound,
    ));
    let schwarz_scale = q.h2.iter().copied().fold(0.0, f64::max) * cfg.params.c.abs();
    report.check(Check::at_most(
        "schwarz",
        q.schwarz_excess,
        1e-12 * schwarz_scale,
    ));
    report.check(Check::at_most(
        "reduction_residual",
        q.max_reduction_residual,
        1e-14,
    ));

    let excited: Vec<usize> = (0..theta0.len()).filter(|&k| theta0[k] != 0.0).collect();
    if let Some(fit) = q.fit {
        report.value("fit.gamma", fit.gamma);
        report.value("fit.residual", fit.residual);
        report.check(Check::at_most("fit_residual", fit.residual, 1e-6));
        if let [k] = excited[..] {
            let want = 2.0 * qp.rate(lambdas[k]);
            report.value("fit.expected_gamma", want);
            report.check(Check::at_most(
                "h2_rate",
                (fit.gamma - want).abs() / want,
                1e-10,
            ));
        } else {
            report.text(
                "fit.note",
                format!("{} modes excited; rate comparison needs one", excited.len()),
            );
        }
    }
    report.text("fit.window", format!("{} samples", times.len()));
    report.tables.push(table);
    Ok(report)
}
