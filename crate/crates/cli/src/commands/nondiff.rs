use gradiplate_core::resolvent::{energy_norm, mode_resolvent_norm};
use gradiplate_core::{
    nondiff_direct_v_sq, nondiff_limit_check, solve_mode_resolvent, ResolventRhs,
};

use crate::config::RunConfig;
use crate::output::{num, Check, Report, Table};
use crate::CliError;

pub fn nondiff(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let limit = nondiff_limit_check(p, &cfg.domain, cfg.n_max, cfg.branch)?;

    let mut table = Table::new(
        "nondiff.csv",
        &[
            "n",
            "lambda",
            "omega",
            "p_re",
            "p_im",
            "q",
            "norm_v_sq",
            "norm_v_sq_weighted",
            "norm_u_sq",
            "direct_norm_v_sq",
            "gap",
        ],
    );
    let mut closed_vs_direct = 0.0f64;
    let mut algebraic = 0.0f64;
    let mut lower_bound_excess = f64::NEG_INFINITY;
    for pt in &limit.points {
        let direct = nondiff_direct_v_sq(p, pt)?;
        closed_vs_direct = closed_vs_direct.max((direct - pt.norm_v_sq).abs() / pt.norm_v_sq);
        algebraic = algebraic.max(pt.residual_first).max(pt.residual_second);
        let gap = (pt.norm_v_sq - limit.target).abs() / limit.target;

        let rhs = ResolventRhs::real(0.0, 1.0 / p.rho, 0.0);
        let x = solve_mode_resolvent(p, pt.lambda, pt.omega, rhs)?;
        let forcing = (1.0 / p.rho).sqrt();
        let ratio = energy_norm(p, pt.lambda, &x) / forcing;
        let norm = mode_resolvent_norm(p, pt.lambda, pt.omega)?;
        lower_bound_excess = lower_bound_excess.max((ratio - norm) / norm);

        let mut row = vec![pt.n.to_string()];
        row.extend(
            [
                pt.lambda,
                pt.omega,
                pt.p.re,
                pt.p.im,
                pt.q,
                pt.norm_v_sq,
                pt.norm_v_sq_weighted,
                pt.norm_u_sq,
                direct,
                gap,
            ]
            .map(num),
        );
        table.push(row);
    }
    let last = &limit.points[limit.points.len() - 1];

    let mut report = Report::default();
    report.value("target", limit.target);
    report.value("final_norm_v_sq", last.norm_v_sq);
    report.value("resolvent_scale", limit.resolvent_scale);
    report.value(
        "resolvent_norm_at_last",
        mode_resolvent_norm(p, last.lambda, last.omega)?,
    );
    report.text("branch", format!("{:?}", cfg.branch).to_lowercase());
    report.check(Check::at_most(
        "final_gap",
        limit.relative_gap,
        cfg.nondiff_tolerance,
    ));
    report.check(Check::at_most(
        "closed_form_vs_direct",
        closed_vs_direct,
        1e-10,
    ));
    report.check(Check::at_most("algebraic_residual", algebraic, 1e-12));
    report.check(Check::at_most(
        "resolvent_dominates_sequence",
        lower_bound_excess,
        1e-12,
    ));
    report.tables.push(table);
    Ok(report)
}
