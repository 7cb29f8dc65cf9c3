use gradiplate_core::{asymptotic_strip, log_spaced, mode_eigenvalues};

use crate::config::RunConfig;
use crate::output::{num, Check, Report, Table};
use crate::CliError;

const ROOT_RESIDUAL: f64 = 1e-10;

pub fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let modes = cfg.domain.enumerate_modes(cfg.modes);
    let mut table = Table::new(
        "spectrum.csv",
        &[
            "mode",
            "lambda",
            "root1_re",
            "root1_im",
            "root2_re",
            "root2_im",
            "root3_re",
            "root3_im",
            "max_real_part",
            "residual",
        ],
    );
    let mut abscissa = f64::NEG_INFINITY;
    let mut residual = 0.0f64;
    for m in &modes {
        let s = mode_eigenvalues(p, m.lambda);
        abscissa = abscissa.max(s.max_real_part());
        residual = residual.max(s.max_residual);
        let mut row = vec![m.index.to_string(), num(m.lambda)];
        for z in s.roots {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row.push(num(s.max_real_part()));
        row.push(num(s.max_residual));
        table.push(row);
    }

    let mut report = Report::default();
    report.value("spectral_abscissa", abscissa);
    report.check(Check::at_most("root_residual", residual, ROOT_RESIDUAL));
    if p.c > 0.0 {
        report.check(Check::flag(
            "abscissa_sign",
            abscissa < 0.0,
            num(abscissa),
            "< 0 (stable)",
        ));
    } else {
        report.check(Check::flag(
            "abscissa_sign",
            abscissa > 0.0,
            num(abscissa),
            "> 0 (unstable)",
        ));
    }
    report.tables.push(table);

    if p.c > 0.0 && cfg.strip_count > 0 {
        let lambdas = log_spaced(cfg.strip_lambda_min, cfg.strip_lambda_max, cfg.strip_count);
        let strip = asymptotic_strip(p, &lambdas)?;
        let mut t = Table::new(
            "strip.csv",
            &["lambda", "pair_re", "pair_im", "max_real_part", "residual"],
        );
        for pt in &strip.points {
            let (re, im) = pt.pair.map_or((f64::NAN, f64::NAN), |z| (z.re, z.im));
            t.push_nums(&[pt.lambda, re, im, pt.max_real_part, pt.max_residual]);
        }
        report.value("strip.predicted_limit", strip.predicted_limit);
        report.value("strip.left_edge", strip.strip_left);
        report.value("strip.max_real_part", strip.max_real_part);
        report.check(Check::at_most(
            "strip_residual",
            strip.max_residual,
            ROOT_RESIDUAL,
        ));
        report.check(Check::flag(
            "strip_left_half_plane",
            strip.max_real_part < 0.0,
            num(strip.max_real_part),
            "< 0",
        ));
        report.check(Check::at_most(
            "strip_limit_gap",
            strip.final_gap,
            cfg.strip_tolerance,
        ));
        report.tables.push(t);
    }
    Ok(report)
}
