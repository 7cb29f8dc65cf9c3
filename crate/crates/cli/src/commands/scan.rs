use gradiplate_core::{log_spaced, resolvent_norm, resonance_grid, scan_imaginary_axis};

use crate::config::{OmegaGrid, RunConfig};
use crate::output::{Check, Report, Table};
use crate::CliError;

pub fn omega_grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let grid = match cfg.omega_grid {
        OmegaGrid::Log => log_spaced(cfg.omega_min, cfg.omega_max, cfg.omega_count),
        OmegaGrid::Linear => match cfg.omega_count {
            0 => Vec::new(),
            1 => vec![cfg.omega_min],
            n => (0..n)
                .map(|i| {
                    cfg.omega_min + (cfg.omega_max - cfg.omega_min) * i as f64 / (n - 1) as f64
                })
                .collect(),
        },
        OmegaGrid::Resonance => resonance_grid(
            &cfg.params,
            &cfg.domain,
            cfg.modes,
            cfg.omega_min,
            cfg.omega_max,
        ),
        OmegaGrid::List => cfg.omega_values.clone(),
    };
    if grid.is_empty() {
        return Err(CliError::Config("the frequency grid is empty".into()));
    }
    Ok(grid)
}

pub fn resolvent_scan(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let grid = omega_grid(cfg)?;
    let scan = scan_imaginary_axis(p, &cfg.domain, &grid, cfg.modes)?;

    let mut table = Table::new("scan.csv", &["omega", "resolvent_norm"]);
    for (w, n) in scan.omega_grid.iter().zip(&scan.norms) {
        table.push_nums(&[*w, *n]);
    }

    let mut report = Report::default();
    report.value("sup", scan.sup);
    report.value("tail_min", scan.tail_min);
    report.value("midpoint", scan.midpoint);
    report.value("tail_ratio", scan.tail_min / scan.midpoint);
    report.value("first", scan.norms[0]);
    report.value("last", scan.norms[scan.norms.len() - 1]);
    report.value(
        "first_over_last",
        scan.norms[0] / scan.norms[scan.norms.len() - 1],
    );
    report.value("nondiff_scale", p.rho * p.d / (p.eta * p.eta));
    report.text("classical", (p.d == 0.0).to_string());

    let finite = scan.norms.iter().all(|n| n.is_finite() && *n >= 0.0);
    report.check(Check::flag("finite", finite, finite.to_string(), "true"));

    let probe = grid[grid.len() / 2];
    let mirrored = resolvent_norm(p, &cfg.domain, -probe, cfg.modes)?;
    let asym = (mirrored - scan.midpoint).abs() / scan.midpoint.abs().max(f64::MIN_POSITIVE);
    report.value("symmetry_probe_omega", probe);
    report.check(Check::at_most("omega_symmetry", asym, 1e-12));
    report.tables.push(table);
    Ok(report)
}
