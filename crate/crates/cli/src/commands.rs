use std::f64::consts::PI;

use dcf_core::classical::{circle_residual, trajectory};
use dcf_core::eigensystem::{default_grid, energy_in_band};
use dcf_core::observables::{
    density_coherent, density_eigen, hur_closed_form, hur_oracle, mean_energy,
    mean_energy_coefficients, mean_velocity_coherent,
};
use dcf_core::verify::{self, Fault, VerifyOptions};
use dcf_core::{Band, ClassicalConfig, CoherentSpec, SeriesForm, UniformGrid, C64};
use rayon::prelude::*;

use crate::config::{Command, DensityMode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Column, Table, FORMAT_VERSION, UNITS};

/// Builds the table for `cfg.command`. Verification failures still return the
/// report table alongside the error so it can be written out.
pub fn run(cfg: &RunConfig) -> (CliResult<Table>, Option<CliError>) {
    let table = match cfg.command {
        Command::Classical => classical(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Density => match cfg.mode {
            DensityMode::Eigen => density_eigenstates(cfg),
            DensityMode::Coherent => density_coherent_sweep(cfg),
        },
        Command::Hur => hur(cfg),
        Command::Energy => energy(cfg),
        Command::Velocity => velocity(cfg),
        Command::Verify => return verify_cmd(cfg),
    };
    (table.map(|t| with_header(t, cfg)), None)
}

fn with_header(mut t: Table, cfg: &RunConfig) -> Table {
    let mut meta = vec![
        ("format_version".to_string(), FORMAT_VERSION.to_string()),
        ("units".to_string(), UNITS.to_string()),
        ("command".to_string(), cfg.command.name().to_string()),
        ("B".to_string(), format!("{:?}", cfg.b)),
        ("omega_B".to_string(), format!("{:?}", 2.0 * cfg.b)),
        ("k".to_string(), format!("{:?}", cfg.k)),
        ("eta".to_string(), format!("{:?}", cfg.valley.eta())),
    ];
    for (k, v) in &cfg.echo {
        meta.push((format!("config.{k}"), v.clone()));
    }
    meta.append(&mut t.meta);
    t.meta = meta;
    t
}

fn spec(cfg: &RunConfig, alpha: C64) -> CliResult<CoherentSpec> {
    Ok(CoherentSpec::from_complex(alpha, cfg.delta, &cfg.policy)?)
}

fn flatten(rows: Vec<CliResult<Vec<Vec<f64>>>>) -> CliResult<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

fn classical(cfg: &RunConfig) -> CliResult<Table> {
    let omega = 2.0 * cfg.b;
    let speed = cfg.v0x.hypot(cfg.v0y);
    let ts: Vec<f64> = (0..cfg.t_points)
        .map(|i| cfg.t_max * i as f64 / (cfg.t_points - 1) as f64)
        .collect();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &vd in &cfg.vd {
        let c = ClassicalConfig::new(cfg.x0, cfg.y0, cfg.v0x, cfg.v0y, omega, vd)?;
        let r2 = c.radius().powi(2).max(f64::MIN_POSITIVE);
        for &t in &ts {
            let (x, y) = trajectory(&c, t);
            let res = circle_residual(&c, t);
            worst = worst.max(res / r2);
            rows.push(vec![vd, t, x, y, res]);
        }
    }
    let mut t = Table::from_rows(&["v_d", "t", "x", "y", "circle_residual"], &rows);
    t.meta("v0", format!("{speed:?}"));
    t.meta("max_relative_circle_residual", format!("{worst:e}"));
    Ok(t)
}

fn spectrum(cfg: &RunConfig) -> CliResult<Table> {
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        let f = cfg.field(beta)?;
        for n in 0..=cfg.n_max {
            let bands: &[(Band, f64)] = if n == 0 {
                &[(Band::Conduction, 0.0)]
            } else {
                &[(Band::Conduction, 1.0), (Band::Valence, -1.0)]
            };
            for &(band, sign) in bands {
                rows.push(vec![beta, n as f64, sign, energy_in_band(n, band, &f)]);
            }
        }
    }
    Ok(Table::from_rows(&["beta", "n", "band", "energy"], &rows))
}

fn grid_for(cfg: &RunConfig, n_hi: usize, beta: f64) -> CliResult<UniformGrid> {
    Ok(match &cfg.grid {
        Some(g) => *g,
        None => default_grid(n_hi, &cfg.field(beta)?),
    })
}

fn density_eigenstates(cfg: &RunConfig) -> CliResult<Table> {
    let n_hi = cfg.levels.iter().copied().max().unwrap_or(0);
    let jobs: Vec<(f64, usize)> = cfg
        .betas
        .iter()
        .flat_map(|&b| cfg.levels.iter().map(move |&n| (b, n)))
        .collect();
    let results: Vec<CliResult<(Vec<Vec<f64>>, f64)>> = jobs
        .par_iter()
        .map(|&(beta, n)| {
            let f = cfg.field(beta)?;
            let g = grid_for(cfg, n_hi, beta)?;
            let d = density_eigen(n, &f, &g)?;
            let norm = d.norm(&g)?;
            let rows = d
                .rho
                .x
                .iter()
                .zip(d.rho.values.iter().zip(&d.jy.values))
                .map(|(x, (r, j))| vec![beta, n as f64, *x, *r, *j])
                .collect();
            Ok((rows, (norm - 1.0).abs()))
        })
        .collect();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for r in results {
        let (chunk, dev) = r?;
        rows.extend(chunk);
        worst = worst.max(dev);
    }
    let mut t = Table::from_rows(&["beta", "n", "x", "rho", "j_y"], &rows);
    t.meta("max_norm_error", format!("{worst:e}"));
    Ok(t)
}

fn density_coherent_sweep(cfg: &RunConfig) -> CliResult<Table> {
    let jobs: Vec<(f64, f64)> = cfg
        .betas
        .iter()
        .flat_map(|&b| cfg.phases.iter().map(move |&p| (b, p)))
        .collect();
    let probe = spec(cfg, C64::from_polar(cfg.alpha_mod, 0.0))?;
    let results: Vec<CliResult<(Vec<Vec<f64>>, f64)>> = jobs
        .par_iter()
        .map(|&(beta, phi)| {
            let f = cfg.field(beta)?;
            let s = spec(cfg, C64::from_polar(cfg.alpha_mod, phi))?;
            let g = grid_for(cfg, s.trunc, beta)?;
            let d = density_coherent(&s, &f, &g, SeriesForm::default())?;
            let norm = d.norm(&g)?;
            let rows = d
                .rho
                .x
                .iter()
                .zip(d.rho.values.iter().zip(&d.jy.values))
                .map(|(x, (r, j))| vec![beta, phi, *x, *r, *j])
                .collect();
            Ok((rows, (norm - 1.0).abs()))
        })
        .collect();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for r in results {
        let (chunk, dev) = r?;
        rows.extend(chunk);
        worst = worst.max(dev);
    }
    let mut t = Table::from_rows(&["beta", "phi", "x", "rho", "j_y"], &rows);
    t.meta("alpha_mod", format!("{:?}", cfg.alpha_mod));
    t.meta("delta", format!("{:?}", cfg.delta));
    t.meta("truncation_order", probe.trunc);
    t.meta("max_norm_error", format!("{worst:e}"));
    let (lo, hi) = (cfg.phases[0], *cfg.phases.last().unwrap_or(&cfg.phases[0]));
    let markers: Vec<String> = (-8i32..8)
        .map(|n| (2 * n + 1) as f64 * PI / 2.0)
        .filter(|p| *p >= lo && *p <= hi)
        .map(|p| format!("{p:?}"))
        .collect();
    t.meta("phase_markers", markers.join(" "));
    Ok(t)
}

/// α values for the plane sweeps, or the |α| sweep at fixed phase.
fn alpha_points(cfg: &RunConfig) -> Vec<C64> {
    match cfg.abs_sweep {
        Some(s) => s
            .values()
            .into_iter()
            .flat_map(|a| cfg.phases.iter().map(move |&p| C64::from_polar(a, p)))
            .collect(),
        None => cfg
            .alpha_axis
            .iter()
            .flat_map(|&re| cfg.alpha_axis.iter().map(move |&im| C64::new(re, im)))
            .collect(),
    }
}

fn plane_jobs(cfg: &RunConfig) -> Vec<(f64, C64)> {
    let pts = alpha_points(cfg);
    cfg.betas
        .iter()
        .flat_map(|&b| pts.iter().map(move |&a| (b, a)))
        .collect()
}

fn hur(cfg: &RunConfig) -> CliResult<Table> {
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = plane_jobs(cfg)
        .par_iter()
        .map(|&(beta, alpha)| {
            let f = cfg.field(beta)?;
            let s = spec(cfg, alpha)?;
            let h = hur_closed_form(&s, &f)?;
            let o = hur_oracle(&s, &f)?;
            Ok(vec![vec![
                beta,
                alpha.re,
                alpha.im,
                alpha.norm(),
                alpha.arg(),
                h.sigma_zeta(),
                h.sigma_p(),
                h.product,
                o.product,
                h.max_deviation(&o),
                s.trunc as f64,
            ]])
        })
        .collect();
    let rows = flatten(rows)?;
    let min_product = rows.iter().map(|r| r[7]).fold(f64::INFINITY, f64::min);
    let max_dev = rows.iter().map(|r| r[9]).fold(0.0, f64::max);
    let mut t = Table::from_rows(
        &[
            "beta",
            "re_alpha",
            "im_alpha",
            "abs_alpha",
            "phi",
            "sigma_zeta",
            "sigma_p",
            "product",
            "product_oracle",
            "oracle_deviation",
            "truncation_order",
        ],
        &rows,
    );
    t.meta("delta", format!("{:?}", cfg.delta));
    t.meta("min_product", format!("{min_product:?}"));
    t.meta("max_oracle_deviation", format!("{max_dev:e}"));
    Ok(t)
}

fn energy(cfg: &RunConfig) -> CliResult<Table> {
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = plane_jobs(cfg)
        .par_iter()
        .map(|&(beta, alpha)| {
            let f = cfg.field(beta)?;
            let s = spec(cfg, alpha)?;
            let e = mean_energy(&s, &f)?;
            let w = mean_energy_coefficients(&s, &f)?;
            Ok(vec![vec![
                beta,
                alpha.re,
                alpha.im,
                e,
                w,
                (e - w).abs(),
                s.trunc as f64,
            ]])
        })
        .collect();
    let rows = flatten(rows)?;
    let max_dev = rows.iter().map(|r| r[5]).fold(0.0, f64::max);
    let mut t = Table::from_rows(
        &[
            "beta",
            "re_alpha",
            "im_alpha",
            "energy",
            "energy_coefficients",
            "route_deviation",
            "truncation_order",
        ],
        &rows,
    );
    t.meta("max_route_deviation", format!("{max_dev:e}"));
    Ok(t)
}

fn velocity(cfg: &RunConfig) -> CliResult<Table> {
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = plane_jobs(cfg)
        .par_iter()
        .map(|&(beta, alpha)| {
            let f = cfg.field(beta)?;
            let s = spec(cfg, alpha)?;
            let v = mean_velocity_coherent(&s, &f)?;
            let ratio = if f.v_d() == 0.0 {
                f64::NAN
            } else {
                v / f.v_d()
            };
            Ok(vec![vec![
                beta,
                alpha.re,
                alpha.im,
                v,
                ratio,
                s.trunc as f64,
            ]])
        })
        .collect();
    let rows = flatten(rows)?;
    Ok(Table::from_rows(
        &[
            "beta",
            "re_alpha",
            "im_alpha",
            "v_y",
            "v_y_over_v_d",
            "truncation_order",
        ],
        &rows,
    ))
}

fn verify_cmd(cfg: &RunConfig) -> (CliResult<Table>, Option<CliError>) {
    let beta = cfg.betas.first().copied().unwrap_or(0.0);
    let field = match cfg.field(beta) {
        Ok(f) => f,
        Err(e) => return (Err(e), None),
    };
    let mut opts = VerifyOptions {
        cfg: field,
        alpha_mod: cfg.alpha_mod,
        phase: cfg.phases[0],
        fault: cfg.fault.map(Fault::PerturbM),
        ..Default::default()
    };
    if let Some(g) = cfg.grid {
        opts.grid = g;
    }
    let report = verify::run(&opts);
    let mut t = Table {
        meta: Vec::new(),
        columns: vec![
            (
                "check".into(),
                Column::Text(report.checks.iter().map(|c| c.name.clone()).collect()),
            ),
            (
                "measured".into(),
                Column::Num(report.checks.iter().map(|c| c.measured).collect()),
            ),
            (
                "tolerance".into(),
                Column::Num(report.checks.iter().map(|c| c.tolerance).collect()),
            ),
            (
                "status".into(),
                Column::Text(
                    report
                        .checks
                        .iter()
                        .map(|c| {
                            if c.passed() {
                                "pass".to_string()
                            } else {
                                "fail".to_string()
                            }
                        })
                        .collect(),
                ),
            ),
        ],
    };
    t.meta("beta", format!("{beta:?}"));
    for (i, w) in report.warnings.iter().enumerate() {
        t.meta(&format!("warning.{i}"), w);
    }
    let failure = if report.passed() {
        None
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Some(CliError::Verification(format!(
            "failed checks: {}",
            names.join(", ")
        )))
    };
    (Ok(with_header(t, cfg)), failure)
}
