//! Invariant suite run by `dcf verify`.
//!
//! Each check records the measured deviation next to the tolerance it was held
//! to. Grid-support problems on the configured output grid are reported as
//! warnings rather than failures, since they concern the caller's grid and not
//! the analytic results.

use std::f64::consts::PI;
use std::fmt;

use crate::classical::{circle_residual, trajectory, ClassicalConfig};
use crate::coherent::{
    completeness_matrix, eigenvalue_residual, render_coherent_lenient, CoherentSpec,
    CompletenessQuadrature,
};
use crate::eigensystem::{
    default_grid, energy, hamiltonian_residual, m_eigenvalues, matrix_m, matrix_m_spectral,
    mean_velocity_eigen, psi_spinor, FieldConfig, Mat2,
};
use crate::error::Result;
use crate::ladder::{
    big_theta_minus, commutator_c, q_minus_sum, q_plus_sum, tilde_theta_plus, KetSum, LadderKet,
    SpinorExpansion,
};
use crate::numerics::{hermite_function, integrate, GridProfile, UniformGrid};
use crate::observables::{
    density_coherent, density_eigen, hur_closed_form, hur_oracle, mean_energy,
    mean_energy_coefficients, mean_velocity_coherent, mean_velocity_fd, SeriesForm,
};
use crate::C64;

/// β values the 𝕄 identities are checked at.
pub const IDENTITY_BETAS: [f64; 12] =
    [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    /// Error text when the check could not be evaluated.
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            detail: None,
        }
    }

    fn from_result(name: &str, tolerance: f64, r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::new(name, v, tolerance),
            Err(e) => Self {
                name: name.into(),
                measured: f64::INFINITY,
                tolerance,
                detail: Some(e.to_string()),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.measured.is_finite() && self.measured <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} {} measured={:e} tolerance={:e}",
            self.name, self.measured, self.tolerance
        )?;
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for w in &self.warnings {
            writeln!(f, "WARN {w}")?;
        }
        Ok(())
    }
}

/// Deliberate corruption for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Adds the given amount to the upper-right entry of 𝕄.
    PerturbM(f64),
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub cfg: FieldConfig,
    /// Grid the caller intends to render on; probed for support only.
    pub grid: UniformGrid,
    /// Coherent state probed on `grid`.
    pub alpha_mod: f64,
    pub phase: f64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            cfg: FieldConfig::default(),
            grid: UniformGrid::new(-20.0, 20.0, 4001).expect("static grid"),
            alpha_mod: 4.0,
            phase: 0.0,
            fault: None,
        }
    }
}

fn max_over<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter()
        .fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

fn try_max<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    let mut m = 0.0f64;
    for v in it {
        m = m.max(v?);
    }
    Ok(m)
}

fn identity_checks(report: &mut Report, fault: Option<Fault>) {
    let m_of = |beta: f64| {
        let mut m = matrix_m(beta);
        if let Some(Fault::PerturbM(eps)) = fault {
            m.m[0][1] += eps;
        }
        m
    };
    let sx = Mat2::sigma_x();
    let sy = Mat2::sigma_y();
    let metric = max_over(IDENTITY_BETAS.iter().map(|&b| {
        let m = m_of(b);
        (m.adjoint() * m).max_abs_diff(&(Mat2::identity() - sy.scale(C64::new(b, 0.0))))
    }));
    let x = max_over(IDENTITY_BETAS.iter().map(|&b| {
        let m = m_of(b);
        (m.adjoint() * sx * m).max_abs_diff(&sx.scale(C64::new((1.0 - b * b).sqrt(), 0.0)))
    }));
    let y = max_over(IDENTITY_BETAS.iter().map(|&b| {
        let m = m_of(b);
        (m.adjoint() * sy * m).max_abs_diff(&(sy - Mat2::identity().scale(C64::new(b, 0.0))))
    }));
    let spectral = max_over(
        IDENTITY_BETAS
            .iter()
            .map(|&b| m_of(b).max_abs_diff(&matrix_m_spectral(b))),
    );
    let det = max_over(IDENTITY_BETAS.iter().map(|&b| {
        let (l1, l2) = m_eigenvalues(b);
        (m_of(b).det() - C64::new(l1 * l2, 0.0)).norm()
    }));
    report.push(Check::new("m_metric_identity", metric, 1e-12));
    report.push(Check::new("m_sigma_x_identity", x, 1e-12));
    report.push(Check::new("m_sigma_y_identity", y, 1e-12));
    report.push(Check::new("m_spectral_decomposition", spectral, 1e-12));
    report.push(Check::new("m_determinant", det, 1e-12));
}

fn numerics_checks(report: &mut Report) {
    // H_25(3) = 802306115066290176 exactly
    let h25 = 802306115066290176f64;
    let ln_norm =
        0.5 * (25.0 * 2f64.ln() + (1..=25).map(|j| (j as f64).ln()).sum::<f64>() + 0.5 * PI.ln());
    let exact = h25 * (-4.5f64).exp() / ln_norm.exp();
    report.push(Check::new(
        "hermite_function_exact",
        ((hermite_function(25, 3.0) - exact) / exact).abs(),
        1e-12,
    ));
    let grid = UniformGrid::new(-12.0, 12.0, 2401).expect("static grid");
    let prof = GridProfile::sample(&grid.nodes(), |x| hermite_function(7, x).powi(2));
    report.push(Check::from_result(
        "hermite_function_normalization",
        1e-10,
        integrate(&prof, &grid.trapezoid()).map(|v| (v - 1.0).abs()),
    ));
}

fn spectrum_checks(report: &mut Report, cfg: &FieldConfig) -> Result<()> {
    let unit = FieldConfig::new(1.0, 0.0, 0.0, cfg.valley())?;
    let zero_field = max_over((0..=10).map(|n| (energy(n, &unit) - (2.0 * n as f64).sqrt()).abs()));
    report.push(Check::new("spectrum_zero_field", zero_field, 1e-12));
    let mut scaling = 0.0f64;
    for &b in &IDENTITY_BETAS[1..] {
        let c = cfg.with_beta(b)?;
        for n in 1..=10 {
            let ratio =
                (energy(n, &c) + c.k() * b) / energy(n, &cfg.with_beta(0.0)?.with_k(c.k())?);
            let want = (1.0 - b * b).powf(0.75);
            scaling = scaling.max((ratio - want).abs());
        }
    }
    report.push(Check::new("spectrum_collapse_scaling", scaling, 1e-10));
    let res = max_over((0..=5).map(|n| hamiltonian_residual(n, cfg, &default_grid(n, cfg))));
    report.push(Check::new("hamiltonian_residual", res, 1e-6));
    Ok(())
}

fn ladder_checks(report: &mut Report) {
    let q = max_over((0..=20).map(|n| {
        let s = KetSum::from_kets([LadderKet::diagonal(n)]);
        q_minus_sum(&q_plus_sum(&s))
            .sub(&q_plus_sum(&q_minus_sum(&s)))
            .max_abs_diff(&s)
    }));
    report.push(Check::new("q_commutator", q, 1e-12));
    let c_ok = (0..=20).all(|n| {
        let want = match n {
            0 => 1,
            1 => 3,
            _ => 2,
        };
        commutator_c(n).ok() == Some(want)
    });
    report.push(Check::new(
        "commutator_c",
        if c_ok { 0.0 } else { 1.0 },
        0.0,
    ));
    let mut state = SpinorExpansion::basis(0, 0.0);
    let mut worst = 0.0f64;
    for k in 1..=15usize {
        state = tilde_theta_plus(&state);
        let ln = (2 * k - 1) as f64 * 2f64.ln() + (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
        worst = worst.max(
            state
                .scale(C64::new((-0.5 * ln).exp(), 0.0))
                .max_abs_diff(&SpinorExpansion::basis(k, 0.0)),
        );
    }
    report.push(Check::new("tilde_theta_plus_reconstruction", worst, 1e-12));
    let lowered = big_theta_minus(&SpinorExpansion::basis(1, 0.0));
    report.push(Check::new(
        "theta_minus_action",
        (lowered.coeff(0) - C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm(),
        1e-15,
    ));
}

fn coherent_checks(report: &mut Report, cfg: &FieldConfig) -> Result<()> {
    let mut specs = Vec::new();
    for &a in &[0.0, 1.0, 2.0, 4.0] {
        for j in 0..8 {
            for &d in &[0.0, PI / 2.0] {
                specs.push(CoherentSpec::new(
                    a,
                    j as f64 * PI / 4.0,
                    d,
                    &Default::default(),
                )?);
            }
        }
    }
    report.push(Check::from_result(
        "coherent_eigenvalue",
        1e-9,
        try_max(specs.iter().map(eigenvalue_residual)),
    ));

    let norms = try_max((0..=20).map(|n| {
        density_eigen(n, cfg, &default_grid(n, cfg))?
            .norm(&default_grid(n, cfg))
            .map(|v| (v - 1.0).abs())
    }));
    report.push(Check::from_result("eigen_normalization", 1e-8, norms));

    let coherent = [(0.0, 0.0), (1.0, 0.5), (2.0, 1.0), (4.0, 0.0)];
    let dens = try_max(coherent.iter().map(|&(a, ph)| {
        let s = CoherentSpec::from_alpha(a, ph)?;
        let g = default_grid(s.trunc, cfg);
        let d = density_coherent(&s, cfg, &g, SeriesForm::default())?;
        Ok((d.norm(&g)? - 1.0).abs())
    }));
    report.push(Check::from_result("coherent_density_routes", 1e-8, dens));

    let hur = try_max(coherent.iter().map(|&(a, ph)| {
        let s = CoherentSpec::from_alpha(a, ph)?;
        Ok(hur_closed_form(&s, cfg)?.max_deviation(&hur_oracle(&s, cfg)?))
    }));
    report.push(Check::from_result("hur_routes", 1e-8, hur));
    let bound = try_max(coherent.iter().map(|&(a, ph)| {
        let s = CoherentSpec::from_alpha(a, ph)?;
        Ok((0.5 - 1e-9 - hur_closed_form(&s, cfg)?.product).max(0.0))
    }));
    report.push(Check::from_result("hur_bound", 0.0, bound));

    let en = try_max(coherent.iter().map(|&(a, ph)| {
        let s = CoherentSpec::from_alpha(a, ph)?;
        Ok((mean_energy(&s, cfg)? - mean_energy_coefficients(&s, cfg)?).abs())
    }));
    report.push(Check::from_result("energy_routes", 1e-8, en));

    let vel = try_max(coherent.iter().map(|&(a, ph)| {
        let s = CoherentSpec::from_alpha(a, ph)?;
        Ok((mean_velocity_coherent(&s, cfg)? - mean_velocity_fd(&s, cfg, 1e-4)?).abs())
    }));
    report.push(Check::from_result(
        "coherent_velocity_derivative",
        1e-6,
        vel,
    ));
    let zero = CoherentSpec::from_alpha(0.0, 0.0)?;
    report.push(Check::from_result(
        "coherent_velocity_ground",
        1e-12,
        mean_velocity_coherent(&zero, cfg).map(|v| (v + cfg.v_d()).abs()),
    ));

    let eigen_v = max_over((0..=5).map(|n| {
        let dk = 1e-4;
        let fd = (energy(n, &cfg.with_k(cfg.k() + dk).expect("finite k"))
            - energy(n, &cfg.with_k(cfg.k() - dk).expect("finite k")))
            / (2.0 * dk);
        (fd - mean_velocity_eigen(cfg)).abs()
    }));
    report.push(Check::new("eigen_velocity_derivative", eigen_v, 1e-6));

    let comp = completeness_matrix(6, &CompletenessQuadrature::default());
    let mut dev = 0.0f64;
    for (m, row) in comp.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            let want = if m == n { 1.0 } else { 0.0 };
            dev = dev.max((v - want).norm());
        }
    }
    report.push(Check::new("completeness", dev, 1e-6));
    Ok(())
}

fn classical_checks(report: &mut Report) -> Result<()> {
    let mut worst = 0.0f64;
    for (i, vd) in [0.0, 0.3, 1.5].into_iter().enumerate() {
        let c = ClassicalConfig::new(0.5 * i as f64, -1.0, 1.0, 0.2, 1.0, vd)?;
        let r2 = c.radius().powi(2);
        for j in 0..200 {
            worst = worst.max(circle_residual(&c, 0.37 * j as f64) / r2);
        }
    }
    report.push(Check::new("classical_circle", worst, 1e-10));
    let c = ClassicalConfig::new(0.3, 0.7, 1.0, -0.4, 2.0, 0.0)?;
    let (x, y) = trajectory(&c, 2.0 * PI / c.omega_b);
    report.push(Check::new(
        "classical_period_closure",
        (x - c.x0).abs().max((y - c.y0).abs()),
        1e-12,
    ));
    Ok(())
}

fn support_warnings(report: &mut Report, opts: &VerifyOptions) {
    let cfg = &opts.cfg;
    let rule = opts.grid.trapezoid();
    for n in 0..=5 {
        let prof = GridProfile::sample(&opts.grid.nodes(), |x| psi_spinor(n, x, cfg).norm_sqr());
        if let Ok(norm) = integrate(&prof, &rule) {
            let lost = 1.0 - norm;
            if lost > crate::coherent::GRID_SUPPORT_TOL {
                report.warnings.push(format!(
                    "grid support: eigenstate n={n} loses {lost:.3e} of its norm at beta={}",
                    cfg.beta()
                ));
            }
        }
    }
    if let Ok(spec) = CoherentSpec::from_alpha(opts.alpha_mod, opts.phase) {
        if let Ok(p) = render_coherent_lenient(&spec, cfg, &opts.grid) {
            let lost = p.lost_norm();
            if lost > crate::coherent::GRID_SUPPORT_TOL {
                report.warnings.push(format!(
                    "grid support: coherent |alpha|={} loses {lost:.3e} of its norm at beta={}",
                    opts.alpha_mod,
                    cfg.beta()
                ));
            }
        }
    }
}

/// Runs every check; never fails early.
pub fn run(opts: &VerifyOptions) -> Report {
    let mut report = Report::default();
    numerics_checks(&mut report);
    identity_checks(&mut report, opts.fault);
    if let Err(e) = spectrum_checks(&mut report, &opts.cfg) {
        report.push(Check::from_result("spectrum", 0.0, Err(e)));
    }
    ladder_checks(&mut report);
    if let Err(e) = coherent_checks(&mut report, &opts.cfg) {
        report.push(Check::from_result("coherent", 0.0, Err(e)));
    }
    if let Err(e) = classical_checks(&mut report) {
        report.push(Check::from_result("classical", 0.0, Err(e)));
    }
    support_warnings(&mut report, opts);
    report
}
