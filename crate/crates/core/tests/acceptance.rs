//! Acceptance suite: one PASS/FAIL line per criterion, with wall time against
//! its budget.
//!
//! Criteria listed in `KNOWN_FAILURES` are evaluated in full and reported as
//! FAIL; they do not change the exit status. Any other failure exits with 1.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dcf_core::classical::{circle_residual, trajectory};
use dcf_core::coherent::{completeness_matrix, eigenvalue_residual, CompletenessQuadrature};
use dcf_core::eigensystem::{
    default_grid, energy, m_eigenvalues, matrix_m, matrix_m_spectral, mean_velocity_eigen,
    rotation_u,
};
use dcf_core::ladder::{big_theta_minus, commutator_c, q_minus_sum, q_plus_sum, tilde_theta_plus};
use dcf_core::observables::{
    density_coherent_direct, density_coherent_series, density_deviation, density_eigen,
    density_eigen_direct, hur_closed_form, hur_oracle, mean_energy, mean_energy_coefficients,
    mean_velocity_coherent, mean_velocity_fd,
};
use dcf_core::{
    ClassicalConfig, CoherentSpec, FieldConfig, KetSum, LadderKet, Mat2, SeriesForm,
    SpinorExpansion, TruncationPolicy, UniformGrid, Valley, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// σ_p ≤ σ_ζ does not hold for small |α| near φ = 0; see README.
const KNOWN_FAILURES: &[u32] = &[7];

type Outcome = Result<Vec<String>, Vec<String>>;
/// (id, name, budget in seconds, check)
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

struct Line {
    ok: bool,
    notes: Vec<String>,
}

impl Line {
    fn new() -> Self {
        Self {
            ok: true,
            notes: Vec::new(),
        }
    }

    /// Records `measured ≤ tol` under `label`.
    fn within(&mut self, label: &str, measured: f64, tol: f64) {
        let pass = measured.is_finite() && measured <= tol;
        self.ok &= pass;
        let tag = if pass { "ok" } else { "VIOLATED" };
        self.notes
            .push(format!("{label}: {measured:.3e} (tol {tol:.0e}) {tag}"));
    }

    fn holds(&mut self, label: &str, pass: bool, info: String) {
        self.ok &= pass;
        let tag = if pass { "ok" } else { "VIOLATED" };
        self.notes.push(format!("{label}: {info} {tag}"));
    }

    fn finish(self) -> Outcome {
        if self.ok {
            Ok(self.notes)
        } else {
            Err(self.notes)
        }
    }
}

fn cfg(b: f64, beta: f64, k: f64) -> FieldConfig {
    FieldConfig::new(b, beta, k, Valley::K).expect("valid field config")
}

fn betas_0_to_99() -> Vec<f64> {
    (1..=9)
        .map(|i| i as f64 / 10.0)
        .chain([0.95, 0.99])
        .collect()
}

fn spectrum() -> Outcome {
    let mut l = Line::new();
    let unit = cfg(1.0, 0.0, 0.0);
    let e0 = (0..=10)
        .map(|n| (energy(n, &unit) - (2.0 * n as f64).sqrt()).abs())
        .fold(0.0, f64::max);
    l.within("E_n(β=0) − √(2n), n ≤ 10", e0, 1e-12);
    let mut ratio_dev = 0.0f64;
    for k in [0.0, 1.0, -0.7] {
        let base = cfg(0.5, 0.0, k);
        for beta in betas_0_to_99() {
            let c = cfg(0.5, beta, k);
            for n in 1..=10 {
                let r = (energy(n, &c) + k * beta) / energy(n, &base);
                ratio_dev = ratio_dev.max((r - (1.0 - beta * beta).powf(0.75)).abs());
            }
        }
    }
    l.within("(E_n + kβ)/E_n(0) − (1−β²)^(3/4)", ratio_dev, 1e-10);
    l.finish()
}

fn m_identities() -> Outcome {
    let mut l = Line::new();
    let betas: Vec<f64> = std::iter::once(0.0).chain(betas_0_to_99()).collect();
    assert_eq!(betas.len(), 12);
    let (sx, sy, id) = (Mat2::sigma_x(), Mat2::sigma_y(), Mat2::identity());
    let re = |v: f64| C64::new(v, 0.0);
    let mut dev = [0.0f64; 4];
    for &b in &betas {
        let m = matrix_m(b);
        let md = m.adjoint();
        dev[0] = dev[0].max((md * m).max_abs_diff(&(id - sy.scale(re(b)))));
        dev[1] = dev[1].max((md * sx * m).max_abs_diff(&sx.scale(re((1.0 - b * b).sqrt()))));
        dev[2] = dev[2].max((md * sy * m).max_abs_diff(&(sy - id.scale(re(b)))));
        let (l1, l2) = m_eigenvalues(b);
        let u = rotation_u(PI / 4.0);
        let spectral = u * Mat2::diag(re(l1), re(l2)) * u.adjoint();
        dev[3] = dev[3].max(
            m.max_abs_diff(&spectral)
                .max(m.max_abs_diff(&matrix_m_spectral(b))),
        );
    }
    l.within("𝕄†𝕄 = I − βσ_y", dev[0], 1e-12);
    l.within("𝕄†σ_x𝕄 = √(1−β²)σ_x", dev[1], 1e-12);
    l.within("𝕄†σ_y𝕄 = σ_y − βI", dev[2], 1e-12);
    l.within("𝕄 = U diag(μ) U⁻¹", dev[3], 1e-12);
    l.finish()
}

/// (β, |α|, phase, δ) over the density and normalization test matrix.
fn coherent_matrix() -> Vec<(f64, CoherentSpec)> {
    let policy = TruncationPolicy::default();
    let mut out = Vec::new();
    for beta in [0.0, 0.25, 0.5, 0.75, 0.9] {
        for a in [0.0, 1.0, 2.0, 4.0] {
            for j in 0..4 {
                for delta in [0.0, PI / 2.0] {
                    let spec = CoherentSpec::new(a, j as f64 * PI / 2.0 + 0.3, delta, &policy)
                        .expect("valid spec");
                    out.push((beta, spec));
                }
            }
        }
    }
    out
}

fn normalization() -> Outcome {
    let mut l = Line::new();
    let mut eig = 0.0f64;
    for beta in [0.0, 0.25, 0.5, 0.75, 0.9] {
        let c = cfg(0.5, beta, 1.0);
        for n in 0..=20 {
            let g = default_grid(n, &c);
            match density_eigen(n, &c, &g).and_then(|d| d.norm(&g)) {
                Ok(v) => eig = eig.max((v - 1.0).abs()),
                Err(_) => eig = f64::INFINITY,
            }
        }
    }
    l.within("eigenstates n ≤ 20: |∫ρ − 1|", eig, 1e-8);
    let mut coh = 0.0f64;
    for (beta, spec) in coherent_matrix() {
        let c = cfg(0.5, beta, 0.0);
        let g = default_grid(spec.trunc, &c);
        let v =
            density_coherent_series(&spec, &c, &g, SeriesForm::default()).and_then(|d| d.norm(&g));
        coh = coh.max(v.map(|v| (v - 1.0).abs()).unwrap_or(f64::INFINITY));
    }
    l.within("coherent matrix: |∫ρ − 1|", coh, 1e-8);
    l.finish()
}

fn ladder_algebra() -> Outcome {
    let mut l = Line::new();
    let q = (0..=20)
        .map(|n| {
            let s = KetSum::from_kets([LadderKet::diagonal(n)]);
            q_minus_sum(&q_plus_sum(&s))
                .sub(&q_plus_sum(&q_minus_sum(&s)))
                .max_abs_diff(&s)
        })
        .fold(0.0, f64::max);
    l.within("[𝒬⁻,𝒬⁺] − 1, n ≤ 20", q, 1e-12);

    let mut action = 0.0f64;
    for delta in [0.0, 0.7] {
        let e = C64::from_polar(1.0, delta);
        for n in 1..=20usize {
            let out = big_theta_minus(&SpinorExpansion::basis(n, delta));
            let want = e * (n as f64).sqrt() / if n == 1 { 2f64.sqrt() } else { 1.0 };
            action = action.max((out.coeff(n - 1) - want).norm());
        }
    }
    l.within("Θ⁻Φ_n coefficients", action, 1e-14);

    let mut rebuild = 0.0f64;
    for delta in [0.0, 1.3] {
        let mut state = SpinorExpansion::basis(0, delta);
        for k in 1..=15usize {
            state = tilde_theta_plus(&state);
            let ln = (2 * k - 1) as f64 * 2f64.ln() + (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
            let pref = C64::from_polar((-0.5 * ln).exp(), k as f64 * delta);
            rebuild = rebuild.max(
                state
                    .scale(pref)
                    .max_abs_diff(&SpinorExpansion::basis(k, delta)),
            );
        }
    }
    l.within("(Θ̃⁺)^k Φ_0 ∝ Φ_k, k ≤ 15", rebuild, 1e-12);

    let cs: Vec<u32> = (0..=20).map(|n| commutator_c(n).unwrap_or(0)).collect();
    let want: Vec<u32> = (0..=20)
        .map(|n| [1, 3].get(n).copied().unwrap_or(2))
        .collect();
    l.holds(
        "commutator_c(0..=20)",
        cs == want,
        format!("{:?}…", &cs[..4]),
    );
    l.finish()
}

fn eigenvalue_property() -> Outcome {
    let mut l = Line::new();
    let policy = TruncationPolicy::default();
    let mut worst = 0.0f64;
    for a in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0] {
        for j in 0..8 {
            for delta in [0.0, PI / 2.0] {
                let spec =
                    CoherentSpec::new(a, j as f64 * PI / 4.0, delta, &policy).expect("valid spec");
                worst = worst.max(eigenvalue_residual(&spec).unwrap_or(f64::INFINITY));
            }
        }
    }
    l.within("‖Θ⁻Φ_α − αΦ_α‖/‖Φ_α‖", worst, 1e-9);
    l.finish()
}

fn dual_routes() -> Outcome {
    let mut l = Line::new();
    let (mut dens, mut hur, mut en) = (0.0f64, 0.0f64, 0.0f64);
    for (beta, spec) in coherent_matrix() {
        for k in [0.0, 1.0] {
            let c = cfg(0.5, beta, k);
            if k == 0.0 {
                let g = default_grid(spec.trunc, &c);
                let d =
                    density_coherent_series(&spec, &c, &g, SeriesForm::default()).and_then(|s| {
                        density_coherent_direct(&spec, &c, &g)
                            .map(|(d, _)| density_deviation(&d, &s))
                    });
                dens = dens.max(d.unwrap_or(f64::INFINITY));
                let h = hur_closed_form(&spec, &c)
                    .and_then(|h| hur_oracle(&spec, &c).map(|o| h.max_deviation(&o)));
                hur = hur.max(h.unwrap_or(f64::INFINITY));
            }
            let e = mean_energy(&spec, &c)
                .and_then(|e| mean_energy_coefficients(&spec, &c).map(|w| (e - w).abs()));
            en = en.max(e.unwrap_or(f64::INFINITY));
        }
    }
    l.within("density series vs Ψ†Ψ (relative to max ρ)", dens, 1e-8);
    l.within("quadrature moments closed form vs contraction", hur, 1e-8);
    l.within("mean energy closed form vs coefficient route", en, 1e-8);
    l.finish()
}

fn hur() -> Outcome {
    let mut l = Line::new();
    let axis: Vec<f64> = (0..33).map(|i| -4.0 + 0.25 * i as f64).collect();
    let betas = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99];
    let policy = TruncationPolicy::default();
    let mut min_prod = f64::INFINITY;
    let mut errors = 0;
    for &beta in &betas {
        let c = cfg(0.5, beta, 0.0);
        for &re in &axis {
            for &im in &axis {
                let spec = CoherentSpec::from_complex(C64::new(re, im), 0.0, &policy);
                match spec.and_then(|s| hur_closed_form(&s, &c)) {
                    Ok(h) => min_prod = min_prod.min(h.product),
                    Err(_) => errors += 1,
                }
            }
        }
    }
    l.holds(
        "min σ_ζσ_p on the α-plane grid",
        min_prod >= 0.5 - 1e-9 && errors == 0,
        format!(
            "{min_prod:.12} over {} points, {errors} errors",
            axis.len() * axis.len() * betas.len()
        ),
    );
    let zero = CoherentSpec::from_alpha(0.0, 0.0).expect("valid spec");
    let at_zero = betas
        .iter()
        .chain(&[0.999])
        .map(|&b| {
            hur_closed_form(&zero, &cfg(0.5, b, 0.0))
                .map(|h| (h.product - 0.5).abs())
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    l.within("|σ_ζσ_p − 1/2| at α = 0", at_zero, 1e-10);

    // σ_p ≤ σ_ζ over |α| ∈ [0, 4], φ ∈ [−π/8, π/8], β ∈ {0.5, 0.75, 0.9}
    let mut violations = Vec::new();
    let mut total = 0;
    for beta in [0.5, 0.75, 0.9] {
        let c = cfg(0.5, beta, 0.0);
        for ia in 0..=32 {
            let a = 0.125 * ia as f64;
            for ip in -4..=4 {
                let phi = ip as f64 * PI / 32.0;
                total += 1;
                let h = hur_closed_form(&CoherentSpec::from_alpha(a, phi).expect("valid spec"), &c);
                match h {
                    Ok(h) if h.sigma_p() <= h.sigma_zeta() + 1e-12 => {}
                    Ok(h) => violations.push((beta, a, phi, h.sigma_p() - h.sigma_zeta())),
                    Err(_) => violations.push((beta, a, phi, f64::INFINITY)),
                }
            }
        }
    }
    let largest_bad = violations.iter().map(|v| v.1).fold(0.0, f64::max);
    let worst = violations.iter().map(|v| v.3).fold(0.0, f64::max);
    l.holds(
        "σ_p ≤ σ_ζ for φ ∈ [−π/8, π/8], β ≥ 0.5, |α| ≤ 4",
        violations.is_empty(),
        format!(
            "{} of {total} points violate, all at |α| ≤ {largest_bad}, largest σ_p − σ_ζ = {worst:.4}",
            violations.len()
        ),
    );
    l.finish()
}

fn drift_velocities() -> Outcome {
    let mut l = Line::new();
    let mut analytic = 0.0f64;
    let mut fd = 0.0f64;
    let mut quad = 0.0f64;
    for beta in [0.0, 0.25, 0.5, 0.75, 0.9, 0.99] {
        let c = cfg(0.5, beta, 0.8);
        analytic = analytic.max((mean_velocity_eigen(&c) + beta).abs());
        let dk = 1e-4;
        for n in 0..=10 {
            let hi = energy(n, &cfg(0.5, beta, 0.8 + dk));
            let lo = energy(n, &cfg(0.5, beta, 0.8 - dk));
            fd = fd.max(((hi - lo) / (2.0 * dk) + beta).abs());
        }
        if beta <= 0.9 {
            for n in 0..=5 {
                let g = default_grid(n, &c);
                let v = density_eigen(n, &c, &g).and_then(|d| d.mean_velocity(&g));
                quad = quad.max(v.map(|v| (v + beta).abs()).unwrap_or(f64::INFINITY));
            }
        }
    }
    l.within("eigenstate ⟨v_y⟩ + β (analytic)", analytic, 1e-12);
    l.within("∂E_n/∂k + β (finite difference)", fd, 1e-6);
    l.within("∫j_y/∫ρ + β (quadrature)", quad, 1e-6);

    let zero = CoherentSpec::from_alpha(0.0, 0.0).expect("valid spec");
    let mut ground = 0.0f64;
    let mut coh = 0.0f64;
    for beta in [0.0, 0.25, 0.5, 0.75, 0.9, 0.99] {
        let c = cfg(0.5, beta, 0.5);
        ground = ground.max(
            mean_velocity_coherent(&zero, &c)
                .map(|v| (v + c.v_d()).abs())
                .unwrap_or(f64::INFINITY),
        );
        for a in [0.5, 1.0, 2.0, 4.0] {
            for j in 0..8 {
                let s = CoherentSpec::from_alpha(a, j as f64 * PI / 4.0).expect("valid spec");
                let d = mean_velocity_coherent(&s, &c)
                    .and_then(|v| mean_velocity_fd(&s, &c, 1e-4).map(|f| (v - f).abs()));
                coh = coh.max(d.unwrap_or(f64::INFINITY));
            }
        }
    }
    l.within("⟨v_y⟩_α(0) + v_d", ground, 1e-12);
    l.within("∂⟨H⟩_α/∂k vs closed-form ⟨v_y⟩_α", coh, 1e-6);
    l.finish()
}

fn completeness() -> Outcome {
    let mut l = Line::new();
    let m = completeness_matrix(6, &CompletenessQuadrature::default());
    let (mut diag, mut off) = (0.0f64, 0.0f64);
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i == j {
                diag = diag.max((v - 1.0).norm());
            } else {
                off = off.max(v.norm());
            }
        }
    }
    l.within("diagonal − 1, n ≤ 6", diag, 1e-6);
    l.within("off-diagonal", off, 1e-6);
    l.finish()
}

/// max |f(x) − s·f(2x_c − x)| over a grid symmetric about x_c.
fn reflection_defect(values: &[f64], sign: f64) -> f64 {
    let n = values.len();
    (0..n)
        .map(|i| (values[i] - sign * values[n - 1 - i]).abs())
        .fold(0.0, f64::max)
}

fn parity() -> Outcome {
    let mut l = Line::new();
    let symmetric = |c: &FieldConfig| {
        let x0 = c.x_center();
        UniformGrid::new(x0 - 25.0, x0 + 25.0, 5001).expect("ordered grid")
    };
    let c0 = cfg(0.5, 0.0, 1.0);
    let g = symmetric(&c0);
    let (mut even, mut odd) = (0.0f64, 0.0f64);
    for n in 0..=10 {
        match density_eigen(n, &c0, &g) {
            Ok(d) => {
                even = even.max(reflection_defect(&d.rho.values, 1.0));
                odd = odd.max(reflection_defect(&d.jy.values, -1.0));
            }
            Err(_) => even = f64::INFINITY,
        }
    }
    l.within("β = 0: ρ_n even", even, 1e-9);
    l.within("β = 0: j_y odd", odd, 1e-9);
    let c5 = cfg(0.5, 0.5, 1.0);
    let g = symmetric(&c5);
    let broken = (1..=5)
        .filter_map(|n| density_eigen(n, &c5, &g).ok())
        .map(|d| reflection_defect(&d.rho.values, 1.0))
        .fold(f64::INFINITY, f64::min);
    l.holds(
        "β = 0.5: min over n ∈ 1..=5 of ρ_n asymmetry > 1e-2",
        broken > 1e-2,
        format!("{broken:.4}"),
    );
    let jx = (0..=10)
        .map(|n| {
            let (_, jx) = density_eigen_direct(n, &c5, &g);
            jx.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max);
    l.within("j_x from Ψ_n†σ_xΨ_n", jx, 1e-12);
    l.finish()
}

fn collapse() -> Outcome {
    let mut l = Line::new();
    for n in 0..=2 {
        let peak = |beta: f64| {
            let c = cfg(0.5, beta, 1.0);
            let g = default_grid(n, &c);
            density_eigen(n, &c, &g)
                .map(|d| d.rho.max_value())
                .unwrap_or(f64::NAN)
        };
        let (hi, lo) = (peak(0.75), peak(0.99));
        l.holds(
            &format!("max ρ_{n}: β=0.99 below β=0.75"),
            lo < hi,
            format!("{lo:.4} < {hi:.4}"),
        );
    }
    let betas = [0.0, 0.25, 0.5, 0.75, 0.9];
    let spec = CoherentSpec::from_alpha(4.0, 0.0).expect("valid spec");
    let locs: Vec<f64> = betas
        .iter()
        .map(|&b| {
            let c = cfg(0.5, b, 0.0);
            let g = default_grid(spec.trunc, &c);
            density_coherent_series(&spec, &c, &g, SeriesForm::default())
                .map(|d| d.rho.argmax())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let decreasing = locs.windows(2).all(|w| w[1] < w[0]);
    l.holds(
        "coherent |α|=4, φ=0: argmax ρ decreasing in β",
        decreasing,
        format!(
            "{:?}",
            locs.iter()
                .map(|x| (x * 1e3).round() / 1e3)
                .collect::<Vec<_>>()
        ),
    );
    l.finish()
}

fn classical() -> Outcome {
    let mut l = Line::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c = ClassicalConfig::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.1..3.0),
            rng.gen_range(-2.0..2.0),
        )
        .expect("valid classical config");
        let t = rng.gen_range(0.0..50.0);
        let r2 = c.radius().powi(2);
        if r2 > 0.0 {
            worst = worst.max(circle_residual(&c, t) / r2);
        }
    }
    l.within("circle residual / R²", worst, 1e-10);
    let c = ClassicalConfig::new(0.3, -0.2, 0.8, 0.4, 1.7, 0.0).expect("valid classical config");
    let (x, y) = trajectory(&c, 2.0 * PI / c.omega_b);
    l.within(
        "period closure at v_d = 0",
        (x - c.x0).hypot(y - c.y0),
        1e-12,
    );
    l.finish()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "spectrum", 1, spectrum),
        (2, "M identities", 1, m_identities),
        (3, "normalization", 30, normalization),
        (4, "ladder algebra", 1, ladder_algebra),
        (5, "coherent eigenvalue property", 5, eigenvalue_property),
        (6, "dual-route agreement", 60, dual_routes),
        (7, "HUR", 60, hur),
        (8, "drift velocities", 5, drift_velocities),
        (9, "completeness", 30, completeness),
        (10, "parity at zero field", 5, parity),
        (11, "collapse", 30, collapse),
        (12, "classical", 1, classical),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (ok, notes) = match out {
            Ok(n) => (in_time, n),
            Err(n) => (false, n),
        };
        let tag = if ok { "PASS" } else { "FAIL" };
        let known = !ok && KNOWN_FAILURES.contains(&id);
        println!(
            "{tag} criterion {id:>2} {name} [{:.2}s / {budget}s]{}",
            elapsed.as_secs_f64(),
            if known { " (known)" } else { "" }
        );
        for n in notes {
            println!("       {n}");
        }
        if ok {
            passed += 1;
        } else if !known {
            unexpected += 1;
        }
    }
    println!("{passed}/12 criteria pass, {unexpected} unexpected failure(s)");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
