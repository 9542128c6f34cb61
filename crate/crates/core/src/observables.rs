//! Densities, currents, quadrature variances, mean energy and drift velocity.
//!
//! Each closed form has a second, independent route: grid sampling of Ψ for
//! the densities and contraction in the ladder-coefficient basis for the
//! expectation values.

use crate::coherent::{coherent_coefficients, render_coherent, CoherentSpec};
use crate::eigensystem::{energy, matrix_m, phi_n, psi_spinor, zeta, FieldConfig, Spinor2};
use crate::error::{Error, Result};
use crate::ladder::{q_minus_sum, q_plus_sum, KetSum, SpinorKets};
use crate::numerics::{
    hermite_functions_into, integrate, poisson_weights, GridProfile, HermiteTable, UniformGrid,
};
use crate::C64;

/// Probability density and y-current (in units of e·v_F) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPair {
    pub rho: GridProfile<f64>,
    pub jy: GridProfile<f64>,
}

impl DensityPair {
    pub fn norm(&self, grid: &UniformGrid) -> Result<f64> {
        integrate(&self.rho, &grid.trapezoid())
    }

    /// ∫j_y / ∫ρ.
    pub fn mean_velocity(&self, grid: &UniformGrid) -> Result<f64> {
        let rule = grid.trapezoid();
        Ok(integrate(&self.jy, &rule)? / integrate(&self.rho, &rule)?)
    }
}

fn check_support(norm: f64, expected: f64) -> Result<()> {
    let lost = expected - norm;
    if lost > crate::coherent::GRID_SUPPORT_TOL {
        return Err(Error::GridSupport { lost });
    }
    Ok(())
}

/// ρ_n = |Φ_n|² − βΦ_n†σ_yΦ_n and j_y = Φ_n†σ_yΦ_n − β|Φ_n|², never forming 𝕄.
pub fn density_eigen(n: usize, cfg: &FieldConfig, grid: &UniformGrid) -> Result<DensityPair> {
    let xs = grid.nodes();
    let beta = cfg.beta();
    let phis: Vec<Spinor2> = xs.iter().map(|&x| phi_n(n, x, cfg)).collect();
    let rho = GridProfile {
        x: xs.clone(),
        values: phis
            .iter()
            .map(|p| p.norm_sqr() - beta * p.sigma_y_expect())
            .collect(),
    };
    let jy = GridProfile {
        x: xs,
        values: phis
            .iter()
            .map(|p| p.sigma_y_expect() - beta * p.norm_sqr())
            .collect(),
    };
    let out = DensityPair { rho, jy };
    check_support(out.norm(grid)?, 1.0)?;
    Ok(out)
}

/// Ψ_n†Ψ_n, Ψ_n†σ_yΨ_n and Ψ_n†σ_xΨ_n from Ψ_n = 𝕄Φ_n.
pub fn density_eigen_direct(
    n: usize,
    cfg: &FieldConfig,
    grid: &UniformGrid,
) -> (DensityPair, GridProfile<f64>) {
    let xs = grid.nodes();
    let psis: Vec<Spinor2> = xs.iter().map(|&x| psi_spinor(n, x, cfg)).collect();
    direct_from_psi(&xs, &psis, 1.0)
}

fn direct_from_psi(xs: &[f64], psis: &[Spinor2], norm: f64) -> (DensityPair, GridProfile<f64>) {
    let prof = |f: &dyn Fn(&Spinor2) -> f64| GridProfile {
        x: xs.to_vec(),
        values: psis.iter().map(|p| f(p) / norm).collect(),
    };
    (
        DensityPair {
            rho: prof(&|p| p.norm_sqr()),
            jy: prof(&|p| p.sigma_y_expect()),
        },
        prof(&|p| p.sigma_x_expect()),
    )
}

/// Which center the β cross term ψ_{m−1}(ζ_·)ψ_n(ζ_n) is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossCenter {
    /// ψ_{m−1}(ζ_m): each upper component on its own coordinate.
    #[default]
    Own,
    /// ψ_{m−1}(ζ_n): the partner's coordinate, as the double sum is printed.
    Partner,
}

/// Normalization denominator of the coherent density series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeriesNorm {
    /// 2e^{|α̃|²} − 1, the L² norm of Ψ_α over 𝒩².
    #[default]
    L2,
    /// 2e^{|α̃|²} − 1 − 2βηRe(α̃)Σ|α̃|^{2n}/(n!√(n+1)), the level-metric norm.
    CoefficientMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeriesForm {
    pub cross: CrossCenter,
    pub norm: SeriesNorm,
}

/// Pieces of the coherent density series at one point, before normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SeriesTerms {
    /// ψ_0² + |Σc_nψ_n(ζ_n)|² + |Σc_nψ_{n−1}(ζ_n)|² + 2Re(Σc_nψ_n(ζ_n)ψ_0(ζ_0))
    diagonal: f64,
    /// Re(Σc_nψ_{n−1}(ζ_n)ψ_0(ζ_0) + Σ_{m,n} c̄_m c_n ψ_{m−1}(ζ_·)ψ_n(ζ_n))
    cross: f64,
}

fn series_terms(
    c: &[C64],
    table: &HermiteTable,
    x: f64,
    cfg: &FieldConfig,
    form: CrossCenter,
    buf: &mut Vec<f64>,
) -> SeriesTerms {
    let pref = (1.0 - cfg.beta() * cfg.beta()).powf(0.125) / cfg.l_b().sqrt();
    let n_max = c.len() - 1;
    // pairs[n] = (ψ_{n−1}(ζ_n), ψ_n(ζ_n))
    let pairs: Vec<(f64, f64)> = (0..=n_max)
        .map(|n| {
            let (a, b) = table.pair(n, zeta(n, x, cfg));
            (pref * a, pref * b)
        })
        .collect();
    let psi00 = c[0].re * pairs[0].1;
    let mut s_level = C64::new(0.0, 0.0);
    let mut s_lower = C64::new(0.0, 0.0);
    for n in 1..=n_max {
        s_level += c[n] * pairs[n].1;
        s_lower += c[n] * pairs[n].0;
    }
    let diagonal =
        psi00 * psi00 + s_level.norm_sqr() + s_lower.norm_sqr() + 2.0 * (s_level * psi00).re;
    let double = match form {
        CrossCenter::Own => (s_lower.conj() * s_level).re,
        CrossCenter::Partner => {
            let mut acc = C64::new(0.0, 0.0);
            for n in 1..=n_max {
                hermite_functions_into(n_max, zeta(n, x, cfg), buf);
                let mut inner = C64::new(0.0, 0.0);
                for m in 1..=n_max {
                    inner += c[m].conj() * (pref * buf[m - 1]);
                }
                acc += inner * c[n] * pairs[n].1;
            }
            acc.re
        }
    };
    SeriesTerms {
        diagonal,
        cross: (s_lower * psi00).re + double,
    }
}

/// Σ_{n≤N} |α̃|^{2n}/(n!√(n+1)) scaled by e^{−|α̃|²}.
fn s1_scaled(r: f64, trunc: usize) -> f64 {
    poisson_weights(r, trunc)
        .iter()
        .enumerate()
        .map(|(n, p)| p / ((n + 1) as f64).sqrt())
        .sum()
}

/// Series denominator scaled by e^{−|α̃|²}.
fn series_denominator_scaled(spec: &CoherentSpec, cfg: &FieldConfig, norm: SeriesNorm) -> f64 {
    let r = spec.alpha_mod * spec.alpha_mod;
    let base = 2.0 - (-r).exp();
    match norm {
        SeriesNorm::L2 => base,
        SeriesNorm::CoefficientMetric => {
            base - 2.0 * cfg.beta() * cfg.eta() * spec.alpha_tilde().re * s1_scaled(r, spec.trunc)
        }
    }
}

/// Closed-form coherent density series evaluated on `grid`.
pub fn density_coherent_series(
    spec: &CoherentSpec,
    cfg: &FieldConfig,
    grid: &UniformGrid,
    form: SeriesForm,
) -> Result<DensityPair> {
    let (rho, jy, _, _) = series_profiles(spec, cfg, grid, form)?;
    Ok(DensityPair { rho, jy })
}

type Profiles = (
    GridProfile<f64>,
    GridProfile<f64>,
    GridProfile<f64>,
    GridProfile<f64>,
);

/// (ρ, j_y, diagonal part, cross part), all divided by the series denominator.
fn series_profiles(
    spec: &CoherentSpec,
    cfg: &FieldConfig,
    grid: &UniformGrid,
    form: SeriesForm,
) -> Result<Profiles> {
    // validates the truncation
    coherent_coefficients(spec)?;
    let alpha_t = spec.alpha_tilde();
    let r = spec.alpha_mod * spec.alpha_mod;
    // c_n = α̃ⁿ/√(n!), rescaled by e^{−r/2} to pair with the scaled denominator
    let mut c = Vec::with_capacity(spec.trunc + 1);
    let mut cur = C64::new((-0.5 * r).exp(), 0.0);
    c.push(cur);
    for n in 1..=spec.trunc {
        cur = cur * alpha_t / (n as f64).sqrt();
        c.push(cur);
    }
    let denom = series_denominator_scaled(spec, cfg, form.norm);
    let table = HermiteTable::new(spec.trunc);
    let (beta, eta) = (cfg.beta(), cfg.eta());
    let xs = grid.nodes();
    let mut buf = Vec::new();
    let terms: Vec<SeriesTerms> = xs
        .iter()
        .map(|&x| series_terms(&c, &table, x, cfg, form.cross, &mut buf))
        .collect();
    let prof = |f: &dyn Fn(&SeriesTerms) -> f64| GridProfile {
        x: xs.clone(),
        values: terms.iter().map(|t| f(t) / denom).collect(),
    };
    Ok((
        prof(&|t| t.diagonal - 2.0 * beta * eta * t.cross),
        prof(&|t| 2.0 * eta * t.cross - beta * t.diagonal),
        prof(&|t| t.diagonal),
        prof(&|t| 2.0 * eta * t.cross),
    ))
}

/// ρ = Ψ_α†Ψ_α/‖Ψ_α‖², j_y = Ψ_α†σ_yΨ_α/‖Ψ_α‖² from the rendered state, with
/// ‖Ψ_α‖² = Σ|a_n|². Also returns j_x.
pub fn density_coherent_direct(
    spec: &CoherentSpec,
    cfg: &FieldConfig,
    grid: &UniformGrid,
) -> Result<(DensityPair, GridProfile<f64>)> {
    let prof = render_coherent(spec, cfg, grid)?;
    Ok(direct_from_psi(
        &prof.psi.x,
        &prof.psi.values,
        prof.coeff_norm,
    ))
}

/// Pointwise tolerance of the two density routes, relative to max ρ.
pub const DENSITY_ROUTE_TOL: f64 = 1e-8;

/// Series and direct routes, checked against each other. On disagreement the
/// offending piece is named: `normalization`, `diagonal` or `beta_cross`.
pub fn density_coherent(
    spec: &CoherentSpec,
    cfg: &FieldConfig,
    grid: &UniformGrid,
    form: SeriesForm,
) -> Result<DensityPair> {
    let (rho, jy, diag, cross) = series_profiles(spec, cfg, grid, form)?;
    let rendered = render_coherent(spec, cfg, grid)?;
    let norm = rendered.coeff_norm;
    let scale = rho.max_value().abs().max(f64::MIN_POSITIVE);
    let tol = DENSITY_ROUTE_TOL * scale;
    let worst = |a: &GridProfile<f64>, f: &dyn Fn(&Spinor2) -> f64| {
        a.values
            .iter()
            .zip(&rendered.phi.values)
            .map(|(s, p)| (s - f(p) / norm).abs())
            .fold(0.0, f64::max)
    };
    // Σ|a_n|²/𝒩² scaled by e^{−r}, against the series denominator
    let r = spec.alpha_mod * spec.alpha_mod;
    let p = poisson_weights(r, spec.trunc);
    let l2 = p[0] + 2.0 * p[1..].iter().sum::<f64>();
    let norm_dev = (series_denominator_scaled(spec, cfg, form.norm) / l2 - 1.0).abs();
    if norm_dev > DENSITY_ROUTE_TOL {
        return Err(Error::SeriesMismatch {
            term: "normalization".into(),
            deviation: norm_dev,
            tolerance: DENSITY_ROUTE_TOL,
        });
    }
    let d = worst(&diag, &|p| p.norm_sqr());
    if d > tol {
        return Err(Error::SeriesMismatch {
            term: "diagonal".into(),
            deviation: d / scale,
            tolerance: DENSITY_ROUTE_TOL,
        });
    }
    let x = worst(&cross, &|p| p.sigma_y_expect());
    if x > tol {
        return Err(Error::SeriesMismatch {
            term: "beta_cross".into(),
            deviation: x / scale,
            tolerance: DENSITY_ROUTE_TOL,
        });
    }
    Ok(DensityPair { rho, jy })
}

/// Largest pointwise deviation between two density pairs, relative to max ρ
/// of the first.
pub fn density_deviation(a: &DensityPair, b: &DensityPair) -> f64 {
    let scale = a.rho.max_value().abs().max(f64::MIN_POSITIVE);
    let dev = |p: &GridProfile<f64>, q: &GridProfile<f64>| {
        p.values
            .iter()
            .zip(&q.values)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    dev(&a.rho, &b.rho).max(dev(&a.jy, &b.jy)) / scale
}

/// Quadrature moments for q = 0 (position-like ζ) and q = 1 (momentum-like p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurResult {
    pub mean_s0: f64,
    pub mean_s1: f64,
    pub mean_s0_sq: f64,
    pub mean_s1_sq: f64,
    /// σ_ζ²
    pub var_s0: f64,
    /// σ_p²
    pub var_s1: f64,
    /// σ_ζ·σ_p
    pub product: f64,
}

impl HurResult {
    fn from_moments(m: [f64; 2], m2: [f64; 2]) -> Result<Self> {
        let v0 = m2[0] - m[0] * m[0];
        let v1 = m2[1] - m[1] * m[1];
        for (q, v) in [(0u8, v0), (1u8, v1)] {
            if v <= 0.0 {
                return Err(Error::NegativeVariance { q, value: v });
            }
        }
        Ok(Self {
            mean_s0: m[0],
            mean_s1: m[1],
            mean_s0_sq: m2[0],
            mean_s1_sq: m2[1],
            var_s0: v0,
            var_s1: v1,
            product: (v0 * v1).sqrt(),
        })
    }

    pub fn sigma_zeta(&self) -> f64 {
        self.var_s0.sqrt()
    }

    pub fn sigma_p(&self) -> f64 {
        self.var_s1.sqrt()
    }

    /// Largest absolute difference over the four moments.
    pub fn max_deviation(&self, other: &HurResult) -> f64 {
        [
            self.mean_s0 - other.mean_s0,
            self.mean_s1 - other.mean_s1,
            self.mean_s0_sq - other.mean_s0_sq,
            self.mean_s1_sq - other.mean_s1_sq,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Poisson-weighted sub-series of the quadrature moments, all scaled by e^{−r}.
struct HurSeries {
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
    t1: f64,
    t2: f64,
    t3: f64,
}

fn hur_series(r: f64, trunc: usize) -> HurSeries {
    let p = poisson_weights(r, trunc);
    let mut s = HurSeries {
        s1: 0.0,
        s2: 0.0,
        s3: 0.0,
        s4: 0.0,
        t1: 0.0,
        t2: 0.0,
        t3: 0.0,
    };
    for (n, w) in p.iter().enumerate() {
        let nf = n as f64;
        s.s1 += w / (nf + 1.0).sqrt();
        s.s2 += w / (nf + 2.0).sqrt();
        s.s3 += w * (2.0 * nf + 1.0) / (nf + 1.0).sqrt();
        s.s4 += w / (nf + 3.0).sqrt();
        // n ≥ 1 sums: r^n/√((n−1)!(n+1)!), √(n+1) r^n/√((n−1)!(n+2)!), r^n/√(n!(n−1)!)
        s.t1 += w * (nf / (nf + 1.0)).sqrt();
        s.t2 += w * (nf / (nf + 2.0)).sqrt();
        s.t3 += w * nf.sqrt();
    }
    s
}

/// Closed-form ⟨𝕊_q⟩ and ⟨𝕊_q²⟩ for q = 0, 1, with the sub-series truncated at
/// the state's N. Every β term carries the valley sign η.
pub fn hur_closed_form(spec: &CoherentSpec, cfg: &FieldConfig) -> Result<HurResult> {
    coherent_coefficients(spec)?;
    let a = spec.alpha_tilde();
    let r = spec.alpha_mod * spec.alpha_mod;
    let s = hur_series(r, spec.trunc);
    let be = cfg.beta() * cfg.eta();
    let er = (-r).exp();
    let d = 2.0 - er - 2.0 * be * a.re * s.s1;
    let mut m = [0.0; 2];
    let mut m2 = [0.0; 2];
    for q in 0..2 {
        let sign = if q == 0 { 1.0 } else { -1.0 };
        let iq = if q == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 1.0)
        };
        let lin = (a + a.conj() * sign) * (1.0 + s.t1)
            - (a * a + a.conj() * a.conj() * sign) * (be * s.s2)
            - C64::new(be * (1.0 + sign) * s.t3, 0.0);
        let mean = lin / (iq * std::f64::consts::SQRT_2 * d);
        let sq = C64::new(er + 4.0 * r, 0.0)
            + (a * a + a.conj() * a.conj()) * (sign * (1.0 + s.t2))
            - ((a + a.conj()) * (s.s3 + sign * s.t3)
                + (a * a * a + (a * a * a).conj()) * (sign * s.s4))
                * be;
        m[q] = mean.re;
        m2[q] = 0.5 * sq.re / d;
    }
    HurResult::from_moments(m, m2)
}

fn s_q(kets: &SpinorKets, q: usize) -> SpinorKets {
    let sign = if q == 0 { 1.0 } else { -1.0 };
    let pref = if q == 0 {
        C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    } else {
        C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2)
    };
    let apply = |k: &KetSum| {
        q_minus_sum(k)
            .add(&q_plus_sum(k).scale(C64::new(sign, 0.0)))
            .scale(pref)
    };
    kets.apply_scalar(apply)
}

/// ⟨a|(I − βσ_y)|b⟩ in the level metric.
fn physical_overlap(a: &SpinorKets, b: &SpinorKets, beta: f64) -> C64 {
    a.overlap(b) - a.overlap(&b.sigma_y()) * beta
}

/// Quadrature moments by applying s_q = (𝒬⁻ + (−1)^q𝒬⁺)/(√2 i^q) to the ket
/// expansion of Φ_α and contracting with ⟨Φ_α|(I − βσ_y)·⟩.
pub fn hur_oracle(spec: &CoherentSpec, cfg: &FieldConfig) -> Result<HurResult> {
    let state = coherent_coefficients(spec)?;
    let kets = SpinorKets::from_expansion(&state, cfg.eta());
    let beta = cfg.beta();
    let norm = physical_overlap(&kets, &kets, beta);
    let mut m = [0.0; 2];
    let mut m2 = [0.0; 2];
    for q in 0..2 {
        let once = s_q(&kets, q);
        let twice = s_q(&once, q);
        m[q] = (physical_overlap(&kets, &once, beta) / norm).re;
        m2[q] = (physical_overlap(&kets, &twice, beta) / norm).re;
    }
    HurResult::from_moments(m, m2)
}

/// Closed-form mean energy ⟨H⟩_α.
pub fn mean_energy(spec: &CoherentSpec, cfg: &FieldConfig) -> Result<f64> {
    coherent_coefficients(spec)?;
    let r = spec.alpha_mod * spec.alpha_mod;
    let p = poisson_weights(r, spec.trunc);
    let beta = cfg.beta();
    let d = series_denominator_scaled(spec, cfg, SeriesNorm::CoefficientMetric);
    let level_sum: f64 = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, w)| w * (2.0 * n as f64).sqrt())
        .sum();
    let s34 = (1.0 - beta * beta).powf(0.75);
    Ok((cfg.k() * beta * ((-r).exp() - 2.0) + 2.0 * s34 / cfg.l_b() * level_sum) / d)
}

/// Σ|a_n|²E_n over the level-metric norm ⟨Ψ_α|Ψ_α⟩ = ⟨Φ_α|(I − βσ_y)|Φ_α⟩,
/// the latter contracted on the ket expansion.
pub fn mean_energy_coefficients(spec: &CoherentSpec, cfg: &FieldConfig) -> Result<f64> {
    let state = coherent_coefficients(spec)?;
    let weighted: f64 = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| a.norm_sqr() * energy(n, cfg))
        .sum();
    let kets = SpinorKets::from_expansion(&state, cfg.eta());
    let norm = physical_overlap(&kets, &kets, cfg.beta()).re;
    Ok(weighted / norm)
}

/// Closed-form ⟨v_y⟩_α = v_d(e^{−r} − 2)/D̂, the k-derivative of ⟨H⟩_α.
pub fn mean_velocity_coherent(spec: &CoherentSpec, cfg: &FieldConfig) -> Result<f64> {
    coherent_coefficients(spec)?;
    let r = spec.alpha_mod * spec.alpha_mod;
    let d = series_denominator_scaled(spec, cfg, SeriesNorm::CoefficientMetric);
    Ok(cfg.v_d() * ((-r).exp() - 2.0) / d)
}

/// Central difference of ⟨H⟩_α in k.
pub fn mean_velocity_fd(spec: &CoherentSpec, cfg: &FieldConfig, dk: f64) -> Result<f64> {
    let hi = mean_energy(spec, &cfg.with_k(cfg.k() + dk)?)?;
    let lo = mean_energy(spec, &cfg.with_k(cfg.k() - dk)?)?;
    Ok((hi - lo) / (2.0 * dk))
}

/// Ψ_α sampled through 𝕄 at one point; used by callers that need Ψ without a grid.
pub fn psi_alpha_at(spec: &CoherentSpec, cfg: &FieldConfig, x: f64) -> Result<Spinor2> {
    let state = coherent_coefficients(spec)?;
    let table = HermiteTable::new(spec.trunc);
    Ok(matrix_m(cfg.beta()).apply(&crate::coherent::phi_alpha_at(
        &state.coeffs,
        &table,
        x,
        cfg,
    )))
}
