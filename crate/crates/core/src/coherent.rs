//! Coherent states of the matrix annihilation operator Θ⁻.

use std::f64::consts::{PI, SQRT_2};

use crate::eigensystem::{matrix_m, phi_from_pair, zeta, FieldConfig, Spinor2};
use crate::error::{Error, Result};
use crate::ladder::{big_theta_minus, SpinorExpansion};
use crate::numerics::{
    integrate, linspace, poisson_tail, truncation_order, GridProfile, HermiteTable,
    TruncationPolicy, UniformGrid,
};
use crate::C64;

/// Norm mass allowed to fall outside a rendering grid.
pub const GRID_SUPPORT_TOL: f64 = 1e-6;

/// Eigenvalue α = |α|e^{iφ}, operator phase δ and series order N.
///
/// `tol` is the amplitude tolerance: the discarded norm is kept below tol², so
/// the eigenvalue residual of the truncated state is of order tol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSpec {
    pub alpha_mod: f64,
    pub phase: f64,
    pub delta: f64,
    pub trunc: usize,
    pub tol: f64,
    /// Set when `trunc` was chosen by hand and a larger tail is accepted.
    pub forced: bool,
}

impl CoherentSpec {
    /// Picks N from `policy` so the omitted norm is below `policy.tol()²`.
    pub fn new(alpha_mod: f64, phase: f64, delta: f64, policy: &TruncationPolicy) -> Result<Self> {
        if !(alpha_mod.is_finite() && alpha_mod >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "|α| = {alpha_mod} must be finite and nonnegative"
            )));
        }
        if !(phase.is_finite() && delta.is_finite()) {
            return Err(Error::InvalidConfig("phases must be finite".into()));
        }
        let norm_policy = TruncationPolicy::new(policy.tol() * policy.tol(), policy.hard_cap())?;
        let trunc = truncation_order(alpha_mod, &norm_policy)?;
        Ok(Self {
            alpha_mod,
            phase,
            delta,
            trunc,
            tol: policy.tol(),
            forced: false,
        })
    }

    /// Default policy, δ = 0.
    pub fn from_alpha(alpha_mod: f64, phase: f64) -> Result<Self> {
        Self::new(alpha_mod, phase, 0.0, &TruncationPolicy::default())
    }

    /// Builds the spec from a complex eigenvalue.
    pub fn from_complex(alpha: C64, delta: f64, policy: &TruncationPolicy) -> Result<Self> {
        Self::new(alpha.norm(), alpha.arg(), delta, policy)
    }

    /// Replaces N; the tail is still checked against tol².
    pub fn with_trunc(self, trunc: usize) -> Self {
        Self {
            trunc,
            forced: false,
            ..self
        }
    }

    /// Replaces N and accepts whatever tail it leaves.
    pub fn force_trunc(self, trunc: usize) -> Self {
        Self {
            trunc,
            forced: true,
            ..self
        }
    }

    pub fn alpha(&self) -> C64 {
        C64::from_polar(self.alpha_mod, self.phase)
    }

    /// α̃ = α e^{−iδ}.
    pub fn alpha_tilde(&self) -> C64 {
        C64::from_polar(self.alpha_mod, self.phase - self.delta)
    }

    /// Norm fraction beyond N for the untruncated state.
    pub fn tail(&self) -> f64 {
        let r = self.alpha_mod * self.alpha_mod;
        if r == 0.0 {
            return 0.0;
        }
        // 𝒩²·2·Σ_{n>N} rⁿ/n!  =  2 p_tail / (2 − e^{−r})
        2.0 * poisson_tail(r, self.trunc) / (2.0 - (-r).exp())
    }
}

/// 𝒩² = 1/(2e^{|α|²} − 1), written to stay accurate for small |α|.
pub fn norm_factor_sqr(alpha_mod: f64) -> f64 {
    (2.0 * (alpha_mod * alpha_mod).exp_m1() + 1.0).recip()
}

/// a_0 = 𝒩, a_n = 𝒩√2 α̃ⁿ/√(n!) for n ≤ N.
pub fn coherent_coefficients(spec: &CoherentSpec) -> Result<SpinorExpansion> {
    let tail = spec.tail();
    let bound = spec.tol * spec.tol;
    if !spec.forced && tail > bound {
        return Err(Error::TruncationInsufficient {
            trunc: spec.trunc,
            tail,
            tol: bound,
        });
    }
    Ok(SpinorExpansion::new(
        raw_coefficients(spec.alpha_tilde(), spec.trunc),
        spec.delta,
    ))
}

pub(crate) fn raw_coefficients(alpha_tilde: C64, trunc: usize) -> Vec<C64> {
    let norm = norm_factor_sqr(alpha_tilde.norm()).sqrt();
    let mut coeffs = Vec::with_capacity(trunc + 1);
    coeffs.push(C64::new(norm, 0.0));
    // c_n = α̃ⁿ/√(n!) built incrementally
    let mut c = C64::new(1.0, 0.0);
    for n in 1..=trunc {
        c = c * alpha_tilde / (n as f64).sqrt();
        coeffs.push(c * (norm * SQRT_2));
    }
    coeffs
}

/// ‖Θ⁻Φ_α − αΦ_α‖/‖Φ_α‖ in the coefficient inner product.
pub fn eigenvalue_residual(spec: &CoherentSpec) -> Result<f64> {
    let state = coherent_coefficients(spec)?;
    let lowered = big_theta_minus(&state);
    let diff = lowered.sub(&state.scale(spec.alpha()));
    Ok((diff.norm_sqr() / state.norm_sqr()).sqrt())
}

/// Sampled Φ_α and Ψ_α = 𝕄Φ_α.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentProfiles {
    pub phi: GridProfile<Spinor2>,
    pub psi: GridProfile<Spinor2>,
    /// Σ|a_n|² of the truncated coefficients.
    pub coeff_norm: f64,
    /// ∫Ψ_α†Ψ_α dx over the grid.
    pub grid_norm: f64,
    pub trunc: usize,
}

impl CoherentProfiles {
    /// Norm that the grid fails to capture; Ψ_n are L²-orthonormal so the
    /// full-line integral equals Σ|a_n|².
    pub fn lost_norm(&self) -> f64 {
        self.coeff_norm - self.grid_norm
    }
}

/// Φ_α(x) = Σ a_n Φ_n(x) at a single point.
pub fn phi_alpha_at(coeffs: &[C64], table: &HermiteTable, x: f64, cfg: &FieldConfig) -> Spinor2 {
    let pref = (1.0 - cfg.beta() * cfg.beta()).powf(0.125) / cfg.l_b().sqrt();
    let eta = cfg.eta();
    let mut acc = Spinor2::ZERO;
    for (n, a) in coeffs.iter().enumerate() {
        let (lo, hi) = table.pair(n, zeta(n, x, cfg));
        acc = acc + phi_from_pair(n, pref * lo, pref * hi, eta).scale(*a);
    }
    acc
}

/// Samples the state on `grid` and fails with [`Error::GridSupport`] when
/// more than [`GRID_SUPPORT_TOL`] of the norm lies outside it.
pub fn render_coherent(
    spec: &CoherentSpec,
    cfg: &FieldConfig,
    grid: &UniformGrid,
) -> Result<CoherentProfiles> {
    let out = render_coherent_lenient(spec, cfg, grid)?;
    let lost = out.lost_norm();
    if lost > GRID_SUPPORT_TOL {
        return Err(Error::GridSupport { lost });
    }
    Ok(out)
}

/// As [`render_coherent`] without the support check; callers inspect
/// [`CoherentProfiles::lost_norm`] themselves.
pub fn render_coherent_lenient(
    spec: &CoherentSpec,
    cfg: &FieldConfig,
    grid: &UniformGrid,
) -> Result<CoherentProfiles> {
    let state = coherent_coefficients(spec)?;
    let table = HermiteTable::new(spec.trunc);
    let xs = grid.nodes();
    let phi = GridProfile::sample(&xs, |x| phi_alpha_at(&state.coeffs, &table, x, cfg));
    let m = matrix_m(cfg.beta());
    let psi = phi.map(|s| m.apply(s));
    let grid_norm = integrate(&psi.map(|s| s.norm_sqr()), &grid.trapezoid())?;
    Ok(CoherentProfiles {
        phi,
        psi,
        coeff_norm: state.norm_sqr(),
        grid_norm,
        trunc: spec.trunc,
    })
}

/// Radial and angular resolution of the resolution-of-identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletenessQuadrature {
    pub radial_points: usize,
    pub angular_points: usize,
    /// Upper tail of the radial Gamma integrand that may be dropped.
    pub radial_tail: f64,
}

impl Default for CompletenessQuadrature {
    fn default() -> Self {
        Self {
            radial_points: 8001,
            angular_points: 32,
            radial_tail: 1e-10,
        }
    }
}

/// Smallest ρ with ∫_{ρ²}^∞ t^{k} e^{−t} dt / k! < tail, searched on a 0.01 step.
fn radial_cutoff(k: usize, tail: f64) -> f64 {
    let mut rho: f64 = 0.0;
    loop {
        rho += 0.01;
        // upper regularized Gamma Q(k+1, t) = e^{−t} Σ_{j≤k} t^j/j!
        let t = rho * rho;
        let mut term = (-t).exp();
        let mut q = term;
        for j in 1..=k {
            term *= t / j as f64;
            q += term;
        }
        if q < tail {
            return rho;
        }
    }
}

/// ½|Φ_0⟩⟨Φ_0| + ∫dμ(α)|Φ_α⟩⟨Φ_α| restricted to span{Φ_0, …, Φ_K}, with
/// dμ = (2e^{ρ²} − 1)/(2π) · ρe^{−ρ²} dρ dθ.
///
/// Trapezoid in ρ on [0, ρ_max] and the periodic trapezoid in θ. Entry [m][n]
/// is the coefficient of |Φ_m⟩⟨Φ_n|.
pub fn completeness_matrix(k: usize, quad: &CompletenessQuadrature) -> Vec<Vec<C64>> {
    let rho_max = radial_cutoff(k, quad.radial_tail);
    let rhos = linspace(0.0, rho_max, quad.radial_points);
    let h = rhos[1] - rhos[0];
    let dtheta = 2.0 * PI / quad.angular_points as f64;
    let mut acc = vec![vec![C64::new(0.0, 0.0); k + 1]; k + 1];
    for (i, &rho) in rhos.iter().enumerate() {
        let end_weight = if i == 0 || i + 1 == rhos.len() {
            0.5
        } else {
            1.0
        };
        // (2e^{ρ²} − 1)e^{−ρ²} without overflow
        let radial = (2.0 - (-rho * rho).exp()) * rho / (2.0 * PI) * h * end_weight;
        if radial == 0.0 {
            continue;
        }
        for j in 0..quad.angular_points {
            let alpha = C64::from_polar(rho, j as f64 * dtheta);
            let a = raw_coefficients(alpha, k);
            let w = radial * dtheta;
            for m in 0..=k {
                for n in 0..=k {
                    acc[m][n] += a[m] * a[n].conj() * w;
                }
            }
        }
    }
    acc[0][0] += 0.5;
    acc
}
