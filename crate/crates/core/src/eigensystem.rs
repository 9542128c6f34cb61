//! Dirac–Weyl spectrum and eigenspinors in crossed fields, the similarity
//! matrix 𝕄 and the auxiliary-matrix route used to cross-check them.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::numerics::{
    derivative, hermite_function, hermite_functions_into, ln_factorial, pcf_d, second_difference,
    UniformGrid, PI_POW_NEG_QUARTER,
};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Valley {
    #[default]
    K,
    KPrime,
}

impl Valley {
    pub fn eta(self) -> f64 {
        match self {
            Valley::K => 1.0,
            Valley::KPrime => -1.0,
        }
    }

    pub fn from_eta(eta: i32) -> Result<Self> {
        match eta {
            1 => Ok(Valley::K),
            -1 => Ok(Valley::KPrime),
            _ => Err(Error::InvalidConfig(format!(
                "valley sign must be ±1, got {eta}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Band {
    #[default]
    Conduction,
    Valence,
}

impl Band {
    /// sgn(n) with sgn(0) = 1 in both bands.
    fn sign(self, n: usize) -> f64 {
        match (self, n) {
            (_, 0) | (Band::Conduction, _) => 1.0,
            (Band::Valence, _) => -1.0,
        }
    }
}

/// Field strengths, momentum along y and valley, in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    b: f64,
    beta: f64,
    k: f64,
    valley: Valley,
}

impl FieldConfig {
    pub fn new(b: f64, beta: f64, k: f64, valley: Valley) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidConfig(format!("B = {b} must be positive")));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidConfig(format!("β = {beta} outside [0, 1)")));
        }
        if !k.is_finite() {
            return Err(Error::InvalidConfig("k must be finite".into()));
        }
        Ok(Self { b, beta, k, valley })
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.b, beta, self.k, self.valley)
    }

    pub fn with_k(self, k: f64) -> Result<Self> {
        Self::new(self.b, self.beta, k, self.valley)
    }

    pub fn with_valley(self, valley: Valley) -> Self {
        Self { valley, ..self }
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn valley(&self) -> Valley {
        self.valley
    }

    pub fn eta(&self) -> f64 {
        self.valley.eta()
    }

    pub fn l_b(&self) -> f64 {
        self.b.sqrt().recip()
    }

    pub fn omega_b(&self) -> f64 {
        2.0 * self.b
    }

    /// Drift velocity; equals β because v_F = 1.
    pub fn v_d(&self) -> f64 {
        self.beta
    }

    /// √(1−β²).
    pub fn gamma_inv(&self) -> f64 {
        (1.0 - self.beta * self.beta).sqrt()
    }

    /// Guiding-center coordinate ξ = (x + l_B²k)/l_B.
    pub fn xi(&self, x: f64) -> f64 {
        (x + self.k / self.b) * self.b.sqrt()
    }

    /// Point where ξ vanishes.
    pub fn x_center(&self) -> f64 {
        -self.k / self.b
    }
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            b: 0.5,
            beta: 0.0,
            k: 0.0,
            valley: Valley::K,
        }
    }
}

/// Conduction-band Landau level energy.
pub fn energy(n: usize, cfg: &FieldConfig) -> f64 {
    energy_in_band(n, Band::Conduction, cfg)
}

pub fn energy_in_band(n: usize, band: Band, cfg: &FieldConfig) -> f64 {
    let s = 1.0 - cfg.beta * cfg.beta;
    band.sign(n) * s.powf(0.75) * (2.0 * n as f64).sqrt() / cfg.l_b() - cfg.k * cfg.beta
}

/// Shifted coordinate ζ_n(x) for the conduction band.
pub fn zeta(n: usize, x: f64, cfg: &FieldConfig) -> f64 {
    zeta_in_band(n, Band::Conduction, x, cfg)
}

pub fn zeta_in_band(n: usize, band: Band, x: f64, cfg: &FieldConfig) -> f64 {
    let s4 = (1.0 - cfg.beta * cfg.beta).powf(0.25);
    s4 * cfg.xi(x) + band.sign(n) * cfg.beta * (2.0 * n as f64).sqrt()
}

/// Common prefactor (1−β²)^(1/8)/√l_B of every scalar wavefunction.
fn psi_prefactor(cfg: &FieldConfig) -> f64 {
    (1.0 - cfg.beta * cfg.beta).powf(0.125) / cfg.l_b().sqrt()
}

/// ψ_ℓ(ζ_m): level ℓ evaluated on the coordinate centered for level m.
pub fn psi_level(level: usize, center: usize, x: f64, cfg: &FieldConfig) -> f64 {
    psi_prefactor(cfg) * hermite_function(level, zeta(center, x, cfg))
}

/// ψ_n(ζ_n) through the parabolic cylinder function, as the closed form is
/// written. Agrees with `psi_level(n, n, ..)` to rounding.
pub fn psi_scalar(n: usize, x: f64, cfg: &FieldConfig) -> f64 {
    let omega = cfg.omega_b();
    let pref = (1.0 - cfg.beta * cfg.beta).powf(0.125)
        * (-0.5 * ln_factorial(n)).exp()
        * (omega / (2.0 * std::f64::consts::PI)).powf(0.25);
    pref * pcf_d(n, std::f64::consts::SQRT_2 * zeta(n, x, cfg))
}

/// ψ_0(ζ_m), …, ψ_{n_max}(ζ_m) at one point.
pub fn psi_levels_at(n_max: usize, center: usize, x: f64, cfg: &FieldConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    hermite_functions_into(n_max, zeta(center, x, cfg), &mut out);
    let p = psi_prefactor(cfg);
    out.iter_mut().for_each(|v| *v *= p);
    out
}

/// (ψ_{n−1}(ζ_n), ψ_n(ζ_n)) with ψ_{−1} ≡ 0; one recurrence pass.
pub fn psi_pair(n: usize, x: f64, cfg: &FieldConfig) -> (f64, f64) {
    let z = zeta(n, x, cfg);
    let p = psi_prefactor(cfg);
    let mut prev = 0.0;
    let mut cur = PI_POW_NEG_QUARTER * (-0.5 * z * z).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = z * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (p * prev, p * cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor2 {
    pub up: C64,
    pub down: C64,
}

impl Spinor2 {
    pub const ZERO: Self = Self {
        up: C64 { re: 0.0, im: 0.0 },
        down: C64 { re: 0.0, im: 0.0 },
    };

    pub fn new(up: C64, down: C64) -> Self {
        Self { up, down }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn dot(&self, other: &Spinor2) -> C64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn sigma_x(&self) -> Self {
        Self::new(self.down, self.up)
    }

    pub fn sigma_y(&self) -> Self {
        Self::new(-I * self.down, I * self.up)
    }

    /// self† σ_x self.
    pub fn sigma_x_expect(&self) -> f64 {
        2.0 * (self.up.conj() * self.down).re
    }

    /// self† σ_y self.
    pub fn sigma_y_expect(&self) -> f64 {
        2.0 * (self.up.conj() * self.down).im
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.up * c, self.down * c)
    }

    pub fn max_abs_diff(&self, other: &Spinor2) -> f64 {
        (self.up - other.up)
            .norm()
            .max((self.down - other.down).norm())
    }
}

impl Add for Spinor2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.up + o.up, self.down + o.down)
    }
}

impl Sub for Spinor2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.up - o.up, self.down - o.down)
    }
}

impl Mul<f64> for Spinor2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.up * s, self.down * s)
    }
}

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub fn identity() -> Self {
        Self::diag(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), d)
    }

    pub fn sigma_x() -> Self {
        let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self::new(z, o, o, z)
    }

    pub fn sigma_y() -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new(z, -I, I, z)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, s: &Spinor2) -> Spinor2 {
        let m = &self.m;
        Spinor2::new(
            m[0][0] * s.up + m[0][1] * s.down,
            m[1][0] * s.up + m[1][1] * s.down,
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * c, m[0][1] * c, m[1][0] * c, m[1][1] * c)
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }
}

impl Mul for Mat2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

impl Add for Mat2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(C64::new(-1.0, 0.0))
    }
}

/// (C₊, C₋) = 1 ± √(1−β²).
pub fn c_pm(beta: f64) -> (f64, f64) {
    let g = (1.0 - beta * beta).sqrt();
    (1.0 + g, 1.0 - g)
}

/// 𝕄 = (√C₊ I − √C₋ σ_y)/√2.
pub fn matrix_m(beta: f64) -> Mat2 {
    debug_assert!((0.0..1.0).contains(&beta));
    let (cp, cm) = c_pm(beta);
    let a = C64::new((cp / 2.0).sqrt(), 0.0);
    let b = C64::new((cm / 2.0).sqrt(), 0.0);
    Mat2::identity().scale(a) - Mat2::sigma_y().scale(b)
}

/// Eigenvalues μ₁ ≤ μ₂ of 𝕄.
pub fn m_eigenvalues(beta: f64) -> (f64, f64) {
    let (cp, cm) = c_pm(beta);
    let (sp, sm) = (cp.sqrt(), cm.sqrt());
    (
        (sp - sm) / std::f64::consts::SQRT_2,
        (sp + sm) / std::f64::consts::SQRT_2,
    )
}

/// U(τ) = exp(iτσ_x).
pub fn rotation_u(tau: f64) -> Mat2 {
    let (s, c) = tau.sin_cos();
    Mat2::new(C64::new(c, 0.0), I * s, I * s, C64::new(c, 0.0))
}

/// 𝕄 rebuilt from its eigen-decomposition U(π/4)·diag(μ₁, μ₂)·U(π/4)⁻¹.
pub fn matrix_m_spectral(beta: f64) -> Mat2 {
    let (mu1, mu2) = m_eigenvalues(beta);
    let u = rotation_u(std::f64::consts::FRAC_PI_4);
    u * Mat2::diag(C64::new(mu1, 0.0), C64::new(mu2, 0.0)) * u.adjoint()
}

/// Auxiliary spinor Φ_n(x) with the plane wave in y factored out.
pub fn phi_n(n: usize, x: f64, cfg: &FieldConfig) -> Spinor2 {
    let (lower_level, level) = psi_pair(n, x, cfg);
    phi_from_pair(n, lower_level, level, cfg.eta())
}

pub(crate) fn phi_from_pair(n: usize, psi_nm1: f64, psi_n: f64, eta: f64) -> Spinor2 {
    if n == 0 {
        Spinor2::new(C64::new(0.0, 0.0), C64::new(0.0, eta * psi_n))
    } else {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        Spinor2::new(C64::new(w * psi_nm1, 0.0), C64::new(0.0, w * eta * psi_n))
    }
}

/// Physical eigenspinor Ψ_n = 𝕄Φ_n.
pub fn psi_spinor(n: usize, x: f64, cfg: &FieldConfig) -> Spinor2 {
    matrix_m(cfg.beta).apply(&phi_n(n, x, cfg))
}

/// ∂E_n/∂k, the same for every level.
pub fn mean_velocity_eigen(cfg: &FieldConfig) -> f64 {
    -cfg.beta
}

/// Eigen-decomposition of the auxiliary matrix 𝕂 = i(βσ_x + σ_xσ_y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMatrixEigen {
    pub k: Mat2,
    /// λ_k = (−1)^k √(1−β²), k = 1, 2.
    pub lambda: [f64; 2],
    pub chi: [Spinor2; 2],
}

pub fn k_matrix_eigensystem(beta: f64) -> KMatrixEigen {
    let k =
        (Mat2::sigma_x().scale(C64::new(beta, 0.0)) + Mat2::sigma_x() * Mat2::sigma_y()).scale(I);
    let g = (1.0 - beta * beta).sqrt();
    let (cp, cm) = c_pm(beta);
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let chi1 = Spinor2::new(C64::new(w * cp.sqrt(), 0.0), C64::new(0.0, -w * cm.sqrt()));
    let chi2 = Spinor2::new(C64::new(-w * cm.sqrt(), 0.0), C64::new(0.0, w * cp.sqrt()));
    KMatrixEigen {
        k,
        lambda: [-g, g],
        chi: [chi1, chi2],
    }
}

/// Residual of the Weber equation
/// ψ'' − ζ²ψ + [ε₀²l_B²/(1−β²)^{3/2} + λ_k/√(1−β²)]ψ = 0 at one ζ, where ε₀
/// comes from the closed-form energy of level `n` and ψ is the scalar factor
/// paired with χ_{λ_k} (level n−1 for k = 1, level n for k = 2).
/// The second derivative is a five-point difference with step `h`.
pub fn weber_residual(n: usize, k_index: usize, z: f64, cfg: &FieldConfig, h: f64) -> Result<f64> {
    let level = match (k_index, n) {
        (1, 0) => return Err(Error::InvalidConfig("level 0 has no λ₁ partner".into())),
        (1, _) => n - 1,
        (2, _) => n,
        _ => {
            return Err(Error::InvalidConfig(format!(
                "𝕂 eigenvalue index {k_index} not in {{1, 2}}"
            )))
        }
    };
    let s = 1.0 - cfg.beta * cfg.beta;
    let eps0 = energy(n, cfg) + cfg.k * cfg.beta;
    let lam = k_matrix_eigensystem(cfg.beta).lambda[k_index - 1];
    let constant = eps0 * eps0 * cfg.l_b() * cfg.l_b() / s.powf(1.5) + lam / s.sqrt();
    let f = |t: f64| hermite_function(level, t);
    Ok((second_difference(f, z, h) - z * z * f(z) + constant * f(z)).abs())
}

/// Max-norm residual of the first-order Dirac–Weyl operator applied to Ψ_n on
/// a grid, relative to max|Ψ_n|. The derivative is a fourth-order difference;
/// the two outermost points on each side are skipped.
pub fn hamiltonian_residual(n: usize, cfg: &FieldConfig, grid: &UniformGrid) -> f64 {
    let xs = grid.nodes();
    let psi: Vec<Spinor2> = xs.iter().map(|&x| psi_spinor(n, x, cfg)).collect();
    let d = derivative(&psi, grid.spacing());
    let e = energy(n, cfg);
    let l_b = cfg.l_b();
    let scale = psi
        .iter()
        .map(|s| s.up.norm().max(s.down.norm()))
        .fold(0.0, f64::max);
    let mut worst = 0.0_f64;
    for i in 2..xs.len() - 2 {
        let xi = cfg.xi(xs[i]);
        let diag = e + cfg.k * cfg.beta - cfg.beta * xi / l_b;
        let r = psi[i] * diag + d[i].sigma_x().scale(I) - psi[i].sigma_y() * (xi / l_b);
        worst = worst.max(r.up.norm().max(r.down.norm()));
    }
    worst / scale
}

/// Grid that holds every level up to `n_hi` with at least twelve Gaussian
/// widths of margin past the outermost classical turning point.
pub fn default_grid(n_hi: usize, cfg: &FieldConfig) -> UniformGrid {
    let s4 = (1.0 - cfg.beta * cfg.beta).powf(-0.25);
    let width = cfg.l_b() * s4;
    let center = |n: usize| cfg.x_center() - cfg.beta * width * (2.0 * n as f64).sqrt();
    let margin = width * (12.0 + (2.0 * n_hi as f64 + 1.0).sqrt());
    let (x_min, x_max) = (center(n_hi) - margin, center(0) + margin);
    let span = x_max - x_min;
    let points = ((span / (0.02 * width)).ceil() as usize + 1).max(4001);
    UniformGrid::new(x_min, x_max, points).expect("default grid bounds are ordered")
}
