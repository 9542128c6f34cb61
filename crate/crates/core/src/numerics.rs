//! Special functions and quadrature primitives shared by the physics modules.

use std::f64::consts::{PI, SQRT_2};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// π^(-1/4), the value of h_0 at the origin.
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Normalized Hermite functions h_0, …, h_{n_max} at `z`.
///
/// Uses h_{n+1} = z·√(2/(n+1))·h_n − √(n/(n+1))·h_{n−1}, which never forms the
/// raw polynomial H_n or a factorial. For |z| ≳ 38 the Gaussian factor
/// underflows and every entry is returned as zero.
pub fn hermite_functions(n_max: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    hermite_functions_into(n_max, z, &mut out);
    out
}

/// Allocation-free form of [`hermite_functions`]; `out` is cleared first.
pub fn hermite_functions_into(n_max: usize, z: f64, out: &mut Vec<f64>) {
    debug_assert!(z.is_finite(), "hermite argument must be finite");
    out.clear();
    let h0 = PI_POW_NEG_QUARTER * (-0.5 * z * z).exp();
    out.push(h0);
    if n_max == 0 {
        return;
    }
    out.push(SQRT_2 * z * h0);
    for n in 1..n_max {
        let nf = n as f64;
        let next = z * (2.0 / (nf + 1.0)).sqrt() * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
}

/// Normalized Hermite function h_n(z) = (2ⁿ n! √π)^(−1/2) e^(−z²/2) H_n(z).
pub fn hermite_function(n: usize, z: f64) -> f64 {
    debug_assert!(z.is_finite(), "hermite argument must be finite");
    let mut prev = PI_POW_NEG_QUARTER * (-0.5 * z * z).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = SQRT_2 * z * prev;
    for k in 1..n {
        let kf = k as f64;
        let next = z * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Recurrence coefficients √(2/(k+1)) and √(k/(k+1)) for k < n_max, so hot
/// loops evaluating many orders at many points skip the square roots.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HermiteTable {
    pub fn new(n_max: usize) -> Self {
        let a = (0..n_max)
            .map(|k| (2.0 / (k as f64 + 1.0)).sqrt())
            .collect();
        let b = (0..n_max)
            .map(|k| (k as f64 / (k as f64 + 1.0)).sqrt())
            .collect();
        Self { a, b }
    }

    pub fn n_max(&self) -> usize {
        self.a.len()
    }

    /// (h_{n−1}(z), h_n(z)) with h_{−1} ≡ 0. Panics if n exceeds the table.
    pub fn pair(&self, n: usize, z: f64) -> (f64, f64) {
        assert!(
            n <= self.a.len(),
            "order {n} beyond table size {}",
            self.a.len()
        );
        let mut prev = 0.0;
        let mut cur = PI_POW_NEG_QUARTER * (-0.5 * z * z).exp();
        for k in 0..n {
            let next = z * self.a[k] * cur - self.b[k] * prev;
            prev = cur;
            cur = next;
        }
        (prev, cur)
    }
}

/// ln(n!) by direct summation; exact enough for the orders used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Parabolic cylinder function D_n(z) for nonnegative integer order.
///
/// D_n(z) = 2^(−n/2) e^(−z²/4) H_n(z/√2) = √(n!)·π^(1/4)·h_n(z/√2).
pub fn pcf_d(n: usize, z: f64) -> f64 {
    let scale = (0.5 * ln_factorial(n)).exp() / PI_POW_NEG_QUARTER;
    scale * hermite_function(n, z / SQRT_2)
}

/// Tail control for the infinite series over Landau levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    tol: f64,
    hard_cap: usize,
}

impl TruncationPolicy {
    pub fn new(tol: f64, hard_cap: usize) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {tol} outside (0, 1)"
            )));
        }
        if hard_cap == 0 {
            return Err(Error::InvalidConfig("hard cap must be at least 1".into()));
        }
        Ok(Self { tol, hard_cap })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn hard_cap(&self) -> usize {
        self.hard_cap
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            hard_cap: 200,
        }
    }
}

/// Poisson weights p_n = rⁿ e^(−r)/n! for n = 0..=n_max, evaluated in log space.
pub fn poisson_weights(r: f64, n_max: usize) -> Vec<f64> {
    if r == 0.0 {
        let mut w = vec![0.0; n_max + 1];
        w[0] = 1.0;
        return w;
    }
    let ln_r = r.ln();
    let mut ln_fact = 0.0;
    (0..=n_max)
        .map(|n| {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            (n as f64 * ln_r - r - ln_fact).exp()
        })
        .collect()
}

/// Discarded weight Σ_{n>N} rⁿ/n! relative to e^r, summed from the far end so
/// no cancellation occurs.
pub fn poisson_tail(r: f64, n: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let end = poisson_horizon(r, n);
    let w = poisson_weights(r, end);
    w[n + 1..].iter().rev().sum()
}

fn poisson_horizon(r: f64, n: usize) -> usize {
    // beyond ~r + 40√r + 60 the weights are below 1e-300
    let far = (r + 40.0 * r.sqrt() + 60.0).ceil() as usize;
    far.max(n + 2)
}

/// Smallest N with Σ_{n>N} |α|^{2n}/n! < tol·e^{|α|²}.
///
/// Fails with [`Error::CapExceeded`] when the policy's hard cap is reached
/// before the tail bound holds.
pub fn truncation_order(alpha_mod: f64, policy: &TruncationPolicy) -> Result<usize> {
    if !(alpha_mod >= 0.0 && alpha_mod.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "|α| = {alpha_mod} must be finite and nonnegative"
        )));
    }
    if alpha_mod == 0.0 {
        return Ok(0);
    }
    let r = alpha_mod * alpha_mod;
    let end = poisson_horizon(r, policy.hard_cap);
    let w = poisson_weights(r, end);
    // suffix[n] = Σ_{m≥n} w_m
    let mut suffix = vec![0.0; end + 2];
    for n in (0..=end).rev() {
        suffix[n] = suffix[n + 1] + w[n];
    }
    (0..=policy.hard_cap)
        .find(|&n| suffix[n + 1] < policy.tol)
        .ok_or(Error::CapExceeded {
            cap: policy.hard_cap,
            tail: suffix[policy.hard_cap + 1],
            tol: policy.tol,
        })
}

/// Evenly spaced real-axis grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl UniformGrid {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidConfig(format!(
                "grid bounds [{x_min}, {x_max}] are not increasing"
            )));
        }
        if points < 3 {
            return Err(Error::InvalidConfig("grid needs at least 3 points".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            points,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points)
            .map(|i| self.x_min + h * i as f64)
            .collect()
    }

    pub fn trapezoid(&self) -> QuadratureRule {
        QuadratureRule::trapezoid(&self.nodes()).expect("uniform grid nodes are increasing")
    }
}

/// A function sampled on real abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile<T> {
    pub x: Vec<f64>,
    pub values: Vec<T>,
}

impl<T> GridProfile<T> {
    pub fn sample(x: &[f64], f: impl FnMut(f64) -> T) -> Self {
        Self {
            x: x.to_vec(),
            values: x.iter().copied().map(f).collect(),
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> GridProfile<U> {
        GridProfile {
            x: self.x.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

impl GridProfile<f64> {
    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Abscissa of the largest sample.
    pub fn argmax(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        self.x[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Composite trapezoid rule on the stored nodes.
    Trapezoid,
    /// Gauss–Hermite rule for ∫ e^(−x²) f(x) dx; samples are f, not e^(−x²)f.
    GaussHermite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: QuadratureKind,
}

impl QuadratureRule {
    pub fn trapezoid(nodes: &[f64]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidConfig(
                "trapezoid rule needs at least 2 nodes".into(),
            ));
        }
        // also rejects NaN nodes
        if nodes
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidConfig(
                "quadrature nodes must be strictly increasing".into(),
            ));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += half;
            weights[i + 1] += half;
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            weights,
            kind: QuadratureKind::Trapezoid,
        })
    }

    /// n-point Gauss–Hermite rule. Nodes are the zeros of h_n found by Newton
    /// iteration; weights follow from the Christoffel sum
    /// λ_i = e^(−x_i²) / Σ_{k<n} h_k(x_i)².
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "Gauss–Hermite rule needs at least one node".into(),
            ));
        }
        let nf = n as f64;
        let m = n.div_ceil(2);
        let mut roots = Vec::with_capacity(n);
        let mut z = 0.0;
        let mut buf = Vec::with_capacity(n + 1);
        for i in 0..m {
            // initial guesses for the largest roots first
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * roots[0],
                3 => 1.91 * z - 0.91 * roots[1],
                _ => 2.0 * z - roots[i - 2],
            };
            for _ in 0..100 {
                hermite_functions_into(n, z, &mut buf);
                // derivative of the orthonormal polynomial p_n = h_n e^{z²/2}
                let step = buf[n] / ((2.0 * nf).sqrt() * buf[n - 1]);
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            roots.push(z);
        }
        if n % 2 == 1 {
            roots[m - 1] = 0.0;
        }
        let mut nodes: Vec<f64> = roots.iter().map(|r| -r).collect();
        nodes.extend(roots.iter().take(n / 2));
        nodes.sort_by(f64::total_cmp);
        let weights = nodes
            .iter()
            .map(|&x| {
                hermite_functions_into(n - 1, x, &mut buf);
                let s: f64 = buf.iter().map(|h| h * h).sum();
                (-x * x).exp() / s
            })
            .collect();
        Ok(Self {
            nodes,
            weights,
            kind: QuadratureKind::GaussHermite,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }
}

/// Σ wᵢ f(xᵢ) over a profile sampled on the rule's own nodes.
pub fn integrate(profile: &GridProfile<f64>, rule: &QuadratureRule) -> Result<f64> {
    if profile.x.len() != rule.nodes.len() || profile.values.len() != profile.x.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples against {} nodes",
            profile.values.len(),
            rule.nodes.len()
        )));
    }
    let scale = rule.nodes.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    if let Some(i) = profile
        .x
        .iter()
        .zip(&rule.nodes)
        .position(|(a, b)| (a - b).abs() > 1e-12 * scale)
    {
        return Err(Error::GridMismatch(format!(
            "abscissa {} differs from node {}",
            profile.x[i], rule.nodes[i]
        )));
    }
    Ok(rule
        .weights
        .iter()
        .zip(&profile.values)
        .map(|(w, f)| w * f)
        .sum())
}

/// First derivative on a uniform grid: five-point central stencil inside,
/// second-order one-sided stencils at the two outermost points on each side.
pub fn derivative<T>(values: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    assert!(n >= 5, "derivative stencil needs at least 5 samples");
    let f = values;
    let mut out = Vec::with_capacity(n);
    let one_sided_lo = |i: usize| (f[i + 1] * 4.0 - f[i] * 3.0 - f[i + 2]) * (0.5 / h);
    let one_sided_hi = |i: usize| (f[i] * 3.0 - f[i - 1] * 4.0 + f[i - 2]) * (0.5 / h);
    out.push(one_sided_lo(0));
    out.push((f[2] - f[0]) * (0.5 / h));
    for i in 2..n - 2 {
        out.push((f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * (1.0 / (12.0 * h)));
    }
    out.push((f[n - 1] - f[n - 3]) * (0.5 / h));
    out.push(one_sided_hi(n - 1));
    out
}

/// Central second difference at a single point.
pub fn second_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

/// Evenly spaced values a, …, b (inclusive) with `n` entries; n = 1 gives `a`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[allow(dead_code)]
pub(crate) fn gaussian_integral() -> f64 {
    PI.sqrt()
}
