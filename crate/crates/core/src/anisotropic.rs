//! Heat kernel and stationary-phase data on non-isotropic Heisenberg groups.
//!
//! The first layer splits into blocks `P_j` on which the symplectic form has
//! weight `alpha_j`; every formula depends on `x` only through the block
//! norms `|P_j(x)|`, so points are stored as those norms plus `|z|`. In this
//! module `R = sum_j alpha_j |P_j(x)|^2`, which for a single unit block is
//! `|x|^2` (four times the isotropic `R` of [`crate::geometry`]).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fit::{least_squares, LinearFit};
use crate::heatkernel::{KernelEval, Method};
use crate::quadrature::{integrate, QuadOptions};
use crate::specialfn::{
    bracketed_newton, theta_complement, theta_prime_complement, theta_prime_unchecked, theta_unchecked, y_cot,
};

/// Block weights `0 < alpha_1 < ... < alpha_k` and multiplicities `n_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisoSpec {
    alphas: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl AnisoSpec {
    pub fn new(alphas: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        if alphas.is_empty() || alphas.len() != multiplicities.len() {
            return Err(invalid("alphas", "need one multiplicity per weight and k >= 1"));
        }
        if !alphas.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(invalid("alphas", "weights must be finite and positive"));
        }
        if alphas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("alphas", "weights must be strictly increasing"));
        }
        if multiplicities.contains(&0) {
            return Err(invalid("multiplicities", "must be >= 1"));
        }
        Ok(Self { alphas, multiplicities })
    }

    /// The isotropic `H^n`: one block of weight 1.
    pub fn isotropic(n: usize) -> Result<Self> {
        Self::new(vec![1.0], vec![n])
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    /// `n = sum_j n_j`; the group has dimension `2n + 1`.
    pub fn n(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    fn alpha_max(&self) -> f64 {
        self.alphas[self.alphas.len() - 1]
    }

    /// First pole `pi / alpha_k` of the shifted integrand.
    pub fn pole(&self) -> f64 {
        PI / self.alpha_max()
    }
}

/// A point given by its block norms `|P_j(x)|` and central coordinate `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisoPoint {
    pub block_norms: Vec<f64>,
    pub z: f64,
}

impl AnisoPoint {
    pub fn new(block_norms: Vec<f64>, z: f64) -> Result<Self> {
        if !block_norms.iter().all(|b| b.is_finite() && *b >= 0.0) {
            return Err(invalid("block_norms", "must be finite and >= 0"));
        }
        if !z.is_finite() {
            return Err(invalid("z", "must be finite"));
        }
        Ok(Self { block_norms, z })
    }

    fn check(&self, spec: &AnisoSpec) -> Result<()> {
        if self.block_norms.len() != spec.k() {
            return Err(invalid(
                "block_norms",
                format!("expected {} block norms, got {}", spec.k(), self.block_norms.len()),
            ));
        }
        Ok(())
    }

    /// `R = sum_j alpha_j |P_j(x)|^2`.
    pub fn r(&self, spec: &AnisoSpec) -> f64 {
        self.block_norms
            .iter()
            .zip(&spec.alphas)
            .map(|(b, a)| a * b * b)
            .sum()
    }

    /// `|x|^2 = sum_j |P_j(x)|^2`.
    pub fn x_norm_sq(&self) -> f64 {
        self.block_norms.iter().map(|b| b * b).sum()
    }

    /// The dilate `(lambda x, lambda^2 z)`.
    pub fn dilated(&self, lambda: f64) -> Self {
        Self {
            block_norms: self.block_norms.iter().map(|b| lambda * b).collect(),
            z: lambda * lambda * self.z,
        }
    }

    /// `max(|z| / R, R / |P_k(x)|^2)`: the smallest `C` for which the point
    /// lies in the admissible zone of the expansion.
    pub fn zone_constant(&self, spec: &AnisoSpec) -> f64 {
        let r = self.r(spec);
        let pk = self.block_norms[spec.k() - 1];
        (self.z.abs() / r).max(r / (pk * pk))
    }
}

/// Stationary point `y` stored together with its distance `eps` to the pole
/// `pi / alpha_k`, which carries the relative accuracy near the pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnisoRoot {
    pub y: f64,
    pub eps: f64,
}

/// Sum over blocks of `c_j * h(alpha_j y)`, with the top block evaluated
/// from `eps` through `top(alpha_k eps)` when `y > pi / (2 alpha_k)`.
fn block_sum(
    pt: &AnisoPoint,
    spec: &AnisoSpec,
    root: AnisoRoot,
    weight: impl Fn(f64, f64) -> f64,
    near: impl Fn(f64) -> f64,
    top: impl Fn(f64) -> f64,
) -> f64 {
    let k = spec.k();
    let use_eps = root.y * spec.alpha_max() > FRAC_PI_2;
    let mut total = 0.0;
    for j in 0..k {
        let (a, b) = (spec.alphas[j], pt.block_norms[j]);
        let w = weight(a, b);
        if w == 0.0 {
            continue;
        }
        let v = if j == k - 1 && use_eps { top(a * root.eps) } else { near(a * root.y) };
        total += w * v;
    }
    total
}

/// Solve `sum_j alpha_j |P_j(x)|^2 theta(alpha_j y) = 4 |z|` on
/// `[0, pi / alpha_k)`.
pub fn aniso_root(pt: &AnisoPoint, spec: &AnisoSpec) -> Result<AnisoRoot> {
    pt.check(spec)?;
    if pt.block_norms[spec.k() - 1] == 0.0 {
        return Err(Error::DegenerateBlock);
    }
    let pole = spec.pole();
    let target = 4.0 * pt.z.abs();
    if target == 0.0 {
        return Ok(AnisoRoot { y: 0.0, eps: pole });
    }
    let theta_sum = |y: f64| -> (f64, f64) {
        let mut f = 0.0;
        let mut df = 0.0;
        for (a, b) in spec.alphas.iter().zip(&pt.block_norms) {
            let c = a * b * b;
            f += c * theta_unchecked(a * y);
            df += c * a * theta_prime_unchecked(a * y);
        }
        (f - target, df)
    };
    let half = 0.5 * pole;
    if theta_sum(half).0 >= 0.0 {
        let y = bracketed_newton(theta_sum, 0.0, half, target.min(half));
        return Ok(AnisoRoot { y, eps: pole - y });
    }
    // near the pole: solve in eps = pi / alpha_k - y, where the top block is
    // evaluated from its complement
    let k = spec.k();
    let ak = spec.alpha_max();
    let ck = ak * pt.block_norms[k - 1].powi(2);
    let in_eps = |e: f64| -> (f64, f64) {
        let y = pole - e;
        let mut f = ck * theta_complement(ak * e);
        let mut df = ck * ak * theta_prime_complement(ak * e);
        for j in 0..k - 1 {
            let (a, b) = (spec.alphas[j], pt.block_norms[j]);
            f += a * b * b * theta_unchecked(a * y);
            df += a * a * b * b * theta_prime_unchecked(a * y);
        }
        // increasing in eps
        (target - f, df)
    };
    // theta(pi - u) ~ pi / u^2 bounds the root from below
    let mut lo = (ck * PI / target).sqrt() / ak * 0.25;
    while in_eps(lo).0 > 0.0 {
        lo *= 0.25;
    }
    let eps = bracketed_newton(in_eps, lo, half, 2.0 * lo);
    Ok(AnisoRoot { y: pole - eps, eps })
}

/// The stationary point `y_{(x,z)}` in `[0, pi / alpha_k)`.
pub fn aniso_y(pt: &AnisoPoint, spec: &AnisoSpec) -> Result<f64> {
    Ok(aniso_root(pt, spec)?.y)
}

/// `sum_j alpha_j |P_j(x)|^2 theta(alpha_j y) - 4 |z|` at the computed root.
pub fn aniso_y_residual(pt: &AnisoPoint, spec: &AnisoSpec) -> Result<f64> {
    let root = aniso_root(pt, spec)?;
    let s = block_sum(
        pt,
        spec,
        root,
        |a, b| a * b * b,
        theta_unchecked,
        |u| theta_complement(u),
    );
    Ok(s - 4.0 * pt.z.abs())
}

/// `d^2 / 4 = |z| y + sum_j (alpha_j |P_j(x)|^2 / 4) y cot(alpha_j y)`.
fn d2_quarter(pt: &AnisoPoint, spec: &AnisoSpec, root: AnisoRoot) -> f64 {
    // alpha_j y cot(alpha_j y) carries the factor y / alpha_j y
    let cot_part = block_sum(
        pt,
        spec,
        root,
        |_, b| 0.25 * b * b,
        y_cot,
        // (pi - u) cot(pi - u) = -(pi - u) cos u / sin u
        |u| -(PI - u) * u.cos() / u.sin(),
    );
    pt.z.abs() * root.y + cot_part
}

/// Sub-Riemannian distance `d(x, z)`.
pub fn aniso_distance(pt: &AnisoPoint, spec: &AnisoSpec) -> Result<f64> {
    let root = aniso_root(pt, spec)?;
    Ok((4.0 * d2_quarter(pt, spec, root)).sqrt())
}

/// Amplitude `Psi = sqrt(sum_j alpha_j^2 |P_j(x)|^2 (sin u - u cos u) / (4 sin^3 u))`
/// with `u = alpha_j y`.
pub fn aniso_psi(pt: &AnisoPoint, spec: &AnisoSpec) -> Result<f64> {
    let root = aniso_root(pt, spec)?;
    Ok(psi_at(pt, spec, root))
}

fn psi_at(pt: &AnisoPoint, spec: &AnisoSpec, root: AnisoRoot) -> f64 {
    // (sin u - u cos u) / (4 sin^3 u) = theta'(u) / 8
    block_sum(
        pt,
        spec,
        root,
        |a, b| a * a * b * b / 8.0,
        theta_prime_unchecked,
        theta_prime_complement,
    )
    .sqrt()
}

// ---------------------------------------------------------------------------
// complex line integrals

/// `u coth u`, even and analytic at the origin.
fn u_coth(u: Complex64) -> Complex64 {
    let u = if u.re < 0.0 { -u } else { u };
    if u.norm() < 0.02 {
        let u2 = u * u;
        return 1.0 + u2 * (1.0 / 3.0 + u2 * (-1.0 / 45.0 + u2 * (2.0 / 945.0 - u2 / 4725.0)));
    }
    let e = (-2.0 * u).exp();
    u * (1.0 + e) / (1.0 - e)
}

/// A logarithm of `u / sinh u` (any branch; only integer multiples are
/// exponentiated).
fn ln_u_over_sinh(u: Complex64) -> Complex64 {
    let u = if u.re < 0.0 { -u } else { u };
    if u.norm() < 0.02 {
        let u2 = u * u;
        return u2 * (-1.0 / 6.0 + u2 * (1.0 / 180.0 + u2 * (-1.0 / 2835.0 + u2 / 37800.0)));
    }
    // sinh u = e^u (1 - e^{-2u}) / 2
    u.ln() - u - (1.0 - (-2.0 * u).exp()).ln() + std::f64::consts::LN_2
}

/// `i z w - sum_j (|P_j|^2 / 4) (alpha_j w) coth(alpha_j w)`, the exponent of
/// the time-one integrand at the complex frequency `w`.
fn phase(pt: &AnisoPoint, spec: &AnisoSpec, w: Complex64) -> Complex64 {
    let mut out = Complex64::new(0.0, pt.z) * w;
    for (a, b) in spec.alphas.iter().zip(&pt.block_norms) {
        if *b > 0.0 {
            out -= 0.25 * b * b * u_coth(a * w);
        }
    }
    out
}

fn ln_amplitude(spec: &AnisoSpec, w: Complex64) -> Complex64 {
    spec.alphas
        .iter()
        .zip(&spec.multiplicities)
        .map(|(a, n)| *n as f64 * ln_u_over_sinh(a * w))
        .sum()
}

/// `int_R exp(phase(s + i y) + scale) a(s + i y) ds` with
/// `scale = -phase(i y)`, so the represented integral is `J e^{-scale}`.
struct LineIntegral {
    value: Complex64,
    error: f64,
    scale: f64,
}

fn line_integral(pt: &AnisoPoint, spec: &AnisoSpec, y: f64, quad: &QuadOptions) -> Result<LineIntegral> {
    // the kernel is even in z; shifting upwards matches z >= 0
    let pt = &AnisoPoint {
        block_norms: pt.block_norms.clone(),
        z: pt.z.abs(),
    };
    let iy = Complex64::new(0.0, y);
    let scale = -phase(pt, spec, iy).re;
    let log_integrand = |s: f64| -> Complex64 {
        let w = Complex64::new(s, y);
        phase(pt, spec, w) + scale + ln_amplitude(spec, w)
    };
    let head = log_integrand(0.0).re;

    // Gaussian width of the integrand at the saddle, then a march to where
    // the envelope has dropped by e^{-45}
    let r = pt.r(spec).max(1e-300);
    let width = if y > 0.0 {
        let root = AnisoRoot { y, eps: spec.pole() - y };
        1.0 / psi_at(pt, spec, root).max(1e-3)
    } else {
        1.0 / (0.5 * r).sqrt().max(1e-3)
    };
    let w0 = width.min(0.5);
    let mut s_max = w0;
    while log_integrand(s_max).re > head - 45.0 {
        s_max *= 2.0;
        if s_max > 1e6 {
            return Err(Error::NonFinite("line integrand does not decay".into()));
        }
    }
    let spacing = (PI / (pt.z.abs() + 1.0)).min(1.0);
    let mut breaks = vec![0.0];
    let mut b = w0 / 8.0;
    while b < w0.min(s_max) {
        breaks.push(b);
        b *= 2.0;
    }
    let mut b = w0.min(s_max);
    while b < s_max {
        breaks.push(b);
        b += spacing;
    }
    breaks.push(s_max);

    let out = integrate(
        |s, o| {
            let v = log_integrand(s).exp() + log_integrand(-s).exp();
            o[0] = v.re;
            o[1] = v.im;
        },
        2,
        &breaks,
        quad,
    );
    if !out.converged {
        return Err(Error::Quadrature {
            estimate: out.values[0],
            error: out.errors[0],
            evaluations: out.evaluations,
        });
    }
    Ok(LineIntegral {
        value: Complex64::new(out.values[0], out.values[1]),
        error: out.errors[0],
        scale,
    })
}

/// Heat kernel `p_t(x, z)`.
///
/// At time one the frequency integral is shifted onto `R + i y_{(x,z)}`,
/// through the stationary point, whenever the top block is nonzero; the
/// integrand then carries no exponential cancellation. The result keeps the
/// factor `e^{-d^2/4}` in `log_scale`.
pub fn aniso_kernel(pt: &AnisoPoint, spec: &AnisoSpec, t: f64) -> Result<KernelEval> {
    aniso_kernel_with(pt, spec, t, &QuadOptions::default())
}

pub fn aniso_kernel_with(pt: &AnisoPoint, spec: &AnisoSpec, t: f64, quad: &QuadOptions) -> Result<KernelEval> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", "must be finite and > 0"));
    }
    pt.check(spec)?;
    let unit = pt.dilated(1.0 / t.sqrt());
    let (y, method) = match aniso_root(&unit, spec) {
        Ok(root) if root.y > 0.0 => (root.y, Method::ShiftedContour),
        Ok(_) | Err(Error::DegenerateBlock) => (0.0, Method::RealLine),
        Err(e) => return Err(e),
    };
    let line = line_integral(&unit, spec, y, quad)?;
    let tolerance = 10.0 * line.error + 1e-12 * line.value.re.abs();
    if line.value.im.abs() > tolerance {
        return Err(Error::ImaginaryResidual {
            residual: line.value.im.abs(),
            tolerance,
        });
    }
    let n = spec.n() as f64;
    let prefactor = 2.0 / (4.0 * PI).powf(n + 1.0);
    Ok(KernelEval {
        mantissa: prefactor * line.value.re,
        abs_error: prefactor * line.error,
        log_scale: line.scale + (n + 1.0) * t.ln(),
        method,
    })
}

// ---------------------------------------------------------------------------
// stationary phase diagnostics

/// `psi(s) = phi(s + i y) - phi(i y)` with
/// `phi(s) = (|z| / R) s + i sum_j (alpha_j |P_j|^2 / 4R) s coth(alpha_j s)`.
pub fn aniso_psi_fn(pt: &AnisoPoint, spec: &AnisoSpec, y: f64, s: Complex64) -> Complex64 {
    // phase = i R phi, up to the sign convention of z
    let r = pt.r(spec);
    let pt = AnisoPoint {
        block_norms: pt.block_norms.clone(),
        z: pt.z.abs(),
    };
    let iy = Complex64::new(0.0, y);
    let i = Complex64::i();
    (phase(&pt, spec, s + iy) - phase(&pt, spec, iy)) / (i * r)
}

/// Derivatives of `psi` at the origin for the full shift `y = y_{(x,z)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiDerivatives {
    pub y: f64,
    pub first: [f64; 2],
    pub second: [f64; 2],
    /// `i sum_j (alpha_j^2 |P_j|^2 / 2R) (sin u - u cos u) / sin^3 u`.
    pub printed_second: [f64; 2],
}

impl PsiDerivatives {
    pub fn first_abs(&self) -> f64 {
        self.first[0].hypot(self.first[1])
    }

    pub fn second_residual(&self) -> f64 {
        (self.second[0] - self.printed_second[0]).hypot(self.second[1] - self.printed_second[1])
    }
}

/// `psi'(0)` and `psi''(0)` by the trapezoid rule for the Cauchy integral on
/// a circle inside the strip of analyticity.
pub fn psi_derivatives(pt: &AnisoPoint, spec: &AnisoSpec) -> Result<PsiDerivatives> {
    let root = aniso_root(pt, spec)?;
    let radius = (0.5 * root.eps).min(0.5);
    const N: usize = 64;
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = Complex64::new(0.0, 0.0);
    for j in 0..N {
        let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / N as f64);
        let v = aniso_psi_fn(pt, spec, root.y, radius * e);
        first += v / e;
        second += v / (e * e);
    }
    first /= N as f64 * radius;
    second *= 2.0 / (N as f64 * radius * radius);
    let psi = psi_at(pt, spec, root);
    // sum_j alpha_j^2 |P_j|^2 (sin - u cos) / sin^3 = 4 Psi^2
    let printed = 4.0 * psi * psi / (2.0 * pt.r(spec));
    Ok(PsiDerivatives {
        y: root.y,
        first: [first.re, first.im],
        second: [second.re, second.im],
        printed_second: [0.0, printed],
    })
}

/// Result of moving the integration line from `R` to `R + i y_shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourShiftReport {
    pub y_shift: f64,
    pub y_saddle: f64,
    /// `p_1` from the real line and from the shifted line.
    pub real_line: f64,
    pub shifted: f64,
    /// Relative difference of the two.
    pub residual: f64,
    /// `|psi'(0)|` when the shift reaches the stationary point.
    pub psi_prime_at_saddle: Option<f64>,
}

/// Compare the real-line integral with the shifted one, including the
/// explicit prefactor `e^{i R phi(i y_shift)}`.
pub fn contour_shift_check(pt: &AnisoPoint, spec: &AnisoSpec, y_shift: f64) -> Result<ContourShiftReport> {
    let root = aniso_root(pt, spec)?;
    if !(y_shift >= 0.0 && y_shift.is_finite()) {
        return Err(invalid("y_shift", "must be finite and >= 0"));
    }
    if y_shift > spec.pole() - 1e-3 {
        return Err(invalid("y_shift", "within 1e-3 of the pole pi / alpha_k"));
    }
    if y_shift > root.y * (1.0 + 4.0 * f64::EPSILON) {
        return Err(invalid("y_shift", "beyond the stationary point"));
    }
    let quad = QuadOptions::default();
    let n = spec.n() as f64;
    let prefactor = 2.0 / (4.0 * PI).powf(n + 1.0);
    let base = line_integral(pt, spec, 0.0, &quad)?;
    let moved = line_integral(pt, spec, y_shift, &quad)?;
    let real_line = prefactor * base.value.re * (-base.scale).exp();
    let shifted_c = moved.value * (base.scale - moved.scale).exp();
    let shifted = prefactor * shifted_c.re * (-base.scale).exp();
    let residual = (base.value - shifted_c).norm() / base.value.norm();
    let at_saddle = y_shift == root.y && root.y > 0.0;
    let psi_prime_at_saddle = if at_saddle {
        Some(psi_derivatives(pt, spec)?.first_abs())
    } else {
        None
    };
    Ok(ContourShiftReport {
        y_shift,
        y_saddle: root.y,
        real_line,
        shifted,
        residual,
        psi_prime_at_saddle,
    })
}

// ---------------------------------------------------------------------------
// leading-order expansion

/// Leading term `2 sqrt(pi) e^{-d^2/4} / ((4 pi)^{n+1} Psi) prod_j (alpha_j y / sin(alpha_j y))^{n_j}`
/// of `p_1`, in the same scaled form as [`aniso_kernel`].
pub fn expansion_leading(pt: &AnisoPoint, spec: &AnisoSpec) -> Result<KernelEval> {
    let root = aniso_root(pt, spec)?;
    let n = spec.n() as f64;
    let amp: f64 = spec
        .alphas
        .iter()
        .zip(&spec.multiplicities)
        .map(|(a, nj)| crate::specialfn::y_over_sin(a * root.y).powi(*nj as i32))
        .product();
    let value = 2.0 * PI.sqrt() / ((4.0 * PI).powf(n + 1.0) * psi_at(pt, spec, root)) * amp;
    Ok(KernelEval {
        mantissa: value,
        abs_error: 0.0,
        log_scale: d2_quarter(pt, spec, root),
        method: Method::ShiftedContour,
    })
}

/// A ray of the admissible zone: `alpha_j |P_j(x)|^2 = share_j R` and
/// `|z| = omega R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisoRay {
    pub shares: Vec<f64>,
    pub omega: f64,
}

impl AnisoRay {
    /// Equal shares of `R` on every block.
    pub fn balanced(spec: &AnisoSpec, omega: f64) -> Self {
        Self {
            shares: vec![1.0 / spec.k() as f64; spec.k()],
            omega,
        }
    }

    pub fn at(&self, spec: &AnisoSpec, r: f64) -> Result<AnisoPoint> {
        let total: f64 = self.shares.iter().sum();
        let norms = self
            .shares
            .iter()
            .zip(&spec.alphas)
            .map(|(s, a)| (s / total * r / a).sqrt())
            .collect();
        AnisoPoint::new(norms, self.omega * r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub r: f64,
    pub ratio: f64,
    pub ratio_error: f64,
    /// `(ratio - 1) R`.
    pub scaled_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub rows: Vec<ExpansionRow>,
    /// Fit `(ratio - 1) R ~ c_0 + c_1 / R`.
    pub fit: Option<LinearFit>,
    pub max_scaled_deviation: f64,
    /// Largest admissibility constant met along the sequence.
    pub zone_constant: f64,
    pub bounded: bool,
    pub warnings: Vec<String>,
}

/// Ratio of [`aniso_kernel`] to [`expansion_leading`] along a sequence of
/// points; the expansion predicts `(ratio - 1) R` stays bounded.
///
/// The sequence is declared bounded when the scaled deviations fit
/// `c_0 + c_1 / R` (`R^2 >= 0.9`, or spread below `1e-3`) and never exceed
/// `2 max(|c_0|, |first deviation|) + 1`.
pub fn expansion_check(points: &[AnisoPoint], spec: &AnisoSpec, zone: f64) -> Result<ExpansionReport> {
    let rows = points
        .par_iter()
        .map(|pt| -> Result<ExpansionRow> {
            let exact = aniso_kernel(pt, spec, 1.0)?;
            let lead = expansion_leading(pt, spec)?;
            let ratio = exact.ratio(&lead);
            let ratio_error = exact.abs_error / lead.mantissa * (lead.log_scale - exact.log_scale).exp();
            let r = pt.r(spec);
            Ok(ExpansionRow {
                r,
                ratio,
                ratio_error,
                scaled_deviation: (ratio - 1.0) * r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let mut zone_constant: f64 = 0.0;
    for pt in points {
        let c = pt.zone_constant(spec);
        zone_constant = zone_constant.max(c);
        if c > zone {
            warnings.push(format!("point with R = {:.3e} leaves the zone: constant {c:.3} > {zone}", pt.r(spec)));
        }
    }
    let design: Vec<Vec<f64>> = rows.iter().map(|r| vec![1.0, 1.0 / r.r]).collect();
    let devs: Vec<f64> = rows.iter().map(|r| r.scaled_deviation).collect();
    let fit = least_squares(&design, &devs);
    let max_scaled_deviation = devs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let spread = devs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - devs.iter().cloned().fold(f64::INFINITY, f64::min);
    let bounded = match (&fit, devs.first()) {
        (Some(f), Some(first)) => {
            let shape = f.r_squared >= 0.9 || spread < 1e-3;
            shape && max_scaled_deviation <= 2.0 * f.coefficients[0].abs().max(first.abs()) + 1.0
        }
        _ => false,
    };
    Ok(ExpansionReport {
        rows,
        fit,
        max_scaled_deviation,
        zone_constant,
        bounded,
        warnings,
    })
}
