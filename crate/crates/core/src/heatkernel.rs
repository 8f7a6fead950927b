//! Heat kernel `p_t` of an H-type group and its mixed derivatives in the
//! reduced coordinates `(R, |z|)`, together with the leading terms of its
//! asymptotic expansions.
//!
//! At `t = 1` the kernel is `h(R, |z|)`, the Fourier integral
//!
//! ```text
//! h(R, zeta) = 1/((4 pi)^n (2 pi)^m) int_{R^m} exp(i<l, z> - R |l| coth |l|) (|l| / sinh |l|)^n dl
//! ```
//!
//! Three evaluation routes are implemented.
//!
//! * **Radial**: the `m`-dimensional Fourier integral is reduced to a Hankel
//!   transform `int_0^inf Phi(r) r^{m-1} G_nu(r zeta) dr` with
//!   `G_nu(u) = u^{-nu} J_nu(u)`, `nu = m/2 - 1`. Derivatives in `R` multiply the
//!   integrand by `-r coth r`; derivatives in `zeta` follow from
//!   `d/du G_nu(u) = -u G_{nu+1}(u)`.
//! * **Shifted contour** (odd `m`): the kernel is
//!   `(-zeta^{-1} d/dzeta)^{(m-1)/2}` applied to a one-dimensional integral over
//!   the real line, and that line is moved to `Im r = y*`, the minimiser of the
//!   integrand modulus on the imaginary axis. This removes the cancellation that
//!   makes the real-axis integral useless once `exp(-d^2/4)` is far below
//!   `exp(-R)`.
//! * **Projected line** (even `m`): the same shift applied to the
//!   one-dimensional profile obtained by integrating the radial symbol over the
//!   `m-1` transverse directions of the centre. The profile stays analytic in
//!   the strip `|Im s| < pi`, so no derivative operators are needed.
//!
//! Values are returned as a mantissa together with a logarithmic scale so that
//! deep tails (`d^2/4` in the thousands) stay representable.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{sr_distance, GroupSpec, RadialProfile};
use crate::quadrature::{integrate, QuadOptions, QuadOutput};
use crate::specialfn::{
    bessel_i_scaled, bracketed_newton, scaled_bessel_j, theta_complement, theta_inv_split,
    theta_prime_unchecked, theta_unchecked, BesselOrder, ThetaRoot,
};

/// Mixed derivative order `d_R^{k1} d_|z|^{k2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DerivOrder {
    pub k1: u32,
    pub k2: u32,
}

impl DerivOrder {
    pub const VALUE: Self = Self { k1: 0, k2: 0 };

    pub fn new(k1: u32, k2: u32) -> Result<Self> {
        if k1 + k2 > 4 {
            return Err(invalid("order", format!("k1 + k2 must be <= 4, got {}", k1 + k2)));
        }
        Ok(Self { k1, k2 })
    }

    pub fn total(&self) -> u32 {
        self.k1 + self.k2
    }
}

/// How a kernel value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Radial (Hankel-transform) reduction on the real axis.
    Reduced1d,
    /// Line integral shifted to pass through the saddle on the imaginary axis.
    ShiftedContour,
    /// Central differences of kernel values.
    FiniteDifference,
    /// Line integral along the real axis.
    RealLine,
}

/// Route selection for [`kernel_with`] and friends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Shifted contour whenever `m` is odd and the real-axis integral would
    /// lose more than a few digits to cancellation, radial otherwise.
    #[default]
    Auto,
    Radial,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    pub route: Route,
    pub quad: QuadOptions,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            route: Route::Auto,
            quad: QuadOptions {
                abs_tol: 0.0,
                rel_tol: 1e-13,
                l1_tol: 5e-14,
                max_intervals: 4000,
            },
        }
    }
}

/// A positive or signed quantity stored as `mantissa * exp(-log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        self.mantissa * (-self.log_scale).exp()
    }

    /// Natural logarithm of the absolute value.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() - self.log_scale
    }
}

/// A kernel (or kernel derivative) value with its quadrature error estimate.
///
/// The represented value is `mantissa * exp(-log_scale)` and its absolute
/// error is `abs_error * exp(-log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub mantissa: f64,
    pub abs_error: f64,
    pub log_scale: f64,
    pub method: Method,
}

impl KernelEval {
    pub fn value(&self) -> f64 {
        self.mantissa * (-self.log_scale).exp()
    }

    pub fn error(&self) -> f64 {
        self.abs_error * (-self.log_scale).exp()
    }

    pub fn relative_error(&self) -> f64 {
        self.abs_error / self.mantissa.abs()
    }

    /// `ln |value|`, finite even when `value()` underflows.
    pub fn ln(&self) -> f64 {
        self.mantissa.abs().ln() - self.log_scale
    }

    pub fn scaled(&self) -> Scaled {
        Scaled {
            mantissa: self.mantissa,
            log_scale: self.log_scale,
        }
    }

    /// This value divided by `other`, both at their own scales.
    pub fn ratio(&self, other: &KernelEval) -> f64 {
        self.mantissa / other.mantissa * (other.log_scale - self.log_scale).exp()
    }

    fn rescaled(self, extra_log_scale: f64) -> Self {
        Self {
            log_scale: self.log_scale + extra_log_scale,
            ..self
        }
    }
}

/// A quantity built from derivatives of `h` at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `d_R^{k1} d_zeta^{k2} h`.
    Deriv(DerivOrder),
    /// `d_R^{k1} d_zeta^{k2} h / zeta`, finite at `zeta = 0` for odd `k2`.
    DerivOverZeta(DerivOrder),
}

impl Quantity {
    fn order(&self) -> DerivOrder {
        match *self {
            Quantity::Deriv(o) | Quantity::DerivOverZeta(o) => o,
        }
    }

    fn over_zeta(&self) -> bool {
        matches!(self, Quantity::DerivOverZeta(_))
    }
}

fn check_profile(profile: &RadialProfile) -> Result<()> {
    RadialProfile::new(profile.r, profile.zeta).map(|_| ())
}

/// `p_t` at the profile, via `p_t(R, zeta) = t^{-(n+m)} h(R/t, zeta/t)`.
pub fn kernel(profile: RadialProfile, t: f64, spec: &GroupSpec) -> Result<KernelEval> {
    kernel_with(profile, t, spec, &KernelOptions::default())
}

pub fn kernel_with(
    profile: RadialProfile,
    t: f64,
    spec: &GroupSpec,
    opts: &KernelOptions,
) -> Result<KernelEval> {
    kernel_deriv_t(profile, t, DerivOrder::VALUE, spec, opts)
}

/// `p_{1,k1,k2}` at the profile.
pub fn kernel_deriv(profile: RadialProfile, order: DerivOrder, spec: &GroupSpec) -> Result<KernelEval> {
    kernel_deriv_t(profile, 1.0, order, spec, &KernelOptions::default())
}

/// `p_{t,k1,k2} = t^{-n-m-k1-k2} (d_1^{k1} d_2^{k2} h)(R/t, zeta/t)`.
pub fn kernel_deriv_t(
    profile: RadialProfile,
    t: f64,
    order: DerivOrder,
    spec: &GroupSpec,
    opts: &KernelOptions,
) -> Result<KernelEval> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and > 0, got {t}")));
    }
    check_profile(&profile)?;
    let unit = RadialProfile {
        r: profile.r / t,
        zeta: profile.zeta / t,
    };
    let mut out = evaluate(unit, spec.n, spec.m, &[Quantity::Deriv(order)], opts)?;
    let power = (spec.n + spec.m) as f64 + order.total() as f64;
    Ok(out.remove(0).rescaled(power * t.ln()))
}

/// Several derivative quantities of `h` at `t = 1`, sharing one quadrature
/// pass and one logarithmic scale.
pub fn kernel_quantities(
    profile: RadialProfile,
    quantities: &[Quantity],
    spec: &GroupSpec,
    opts: &KernelOptions,
) -> Result<Vec<KernelEval>> {
    check_profile(&profile)?;
    evaluate(profile, spec.n, spec.m, quantities, opts)
}

/// `p_{1,k1,k2}` by Richardson-extrapolated central differences of `h`.
///
/// Kept as an independent check of the analytic derivative route.
pub fn kernel_deriv_fd(
    profile: RadialProfile,
    order: DerivOrder,
    spec: &GroupSpec,
    step: f64,
    opts: &KernelOptions,
) -> Result<KernelEval> {
    if !(step > 0.0) {
        return Err(invalid("step", "must be > 0"));
    }
    check_profile(&profile)?;
    let center = evaluate(profile, spec.n, spec.m, &[Quantity::Deriv(DerivOrder::VALUE)], opts)?[0];
    let scale = center.log_scale;
    let eval_at = |r: f64, z: f64| -> Result<(f64, f64)> {
        let p = RadialProfile {
            r: r.max(0.0),
            zeta: z.abs(),
        };
        let e = evaluate(p, spec.n, spec.m, &[Quantity::Deriv(DerivOrder::VALUE)], opts)?[0];
        let f = (scale - e.log_scale).exp();
        Ok((e.mantissa * f, e.abs_error * f))
    };
    let stencil = |h: f64| -> Result<(f64, f64)> {
        // tensor product of 1-D central stencils
        let w1 = central_weights(order.k1);
        let w2 = central_weights(order.k2);
        let mut sum = 0.0;
        let mut err = 0.0;
        for (i, a) in w1.iter() {
            for (j, b) in w2.iter() {
                let (v, e) = eval_at(profile.r + *i as f64 * h, profile.zeta + *j as f64 * h)?;
                sum += a * b * v;
                err += (a * b).abs() * e;
            }
        }
        let denom = h.powi(order.total() as i32);
        Ok((sum / denom, err / denom))
    };
    let (coarse, e1) = stencil(step)?;
    let (fine, e2) = stencil(0.5 * step)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    Ok(KernelEval {
        mantissa: extrapolated,
        abs_error: (fine - coarse).abs() / 3.0 + e1 + e2,
        log_scale: scale,
        method: Method::FiniteDifference,
    })
}

fn central_weights(k: u32) -> Vec<(i32, f64)> {
    match k {
        0 => vec![(0, 1.0)],
        1 => vec![(-1, -0.5), (1, 0.5)],
        2 => vec![(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => vec![(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => vec![(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
    }
}

// ---------------------------------------------------------------------------
// dispatch

fn evaluate(
    profile: RadialProfile,
    n: usize,
    m: usize,
    quantities: &[Quantity],
    opts: &KernelOptions,
) -> Result<Vec<KernelEval>> {
    let needs_over_zeta = quantities.iter().any(|q| q.over_zeta());
    for q in quantities {
        if q.over_zeta() && q.order().k2 % 2 == 0 {
            return Err(invalid(
                "quantity",
                "division by |z| is only regular for odd k2",
            ));
        }
    }
    let contour_possible = if m % 2 == 1 {
        profile.zeta > 0.0 || (m == 1 && !needs_over_zeta)
    } else {
        profile.zeta > 0.0
    };
    let use_contour = match opts.route {
        Route::Radial => false,
        Route::Contour => {
            if !contour_possible {
                return Err(invalid(
                    "route",
                    "the shifted contour needs |z| > 0 unless m = 1",
                ));
            }
            true
        }
        Route::Auto => {
            contour_possible && sr_distance(profile).d2_quarter - profile.r >= 3.0
        }
    };
    match (use_contour, m % 2) {
        (false, _) => radial_eval(profile, n, m, quantities, &opts.quad),
        (true, 1) => contour_eval(profile, n, m, quantities, &opts.quad),
        (true, _) => projected_eval(profile, n, m, quantities, &opts.quad),
    }
}

fn quad_error(out: &QuadOutput, idx: usize) -> Error {
    Error::Quadrature {
        estimate: out.values[idx],
        error: out.errors[idx],
        evaluations: out.evaluations,
    }
}

/// `ln(r / sinh r)` for real `r >= 0`.
fn ln_r_over_sinh(r: f64) -> f64 {
    if r < 1e-3 {
        let r2 = r * r;
        -r2 / 6.0 + r2 * r2 / 180.0
    } else if r > 20.0 {
        // sinh r = e^r (1 - e^{-2r}) / 2
        r.ln() + std::f64::consts::LN_2 - r - (-(-2.0 * r).exp()).ln_1p()
    } else {
        (r / r.sinh()).ln()
    }
}

/// `r coth r - 1` for real `r >= 0`.
fn r_coth_r_minus_1(r: f64) -> f64 {
    if r < 0.1 {
        let r2 = r * r;
        r2 * (1.0 / 3.0
            + r2 * (-1.0 / 45.0 + r2 * (2.0 / 945.0 + r2 * (-1.0 / 4725.0 + r2 * 2.0 / 93555.0))))
    } else {
        r / r.tanh() - 1.0
    }
}

// ---------------------------------------------------------------------------
// radial route

/// Expansion of `d_zeta^{k2} G_nu(r zeta)` as `sum coef zeta^p r^{2q} G_{nu+q}`.
fn radial_zeta_expansion(k2: u32, over_zeta: bool) -> Vec<(i32, u32, f64)> {
    let mut terms: Vec<(i32, u32, f64)> = vec![(0, 0, 1.0)];
    for _ in 0..k2 {
        let mut next: Vec<(i32, u32, f64)> = Vec::new();
        for &(p, q, c) in &terms {
            if p > 0 {
                push_term(&mut next, (p - 1, q), c * p as f64);
            }
            push_term(&mut next, (p + 1, q + 1), -c);
        }
        terms = next;
    }
    if over_zeta {
        for t in terms.iter_mut() {
            t.0 -= 1;
        }
    }
    terms
}

fn push_term<K: PartialEq + Copy>(terms: &mut Vec<(i32, K, f64)>, key: (i32, K), c: f64) {
    if c == 0.0 {
        return;
    }
    if let Some(t) = terms.iter_mut().find(|t| t.0 == key.0 && t.1 == key.1) {
        t.2 += c;
    } else {
        terms.push((key.0, key.1, c));
    }
}

fn radial_eval(
    profile: RadialProfile,
    n: usize,
    m: usize,
    quantities: &[Quantity],
    quad: &QuadOptions,
) -> Result<Vec<KernelEval>> {
    let RadialProfile { r: big_r, zeta } = profile;
    let nu0 = BesselOrder::from_f64(m as f64 / 2.0 - 1.0)?;

    // expansions and the set of basis integrals (a = k1, q)
    let expansions: Vec<Vec<(i32, u32, f64)>> = quantities
        .iter()
        .map(|q| radial_zeta_expansion(q.order().k2, q.over_zeta()))
        .collect();
    let mut basis: Vec<(u32, u32)> = Vec::new();
    for (qty, exp) in quantities.iter().zip(&expansions) {
        for &(_, q, _) in exp {
            let key = (qty.order().k1, q);
            if !basis.contains(&key) {
                basis.push(key);
            }
        }
    }
    let qmax = basis.iter().map(|b| b.1).max().unwrap_or(0);
    let amax = basis.iter().map(|b| b.0).max().unwrap_or(0);

    // truncation: integrand <= exp(-(R+n)(r-1) + n ln(2r) + P ln r)
    let power = (m - 1) as f64 + 2.0 * qmax as f64 + amax as f64;
    let decay = big_r + n as f64;
    let mut r_max = 2.0;
    while -big_r * r_coth_r_minus_1(r_max) + n as f64 * ln_r_over_sinh(r_max)
        + power * r_max.ln()
        + amax as f64 * (1.0 / r_max.tanh()).ln()
        > -44.0
        && r_max < 2000.0
    {
        r_max += 1.0f64.max(2.0 / decay);
    }

    // panels no wider than half a period of the Bessel oscillation
    let width = if zeta > 0.0 { (PI / zeta).min(1.0) } else { 1.0 };
    let panels = ((r_max / width).ceil() as usize).max(4);
    let breakpoints: Vec<f64> = (0..=panels).map(|i| r_max * i as f64 / panels as f64).collect();

    let dim = basis.len();
    let mut gvals = vec![0.0; qmax as usize + 1];
    let out = integrate(
        |r, o| {
            let base = (-big_r * r_coth_r_minus_1(r) + n as f64 * ln_r_over_sinh(r)).exp()
                * r.powi(m as i32 - 1);
            let rc = r / r.tanh();
            for (q, g) in gvals.iter_mut().enumerate() {
                *g = scaled_bessel_j(nu0.shifted(q as i32), r * zeta);
            }
            for (slot, &(a, q)) in o.iter_mut().zip(&basis) {
                *slot = base * (-rc).powi(a as i32) * r.powi(2 * q as i32) * gvals[q as usize];
            }
        },
        dim,
        &breakpoints,
        quad,
    );
    if !out.converged {
        let worst = (0..dim)
            .max_by(|&i, &j| out.errors[i].total_cmp(&out.errors[j]))
            .unwrap_or(0);
        return Err(quad_error(&out, worst));
    }

    let c = (2.0 * PI).powf(m as f64 / 2.0) / ((4.0 * PI).powi(n as i32) * (2.0 * PI).powi(m as i32));
    let mut results = Vec::with_capacity(quantities.len());
    for (qty, exp) in quantities.iter().zip(&expansions) {
        let k1 = qty.order().k1;
        let mut value = 0.0;
        let mut err = 0.0;
        for &(p, q, coef) in exp {
            let idx = basis.iter().position(|&b| b == (k1, q)).expect("basis entry");
            let w = c * coef * zeta.powi(p);
            value += w * out.values[idx];
            err += w.abs() * out.errors[idx];
        }
        results.push(KernelEval {
            mantissa: value,
            abs_error: err,
            log_scale: big_r,
            method: Method::Reduced1d,
        });
    }
    Ok(results)
}

// ---------------------------------------------------------------------------
// shifted-contour route

/// The point `y*` on `[0, pi)` minimising the integrand modulus on the
/// imaginary axis, `g(y) = -zeta y - R y cot y + n ln(y / sin y)`.
pub fn contour_saddle(big_r: f64, zeta: f64, n: usize) -> ThetaRoot {
    if zeta == 0.0 {
        return ThetaRoot {
            y: 0.0,
            complement: PI,
        };
    }
    let nf = n as f64;
    // g'(y) = -zeta + R theta(y) + n (1/y - cot y)
    let inv_minus_cot = |y: f64| {
        if y < 1e-3 {
            y / 3.0 + y * y * y / 45.0
        } else {
            1.0 / y - 1.0 / y.tan()
        }
    };
    let inv_sq_diff = |y: f64| {
        // 1/sin^2 y - 1/y^2
        if y < 1e-3 {
            1.0 / 3.0 + y * y / 15.0
        } else {
            let s = y.sin();
            1.0 / (s * s) - 1.0 / (y * y)
        }
    };
    let at_half = big_r * FRAC_PI_2 + nf * 2.0 / PI - zeta;
    if at_half >= 0.0 {
        let guess = (zeta / (2.0 / 3.0 * big_r + nf / 3.0)).min(FRAC_PI_2);
        let y = bracketed_newton(
            |y| {
                (
                    big_r * theta_unchecked(y) + nf * inv_minus_cot(y) - zeta,
                    big_r * theta_prime_unchecked(y) + nf * inv_sq_diff(y),
                )
            },
            0.0,
            FRAC_PI_2,
            guess,
        );
        ThetaRoot {
            y,
            complement: PI - y,
        }
    } else {
        // solve in eps = pi - y; F(eps) = -g'(pi - eps) is increasing
        let f = |e: f64| {
            let y = PI - e;
            let s = e.sin();
            let value = zeta - big_r * theta_complement(e) - nf * (1.0 / y + e.cos() / s);
            let deriv = big_r * theta_prime_unchecked(y) + nf * (1.0 / (s * s) - 1.0 / (y * y));
            (value, deriv)
        };
        let mut lo = 0.5 * ((PI * big_r / zeta).sqrt()).max(nf / zeta).min(1.0);
        while f(lo).0 > 0.0 && lo > 1e-300 {
            lo *= 0.5;
        }
        let eps = bracketed_newton(f, lo, FRAC_PI_2, lo.max((PI * big_r / zeta).sqrt()).min(FRAC_PI_2));
        ThetaRoot {
            y: PI - eps,
            complement: eps,
        }
    }
}

/// Expansion of the line-route operator as `sum coef zeta^{-p} L^{(j)}`.
fn line_expansion(m: usize, k2: u32, over_zeta: bool) -> Vec<(i32, u32, f64)> {
    let mut terms: Vec<(i32, u32, f64)> = vec![(0, 0, 1.0)];
    for _ in 0..(m - 1) / 2 {
        let mut next = Vec::new();
        for &(p, j, c) in &terms {
            push_term(&mut next, (p + 2, j), c * p as f64);
            push_term(&mut next, (p + 1, j + 1), -c);
        }
        terms = next;
    }
    for _ in 0..k2 {
        let mut next = Vec::new();
        for &(p, j, c) in &terms {
            push_term(&mut next, (p + 1, j), -c * p as f64);
            push_term(&mut next, (p, j + 1), c);
        }
        terms = next;
    }
    if over_zeta {
        for t in terms.iter_mut() {
            t.0 += 1;
        }
    }
    terms
}

/// Complex amplitude pieces on the shifted line `r = s + i y`.
struct LinePoint {
    r: Complex64,
    r_coth: Complex64,
    /// `exp(i r zeta - R r coth r + S) (r / sinh r)^n`
    base: Complex64,
}

struct Line {
    big_r: f64,
    zeta: f64,
    n: i32,
    root: ThetaRoot,
    /// `y cot y` at the saddle
    y_cot: f64,
}

impl Line {
    fn new(big_r: f64, zeta: f64, n: usize, root: ThetaRoot) -> Self {
        let y = root.y;
        let y_cot = if y <= FRAC_PI_2 {
            crate::specialfn::y_cot(y)
        } else {
            -y * root.complement.cos() / root.complement.sin()
        };
        Self {
            big_r,
            zeta,
            n: n as i32,
            root,
            y_cot,
        }
    }

    /// Logarithmic scale `S = zeta y + R y cot y`.
    fn log_scale(&self) -> f64 {
        self.zeta * self.root.y + self.big_r * self.y_cot
    }

    fn at(&self, s: f64) -> LinePoint {
        let y = self.root.y;
        let r = Complex64::new(s, y);
        let (r_coth, r_over_sinh) = if r.norm() < 1e-3 {
            let r2 = r * r;
            (
                1.0 + r2 * (1.0 / 3.0 - r2 / 45.0),
                1.0 - r2 * (1.0 / 6.0 - r2 * 7.0 / 360.0),
            )
        } else if y > FRAC_PI_2 {
            // shift by i pi: sinh(r) = -sinh(w), coth(r) = coth(w), w = s - i eps
            let w = Complex64::new(s, -self.root.complement);
            (r / w.tanh(), -r / w.sinh())
        } else {
            (r / r.tanh(), r / r.sinh())
        };
        // i r zeta + zeta y = i s zeta
        let exponent = Complex64::new(0.0, s * self.zeta) - self.big_r * (r_coth - self.y_cot);
        let base = exponent.exp() * r_over_sinh.powi(self.n);
        LinePoint { r, r_coth, base }
    }
}

fn contour_eval(
    profile: RadialProfile,
    n: usize,
    m: usize,
    quantities: &[Quantity],
    quad: &QuadOptions,
) -> Result<Vec<KernelEval>> {
    let RadialProfile { r: big_r, zeta } = profile;
    let root = contour_saddle(big_r, zeta, n);
    let line = Line::new(big_r, zeta, n, root);

    let expansions: Vec<Vec<(i32, u32, f64)>> = quantities
        .iter()
        .map(|q| line_expansion(m, q.order().k2, q.over_zeta()))
        .collect();
    let mut basis: Vec<(u32, u32)> = Vec::new();
    for (qty, exp) in quantities.iter().zip(&expansions) {
        for &(_, j, _) in exp {
            let key = (qty.order().k1, j);
            if !basis.contains(&key) {
                basis.push(key);
            }
        }
    }
    let jmax = basis.iter().map(|b| b.1).max().unwrap_or(0) as i32;
    let amax = basis.iter().map(|b| b.0).max().unwrap_or(0) as i32;

    let envelope = |s: f64| {
        let p = line.at(s);
        p.base.norm() * (1.0 + p.r.norm()).powi(jmax) * (1.0 + p.r_coth.norm()).powi(amax)
    };
    let peak = envelope(0.0);
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::NonFinite(format!(
            "shifted-contour amplitude {peak} at R = {big_r}, |z| = {zeta}"
        )));
    }

    // peak width: curvature of the exponent at the saddle and distance to the pole
    let curvature = big_r * theta_prime_unchecked(root.y.min(PI - 1e-300)) + n as f64;
    let w0 = 0.5f64
        .min(0.25 * root.complement)
        .min(1.0 / curvature.sqrt());
    let mut s_max = w0;
    while s_max < 700.0 && (envelope(s_max) > 1e-19 * peak || envelope(1.5 * s_max) > 1e-19 * peak) {
        s_max *= 1.5;
    }
    let mut breakpoints = vec![0.0];
    let mut s = w0;
    while s < s_max {
        breakpoints.push(s);
        s *= 2.0;
    }
    breakpoints.push(s_max);
    // at most two oscillation periods per panel
    if zeta > 0.0 {
        let width = 4.0 * PI / zeta;
        let mut refined = vec![breakpoints[0]];
        for w in breakpoints.windows(2) {
            let pieces = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                refined.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
            }
        }
        breakpoints = refined;
    }

    let dim = basis.len();
    let out = integrate(
        |s, o| {
            let p = line.at(s);
            let neg_rc = -p.r_coth;
            let ir = Complex64::new(0.0, 1.0) * p.r;
            for (slot, &(a, j)) in o.iter_mut().zip(&basis) {
                let v = p.base * neg_rc.powi(a as i32) * ir.powi(j as i32);
                *slot = 2.0 * v.re;
            }
        },
        dim,
        &breakpoints,
        quad,
    );
    if !out.converged {
        let worst = (0..dim)
            .max_by(|&i, &j| out.errors[i].total_cmp(&out.errors[j]))
            .unwrap_or(0);
        return Err(quad_error(&out, worst));
    }

    let c = 1.0 / ((4.0 * PI).powi(n as i32) * (2.0 * PI).powi(((m + 1) / 2) as i32));
    let log_scale = line.log_scale();
    let mut results = Vec::with_capacity(quantities.len());
    for (qty, exp) in quantities.iter().zip(&expansions) {
        let k1 = qty.order().k1;
        let mut value = 0.0;
        let mut err = 0.0;
        for &(p, j, coef) in exp {
            let idx = basis.iter().position(|&b| b == (k1, j)).expect("basis entry");
            let w = c * coef * zeta.powi(-p);
            value += w * out.values[idx];
            err += w.abs() * out.errors[idx];
        }
        results.push(KernelEval {
            mantissa: value,
            abs_error: err,
            log_scale,
            method: Method::ShiftedContour,
        });
    }
    Ok(results)
}

/// Peak width and breakpoints of a shifted line whose integrand decays like
/// `envelope`, refined to at most two oscillation periods per panel.
fn line_breakpoints(line: &Line, zeta: f64, n: usize, envelope: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let root = line.root;
    let peak = envelope(0.0);
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::NonFinite(format!(
            "shifted-contour amplitude {peak} at R = {}, |z| = {zeta}",
            line.big_r
        )));
    }
    let curvature = line.big_r * theta_prime_unchecked(root.y.min(PI - 1e-300)) + n as f64;
    let w0 = 0.5f64
        .min(0.25 * root.complement)
        .min(1.0 / curvature.sqrt());
    let mut s_max = w0;
    while s_max < 700.0 && (envelope(s_max) > 1e-19 * peak || envelope(1.5 * s_max) > 1e-19 * peak) {
        s_max *= 1.5;
    }
    let mut breakpoints = vec![0.0];
    let mut s = w0;
    while s < s_max {
        breakpoints.push(s);
        s *= 2.0;
    }
    breakpoints.push(s_max);
    if zeta > 0.0 {
        let width = 4.0 * PI / zeta;
        let mut refined = vec![breakpoints[0]];
        for w in breakpoints.windows(2) {
            let pieces = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                refined.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
            }
        }
        breakpoints = refined;
    }
    Ok(breakpoints)
}

/// `(w coth w, w / sinh w)` as functions of `w^2 = s^2 + rho^2` with
/// `s = u + i y`, `0 <= y < pi`.
///
/// Near `w = i pi` the pair is formed from `delta = w - i pi`, obtained from
/// `w^2 + pi^2` with `pi^2 - y^2 = eps (2 pi - eps)` so that the complement
/// `eps = pi - y` keeps its relative accuracy.
fn even_amplitude(u: f64, rho: f64, root: ThetaRoot) -> (Complex64, Complex64) {
    let y = root.y;
    let w2 = Complex64::new(u * u + rho * rho - y * y, 2.0 * u * y);
    if w2.norm() < 1e-6 {
        return (
            1.0 + w2 * (1.0 / 3.0 - w2 / 45.0),
            1.0 - w2 * (1.0 / 6.0 - w2 * 7.0 / 360.0),
        );
    }
    let mut w = w2.sqrt();
    if w.im < 0.0 {
        w = -w;
    }
    if w.im > FRAC_PI_2 {
        let eps = root.complement;
        let q = Complex64::new(u * u + rho * rho + eps * (2.0 * PI - eps), 2.0 * u * y);
        let delta = q / (w + Complex64::new(0.0, PI));
        let w = Complex64::new(0.0, PI) + delta;
        if delta.norm() < 1e-6 {
            // coth d ~ 1/d + d/3, sinh d ~ d (1 + d^2/6)
            let d2 = delta * delta;
            (w * (1.0 / delta + delta / 3.0), -w / (delta * (1.0 + d2 / 6.0)))
        } else {
            (w / delta.tanh(), -w / delta.sinh())
        }
    } else {
        (w / w.tanh(), w / w.sinh())
    }
}

/// Shifted-line evaluation for even `m`.
///
/// Integrating the centre frequencies orthogonal to `z` first turns the
/// `m`-dimensional Fourier integral into a line integral of
/// `G(s) = |S^{m-2}| int_0^inf rho^{m-2} g(sqrt(s^2 + rho^2)) d rho`, with
/// `g(w) = (w / sinh w)^n exp(-R w coth w)`. `G` is analytic in the strip
/// `|Im s| < pi`, so the line is moved through the same saddle as in
/// [`contour_eval`].
fn projected_eval(
    profile: RadialProfile,
    n: usize,
    m: usize,
    quantities: &[Quantity],
    quad: &QuadOptions,
) -> Result<Vec<KernelEval>> {
    let RadialProfile { r: big_r, zeta } = profile;
    if zeta == 0.0 {
        return Err(invalid("route", "the projected line needs |z| > 0"));
    }
    let root = contour_saddle(big_r, zeta, n);
    let line = Line::new(big_r, zeta, n, root);
    let amax = quantities.iter().map(|q| q.order().k1).max().unwrap_or(0) as usize;
    let jmax = quantities.iter().map(|q| q.order().k2).max().unwrap_or(0) as i32;
    let ni = n as i32;
    let power = (m - 2) as i32;

    // integrand of G at (u, rho), times e^{R y cot y}, per power of -w coth w
    let inner_terms = |u: f64, rho: f64, out: &mut [f64]| {
        let (wc, ws) = even_amplitude(u, rho, root);
        let mut v = (-big_r * (wc - line.y_cot)).exp() * ws.powi(ni) * rho.powi(power);
        for a in 0..=amax {
            out[2 * a] = v.re;
            out[2 * a + 1] = v.im;
            v *= -wc;
        }
    };
    let inner_dim = 2 * (amax + 1);
    // width of the peak of g near the pole, where rho^2 ~ pi^2 - y^2
    let rho0 = (root.complement * (2.0 * PI - root.complement)).sqrt().min(1.0);
    let inner_opts = QuadOptions {
        rel_tol: quad.rel_tol,
        abs_tol: 0.0,
        l1_tol: quad.l1_tol,
        max_intervals: quad.max_intervals,
    };
    let failed = std::cell::Cell::new(None::<Error>);
    let g_at = |u: f64| -> Vec<f64> {
        let mut probe = vec![0.0; inner_dim];
        let modulus = |rho: f64, buf: &mut [f64]| {
            inner_terms(u, rho, buf);
            buf[0].hypot(buf[1])
        };
        let mut top = 0.0f64;
        let mut rho = 0.25 * rho0;
        while rho < 1.0 {
            top = top.max(modulus(rho, &mut probe));
            rho *= 2.0;
        }
        let mut rho_max = 1.0;
        while rho_max < 2000.0 && {
            let v = modulus(rho_max, &mut probe);
            top = top.max(v);
            v * rho_max > 1e-19 * top * rho0.max(0.1)
        } {
            rho_max *= 1.5;
        }
        let mut breaks = vec![0.0];
        // away from the pole the rho-peak widens like sqrt|w^2 + pi^2|
        let mut b = rho0.max(u.abs().sqrt()).min(1.0);
        while b < rho_max {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(rho_max);
        let out = integrate(|rho, o| inner_terms(u, rho, o), inner_dim, &breaks, &inner_opts);
        if !out.converged {
            failed.set(Some(quad_error(&out, 0)));
        }
        out.values
    };

    let envelope = |s: f64| {
        let g = g_at(s);
        let r = Complex64::new(s, root.y);
        g[0].hypot(g[1]) * (1.0 + r.norm()).powi(jmax) * (1.0 + big_r + r.norm()).powi(amax as i32)
    };
    let breakpoints = line_breakpoints(&line, zeta, n, envelope)?;

    let basis: Vec<(u32, u32)> = {
        let mut b = Vec::new();
        for q in quantities {
            let key = (q.order().k1, q.order().k2);
            if !b.contains(&key) {
                b.push(key);
            }
        }
        b
    };
    let dim = basis.len();
    let outer_opts = QuadOptions {
        max_intervals: quad.max_intervals + breakpoints.len(),
        ..*quad
    };
    let out = integrate(
        |s, o| {
            let g = g_at(s);
            // e^{i (s + i y) zeta} e^{zeta y} = e^{i s zeta}
            let phase = Complex64::new(0.0, s * zeta).exp();
            let ir = Complex64::new(-root.y, s);
            for (slot, &(a, j)) in o.iter_mut().zip(&basis) {
                let gv = Complex64::new(g[2 * a as usize], g[2 * a as usize + 1]);
                *slot = 2.0 * (phase * gv * ir.powi(j as i32)).re;
            }
        },
        dim,
        &breakpoints,
        &outer_opts,
    );
    if let Some(e) = failed.take() {
        return Err(e);
    }
    if !out.converged {
        let worst = (0..dim)
            .max_by(|&i, &j| out.errors[i].total_cmp(&out.errors[j]))
            .unwrap_or(0);
        return Err(quad_error(&out, worst));
    }

    let sphere = 2.0 * PI.powf((m - 1) as f64 / 2.0) / statrs::function::gamma::gamma((m - 1) as f64 / 2.0);
    let c = sphere / ((4.0 * PI).powi(n as i32) * (2.0 * PI).powi(m as i32));
    let log_scale = line.log_scale();
    Ok(quantities
        .iter()
        .map(|q| {
            let idx = basis
                .iter()
                .position(|&b| b == (q.order().k1, q.order().k2))
                .expect("basis entry");
            let w = if q.over_zeta() { c / zeta } else { c };
            KernelEval {
                mantissa: w * out.values[idx],
                abs_error: w.abs() * out.errors[idx],
                log_scale,
                method: Method::ShiftedContour,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// zone asymptotics

/// The four asymptotic regimes of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ZoneId {
    /// `omega` bounded, point to infinity.
    Z1,
    /// `delta -> 0`, `kappa -> infinity`.
    Z2,
    /// `delta -> 0`, `kappa` bounded away from 0 and infinity.
    Z3,
    /// `delta, kappa -> 0`.
    Z4,
}

impl ZoneId {
    /// Heuristic nominal zone of a profile: `omega <= 4` is Z1, otherwise the
    /// size of `kappa` decides.
    pub fn nominal(profile: &RadialProfile) -> Self {
        if profile.zeta <= 4.0 * profile.r {
            ZoneId::Z1
        } else if profile.kappa() > 10.0 {
            ZoneId::Z2
        } else if profile.kappa() > 0.1 {
            ZoneId::Z3
        } else {
            ZoneId::Z4
        }
    }
}

/// Leading asymptotic term of `p_{1,k1,k2}` in a zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZoneLeading {
    pub zone: ZoneId,
    /// Absolute leading term for Z2 to Z4; for Z1 the ratio
    /// `p_{1,k1,k2} / p_{1,0,0}` at leading order (log scale 0).
    pub term: Scaled,
    /// Whether the profile lies in the zone's nominal region.
    pub in_region: bool,
}

pub fn zone_leading(
    zone: ZoneId,
    profile: RadialProfile,
    order: DerivOrder,
    spec: &GroupSpec,
) -> Result<ZoneLeading> {
    check_profile(&profile)?;
    let n = spec.n as f64;
    let m = spec.m as f64;
    let k1 = order.k1 as f64;
    let k2 = order.k2;
    let sign = if k2 % 2 == 0 { 1.0 } else { -1.0 };
    let pi_pow = PI.powf(k1 + k2 as f64);
    let dist = sr_distance(profile);
    let in_region = ZoneId::nominal(&profile) == zone;
    let term = match zone {
        ZoneId::Z1 => {
            let root = theta_inv_split(profile.omega());
            let y = root.y;
            let ratio = (-1f64).powi(order.total() as i32)
                * y.powi(order.total() as i32)
                * (root.cos() / root.sin()).powi(order.k1 as i32);
            let ratio = if y == 0.0 && order.k1 > 0 {
                // y cot y -> 1 as y -> 0
                (-1f64).powi(order.total() as i32) * if k2 == 0 { 1.0 } else { 0.0 }
            } else {
                ratio
            };
            Scaled {
                mantissa: ratio,
                log_scale: 0.0,
            }
        }
        ZoneId::Z2 | ZoneId::Z3 => {
            if profile.r == 0.0 || profile.zeta == 0.0 {
                return Err(Error::Domain("zones Z2 and Z3 need R > 0 and |z| > 0".into()));
            }
            let delta = profile.delta();
            let kappa = profile.kappa();
            let front = sign * pi_pow
                / (4f64.powf(n) * (PI * delta).powf(n + k1 - (m + 1.0) / 2.0));
            if zone == ZoneId::Z2 {
                Scaled {
                    mantissa: front / (2.0 * PI * kappa.powf(m)).sqrt(),
                    log_scale: dist.d2_quarter,
                }
            } else {
                let nu = spec.n as u32 + order.k1 - 1;
                Scaled {
                    mantissa: front / kappa.powf((m - 1.0) / 2.0) * bessel_i_scaled(nu, kappa)?,
                    log_scale: dist.d2_quarter,
                }
            }
        }
        ZoneId::Z4 => {
            let fact: f64 = (1..(spec.n + order.k1 as usize)).map(|k| k as f64).product();
            Scaled {
                mantissa: sign * pi_pow / (2f64.powf(2.0 * n + (m - 1.0) / 2.0) * fact)
                    * profile.zeta.powf(n + k1 - 1.0 - (m - 1.0) / 2.0),
                log_scale: dist.d2_quarter,
            }
        }
    };
    Ok(ZoneLeading {
        zone,
        term,
        in_region,
    })
}

// ---------------------------------------------------------------------------
// total mass

/// `int p_1 dmu` by nested adaptive quadrature in polar coordinates
/// `(|x|, |z|)`; returns `(value, error estimate)`.
pub fn total_mass(spec: &GroupSpec, opts: &KernelOptions) -> Result<(f64, f64)> {
    let n = spec.n;
    let m = spec.m;
    let sphere = |d: usize| 2.0 * PI.powf(d as f64 / 2.0) / statrs::function::gamma::gamma(d as f64 / 2.0);
    let area = sphere(2 * n) * sphere(m);
    // e^{-d^2/4} with d^2 >= |x|^2 and d^2 >= 2 pi |z| bounds the box
    let rho_max = 14.0;
    let z_max = 36.0 / PI + 2.0 * (n + m) as f64;
    let outer_opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        l1_tol: 0.0,
        max_intervals: 400,
    };
    let mut failure: Option<Error> = None;
    let mut inner_err_total = 0.0;
    let inner = |zeta: f64, failure: &mut Option<Error>, err_acc: &mut f64| -> f64 {
        let out = integrate(
            |rho, o| {
                let prof = RadialProfile {
                    r: rho * rho / 4.0,
                    zeta,
                };
                match evaluate(prof, n, m, &[Quantity::Deriv(DerivOrder::VALUE)], opts) {
                    Ok(v) => o[0] = rho.powi(2 * n as i32 - 1) * v[0].value(),
                    Err(e) => {
                        failure.get_or_insert(e);
                        o[0] = 0.0;
                    }
                }
            },
            1,
            &[0.0, 2.0, 4.0, 7.0, rho_max],
            &outer_opts,
        );
        *err_acc += out.errors[0];
        out.values[0]
    };
    let zbreaks: Vec<f64> = (0..=8).map(|k| z_max * k as f64 / 8.0).collect();
    let mut evals = 0usize;
    let out = integrate(
        |zeta, o| {
            evals += 1;
            o[0] = zeta.powi(m as i32 - 1) * inner(zeta, &mut failure, &mut inner_err_total);
        },
        1,
        &zbreaks,
        &outer_opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let inner_err = inner_err_total / evals.max(1) as f64 * z_max;
    Ok((area * out.values[0], area * (out.errors[0] + inner_err)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> GroupSpec {
        GroupSpec::heisenberg(1).unwrap()
    }

    fn prof(r: f64, z: f64) -> RadialProfile {
        RadialProfile::new(r, z).unwrap()
    }

    fn with_route(route: Route) -> KernelOptions {
        KernelOptions {
            route,
            ..KernelOptions::default()
        }
    }

    #[test]
    fn origin_value_on_h1() {
        let v = kernel(prof(0.0, 0.0), 1.0, &h1()).unwrap();
        assert!((v.value() - 1.0 / 16.0).abs() < 1e-14, "{}", v.value());
        assert!(v.error() < 1e-13);
    }

    #[test]
    fn h1_centre_axis_matches_sech_squared_on_both_routes() {
        for &z in &[0.1, 0.5, 1.0, 3.0, 10.0, 40.0] {
            let exact_ln = (1.0f64 / 16.0).ln() - 2.0 * (PI * z / 2.0).cosh().ln();
            for route in [Route::Radial, Route::Contour, Route::Auto] {
                if route == Route::Radial && z > 5.0 {
                    continue;
                }
                let v = kernel_with(prof(0.0, z), 1.0, &h1(), &with_route(route)).unwrap();
                let tol = if route == Route::Radial { 1e-9 } else { 1e-12 };
                assert!(
                    (v.ln() - exact_ln).abs() < tol,
                    "z={z} {route:?}: {} vs {exact_ln}",
                    v.ln()
                );
            }
        }
    }

    #[test]
    fn routes_agree_for_m3_and_derivatives() {
        let spec = GroupSpec::quaternionic(2).unwrap();
        let quantities = [
            Quantity::Deriv(DerivOrder { k1: 0, k2: 0 }),
            Quantity::Deriv(DerivOrder { k1: 1, k2: 0 }),
            Quantity::Deriv(DerivOrder { k1: 0, k2: 1 }),
            Quantity::Deriv(DerivOrder { k1: 2, k2: 0 }),
            Quantity::Deriv(DerivOrder { k1: 0, k2: 2 }),
            Quantity::Deriv(DerivOrder { k1: 1, k2: 1 }),
            Quantity::DerivOverZeta(DerivOrder { k1: 0, k2: 1 }),
        ];
        for &(r, z) in &[(0.5, 0.8), (1.0, 2.0), (3.0, 1.0)] {
            let a = kernel_quantities(prof(r, z), &quantities, &spec, &with_route(Route::Radial)).unwrap();
            let b = kernel_quantities(prof(r, z), &quantities, &spec, &with_route(Route::Contour)).unwrap();
            for (x, y) in a.iter().zip(&b) {
                let (vx, vy) = (x.value(), y.value());
                assert!((vx - vy).abs() < 1e-11 * vx.abs().max(1e-3), "({r},{z}) {vx} vs {vy}");
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let spec = h1();
        let opts = KernelOptions::default();
        for &(r, z) in &[(1.0, 1.0), (0.4, 2.5)] {
            for (k1, k2) in [(1, 0), (0, 1), (2, 0), (0, 2), (1, 1)] {
                let order = DerivOrder { k1, k2 };
                let exact = kernel_deriv(prof(r, z), order, &spec).unwrap();
                let fd = kernel_deriv_fd(prof(r, z), order, &spec, 1e-2, &opts).unwrap();
                let tol = 1e-8f64.max(1e3 * exact.error());
                assert!(
                    (exact.value() - fd.value()).abs() < tol,
                    "({r},{z}) {order:?}: {} vs {}",
                    exact.value(),
                    fd.value()
                );
            }
        }
    }

    #[test]
    fn zeta_derivative_vanishes_on_axis() {
        let v = kernel_deriv(prof(1.0, 0.0), DerivOrder { k1: 0, k2: 1 }, &h1()).unwrap();
        assert_eq!(v.value(), 0.0);
        let spec = GroupSpec::radial(2, 3).unwrap();
        let q = kernel_quantities(
            prof(1.0, 0.0),
            &[Quantity::DerivOverZeta(DerivOrder { k1: 0, k2: 1 })],
            &spec,
            &KernelOptions::default(),
        )
        .unwrap();
        let small = kernel_quantities(
            prof(1.0, 1e-4),
            &[Quantity::DerivOverZeta(DerivOrder { k1: 0, k2: 1 })],
            &spec,
            &KernelOptions::default(),
        )
        .unwrap();
        assert!((q[0].value() - small[0].value()).abs() < 1e-8 * q[0].value().abs());
    }

    #[test]
    fn m3_value_matches_tensor_quadrature() {
        // int_{R^3} e^{i<l,z>} F(|l|) dl in spherical coordinates, with an
        // independent 2-D Gauss-Legendre product rule in (r, cos polar angle)
        let (n, r_big, z) = (2usize, 0.7, 1.3);
        let spec = GroupSpec::quaternionic(n).unwrap();
        let (rn, rw) = crate::quadrature::composite_rule(0.0, 40.0, 200, 16);
        let (un, uw) = crate::quadrature::gauss_legendre(64);
        let mut sum = 0.0;
        for (r, wr) in rn.iter().zip(&rw) {
            let f = (-r_big * r / r.tanh()).exp() * (r / r.sinh()).powi(n as i32);
            let inner: f64 = un.iter().zip(&uw).map(|(u, wu)| wu * (r * z * u).cos()).sum();
            sum += wr * 2.0 * PI * r * r * f * inner;
        }
        let oracle = sum / ((4.0 * PI).powi(n as i32) * (2.0 * PI).powi(3));
        let v = kernel(prof(r_big, z), 1.0, &spec).unwrap();
        assert!((v.value() / oracle - 1.0).abs() < 1e-10, "{} vs {oracle}", v.value());
    }

    #[test]
    fn time_scaling() {
        let spec = GroupSpec::radial(2, 3).unwrap();
        let opts = KernelOptions::default();
        let p = prof(0.8, 1.7);
        let a = kernel_with(p, 0.25, &spec, &opts).unwrap();
        let b = kernel_with(prof(4.0 * 0.8, 4.0 * 1.7), 1.0, &spec, &opts).unwrap();
        let lhs = a.ln();
        let rhs = b.ln() + 2.0 * (spec.n + spec.m) as f64 * 2f64.ln();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn deep_tail_is_representable() {
        let v = kernel(prof(0.0, 300.0), 1.0, &h1()).unwrap();
        let exact_ln = (1.0f64 / 4.0).ln() - PI * 300.0;
        assert!((v.ln() - exact_ln).abs() < 1e-10);
        assert_eq!(v.method, Method::ShiftedContour);
    }

    #[test]
    fn z4_example() {
        let z = 100.0;
        let lead = zone_leading(ZoneId::Z4, prof(0.0, z), DerivOrder::VALUE, &h1()).unwrap();
        assert!((lead.term.ln_abs() - ((0.25f64).ln() - PI * z)).abs() < 1e-12);
        let v = kernel(prof(0.0, z), 1.0, &h1()).unwrap();
        assert!((v.ln() - lead.term.ln_abs()).abs() < 1e-12);
    }

    #[test]
    fn z1_trivial_ratio() {
        let l = zone_leading(ZoneId::Z1, prof(10.0, 10.0), DerivOrder::VALUE, &h1()).unwrap();
        assert_eq!(l.term.mantissa, 1.0);
        let l = zone_leading(ZoneId::Z1, prof(10.0, 10.0), DerivOrder { k1: 1, k2: 0 }, &h1()).unwrap();
        let y = crate::specialfn::theta_inv(1.0);
        assert!((l.term.mantissa + y / y.tan()).abs() < 1e-14);
    }

    #[test]
    fn expansion_bookkeeping() {
        // d_zeta G_nu(r zeta) = -zeta r^2 G_{nu+1}
        assert_eq!(radial_zeta_expansion(1, false), vec![(1, 1, -1.0)]);
        assert_eq!(radial_zeta_expansion(1, true), vec![(0, 1, -1.0)]);
        let two = radial_zeta_expansion(2, false);
        assert!(two.contains(&(0, 1, -1.0)) && two.contains(&(2, 2, 1.0)));
        // m = 3: -L'/zeta
        assert_eq!(line_expansion(3, 0, false), vec![(1, 1, -1.0)]);
    }

    #[test]
    fn even_centre_far_zone_stays_positive() {
        // the real-axis route cancels to a negative value here
        let spec = GroupSpec::radial(1, 2).unwrap();
        let p = RadialProfile::new(2.816360724101314, 21.74705954900979).unwrap();
        let v = kernel(p, 1.0, &spec).unwrap();
        assert_eq!(v.method, Method::ShiftedContour);
        assert!(v.mantissa > 0.0 && v.relative_error() < 1e-12);
        let near = RadialProfile::new(0.1, 8.0).unwrap();
        let a = kernel_with(near, 1.0, &spec, &KernelOptions { route: Route::Contour, ..Default::default() }).unwrap();
        let b = kernel_with(near, 1.0, &spec, &KernelOptions { route: Route::Radial, ..Default::default() }).unwrap();
        assert!((a.ratio(&b) - 1.0).abs() < 3.0 * b.relative_error());
    }
}
