//! Entropy, Dirichlet energy and mass of test functions against Haar, heat
//! and Gaussian-like measures on concrete groups, and the inequality
//! verifiers built on them.
//!
//! Integrals are tensor-product Gauss–Legendre sums in full exponential
//! coordinates. Each test function is integrated in its own chart
//! `g = c g'` (Haar measure is left invariant), on a box centred at the peak
//! of `f^2 rho` found from the log-gradient of the density `rho` at `c`.

use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::testfn::TestFunction;
use crate::error::{invalid, Error, Result};
use crate::geometry::{group_mul, horizontal_grad_sq, sr_distance, GroupSpec, Model, Point, RadialProfile};
use crate::heatkernel::{kernel_quantities, kernel_with, DerivOrder, KernelOptions, Quantity};
use crate::quadrature::composite_rule;

/// Reference measure for the functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Measure {
    Haar,
    /// The heat kernel measure `p_t dmu`.
    Heat { t: f64 },
    /// `exp(-d(g)^2 / 2) dmu`.
    GaussianLike,
}

impl Measure {
    fn validate(&self) -> Result<()> {
        if let Measure::Heat { t } = self {
            if !(*t > 0.0 && t.is_finite()) {
                return Err(invalid("t", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// `log` of the density against Haar measure.
    pub fn log_density(&self, spec: &GroupSpec, g: &Point, opts: &KernelOptions) -> Result<f64> {
        match *self {
            Measure::Haar => Ok(0.0),
            Measure::Heat { t } => Ok(kernel_with(g.profile(), t, spec, opts)?.ln()),
            Measure::GaussianLike => {
                let d = sr_distance(g.profile());
                Ok(-2.0 * d.d2_quarter)
            }
        }
    }

    /// Half-widths of the box carrying all but a negligible part of the
    /// measure, and the smallest feature scale, in `x` and `z`.
    fn support(&self) -> Option<([f64; 2], [f64; 2])> {
        match *self {
            Measure::Haar => None,
            Measure::Heat { t } => Some(([10.5 * t.sqrt(), 14.0 * t], [1.4 * t.sqrt(), 0.6 * t])),
            Measure::GaussianLike => Some(([7.0, 9.0], [1.0, 0.5])),
        }
    }

    /// Variance of the Gaussian profile of the measure in a horizontal
    /// coordinate.
    fn x_variance(&self) -> Option<f64> {
        match *self {
            Measure::Haar => None,
            Measure::Heat { t } => Some(2.0 * t),
            Measure::GaussianLike => Some(1.0),
        }
    }
}

/// Relative accuracy of entropy and Dirichlet energy under the default
/// [`TensorOptions`], from comparisons against finer rules and closed forms.
pub const TENSOR_RELATIVE_ACCURACY: f64 = 1e-5;

/// Resolution of the tensor rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorOptions {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Panel width in units of the local feature scale.
    pub panel_scale: f64,
    /// Box half-width in units of the test function's scale.
    pub box_widths: f64,
    /// Step of the finite-difference horizontal gradient.
    pub fd_step: f64,
    /// Largest tolerated share of `int f^2 rho` on the end-node slabs.
    pub boundary_tolerance: f64,
    #[serde(skip)]
    pub kernel: KernelOptions,
}

impl Default for TensorOptions {
    fn default() -> Self {
        Self {
            order: 8,
            panel_scale: 3.5,
            box_widths: 6.5,
            fd_step: 1e-4,
            boundary_tolerance: 1e-7,
            kernel: KernelOptions {
                quad: crate::quadrature::QuadOptions {
                    rel_tol: 1e-11,
                    ..KernelOptions::default().quad
                },
                ..KernelOptions::default()
            },
        }
    }
}

/// Normalised entropy and Dirichlet energy of a test function.
///
/// For `f~ = f / sqrt(mass)` these are `int f~^2 log f~^2 drho` and
/// `int |grad f~|^2 drho`; `mass = int f^2 drho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub mass: f64,
    pub entropy: f64,
    pub dirichlet: f64,
    /// Share of `int f^2 rho` carried by the end-node slabs of the box.
    pub boundary_fraction: f64,
    pub nodes: usize,
}

struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// The two end nodes.
    edge: Vec<bool>,
}

fn axis(lo: f64, hi: f64, scale: f64, opts: &TensorOptions) -> Axis {
    let panels = (((hi - lo) / (opts.panel_scale * scale)).ceil() as usize).max(2);
    let (nodes, weights) = composite_rule(lo, hi, panels, opts.order);
    let total = nodes.len();
    let edge = (0..total).map(|i| i == 0 || i + 1 == total).collect();
    Axis { nodes, weights, edge }
}

/// Build the per-axis rules for `f^2 rho` in the chart of `f`.
fn build_rule(
    f: &TestFunction,
    measure: &Measure,
    spec: &GroupSpec,
    opts: &TensorOptions,
) -> Result<(Point, Vec<Axis>)> {
    let (center, scales) = f.chart(spec);
    let nx = 2 * spec.n;
    let dim = spec.dim();
    let support = measure.support();
    let at_identity = center.x.iter().chain(&center.z).all(|v| *v == 0.0);

    let mut axes = Vec::with_capacity(dim);
    match scales {
        Some((sx, sz)) => {
            // tilt of log rho across the chart
            let h = 1e-3;
            let mut grad = vec![0.0; dim];
            if !matches!(measure, Measure::Haar) {
                for (k, slot) in grad.iter_mut().enumerate() {
                    let shifted = |s: f64| -> Result<f64> {
                        let mut p = Point::identity(spec);
                        if k < nx {
                            p.x[k] = s;
                        } else {
                            p.z[k - nx] = s;
                        }
                        measure.log_density(spec, &group_mul(spec, &center, &p)?, &opts.kernel)
                    };
                    *slot = (shifted(h)? - shifted(-h)?) / (2.0 * h);
                }
            }
            for (k, g) in grad.iter().enumerate() {
                let s = if k < nx { sx } else { sz };
                let peak = (0.5 * s * s * g).clamp(-4.0 * s, 4.0 * s);
                let mut lo = peak - opts.box_widths * s;
                let mut hi = peak + opts.box_widths * s;
                let mut feature = s / std::f64::consts::SQRT_2;
                if let (true, Some((half, scale))) = (at_identity, support) {
                    let i = if k < nx { 0 } else { 1 };
                    lo = lo.max(-half[i]);
                    hi = hi.min(half[i]);
                    feature = feature.min(scale[i]);
                }
                axes.push(axis(lo, hi, feature, opts));
            }
        }
        None => {
            let (half, scale) = support.ok_or_else(|| {
                Error::Domain(format!("{} is not square integrable against Haar measure", f.label()))
            })?;
            let (lambda, direction) = match f {
                TestFunction::Exponential { lambda, direction } => (*lambda, *direction),
                _ => unreachable!("only exponentials lack a scale"),
            };
            let var = measure.x_variance().unwrap_or(1.0);
            for k in 0..dim {
                let i = if k < nx { 0 } else { 1 };
                let shift = if k == direction { lambda * var } else { 0.0 };
                // the z spread conditional on |x| grows with the tilt
                let widen = if k < nx { 1.0 } else { 1.0 + 0.25 * lambda * var.sqrt() };
                let w = half[i] * widen;
                axes.push(axis(shift - w, shift + w, scale[i], opts));
            }
        }
    }
    Ok((center, axes))
}

/// Map a flat tensor index to a chart point and its weight.
fn node(axes: &[Axis], nx: usize, mut idx: usize) -> (Point, f64, bool) {
    let dim = axes.len();
    let mut coords = vec![0.0; dim];
    let mut w = 1.0;
    let mut edge = false;
    for k in (0..dim).rev() {
        let len = axes[k].nodes.len();
        let i = idx % len;
        idx /= len;
        coords[k] = axes[k].nodes[i];
        w *= axes[k].weights[i];
        edge |= axes[k].edge[i];
    }
    let z = coords.split_off(nx);
    (Point::new(coords, z), w, edge)
}

fn require_quadrature_model(spec: &GroupSpec) -> Result<()> {
    if spec.model == Model::RadialOnly {
        return Err(Error::ModelMismatch(
            "functionals need a concrete group law".into(),
        ));
    }
    if spec.dim() > 5 {
        return Err(Error::ModelMismatch(format!(
            "tensor quadrature is limited to dimension <= 5, got {}; use the Monte Carlo estimator",
            spec.dim()
        )));
    }
    Ok(())
}

/// Entropy, Dirichlet energy and mass of `f` against `measure`.
pub fn entropy_and_dirichlet(
    f: &TestFunction,
    measure: &Measure,
    spec: &GroupSpec,
    opts: &TensorOptions,
) -> Result<Functionals> {
    measure.validate()?;
    require_quadrature_model(spec)?;
    if matches!(measure, Measure::Haar) && !f.haar_integrable() {
        return Err(Error::Domain(format!(
            "{} is not square integrable against Haar measure",
            f.label()
        )));
    }
    if let TestFunction::Transported { t: tf, .. } = f {
        return match measure {
            Measure::Heat { t } if t == tf => transported_functionals(f, *t, spec, opts),
            _ => Err(Error::Domain(format!(
                "{} is only integrated against its own heat measure",
                f.label()
            ))),
        };
    }
    let (center, axes) = build_rule(f, measure, spec, opts)?;
    let total: usize = axes.iter().map(|a| a.nodes.len()).product();
    let nx = 2 * spec.n;
    let logf = |g: &Point| f.log_eval(spec, g).unwrap_or(f64::NEG_INFINITY);
    let fval = |g: &Point| logf(g).exp();

    let sums = (0..total)
        .into_par_iter()
        .map(|idx| -> Result<[f64; 4]> {
            let (local, w, edge) = node(&axes, nx, idx);
            let g = group_mul(spec, &center, &local)?;
            let lf = logf(&g);
            let lrho = measure.log_density(spec, &g, &opts.kernel)?;
            let f2rho = (2.0 * lf + lrho).exp();
            if f2rho == 0.0 {
                return Ok([0.0; 4]);
            }
            let grad = horizontal_grad_sq(spec, &fval, &g, opts.fd_step)?;
            let rho = lrho.exp();
            Ok([
                w * f2rho,
                w * f2rho * 2.0 * lf,
                w * grad * rho,
                if edge { w * f2rho } else { 0.0 },
            ])
        })
        .try_reduce(|| [0.0; 4], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]))?;
    let [mass, ent_raw, dir_raw, edge_mass] = sums;
    finish(f, mass, ent_raw, dir_raw, edge_mass, total, opts)
}

fn finish(
    f: &TestFunction,
    mass: f64,
    ent_raw: f64,
    dir_raw: f64,
    edge_mass: f64,
    nodes: usize,
    opts: &TensorOptions,
) -> Result<Functionals> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::NonFinite(format!("mass of {} is {mass}", f.label())));
    }
    let boundary_fraction = edge_mass / mass;
    if boundary_fraction > opts.boundary_tolerance {
        return Err(Error::MassDeficit {
            deficit: boundary_fraction,
            tolerance: opts.boundary_tolerance,
        });
    }
    Ok(Functionals {
        mass,
        entropy: ent_raw / mass - mass.ln(),
        dirichlet: dir_raw / mass,
        boundary_fraction,
        nodes,
    })
}

// ---------------------------------------------------------------------------
// verifiers

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginEntry {
    pub label: String,
    pub function: TestFunction,
    pub entropy: f64,
    pub dirichlet: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub entries: Vec<MarginEntry>,
    pub min_margin: f64,
    /// Labels of entries with margin below `-tolerance`.
    pub violations: Vec<String>,
    pub tolerance: f64,
}

impl MarginReport {
    fn from_entries(entries: Vec<MarginEntry>, tolerance: f64) -> Self {
        let min_margin = entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min);
        let violations = entries
            .iter()
            .filter(|e| e.margin < -tolerance)
            .map(|e| e.label.clone())
            .collect();
        Self {
            entries,
            min_margin,
            violations,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Default tolerance on negative margins.
pub const MARGIN_TOLERANCE: f64 = 1e-6;

fn margins(
    family: &[TestFunction],
    measure: &Measure,
    spec: &GroupSpec,
    opts: &TensorOptions,
    margin: impl Fn(&Functionals) -> f64,
) -> Result<MarginReport> {
    let entries = family
        .iter()
        .map(|f| {
            let fun = entropy_and_dirichlet(f, measure, spec, opts)?;
            Ok(MarginEntry {
                label: f.label(),
                function: f.clone(),
                entropy: fun.entropy,
                dirichlet: fun.dirichlet,
                margin: margin(&fun),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginReport::from_entries(entries, MARGIN_TOLERANCE))
}

/// Margins `eta + theta t Dir(f) - Ent(f)` of the defective log-Sobolev
/// inequality for the heat measure `p_t dmu`, on unit-mass normalisations.
pub fn dls_verify(
    theta: f64,
    eta: f64,
    t: f64,
    family: &[TestFunction],
    spec: &GroupSpec,
    opts: &TensorOptions,
) -> Result<MarginReport> {
    margins(family, &Measure::Heat { t }, spec, opts, |f| {
        eta + theta * t * f.dirichlet - f.entropy
    })
}

/// Margins of the Euclidean-type log-Sobolev inequality for Haar measure,
/// `(n+m) log(C_{n,m} Dir(f)) - Ent(f)`.
pub fn log_form_verify(family: &[TestFunction], spec: &GroupSpec, opts: &TensorOptions) -> Result<MarginReport> {
    let c = super::sobolev_const(spec.n, spec.m)?;
    let k = (spec.n + spec.m) as f64;
    let haar: Vec<TestFunction> = family.iter().filter(|f| f.haar_integrable()).cloned().collect();
    margins(&haar, &Measure::Haar, spec, opts, |f| k * (c * f.dirichlet).ln() - f.entropy)
}

/// Margins of `Ent(f) <= eta + theta Dir(f)` for `exp(-d^2/2) dmu`.
pub fn distance_lsi_verify(
    theta: f64,
    eta: f64,
    family: &[TestFunction],
    spec: &GroupSpec,
    opts: &TensorOptions,
) -> Result<MarginReport> {
    margins(family, &Measure::GaussianLike, spec, opts, |f| eta + theta * f.dirichlet - f.entropy)
}

/// `xi = log p_t`, `|grad xi|^2` and `Lap xi` at a radial profile, from
/// `|grad xi|^2 = R (xi_R^2 + xi_z^2)` and
/// `Lap p = n p_R + R p_RR + R p_zz + (m-1) (R/|z|) p_z`.
fn log_kernel_terms(
    prof: RadialProfile,
    t: f64,
    spec: &GroupSpec,
    opts: &KernelOptions,
) -> Result<(f64, f64, f64)> {
    let d = |k1, k2| DerivOrder { k1, k2 };
    let scaled = prof.dilated(1.0 / t.sqrt());
    let mut qs = vec![
        Quantity::Deriv(d(0, 0)),
        Quantity::Deriv(d(1, 0)),
        Quantity::Deriv(d(0, 1)),
        Quantity::Deriv(d(2, 0)),
        Quantity::Deriv(d(0, 2)),
    ];
    if spec.m > 1 && scaled.zeta == 0.0 {
        qs.push(Quantity::DerivOverZeta(d(0, 1)));
    }
    let ev = kernel_quantities(scaled, &qs, spec, &opts)?;
    let n = spec.n as f64;
    let m = spec.m as f64;
    let xi = ev[0].ln() - (n + m) * t.ln();
    let ratio = |i: usize| ev[i].mantissa / ev[0].mantissa;
    let (a, b, c, dd) = (ratio(1), ratio(2), ratio(3), ratio(4));
    let e = match (spec.m > 1, scaled.zeta > 0.0) {
        (false, _) => 0.0,
        (true, true) => b / scaled.zeta,
        (true, false) => ratio(5),
    };
    let r = scaled.r;
    let grad_xi_sq = r * (a * a + b * b);
    let lap_over = n * a + r * c + r * dd + (m - 1.0) * r * e;
    Ok((xi, grad_xi_sq / t, (lap_over - grad_xi_sq) / t))
}

/// Functionals of `b p_t^{-1/2}` against `p_t dmu`, written as Haar
/// integrals of `b^2` against `-xi` and `|grad xi|^2 / 4 + Lap xi / 2`.
fn transported_functionals(
    f: &TestFunction,
    t: f64,
    spec: &GroupSpec,
    opts: &TensorOptions,
) -> Result<Functionals> {
    let (center, width) = match f {
        TestFunction::Transported { center, width, .. } => (center.clone(), *width),
        _ => unreachable!("caller checks the variant"),
    };
    let bump = TestFunction::bump(center, width)?;
    let (center, axes) = build_rule(&bump, &Measure::Haar, spec, opts)?;
    let total: usize = axes.iter().map(|a| a.nodes.len()).product();
    let nx = 2 * spec.n;
    let bval = |p: &Point| bump.eval(spec, p).unwrap_or(f64::NAN);
    let sums = (0..total)
        .into_par_iter()
        .map(|idx| -> Result<[f64; 5]> {
            let (local, w, edge) = node(&axes, nx, idx);
            let g = group_mul(spec, &center, &local)?;
            let lb = bump.log_eval(spec, &g)?;
            let b2 = (2.0 * lb).exp();
            if b2 == 0.0 {
                return Ok([0.0; 5]);
            }
            let (xi, grad_xi_sq, lap_xi) = log_kernel_terms(g.profile(), t, spec, &opts.kernel)?;
            let grad_b = horizontal_grad_sq(spec, &bval, &g, opts.fd_step)?;
            Ok([
                w * b2,
                w * b2 * (2.0 * lb - xi),
                w * (grad_b + b2 * (0.25 * grad_xi_sq + 0.5 * lap_xi)),
                if edge { w * b2 } else { 0.0 },
                0.0,
            ])
        })
        .try_reduce(
            || [0.0; 5],
            |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], 0.0]),
        )?;
    finish(f, sums[0], sums[1], sums[2], sums[3], total, opts)
}

/// Residuals of the ground-state transform identities for `g = f rho^{1/2}`
/// with `rho = p_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateResidual {
    /// `int g^2 log g^2` and `int f^2 log f^2 rho + int g^2 xi`.
    pub entropy_lhs: f64,
    pub entropy_rhs: f64,
    /// `int |grad g|^2` and
    /// `int |grad f|^2 rho - (1/4) int g^2 |grad xi|^2 - (1/2) int g^2 Lap xi`.
    pub dirichlet_lhs: f64,
    pub dirichlet_rhs: f64,
    pub entropy_residual: f64,
    pub dirichlet_residual: f64,
}

/// Check both ground-state identities by quadrature.
///
/// The left-hand gradient `grad g` is a finite difference of `f p_1^{1/2}`
/// along the horizontal flows; the right-hand side uses the radial formulas
/// `|grad xi|^2 = R (xi_R^2 + xi_z^2)` and
/// `Lap p = n p_R + R p_RR + R p_zz + (m-1) (R/|z|) p_z`.
pub fn groundstate_check(f: &TestFunction, spec: &GroupSpec, opts: &TensorOptions) -> Result<GroundStateResidual> {
    require_quadrature_model(spec)?;
    let measure = Measure::Heat { t: 1.0 };
    let (center, axes) = build_rule(f, &measure, spec, opts)?;
    let total: usize = axes.iter().map(|a| a.nodes.len()).product();
    let nx = 2 * spec.n;
    let g_fn = |p: &Point| -> f64 {
        let lf = f.log_eval(spec, p).unwrap_or(f64::NEG_INFINITY);
        match kernel_with(p.profile(), 1.0, spec, &opts.kernel) {
            Ok(k) => (lf + 0.5 * k.ln()).exp(),
            Err(_) => f64::NAN,
        }
    };

    let sums = (0..total)
        .into_par_iter()
        .map(|idx| -> Result<[f64; 6]> {
            let (local, w, _) = node(&axes, nx, idx);
            let g = group_mul(spec, &center, &local)?;
            let prof = g.profile();
            let lf = f.log_eval(spec, &g)?;
            let (xi, grad_xi_sq, lap_xi) = log_kernel_terms(prof, 1.0, spec, &opts.kernel)?;
            let g2 = (2.0 * lf + xi).exp();
            if g2 == 0.0 {
                return Ok([0.0; 6]);
            }
            let fval = |p: &Point| f.eval(spec, p).unwrap_or(f64::NAN);
            let grad_f = horizontal_grad_sq(spec, &fval, &g, opts.fd_step)?;
            let grad_g = horizontal_grad_sq(spec, &g_fn, &g, opts.fd_step)?;
            let rho = xi.exp();
            Ok([
                w * g2 * (2.0 * lf + xi),
                w * g2 * 2.0 * lf,
                w * g2 * xi,
                w * grad_g,
                w * grad_f * rho,
                w * g2 * (0.25 * grad_xi_sq + 0.5 * lap_xi),
            ])
        })
        .try_reduce(
            || [0.0; 6],
            |a, b| {
                let mut out = [0.0; 6];
                for i in 0..6 {
                    out[i] = a[i] + b[i];
                }
                Ok(out)
            },
        )?;
    let entropy_lhs = sums[0];
    let entropy_rhs = sums[1] + sums[2];
    let dirichlet_lhs = sums[3];
    let dirichlet_rhs = sums[4] - sums[5];
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    Ok(GroundStateResidual {
        entropy_lhs,
        entropy_rhs,
        dirichlet_lhs,
        dirichlet_rhs,
        entropy_residual: rel(entropy_lhs, entropy_rhs),
        dirichlet_residual: rel(dirichlet_lhs, dirichlet_rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> GroupSpec {
        GroupSpec::heisenberg(1).unwrap()
    }

    #[test]
    fn haar_bump_closed_form() {
        // f^2 = exp(-|x|^2/w^2 - z^2/w^4): mass = pi w^2 * sqrt(pi) w^2
        let spec = h1();
        let w = 0.8;
        let f = TestFunction::bump(Point::identity(&spec), w).unwrap();
        let r = entropy_and_dirichlet(&f, &Measure::Haar, &spec, &TensorOptions::default()).unwrap();
        let pi = std::f64::consts::PI;
        let mass = pi.powf(1.5) * w.powi(4);
        assert!((r.mass / mass - 1.0).abs() < 1e-6, "{}", r.mass / mass - 1.0);
        // int f^2 log f^2 / mass = -(2/2 + 1/2) = -3/2
        assert!((r.entropy - (-1.5 - mass.ln())).abs() < 1e-6);
    }

    #[test]
    fn constant_is_entropy_free_under_heat_measure() {
        // exp(0 * x_1 / 2) = 1
        let spec = h1();
        let f = TestFunction::exponential(0.0, 0).unwrap();
        let r = entropy_and_dirichlet(&f, &Measure::Heat { t: 1.0 }, &spec, &TensorOptions::default()).unwrap();
        assert!((r.mass - 1.0).abs() < 1e-6, "{}", r.mass);
        assert!(r.entropy.abs() < 1e-6);
        assert!(r.dirichlet.abs() < 1e-12);
    }

    #[test]
    fn haar_rejects_exponential() {
        let spec = h1();
        let f = TestFunction::exponential(1.0, 0).unwrap();
        assert!(entropy_and_dirichlet(&f, &Measure::Haar, &spec, &TensorOptions::default()).is_err());
    }
}
