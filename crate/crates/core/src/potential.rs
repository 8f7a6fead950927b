//! The ground-state potential
//! `W_{t,C} = (C/4)|grad xi_t|^2 + (C/2) Lap xi_t + xi_t` with `xi_t = log p_t`,
//! evaluated from the radial kernel derivatives, its behaviour along rays and
//! its global minimum.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fit::{least_squares, LinearFit};
use crate::geometry::{sr_distance, GroupSpec, RadialProfile};
use crate::heatkernel::{kernel_quantities, DerivOrder, KernelEval, KernelOptions, Method, Quantity};
use crate::optimize::{nelder_mead, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialParams {
    pub c: f64,
    pub t: f64,
}

impl PotentialParams {
    pub fn new(c: f64, t: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("C", format!("must be finite and > 0, got {c}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", format!("must be finite and > 0, got {t}")));
        }
        Ok(Self { c, t })
    }
}

/// The pieces of `W_{1,C}` at one profile: `W_{1,C} = C * affine + log_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WParts {
    pub profile: RadialProfile,
    /// `log p_1`.
    pub log_p: f64,
    /// `(1/4)|grad xi|^2 + (1/2) Lap xi` in radial form.
    pub affine: f64,
    pub log_p_error: f64,
    pub affine_error: f64,
    pub method: Method,
}

impl WParts {
    pub fn w(&self, c: f64) -> f64 {
        c * self.affine + self.log_p
    }

    pub fn w_error(&self, c: f64) -> f64 {
        c * self.affine_error + self.log_p_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WEval {
    pub value: f64,
    pub error: f64,
    pub method: Method,
}

/// Kernel quantities needed for `W` at a profile of a group with centre
/// dimension `m`.
fn quantities_for(m: usize, zeta: f64) -> Vec<Quantity> {
    let d = |k1, k2| DerivOrder { k1, k2 };
    let mut q = vec![
        Quantity::Deriv(d(0, 0)),
        Quantity::Deriv(d(1, 0)),
        Quantity::Deriv(d(0, 1)),
        Quantity::Deriv(d(2, 0)),
        Quantity::Deriv(d(0, 2)),
    ];
    if m > 1 && zeta == 0.0 {
        q.push(Quantity::DerivOverZeta(d(0, 1)));
    }
    q
}

/// Evaluate the parts of `W_{1,C}` at a profile.
///
/// With `a, b, c, d` the ratios `p_{1,1,0}, p_{1,0,1}, p_{1,2,0}, p_{1,0,2}`
/// over `p_1` and `e = p_{1,0,1} / (|z| p_1)`:
///
/// ```text
/// affine = -(R/4)(a^2 + b^2) + (R/2)(c + d) + (n/2) a + ((m-1) R / 2) e
/// ```
///
/// On the axis `z = 0` the quotient `e` is evaluated from its regular
/// analytic limit rather than by extrapolation.
pub fn w_parts(profile: RadialProfile, spec: &GroupSpec, opts: &KernelOptions) -> Result<WParts> {
    let qs = quantities_for(spec.m, profile.zeta);
    let ev = kernel_quantities(profile, &qs, spec, opts)?;
    let p = &ev[0];
    if !(p.mantissa > 0.0) {
        return Err(Error::NonFinite(format!(
            "kernel mantissa {} is not positive at R = {}, |z| = {}",
            p.mantissa, profile.r, profile.zeta
        )));
    }
    let ratio = |e: &KernelEval| e.mantissa / p.mantissa;
    let ratio_err = |e: &KernelEval| (e.abs_error + e.mantissa.abs() * p.relative_error()) / p.mantissa;
    let (a, b, c, d) = (ratio(&ev[1]), ratio(&ev[2]), ratio(&ev[3]), ratio(&ev[4]));
    let (ea, eb, ec, ed) = (ratio_err(&ev[1]), ratio_err(&ev[2]), ratio_err(&ev[3]), ratio_err(&ev[4]));
    let r = profile.r;
    let n = spec.n as f64;
    let m = spec.m as f64;
    let mut affine = -0.25 * r * (a * a + b * b) + 0.5 * r * (c + d) + 0.5 * n * a;
    let mut err = 0.5 * r * (a.abs() * ea + b.abs() * eb) + 0.5 * r * (ec + ed) + 0.5 * n * ea;
    if spec.m > 1 {
        let (e, ee) = if profile.zeta > 0.0 {
            (b / profile.zeta, eb / profile.zeta)
        } else {
            (ratio(&ev[5]), ratio_err(&ev[5]))
        };
        affine += 0.5 * (m - 1.0) * r * e;
        err += 0.5 * (m - 1.0) * r * ee;
    }
    Ok(WParts {
        profile,
        log_p: p.ln(),
        affine,
        log_p_error: p.relative_error(),
        affine_error: err,
        method: p.method,
    })
}

/// `W_{t,C}` through `W_{t,C}(R, |z|) = W_{1,C/t}(R/t, |z|/t) - (n+m) log t`.
pub fn w_potential(profile: RadialProfile, params: PotentialParams, spec: &GroupSpec) -> Result<WEval> {
    w_potential_with(profile, params, spec, &KernelOptions::default())
}

pub fn w_potential_with(
    profile: RadialProfile,
    params: PotentialParams,
    spec: &GroupSpec,
    opts: &KernelOptions,
) -> Result<WEval> {
    let params = PotentialParams::new(params.c, params.t)?;
    let profile = RadialProfile::new(profile.r, profile.zeta)?;
    let t = params.t;
    let unit = RadialProfile {
        r: profile.r / t,
        zeta: profile.zeta / t,
    };
    let parts = w_parts(unit, spec, opts)?;
    let c = params.c / t;
    Ok(WEval {
        value: parts.w(c) - (spec.n + spec.m) as f64 * t.ln(),
        error: parts.w_error(c),
        method: parts.method,
    })
}

// ---------------------------------------------------------------------------
// boundedness along rays

/// A ray `|z| = omega R` in the reduced coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ray {
    pub omega: f64,
}

impl Ray {
    pub const AXIS: Ray = Ray { omega: 0.0 };

    pub fn at(&self, r: f64) -> RadialProfile {
        RadialProfile {
            r,
            zeta: self.omega * r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DivergesToMinusInfinity,
    Stabilizing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSample {
    pub r: f64,
    pub zeta: f64,
    pub d2: f64,
    pub w: f64,
    pub w_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub c: f64,
    pub ray: Ray,
    pub samples: Vec<ProbeSample>,
    /// Fit `W ~ a d^2/16 + b log|x| + c0`; `a` should approach `C - 4`.
    pub fit: LinearFit,
    pub d2_coefficient: f64,
    pub log_coefficient: f64,
    /// Whether `W` decreases monotonically along the samples.
    pub monotone_decreasing: bool,
    pub verdict: Verdict,
}

/// Threshold on the fitted `d^2/16` coefficient above which a ray is called
/// stabilizing.
pub const STABILIZING_THRESHOLD: f64 = 0.05;

/// Tabulate `W_{1,C}` along a ray over `R in [r_lo, r_hi]` (log-spaced) and
/// classify its behaviour from a least-squares fit.
pub fn boundedness_probe(
    c: f64,
    spec: &GroupSpec,
    ray: Ray,
    range: (f64, f64),
    points: usize,
    opts: &KernelOptions,
) -> Result<ProbeReport> {
    PotentialParams::new(c, 1.0)?;
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid("range", format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    if points < 4 {
        return Err(invalid("points", "need at least 4 samples for the fit"));
    }
    if !(ray.omega >= 0.0 && ray.omega.is_finite()) {
        return Err(invalid("ray", "omega must be finite and >= 0"));
    }
    let samples: Vec<ProbeSample> = (0..points)
        .into_par_iter()
        .map(|i| {
            let r = lo * (hi / lo).powf(i as f64 / (points - 1) as f64);
            let prof = ray.at(r);
            let parts = w_parts(prof, spec, opts)?;
            let d = sr_distance(prof);
            Ok(ProbeSample {
                r,
                zeta: prof.zeta,
                d2: d.d * d.d,
                w: parts.w(c),
                w_error: parts.w_error(c),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| vec![s.d2 / 16.0, (2.0 * s.r.sqrt()).ln(), 1.0])
        .collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.w).collect();
    let fit = least_squares(&rows, &ys).ok_or_else(|| Error::Domain("degenerate fit design".into()))?;
    let monotone_decreasing = samples.windows(2).all(|w| w[1].w < w[0].w);
    let a = fit.coefficients[0];
    let verdict = if a > STABILIZING_THRESHOLD {
        Verdict::Stabilizing
    } else {
        Verdict::DivergesToMinusInfinity
    };
    Ok(ProbeReport {
        c,
        ray,
        d2_coefficient: a,
        log_coefficient: fit.coefficients[1],
        samples,
        fit,
        monotone_decreasing,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// global minimum

/// Search rectangle `[0, r_max] x [0, zeta_max]` in `(R, |z|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBox {
    pub r_max: f64,
    pub zeta_max: f64,
}

impl SearchBox {
    pub fn new(r_max: f64, zeta_max: f64) -> Result<Self> {
        if !(r_max > 0.0 && zeta_max > 0.0 && r_max.is_finite() && zeta_max.is_finite()) {
            return Err(invalid("box", "both extents must be finite and > 0"));
        }
        Ok(Self { r_max, zeta_max })
    }

    /// Default box for `W_{1,theta}`: where `(theta - 4) d^2 / 16` alone
    /// clears the values near the origin by a wide margin.
    pub fn default_for(theta: f64) -> Self {
        let s = 8.0 + 24.0 / (theta - 4.0);
        Self {
            r_max: s,
            zeta_max: s,
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            r_max: self.r_max * f,
            zeta_max: self.zeta_max * f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinWOptions {
    /// Grid nodes per axis, in `sqrt R` and `sqrt |z|`.
    pub grid: usize,
    /// Number of grid local minima refined by the simplex search.
    pub starts: usize,
    /// Argument tolerance of the refinement, in `(R, |z|)`.
    pub x_tol: f64,
    /// Maximum number of box doublings while certification fails.
    pub max_growths: usize,
    pub kernel: KernelOptions,
}

impl Default for MinWOptions {
    fn default() -> Self {
        Self {
            grid: 200,
            starts: 4,
            x_tol: 1e-6,
            max_growths: 4,
            kernel: KernelOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinWResult {
    pub theta: f64,
    pub min_value: f64,
    pub min_error: f64,
    pub argmin: RadialProfile,
    pub search_box: SearchBox,
    /// Grid spacing in `(sqrt R, sqrt |z|)`.
    pub grid_resolution: [f64; 2],
    /// Smallest `W - min_value` over the box boundary and its dilations.
    pub tail_margin: f64,
    pub certified: bool,
    pub evaluations: usize,
}

/// Tail certificate threshold: `W` outside the box must exceed the minimum
/// by at least this much.
pub const TAIL_MARGIN: f64 = 1.0;

/// Minimise `W_{1,theta}` over reduced coordinates.
///
/// A deterministic grid in `(sqrt R, sqrt |z|)` (so that the axes `R = 0` and
/// `z = 0` are grid lines) locates candidate basins, the best few are refined
/// by Nelder–Mead, and the result is certified heuristically by checking
/// that `W` on the box boundary and on its dilations by 2 and 4 stays at
/// least [`TAIL_MARGIN`] above the minimum and keeps increasing outward.
/// The box is doubled up to `max_growths` times until that holds; if it
/// never does, the result is returned with `certified = false`.
pub fn min_w(
    theta: f64,
    spec: &GroupSpec,
    search_box: Option<SearchBox>,
    opts: &MinWOptions,
) -> Result<MinWResult> {
    if !(theta > 4.0 && theta.is_finite()) {
        return Err(invalid("theta", format!("must be finite and > 4, got {theta}")));
    }
    if opts.grid < 4 {
        return Err(invalid("grid", "need at least 4 nodes per axis"));
    }
    let mut bx = search_box.unwrap_or_else(|| SearchBox::default_for(theta));
    let mut growths = 0;
    loop {
        let result = min_w_in_box(theta, spec, bx, opts)?;
        if result.certified || growths >= opts.max_growths {
            return Ok(result);
        }
        growths += 1;
        bx = bx.scaled(2.0);
    }
}

fn min_w_in_box(theta: f64, spec: &GroupSpec, bx: SearchBox, opts: &MinWOptions) -> Result<MinWResult> {
    let g = opts.grid;
    let (umax, vmax) = (bx.r_max.sqrt(), bx.zeta_max.sqrt());
    let (du, dv) = (umax / (g - 1) as f64, vmax / (g - 1) as f64);
    let eval = |r: f64, z: f64| -> Result<WParts> {
        w_parts(RadialProfile { r, zeta: z }, spec, &opts.kernel)
    };

    let values: Vec<f64> = (0..g * g)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / g, idx % g);
            let (u, v) = (i as f64 * du, j as f64 * dv);
            eval(u * u, v * v).map(|p| p.w(theta))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = g * g;

    // grid local minima, best first
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let v = values[i * g + j];
            let mut is_min = true;
            for (di, dj) in [(-1i64, -1i64), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a >= 0 && b >= 0 && (a as usize) < g && (b as usize) < g && values[a as usize * g + b as usize] < v {
                    is_min = false;
                    break;
                }
            }
            if is_min {
                candidates.push((v, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    candidates.truncate(opts.starts.max(1));

    // refinement in (u, v); W is even in both, so |u|, |v| keeps R, |z| >= 0
    let simplex_opts = SimplexOptions {
        x_tol: opts.x_tol / (2.0 * umax.max(vmax)).max(1.0),
        f_tol: 1e-12,
        max_evaluations: 600,
    };
    let mut best: Option<(f64, f64, f64, f64)> = None; // (value, error, R, zeta)
    for &(_, i, j) in &candidates {
        let start = [i as f64 * du, j as f64 * dv];
        let res = nelder_mead(
            |x| {
                let (u, v) = (x[0].abs().min(umax), x[1].abs().min(vmax));
                eval(u * u, v * v).map(|p| p.w(theta)).unwrap_or(f64::NAN)
            },
            &start,
            &[0.5 * du, 0.5 * dv],
            &simplex_opts,
        );
        evaluations += res.evaluations;
        let (u, v) = (res.x[0].abs().min(umax), res.x[1].abs().min(vmax));
        let parts = eval(u * u, v * v)?;
        let value = parts.w(theta);
        if best.is_none_or(|b| value < b.0) {
            best = Some((value, parts.w_error(theta), u * u, v * v));
        }
    }
    let (min_value, min_error, ar, az) = best.expect("at least one candidate");

    // tail certification on the boundary and its dilations
    let samples = 48;
    let mut boundary: Vec<(f64, f64)> = Vec::new();
    for k in 0..=samples {
        let s = k as f64 / samples as f64;
        boundary.push((bx.r_max, bx.zeta_max * s * s));
        boundary.push((bx.r_max * s * s, bx.zeta_max));
    }
    let rays: Vec<[f64; 3]> = boundary
        .par_iter()
        .map(|&(r, z)| {
            let mut w = [0.0; 3];
            for (slot, f) in w.iter_mut().zip([1.0, 4.0, 16.0]) {
                *slot = eval(r * f, z * f)?.w(theta);
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    evaluations += 3 * rays.len();
    let tail_margin = rays
        .iter()
        .flat_map(|w| w.iter())
        .fold(f64::INFINITY, |acc, &w| acc.min(w - min_value));
    let increasing = rays.iter().all(|w| w[0] < w[1] && w[1] < w[2]);

    Ok(MinWResult {
        theta,
        min_value,
        min_error,
        argmin: RadialProfile { r: ar, zeta: az },
        search_box: bx,
        grid_resolution: [du, dv],
        tail_margin,
        certified: tail_margin >= TAIL_MARGIN && increasing,
        evaluations,
    })
}
