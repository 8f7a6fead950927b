//! One handler per subcommand. Each returns its outputs as JSON plus an
//! optional table; numbers always travel as `{value, error}` pairs.

use std::f64::consts::FRAC_PI_2;

use log::{info, warn};
use serde_json::{json, Value};

use htype::anisotropic::{
    aniso_distance, aniso_kernel, aniso_psi, aniso_root, aniso_y_residual, expansion_check, expansion_leading,
    AnisoPoint, AnisoRay, AnisoSpec,
};
use htype::certificates::{
    be_lower_bound, haar_lsi_constant, distance_lsi_verify, dls_verify, eta_certificate, gaussian_like_constants,
    herbst_chain, k_nm, log_form_verify, sobolev_const, standard_family, transported_family, MarginReport,
    TensorOptions, TestFunction, FAMILY_VERSION, TENSOR_RELATIVE_ACCURACY,
};
use htype::geometry::{point_distance, sr_distance, GroupSpec, RadialProfile};
use htype::heatkernel::{kernel_deriv_t, DerivOrder, KernelOptions, Route};
use htype::potential::{boundedness_probe, min_w, w_potential_with, MinWOptions, PotentialParams, Ray, SearchBox};
use htype::sampler::{empirical_fernique, expectation, simulate, HerbstParams, PathConfig};
use htype::specialfn::{theta, theta_complement, theta_inv_split, theta_prime};

use crate::args::*;
use crate::error::{usage, CliError};
use crate::output::{est, exact, format_float as ff, Outcome, Status, Table};

type Res = Result<Outcome, CliError>;

/// Settings shared by every command.
pub struct Context {
    pub kernel: KernelOptions,
    pub tol_root: f64,
    pub grid: usize,
}

impl Context {
    pub fn new(g: &GlobalArgs) -> Result<Self, CliError> {
        if !(g.tol_quad > 0.0 && g.tol_quad < 1.0) {
            return Err(usage("--tol-quad must lie in (0, 1)"));
        }
        if !(g.tol_root > 0.0 && g.tol_root < 1.0) {
            return Err(usage("--tol-root must lie in (0, 1)"));
        }
        let mut kernel = KernelOptions::default();
        kernel.quad.rel_tol = g.tol_quad;
        Ok(Self {
            kernel,
            tol_root: g.tol_root,
            grid: g.grid,
        })
    }

    fn min_w_options(&self) -> MinWOptions {
        MinWOptions {
            grid: self.grid,
            kernel: self.kernel,
            ..MinWOptions::default()
        }
    }

    fn tensor_options(&self) -> TensorOptions {
        let mut t = TensorOptions::default();
        // the tensor rule needs a slightly tighter kernel than the default flag
        t.kernel.quad.rel_tol = t.kernel.quad.rel_tol.min(self.kernel.quad.rel_tol);
        t
    }
}

fn spec(dims: &Dims) -> Result<GroupSpec, CliError> {
    Ok(GroupSpec::for_dims(dims.n, dims.m)?)
}

fn grid_profiles(r: &[f64], z: &[f64]) -> Result<Vec<RadialProfile>, CliError> {
    let mut out = Vec::with_capacity(r.len() * z.len());
    for &ri in r {
        for &zi in z {
            out.push(RadialProfile::new(ri, zi.abs())?);
        }
    }
    Ok(out)
}

pub fn kernel(ctx: &Context, a: &KernelArgs) -> Res {
    let spec = spec(&a.dims)?;
    let order = DerivOrder::new(a.k1, a.k2)?;
    let opts = KernelOptions {
        route: match a.route {
            RouteArg::Auto => Route::Auto,
            RouteArg::Radial => Route::Radial,
            RouteArg::Contour => Route::Contour,
        },
        ..ctx.kernel
    };
    let mut table = Table::new(&[
        "R", "z", "t", "k1", "k2", "value", "value_error", "ln_abs", "ln_abs_error", "method",
    ]);
    let mut points = Vec::new();
    for prof in grid_profiles(&a.r, &a.z)? {
        let e = kernel_deriv_t(prof, a.t, order, &spec, &opts)?;
        let method = serde_json::to_value(e.method).unwrap_or(Value::Null);
        let method_name = method.as_str().unwrap_or("").to_string();
        table.push(vec![
            ff(prof.r),
            ff(prof.zeta),
            ff(a.t),
            a.k1.to_string(),
            a.k2.to_string(),
            ff(e.value()),
            ff(e.error()),
            ff(e.ln()),
            ff(e.relative_error()),
            method_name,
        ]);
        points.push(json!({
            "R": prof.r,
            "z": prof.zeta,
            "value": est(e.value(), e.error()),
            "ln_abs": est(e.ln(), e.relative_error()),
            "method": method,
        }));
    }
    Ok(Outcome::new(json!({ "t": a.t, "k1": a.k1, "k2": a.k2, "points": points })).with_table(table))
}

/// `|theta(y) - omega| / max(omega, 1)`, evaluated in the accurate branch.
fn theta_residual(omega: f64) -> Result<(f64, f64, f64), CliError> {
    let root = theta_inv_split(omega);
    let th = if root.y > FRAC_PI_2 {
        theta_complement(root.complement)
    } else {
        theta(root.y)?
    };
    let slope = if root.y > FRAC_PI_2 {
        // theta' ~ 2 pi / eps^3 near the pole
        2.0 * std::f64::consts::PI / root.complement.powi(3)
    } else {
        theta_prime(root.y)?
    };
    let residual = (th - omega).abs() / omega.max(1.0);
    Ok((root.y, residual, slope))
}

pub fn distance(ctx: &Context, a: &DistanceArgs) -> Res {
    let mut table = Table::new(&["R", "z", "d", "d_error", "d2_quarter", "y", "y_error", "root_residual"]);
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    for prof in grid_profiles(&a.r, &a.z)? {
        let d = sr_distance(prof);
        // d^2 is stationary in y at the root, so only rounding enters d
        let d_err = 8.0 * f64::EPSILON * d.d;
        let (y_err, residual) = if prof.r > 0.0 && prof.zeta > 0.0 {
            let (_, res, slope) = theta_residual(prof.omega())?;
            (res * prof.omega().max(1.0) / slope, res)
        } else {
            (0.0, 0.0)
        };
        worst = worst.max(residual);
        table.push(vec![
            ff(prof.r),
            ff(prof.zeta),
            ff(d.d),
            ff(d_err),
            ff(d.d2_quarter),
            ff(d.y),
            ff(y_err),
            ff(residual),
        ]);
        points.push(json!({
            "R": prof.r,
            "z": prof.zeta,
            "d": est(d.d, d_err),
            "d2_quarter": est(d.d2_quarter, 2.0 * d_err * d.d / 4.0),
            "y": est(d.y, y_err),
        }));
    }
    let status = if worst <= ctx.tol_root {
        Status::Ok
    } else {
        warn!("root residual {worst:e} exceeds --tol-root {:e}", ctx.tol_root);
        Status::Uncertified
    };
    Ok(Outcome::new(json!({ "points": points, "max_root_residual": est(worst, 0.0) }))
        .with_table(table)
        .with_status(status))
}

pub fn potential(ctx: &Context, a: &PotentialArgs) -> Res {
    let spec = spec(&a.dims)?;
    if a.probe {
        let mut table = Table::new(&["C", "R", "z", "d2", "W", "W_error"]);
        let mut reports = Vec::new();
        for &c in &a.c {
            let rep = boundedness_probe(c, &spec, Ray { omega: a.omega }, (a.r_min, a.r_max), a.points, &ctx.kernel)?;
            for s in &rep.samples {
                table.push(vec![ff(c), ff(s.r), ff(s.zeta), ff(s.d2), ff(s.w), ff(s.w_error)]);
            }
            let se = &rep.fit.std_errors;
            reports.push(json!({
                "C": c,
                "verdict": rep.verdict,
                "d2_coefficient": est(rep.d2_coefficient, se[0]),
                "expected_d2_coefficient": exact(c - 4.0),
                "log_coefficient": est(rep.log_coefficient, se[1]),
                "intercept": est(rep.fit.coefficients[2], se[2]),
                "r_squared": exact(rep.fit.r_squared),
                "monotone_decreasing": rep.monotone_decreasing,
                "samples": rep.samples.iter().map(|s| json!({
                    "R": s.r, "z": s.zeta, "W": est(s.w, s.w_error)
                })).collect::<Vec<_>>(),
            }));
        }
        return Ok(Outcome::new(json!({ "omega": a.omega, "probes": reports })).with_table(table));
    }
    if a.r.is_empty() || a.z.is_empty() {
        return Err(usage("potential needs --R and --z, or --probe"));
    }
    let mut table = Table::new(&["C", "t", "R", "z", "W", "W_error", "method"]);
    let mut points = Vec::new();
    for &c in &a.c {
        let params = PotentialParams::new(c, a.t)?;
        for prof in grid_profiles(&a.r, &a.z)? {
            let w = w_potential_with(prof, params, &spec, &ctx.kernel)?;
            let method = serde_json::to_value(w.method).unwrap_or(Value::Null);
            table.push(vec![
                ff(c),
                ff(a.t),
                ff(prof.r),
                ff(prof.zeta),
                ff(w.value),
                ff(w.error),
                method.as_str().unwrap_or("").to_string(),
            ]);
            points.push(json!({
                "C": c, "R": prof.r, "z": prof.zeta, "W": est(w.value, w.error), "method": method
            }));
        }
    }
    Ok(Outcome::new(json!({ "t": a.t, "points": points })).with_table(table))
}

fn min_w_json(r: &htype::potential::MinWResult) -> Value {
    json!({
        "value": r.min_value,
        "error": r.min_error,
        "argmin": {
            "R": est(r.argmin.r, r.grid_resolution[0].powi(2)),
            "z": est(r.argmin.zeta, r.grid_resolution[1].powi(2)),
        },
        "tail_margin": est(r.tail_margin, r.min_error),
        "search_box": { "R": r.search_box.r_max, "z": r.search_box.zeta_max },
        "grid_resolution": r.grid_resolution,
        "evaluations": r.evaluations,
        "certified": r.certified,
    })
}

pub fn min_w_cmd(ctx: &Context, a: &MinWArgs) -> Res {
    let spec = spec(&a.dims)?;
    let search = match (a.r_box, a.z_box) {
        (None, None) => None,
        (r, z) => {
            let d = SearchBox::default_for(a.theta);
            Some(SearchBox::new(r.unwrap_or(d.r_max), z.unwrap_or(d.zeta_max))?)
        }
    };
    let r = min_w(a.theta, &spec, search, &ctx.min_w_options())?;
    info!("min W = {} after {} evaluations", r.min_value, r.evaluations);
    let status = if r.certified { Status::Ok } else { Status::Uncertified };
    Ok(Outcome::new(json!({ "theta": a.theta, "min_w": min_w_json(&r) })).with_status(status))
}

pub fn eta(ctx: &Context, a: &EtaArgs) -> Res {
    let spec = spec(&a.dims)?;
    let cert = eta_certificate(a.theta, &spec, &ctx.min_w_options())?;
    let status = if cert.certified { Status::Ok } else { Status::Uncertified };
    Ok(Outcome::new(json!({
        "theta": cert.theta,
        "n": cert.n,
        "m": cert.m,
        "c_nm": exact(cert.c_nm),
        "log_term": exact(cert.log_term),
        "min_w": min_w_json(&cert.min_w),
        "eta": est(cert.eta, cert.min_w.min_error),
        "certified": cert.certified,
    }))
    .with_status(status))
}

pub fn constants(_ctx: &Context, a: &ConstantsArgs) -> Res {
    let (n, m) = (a.dims.n, a.dims.m);
    let mut out = json!({
        "c_nm": exact(sobolev_const(n, m)?),
        "k_nm": exact(k_nm(n, m)?),
        "be_lower_bound": exact(be_lower_bound(n)?),
        "haar_lsi_constant": { "tau": a.tau, "value": haar_lsi_constant(a.tau, n, m)?, "error": 0.0 },
    });
    out["haar_lsi_constant"]["error"] = json!(4.0 * f64::EPSILON * out["haar_lsi_constant"]["value"].as_f64().unwrap_or(0.0).abs());
    if a.gaussian_like {
        let spec = spec(&a.dims)?;
        let (_, c, err) = gaussian_like_constants(&spec)?;
        out["gaussian_like_c"] = est(c, err);
    }
    Ok(Outcome::new(out))
}

pub fn herbst(_ctx: &Context, a: &HerbstArgs) -> Res {
    let mut table = Table::new(&["r", "bound", "form", "lambda_star", "threshold"]);
    let mut rows = Vec::new();
    for &r in &a.r {
        let h = herbst_chain(a.eta, a.theta, a.t, a.k1, r)?;
        let form = serde_json::to_value(h.form).unwrap_or(Value::Null);
        table.push(vec![
            ff(r),
            ff(h.bound),
            form.as_str().unwrap_or("").to_string(),
            ff(h.lambda_star),
            ff(h.threshold),
        ]);
        rows.push(json!({
            "r": r,
            "bound": exact(h.bound),
            "form": form,
            "lambda_star": exact(h.lambda_star),
            "threshold": exact(h.threshold),
        }));
    }
    let b = a.k1 + a.eta;
    Ok(Outcome::new(json!({ "b": exact(b), "tails": rows })).with_table(table))
}

fn margins_json(rep: &MarginReport, table: &mut Table) -> Value {
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            let err = TENSOR_RELATIVE_ACCURACY * (e.entropy.abs() + e.dirichlet.abs() + e.margin.abs());
            table.push(vec![e.label.clone(), ff(e.entropy), ff(e.dirichlet), ff(e.margin), ff(err)]);
            json!({
                "label": e.label,
                "entropy": est(e.entropy, TENSOR_RELATIVE_ACCURACY * e.entropy.abs()),
                "dirichlet": est(e.dirichlet, TENSOR_RELATIVE_ACCURACY * e.dirichlet.abs()),
                "margin": est(e.margin, err),
            })
        })
        .collect();
    json!({
        "entries": entries,
        "min_margin": est(rep.min_margin, TENSOR_RELATIVE_ACCURACY * rep.min_margin.abs()),
        "tolerance": rep.tolerance,
        "violations": rep.violations,
        "passed": rep.passed(),
    })
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> Res {
    let spec = spec(&a.dims)?;
    let opts = ctx.tensor_options();
    let family: Vec<TestFunction> = match a.family {
        FamilyArg::Standard => standard_family(&spec)?,
        FamilyArg::Transported => transported_family(&spec, a.t)?,
    };
    let mut table = Table::new(&["label", "entropy", "dirichlet", "margin", "margin_error"]);
    let mut status = Status::Ok;
    let mut extra = json!({});
    let report = match a.inequality {
        Inequality::Dls => {
            let theta = a.theta.unwrap_or(5.0);
            let eta = match a.eta {
                Some(e) => e,
                None => {
                    let cert = eta_certificate(theta, &spec, &ctx.min_w_options())?;
                    if !cert.certified {
                        status = Status::Uncertified;
                    }
                    extra["eta_certificate"] = json!({
                        "eta": est(cert.eta, cert.min_w.min_error),
                        "certified": cert.certified,
                    });
                    cert.eta
                }
            };
            extra["theta"] = json!(theta);
            extra["eta"] = json!(eta);
            dls_verify(theta, eta, a.t, &family, &spec, &opts)?
        }
        Inequality::LogForm => log_form_verify(&family, &spec, &opts)?,
        Inequality::DistanceLsi => {
            if a.family == FamilyArg::Transported {
                return Err(usage("the transported family is tied to a heat measure; use --family standard"));
            }
            let theta = a.theta.unwrap_or(2.0);
            let eta = match a.eta {
                Some(e) => e,
                None => k_nm(spec.n, spec.m)?,
            };
            extra["theta"] = json!(theta);
            extra["eta"] = json!(eta);
            let fam: Vec<TestFunction> = family
                .into_iter()
                .filter(|f| !matches!(f, TestFunction::Transported { .. }))
                .collect();
            distance_lsi_verify(theta, eta, &fam, &spec, &opts)?
        }
    };
    if !report.passed() {
        status = Status::Violated;
    }
    let mut out = margins_json(&report, &mut table);
    out["family_version"] = json!(FAMILY_VERSION);
    if let (Some(o), Some(e)) = (out.as_object_mut(), extra.as_object()) {
        for (k, v) in e {
            o.insert(k.clone(), v.clone());
        }
    }
    Ok(Outcome::new(out).with_table(table).with_status(status))
}

pub fn sample(_ctx: &Context, a: &SampleArgs) -> Res {
    let spec = spec(&a.dims)?;
    let cfg = match a.steps {
        Some(s) => PathConfig::with_steps(a.t, s, a.paths, a.seed)?,
        None => PathConfig::new(a.t, a.paths, a.seed)?,
    };
    if !(a.cap > 0.0) {
        return Err(usage("--cap must be > 0"));
    }
    let samples = simulate(&spec, &cfg)?;
    let x2 = expectation(&samples, |p| p.x.iter().map(|v| v * v).sum());
    let z2 = expectation(&samples, |p| p.z.iter().map(|v| v * v).sum());
    let cap = a.cap;
    let herbst = match (a.theta, a.eta) {
        (Some(theta), Some(eta)) => Some(HerbstParams { eta, theta }),
        _ => None,
    };
    let fern = empirical_fernique(&samples, |g| point_distance(g).min(cap), a.alpha, &a.radii, herbst)?;
    let mut table = Table::new(&["r", "frequency", "std_error", "herbst_bound", "dominated"]);
    let tails: Vec<Value> = fern
        .tails
        .iter()
        .map(|t| {
            let bound = t.herbst.map(|h| h.bound);
            table.push(vec![
                ff(t.r),
                ff(t.frequency),
                ff(t.std_error),
                bound.map(ff).unwrap_or_default(),
                t.dominated().to_string(),
            ]);
            json!({
                "r": t.r,
                "frequency": est(t.frequency, t.std_error),
                "herbst_bound": bound.map(exact),
                "dominated": t.dominated(),
            })
        })
        .collect();
    let status = if fern.tails.iter().all(|t| t.dominated()) {
        Status::Ok
    } else {
        Status::Violated
    };
    let mut out = json!({
        "steps": cfg.steps,
        "paths": cfg.paths,
        "mean_x_squared": est(x2.mean, x2.std_error),
        "expected_x_squared": exact(4.0 * spec.n as f64 * a.t),
        "mean_z_squared": est(z2.mean, z2.std_error),
        "fernique": est(fern.estimate.mean, fern.estimate.std_error),
        "heavy_tail": fern.heavy_tail,
        "tails": tails,
    });
    if let Some(k1) = fern.k1 {
        out["k1"] = est(k1.mean, k1.std_error);
    }
    let mut outcome = Outcome::new(out).with_table(table).with_status(status);
    outcome.seed = Some(a.seed);
    Ok(outcome)
}

pub fn aniso(ctx: &Context, a: &AnisoArgs) -> Res {
    let spec = AnisoSpec::new(a.alphas.clone(), a.multiplicities.clone())?;
    let pt = AnisoPoint::new(a.norms.clone(), a.z)?;
    let k = htype::anisotropic::aniso_kernel_with(&pt, &spec, a.t, &ctx.kernel.quad)
        .or_else(|_| aniso_kernel(&pt, &spec, a.t))?;
    let mut out = json!({
        "R": exact(pt.r(&spec)),
        "kernel": est(k.value(), k.error()),
        "ln_kernel": est(k.ln(), k.relative_error()),
    });
    let mut status = Status::Ok;
    match aniso_root(&pt, &spec) {
        Ok(root) => {
            let residual = aniso_y_residual(&pt, &spec)?.abs();
            let scale = (4.0 * a.z.abs()).max(1.0);
            if residual > ctx.tol_root * scale {
                warn!("stationary-point residual {residual:e} exceeds --tol-root");
                status = Status::Uncertified;
            }
            let d = aniso_distance(&pt, &spec)?;
            out["y"] = est(root.y, residual);
            out["eps"] = est(root.eps, residual);
            out["distance"] = est(d, 8.0 * f64::EPSILON * d);
            out["psi"] = exact(aniso_psi(&pt, &spec)?);
            if a.t == 1.0 {
                let lead = expansion_leading(&pt, &spec)?;
                out["leading_term_ratio"] = est(k.ratio(&lead), k.relative_error());
            }
        }
        Err(htype::Error::DegenerateBlock) => {
            warn!("top block vanishes: no stationary point, only the kernel is reported");
        }
        Err(e) => return Err(e.into()),
    }
    let mut table = None;
    if let Some(omega) = a.omega {
        let ray = AnisoRay::balanced(&spec, omega);
        let points = a
            .ray_r
            .iter()
            .map(|&r| ray.at(&spec, r))
            .collect::<htype::Result<Vec<_>>>()?;
        let zone = points.iter().map(|p| p.zone_constant(&spec)).fold(1.0, f64::max);
        let rep = expansion_check(&points, &spec, zone)?;
        let mut t = Table::new(&["R", "ratio", "ratio_error", "scaled_deviation"]);
        for row in &rep.rows {
            t.push(vec![ff(row.r), ff(row.ratio), ff(row.ratio_error), ff(row.scaled_deviation)]);
        }
        out["expansion"] = json!({
            "omega": omega,
            "rows": rep.rows.iter().map(|r| json!({
                "R": r.r,
                "ratio": est(r.ratio, r.ratio_error),
                "scaled_deviation": est(r.scaled_deviation, r.ratio_error * r.r),
            })).collect::<Vec<_>>(),
            "bounded": rep.bounded,
            "warnings": rep.warnings,
        });
        if !rep.bounded {
            status = status.max(Status::Violated);
        }
        table = Some(t);
    }
    let mut outcome = Outcome::new(out).with_status(status);
    outcome.table = table;
    Ok(outcome)
}
