//! Closed-form constants and certificates: the Sobolev constant `C_{n,m}`,
//! the defect `eta` of the defective log-Sobolev inequality for the heat
//! measure, the Gaussian-like constants `K_{n,m}` and `c`, and the Herbst
//! concentration chain.

pub mod functional;
pub mod testfn;

use std::f64::consts::{E, PI};

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{invalid, Result};
use crate::geometry::{sr_distance, GroupSpec, RadialProfile};
use crate::potential::{min_w, MinWOptions, MinWResult};
use crate::quadrature::{integrate, QuadOptions};

pub use functional::{
    distance_lsi_verify, dls_verify, entropy_and_dirichlet, groundstate_check, log_form_verify,
    Functionals, GroundStateResidual, MarginEntry, MarginReport, Measure, TensorOptions, MARGIN_TOLERANCE,
    TENSOR_RELATIVE_ACCURACY,
};
pub use testfn::{standard_family, transported_family, TestFunction, FAMILY_VERSION};

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(invalid("n, m", "both must be >= 1"));
    }
    Ok(())
}

/// Sharp Sobolev constant
/// `C_{n,m} = 4^{2m/Q} / (2n (Q-2) pi^{(2n+m)/Q}) (Gamma(2n+m) / Gamma((2n+m)/2))^{1/Q}`
/// with `Q = 2n + 2m`.
pub fn sobolev_const(n: usize, m: usize) -> Result<f64> {
    check_dims(n, m)?;
    let q = (2 * n + 2 * m) as f64;
    let nf = n as f64;
    let mf = m as f64;
    let k = 2.0 * nf + mf;
    let log_ratio = ln_gamma(k) - ln_gamma(k / 2.0);
    Ok(4f64.powf(2.0 * mf / q) / (2.0 * nf * (q - 2.0) * PI.powf(k / q)) * (log_ratio / q).exp())
}

/// Minimiser and minimum of `delta -> alpha delta^2 - beta log delta + gamma`
/// on `(0, inf)`: `delta_0 = sqrt(beta / (2 alpha))` and
/// `(beta/2) log(e^{1 + 2 gamma / beta} 2 alpha / beta)`.
pub fn elementary_min(alpha: f64, beta: f64, gamma_: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(invalid("alpha, beta", "both must be > 0"));
    }
    let delta0 = (beta / (2.0 * alpha)).sqrt();
    let fmin = 0.5 * beta * (1.0 + 2.0 * gamma_ / beta + (2.0 * alpha / beta).ln());
    Ok((delta0, fmin))
}

/// Additive constant `(m+n) log((m+n) C_{n,m} / (e tau))` of the
/// log-Sobolev inequality with gradient weight `tau` for Haar measure.
pub fn haar_lsi_constant(tau: f64, n: usize, m: usize) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid("tau", "must be > 0"));
    }
    let k = (n + m) as f64;
    Ok(k * (k * sobolev_const(n, m)? / (E * tau)).ln())
}

/// `K_{n,m} = log(((n+m) C_{n,m} / (2e))^{n+m}) + 2n + 3m`.
pub fn k_nm(n: usize, m: usize) -> Result<f64> {
    Ok(haar_lsi_constant(2.0, n, m)? + (2 * n + 3 * m) as f64)
}

/// Lower bound `sqrt((3n+5)/(3n+1))` on the reverse-Poincaré constant.
pub fn be_lower_bound(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let nf = n as f64;
    Ok(((3.0 * nf + 5.0) / (3.0 * nf + 1.0)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaCertificate {
    pub theta: f64,
    pub n: usize,
    pub m: usize,
    pub c_nm: f64,
    /// `(m+n) log((m+n) C_{n,m} / (e theta))`.
    pub log_term: f64,
    pub min_w: MinWResult,
    pub eta: f64,
    pub certified: bool,
}

/// The defect `eta = (m+n) log((m+n) C_{n,m}/(e theta)) - min W_{1,theta}`
/// for which `DLS(theta, eta)` holds for every heat measure `p_t dmu`.
pub fn eta_certificate(theta: f64, spec: &GroupSpec, opts: &MinWOptions) -> Result<EtaCertificate> {
    if !(theta > 4.0 && theta.is_finite()) {
        return Err(invalid("theta", format!("must be finite and > 4, got {theta}")));
    }
    let c_nm = sobolev_const(spec.n, spec.m)?;
    let log_term = haar_lsi_constant(theta, spec.n, spec.m)?;
    let mw = min_w(theta, spec, None, opts)?;
    Ok(EtaCertificate {
        theta,
        n: spec.n,
        m: spec.m,
        c_nm,
        log_term,
        eta: log_term - mw.min_value,
        certified: mw.certified,
        min_w: mw,
    })
}

/// `c = int exp(-d^2/2) dmu` with its error estimate, by nested adaptive
/// quadrature over `(|x|, |z|)` on `[0, rho_max] x [0, z_max]`.
pub fn gaussian_like_c(spec: &GroupSpec, rho_max: f64, z_max: f64) -> Result<(f64, f64)> {
    if !(rho_max > 0.0 && z_max > 0.0) {
        return Err(invalid("box", "extents must be > 0"));
    }
    let sphere = |d: usize| 2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0);
    let area = sphere(2 * spec.n) * sphere(spec.m);
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        l1_tol: 0.0,
        max_intervals: 2000,
    };
    let pn = 2 * spec.n as i32 - 1;
    let pm = spec.m as i32 - 1;
    let mut inner_err = 0.0f64;
    let zbreaks: Vec<f64> = (0..=8).map(|k| z_max * k as f64 / 8.0).collect();
    let rbreaks: Vec<f64> = (0..=6).map(|k| rho_max * k as f64 / 6.0).collect();
    let out = integrate(
        |zeta, o| {
            let inner = integrate(
                |rho, oi| {
                    let d = sr_distance(RadialProfile {
                        r: rho * rho / 4.0,
                        zeta,
                    });
                    oi[0] = rho.powi(pn) * (-2.0 * d.d2_quarter).exp();
                },
                1,
                &rbreaks,
                &opts,
            );
            inner_err = inner_err.max(inner.errors[0]);
            o[0] = zeta.powi(pm) * inner.values[0];
        },
        1,
        &zbreaks,
        &opts,
    );
    Ok((area * out.values[0], area * (out.errors[0] + inner_err * z_max)))
}

/// `(K_{n,m}, c, error of c)` with the default quadrature box.
pub fn gaussian_like_constants(spec: &GroupSpec) -> Result<(f64, f64, f64)> {
    let (c, err) = gaussian_like_c(spec, 16.0, 24.0)?;
    Ok((k_nm(spec.n, spec.m)?, c, err))
}

/// Which form of the Herbst bound was returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HerbstForm {
    /// Gaussian tail `exp(-(r - B)^2 / (theta t))`.
    Tail,
    /// Below the tail threshold: the Chernoff bound at `lambda = 1`,
    /// `exp(B + theta t / 4 - r)`.
    Moment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HerbstBound {
    pub eta: f64,
    pub theta: f64,
    pub t: f64,
    pub k1: f64,
    /// `B = K(1) + eta`.
    pub b: f64,
    pub r: f64,
    /// Bound on `mu_t(g >= r)`.
    pub bound: f64,
    /// Chernoff-optimal exponent `2 (r - B) / (theta t)`.
    pub lambda_star: f64,
    /// Smallest `r` for which the tail form applies, `B + theta t / 2`.
    pub threshold: f64,
    pub form: HerbstForm,
}

impl HerbstBound {
    /// Moment bound `int e^{lambda g} dmu_t <= exp(B lambda + theta t lambda^2 / 4)`
    /// for `lambda >= 1`.
    pub fn moment(&self, lambda: f64) -> f64 {
        (self.b * lambda + self.theta * self.t * lambda * lambda / 4.0).exp()
    }
}

/// Concentration bound for a 1-Lipschitz `g` under `DLS(theta, eta)` for
/// `p_t dmu`, given `K(1) = log int e^g dmu_t`.
///
/// Integrating `K'(lambda) <= eta / lambda^2 + theta t / 4` from 1 gives
/// `int e^{lambda g} <= exp(B lambda + theta t lambda^2 / 4)` for
/// `lambda >= 1` with `B = K(1) + eta`, and Chernoff's bound at
/// `lambda* = 2 (r - B) / (theta t)` gives the Gaussian tail once
/// `lambda* >= 1`.
pub fn herbst_chain(eta: f64, theta: f64, t: f64, k1: f64, r: f64) -> Result<HerbstBound> {
    if !(theta > 4.0) {
        return Err(invalid("theta", "must be > 4"));
    }
    if !(t > 0.0) {
        return Err(invalid("t", "must be > 0"));
    }
    if !(eta.is_finite() && k1.is_finite() && r.is_finite()) {
        return Err(invalid("eta, K1, r", "must be finite"));
    }
    let b = k1 + eta;
    let threshold = b + theta * t / 2.0;
    let lambda_star = 2.0 * (r - b) / (theta * t);
    let (bound, form) = if r >= threshold {
        ((-(r - b).powi(2) / (theta * t)).exp(), HerbstForm::Tail)
    } else {
        ((b + theta * t / 4.0 - r).exp().min(1.0), HerbstForm::Moment)
    };
    Ok(HerbstBound {
        eta,
        theta,
        t,
        k1,
        b,
        r,
        bound,
        lambda_star,
        threshold,
        form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sobolev_constant_h1() {
        let expect = 2.0 / (4.0 * PI.powf(0.75)) * (2.0 / gamma(1.5)).powf(0.25);
        assert!((sobolev_const(1, 1).unwrap() - expect).abs() < 1e-15);
        assert!((sobolev_const(1, 1).unwrap() - 0.2597).abs() < 1e-4);
    }

    #[test]
    fn sobolev_exponent_relation() {
        for (n, m) in [(1usize, 1usize), (3, 2)] {
            let q = (2 * n + 2 * m) as f64;
            let p = 2.0 * q / (q - 2.0);
            assert!((p / (p - 2.0) - (n + m) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn elementary_examples() {
        let (d, f) = elementary_min(1.0, 2.0, 0.0).unwrap();
        assert!((d - 1.0).abs() < 1e-15 && (f - 1.0).abs() < 1e-15);
        let (d, f) = elementary_min(2.0, 2.0, 5.0).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((f - (6.0 + 2f64.ln())).abs() < 1e-14);
        assert!(f <= 7.0);
        assert!(elementary_min(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn haar_lsi_and_k() {
        let c = sobolev_const(1, 1).unwrap();
        assert!(haar_lsi_constant(2.0 * c / E, 1, 1).unwrap().abs() < 1e-14);
        let k = k_nm(1, 1).unwrap();
        assert!((k - (2.0 * (c / E).ln() + 5.0)).abs() < 1e-14);
        assert!((k - 0.30).abs() < 0.01);
    }

    #[test]
    fn be_bound() {
        assert!((be_lower_bound(1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((be_lower_bound(5).unwrap() - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn herbst_forms() {
        let h = herbst_chain(0.0, 5.0, 1.0, 0.0, 4.0).unwrap();
        assert_eq!(h.form, HerbstForm::Tail);
        assert!((h.bound - (-16.0f64 / 5.0).exp()).abs() < 1e-15);
        let h = herbst_chain(1.0, 5.0, 1.0, 1.0, 3.0).unwrap();
        assert_eq!(h.form, HerbstForm::Moment);
        assert!(herbst_chain(1.0, 4.0, 1.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn gaussian_like_c_matches_homogeneity_formula() {
        // c = |B_1| Q 2^{Q/2 - 1} Gamma(Q/2), |B_1| = int_{d <= 1} dmu
        let spec = GroupSpec::heisenberg(1).unwrap();
        let (c, err) = gaussian_like_c(&spec, 16.0, 24.0).unwrap();
        let (c2, _) = gaussian_like_c(&spec, 32.0, 48.0).unwrap();
        assert!((c - c2).abs() < 1e-8, "{c} vs {c2}");
        assert!(err < 1e-8);
        assert!(c > 0.0 && c.is_finite());
    }
}
