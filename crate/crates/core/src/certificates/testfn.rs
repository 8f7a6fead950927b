//! Test functions for the functional inequalities and the fixed, versioned
//! family they are verified on.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::{dilate, group_mul, GroupSpec, Point};
use crate::heatkernel::kernel;

/// Identifier of the verification family; bump it whenever
/// [`standard_family`] changes.
pub const FAMILY_VERSION: &str = "family-v1";

/// A smooth test function on a concrete H-type group.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `f(g) = exp(-(|x'|^2 / w^2 + |z'|^2 / w^4) / 2)` with
    /// `(x', z') = center^{-1} g`.
    Bump { center: Point, width: f64 },
    /// `f_lambda(g) = lambda^{Q/2} b(delta_lambda g)` for the bump `b` of the
    /// given width centred at the identity; Haar-mass preserving.
    Dilated { width: f64, lambda: f64 },
    /// `f(g) = exp(lambda x_j / 2)`, with `x_j` a 1-Lipschitz horizontal
    /// coordinate.
    Exponential { lambda: f64, direction: usize },
    /// `f = b p_t^{-1/2}` for the bump `b` of the given center and width.
    /// Against `p_t dmu` it behaves like `b` against Haar measure, so left
    /// translates of it probe the potential of the heat kernel.
    Transported { center: Point, width: f64, t: f64 },
}

impl TestFunction {
    pub fn bump(center: Point, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(invalid("width", "must be finite and > 0"));
        }
        Ok(Self::Bump { center, width })
    }

    /// The left translate `f_v(g) = f(v g)` of the bump at the identity, a
    /// bump centred at `v^{-1}`.
    pub fn translated(v: &Point, width: f64) -> Result<Self> {
        Self::bump(v.inverse(), width)
    }

    pub fn dilated(width: f64, lambda: f64) -> Result<Self> {
        if !(width > 0.0 && lambda > 0.0 && width.is_finite() && lambda.is_finite()) {
            return Err(invalid("width, lambda", "must be finite and > 0"));
        }
        Ok(Self::Dilated { width, lambda })
    }

    /// The transported left translate `f_v p_t^{-1/2}` of the bump at the
    /// identity.
    pub fn transported(v: &Point, width: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", "must be finite and > 0"));
        }
        match Self::translated(v, width)? {
            Self::Bump { center, width } => Ok(Self::Transported { center, width, t }),
            _ => unreachable!(),
        }
    }

    pub fn exponential(lambda: f64, direction: usize) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(invalid("lambda", "must be finite"));
        }
        Ok(Self::Exponential { lambda, direction })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Bump { center, width } => {
                let r = center.x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r == 0.0 && center.z.iter().all(|v| *v == 0.0) {
                    format!("bump(w={width})")
                } else {
                    format!("translated-bump(|x_c|={r:.3},w={width})")
                }
            }
            Self::Dilated { width, lambda } => format!("dilated(w={width},lambda={lambda})"),
            Self::Exponential { lambda, direction } => format!("exponential(lambda={lambda},j={direction})"),
            Self::Transported { center, width, t } => {
                let r = center.x.iter().map(|v| v * v).sum::<f64>().sqrt();
                format!("transported-bump(|x_c|={r:.3},w={width},t={t})")
            }
        }
    }

    /// Whether `f^2` is integrable against Haar measure.
    pub fn haar_integrable(&self) -> bool {
        matches!(self, Self::Bump { .. } | Self::Dilated { .. })
    }

    /// Evaluate `f` at a point of `spec`.
    pub fn eval(&self, spec: &GroupSpec, g: &Point) -> Result<f64> {
        Ok(self.log_eval(spec, g)?.exp())
    }

    /// `log f` at a point of `spec`.
    pub fn log_eval(&self, spec: &GroupSpec, g: &Point) -> Result<f64> {
        match self {
            Self::Bump { center, width } => {
                let local = group_mul(spec, &center.inverse(), g)?;
                Ok(bump_log(&local, *width))
            }
            Self::Dilated { width, lambda } => {
                let q = spec.homogeneous_dim() as f64;
                let local = dilate(spec, *lambda, g)?;
                Ok(0.5 * q * lambda.ln() + bump_log(&local, *width))
            }
            Self::Exponential { lambda, direction } => {
                let xj = g
                    .x
                    .get(*direction)
                    .ok_or_else(|| invalid("direction", "exceeds the horizontal dimension"))?;
                Ok(0.5 * lambda * xj)
            }
            Self::Transported { center, width, t } => {
                let local = group_mul(spec, &center.inverse(), g)?;
                let p = kernel(g.profile(), *t, spec)?;
                Ok(bump_log(&local, *width) - 0.5 * p.ln())
            }
        }
    }

    /// The chart `g = center * g'` in which the function has the simple form,
    /// and its natural scales `(s_x, s_z)` there (`None` when unbounded).
    pub(crate) fn chart(&self, spec: &GroupSpec) -> (Point, Option<(f64, f64)>) {
        match self {
            Self::Bump { center, width } | Self::Transported { center, width, .. } => {
                (center.clone(), Some((*width, width * width)))
            }
            Self::Dilated { width, lambda } => {
                let s = width / lambda;
                (Point::identity(spec), Some((s, s * s)))
            }
            Self::Exponential { .. } => (Point::identity(spec), None),
        }
    }
}

fn bump_log(local: &Point, width: f64) -> f64 {
    let x2: f64 = local.x.iter().map(|v| v * v).sum();
    let z2: f64 = local.z.iter().map(|v| v * v).sum();
    let w2 = width * width;
    -0.5 * (x2 / w2 + z2 / (w2 * w2))
}

/// The versioned verification family on `spec`:
///
/// * bumps at the identity of widths 2 (nearly constant on the bulk of the
///   heat measure), 1 and 1/2;
/// * left translates of the unit bump by `v = (s e_1, 0)` with sub-Riemannian
///   distance `d(v) = s` for `s` in 2, 4, ..., 12;
/// * dilates `f_lambda` of the unit bump for `lambda` in 1/4, 1/2, 2, 4;
/// * exponentials `exp(lambda x_1 / 2)` for `lambda` in 1, 2;
/// * the transported translates of [`transported_family`] at `t = 1`.
pub fn standard_family(spec: &GroupSpec) -> Result<Vec<TestFunction>> {
    let mut out = Vec::new();
    let id = Point::identity(spec);
    for w in [2.0, 1.0, 0.5] {
        out.push(TestFunction::bump(id.clone(), w)?);
    }
    for v in translation_radii() {
        out.push(TestFunction::translated(&translation(spec, v), 1.0)?);
    }
    for lambda in [0.25, 0.5, 2.0, 4.0] {
        out.push(TestFunction::dilated(1.0, lambda)?);
    }
    for lambda in [1.0, 2.0] {
        out.push(TestFunction::exponential(lambda, 0)?);
    }
    out.extend(transported_family(spec, 1.0)?);
    Ok(out)
}

/// Distances of the translated bumps in [`standard_family`].
pub fn translation_radii() -> [f64; 6] {
    [2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
}

/// The translation `v = (s e_1, 0)`, at distance `s` from the identity.
pub fn translation(spec: &GroupSpec, s: f64) -> Point {
    let mut v = Point::identity(spec);
    v.x[0] = s;
    v
}

/// Transported translates of the unit bump: the stress family for
/// `theta <= 4`, along which the heat-measure margins follow the potential
/// at the translation.
pub fn transported_family(spec: &GroupSpec, t: f64) -> Result<Vec<TestFunction>> {
    translation_radii()
        .iter()
        .map(|&s| TestFunction::transported(&translation(spec, s), 1.0, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translate_moves_the_peak() {
        let spec = GroupSpec::heisenberg(1).unwrap();
        let v = Point::new(vec![1.5, -0.5], vec![0.3]);
        let f = TestFunction::translated(&v, 1.0).unwrap();
        // peak of f_v is at v^{-1}
        assert!((f.eval(&spec, &v.inverse()).unwrap() - 1.0).abs() < 1e-15);
        // f_v(g) = f(v g)
        let g = Point::new(vec![0.2, 0.1], vec![-0.4]);
        let base = TestFunction::bump(Point::identity(&spec), 1.0).unwrap();
        let vg = group_mul(&spec, &v, &g).unwrap();
        assert!((f.eval(&spec, &g).unwrap() - base.eval(&spec, &vg).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn family_is_stable() {
        let spec = GroupSpec::heisenberg(1).unwrap();
        let fam = standard_family(&spec).unwrap();
        assert_eq!(fam.len(), 21);
        assert_eq!(FAMILY_VERSION, "family-v1");
        assert!(fam.iter().filter(|f| !f.haar_integrable()).count() == 8);
    }

    #[test]
    fn dilation_prefactor() {
        let spec = GroupSpec::heisenberg(1).unwrap();
        let f = TestFunction::dilated(1.0, 2.0).unwrap();
        let v = f.eval(&spec, &Point::identity(&spec)).unwrap();
        assert!((v - 4.0).abs() < 1e-14); // 2^{Q/2}, Q = 4
    }
}
