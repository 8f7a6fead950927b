//! Concrete H-type group models, radial invariants and the sub-Riemannian
//! distance from the identity.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::specialfn::{theta_inv_split, x_minus_sin, y_over_sin};

/// Which bracket structure realises the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// `H^n` with the standard symplectic form, `m = 1`.
    Heisenberg,
    /// `H^{n/2}` quaternionic model, left multiplication by `i, j, k`, `m = 3`.
    Quaternionic,
    /// Only `(n, m)` is known; kernels and distances work, the group law does not.
    RadialOnly,
}

/// An H-type group identified with `R^{2n} x R^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GroupSpec {
    pub n: usize,
    pub m: usize,
    pub model: Model,
}

impl GroupSpec {
    pub fn heisenberg(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        Ok(Self {
            n,
            m: 1,
            model: Model::Heisenberg,
        })
    }

    pub fn quaternionic(n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(invalid("n", format!("quaternionic model needs even n >= 2, got {n}")));
        }
        Ok(Self {
            n,
            m: 3,
            model: Model::Quaternionic,
        })
    }

    pub fn radial(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(invalid("n, m", "both must be >= 1"));
        }
        Ok(Self {
            n,
            m,
            model: Model::RadialOnly,
        })
    }

    /// The concrete model for `(n, m)` when one exists, radial-only otherwise.
    pub fn for_dims(n: usize, m: usize) -> Result<Self> {
        match m {
            1 => Self::heisenberg(n),
            3 if n % 2 == 0 && n > 0 => Self::quaternionic(n),
            _ => Self::radial(n, m),
        }
    }

    /// Homogeneous dimension `Q = 2n + 2m`.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.n + 2 * self.m
    }

    /// Topological dimension `2n + m`.
    pub fn dim(&self) -> usize {
        2 * self.n + self.m
    }

    fn require_concrete(&self) -> Result<()> {
        if self.model == Model::RadialOnly {
            return Err(Error::ModelMismatch(format!(
                "(n, m) = ({}, {}) has no concrete group law",
                self.n, self.m
            )));
        }
        Ok(())
    }

    fn check_point(&self, g: &Point) -> Result<()> {
        if g.x.len() != 2 * self.n || g.z.len() != self.m {
            return Err(Error::ModelMismatch(format!(
                "point has shape ({}, {}), group needs ({}, {})",
                g.x.len(),
                g.z.len(),
                2 * self.n,
                self.m
            )));
        }
        Ok(())
    }

    /// `J_{u_k} x` for the `k`-th basis vector of the centre.
    pub fn j_map(&self, k: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.require_concrete()?;
        let mut out = vec![0.0; x.len()];
        match self.model {
            Model::Heisenberg => {
                // x = (a, b), J(a, b) = (b, -a)
                let n = self.n;
                for i in 0..n {
                    out[i] = x[n + i];
                    out[n + i] = -x[i];
                }
            }
            Model::Quaternionic => {
                for q in 0..self.n / 2 {
                    let (a, b, c, d) = (x[4 * q], x[4 * q + 1], x[4 * q + 2], x[4 * q + 3]);
                    let v = match k {
                        0 => [-b, a, -d, c],
                        1 => [-c, d, a, -b],
                        _ => [-d, -c, b, a],
                    };
                    out[4 * q..4 * q + 4].copy_from_slice(&v);
                }
            }
            Model::RadialOnly => unreachable!(),
        }
        Ok(out)
    }

    /// `[x, x']_k = <J_{u_k} x, x'>`.
    pub fn bracket(&self, x: &[f64], xp: &[f64]) -> Result<Vec<f64>> {
        (0..self.m)
            .map(|k| Ok(dot(&self.j_map(k, x)?, xp)))
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// A point in exponential coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, z: Vec<f64>) -> Self {
        Self { x, z }
    }

    pub fn identity(spec: &GroupSpec) -> Self {
        Self {
            x: vec![0.0; 2 * spec.n],
            z: vec![0.0; spec.m],
        }
    }

    pub fn profile(&self) -> RadialProfile {
        RadialProfile {
            r: self.x.iter().map(|v| v * v).sum::<f64>() / 4.0,
            zeta: self.z.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            x: self.x.iter().map(|v| -v).collect(),
            z: self.z.iter().map(|v| -v).collect(),
        }
    }
}

/// Reduced coordinates `(R, |z|)` with `R = |x|^2 / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProfile {
    /// `R = |x|^2 / 4`.
    pub r: f64,
    /// `|z|`.
    pub zeta: f64,
}

impl RadialProfile {
    pub fn new(r: f64, zeta: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid("R", format!("must be finite and >= 0, got {r}")));
        }
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(invalid("zeta", format!("must be finite and >= 0, got {zeta}")));
        }
        Ok(Self { r, zeta })
    }

    /// `omega = |z| / R`.
    pub fn omega(&self) -> f64 {
        self.zeta / self.r
    }

    /// `delta = sqrt(R / (pi |z|))`.
    pub fn delta(&self) -> f64 {
        (self.r / (PI * self.zeta)).sqrt()
    }

    /// `kappa = 2 sqrt(pi |z| R)`.
    pub fn kappa(&self) -> f64 {
        2.0 * (PI * self.zeta * self.r).sqrt()
    }

    /// Profile of `delta_lambda(g)`.
    pub fn dilated(&self, lambda: f64) -> Self {
        Self {
            r: lambda * lambda * self.r,
            zeta: lambda * lambda * self.zeta,
        }
    }
}

/// `g * h = (x + x', z + z' + [x, x'] / 2)`.
pub fn group_mul(spec: &GroupSpec, g: &Point, h: &Point) -> Result<Point> {
    spec.require_concrete()?;
    spec.check_point(g)?;
    spec.check_point(h)?;
    let br = spec.bracket(&g.x, &h.x)?;
    Ok(Point {
        x: g.x.iter().zip(&h.x).map(|(a, b)| a + b).collect(),
        z: (0..spec.m).map(|k| g.z[k] + h.z[k] + 0.5 * br[k]).collect(),
    })
}

/// `delta_lambda(x, z) = (lambda x, lambda^2 z)`.
pub fn dilate(spec: &GroupSpec, lambda: f64, g: &Point) -> Result<Point> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    spec.check_point(g)?;
    Ok(Point {
        x: g.x.iter().map(|v| lambda * v).collect(),
        z: g.z.iter().map(|v| lambda * lambda * v).collect(),
    })
}

/// `g * exp(s e_j)`, the flow of the left-invariant field `X_j`.
pub fn horizontal_flow(spec: &GroupSpec, g: &Point, j: usize, s: f64) -> Result<Point> {
    let mut step = Point::identity(spec);
    step.x[j] = s;
    group_mul(spec, g, &step)
}

fn eval_checked(f: &dyn Fn(&Point) -> f64, p: &Point) -> Result<f64> {
    let v = f(p);
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("test function returned {v} at {p:?}")));
    }
    Ok(v)
}

/// `(X_j f)(g)` for every `j`, by central differences along the flow.
pub fn horizontal_gradient(
    spec: &GroupSpec,
    f: &dyn Fn(&Point) -> f64,
    g: &Point,
    step: f64,
) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(invalid("step", "must be > 0"));
    }
    spec.check_point(g)?;
    (0..2 * spec.n)
        .map(|j| {
            let plus = eval_checked(f, &horizontal_flow(spec, g, j, step)?)?;
            let minus = eval_checked(f, &horizontal_flow(spec, g, j, -step)?)?;
            Ok((plus - minus) / (2.0 * step))
        })
        .collect()
}

/// `sum_j (X_j f)^2` by central differences with step `step`.
pub fn horizontal_grad_sq(
    spec: &GroupSpec,
    f: &dyn Fn(&Point) -> f64,
    g: &Point,
    step: f64,
) -> Result<f64> {
    Ok(horizontal_gradient(spec, f, g, step)?
        .iter()
        .map(|v| v * v)
        .sum())
}

/// Richardson-extrapolated `sum_j (X_j f)^2` from steps `h` and `h / 2`.
pub fn horizontal_grad_sq_richardson(
    spec: &GroupSpec,
    f: &dyn Fn(&Point) -> f64,
    g: &Point,
    step: f64,
) -> Result<f64> {
    let coarse = horizontal_gradient(spec, f, g, step)?;
    let fine = horizontal_gradient(spec, f, g, 0.5 * step)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| {
            let v = (4.0 * f - c) / 3.0;
            v * v
        })
        .sum())
}

/// Sub-Laplacian `sum_j X_j^2 f` by second central differences along the flow.
pub fn sub_laplacian(
    spec: &GroupSpec,
    f: &dyn Fn(&Point) -> f64,
    g: &Point,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        return Err(invalid("step", "must be > 0"));
    }
    spec.check_point(g)?;
    let center = eval_checked(f, g)?;
    let mut sum = 0.0;
    for j in 0..2 * spec.n {
        let plus = eval_checked(f, &horizontal_flow(spec, g, j, step)?)?;
        let minus = eval_checked(f, &horizontal_flow(spec, g, j, -step)?)?;
        sum += (plus - 2.0 * center + minus) / (step * step);
    }
    Ok(sum)
}

/// Sub-Riemannian distance to the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SRDistance {
    pub d: f64,
    /// `d^2 / 4`, carried separately because it is the exponent of the kernel.
    pub d2_quarter: f64,
    /// The geodesic parameter `y = theta^{-1}(omega)`.
    pub y: f64,
}

/// `d = 2 sqrt(R) y / sin(y)` with `y = theta^{-1}(|z| / R)`.
///
/// For `y > pi/2` the equivalent form `d^2 = 8 |z| y^2 / (2y - sin 2y)` is used;
/// it stays accurate as `sin(y) -> 0` and reproduces `d^2 = 4 pi |z|` at `R = 0`.
pub fn sr_distance(profile: RadialProfile) -> SRDistance {
    let RadialProfile { r, zeta } = profile;
    if zeta == 0.0 {
        return SRDistance {
            d: 2.0 * r.sqrt(),
            d2_quarter: r,
            y: 0.0,
        };
    }
    let root = if r == 0.0 {
        theta_inv_split(f64::INFINITY)
    } else {
        theta_inv_split(zeta / r)
    };
    let y = root.y;
    let d2 = if y <= FRAC_PI_2 {
        let q = y_over_sin(y);
        4.0 * r * q * q
    } else {
        8.0 * zeta * y * y / x_minus_sin(2.0 * y)
    };
    SRDistance {
        d: d2.sqrt(),
        d2_quarter: 0.25 * d2,
        y,
    }
}

/// Distance from the identity of a concrete point.
pub fn point_distance(g: &Point) -> f64 {
    sr_distance(g.profile()).d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, spec: &GroupSpec) -> Point {
        Point {
            x: (0..2 * spec.n).map(|_| rng.random_range(-2.0..2.0)).collect(),
            z: (0..spec.m).map(|_| rng.random_range(-2.0..2.0)).collect(),
        }
    }

    fn close(a: &Point, b: &Point, tol: f64) -> bool {
        a.x.iter().zip(&b.x).chain(a.z.iter().zip(&b.z)).all(|(u, v)| (u - v).abs() <= tol)
    }

    fn specs() -> Vec<GroupSpec> {
        vec![
            GroupSpec::heisenberg(1).unwrap(),
            GroupSpec::heisenberg(3).unwrap(),
            GroupSpec::quaternionic(2).unwrap(),
            GroupSpec::quaternionic(4).unwrap(),
        ]
    }

    #[test]
    fn inverse_and_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in specs() {
            for _ in 0..20 {
                let g = random_point(&mut rng, &spec);
                let h = random_point(&mut rng, &spec);
                let k = random_point(&mut rng, &spec);
                let e = group_mul(&spec, &g, &g.inverse()).unwrap();
                assert!(close(&e, &Point::identity(&spec), 1e-15));
                let left = group_mul(&spec, &group_mul(&spec, &g, &h).unwrap(), &k).unwrap();
                let right = group_mul(&spec, &g, &group_mul(&spec, &h, &k).unwrap()).unwrap();
                assert!(close(&left, &right, 1e-14));
            }
        }
    }

    #[test]
    fn j_maps_are_isometric_anticommuting_complex_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in specs() {
            let x = random_point(&mut rng, &spec).x;
            let norm = dot(&x, &x).sqrt();
            for k in 0..spec.m {
                let jx = spec.j_map(k, &x).unwrap();
                assert!((dot(&jx, &jx).sqrt() - norm).abs() < 1e-14);
                assert!(dot(&jx, &x).abs() < 1e-14);
                let jjx = spec.j_map(k, &jx).unwrap();
                assert!(jjx.iter().zip(&x).all(|(a, b)| (a + b).abs() < 1e-14));
                for l in 0..k {
                    let a = spec.j_map(l, &jx).unwrap();
                    let b = spec.j_map(k, &spec.j_map(l, &x).unwrap()).unwrap();
                    assert!(a.iter().zip(&b).all(|(a, b)| (a + b).abs() < 1e-14));
                }
            }
        }
    }

    #[test]
    fn radial_only_has_no_group_law() {
        let spec = GroupSpec::radial(2, 2).unwrap();
        let g = Point::identity(&spec);
        assert!(matches!(group_mul(&spec, &g, &g), Err(Error::ModelMismatch(_))));
        assert!(GroupSpec::quaternionic(3).is_err());
    }

    #[test]
    fn dilation_examples_and_automorphism() {
        let spec = GroupSpec::heisenberg(1).unwrap();
        let g = Point::new(vec![0.6, 0.8], vec![1.0]);
        assert_eq!(dilate(&spec, 1.0, &g).unwrap(), g);
        let p = dilate(&spec, 2.0, &g).unwrap().profile();
        assert!((p.r - 1.0).abs() < 1e-15 && (p.zeta - 4.0).abs() < 1e-15);
        assert!(dilate(&spec, 0.0, &g).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in specs() {
            let g = random_point(&mut rng, &spec);
            let h = random_point(&mut rng, &spec);
            let lam = 1.7;
            let lhs = dilate(&spec, lam, &group_mul(&spec, &g, &h).unwrap()).unwrap();
            let rhs = group_mul(
                &spec,
                &dilate(&spec, lam, &g).unwrap(),
                &dilate(&spec, lam, &h).unwrap(),
            )
            .unwrap();
            assert!(close(&lhs, &rhs, 1e-13));
        }
    }

    #[test]
    fn horizontal_gradient_examples() {
        let spec = GroupSpec::heisenberg(1).unwrap();
        let g = Point::new(vec![0.3, -1.2], vec![0.7]);
        let x1 = |p: &Point| p.x[0];
        assert!((horizontal_grad_sq(&spec, &x1, &g, 1e-4).unwrap() - 1.0).abs() < 1e-10);
        let zf = |p: &Point| p.z[0];
        let want = (g.x[0].powi(2) + g.x[1].powi(2)) / 4.0;
        assert!((horizontal_grad_sq(&spec, &zf, &g, 1e-4).unwrap() - want).abs() < 1e-10);
        let rf = |p: &Point| p.profile().r;
        let want = g.profile().r;
        assert!((horizontal_grad_sq(&spec, &rf, &g, 1e-4).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn sub_laplacian_of_quadratic() {
        // Delta |x|^2 = 2 * 2n and Delta z = 0
        let spec = GroupSpec::quaternionic(2).unwrap();
        let g = Point::new(vec![0.1, 0.2, -0.3, 0.4], vec![1.0, -2.0, 0.5]);
        let f = |p: &Point| p.x.iter().map(|v| v * v).sum::<f64>();
        assert!((sub_laplacian(&spec, &f, &g, 1e-3).unwrap() - 8.0).abs() < 1e-6);
        let zf = |p: &Point| p.z[1];
        assert!(sub_laplacian(&spec, &zf, &g, 1e-3).unwrap().abs() < 1e-6);
    }

    #[test]
    fn distance_conventions_and_limits() {
        let d = sr_distance(RadialProfile::new(2.25, 0.0).unwrap());
        assert_eq!(d.d, 3.0);
        let d = sr_distance(RadialProfile::new(0.0, 5.0).unwrap());
        assert!((d.d - 2.0 * (5.0 * PI).sqrt()).abs() < 1e-13);
        // continuity across the conventions
        for &eps in &[1e-6, 1e-9, 1e-12] {
            let near_axis = sr_distance(RadialProfile::new(2.0, eps).unwrap()).d;
            assert!((near_axis - 2.0 * 2f64.sqrt()).abs() < 1e-9);
            // the approach is only O(sqrt(R)), so R must be much smaller than eps
            let near_centre = sr_distance(RadialProfile::new(eps.powi(4), 3.0).unwrap()).d;
            assert!((near_centre - 2.0 * (3.0 * PI).sqrt()).abs() < 1e-9, "{near_centre}");
        }
    }

    #[test]
    fn distance_is_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = RadialProfile::new(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)).unwrap();
            let lam: f64 = rng.random_range(0.1..10.0);
            let lhs = sr_distance(p.dilated(lam)).d;
            let rhs = lam * sr_distance(p).d;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{p:?} {lam}");
        }
    }

    #[test]
    fn distance_branches_agree_and_quarter_square_identity() {
        for &(r, zeta) in &[(1.0, 0.5), (1.0, 1.5708), (1.0, 1.6), (0.3, 7.0), (2.0, 40.0)] {
            let p = RadialProfile::new(r, zeta).unwrap();
            let d = sr_distance(p);
            let y = d.y;
            let direct = 2.0 * r.sqrt() * y / y.sin();
            assert!((d.d - direct).abs() < 1e-11 * direct);
            // d^2/4 = |z| y + R y cot y
            let alt = zeta * y + r * y / y.tan();
            assert!((d.d2_quarter - alt).abs() < 1e-11 * d.d2_quarter);
        }
    }

    #[test]
    fn invariant_relations_between_delta_kappa() {
        let p = RadialProfile::new(2.5, 0.7).unwrap();
        assert!((p.delta() * p.kappa() - 2.0 * p.r).abs() < 1e-13);
        assert!((p.kappa() / p.delta() - 2.0 * PI * p.zeta).abs() < 1e-13);
    }

    #[test]
    fn eikonal_identity_on_h1() {
        let spec = GroupSpec::heisenberg(1).unwrap();
        let f = |p: &Point| -point_distance(p).powi(2) / 2.0;
        for &(a, b, z) in &[(1.0, 0.0, 0.3), (0.4, -0.9, 1.2), (-2.0, 1.0, -3.0)] {
            let g = Point::new(vec![a, b], vec![z]);
            let d2 = point_distance(&g).powi(2);
            let grad = horizontal_grad_sq_richardson(&spec, &f, &g, 1e-3).unwrap();
            assert!((grad - d2).abs() < 1e-6, "{grad} vs {d2}");
        }
    }
}
