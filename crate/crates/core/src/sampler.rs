//! Horizontal Brownian motion on concrete models, as an independent Monte
//! Carlo oracle for heat-kernel integrals and concentration bounds.
//!
//! The generator is the sub-Laplacian `sum_i X_i^2` without a factor 1/2, so
//! each horizontal coordinate receives increments of variance `2 dt`. The
//! central coordinate accumulates `dz = [x, dx] / 2`, the exact Lévy area of
//! the piecewise-linear path (equivalently the midpoint rule, since
//! `[x + dx/2, dx] = [x, dx]`).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{herbst_chain, HerbstBound};
use crate::error::{invalid, Error, Result};
use crate::geometry::{GroupSpec, Model, Point};

/// Paths per random stream. Fixed, so a run does not depend on how chunks
/// are spread over workers.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathConfig {
    pub t: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
}

impl PathConfig {
    /// Default resolution is 512 steps per unit time.
    pub fn new(t: f64, paths: usize, seed: u64) -> Result<Self> {
        let steps = ((512.0 * t).ceil() as usize).max(64);
        Self::with_steps(t, steps, paths, seed)
    }

    pub fn with_steps(t: f64, steps: usize, paths: usize, seed: u64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", "must be finite and > 0"));
        }
        if steps == 0 || paths == 0 {
            return Err(invalid("steps, paths", "must be >= 1"));
        }
        Ok(Self { t, steps, paths, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub points: Vec<Point>,
    pub config: PathConfig,
}

/// Dense matrices of the maps `J_{u_k}`.
fn j_matrices(spec: &GroupSpec) -> Result<Vec<Vec<f64>>> {
    let d = 2 * spec.n;
    (0..spec.m)
        .map(|k| {
            // row-major: column c is J e_c
            let mut mat = vec![0.0; d * d];
            for c in 0..d {
                let mut e = vec![0.0; d];
                e[c] = 1.0;
                for (r, v) in spec.j_map(k, &e)?.into_iter().enumerate() {
                    mat[r * d + c] = v;
                }
            }
            Ok(mat)
        })
        .collect()
}

fn simulate_chunk(
    spec: &GroupSpec,
    jm: &[Vec<f64>],
    config: &PathConfig,
    chunk: usize,
    count: usize,
) -> Vec<Point> {
    let d = 2 * spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chunk as u64);
    let sd = (2.0 * config.t / config.steps as f64).sqrt();
    let mut dx = vec![0.0; d];
    let mut jx = vec![0.0; d];
    (0..count)
        .map(|_| {
            let mut x = vec![0.0; d];
            let mut z = vec![0.0; spec.m];
            for _ in 0..config.steps {
                for v in dx.iter_mut() {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    *v = sd * n;
                }
                for (k, mat) in jm.iter().enumerate() {
                    for (r, slot) in jx.iter_mut().enumerate() {
                        *slot = (0..d).map(|c| mat[r * d + c] * x[c]).sum();
                    }
                    z[k] += 0.5 * jx.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
                }
                for (xi, di) in x.iter_mut().zip(&dx) {
                    *xi += di;
                }
            }
            Point::new(x, z)
        })
        .collect()
}

/// Endpoints of `config.paths` discretised horizontal Brownian paths started
/// at the identity.
pub fn simulate(spec: &GroupSpec, config: &PathConfig) -> Result<SampleBatch> {
    if spec.model == Model::RadialOnly {
        return Err(Error::ModelMismatch("sampling needs a concrete group law".into()));
    }
    let jm = j_matrices(spec)?;
    let chunks = config.paths.div_ceil(CHUNK);
    let points = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(config.paths - c * CHUNK);
            simulate_chunk(spec, &jm, config, c, count)
        })
        .flatten()
        .collect();
    Ok(SampleBatch {
        points,
        config: *config,
    })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl McEstimate {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// `|a - b|` in units of the combined standard error.
    pub fn z_score(&self, other: f64, other_error: f64) -> f64 {
        let s = self.std_error.hypot(other_error);
        if s == 0.0 {
            if self.mean == other { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - other).abs() / s
        }
    }
}

/// Monte Carlo estimate of `int f dmu_t`.
pub fn expectation(samples: &SampleBatch, f: impl Fn(&Point) -> f64 + Sync) -> McEstimate {
    let values: Vec<f64> = samples.points.par_iter().map(&f).collect();
    McEstimate::from_values(&values)
}

/// Monte Carlo `K(1) = log int e^g dmu_t` with a delta-method error.
pub fn k1_estimate(samples: &SampleBatch, g: impl Fn(&Point) -> f64 + Sync) -> McEstimate {
    let m = expectation(samples, |p| g(p).exp());
    McEstimate {
        mean: m.mean.ln(),
        std_error: m.std_error / m.mean,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub r: f64,
    /// Empirical `P(|g| >= r)`.
    pub frequency: f64,
    pub std_error: f64,
    pub herbst: Option<HerbstBound>,
}

impl TailRow {
    /// `frequency <= bound (1 + 3 relative MC error)`, true when no bound is
    /// attached.
    pub fn dominated(&self) -> bool {
        match &self.herbst {
            None => true,
            Some(h) => {
                let rel = if self.frequency > 0.0 { self.std_error / self.frequency } else { 0.0 };
                self.frequency <= h.bound * (1.0 + 3.0 * rel)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FerniqueReport {
    pub alpha: f64,
    /// Sample mean of `exp(alpha g^2)`.
    pub estimate: McEstimate,
    pub relative_std_error: f64,
    /// Set when the relative standard error exceeds 50%.
    pub heavy_tail: bool,
    pub tails: Vec<TailRow>,
    /// `K(1)` used for the Herbst columns.
    pub k1: Option<McEstimate>,
}

/// Parameters of the Herbst comparison columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HerbstParams {
    pub eta: f64,
    pub theta: f64,
}

/// Empirical Fernique integral `int exp(alpha g^2) dmu_t` and tail
/// frequencies of `|g|`, optionally against the Herbst bounds with `K(1)`
/// estimated from the same samples.
pub fn empirical_fernique(
    samples: &SampleBatch,
    g: impl Fn(&Point) -> f64 + Sync,
    alpha: f64,
    radii: &[f64],
    herbst: Option<HerbstParams>,
) -> Result<FerniqueReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", "must be finite and > 0"));
    }
    let values: Vec<f64> = samples.points.par_iter().map(&g).collect();
    let exps: Vec<f64> = values.iter().map(|v| (alpha * v * v).exp()).collect();
    let estimate = McEstimate::from_values(&exps);
    let relative_std_error = estimate.std_error / estimate.mean;
    let k1 = herbst.map(|_| k1_estimate(samples, &g));
    let n = values.len() as f64;
    let tails = radii
        .iter()
        .map(|&r| {
            let hits = values.iter().filter(|v| v.abs() >= r).count() as f64;
            let p = hits / n;
            let herbst = match (herbst, k1) {
                (Some(h), Some(k)) => Some(herbst_chain(h.eta, h.theta, samples.config.t, k.mean, r)?),
                _ => None,
            };
            Ok(TailRow {
                r,
                frequency: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
                herbst,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FerniqueReport {
        alpha,
        estimate,
        relative_std_error,
        heavy_tail: relative_std_error > 0.5,
        tails,
        k1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> GroupSpec {
        GroupSpec::heisenberg(1).unwrap()
    }

    #[test]
    fn independent_of_worker_count() {
        let spec = h1();
        let cfg = PathConfig::with_steps(1.0, 16, 3000, 7).unwrap();
        let a = simulate(&spec, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate(&spec, &cfg).unwrap());
        assert_eq!(a, b);
        let c = simulate(&spec, &PathConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.points[0], c.points[0]);
    }

    #[test]
    fn horizontal_second_moment() {
        let spec = h1();
        let cfg = PathConfig::with_steps(1.0, 8, 40_000, 1).unwrap();
        let s = simulate(&spec, &cfg).unwrap();
        let m = expectation(&s, |p| p.x.iter().map(|v| v * v).sum());
        // 2 coordinates of variance 2t
        assert!(m.z_score(4.0, 0.0) < 3.0, "{m:?}");
        let mean = expectation(&s, |p| p.x[0]);
        assert!(mean.z_score(0.0, 0.0) < 3.0);
    }

    #[test]
    fn zero_function_fernique_is_one() {
        let spec = h1();
        let s = simulate(&spec, &PathConfig::with_steps(1.0, 4, 100, 3).unwrap()).unwrap();
        let r = empirical_fernique(&s, |_| 0.0, 0.2, &[1.0], None).unwrap();
        assert_eq!(r.estimate.mean, 1.0);
        assert_eq!(r.tails[0].frequency, 0.0);
    }

    #[test]
    fn rejects_radial_only() {
        let spec = GroupSpec::radial(2, 2).unwrap();
        assert!(simulate(&spec, &PathConfig::new(1.0, 10, 0).unwrap()).is_err());
    }
}
