//! Derivative-free local minimisation (Nelder–Mead simplex).

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Stop once every vertex is within this distance of the best vertex.
    pub x_tol: f64,
    /// ... and the spread of function values is below this.
    pub f_tol: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-7,
            f_tol: 1e-12,
            max_evaluations: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimise `f` starting from `x0` with initial edge lengths `steps`.
///
/// Non-finite function values are treated as `+inf`, so the simplex backs
/// away from regions where the objective cannot be evaluated.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(dim, steps.len());
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evals < opts.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let spread_x = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&best.0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread_f = simplex[dim].1 - best.1;
        if spread_x <= opts.x_tol && spread_f <= opts.f_tol.max(f64::EPSILON * best.1.abs()) {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let worst = simplex[dim].0.clone();
        let xr = along(alpha, &worst);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(gamma, &worst);
            let fe = eval(&xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[dim].1 {
            let xc = along(rho * alpha, &worst);
            let v = eval(&xc, &mut evals);
            (xc, v)
        } else {
            let xc = along(-rho, &worst);
            let v = eval(&xc, &mut evals);
            (xc, v)
        };
        if fc < fr.min(simplex[dim].1) {
            simplex[dim] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let best_x = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best_x
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evals,
        converged,
    }
}
