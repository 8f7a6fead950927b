//! Small dense least-squares fits used by the asymptotic diagnostics.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Standard errors of the coefficients from the residual variance;
    /// zero when there are no spare degrees of freedom.
    pub std_errors: Vec<f64>,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    pub residual_rms: f64,
}

/// Solve `a x = rhs` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, rhs: &[f64]) -> Option<Vec<f64>> {
    let k = rhs.len();
    for (row, &b) in a.iter_mut().zip(rhs) {
        row.push(b);
    }
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..=k {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][k] - s) / a[i][i];
    }
    Some(x)
}

/// Ordinary least squares `y ~ X c` through the normal equations.
///
/// Columns are rescaled to unit norm first so the tiny systems used here
/// stay well conditioned. Returns `None` for rank-deficient designs.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<LinearFit> {
    let k = rows.first()?.len();
    if rows.len() < k || rows.len() != y.len() {
        return None;
    }
    let norms: Vec<f64> = (0..k)
        .map(|j| rows.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|&s| s == 0.0) {
        return None;
    }
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..k {
            let xi = row[i] / norms[i];
            for j in 0..k {
                gram[i][j] += xi * row[j] / norms[j];
            }
            rhs[i] += xi * yi;
        }
    }
    let scaled = solve(gram.clone(), &rhs)?;
    let coefficients: Vec<f64> = scaled.iter().zip(&norms).map(|(c, s)| c / s).collect();

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (row, &yi) in rows.iter().zip(y) {
        let fit: f64 = row.iter().zip(&coefficients).map(|(x, c)| x * c).sum();
        ss_res += (yi - fit).powi(2);
        ss_tot += (yi - mean).powi(2);
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    let dof = y.len() - k;
    let sigma2 = if dof > 0 { ss_res / dof as f64 } else { 0.0 };
    let std_errors = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            let col = solve(gram.clone(), &e)?;
            Some((sigma2 * col[i]).sqrt() / norms[i])
        })
        .collect::<Option<Vec<f64>>>()?;

    Some(LinearFit {
        coefficients,
        std_errors,
        r_squared,
        residual_rms: (ss_res / y.len() as f64).sqrt(),
    })
}
