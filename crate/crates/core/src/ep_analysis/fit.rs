use nalgebra::{DMatrix, DVector};

use crate::error::{AnalysisError, LinalgError};

/// Solution of a dense linear least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coeffs: Vec<f64>,
    /// Root-mean-square residual over the rows.
    pub residual_rms: f64,
    /// Standard errors from `s^2 (A^T A)^-1`; empty when there are no spare rows.
    pub stderr: Vec<f64>,
}

/// Minimises `||A c - y||` over `c`, with `A` given row by row.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<LeastSquares, AnalysisError> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || m != y.len() || rows.iter().any(|r| r.len() != n) {
        return Err(AnalysisError::InvalidInput(format!(
            "least squares needs a nonempty {m}x{n} design matching {} values",
            y.len()
        )));
    }
    if m < n {
        return Err(AnalysisError::InvalidInput(format!(
            "underdetermined fit: {m} rows for {n} unknowns"
        )));
    }
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let c = svd
        .solve(&b, smax * 1e-13)
        .map_err(|_| AnalysisError::Linalg(LinalgError::NoConvergence))?;
    let r = &a * &c - &b;
    let ssr = r.norm_squared();
    let residual_rms = (ssr / m as f64).sqrt();
    let stderr = if m > n {
        let s2 = ssr / (m - n) as f64;
        match (a.transpose() * &a).try_inverse() {
            Some(inv) => (0..n).map(|j| (s2 * inv[(j, j)]).max(0.0).sqrt()).collect(),
            None => Vec::new(),
        }
    } else {
        Vec::new()
    };
    Ok(LeastSquares {
        coeffs: c.iter().copied().collect(),
        residual_rms,
        stderr,
    })
}
