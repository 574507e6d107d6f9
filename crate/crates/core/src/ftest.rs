//! Linear-regression partial F-test baseline.
//!
//! Ordinary least squares is solved by Householder QR (never the normal
//! equations) with a rank check on the magnitude of the R diagonal, and the
//! single-coefficient partial F-test compares the residual sums of squares of
//! the full model against the model with one feature removed, calibrated by
//! `F(1, n - d - 1)`.

use crate::data::Dataset;
use crate::distributions::{f_sf, PValue};
use crate::error::{Error, Result};

/// Relative threshold on R-diagonal magnitudes below which the design is
/// declared rank deficient.
const RANK_TOL: f64 = 1e-10;

/// An ordinary-least-squares fit with intercept.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Intercept first, then one coefficient per selected column.
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub n: usize,
    /// Number of predictors (excluding the intercept).
    pub p: usize,
}

/// Outcome of a single-coefficient partial F-test.
#[derive(Debug, Clone, Copy)]
pub struct FTestOutcome {
    pub f_stat: f64,
    pub p_value: PValue,
    /// The full model fits perfectly; the statistic is off the scale and the
    /// p-value is reported as 0.
    pub degenerate: bool,
}

/// Least-squares fit of the response on an intercept plus the selected
/// columns of the design matrix.
pub fn ols_fit(data: &Dataset, columns: &[usize]) -> Result<OlsFit> {
    for &c in columns {
        if c >= data.d() {
            return Err(Error::DimensionMismatch(format!(
                "column {c} out of range for d = {}",
                data.d()
            )));
        }
    }
    let n = data.n();
    let p = columns.len();
    if n <= p + 1 {
        return Err(Error::InvalidConfig(format!(
            "OLS needs n > p + 1 (n = {n}, p = {p})"
        )));
    }
    let ncols = p + 1;
    let mut design = Vec::with_capacity(n * ncols);
    for i in 0..n {
        design.push(1.0);
        let row = data.row(i);
        design.extend(columns.iter().map(|&c| row[c]));
    }
    let (coefficients, rss) = solve_least_squares(&mut design, n, ncols, data.y())?;
    Ok(OlsFit {
        coefficients,
        rss,
        n,
        p,
    })
}

/// Partial F-test of a single feature with every other column retained:
/// `F = (rss0 - rss1) / (rss1 / (n - d - 1))`, `p = f_sf(F, 1, n - d - 1)`.
pub fn f_test_feature(data: &Dataset, feature: usize) -> Result<FTestOutcome> {
    let d = data.d();
    if feature >= d {
        return Err(Error::DimensionMismatch(format!(
            "feature {feature} out of range for d = {d}"
        )));
    }
    let n = data.n();
    if n <= d + 1 {
        return Err(Error::InvalidConfig(format!(
            "partial F-test needs n > d + 1 (n = {n}, d = {d})"
        )));
    }
    let all: Vec<usize> = (0..d).collect();
    let reduced: Vec<usize> = (0..d).filter(|&c| c != feature).collect();
    let full = ols_fit(data, &all)?;
    let restricted = ols_fit(data, &reduced)?;

    let df2 = (n - d - 1) as u64;
    let mean_y = data.mean_y();
    let tss: f64 = data.y().iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    if full.rss <= f64::EPSILON * tss.max(1.0) {
        return Ok(FTestOutcome {
            f_stat: f64::MAX,
            p_value: PValue::new(0.0)?,
            degenerate: true,
        });
    }
    // Nested models: rss0 >= rss1 up to rounding.
    let f_stat = ((restricted.rss - full.rss).max(0.0)) / (full.rss / df2 as f64);
    Ok(FTestOutcome {
        f_stat,
        p_value: f_sf(f_stat, 1, df2)?,
        degenerate: false,
    })
}

/// Householder QR least squares. `design` is row-major `nrows × ncols` and is
/// consumed as workspace. Returns the coefficients and the residual sum of
/// squares (the squared norm of the trailing components of `Qᵀy`).
pub(crate) fn solve_least_squares(
    design: &mut [f64],
    nrows: usize,
    ncols: usize,
    y: &[f64],
) -> Result<(Vec<f64>, f64)> {
    debug_assert_eq!(design.len(), nrows * ncols);
    debug_assert_eq!(y.len(), nrows);
    if nrows < ncols {
        return Err(Error::InvalidConfig(format!(
            "least squares needs nrows >= ncols ({nrows} < {ncols})"
        )));
    }
    let a = design;
    let mut qty = y.to_vec();

    for k in 0..ncols {
        // Householder reflector for column k below the diagonal.
        let mut norm = 0.0;
        for i in k..nrows {
            let v = a[i * ncols + k];
            norm += v * v;
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return Err(Error::RankDeficient);
        }
        let akk = a[k * ncols + k];
        let alpha = if akk >= 0.0 { -norm } else { norm };
        // v = x - alpha e1, applied implicitly with v stored in the column.
        a[k * ncols + k] = akk - alpha;
        let vtv: f64 = (k..nrows)
            .map(|i| a[i * ncols + k] * a[i * ncols + k])
            .sum();
        if vtv > 0.0 {
            // Reflect the remaining columns.
            for j in (k + 1)..ncols {
                let dot: f64 = (k..nrows)
                    .map(|i| a[i * ncols + k] * a[i * ncols + j])
                    .sum();
                let scale = 2.0 * dot / vtv;
                for i in k..nrows {
                    a[i * ncols + j] -= scale * a[i * ncols + k];
                }
            }
            // Reflect the response.
            let dot: f64 = (k..nrows).map(|i| a[i * ncols + k] * qty[i]).sum();
            let scale = 2.0 * dot / vtv;
            for i in k..nrows {
                qty[i] -= scale * a[i * ncols + k];
            }
        }
        // Store R's diagonal entry.
        a[k * ncols + k] = alpha;
    }

    // Rank check on the triangular diagonal.
    let max_diag = (0..ncols)
        .map(|k| a[k * ncols + k].abs())
        .fold(0.0_f64, f64::max);
    for k in 0..ncols {
        if a[k * ncols + k].abs() <= RANK_TOL * max_diag.max(1.0) {
            return Err(Error::RankDeficient);
        }
    }

    // Back substitution: R beta = (Q^T y)[..ncols].
    let mut beta = vec![0.0; ncols];
    for k in (0..ncols).rev() {
        let mut acc = qty[k];
        for j in (k + 1)..ncols {
            acc -= a[k * ncols + j] * beta[j];
        }
        beta[k] = acc / a[k * ncols + k];
    }

    let rss = qty[ncols..].iter().map(|v| v * v).sum();
    Ok((beta, rss))
}

/// OLS of `y` on an intercept plus the columns of `x` (row-major `n × c`),
/// returning fitted coefficients and the residual vector.
pub(crate) fn ols_residuals(
    x: &[f64],
    n: usize,
    c: usize,
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if y.len() != n || x.len() != n * c {
        return Err(Error::DimensionMismatch(format!(
            "OLS shapes: x {} (want {}), y {} (want {n})",
            x.len(),
            n * c,
            y.len()
        )));
    }
    if n <= c + 1 {
        return Err(Error::InvalidConfig(format!(
            "OLS needs n > c + 1 (n = {n}, c = {c})"
        )));
    }
    let ncols = c + 1;
    let mut design = Vec::with_capacity(n * ncols);
    for i in 0..n {
        design.push(1.0);
        design.extend_from_slice(&x[i * c..(i + 1) * c]);
    }
    let design_copy = design.clone();
    let (beta, _rss) = solve_least_squares(&mut design, n, ncols, y)?;
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let row = &design_copy[i * ncols..(i + 1) * ncols];
        let fitted: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
        residuals.push(y[i] - fitted);
    }
    Ok((beta, residuals))
}
