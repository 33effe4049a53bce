//! Ordinary least squares with an intercept, solved by Householder QR, with
//! coefficient standard errors and two-sided t-tests.

use nalgebra::{DMatrix, DVector};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Relative magnitude below which an `R` diagonal entry marks a column as
/// linearly dependent on the columns before it.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    /// Intercept first, then one entry per predictor in input order.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sse: f64,
    /// Residual degrees of freedom `n - p - 1`.
    pub df: usize,
}

impl LeastSquares {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    /// Slope of predictor `j` (0-based, excluding the intercept).
    pub fn slope(&self, j: usize) -> f64 {
        self.coefficients[j + 1]
    }

    pub fn slope_std_error(&self, j: usize) -> f64 {
        self.std_errors[j + 1]
    }

    /// Two-sided p-value for H0: slope `j` = 0.
    pub fn slope_p_value(&self, j: usize) -> f64 {
        t_test_p_value(self.slope(j), self.slope_std_error(j), self.df)
    }
}

/// Two-sided p-value of `estimate / std_error` under Student's t with `df`
/// degrees of freedom, via `P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn t_test_p_value(estimate: f64, std_error: f64, df: usize) -> f64 {
    if std_error == 0.0 || !std_error.is_finite() {
        return if estimate == 0.0 { 1.0 } else { 0.0 };
    }
    let t = estimate / std_error;
    let nu = df as f64;
    let x = nu / (nu + t * t);
    beta_reg(nu / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Fit `y ~ 1 + predictors`. Predictor names are used in error reports only.
pub fn fit_least_squares(predictors: &[(&str, &[f64])], y: &[f64]) -> Result<LeastSquares> {
    let n = y.len();
    let p = predictors.len() + 1;
    if n < p + 1 {
        return Err(Error::TooFewRows {
            needed: p + 1,
            got: n,
        });
    }
    for (name, col) in predictors {
        if col.len() != n {
            return Err(Error::SchemaMismatch(format!(
                "predictor `{name}` has {} rows, outcome has {n}",
                col.len()
            )));
        }
    }

    let x = DMatrix::from_fn(
        n,
        p,
        |i, j| if j == 0 { 1.0 } else { predictors[j - 1].1[i] },
    );
    let col_norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();

    let qr = x.clone().qr();
    let r = qr.r();
    let singular: Vec<String> = (0..p)
        .filter(|&j| r[(j, j)].abs() <= RANK_TOLERANCE * col_norms[j].max(f64::MIN_POSITIVE))
        .map(|j| {
            if j == 0 {
                "intercept".to_string()
            } else {
                predictors[j - 1].0.to_string()
            }
        })
        .collect();
    if !singular.is_empty() {
        return Err(Error::Singular(singular));
    }

    // Shifting y by a constant only moves the intercept; anchoring at y[0]
    // makes a constant outcome produce exactly zero slopes.
    let shift = y[0];
    let ys = DVector::from_iterator(n, y.iter().map(|v| v - shift));
    let qty = qr.q().transpose() * &ys;
    let mut beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular(vec!["design".into()]))?;
    beta[0] += shift;

    let fitted_v = &x * &beta;
    let fitted: Vec<f64> = fitted_v.iter().copied().collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let df = n - p;
    let sigma2 = sse / df as f64;

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Singular(vec!["design".into()]))?;
    // (X'X)^{-1} = R^{-1} R^{-T}; its diagonal is the squared row norms of R^{-1}
    let std_errors = (0..p)
        .map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt())
        .collect();

    Ok(LeastSquares {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        fitted,
        residuals,
        sse,
        df,
    })
}
