use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Largest accepted condition number of `XᵀX`.
pub const MAX_CONDITION: f64 = 1e12;

/// Covariates, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    data: DMatrix<f64>,
    names: Vec<String>,
}

impl DesignMatrix {
    pub fn new(data: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::Dimension(format!(
                "{} column names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let row = pos % data.nrows().max(1);
            return Err(Error::InvalidInput(format!("non-finite covariate in row {row}")));
        }
        Ok(DesignMatrix { data, names })
    }

    /// Build from rows, naming columns `x1..xp`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("ragged design rows".into()));
        }
        let data = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        DesignMatrix::new(data, (1..=p).map(|j| format!("x{j}")).collect())
    }

    pub fn from_columns(columns: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let data = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
        DesignMatrix::new(data, names)
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.column(j).iter().copied().collect()
    }

    /// Keep the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            data: self.data.select_rows(rows),
            names: self.names.clone(),
        }
    }

    /// First `n` rows.
    pub fn head(&self, n: usize) -> DesignMatrix {
        DesignMatrix {
            data: self.data.rows(0, n.min(self.nrows())).into_owned(),
            names: self.names.clone(),
        }
    }

    /// Keep the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> DesignMatrix {
        DesignMatrix {
            data: self.data.select_columns(cols),
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
        }
    }
}

/// Least-squares fit without intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub stderr: Vec<f64>,
    pub tstat: Vec<f64>,
    pub pvalues: Vec<f64>,
    /// Squared correlation between observed and fitted values.
    pub r2: f64,
    /// `1 − RSS/Σy²`, the usual summary for regressions through the origin.
    pub r2_uncentered: f64,
    pub sigma2: f64,
    pub df: usize,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl LinearFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.beta).map(|(a, b)| a * b).sum()
    }
}

fn condition_number(gram: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Squared Pearson correlation; zero when either side is constant.
pub fn squared_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        0.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    }
}

pub(crate) fn two_sided_p(t: f64, df: usize) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// `β̂ = (XᵀX)⁻¹XᵀY` with t-based inference on `n − p` degrees of freedom.
pub fn ols_no_intercept(x: &DesignMatrix, y: &[f64]) -> Result<LinearFit> {
    let (n, p) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::Dimension(format!("{n} design rows but {} responses", y.len())));
    }
    if p == 0 {
        return Err(Error::Dimension("design has no columns".into()));
    }
    if n <= p {
        return Err(Error::InsufficientData(format!(
            "need more than {p} observations, got {n}"
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite response at row {i}")));
    }
    let xm = x.matrix();
    let yv = DVector::from_column_slice(y);
    let gram = xm.transpose() * xm;
    let cond = condition_number(&gram);
    if !(cond < MAX_CONDITION) {
        return Err(Error::Singular(cond));
    }
    let chol = gram.clone().cholesky().ok_or(Error::Singular(cond))?;
    let beta = chol.solve(&(xm.transpose() * &yv));
    let fitted = xm * &beta;
    let residuals = &yv - &fitted;
    let df = n - p;
    let sigma2 = residuals.norm_squared() / df as f64;
    let inv = chol.inverse();
    let stderr: Vec<f64> = (0..p).map(|j| (sigma2 * inv[(j, j)]).sqrt()).collect();
    let tstat: Vec<f64> = beta.iter().zip(&stderr).map(|(b, s)| b / s).collect();
    let pvalues = tstat.iter().map(|&t| two_sided_p(t, df)).collect();
    let fitted: Vec<f64> = fitted.iter().copied().collect();
    let total = yv.norm_squared();
    let r2_uncentered = if total > 0.0 {
        1.0 - residuals.norm_squared() / total
    } else {
        0.0
    };
    Ok(LinearFit {
        names: x.names().to_vec(),
        beta: beta.iter().copied().collect(),
        stderr,
        tstat,
        pvalues,
        r2: squared_correlation(y, &fitted),
        r2_uncentered,
        sigma2,
        df,
        fitted,
        residuals: residuals.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn design(cols: &[Vec<f64>]) -> DesignMatrix {
        let names = (0..cols.len()).map(|j| format!("x{j}")).collect();
        DesignMatrix::from_columns(cols, names).unwrap()
    }

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = ols_no_intercept(&design(&[x]), &y).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.pvalues[0] < 1e-12);
    }

    #[test]
    fn orthogonal_response() {
        let x1 = vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let x2 = vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let y = vec![1.0, -1.0, 2.0, -2.0, 3.0, -3.0];
        let fit = ols_no_intercept(&design(&[x1, x2]), &y).unwrap();
        assert!(fit.beta.iter().all(|b| b.abs() < 1e-12));
        assert_eq!(fit.r2, 0.0);
    }

    #[test]
    fn textbook_standard_error() {
        // y = b x, x = 1..5, y = (1.1, 1.9, 3.2, 3.9, 5.1)
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![1.1, 1.9, 3.2, 3.9, 5.1];
        let fit = ols_no_intercept(&design(std::slice::from_ref(&x)), &y).unwrap();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let b = sxy / sxx;
        let rss: f64 = x.iter().zip(&y).map(|(a, c)| (c - b * a).powi(2)).sum();
        assert!((fit.beta[0] - b).abs() < 1e-14);
        assert!((fit.stderr[0] - (rss / 4.0 / sxx).sqrt()).abs() < 1e-14);
        assert_eq!(fit.df, 4);
    }

    #[test]
    fn p_value_reference_points() {
        // t(10) two-sided 5% critical value 2.228139
        assert!((two_sided_p(2.228139, 10) - 0.05).abs() < 1e-6);
        assert!((two_sided_p(0.0, 3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_design_rejected() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let err = ols_no_intercept(&design(&[x.clone(), x]), &[1.0, 2.0, 3.0, 4.0]).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
        let err = ols_no_intercept(&design(&[vec![1.0, 2.0]]), &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
        let err = ols_no_intercept(&design(&[vec![1.0]]), &[1.0]).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    fn dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        (8usize..30, 1usize..4).prop_flat_map(|(n, p)| {
            (
                prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), p),
                prop::collection::vec(-5.0f64..5.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_columns((cols, y) in dataset()) {
            let x = design(&cols);
            if let Ok(fit) = ols_no_intercept(&x, &y) {
                let scale: f64 = y.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
                for c in &cols {
                    let g: f64 = c.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
                    let cs: f64 = c.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
                    prop_assert!(g.abs() < 1e-8 * scale * cs);
                }
            }
        }

        #[test]
        fn column_scaling_covariance((cols, y) in dataset(), s in 0.1f64..10.0) {
            let x = design(&cols);
            if let Ok(fit) = ols_no_intercept(&x, &y) {
                let mut scaled = cols.clone();
                scaled[0].iter_mut().for_each(|v| *v *= s);
                let fit2 = ols_no_intercept(&design(&scaled), &y).unwrap();
                prop_assert!((fit2.beta[0] * s - fit.beta[0]).abs() < 1e-7 * (1.0 + fit.beta[0].abs()));
                for (a, b) in fit.fitted.iter().zip(&fit2.fitted) {
                    prop_assert!((a - b).abs() < 1e-7 * (1.0 + a.abs()));
                }
                for (a, b) in fit.tstat.iter().zip(&fit2.tstat) {
                    prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
                }
                for (a, b) in fit.pvalues.iter().zip(&fit2.pvalues) {
                    prop_assert!((a - b).abs() < 1e-6);
                }
            }
        }
    }
}
