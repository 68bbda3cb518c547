use serde::{Deserialize, Serialize};

use super::ols::{ols_no_intercept, DesignMatrix, LinearFit};
use crate::error::{Error, Result};

/// Zero-mean autoregression fitted by least squares on the lagged values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArFit {
    pub order: usize,
    /// Regression of `y_t` on `(y_{t−1}, …, y_{t−p})` for `t = p..n`.
    pub fit: LinearFit,
}

impl ArFit {
    pub fn coefficients(&self) -> &[f64] {
        &self.fit.beta
    }

    pub fn stderr(&self) -> &[f64] {
        &self.fit.stderr
    }

    /// One-step-ahead fitted value of `y[t]` for `t ≥ order`.
    pub fn fitted(&self) -> &[f64] {
        &self.fit.fitted
    }

    pub fn residuals(&self) -> &[f64] {
        &self.fit.residuals
    }

    /// Prediction of the value following `history` (most recent last).
    pub fn predict_next(&self, history: &[f64]) -> Result<f64> {
        ar_predict(&self.fit.beta, history)
    }
}

/// `Σ_j β_j y_{t−1−j}` for the value following `history`.
pub fn ar_predict(beta: &[f64], history: &[f64]) -> Result<f64> {
    if history.len() < beta.len() {
        return Err(Error::InsufficientData(format!(
            "need {} past values, got {}",
            beta.len(),
            history.len()
        )));
    }
    Ok(beta
        .iter()
        .enumerate()
        .map(|(j, b)| b * history[history.len() - 1 - j])
        .sum())
}

/// Lag design with rows `t = order..n` and column `j` holding `y[t−1−j]`.
pub fn lag_design(y: &[f64], order: usize) -> Result<(DesignMatrix, Vec<f64>)> {
    if order == 0 {
        return Err(Error::InvalidInput("AR order must be positive".into()));
    }
    if y.len() <= order + 1 {
        return Err(Error::InsufficientData(format!(
            "AR({order}) needs more than {} values, got {}",
            order + 1,
            y.len()
        )));
    }
    let columns: Vec<Vec<f64>> = (0..order)
        .map(|j| (order..y.len()).map(|t| y[t - 1 - j]).collect())
        .collect();
    let names = (1..=order).map(|j| format!("lag{j}")).collect();
    Ok((DesignMatrix::from_columns(&columns, names)?, y[order..].to_vec()))
}

pub fn fit_ar(y: &[f64], order: usize) -> Result<ArFit> {
    let (x, target) = lag_design(y, order)?;
    Ok(ArFit {
        order,
        fit: ols_no_intercept(&x, &target)?,
    })
}

/// Sample autocorrelations and partial autocorrelations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    /// `acf[k]` for `k = 0..=max_lag`.
    pub acf: Vec<f64>,
    /// `pacf[k − 1]` for `k = 1..=max_lag`.
    pub pacf: Vec<f64>,
    /// Half-width of the approximate 95% white-noise band, `1.96/√n`.
    pub band: f64,
}

pub fn acf_pacf(y: &[f64], max_lag: usize) -> Result<Correlogram> {
    let n = y.len();
    if max_lag == 0 || 2 * max_lag >= n {
        return Err(Error::InvalidInput(format!(
            "max_lag must be positive and below n/2 (n = {n}, max_lag = {max_lag})"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in series".into()));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let c0 = c.iter().map(|v| v * v).sum::<f64>();
    if c0 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let acf: Vec<f64> = (0..=max_lag)
        .map(|k| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect();

    // Durbin-Levinson
    let mut pacf = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = acf[k] - (0..k - 1).map(|j| phi[j] * acf[k - 1 - j]).sum::<f64>();
        let a = num / v;
        let next: Vec<f64> = (0..k - 1).map(|j| phi[j] - a * phi[k - 2 - j]).collect();
        phi = next;
        phi.push(a);
        v *= 1.0 - a * a;
        pacf.push(a);
    }
    Ok(Correlogram {
        acf,
        pacf,
        band: 1.96 / (n as f64).sqrt(),
    })
}
