//! End-to-end fitting: embed, fit a circle, regress the linear variable and
//! map the fitted values back to density forecasts.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{forecast_eta, DensityForecast};
use crate::gof::{validate, ValidationReport};
use crate::linmod::{
    cross_validate, fit_ar, lambda_grid, ols_no_intercept, ArFit, CvResult, DesignMatrix, ElasticNetOptions,
    LambdaChoice, LinearFit,
};
use crate::nnts::NntsParams;
use crate::sphere::{dot, embed_all, fit_circle, to_linear, Branch, Circle, CircleFit, CircleKind, TrigMomentVector};

/// How the regression coefficients are estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Estimator {
    Ols,
    ElasticNet {
        alpha: f64,
        choice: LambdaChoice,
        folds: usize,
        seed: u64,
        n_lambda: usize,
    },
}

/// Fitted circle plus the linear variable it induces.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub vectors: Vec<TrigMomentVector>,
    pub circle: CircleFit,
    pub y: Vec<f64>,
    pub branches: Vec<Branch>,
}

pub fn transform(thetas: &[f64], m: usize, kind: CircleKind) -> Result<Transformed> {
    let vectors = embed_all(thetas, m);
    let circle = fit_circle(&vectors, kind)?;
    transform_with(vectors, circle)
}

/// Linear variable relative to a given (for example, known) circle.
pub fn transform_with(vectors: Vec<TrigMomentVector>, circle: CircleFit) -> Result<Transformed> {
    let c = circle.circle();
    let mut y = Vec::with_capacity(vectors.len());
    let mut branches = Vec::with_capacity(vectors.len());
    for v in &vectors {
        let p = to_linear(v, &c)?;
        y.push(p.y);
        branches.push(p.branch);
    }
    Ok(Transformed {
        vectors,
        circle,
        y,
        branches,
    })
}

/// Penalized coefficients with their cross-validation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenalizedFit {
    pub cv: CvResult,
    pub choice: LambdaChoice,
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub selected: usize,
}

/// Regression of the linear variable on covariates.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    pub m: usize,
    pub transformed: Transformed,
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub ols: Option<LinearFit>,
    pub penalized: Option<PenalizedFit>,
    /// Rows left out of the regression because `êᵀâ = 0`.
    pub excluded: Vec<usize>,
    /// Squared correlation of fitted and observed `Y`.
    pub r2: f64,
    pub forecasts: Vec<DensityForecast>,
    pub validation: ValidationReport,
    /// Mean squared cosine between each observation and its own fitted
    /// circle point.
    pub r2cos_fitted: f64,
}

impl RegressionModel {
    pub fn circle(&self) -> Circle {
        self.transformed.circle.circle()
    }
}

/// `xᵀβ`, summed left to right; prediction from saved reports relies on this
/// exact order.
pub fn linear_predictor(x: &[f64], beta: &[f64]) -> f64 {
    x.iter().zip(beta).map(|(a, b)| a * b).sum()
}

fn finite_rows(y: &[f64]) -> (Vec<usize>, Vec<usize>) {
    (0..y.len()).partition(|&i| y[i].is_finite())
}

pub fn fit_regression(
    thetas: &[f64],
    x: &DesignMatrix,
    m: usize,
    kind: CircleKind,
    estimator: &Estimator,
) -> Result<RegressionModel> {
    if x.nrows() != thetas.len() {
        return Err(Error::Dimension(format!(
            "{} angles but {} design rows",
            thetas.len(),
            x.nrows()
        )));
    }
    let transformed = transform(thetas, m, kind)?;
    regress(thetas, x, transformed, estimator)
}

/// Regression step on an already transformed sample.
pub fn regress(
    thetas: &[f64],
    x: &DesignMatrix,
    transformed: Transformed,
    estimator: &Estimator,
) -> Result<RegressionModel> {
    let (kept, excluded) = finite_rows(&transformed.y);
    if !excluded.is_empty() {
        warn!(
            "{} observation(s) orthogonal to the circle axis excluded from the regression",
            excluded.len()
        );
    }
    let xk = x.select_rows(&kept);
    let yk: Vec<f64> = kept.iter().map(|&i| transformed.y[i]).collect();
    let (beta, ols, penalized) = match estimator {
        Estimator::Ols => {
            let fit = ols_no_intercept(&xk, &yk)?;
            (fit.beta.clone(), Some(fit), None)
        }
        Estimator::ElasticNet {
            alpha,
            choice,
            folds,
            seed,
            n_lambda,
        } => {
            let grid = lambda_grid(&xk, &yk, *alpha, *n_lambda, 1e-3)?;
            let opts = ElasticNetOptions {
                alpha: *alpha,
                ..Default::default()
            };
            let cv = cross_validate(&xk, &yk, &grid, &opts, *folds, *seed)?;
            let point = cv.chosen(*choice).clone();
            let fit = PenalizedFit {
                lambda: point.lambda,
                beta: point.beta.clone(),
                selected: point.selected,
                choice: *choice,
                cv,
            };
            (point.beta, None, Some(fit))
        }
    };
    let fitted: Vec<f64> = kept.iter().map(|&i| linear_predictor(&x.row(i), &beta)).collect();
    let r2 = crate::linmod::squared_correlation(&yk, &fitted);
    let circle = transformed.circle.circle();
    let forecasts = (0..thetas.len())
        .map(|i| {
            let eta = linear_predictor(&x.row(i), &beta);
            let mut f = forecast_eta(&circle, eta, Some(transformed.branches[i]))?;
            f.covariates = x.row(i);
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    let validation = validate_forecasts(&forecasts, thetas)?;
    let r2cos_fitted = fitted_r2cos(&transformed.vectors, &forecasts);
    Ok(RegressionModel {
        m: transformed.vectors[0].m(),
        names: x.names().to_vec(),
        beta,
        ols,
        penalized,
        excluded,
        r2,
        forecasts,
        validation,
        r2cos_fitted,
        transformed,
    })
}

fn validate_forecasts(forecasts: &[DensityForecast], thetas: &[f64]) -> Result<ValidationReport> {
    let params: Vec<NntsParams> = forecasts.iter().map(|f| f.params.clone()).collect();
    validate(&params, thetas)
}

fn fitted_r2cos(vectors: &[TrigMomentVector], forecasts: &[DensityForecast]) -> f64 {
    let total: f64 = vectors
        .iter()
        .zip(forecasts)
        .map(|(v, f)| dot(v.coords(), &f.point).powi(2))
        .sum();
    total / vectors.len() as f64
}

/// Zero-mean autoregression on the linear variable.
#[derive(Debug, Clone)]
pub struct TimeSeriesModel {
    pub m: usize,
    pub transformed: Transformed,
    pub ar: ArFit,
    pub r2: f64,
    /// One-step forecasts for `t = order..n`.
    pub forecasts: Vec<DensityForecast>,
    /// Validation over `t = order..n`, so the log-likelihood is conditional
    /// on the first `order` observations.
    pub validation: ValidationReport,
    pub r2cos_fitted: f64,
}

impl TimeSeriesModel {
    pub fn circle(&self) -> Circle {
        self.transformed.circle.circle()
    }
}

pub fn fit_time_series(thetas: &[f64], m: usize, kind: CircleKind, order: usize) -> Result<TimeSeriesModel> {
    let transformed = transform(thetas, m, kind)?;
    if let Some(t) = transformed.y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "observation {t} is orthogonal to the circle axis; the series cannot be transformed"
        )));
    }
    let ar = fit_ar(&transformed.y, order)?;
    let circle = transformed.circle.circle();
    let forecasts = (order..thetas.len())
        .map(|t| {
            let eta = ar.predict_next(&transformed.y[..t])?;
            let mut f = forecast_eta(&circle, eta, Some(transformed.branches[t]))?;
            f.covariates = (1..=order).map(|j| transformed.y[t - j]).collect();
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    let validation = validate_forecasts(&forecasts, &thetas[order..])?;
    let r2cos_fitted = fitted_r2cos(&transformed.vectors[order..], &forecasts);
    Ok(TimeSeriesModel {
        m,
        r2: ar.fit.r2,
        ar,
        forecasts,
        validation,
        r2cos_fitted,
        transformed,
    })
}
