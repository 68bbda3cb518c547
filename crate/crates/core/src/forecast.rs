//! Predictive NNTS densities from fitted circles and linear predictors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnts::{reduce_angle, Angle, NntsParams};
use crate::sphere::{Branch, Circle, GreatCircle, SmallCircle};

/// Resultant moduli below this have no usable mean direction.
pub const MIN_RESULTANT: f64 = 1e-12;

/// Which rule produced a forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastBranch {
    Great,
    Positive,
    Negative,
    Combined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityForecast {
    pub params: NntsParams,
    /// The circle point before phase canonicalization.
    pub point: Vec<f64>,
    pub branch: ForecastBranch,
    pub phi_hat: f64,
    pub covariates: Vec<f64>,
}

/// `φ̂ = arctan(xᵀβ̂)`.
pub fn predict_phi(beta: &[f64], x: &[f64]) -> Result<f64> {
    if beta.len() != x.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} covariates",
            beta.len(),
            x.len()
        )));
    }
    Ok(x.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>().atan())
}

/// Reduce to `[−π/2, π/2)`.
pub fn reduce_half_turn(phi: f64) -> f64 {
    let r = (phi + PI / 2.0).rem_euclid(PI) - PI / 2.0;
    if r >= PI / 2.0 {
        -PI / 2.0
    } else {
        r
    }
}

/// Reduce to `[−π, π)`.
pub fn reduce_full_turn(phi: f64) -> f64 {
    let r = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

fn from_point(point: Vec<f64>, branch: ForecastBranch, phi_hat: f64, x: &[f64]) -> Result<DensityForecast> {
    Ok(DensityForecast {
        params: NntsParams::from_real(&point)?,
        point,
        branch,
        phi_hat,
        covariates: x.to_vec(),
    })
}

/// `ĉ = â cos φ + d̂ sin φ`.
pub fn forecast_great(circle: &GreatCircle, phi: f64) -> Result<DensityForecast> {
    let phi = reduce_half_turn(phi);
    from_point(circle.point(phi), ForecastBranch::Great, phi, &[])
}

/// Small-circle forecast for linear predictor `eta`, using `φ = arctan η` on
/// the positive branch and `arctan η + π` otherwise.
pub fn forecast_small_eta(circle: &SmallCircle, eta: f64, branch: Branch) -> Result<DensityForecast> {
    let (phi, label) = match branch {
        Branch::Positive => (eta.atan(), ForecastBranch::Positive),
        Branch::Negative | Branch::Zero => (reduce_full_turn(eta.atan() + PI), ForecastBranch::Negative),
    };
    from_point(circle.point(phi), label, phi, &[])
}

pub fn forecast_small(circle: &SmallCircle, x: &[f64], beta: &[f64], branch: Branch) -> Result<DensityForecast> {
    let eta = linear_predictor(beta, x)?;
    let mut f = forecast_small_eta(circle, eta, branch)?;
    f.covariates = x.to_vec();
    Ok(f)
}

fn linear_predictor(beta: &[f64], x: &[f64]) -> Result<f64> {
    predict_phi(beta, x)?;
    Ok(x.iter().zip(beta).map(|(a, b)| a * b).sum())
}

/// Normalized resultant of the two branch points.
pub fn combine_branches(pos: &DensityForecast, neg: &DensityForecast) -> Result<DensityForecast> {
    if pos.point.len() != neg.point.len() {
        return Err(Error::Dimension("branch forecasts of different dimension".into()));
    }
    let sum: Vec<f64> = pos.point.iter().zip(&neg.point).map(|(a, b)| a + b).collect();
    let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::DegenerateCombination);
    }
    let point: Vec<f64> = sum.into_iter().map(|v| v / norm).collect();
    let phi_hat = if pos.branch == ForecastBranch::Positive {
        pos.phi_hat
    } else {
        neg.phi_hat
    };
    from_point(
        point,
        ForecastBranch::Combined,
        reduce_half_turn(phi_hat),
        &pos.covariates,
    )
}

/// Forecast for linear predictor `eta` from either circle kind.
///
/// Small circles use `branch` when given and the combined forecast otherwise.
pub fn forecast_eta(circle: &Circle, eta: f64, branch: Option<Branch>) -> Result<DensityForecast> {
    match circle {
        Circle::Great(c) => forecast_great(c, eta.atan()),
        Circle::Small(c) => match branch {
            Some(b) => forecast_small_eta(c, eta, b),
            None => combine_branches(
                &forecast_small_eta(c, eta, Branch::Positive)?,
                &forecast_small_eta(c, eta, Branch::Negative)?,
            ),
        },
    }
}

/// Forecast for a covariate row.
pub fn forecast(circle: &Circle, beta: &[f64], x: &[f64], branch: Option<Branch>) -> Result<DensityForecast> {
    let eta = linear_predictor(beta, x)?;
    let mut f = forecast_eta(circle, eta, branch)?;
    f.covariates = x.to_vec();
    Ok(f)
}

/// Mean direction of the forecast density, in `[0, 2π)`.
pub fn point_predict(forecast: &DensityForecast) -> Result<Angle> {
    mean_direction(&forecast.params)
}

pub fn mean_direction(params: &NntsParams) -> Result<Angle> {
    let m = params.first_trig_moment();
    if m.norm() < MIN_RESULTANT {
        return Err(Error::NoPreferredDirection(m.norm()));
    }
    Ok(Angle::new(reduce_angle(m.arg())))
}

/// First trigonometric moment of the forecast at `eta`.
///
/// For small circles without a branch this is the resultant of the moments
/// of the two branch densities, i.e. the moment of their equal-weight
/// mixture. Unlike [`combine_branches`] it keeps the dependence on `eta`.
pub fn resultant_moment(circle: &Circle, eta: f64, branch: Option<Branch>) -> Result<Complex64> {
    match (circle, branch) {
        (Circle::Small(c), None) => {
            let pos = forecast_small_eta(c, eta, Branch::Positive)?.params.first_trig_moment();
            let neg = forecast_small_eta(c, eta, Branch::Negative)?.params.first_trig_moment();
            Ok((pos + neg) / 2.0)
        }
        _ => Ok(forecast_eta(circle, eta, branch)?.params.first_trig_moment()),
    }
}
