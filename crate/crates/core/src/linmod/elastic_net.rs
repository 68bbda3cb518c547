//! Elastic-net regression without intercept, fitted by coordinate descent.
//!
//! Minimizes `(1/2n)‖y − Zγ‖² + λ(α‖γ‖₁ + (1−α)/2 ‖γ‖²)` where `Z` holds the
//! covariates scaled to unit root-mean-square. Columns are not centred, so
//! the model keeps its origin and `λ = 0` is ordinary least squares.
//! Coefficients are reported on the original scale.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ols::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetOptions {
    /// Mixing weight: 1 is the LASSO, 0 is ridge.
    pub alpha: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for ElasticNetOptions {
    fn default() -> Self {
        ElasticNetOptions {
            alpha: 1.0,
            tolerance: 1e-12,
            max_sweeps: 100_000,
        }
    }
}

/// One solution along the regularization path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub beta: Vec<f64>,
    /// Number of nonzero coefficients.
    pub selected: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaChoice {
    Min,
    #[serde(rename = "1se")]
    OneSe,
}

impl std::str::FromStr for LambdaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(LambdaChoice::Min),
            "1se" => Ok(LambdaChoice::OneSe),
            other => Err(Error::Usage(format!("unknown lambda choice '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub path: Vec<PathPoint>,
    /// Mean held-out squared error per λ.
    pub cv_mean: Vec<f64>,
    /// Standard error of `cv_mean` across folds.
    pub cv_se: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_1se: f64,
    pub folds: usize,
}

impl CvResult {
    pub fn chosen(&self, choice: LambdaChoice) -> &PathPoint {
        let target = match choice {
            LambdaChoice::Min => self.lambda_min,
            LambdaChoice::OneSe => self.lambda_1se,
        };
        self.path
            .iter()
            .find(|p| p.lambda == target)
            .expect("chosen lambda lies on the path")
    }
}

struct Scaled {
    z: Vec<Vec<f64>>,
    scale: Vec<f64>,
    y: Vec<f64>,
}

fn scale_columns(x: &DesignMatrix, y: &[f64]) -> Result<Scaled> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::Dimension(format!("{n} design rows but {} responses", y.len())));
    }
    if n == 0 {
        return Err(Error::InsufficientData("empty design".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }
    let mut z = Vec::with_capacity(x.ncols());
    let mut scale = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let col = x.column(j);
        let rms = (col.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        // an all-zero column stays at zero
        let s = if rms > 0.0 { rms } else { 1.0 };
        z.push(col.into_iter().map(|v| v / s).collect());
        scale.push(s);
    }
    Ok(Scaled {
        z,
        scale,
        y: y.to_vec(),
    })
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Coordinate descent from `gamma` (standardized scale), updated in place.
fn descend(s: &Scaled, lambda: f64, opts: &ElasticNetOptions, gamma: &mut [f64]) -> bool {
    let n = s.y.len() as f64;
    let mut resid: Vec<f64> = s.y.clone();
    for (zj, g) in s.z.iter().zip(gamma.iter()) {
        if *g != 0.0 {
            resid.iter_mut().zip(zj).for_each(|(r, z)| *r -= z * g);
        }
    }
    let norms: Vec<f64> = s.z.iter().map(|zj| zj.iter().map(|v| v * v).sum::<f64>() / n).collect();
    let l1 = lambda * opts.alpha;
    let l2 = lambda * (1.0 - opts.alpha);
    for _ in 0..opts.max_sweeps {
        let mut max_change = 0.0f64;
        for (j, zj) in s.z.iter().enumerate() {
            if norms[j] == 0.0 {
                continue;
            }
            let old = gamma[j];
            let rho = zj.iter().zip(&resid).map(|(z, r)| z * r).sum::<f64>() / n + norms[j] * old;
            let new = soft_threshold(rho, l1) / (norms[j] + l2);
            if new != old {
                let delta = new - old;
                resid.iter_mut().zip(zj).for_each(|(r, z)| *r -= z * delta);
                gamma[j] = new;
                max_change = max_change.max(delta.abs() * norms[j].sqrt());
            }
        }
        if max_change < opts.tolerance {
            return true;
        }
    }
    false
}

fn check_options(opts: &ElasticNetOptions) -> Result<()> {
    if !(0.0..=1.0).contains(&opts.alpha) {
        return Err(Error::InvalidInput(format!(
            "penalty mixing alpha must lie in [0, 1], got {}",
            opts.alpha
        )));
    }
    Ok(())
}

/// Fit the whole path with warm starts. `lambdas` may be given in any order;
/// the path is returned in the same order.
pub fn elastic_net(x: &DesignMatrix, y: &[f64], lambdas: &[f64], opts: &ElasticNetOptions) -> Result<Vec<PathPoint>> {
    check_options(opts)?;
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidInput(
            "lambda values must be finite and nonnegative".into(),
        ));
    }
    let s = scale_columns(x, y)?;
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    // warm starts run from the largest penalty down
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut gamma = vec![0.0; x.ncols()];
    let mut out: Vec<Option<PathPoint>> = vec![None; lambdas.len()];
    for i in order {
        let converged = descend(&s, lambdas[i], opts, &mut gamma);
        let beta: Vec<f64> = gamma.iter().zip(&s.scale).map(|(g, sc)| g / sc).collect();
        out[i] = Some(PathPoint {
            lambda: lambdas[i],
            selected: beta.iter().filter(|b| **b != 0.0).count(),
            beta,
            converged,
        });
    }
    Ok(out.into_iter().map(|p| p.expect("every lambda visited")).collect())
}

/// Decreasing log-spaced grid from the smallest λ that zeroes every
/// coefficient down to `ratio` times it.
pub fn lambda_grid(x: &DesignMatrix, y: &[f64], alpha: f64, count: usize, ratio: f64) -> Result<Vec<f64>> {
    let s = scale_columns(x, y)?;
    let n = y.len() as f64;
    let top =
        s.z.iter()
            .map(|zj| (zj.iter().zip(&s.y).map(|(a, b)| a * b).sum::<f64>() / n).abs())
            .fold(0.0, f64::max)
            / alpha.max(1e-3);
    if count == 0 || !(top > 0.0) {
        return Err(Error::InvalidInput(
            "cannot build a lambda grid for a zero response".into(),
        ));
    }
    if count == 1 {
        return Ok(vec![top]);
    }
    let step = ratio.ln() / (count - 1) as f64;
    Ok((0..count).map(|i| top * (step * i as f64).exp()).collect())
}

/// K-fold cross-validation with seeded random fold assignment.
pub fn cross_validate(
    x: &DesignMatrix,
    y: &[f64],
    lambdas: &[f64],
    opts: &ElasticNetOptions,
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    let n = x.nrows();
    if folds < 2 || folds > n {
        return Err(Error::InvalidInput(format!("cannot split {n} rows into {folds} folds")));
    }
    let path = elastic_net(x, y, lambdas, opts)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let assignment: Vec<usize> = {
        let mut a = vec![0; n];
        for (pos, &i) in idx.iter().enumerate() {
            a[i] = pos % folds;
        }
        a
    };
    let fold_errors: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != k).collect();
            let test: Vec<usize> = (0..n).filter(|&i| assignment[i] == k).collect();
            let ytrain: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let fit = elastic_net(&x.select_rows(&train), &ytrain, lambdas, opts)?;
            Ok(fit
                .iter()
                .map(|p| {
                    test.iter()
                        .map(|&i| {
                            let pred: f64 = x.row(i).iter().zip(&p.beta).map(|(a, b)| a * b).sum();
                            (y[i] - pred).powi(2)
                        })
                        .sum::<f64>()
                        / test.len() as f64
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let kf = folds as f64;
    let cv_mean: Vec<f64> = (0..lambdas.len())
        .map(|l| fold_errors.iter().map(|f| f[l]).sum::<f64>() / kf)
        .collect();
    let cv_se: Vec<f64> = (0..lambdas.len())
        .map(|l| {
            let var = fold_errors.iter().map(|f| (f[l] - cv_mean[l]).powi(2)).sum::<f64>() / (kf - 1.0);
            (var / kf).sqrt()
        })
        .collect();
    let best = (0..lambdas.len())
        .min_by(|&a, &b| {
            cv_mean[a]
                .total_cmp(&cv_mean[b])
                .then(lambdas[b].total_cmp(&lambdas[a]))
        })
        .expect("nonempty grid");
    let bound = cv_mean[best] + cv_se[best];
    let one_se = (0..lambdas.len())
        .filter(|&l| cv_mean[l] <= bound)
        .max_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]))
        .unwrap_or(best);
    Ok(CvResult {
        lambda_min: lambdas[best],
        lambda_1se: lambdas[one_se],
        path,
        cv_mean,
        cv_se,
        folds,
    })
}

/// Largest violation of the elastic-net optimality conditions at `beta`
/// (original scale), measured on the standardized problem.
pub fn kkt_violation(x: &DesignMatrix, y: &[f64], beta: &[f64], lambda: f64, alpha: f64) -> Result<f64> {
    let s = scale_columns(x, y)?;
    let n = y.len() as f64;
    let gamma: Vec<f64> = beta.iter().zip(&s.scale).map(|(b, sc)| b * sc).collect();
    let mut resid = s.y.clone();
    for (zj, g) in s.z.iter().zip(&gamma) {
        resid.iter_mut().zip(zj).for_each(|(r, z)| *r -= z * g);
    }
    let mut worst = 0.0f64;
    for (zj, g) in s.z.iter().zip(&gamma) {
        let grad = zj.iter().zip(&resid).map(|(z, r)| z * r).sum::<f64>() / n - lambda * (1.0 - alpha) * g;
        let v = if *g != 0.0 {
            (grad - lambda * alpha * g.signum()).abs()
        } else {
            (grad.abs() - lambda * alpha).max(0.0)
        };
        worst = worst.max(v);
    }
    Ok(worst)
}
