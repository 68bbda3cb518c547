//! Probability integral transforms and circular uniformity tests.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::forecast::DensityForecast;
use crate::nnts::{loglik, reduce_angle, NntsParams};

const SERIES_TOLERANCE: f64 = 1e-12;
const SERIES_TERMS: usize = 100;

/// `F_k(θ_k)` for each forecast density.
pub fn pit_series(forecasts: &[DensityForecast], thetas: &[f64]) -> Result<Vec<f64>> {
    let params: Vec<NntsParams> = forecasts.iter().map(|f| f.params.clone()).collect();
    pit_from_params(&params, thetas)
}

pub fn pit_from_params(params: &[NntsParams], thetas: &[f64]) -> Result<Vec<f64>> {
    if params.len() != thetas.len() {
        return Err(Error::Dimension(format!(
            "{} forecasts for {} angles",
            params.len(),
            thetas.len()
        )));
    }
    Ok(params
        .iter()
        .zip(thetas)
        .map(|(p, &t)| p.cdf(reduce_angle(t)))
        .collect())
}

/// A test statistic with its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted_unit(u: &[f64], min_n: usize) -> Result<Vec<f64>> {
    if u.len() < min_n {
        return Err(Error::InsufficientData(format!(
            "need at least {min_n} values, got {}",
            u.len()
        )));
    }
    if let Some(bad) = u.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!("value {bad} outside [0, 1]")));
    }
    let mut s = u.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Kuiper's `V = D⁺ + D⁻` with the asymptotic p-value at the modified
/// statistic `V(√n + 0.155 + 0.24/√n)`.
pub fn kuiper_test(u: &[f64]) -> Result<TestResult> {
    let s = sorted_unit(u, 5)?;
    let n = s.len() as f64;
    let (mut dplus, mut dminus) = (0.0f64, 0.0f64);
    for (i, v) in s.iter().enumerate() {
        dplus = dplus.max((i + 1) as f64 / n - v);
        dminus = dminus.max(v - i as f64 / n);
    }
    let v = dplus + dminus;
    let sq = n.sqrt();
    Ok(TestResult {
        statistic: v,
        p_value: kuiper_tail(v * (sq + 0.155 + 0.24 / sq)),
    })
}

/// `P(V* > λ) = Σ_j 2(4j²λ² − 1) exp(−2j²λ²)`.
pub fn kuiper_tail(lambda: f64) -> f64 {
    // below 0.4 the tail exceeds 0.999 and the series needs too many terms
    if lambda < 0.4 {
        return 1.0;
    }
    let l2 = lambda * lambda;
    let mut sum = 0.0;
    for j in 1..=SERIES_TERMS {
        let j2 = (j * j) as f64;
        let term = 2.0 * (4.0 * j2 * l2 - 1.0) * (-2.0 * j2 * l2).exp();
        sum += term;
        if j > 1 && term.abs() < SERIES_TOLERANCE {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Watson's `U²` with the asymptotic p-value at the modified statistic
/// `(U² − 0.1/n + 0.1/n²)(1 + 0.8/n)`.
pub fn watson_test(u: &[f64]) -> Result<TestResult> {
    let s = sorted_unit(u, 2)?;
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let ss: f64 = s
        .iter()
        .enumerate()
        .map(|(i, v)| (v - (2 * i + 1) as f64 / (2.0 * n)).powi(2))
        .sum();
    let u2 = ss - n * (mean - 0.5).powi(2) + 1.0 / (12.0 * n);
    let modified = (u2 - 0.1 / n + 0.1 / (n * n)) * (1.0 + 0.8 / n);
    Ok(TestResult {
        statistic: u2,
        p_value: watson_tail(modified),
    })
}

/// `P(U² > u) = 2 Σ_j (−1)^{j−1} exp(−2j²π²u)`, switching to the dual
/// theta-function series for small `u`.
pub fn watson_tail(u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    let p = if u >= 0.1 {
        let mut sum = 0.0;
        for j in 1..=SERIES_TERMS {
            let term = (-2.0 * (j * j) as f64 * PI * PI * u).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < SERIES_TOLERANCE {
                break;
            }
        }
        2.0 * sum
    } else {
        let mut sum = 0.0;
        for k in 0..SERIES_TERMS {
            let odd = (2 * k + 1) as f64;
            let term = (-odd * odd / (8.0 * u)).exp();
            sum += term;
            if term < SERIES_TOLERANCE {
                break;
            }
        }
        1.0 - (2.0 / (PI * u)).sqrt() * sum
    };
    p.clamp(0.0, 1.0)
}

/// Circular range `W = 2π − (largest gap)` of the angles `2πu` with its
/// exact null distribution function
/// `P(W ≤ w) = Σ_{k=1}^{⌊1/g⌋} (−1)^{k−1} C(n,k) (1 − kg)^{n−1}`, `g = 1 − w/2π`.
pub fn range_test(u: &[f64]) -> Result<TestResult> {
    let s = sorted_unit(u, 3)?;
    let n = s.len();
    let mut gap = 1.0 - s[n - 1] + s[0];
    for w in s.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    let range = 2.0 * PI * (1.0 - gap);
    Ok(TestResult {
        statistic: range,
        p_value: range_cdf(gap, n),
    })
}

/// Null probability that the largest gap (as a fraction of the circle) is
/// at least `gap`.
fn range_cdf(gap: f64, n: usize) -> f64 {
    if gap <= 0.0 {
        return 1.0;
    }
    let stop = ((1.0 / gap).floor() as usize).min(n);
    let mut sum = 0.0;
    for k in 1..=stop {
        let base = 1.0 - k as f64 * gap;
        if base <= 0.0 {
            break;
        }
        let term = (ln_binomial(n as u64, k as u64) + (n - 1) as f64 * base.ln()).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    sum.clamp(0.0, 1.0)
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
pub fn bh_adjust(pvalues: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidInput(format!("p-value {bad} outside [0, 1]")));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (0..m).rev() {
        let i = order[rank];
        running = running.min(pvalues[i] * m as f64 / (rank + 1) as f64);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

/// Kuiper p-value bracket as printed by tabulated critical values.
pub fn kuiper_bracket(p: f64) -> &'static str {
    match p {
        p if p < 0.01 => "<0.01",
        p if p < 0.025 => "(0.01,0.025)",
        p if p < 0.05 => "(0.025,0.05)",
        p if p < 0.10 => "(0.05,0.10)",
        p if p < 0.15 => "(0.10,0.15)",
        _ => ">0.15",
    }
}

/// Watson p-value bracket as printed by tabulated critical values.
pub fn watson_bracket(p: f64) -> &'static str {
    match p {
        p if p < 0.01 => "<0.01",
        p if p < 0.025 => "(0.01,0.025)",
        p if p < 0.05 => "(0.025,0.05)",
        p if p < 0.10 => "(0.05,0.10)",
        _ => ">0.10",
    }
}

/// PIT values, log-likelihood and uniformity tests for a set of forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pit: Vec<f64>,
    pub loglik: f64,
    pub zero_density_at: Option<usize>,
    pub p_range: f64,
    pub p_kuiper: f64,
    pub p_watson: f64,
    pub statistics: BTreeMap<String, f64>,
}

pub fn validate(params: &[NntsParams], thetas: &[f64]) -> Result<ValidationReport> {
    let pit = pit_from_params(params, thetas)?;
    let ll = loglik(params, thetas)?;
    let r = range_test(&pit)?;
    let k = kuiper_test(&pit)?;
    let w = watson_test(&pit)?;
    let statistics = BTreeMap::from([
        ("range".to_string(), r.statistic),
        ("kuiper".to_string(), k.statistic),
        ("watson".to_string(), w.statistic),
    ]);
    Ok(ValidationReport {
        pit,
        loglik: ll.value,
        zero_density_at: ll.zero_density_at,
        p_range: r.p_value,
        p_kuiper: k.p_value,
        p_watson: w.p_value,
        statistics,
    })
}
