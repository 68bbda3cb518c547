//! Versioned JSON reports and their CSV table renderings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::Units;
use crate::error::{Error, Result};
use crate::gof::{bh_adjust, kuiper_bracket, watson_bracket, ValidationReport};
use crate::model::Estimator;
use crate::sphere::{Circle, CircleKind};

pub const FIT_SCHEMA: &str = "nnts-fit/1";
pub const PREDICT_SCHEMA: &str = "nnts-predict/1";
pub const VALIDATE_SCHEMA: &str = "nnts-validate/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Regression { formula: String, estimator: Estimator },
    TimeSeries { order: usize },
}

impl ModelSpec {
    /// Leading observations without a forecast.
    pub fn conditional_on(&self) -> usize {
        match self {
            ModelSpec::Regression { .. } => 0,
            ModelSpec::TimeSeries { order } => *order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub beta: f64,
    pub stderr: Option<f64>,
    pub tstat: Option<f64>,
    pub pvalue: Option<f64>,
}

/// Uniformity tests on PIT values, with bracketed renderings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    /// `None` when the log-likelihood is −∞.
    pub loglik: Option<f64>,
    pub zero_density_at: Option<usize>,
    pub p_range: f64,
    /// Benjamini–Hochberg adjustment across the rows of the report.
    pub p_range_bh: f64,
    pub p_kuiper: f64,
    pub kuiper_bracket: String,
    pub p_watson: f64,
    pub watson_bracket: String,
    pub statistics: BTreeMap<String, f64>,
}

impl TestSummary {
    pub fn from_validation(v: &ValidationReport) -> Self {
        TestSummary {
            loglik: v.loglik.is_finite().then_some(v.loglik),
            zero_density_at: v.zero_density_at,
            p_range: v.p_range,
            p_range_bh: v.p_range,
            p_kuiper: v.p_kuiper,
            kuiper_bracket: kuiper_bracket(v.p_kuiper).into(),
            p_watson: v.p_watson,
            watson_bracket: watson_bracket(v.p_watson).into(),
            statistics: v.statistics.clone(),
        }
    }
}

/// Fill `p_range_bh` across a family of rows.
pub fn adjust_range<'a>(rows: impl IntoIterator<Item = &'a mut TestSummary>) -> Result<()> {
    let mut rows: Vec<&mut TestSummary> = rows.into_iter().collect();
    if rows.is_empty() {
        return Ok(());
    }
    let p: Vec<f64> = rows.iter().map(|r| r.p_range).collect();
    for (row, adj) in rows.iter_mut().zip(bh_adjust(&p)?) {
        row.p_range_bh = adj;
    }
    Ok(())
}

/// Model with `M = 0`: the uniform density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformRow {
    pub n: usize,
    pub tests: TestSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub m: usize,
    pub circle: Circle,
    pub alpha: Option<f64>,
    pub ssc: f64,
    /// `SSC / n`.
    pub r2cos: f64,
    /// Mean of `(ê_kᵀĉ_k)²` over the fitted densities.
    pub r2cos_fitted: f64,
    /// Squared correlation of observed and fitted `Y`.
    pub r2: f64,
    /// `1 − RSS/Σy²`; absent for penalized fits.
    pub r2_uncentered: Option<f64>,
    pub degenerate: bool,
    pub coefficients: Vec<Coefficient>,
    pub lambda: Option<f64>,
    pub selected: Option<usize>,
    /// Observations orthogonal to the circle axis, left out of the regression.
    pub excluded_rows: Vec<usize>,
    pub tests: TestSummary,
}

impl FitRow {
    pub fn beta(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.beta).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema: String,
    pub angle_column: String,
    pub units: Units,
    pub n: usize,
    pub circle: CircleKind,
    pub model: ModelSpec,
    pub uniform: UniformRow,
    pub rows: Vec<FitRow>,
}

impl FitReport {
    pub fn read(path: &Path) -> Result<FitReport> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let report: FitReport = serde_json::from_str(&text)?;
        if report.schema != FIT_SCHEMA {
            return Err(Error::InvalidInput(format!(
                "unsupported report schema '{}', expected '{FIT_SCHEMA}'",
                report.schema
            )));
        }
        Ok(report)
    }

    pub fn row(&self, m: usize) -> Result<&FitRow> {
        self.rows
            .iter()
            .find(|r| r.m == m)
            .ok_or_else(|| Error::Usage(format!("report has no row for M={m}")))
    }

    /// Rows selected by an optional harmonic list.
    pub fn rows_for(&self, ms: Option<&[usize]>) -> Result<Vec<&FitRow>> {
        match ms {
            None => Ok(self.rows.iter().collect()),
            Some(ms) => ms.iter().map(|&m| self.row(m)).collect(),
        }
    }

    /// Table layout: one line per M, the uniform model first.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let names: Vec<String> = self
            .rows
            .first()
            .map(|r| r.coefficients.iter().map(|c| c.name.clone()).collect())
            .unwrap_or_default();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["m", "alpha", "r2cos", "r2cos_fitted", "r2", "r2_uncentered"]
            .map(String::from)
            .to_vec();
        for name in &names {
            header.extend([format!("beta[{name}]"), format!("se[{name}]"), format!("p[{name}]")]);
        }
        header.extend(
            [
                "loglik",
                "p_range",
                "p_range_bh",
                "p_kuiper",
                "kuiper",
                "p_watson",
                "watson",
            ]
            .map(String::from),
        );
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        let tests = |t: &TestSummary| {
            vec![
                t.loglik.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-inf".into()),
                format!("{:.4}", t.p_range),
                format!("{:.4}", t.p_range_bh),
                format!("{:.4}", t.p_kuiper),
                t.kuiper_bracket.clone(),
                format!("{:.4}", t.p_watson),
                t.watson_bracket.clone(),
            ]
        };
        let mut rec = vec!["0".to_string()];
        rec.extend(std::iter::repeat_n(String::new(), 5));
        rec.extend(std::iter::repeat_n(String::new(), 3 * names.len()));
        rec.extend(tests(&self.uniform.tests));
        w.write_record(&rec)?;
        for row in &self.rows {
            let mut rec = vec![
                row.m.to_string(),
                opt(row.alpha),
                format!("{:.3}", row.r2cos),
                format!("{:.3}", row.r2cos_fitted),
                format!("{:.3}", row.r2),
                row.r2_uncentered.map(|v| format!("{v:.3}")).unwrap_or_default(),
            ];
            for c in &row.coefficients {
                rec.extend([format!("{:.6}", c.beta), opt(c.stderr), opt(c.pvalue)]);
            }
            rec.extend(tests(&row.tests));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One forecast as written by `predict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub m: usize,
    /// Zero-based row of the input table.
    pub index: usize,
    pub eta: f64,
    pub phi_hat: f64,
    pub branch: crate::forecast::ForecastBranch,
    /// Real parameter vector `(Re c_0..c_M, Im c_1..c_M)`.
    pub params: Vec<f64>,
    /// Mean direction in the report's units; `None` without a preferred
    /// direction.
    pub mean_direction: Option<f64>,
    pub circular_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub schema: String,
    pub units: Units,
    pub predictions: Vec<PredictionRecord>,
}

impl PredictionReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "m",
            "index",
            "eta",
            "phi_hat",
            "branch",
            "mean_direction",
            "circular_variance",
            "params",
        ])?;
        for p in &self.predictions {
            w.write_record([
                p.m.to_string(),
                p.index.to_string(),
                p.eta.to_string(),
                p.phi_hat.to_string(),
                format!("{:?}", p.branch).to_lowercase(),
                p.mean_direction.map(|v| v.to_string()).unwrap_or_default(),
                p.circular_variance.to_string(),
                p.params.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub m: usize,
    pub n: usize,
    pub tests: TestSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationTable {
    pub schema: String,
    pub uniform: UniformRow,
    pub rows: Vec<ValidationRow>,
}
