//! Command-line front end: `fit`, `predict`, `validate`, `simulate`, `plot`.

pub mod data;
pub mod formula;
pub mod plot;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::error::{Error, Result};
use crate::forecast::{forecast_eta, mean_direction, resultant_moment, DensityForecast, MIN_RESULTANT};
use crate::gof::validate as validate_pit;
use crate::linmod::{acf_pacf, ar_predict, LambdaChoice, LinearFit};
use crate::model::{fit_regression, fit_time_series, linear_predictor, Estimator};
use crate::nnts::{reduce_angle, NntsParams};
use crate::sim::{study_row, BetaScenario, Eigenvectors, SimConfig, StudyRow};
use crate::sphere::{embed, to_linear, Branch, Circle, CircleKind};

use data::{Table, Units};
use formula::Formula;
use report::*;

#[derive(Debug, Parser)]
#[command(
    name = "nnts",
    version,
    about = "Circular regression and time series with NNTS densities"
)]
pub struct Cli {
    /// Suppress warnings.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit regression or AR models for each requested M and write a report.
    Fit(FitArgs),
    /// Density forecasts from a saved report.
    Predict(PredictArgs),
    /// PIT uniformity tests of a saved report on (new) data.
    Validate(ValidateArgs),
    /// Monte Carlo study of rejection and acceptance rates.
    Simulate(SimulateArgs),
    /// SVG figures for a saved report.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CircleArg {
    Great,
    Small,
}

impl From<CircleArg> for CircleKind {
    fn from(c: CircleArg) -> Self {
        match c {
            CircleArg::Great => CircleKind::Great,
            CircleArg::Small => CircleKind::Small,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LambdaArg {
    Min,
    #[value(name = "1se")]
    OneSe,
}

impl From<LambdaArg> for LambdaChoice {
    fn from(c: LambdaArg) -> Self {
        match c {
            LambdaArg::Min => LambdaChoice::Min,
            LambdaArg::OneSe => LambdaChoice::OneSe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    /// Branch of the observed angle (needs the angle column).
    Observed,
    Positive,
    Negative,
    /// Normalized resultant of both branches.
    Combined,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Angle column; defaults to the first of angle, theta, direction,
    /// direction_deg, direction_rad, dir.
    #[arg(long)]
    pub angle_col: Option<String>,
    /// Units of the angle column and of reported directions.
    #[arg(long, value_enum)]
    pub units: Option<Units>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Harmonics: a number, a range such as 1..8 or 1-8, or a list such as 1,2,5.
    #[arg(long, default_value = "1..8")]
    pub m: String,
    #[arg(long, value_enum, default_value = "great")]
    pub circle: CircleArg,
    /// Regression terms, e.g. "I(distance<=27)*(distance-27)".
    #[arg(long)]
    pub formula: Option<String>,
    /// Fit an AR(p) model to the series instead of a regression.
    #[arg(long)]
    pub ar_order: Option<usize>,
    /// Elastic-net mixing weight in [0, 1]; 1 is the lasso.
    #[arg(long)]
    pub alpha_penalty: Option<f64>,
    #[arg(long, value_enum, default_value = "min")]
    pub lambda: LambdaArg,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 100)]
    pub n_lambda: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fit report written by `fit`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub m: Option<String>,
    /// Defaults to the observed branch when the angle column is present and
    /// to the combined forecast otherwise.
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Coefficient scenario 1-4.
    #[arg(long, default_value_t = 1)]
    pub case: u8,
    /// Sample sizes, comma separated.
    #[arg(long, default_value = "100,1000")]
    pub n: String,
    #[arg(long, default_value = "1..5")]
    pub m: String,
    #[arg(long, value_enum, default_value = "great")]
    pub circle: CircleArg,
    /// Use the generating eigenvectors instead of estimating them.
    #[arg(long, value_enum, default_value = "known")]
    pub eigenvectors: EigenArg,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    /// Opening angle of generating small circles (radians).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub small_alpha: f64,
    /// Keep estimated-eigenvector runs with M > 5.
    #[arg(long)]
    pub include_unreliable: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EigenArg {
    Known,
    Estimated,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub m: Option<String>,
    /// Points per density curve.
    #[arg(long, default_value_t = 720)]
    pub samples: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Parse `8`, `1..8`, `1..=8`, `1-8` or `1,2,5`.
pub fn parse_ms(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Usage(format!("cannot parse harmonic list '{spec}'"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let range = part
            .split_once("..=")
            .or_else(|| part.split_once(".."))
            .or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(Error::Usage(format!("harmonics must be positive: '{spec}'")));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_ns(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("bad sample size '{s}'")))
        })
        .collect()
}

/// Write through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

struct Loaded {
    table: Table,
    angle_column: Option<String>,
    thetas: Option<Vec<f64>>,
}

fn load(args: &DataArgs, units: Units, require_angles: bool) -> Result<Loaded> {
    let table = Table::read(&args.input)?;
    if table.is_empty() {
        return Err(Error::Data {
            line: 2,
            msg: "no data rows".into(),
        });
    }
    let angle_column = match table.angle_column(args.angle_col.as_deref()) {
        Ok(c) => Some(c),
        Err(e) if require_angles || args.angle_col.is_some() => return Err(e),
        Err(_) => None,
    };
    let thetas = angle_column.as_deref().map(|c| table.angles(c, units)).transpose()?;
    Ok(Loaded {
        table,
        angle_column,
        thetas,
    })
}

fn coefficients(names: &[String], beta: &[f64], ols: Option<&LinearFit>) -> Vec<Coefficient> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| Coefficient {
            name: name.clone(),
            beta: beta[j],
            stderr: ols.map(|f| f.stderr[j]),
            tstat: ols.map(|f| f.tstat[j]),
            pvalue: ols.map(|f| f.pvalues[j]),
        })
        .collect()
}

fn uniform_row(thetas: &[f64]) -> Result<UniformRow> {
    let params = vec![NntsParams::uniform(); thetas.len()];
    Ok(UniformRow {
        n: thetas.len(),
        tests: TestSummary::from_validation(&validate_pit(&params, thetas)?),
    })
}

fn circle_alpha(circle: &Circle) -> Option<f64> {
    match circle {
        Circle::Small(s) => Some(s.alpha),
        Circle::Great(_) => None,
    }
}

/// Fit every requested model and assemble the report.
pub fn fit_report(args: &FitArgs) -> Result<FitReport> {
    let ms = parse_ms(&args.m)?;
    let kind: CircleKind = args.circle.into();
    let formula = args
        .formula
        .as_deref()
        .map(Formula::parse)
        .transpose()?
        .filter(|f| !f.is_empty());
    if let Some(a) = args.alpha_penalty {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Usage(format!("--alpha-penalty must lie in [0, 1], got {a}")));
        }
    }
    let model = match (&formula, args.ar_order) {
        (Some(_), Some(_)) => return Err(Error::Usage("--formula and --ar-order are mutually exclusive".into())),
        (None, None) => return Err(Error::Usage("one of --formula or --ar-order is required".into())),
        (None, Some(_)) if args.alpha_penalty.is_some() => {
            return Err(Error::Usage("--alpha-penalty applies to regression models only".into()))
        }
        (None, Some(0)) => return Err(Error::Usage("--ar-order must be positive".into())),
        (None, Some(order)) => ModelSpec::TimeSeries { order },
        (Some(f), None) => ModelSpec::Regression {
            formula: f.to_string(),
            estimator: match args.alpha_penalty {
                None => Estimator::Ols,
                Some(alpha) => Estimator::ElasticNet {
                    alpha,
                    choice: args.lambda.into(),
                    folds: args.folds,
                    seed: args.seed,
                    n_lambda: args.n_lambda,
                },
            },
        },
    };
    let units = args.data.units.unwrap_or(Units::Rad);
    let loaded = load(&args.data, units, true)?;
    let thetas = loaded.thetas.expect("angles required");
    let mut rows = Vec::with_capacity(ms.len());
    for &m in &ms {
        info!("fitting M={m}");
        let row = match &model {
            ModelSpec::Regression { estimator, .. } => {
                let x = loaded.table.design(formula.as_ref().expect("regression formula"))?;
                let fit = fit_regression(&thetas, &x, m, kind, estimator)?;
                let circle = fit.circle();
                FitRow {
                    m,
                    alpha: circle_alpha(&circle),
                    ssc: fit.transformed.circle.ssc(),
                    r2cos: fit.transformed.circle.r2cos(),
                    degenerate: fit.transformed.circle.degenerate(),
                    r2cos_fitted: fit.r2cos_fitted,
                    r2: fit.r2,
                    r2_uncentered: fit.ols.as_ref().map(|o| o.r2_uncentered),
                    coefficients: coefficients(&fit.names, &fit.beta, fit.ols.as_ref()),
                    lambda: fit.penalized.as_ref().map(|p| p.lambda),
                    selected: fit.penalized.as_ref().map(|p| p.selected),
                    excluded_rows: fit.excluded.clone(),
                    tests: TestSummary::from_validation(&fit.validation),
                    circle,
                }
            }
            ModelSpec::TimeSeries { order } => {
                let fit = fit_time_series(&thetas, m, kind, *order)?;
                let circle = fit.circle();
                let names: Vec<String> = (1..=*order).map(|j| format!("ar{j}")).collect();
                FitRow {
                    m,
                    alpha: circle_alpha(&circle),
                    ssc: fit.transformed.circle.ssc(),
                    r2cos: fit.transformed.circle.r2cos(),
                    degenerate: fit.transformed.circle.degenerate(),
                    r2cos_fitted: fit.r2cos_fitted,
                    r2: fit.r2,
                    r2_uncentered: Some(fit.ar.fit.r2_uncentered),
                    coefficients: coefficients(&names, fit.ar.coefficients(), Some(&fit.ar.fit)),
                    lambda: None,
                    selected: None,
                    excluded_rows: vec![],
                    tests: TestSummary::from_validation(&fit.validation),
                    circle,
                }
            }
        };
        if row.degenerate {
            warn!("M={m}: eigenvalue tie, the fitted circle is not well determined");
        }
        if !row.excluded_rows.is_empty() {
            warn!("M={m}: rows {:?} excluded from the regression", row.excluded_rows);
        }
        rows.push(row);
    }
    adjust_range(rows.iter_mut().map(|r| &mut r.tests))?;
    Ok(FitReport {
        schema: FIT_SCHEMA.into(),
        angle_column: loaded.angle_column.expect("angles required"),
        units,
        n: thetas.len(),
        circle: kind,
        model,
        uniform: uniform_row(&thetas)?,
        rows,
    })
}

pub fn fit_command(args: &FitArgs) -> Result<FitReport> {
    let report = fit_report(args)?;
    write_json(&args.out.join("fit.json"), &report)?;
    write_atomic(&args.out.join("fit.csv"), &csv_bytes(|b| report.write_csv(b))?)?;
    Ok(report)
}

/// A forecast for one input row.
#[derive(Debug, Clone)]
pub struct RowForecast {
    pub index: usize,
    pub eta: f64,
    pub forecast: DensityForecast,
}

fn choose_branch(arg: Option<BranchArg>, circle: &Circle, theta: Option<f64>) -> Result<Option<Branch>> {
    let observed = |theta: Option<f64>| -> Result<Option<Branch>> {
        let t = theta.ok_or_else(|| Error::Usage("the observed branch needs the angle column".into()))?;
        Ok(Some(to_linear(&embed(t, circle.m()), circle)?.branch))
    };
    match arg {
        Some(BranchArg::Observed) => observed(theta),
        Some(BranchArg::Positive) => Ok(Some(Branch::Positive)),
        Some(BranchArg::Negative) => Ok(Some(Branch::Negative)),
        Some(BranchArg::Combined) => Ok(None),
        None if theta.is_some() => observed(theta),
        None => Ok(None),
    }
}

/// Recompute forecasts for a report row on a table.
///
/// Regression rows get one forecast per table row. Time-series rows get the
/// one-step forecasts for `t = order..n` and a final forecast of the next,
/// unobserved value.
pub fn forecasts_for_row(
    report: &FitReport,
    row: &FitRow,
    table: &Table,
    thetas: Option<&[f64]>,
    branch: Option<BranchArg>,
) -> Result<Vec<RowForecast>> {
    let beta = row.beta();
    let circle = &row.circle;
    match &report.model {
        ModelSpec::Regression { formula, .. } => {
            let x = table.design(&Formula::parse(formula)?)?;
            (0..x.nrows())
                .map(|i| {
                    let eta = linear_predictor(&x.row(i), &beta);
                    let b = choose_branch(branch, circle, thetas.map(|t| t[i]))?;
                    let mut forecast = forecast_eta(circle, eta, b)?;
                    forecast.covariates = x.row(i);
                    Ok(RowForecast {
                        index: i,
                        eta,
                        forecast,
                    })
                })
                .collect()
        }
        ModelSpec::TimeSeries { order } => {
            let thetas = thetas.ok_or_else(|| Error::Usage("time-series forecasts need the angle column".into()))?;
            let y = thetas
                .iter()
                .enumerate()
                .map(|(t, &theta)| {
                    let p = to_linear(&embed(theta, circle.m()), circle)?;
                    if p.y.is_finite() {
                        Ok(p.y)
                    } else {
                        Err(Error::InvalidInput(format!(
                            "observation {t} is orthogonal to the circle axis"
                        )))
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            (*order..=y.len())
                .map(|t| {
                    let eta = ar_predict(&beta, &y[..t])?;
                    let theta = thetas.get(t).copied();
                    let b = if theta.is_none() && branch == Some(BranchArg::Observed) {
                        None
                    } else {
                        choose_branch(branch, circle, theta)?
                    };
                    let mut forecast = forecast_eta(circle, eta, b)?;
                    forecast.covariates = (1..=*order).map(|j| y[t - j]).collect();
                    Ok(RowForecast {
                        index: t,
                        eta,
                        forecast,
                    })
                })
                .collect()
        }
    }
}

fn prediction_record(m: usize, units: Units, f: &RowForecast) -> PredictionRecord {
    let params = &f.forecast.params;
    PredictionRecord {
        m,
        index: f.index,
        eta: f.eta,
        phi_hat: f.forecast.phi_hat,
        branch: f.forecast.branch,
        params: params.to_real(),
        mean_direction: mean_direction(params).ok().map(|a| units.from_radians(a.radians())),
        circular_variance: params.circular_variance(),
    }
}

fn report_ms(spec: Option<&str>) -> Result<Option<Vec<usize>>> {
    spec.map(parse_ms).transpose()
}

pub fn predict_report(args: &PredictArgs) -> Result<PredictionReport> {
    let report = FitReport::read(&args.report)?;
    let units = args.data.units.unwrap_or(report.units);
    let data = DataArgs {
        angle_col: args.data.angle_col.clone().or(Some(report.angle_column.clone())),
        ..args.data.clone()
    };
    let table = Table::read(&data.input)?;
    let has_angles = table.has_column(data.angle_col.as_deref().unwrap_or_default());
    let loaded = load(
        &DataArgs {
            angle_col: has_angles.then_some(data.angle_col.clone()).flatten(),
            ..data
        },
        units,
        false,
    )?;
    let ms = report_ms(args.m.as_deref())?;
    let mut predictions = Vec::new();
    for row in report.rows_for(ms.as_deref())? {
        for f in forecasts_for_row(&report, row, &loaded.table, loaded.thetas.as_deref(), args.branch)? {
            predictions.push(prediction_record(row.m, units, &f));
        }
    }
    Ok(PredictionReport {
        schema: PREDICT_SCHEMA.into(),
        units,
        predictions,
    })
}

pub fn predict_command(args: &PredictArgs) -> Result<PredictionReport> {
    let out = predict_report(args)?;
    write_json(&args.out.join("predictions.json"), &out)?;
    write_atomic(&args.out.join("predictions.csv"), &csv_bytes(|b| out.write_csv(b))?)?;
    Ok(out)
}

pub fn validate_report(args: &ValidateArgs) -> Result<ValidationTable> {
    let report = FitReport::read(&args.report)?;
    let units = args.data.units.unwrap_or(report.units);
    let data = DataArgs {
        angle_col: args.data.angle_col.clone().or(Some(report.angle_column.clone())),
        ..args.data.clone()
    };
    let loaded = load(&data, units, true)?;
    let thetas = loaded.thetas.expect("angles required");
    let skip = report.model.conditional_on();
    let ms = report_ms(args.m.as_deref())?;
    let mut rows = Vec::new();
    for row in report.rows_for(ms.as_deref())? {
        let forecasts = forecasts_for_row(&report, row, &loaded.table, Some(&thetas), Some(BranchArg::Observed))?;
        let params: Vec<NntsParams> = forecasts
            .iter()
            .filter(|f| f.index < thetas.len())
            .map(|f| f.forecast.params.clone())
            .collect();
        let v = validate_pit(&params, &thetas[skip..])?;
        rows.push(ValidationRow {
            m: row.m,
            n: params.len(),
            tests: TestSummary::from_validation(&v),
        });
    }
    adjust_range(rows.iter_mut().map(|r| &mut r.tests))?;
    Ok(ValidationTable {
        schema: VALIDATE_SCHEMA.into(),
        uniform: uniform_row(&thetas)?,
        rows,
    })
}

pub fn validate_command(args: &ValidateArgs) -> Result<ValidationTable> {
    let out = validate_report(args)?;
    write_json(&args.out.join("validation.json"), &out)?;
    Ok(out)
}

pub fn simulate_rows(args: &SimulateArgs) -> Result<Vec<StudyRow>> {
    let ms = parse_ms(&args.m)?;
    let case = BetaScenario::from_number(args.case)?;
    let mut rows = Vec::new();
    for n in parse_ns(&args.n)? {
        let mut config = SimConfig::new(ms[0], n, args.circle.into(), case);
        config.replicates = args.replicates;
        config.seed = args.seed;
        config.alpha = args.small_alpha;
        config.include_unreliable = args.include_unreliable;
        config.eigenvectors = match args.eigenvectors {
            EigenArg::Known => Eigenvectors::Known,
            EigenArg::Estimated => Eigenvectors::Estimated,
        };
        info!("simulating case {} n={n}", args.case);
        let row = study_row(&config, &ms)?;
        if !row.skipped_m.is_empty() {
            warn!(
                "n={n}: M={:?} skipped (unreliable estimated eigenvectors)",
                row.skipped_m
            );
        }
        if row.failures > 0 {
            warn!("n={n}: {} replicate(s) failed", row.failures);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn simulate_command(args: &SimulateArgs) -> Result<Vec<StudyRow>> {
    let rows = simulate_rows(args)?;
    write_json(&args.out.join("simulation.json"), &rows)?;
    write_atomic(
        &args.out.join("simulation.csv"),
        &csv_bytes(|b| crate::sim::write_csv(&rows, b))?,
    )?;
    Ok(rows)
}

/// Figures for a report, keyed by file name.
pub fn plot_figures(args: &PlotArgs) -> Result<Vec<(String, plot::Figure)>> {
    let report = FitReport::read(&args.report)?;
    let units = args.data.units.unwrap_or(report.units);
    let data = DataArgs {
        angle_col: args.data.angle_col.clone().or(Some(report.angle_column.clone())),
        ..args.data.clone()
    };
    let loaded = load(&data, units, true)?;
    let thetas = loaded.thetas.expect("angles required");
    let samples = args.samples.max(8);
    let unit_name = match units {
        Units::Rad => "rad",
        Units::Deg => "deg",
    };
    let mut figs = vec![(
        "uniform.svg".to_string(),
        plot::density_figure(
            "Uniform density (M=0)",
            &[("uniform".into(), NntsParams::uniform())],
            samples,
        ),
    )];
    let ms = report_ms(args.m.as_deref())?;
    for row in report.rows_for(ms.as_deref())? {
        let m = row.m;
        let combined = forecasts_for_row(&report, row, &loaded.table, Some(&thetas), Some(BranchArg::Combined))?;
        let observed = forecasts_for_row(&report, row, &loaded.table, Some(&thetas), Some(BranchArg::Observed))?;
        let y: Vec<f64> = thetas
            .iter()
            .map(|&t| to_linear(&embed(t, m), &row.circle).map(|p| p.y))
            .collect::<Result<_>>()?;
        match &report.model {
            ModelSpec::Regression { formula, .. } => {
                let formula = Formula::parse(formula)?;
                let x = loaded.table.design(&formula)?;
                let mut order: Vec<usize> = (0..combined.len()).collect();
                order.sort_by(|&a, &b| combined[a].eta.total_cmp(&combined[b].eta));
                let picks: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.9]
                    .iter()
                    .map(|q| order[((order.len() - 1) as f64 * q).round() as usize])
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let dens: Vec<(String, NntsParams)> = picks
                    .iter()
                    .map(|&i| {
                        let cov: Vec<String> = x.row(i).iter().map(|v| format!("{v:.3}")).collect();
                        (format!("x=({})", cov.join(", ")), combined[i].forecast.params.clone())
                    })
                    .collect();
                figs.push((
                    format!("density_m{m}.svg"),
                    plot::density_figure(&format!("Density forecasts, M={m}"), &dens, samples),
                ));
                for j in 0..x.ncols() {
                    let pts = x
                        .column(j)
                        .into_iter()
                        .zip(y.iter().copied())
                        .filter(|p| p.1.is_finite())
                        .collect();
                    figs.push((
                        format!("scatter_m{m}_x{}.svg", j + 1),
                        plot::scatter_figure(&format!("Y against {}, M={m}", x.names()[j]), &x.names()[j], "Y", pts),
                    ));
                }
                let cols = formula.columns();
                if cols.len() == 1 {
                    let raw = loaded.table.numeric(&cols[0])?;
                    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let beta = row.beta();
                    let mut mean = Vec::new();
                    let mut var = Vec::new();
                    for k in 0..=200 {
                        let v = lo + (hi - lo) * k as f64 / 200.0;
                        let xrow: Vec<f64> = formula.terms.iter().map(|t| t.expr.eval(&|_| v)).collect();
                        let moment = resultant_moment(&row.circle, linear_predictor(&xrow, &beta), None)?;
                        if moment.norm() >= MIN_RESULTANT {
                            mean.push((v, units.from_radians(reduce_angle(moment.arg()))));
                        }
                        var.push((v, 1.0 - moment.norm()));
                    }
                    figs.push((
                        format!("mean_m{m}.svg"),
                        plot::function_figure(
                            &format!("Mean direction, M={m}"),
                            &cols[0],
                            &format!("mean direction ({unit_name})"),
                            mean,
                        ),
                    ));
                    figs.push((
                        format!("variance_m{m}.svg"),
                        plot::function_figure(&format!("Circular variance, M={m}"), &cols[0], "circular variance", var),
                    ));
                }
            }
            ModelSpec::TimeSeries { .. } => {
                let mut dens: Vec<(String, NntsParams)> = observed
                    .iter()
                    .rev()
                    .skip(1)
                    .take(2)
                    .rev()
                    .map(|f| (format!("t={}", f.index), f.forecast.params.clone()))
                    .collect();
                if let Some(last) = combined.last() {
                    dens.push((format!("t={} (next)", last.index), last.forecast.params.clone()));
                }
                figs.push((
                    format!("density_m{m}.svg"),
                    plot::density_figure(&format!("One-step forecasts, M={m}"), &dens, samples),
                ));
                let corr = acf_pacf(&y, (y.len() / 4).clamp(1, 20))?;
                figs.push((
                    format!("acf_m{m}.svg"),
                    plot::correlogram_figure(&format!("ACF of Y, M={m}"), &corr, false),
                ));
                figs.push((
                    format!("pacf_m{m}.svg"),
                    plot::correlogram_figure(&format!("PACF of Y, M={m}"), &corr, true),
                ));
                let pts = y.windows(2).map(|w| (w[0], w[1])).collect();
                figs.push((
                    format!("scatter_m{m}_lag1.svg"),
                    plot::scatter_figure(&format!("Y(t) against Y(t-1), M={m}"), "Y(t-1)", "Y(t)", pts),
                ));
            }
        }
    }
    Ok(figs)
}

pub fn plot_command(args: &PlotArgs) -> Result<Vec<PathBuf>> {
    let figs = plot_figures(args)?;
    let mut written = Vec::new();
    for (name, fig) in figs {
        let path = args.out.join(name);
        write_atomic(&path, fig.to_svg().as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Fit(a) => {
            let r = fit_command(a)?;
            println!(
                "fitted {} model(s) on {} observations -> {}",
                r.rows.len(),
                r.n,
                a.out.join("fit.json").display()
            );
        }
        Command::Predict(a) => {
            let r = predict_command(a)?;
            println!(
                "{} forecast(s) -> {}",
                r.predictions.len(),
                a.out.join("predictions.json").display()
            );
        }
        Command::Validate(a) => {
            let r = validate_command(a)?;
            for row in &r.rows {
                println!(
                    "M={} loglik={} range p={:.4} kuiper {} watson {}",
                    row.m,
                    row.tests
                        .loglik
                        .map(|v| format!("{v:.3}"))
                        .unwrap_or_else(|| "-inf".into()),
                    row.tests.p_range,
                    row.tests.kuiper_bracket,
                    row.tests.watson_bracket
                );
            }
        }
        Command::Simulate(a) => {
            let rows = simulate_command(a)?;
            println!(
                "{} table row(s) -> {}",
                rows.len(),
                a.out.join("simulation.csv").display()
            );
        }
        Command::Plot(a) => {
            let files = plot_command(a)?;
            println!("{} figure(s) -> {}", files.len(), a.out.display());
        }
    }
    Ok(())
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, meta: &log::Metadata) -> bool {
        meta.level() <= log::max_level()
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level().as_str().to_lowercase(), record.args());
        }
    }

    fn flush(&self) {}
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if log::set_logger(&StderrLogger).is_ok() {
        log::set_max_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Warn
        });
    }
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_lists() {
        assert_eq!(parse_ms("8").unwrap(), vec![8]);
        assert_eq!(parse_ms("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_ms("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_ms("2-3,1,3").unwrap(), vec![1, 2, 3]);
        for bad in ["", "0", "3..1", "a", "1,,2"] {
            assert_eq!(parse_ms(bad).unwrap_err().exit_code(), 1, "{bad}");
        }
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["nnts"]), 1);
        assert_eq!(run(["nnts", "fit", "--circle", "oval", "-i", "x.csv"]), 1);
        assert_eq!(run(["nnts", "fit", "-i", "x.csv", "--lambda", "2se"]), 1);
        assert_eq!(run(["nnts", "--help"]), 0);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
