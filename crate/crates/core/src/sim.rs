//! Monte Carlo study of the regression methodology.
//!
//! One 1000-row design matrix is drawn per study and its first `n` rows are
//! used. Each configuration draws a generating circle from the leading
//! eigenvectors of 5000 draws of a random NNTS density, simulates responses
//! at `φ_k = arctan(x_kᵀβ)`, refits and tallies coefficient rejections and
//! PIT uniformity acceptances.

use std::f64::consts::PI;
use std::fmt;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linmod::DesignMatrix;
use crate::model::{regress, transform, transform_with, Estimator};
use crate::nnts::NntsParams;
use crate::sphere::{embed_all, fit_great_circle, fit_small_circle, CircleFit, CircleKind};

/// Rows in the shared design matrix.
pub const DESIGN_ROWS: usize = 1000;
/// Draws used to build each generating circle.
pub const CIRCLE_DRAWS: usize = 5000;
pub const SIGNIFICANCE: f64 = 0.05;

/// The four coefficient vectors; `None` marks a column left out of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaScenario {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl BetaScenario {
    pub fn beta(self) -> [Option<f64>; 5] {
        match self {
            BetaScenario::Case1 => [Some(0.0); 5],
            BetaScenario::Case2 => [Some(0.3), Some(0.2), Some(0.15), Some(0.2), Some(0.3)],
            BetaScenario::Case3 => [Some(0.0), Some(0.0), Some(0.0), Some(0.0), Some(0.3)],
            BetaScenario::Case4 => [None, None, None, None, Some(0.3)],
        }
    }

    pub fn number(self) -> u8 {
        match self {
            BetaScenario::Case1 => 1,
            BetaScenario::Case2 => 2,
            BetaScenario::Case3 => 3,
            BetaScenario::Case4 => 4,
        }
    }

    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(BetaScenario::Case1),
            2 => Ok(BetaScenario::Case2),
            3 => Ok(BetaScenario::Case3),
            4 => Ok(BetaScenario::Case4),
            other => Err(Error::Usage(format!("unknown beta case {other}; expected 1-4"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eigenvectors {
    Known,
    Estimated,
}

impl fmt::Display for Eigenvectors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eigenvectors::Known => "known",
            Eigenvectors::Estimated => "estimated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub m: usize,
    pub n: usize,
    pub kind: CircleKind,
    pub case: BetaScenario,
    pub replicates: usize,
    pub seed: u64,
    pub eigenvectors: Eigenvectors,
    /// Opening angle of generating small circles.
    pub alpha: f64,
    /// Keep estimated-eigenvector runs with `M > 5`, which are dropped by
    /// default.
    pub include_unreliable: bool,
}

impl SimConfig {
    pub fn new(m: usize, n: usize, kind: CircleKind, case: BetaScenario) -> Self {
        SimConfig {
            m,
            n,
            kind,
            case,
            replicates: 100,
            seed: 1,
            eigenvectors: Eigenvectors::Known,
            alpha: PI / 4.0,
            include_unreliable: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidInput("simulation needs M >= 1".into()));
        }
        if self.n == 0 || self.n > DESIGN_ROWS {
            return Err(Error::InvalidInput(format!(
                "sample size must lie in 1..={DESIGN_ROWS}, got {}",
                self.n
            )));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidInput("at least one replicate is required".into()));
        }
        Ok(())
    }

    /// Whether the default filter drops this configuration.
    pub fn excluded_by_default(&self) -> bool {
        self.eigenvectors == Eigenvectors::Estimated && self.m > 5 && !self.include_unreliable
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(seed), |acc, p| mix(acc ^ p))
}

/// The first `n` rows of the 1000-row study design.
///
/// Column 1 is ±1 with equal probability, column 2 is uniform on 1..=40 and
/// columns 3-5 are normal with unit variance and means 4, 6 and 8. Columns
/// 2-5 are standardized over all 1000 rows.
pub fn make_design(n: usize, seed: u64) -> Result<DesignMatrix> {
    if n > DESIGN_ROWS {
        return Err(Error::InvalidInput(format!("design has only {DESIGN_ROWS} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[0xD5]));
    let mut data = DMatrix::<f64>::zeros(DESIGN_ROWS, 5);
    for i in 0..DESIGN_ROWS {
        data[(i, 0)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        data[(i, 1)] = rng.random_range(1..=40) as f64;
        for (j, mean) in [(2, 4.0), (3, 6.0), (4, 8.0)] {
            data[(i, j)] = Normal::new(mean, 1.0).expect("valid normal").sample(&mut rng);
        }
    }
    for j in 1..5 {
        let col = data.column(j);
        let mean = col.mean();
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (DESIGN_ROWS - 1) as f64).sqrt();
        data.column_mut(j).iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    let names = (1..=5).map(|j| format!("x{j}")).collect();
    Ok(DesignMatrix::new(data, names)?.head(n))
}

/// Uniformly distributed parameter vector on the unit hypersphere.
pub fn random_params<R: Rng + ?Sized>(m: usize, rng: &mut R) -> NntsParams {
    loop {
        let coeffs: Vec<Complex64> = (0..=m)
            .map(|_| Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)))
            .collect();
        if let Ok(p) = NntsParams::from_unnormalized(coeffs) {
            return p;
        }
    }
}

/// Generating circle from the leading eigenvectors of [`CIRCLE_DRAWS`] draws of
/// a random density. Degenerate spectra are retried with the next seed.
pub fn random_circle(m: usize, kind: CircleKind, alpha: f64, seed: u64) -> Result<CircleFit> {
    if m == 0 {
        return Err(Error::InvalidInput("circles need M >= 1".into()));
    }
    for attempt in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[0xC1, attempt]));
        let c = random_params(m, &mut rng);
        let draws = c.sample_with(CIRCLE_DRAWS, &mut rng);
        let vectors = embed_all(&draws, m);
        let fit = match kind {
            CircleKind::Great => CircleFit::Great(fit_great_circle(&vectors)?),
            CircleKind::Small => {
                let mut f = fit_small_circle(&vectors)?;
                f.circle.alpha = alpha;
                f.alpha_closed_form_rejected = None;
                CircleFit::Small(f)
            }
        };
        if !fit.degenerate() {
            return Ok(fit);
        }
        warn!("degenerate generating circle for seed {seed}, attempt {attempt}; retrying");
    }
    Err(Error::Eigen(
        "no nondegenerate generating circle in 100 attempts".into(),
    ))
}

/// Point of the generating circle at rotation `phi`.
pub fn circle_point(circle: &CircleFit, phi: f64) -> Vec<f64> {
    match circle {
        CircleFit::Great(g) => g.circle.point(phi),
        CircleFit::Small(s) => s.circle.point(phi),
    }
}

/// One simulated sample.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub thetas: Vec<f64>,
    /// Design restricted to the columns in the model.
    pub x: DesignMatrix,
    pub circle: CircleFit,
    pub beta: Vec<f64>,
}

fn included(case: BetaScenario) -> (Vec<usize>, Vec<f64>) {
    case.beta()
        .iter()
        .enumerate()
        .filter_map(|(j, b)| b.map(|v| (j, v)))
        .unzip()
}

/// Draw one response per design row at `φ_k = arctan(x_kᵀβ)`.
pub fn simulate_responses<R: Rng + ?Sized>(
    circle: &CircleFit,
    x: &DesignMatrix,
    beta: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    (0..x.nrows())
        .map(|i| {
            let eta: f64 = x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum();
            let params = NntsParams::from_real(&circle_point(circle, eta.atan()))?;
            Ok(params.sample_with(1, &mut *rng)[0])
        })
        .collect()
}

fn config_seed(config: &SimConfig) -> u64 {
    derive(
        config.seed,
        &[
            config.m as u64,
            config.n as u64,
            config.case.number() as u64,
            config.kind as u64,
        ],
    )
}

/// Generating circle for a configuration.
pub fn config_circle(config: &SimConfig) -> Result<CircleFit> {
    random_circle(config.m, config.kind, config.alpha, config_seed(config))
}

fn replicate_rng(config: &SimConfig, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config_seed(config));
    rng.set_stream(index as u64 + 1);
    rng
}

/// Replicate `index` of a configuration, reproducible on its own.
pub fn simulate_dataset(config: &SimConfig, index: usize) -> Result<SimDataset> {
    config.validate()?;
    let design = make_design(config.n, config.seed)?;
    let circle = config_circle(config)?;
    simulate_with(config, &design, &circle, index)
}

fn simulate_with(config: &SimConfig, design: &DesignMatrix, circle: &CircleFit, index: usize) -> Result<SimDataset> {
    let (cols, beta) = included(config.case);
    let x = design.select_columns(&cols);
    let mut rng = replicate_rng(config, index);
    let thetas = simulate_responses(circle, &x, &beta, &mut rng)?;
    Ok(SimDataset {
        thetas,
        x,
        circle: circle.clone(),
        beta,
    })
}

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub beta_hat: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub p_range: f64,
    pub p_kuiper: f64,
    pub p_watson: f64,
}

pub fn run_replicate(config: &SimConfig, data: &SimDataset) -> Result<ReplicateResult> {
    let transformed = match config.eigenvectors {
        Eigenvectors::Known => transform_with(embed_all(&data.thetas, config.m), data.circle.clone())?,
        Eigenvectors::Estimated => transform(&data.thetas, config.m, config.kind)?,
    };
    let model = regress(&data.thetas, &data.x, transformed, &Estimator::Ols)?;
    let ols = model.ols.expect("ordinary least squares");
    Ok(ReplicateResult {
        beta_hat: ols.beta,
        pvalues: ols.pvalues,
        p_range: model.validation.p_range,
        p_kuiper: model.validation.p_kuiper,
        p_watson: model.validation.p_watson,
    })
}

/// Running sums over replicates; merging tallies pools configurations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub replicates: usize,
    pub failures: usize,
    pub sum_beta: Vec<f64>,
    pub sum_abs_beta: Vec<f64>,
    pub rejections: Vec<usize>,
    pub accept_range: usize,
    pub accept_kuiper: usize,
    pub accept_watson: usize,
}

impl Tally {
    fn with_width(p: usize) -> Self {
        Tally {
            sum_beta: vec![0.0; p],
            sum_abs_beta: vec![0.0; p],
            rejections: vec![0; p],
            ..Default::default()
        }
    }

    pub fn add(&mut self, r: &ReplicateResult) {
        if self.sum_beta.is_empty() {
            *self = Tally {
                replicates: self.replicates,
                failures: self.failures,
                ..Tally::with_width(r.beta_hat.len())
            };
        }
        self.replicates += 1;
        for (j, (b, p)) in r.beta_hat.iter().zip(&r.pvalues).enumerate() {
            self.sum_beta[j] += b;
            self.sum_abs_beta[j] += b.abs();
            if *p < SIGNIFICANCE {
                self.rejections[j] += 1;
            }
        }
        self.accept_range += usize::from(r.p_range >= SIGNIFICANCE);
        self.accept_kuiper += usize::from(r.p_kuiper >= SIGNIFICANCE);
        self.accept_watson += usize::from(r.p_watson >= SIGNIFICANCE);
    }

    pub fn merge(&mut self, other: &Tally) {
        if self.sum_beta.is_empty() {
            let (reps, fails) = (self.replicates, self.failures);
            *self = other.clone();
            self.replicates += reps;
            self.failures += fails;
            return;
        }
        self.replicates += other.replicates;
        self.failures += other.failures;
        for j in 0..self.sum_beta.len().min(other.sum_beta.len()) {
            self.sum_beta[j] += other.sum_beta[j];
            self.sum_abs_beta[j] += other.sum_abs_beta[j];
            self.rejections[j] += other.rejections[j];
        }
        self.accept_range += other.accept_range;
        self.accept_kuiper += other.accept_kuiper;
        self.accept_watson += other.accept_watson;
    }

    fn rate(&self, count: usize) -> f64 {
        count as f64 / self.replicates.max(1) as f64
    }

    pub fn mean_beta(&self) -> Vec<f64> {
        self.sum_beta
            .iter()
            .map(|s| s / self.replicates.max(1) as f64)
            .collect()
    }

    pub fn mean_abs_beta(&self) -> Vec<f64> {
        self.sum_abs_beta
            .iter()
            .map(|s| s / self.replicates.max(1) as f64)
            .collect()
    }

    pub fn rejection_rates(&self) -> Vec<f64> {
        self.rejections.iter().map(|&c| self.rate(c)).collect()
    }

    pub fn acceptance_rates(&self) -> [f64; 3] {
        [
            self.rate(self.accept_range),
            self.rate(self.accept_kuiper),
            self.rate(self.accept_watson),
        ]
    }
}

/// Run every replicate of one configuration.
pub fn run_study(config: &SimConfig) -> Result<Tally> {
    config.validate()?;
    let design = make_design(config.n, config.seed)?;
    let circle = config_circle(config)?;
    let results: Vec<Result<ReplicateResult>> = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let data = simulate_with(config, &design, &circle, i)?;
            run_replicate(config, &data)
        })
        .collect();
    let (cols, _) = included(config.case);
    let mut tally = Tally::with_width(cols.len());
    for r in results {
        match r {
            Ok(r) => tally.add(&r),
            Err(e) => {
                warn!("replicate failed: {e}");
                tally.failures += 1;
            }
        }
    }
    Ok(tally)
}

/// One row of a study table: a case, eigenvector mode and sample size pooled
/// over harmonics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub case: u8,
    pub kind: CircleKind,
    pub eigenvectors: Eigenvectors,
    pub n: usize,
    pub m: Vec<usize>,
    /// Excluded harmonics.
    pub skipped_m: Vec<usize>,
    /// Names of the coefficients in the model.
    pub columns: Vec<String>,
    pub true_beta: Vec<f64>,
    pub mean_abs_beta: Vec<f64>,
    pub mean_beta: Vec<f64>,
    pub rejection_rate: Vec<f64>,
    pub ar_range: f64,
    pub ar_kuiper: f64,
    pub ar_watson: f64,
    pub replicates: usize,
    pub failures: usize,
}

/// Pool configurations over `ms`, applying the default exclusion of
/// unreliable estimated-eigenvector runs.
pub fn study_row(template: &SimConfig, ms: &[usize]) -> Result<StudyRow> {
    let mut tally = Tally::default();
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    for &m in ms {
        let config = SimConfig { m, ..template.clone() };
        if config.excluded_by_default() {
            skipped.push(m);
            continue;
        }
        tally.merge(&run_study(&config)?);
        used.push(m);
    }
    let (cols, beta) = included(template.case);
    let [ar_range, ar_kuiper, ar_watson] = tally.acceptance_rates();
    Ok(StudyRow {
        case: template.case.number(),
        kind: template.kind,
        eigenvectors: template.eigenvectors,
        n: template.n,
        m: used,
        skipped_m: skipped,
        columns: cols.iter().map(|j| format!("x{}", j + 1)).collect(),
        true_beta: beta,
        mean_abs_beta: tally.mean_abs_beta(),
        mean_beta: tally.mean_beta(),
        rejection_rate: tally.rejection_rates(),
        ar_range,
        ar_kuiper,
        ar_watson,
        replicates: tally.replicates,
        failures: tally.failures,
    })
}

/// Write study rows as CSV with one column per coefficient statistic.
pub fn write_csv<W: std::io::Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["case", "circle", "eigenvectors", "n", "m"].map(String::from).to_vec();
    for j in 1..=5 {
        header.push(format!("beta{j}"));
    }
    for j in 1..=5 {
        header.push(format!("rr{j}"));
    }
    header.extend(["ar_range", "ar_kuiper", "ar_watson", "replicates", "failures"].map(String::from));
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.case.to_string(),
            format!("{:?}", row.kind).to_lowercase(),
            row.eigenvectors.to_string(),
            row.n.to_string(),
            row.m.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";"),
        ];
        let slot = |vals: &[f64], j: usize| -> String {
            row.columns
                .iter()
                .position(|c| *c == format!("x{j}"))
                .map(|k| format!("{:.3}", vals[k]))
                .unwrap_or_default()
        };
        for j in 1..=5 {
            rec.push(slot(&row.mean_abs_beta, j));
        }
        for j in 1..=5 {
            rec.push(slot(&row.rejection_rate, j));
        }
        rec.extend([
            format!("{:.2}", row.ar_range),
            format!("{:.2}", row.ar_kuiper),
            format!("{:.2}", row.ar_watson),
            row.replicates.to_string(),
            row.failures.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof::pit_from_params;
    use crate::sphere::dot;

    #[test]
    fn design_columns() {
        let x = make_design(1000, 7).unwrap();
        assert!(x.column(0).iter().all(|v| *v == 1.0 || *v == -1.0));
        for j in 1..5 {
            let c = x.column(j);
            let mean = c.iter().sum::<f64>() / 1000.0;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 999.0;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-12);
        }
        // column 2 takes at most 40 distinct values
        let mut distinct = x.column(1);
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        assert!(distinct.len() <= 40 && distinct.len() > 30);
        assert_eq!(make_design(1000, 7).unwrap(), x);
        assert_eq!(make_design(100, 7).unwrap(), x.head(100));
        assert_ne!(make_design(1000, 8).unwrap(), x);
        assert!(make_design(1001, 7).is_err());
    }

    #[test]
    fn generating_circles() {
        let g = random_circle(3, CircleKind::Great, PI / 4.0, 1).unwrap();
        let CircleFit::Great(gf) = &g else { panic!() };
        let (a, d) = (&gf.circle.a, &gf.circle.d);
        assert!((dot(a, a) - 1.0).abs() < 1e-10 && dot(a, d).abs() < 1e-10);
        let other = random_circle(3, CircleKind::Great, PI / 4.0, 2).unwrap();
        assert_ne!(g.circle(), other.circle());
        let s = random_circle(2, CircleKind::Small, 0.7, 3).unwrap();
        let CircleFit::Small(sf) = &s else { panic!() };
        assert_eq!(sf.circle.alpha, 0.7);
        let one = random_circle(1, CircleKind::Great, 0.0, 4).unwrap();
        for i in 0..50 {
            let p = circle_point(&one, i as f64 * 0.13);
            assert!((dot(&p, &p) - 1.0).abs() < 1e-12);
            assert!(NntsParams::from_real(&p).is_ok());
        }
    }

    #[test]
    fn datasets_are_deterministic() {
        let config = SimConfig::new(2, 50, CircleKind::Great, BetaScenario::Case2);
        let a = simulate_dataset(&config, 3).unwrap();
        let b = simulate_dataset(&config, 3).unwrap();
        assert_eq!(a.thetas, b.thetas);
        let c = simulate_dataset(&config, 4).unwrap();
        assert_ne!(a.thetas, c.thetas);
        assert_eq!(a.x.ncols(), 5);
        let four = SimConfig::new(2, 50, CircleKind::Great, BetaScenario::Case4);
        assert_eq!(simulate_dataset(&four, 0).unwrap().x.ncols(), 1);
    }

    #[test]
    fn responses_are_pit_uniform_under_truth() {
        let config = SimConfig::new(2, 1000, CircleKind::Small, BetaScenario::Case2);
        let data = simulate_dataset(&config, 0).unwrap();
        let params: Vec<NntsParams> = (0..data.x.nrows())
            .map(|i| {
                let eta: f64 = data.x.row(i).iter().zip(&data.beta).map(|(a, b)| a * b).sum();
                NntsParams::from_real(&circle_point(&data.circle, eta.atan())).unwrap()
            })
            .collect();
        let mut pit = pit_from_params(&params, &data.thetas).unwrap();
        pit.sort_by(f64::total_cmp);
        let n = pit.len() as f64;
        let ks = pit
            .iter()
            .enumerate()
            .map(|(i, u)| ((i + 1) as f64 / n - u).max(u - i as f64 / n))
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / n.sqrt(), "{ks}");
    }

    #[test]
    fn tallies_pool_by_sums() {
        let r = |b: f64, p: f64| ReplicateResult {
            beta_hat: vec![b],
            pvalues: vec![p],
            p_range: p,
            p_kuiper: 0.5,
            p_watson: 0.01,
        };
        let mut a = Tally::default();
        a.add(&r(0.2, 0.01));
        let mut b = Tally::default();
        b.add(&r(-0.4, 0.5));
        b.failures = 1;
        a.merge(&b);
        assert_eq!(a.replicates, 2);
        assert_eq!(a.failures, 1);
        assert!((a.mean_abs_beta()[0] - 0.3).abs() < 1e-15);
        assert!((a.mean_beta()[0] + 0.1).abs() < 1e-15);
        assert_eq!(a.rejection_rates(), vec![0.5]);
        assert_eq!(a.acceptance_rates(), [0.5, 1.0, 0.0]);
    }

    #[test]
    fn unreliable_runs_are_skipped() {
        let mut config = SimConfig::new(6, 25, CircleKind::Great, BetaScenario::Case1);
        config.eigenvectors = Eigenvectors::Estimated;
        config.replicates = 2;
        let row = study_row(&config, &[1, 6]).unwrap();
        assert_eq!(row.m, vec![1]);
        assert_eq!(row.skipped_m, vec![6]);
        assert_eq!(row.replicates, 2);
        config.include_unreliable = true;
        assert_eq!(study_row(&config, &[6]).unwrap().m, vec![6]);
    }

    #[test]
    fn small_study_is_reproducible_and_writes_csv() {
        let mut config = SimConfig::new(1, 50, CircleKind::Great, BetaScenario::Case3);
        config.replicates = 8;
        let a = study_row(&config, &[1, 2]).unwrap();
        let b = study_row(&config, &[1, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.replicates + a.failures, 16);
        let mut buf = Vec::new();
        write_csv(&[a], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("case,circle,eigenvectors,n,m,beta1"));
        assert_eq!(text.lines().count(), 2);
    }
}
