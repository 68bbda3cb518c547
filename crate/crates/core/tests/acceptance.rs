//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status when any criterion fails.
//!
//! Run with `cargo test --release --test acceptance`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;

use nnts::cli::data::{Table, Units};
use nnts::cli::formula::Formula;
use nnts::forecast::{forecast_great, forecast_small_eta};
use nnts::gof::{kuiper_test, pit_from_params, range_test, watson_test};
use nnts::model::{fit_regression, fit_time_series, Estimator, RegressionModel, TimeSeriesModel};
use nnts::nnts::{uniform_loglik, NntsParams};
use nnts::sim::{circle_point, random_circle, random_params, study_row, BetaScenario, SimConfig};
use nnts::sphere::{
    alpha_by_search, alpha_closed_form, dot, embed_all, fit_great_circle, fit_small_circle, Branch, CircleFit,
    CircleKind, GreatCircle, SmallCircle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PERIWINKLE_FORMULA: &str = "I(distance<=27)*(distance-27)";

/// Great-circle |β̂| column of the periwinkle table, M = 1..8.
const PERIWINKLE_GREAT_BETA: [f64; 8] = [0.042, 0.230, 0.043, 0.032, 0.028, 0.015, 0.032, 0.122];
/// Great-circle AR(1) column of the wind table, M = 1..5.
const WIND_GREAT_AR1: [f64; 5] = [0.6222, 0.5041, 0.5332, 0.5276, 0.4478];

/// Case 1, known eigenvectors: mean |β̂| at n = 100 and n = 1000.
const CASE1_BETA_100: [f64; 5] = [0.077, 0.068, 0.075, 0.078, 0.074];
const CASE1_BETA_1000: [f64; 5] = [0.024, 0.023, 0.021, 0.024, 0.024];

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn data(name: &str) -> Table {
    Table::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)).expect("fixture")
}

fn periwinkle() -> (Vec<f64>, nnts::linmod::DesignMatrix) {
    let t = data("periwinkle.csv");
    let thetas = t.angles("direction_deg", Units::Deg).unwrap();
    let x = t.design(&Formula::parse(PERIWINKLE_FORMULA).unwrap()).unwrap();
    (thetas, x)
}

fn wind() -> Vec<f64> {
    data("wind.csv").angles("direction_deg", Units::Deg).unwrap()
}

fn uniform_baselines(gate: &mut Gate) {
    let (p, w) = (uniform_loglik(31), uniform_loglik(72));
    gate.check(
        "uniform baselines",
        within(p, -56.974, 0.001) && within(w, -132.327, 0.001),
        format!("n=31 {p:.4} (-56.974 ± 0.001), n=72 {w:.4} (-132.327 ± 0.001)"),
    );
}

fn case1(gate: &mut Gate) {
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, reference) in [(100, CASE1_BETA_100), (1000, CASE1_BETA_1000)] {
        let config = SimConfig::new(1, n, CircleKind::Great, BetaScenario::Case1);
        let row = study_row(&config, &[1, 2, 3, 4, 5]).expect("study");
        let rr_ok = row.rejection_rate.iter().all(|r| (0.01..=0.11).contains(r));
        let ar_ok = row.ar_range >= 0.88;
        let beta_ok = row
            .mean_abs_beta
            .iter()
            .zip(&reference)
            .all(|(b, p)| (b - p).abs() <= 0.3 * p);
        pass &= rr_ok && ar_ok && beta_ok && row.failures == 0;
        detail.push(format!(
            "n={n}: RR {:.2?} in [0.01,0.11] {}, AR(range) {:.2} >= 0.88 {}, mean|b| {:.3?} vs {:.3?} ±30% {}, failures {}",
            row.rejection_rate,
            rr_ok,
            row.ar_range,
            ar_ok,
            row.mean_abs_beta,
            reference,
            beta_ok,
            row.failures
        ));
    }
    gate.check("simulation case 1, known eigenvectors", pass, detail.join("; "));
}

fn case3(gate: &mut Gate) {
    let config = SimConfig::new(1, 1000, CircleKind::Great, BetaScenario::Case3);
    let row = study_row(&config, &[1, 2, 3, 4, 5]).expect("study");
    let (b5, rr5) = (row.mean_abs_beta[4], row.rejection_rate[4]);
    gate.check(
        "simulation case 3 signal recovery",
        within(b5, 0.267, 0.03) && rr5 >= 0.98,
        format!(
            "mean b5 {b5:.3} (0.267 ± 0.03), RR(b5) {rr5:.2} (>= 0.98), signed mean {:.3}",
            row.mean_beta[4]
        ),
    );
}

fn regression(thetas: &[f64], x: &nnts::linmod::DesignMatrix, m: usize, kind: CircleKind) -> RegressionModel {
    fit_regression(thetas, x, m, kind, &Estimator::Ols).expect("fit")
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

fn periwinkle_fixture(gate: &mut Gate) {
    let (thetas, x) = periwinkle();
    let great: Vec<RegressionModel> = (1..=8).map(|m| regression(&thetas, &x, m, CircleKind::Great)).collect();
    let small: Vec<RegressionModel> = (1..=8).map(|m| regression(&thetas, &x, m, CircleKind::Small)).collect();
    let probe_gap = great
        .iter()
        .zip(PERIWINKLE_GREAT_BETA)
        .map(|(g, p)| (g.beta[0].abs() - p).abs())
        .fold(0.0, f64::max);
    let faithful = probe_gap <= 0.0015;
    let m8 = &small[7];
    let ols = m8.ols.as_ref().unwrap();
    // the sign of β depends on the orientation of d; |β| is invariant
    let (b, se, ll, pr) = (ols.beta[0], ols.stderr[0], m8.validation.loglik, m8.validation.p_range);
    let strict_parts = [
        within(b.abs(), 0.300, 0.015),
        within(se, 0.089, 0.01),
        within(ll, -19.786, 1.0),
        pr > 0.2 && pr < 0.5,
    ];
    let strict = strict_parts.iter().all(|&p| p);
    let ssc_ok = great
        .iter()
        .zip(&small)
        .all(|(g, s)| s.transformed.circle.ssc() >= g.transformed.circle.ssc() - 1e-9);
    let r2cos: Vec<f64> = small.iter().map(|s| s.r2cos_fitted).collect();
    let fallback = ssc_ok && nonincreasing(&r2cos);
    let detail = format!(
        "transcription probe max |Δb| over great-circle M=1..8 = {probe_gap:.4} ({}); M=8 small circle: \
         b {b:.4} (|b| 0.300 ± 0.015) {}, se {se:.4} (0.089 ± 0.01) {}, loglik {ll:.3} (-19.786 ± 1) {}, \
         range p {pr:.4} in (0.2, 0.5) {}; fallback: SSC small>=great {ssc_ok}, R2cos {r2cos:.3?} nonincreasing {}",
        if faithful {
            "faithful, strict criteria apply"
        } else {
            "differs, fallback applies"
        },
        strict_parts[0],
        strict_parts[1],
        strict_parts[2],
        strict_parts[3],
        nonincreasing(&r2cos)
    );
    gate.check("periwinkle fixture", if faithful { strict } else { fallback }, detail);
}

fn ar(thetas: &[f64], m: usize, kind: CircleKind, order: usize) -> TimeSeriesModel {
    fit_time_series(thetas, m, kind, order).expect("ar fit")
}

fn wind_fixture(gate: &mut Gate) {
    let thetas = wind();
    let great: Vec<TimeSeriesModel> = (1..=5).map(|m| ar(&thetas, m, CircleKind::Great, 1)).collect();
    let small: Vec<TimeSeriesModel> = (1..=5).map(|m| ar(&thetas, m, CircleKind::Small, 1)).collect();
    let coefs: Vec<f64> = great.iter().map(|g| g.ar.coefficients()[0]).collect();
    let probe_gap = coefs
        .iter()
        .zip(WIND_GREAT_AR1)
        .map(|(c, p)| (c.abs() - p).abs())
        .fold(0.0, f64::max);
    let faithful = probe_gap <= 0.01;
    let ar2 = ar(&thetas, 4, CircleKind::Great, 2);
    let (c4, ll4, ll2) = (coefs[3], great[3].validation.loglik, ar2.validation.loglik);
    let strict_parts = [
        within(c4.abs(), 0.5276, 0.03),
        within(ll4, -78.050, 2.0),
        within(ll2, -73.967, 2.0),
    ];
    let strict = strict_parts.iter().all(|&p| p);
    let ssc_ok = great
        .iter()
        .zip(&small)
        .all(|(g, s)| s.transformed.circle.ssc() >= g.transformed.circle.ssc() - 1e-9);
    let r2g: Vec<f64> = great.iter().map(|g| g.r2cos_fitted).collect();
    let r2s: Vec<f64> = small.iter().map(|s| s.r2cos_fitted).collect();
    let fallback = ssc_ok && nonincreasing(&r2g) && nonincreasing(&r2s);
    let detail = format!(
        "transcription probe: AR(1) M=1..5 {coefs:.4?} vs {WIND_GREAT_AR1:?}, max gap {probe_gap:.4} ({}); \
         strict: AR(1) M=4 {c4:.4} (0.5276 ± 0.03) {}, loglik {ll4:.3} (-78.050 ± 2) {}, AR(2) loglik {ll2:.3} \
         (-73.967 ± 2) {}; fallback: SSC small>=great {ssc_ok}, R2cos great {r2g:.3?} small {r2s:.3?} nonincreasing {}",
        if faithful {
            "faithful, strict criteria apply"
        } else {
            "differs, fallback applies"
        },
        strict_parts[0],
        strict_parts[1],
        strict_parts[2],
        nonincreasing(&r2g) && nonincreasing(&r2s)
    );
    gate.check("wind fixture", if faithful { strict } else { fallback }, detail);
}

/// Periodic trapezoid rule; exact for trigonometric polynomials of degree < n.
fn integral(p: &NntsParams, n: usize) -> f64 {
    (0..n).map(|i| p.density(TAU * i as f64 / n as f64)).sum::<f64>() * TAU / n as f64
}

/// Kolmogorov–Smirnov test of uniformity on [0, 1].
fn ks_pvalue(u: &[f64]) -> f64 {
    let mut v = u.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

fn property_suite(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut results: Vec<(&str, bool, String)> = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(0..=8);
        let p = random_params(m, &mut rng);
        worst = worst.max((integral(&p, 64) - 1.0).abs());
    }
    results.push((
        "normalization",
        worst <= 1e-9,
        format!("max |∫f - 1| {worst:.1e} over 1000 vectors"),
    ));

    let mut endpoint = 0.0f64;
    let mut monotone = true;
    for _ in 0..200 {
        let p = random_params(rng.random_range(1..=8), &mut rng);
        endpoint = endpoint.max(p.cdf(0.0).abs()).max((p.cdf(TAU) - 1.0).abs());
        let grid: Vec<f64> = (0..=2000).map(|i| p.cdf(TAU * i as f64 / 2000.0)).collect();
        monotone &= grid.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    }
    results.push((
        "cdf",
        monotone && endpoint <= 1e-12,
        format!("monotone {monotone}, endpoint error {endpoint:.1e}"),
    ));

    let mut ortho = 0.0f64;
    for m in 1..=8 {
        let thetas: Vec<f64> = (0..60).map(|_| rng.random::<f64>() * TAU).collect();
        let fit = fit_small_circle(&embed_all(&thetas, m)).unwrap();
        let c = &fit.circle;
        let basis = [&c.b, &c.a, &c.d];
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((dot(u, v) - target).abs());
            }
        }
    }
    results.push((
        "eigen-basis orthonormality",
        ortho <= 1e-10,
        format!("max deviation {ortho:.1e}"),
    ));

    let mut ssc_gap = 0.0f64;
    let mut ssc_bounded = true;
    for n in 2..=6 {
        for _ in 0..5 {
            let thetas: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
            let vectors = embed_all(&thetas, 1);
            let fit = fit_great_circle(&vectors).unwrap();
            ssc_bounded &= fit.ssc <= n as f64 + 1e-12;
            // plane normal on a grid over the unit sphere
            let mut best = 0.0f64;
            for i in 0..=400 {
                let polar = std::f64::consts::PI * i as f64 / 400.0;
                for j in 0..800 {
                    let az = TAU * j as f64 / 800.0;
                    let u = [polar.cos(), polar.sin() * az.cos(), polar.sin() * az.sin()];
                    let ssc: f64 = vectors.iter().map(|v| 1.0 - dot(v.coords(), &u).powi(2)).sum();
                    best = best.max(ssc);
                }
            }
            ssc_bounded &= fit.ssc >= best - 1e-9;
            ssc_gap = ssc_gap.max(fit.ssc - best);
        }
    }
    results.push((
        "SSC bound and brute-force oracle (M=1, n<=6)",
        ssc_bounded && ssc_gap <= 1e-3,
        format!("SSC <= n and >= grid optimum {ssc_bounded}, max eigen-minus-grid gap {ssc_gap:.1e}"),
    ));

    let circle = random_circle(3, CircleKind::Small, 0.6, 99).unwrap();
    let params: Vec<NntsParams> = (0..10_000)
        .map(|_| NntsParams::from_real(&circle_point(&circle, (rng.random::<f64>() - 0.5) * TAU)).unwrap())
        .collect();
    let thetas: Vec<f64> = params.iter().map(|p| p.sample_with(1, &mut rng)[0]).collect();
    let ks = ks_pvalue(&pit_from_params(&params, &thetas).unwrap());
    results.push(("PIT of truth", ks > 0.01, format!("KS p {ks:.3} at n=10^4")));

    let nulls = 10_000;
    let mut rejections = [0usize; 3];
    for _ in 0..nulls {
        let u: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        for (k, p) in [
            range_test(&u).unwrap().p_value,
            kuiper_test(&u).unwrap().p_value,
            watson_test(&u).unwrap().p_value,
        ]
        .into_iter()
        .enumerate()
        {
            rejections[k] += usize::from(p < 0.05);
        }
    }
    let sizes = rejections.map(|r| r as f64 / nulls as f64);
    results.push((
        "GOF size",
        sizes.iter().all(|s| within(*s, 0.05, 0.01)),
        format!(
            "range {:.4}, kuiper {:.4}, watson {:.4} (0.05 ± 0.01, n=50)",
            sizes[0], sizes[1], sizes[2]
        ),
    ));

    let mut nest = 0.0f64;
    for m in 1..=6 {
        let CircleFit::Small(fit) = random_circle(m, CircleKind::Small, FRAC_PI_2, 7 + m as u64).unwrap() else {
            unreachable!()
        };
        let small = SmallCircle {
            alpha: FRAC_PI_2,
            ..fit.circle.clone()
        };
        let great = GreatCircle {
            a: small.a.clone(),
            d: small.d.clone(),
        };
        for _ in 0..20 {
            let eta = rng.random::<f64>() * 6.0 - 3.0;
            let g = forecast_great(&great, eta.atan()).unwrap().params;
            for branch in [Branch::Positive, Branch::Negative] {
                let s = forecast_small_eta(&small, eta, branch).unwrap().params;
                for i in 0..200 {
                    let t = TAU * i as f64 / 200.0;
                    nest = nest.max((s.density(t) - g.density(t)).abs());
                }
            }
        }
    }
    results.push((
        "small circle at α=π/2 equals great circle",
        nest <= 1e-10,
        format!("max |Δf| {nest:.1e}"),
    ));

    let mut alpha_gap = 0.0f64;
    for (m, alpha) in [(1, 0.4), (2, 0.7), (3, 1.0), (4, 0.3), (5, 1.2)] {
        let circle = random_circle(m, CircleKind::Small, alpha, 300 + m as u64).unwrap();
        let thetas: Vec<f64> = (0..400)
            .map(|_| {
                let p = NntsParams::from_real(&circle_point(&circle, rng.random::<f64>() * TAU)).unwrap();
                p.sample_with(1, &mut rng)[0]
            })
            .collect();
        let vectors = embed_all(&thetas, m);
        let c = fit_small_circle(&vectors).unwrap().circle;
        let closed = alpha_closed_form(&vectors, &c.b, &c.a, &c.d);
        let search = alpha_by_search(&vectors, &c.b, &c.a, &c.d);
        alpha_gap = alpha_gap.max((closed - search).abs());
    }
    results.push((
        "α closed form vs search",
        alpha_gap <= 1e-6,
        format!("max gap {alpha_gap:.1e}"),
    ));

    let all = results.iter().all(|r| r.1);
    let detail: Vec<String> = results
        .iter()
        .map(|(name, pass, d)| format!("{name} [{}] {d}", if *pass { "ok" } else { "FAILED" }))
        .collect();
    gate.check("property suite", all, detail.join("; "));
}

fn main() {
    let mut gate = Gate { failures: 0 };
    uniform_baselines(&mut gate);
    case1(&mut gate);
    case3(&mut gate);
    periwinkle_fixture(&mut gate);
    wind_fixture(&mut gate);
    property_suite(&mut gate);
    println!("acceptance: {} criterion/criteria failed", gate.failures);
    if gate.failures > 0 {
        std::process::exit(1);
    }
}
