//! Elastic-net selection on a simulated design where only the last covariate matters.
//!
//! ```text
//! cargo run --release --example lasso_selection
//! ```
use nnts::linmod::LambdaChoice;
use nnts::model::{fit_regression, Estimator};
use nnts::sim::{simulate_dataset, BetaScenario, SimConfig};
use nnts::sphere::CircleKind;

fn main() -> nnts::Result<()> {
    let config = SimConfig::new(2, 400, CircleKind::Great, BetaScenario::Case3);
    let data = simulate_dataset(&config, 0)?;
    println!("true beta {:?}", data.beta);

    let ols = fit_regression(&data.thetas, &data.x, 2, CircleKind::Great, &Estimator::Ols)?;
    println!("OLS            {:+.3?}", ols.beta);

    for choice in [LambdaChoice::Min, LambdaChoice::OneSe] {
        let estimator = Estimator::ElasticNet {
            alpha: 0.5,
            choice,
            folds: 10,
            seed: 1,
            n_lambda: 100,
        };
        let fit = fit_regression(&data.thetas, &data.x, 2, CircleKind::Great, &estimator)?;
        let pen = fit.penalized.as_ref().expect("penalized fit");
        println!(
            "{:<14} {:+.3?}  lambda {:.4}, {} selected, range p {:.3}",
            format!("{choice:?}"),
            pen.beta,
            pen.lambda,
            pen.selected,
            fit.validation.p_range
        );
    }
    Ok(())
}
