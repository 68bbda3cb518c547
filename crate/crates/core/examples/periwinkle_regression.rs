//! Great- and small-circle regressions of periwinkle directions on distance.
//!
//! ```text
//! cargo run --release --example periwinkle_regression
//! ```
use std::path::Path;

use nnts::cli::data::{Table, Units};
use nnts::cli::formula::Formula;
use nnts::gof::{kuiper_bracket, watson_bracket};
use nnts::model::{fit_regression, Estimator};
use nnts::nnts::uniform_loglik;
use nnts::sphere::{Circle, CircleKind};

fn main() -> nnts::Result<()> {
    let table = Table::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/periwinkle.csv"))?;
    let thetas = table.angles("direction_deg", Units::Deg)?;
    let x = table.design(&Formula::parse("I(distance<=27)*(distance-27)")?)?;

    for kind in [CircleKind::Great, CircleKind::Small] {
        println!("{kind:?} circle");
        println!(" M  alpha   |beta|  (se, p)              R2cos  R2     range p  Kuiper        Watson        loglik");
        for m in 1..=8 {
            let fit = fit_regression(&thetas, &x, m, kind, &Estimator::Ols)?;
            let ols = fit.ols.as_ref().expect("OLS fit");
            let alpha = match fit.circle() {
                Circle::Small(c) => format!("{:.3}", c.alpha),
                Circle::Great(_) => "  -  ".into(),
            };
            let v = &fit.validation;
            println!(
                " {m}  {alpha}  {:.3}  ({:.3}, {:.3})  {:.3}  {:.3}  {:.3}    {:<12}  {:<12}  {:.3}",
                ols.beta[0].abs(),
                ols.stderr[0],
                ols.pvalues[0],
                fit.r2cos_fitted,
                ols.r2_uncentered,
                v.p_range,
                kuiper_bracket(v.p_kuiper),
                watson_bracket(v.p_watson),
                v.loglik
            );
        }
    }
    println!("uniform loglik: {:.3}", uniform_loglik(thetas.len()));
    Ok(())
}
