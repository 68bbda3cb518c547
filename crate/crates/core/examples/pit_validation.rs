//! PIT uniformity checks for a correct and a misspecified forecast.
//!
//! ```text
//! cargo run --example pit_validation
//! ```
use nnts::gof::{bh_adjust, kuiper_test, pit_from_params, range_test, validate, watson_test};
use nnts::NntsParams;
use num_complex::Complex64;

fn main() -> nnts::Result<()> {
    let truth = NntsParams::from_unnormalized(vec![Complex64::new(1.0, 0.0), Complex64::new(0.8, 0.4)])?;
    let thetas = truth.sample(200, 7);

    let mut range_p = Vec::new();
    for (label, model) in [("true density", truth.clone()), ("uniform", NntsParams::uniform())] {
        let params = vec![model; thetas.len()];
        let u = pit_from_params(&params, &thetas)?;
        let (r, k, w) = (range_test(&u)?, kuiper_test(&u)?, watson_test(&u)?);
        println!(
            "{label:<13} range {:.3} (p {:.4})  Kuiper {:.3} (p {:.4})  Watson {:.4} (p {:.4})",
            r.statistic, r.p_value, k.statistic, k.p_value, w.statistic, w.p_value
        );
        range_p.push(r.p_value);
        let report = validate(&params, &thetas)?;
        println!("{:<13} loglik {:.3}", "", report.loglik);
    }
    println!(
        "Benjamini-Hochberg adjusted range p-values: {:.4?}",
        bh_adjust(&range_p)?
    );
    Ok(())
}
