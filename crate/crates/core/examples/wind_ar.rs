//! Autoregressive NNTS models for the hourly wind directions.
//!
//! ```text
//! cargo run --release --example wind_ar
//! ```
use std::path::Path;

use nnts::cli::data::{Table, Units};
use nnts::linmod::acf_pacf;
use nnts::model::fit_time_series;
use nnts::sphere::CircleKind;

fn main() -> nnts::Result<()> {
    let table = Table::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/wind.csv"))?;
    let thetas = table.angles("direction_deg", Units::Deg)?;

    for kind in [CircleKind::Great, CircleKind::Small] {
        println!("{kind:?} circle, AR(1)");
        for m in 1..=5 {
            let fit = fit_time_series(&thetas, m, kind, 1)?;
            println!(
                "  M={m}  phi {:+.4} (se {:.4})  R2cos {:.3}  range p {:.3}  loglik {:.3}",
                fit.ar.coefficients()[0],
                fit.ar.stderr()[0],
                fit.r2cos_fitted,
                fit.validation.p_range,
                fit.validation.loglik
            );
        }
    }

    let ar2 = fit_time_series(&thetas, 4, CircleKind::Great, 2)?;
    println!(
        "great circle M=4 AR(2): {:+.4?}, loglik {:.3} (conditional on the first two hours)",
        ar2.ar.coefficients(),
        ar2.validation.loglik
    );
    let corr = acf_pacf(&ar2.transformed.y, 6)?;
    println!("PACF of Y: {:+.3?} (band ±{:.3})", corr.pacf, corr.band);
    Ok(())
}
