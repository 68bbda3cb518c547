//! Write SVG figures of periwinkle density forecasts and the mean function.
//!
//! ```text
//! cargo run --release --example plot_forecasts -- [output directory]
//! ```
use std::path::{Path, PathBuf};

use nnts::cli::data::{Table, Units};
use nnts::cli::formula::Formula;
use nnts::cli::plot::{density_figure, function_figure};
use nnts::forecast::{forecast_eta, resultant_moment};
use nnts::model::{fit_regression, Estimator};
use nnts::sphere::{Branch, CircleKind};

fn feature(distance: f64) -> f64 {
    if distance <= 27.0 {
        distance - 27.0
    } else {
        0.0
    }
}

fn main() -> nnts::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    let table = Table::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/periwinkle.csv"))?;
    let thetas = table.angles("direction_deg", Units::Deg)?;
    let x = table.design(&Formula::parse("I(distance<=27)*(distance-27)")?)?;
    let fit = fit_regression(&thetas, &x, 8, CircleKind::Small, &Estimator::Ols)?;
    let circle = fit.circle();

    for (name, branch) in [
        ("positive", Some(Branch::Positive)),
        ("negative", Some(Branch::Negative)),
    ] {
        let mut curves = Vec::new();
        for d in [0.0, 15.0, 27.0, 60.0] {
            let f = forecast_eta(&circle, feature(d) * fit.beta[0], branch)?;
            curves.push((format!("distance {d}"), f.params));
        }
        let fig = density_figure(&format!("Small circle M=8, {name} branch"), &curves, 720);
        let path = out.join(format!("periwinkle_{name}.svg"));
        std::fs::write(&path, fig.to_svg())?;
        println!("wrote {}", path.display());
    }

    let mut mean = Vec::new();
    for k in 0..=107 {
        let d = k as f64;
        mean.push((d, resultant_moment(&circle, feature(d) * fit.beta[0], None)?.arg()));
    }
    let path = out.join("periwinkle_mean.svg");
    std::fs::write(
        &path,
        function_figure("Resultant mean direction", "distance", "radians", mean).to_svg(),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}
