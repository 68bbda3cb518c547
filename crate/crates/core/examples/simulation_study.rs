//! Reproduce rows of the simulation tables.
//!
//! ```text
//! cargo run --release --example simulation_study -- [case] [n] [known|estimated] [great|small]
//! ```
use nnts::sim::{study_row, write_csv, BetaScenario, Eigenvectors, SimConfig};
use nnts::sphere::CircleKind;

fn main() -> nnts::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let case = args.first().and_then(|s| s.parse().ok()).unwrap_or(1);
    let n = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let eigen = match args.get(2).map(String::as_str) {
        Some("estimated") => Eigenvectors::Estimated,
        _ => Eigenvectors::Known,
    };
    let kind = match args.get(3).map(String::as_str) {
        Some("small") => CircleKind::Small,
        _ => CircleKind::Great,
    };
    let mut config = SimConfig::new(1, n, kind, BetaScenario::from_number(case)?);
    config.eigenvectors = eigen;
    let row = study_row(&config, &[1, 2, 3, 4, 5])?;
    println!("mean |beta|: {:.3?}", row.mean_abs_beta);
    println!("rejection rates: {:.2?}", row.rejection_rate);
    println!(
        "acceptance: range {:.2} kuiper {:.2} watson {:.2}",
        row.ar_range, row.ar_kuiper, row.ar_watson
    );
    write_csv(&[row], std::io::stdout())
}
