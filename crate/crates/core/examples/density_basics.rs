//! Build an NNTS density, evaluate it, sample from it and score the sample.
//!
//! ```text
//! cargo run --example density_basics
//! ```
use std::f64::consts::{PI, TAU};

use nnts::forecast::mean_direction;
use nnts::nnts::{loglik, uniform_loglik};
use nnts::NntsParams;
use num_complex::Complex64;

fn main() -> nnts::Result<()> {
    // unnormalized coefficients c_0, c_1, c_2; the constructor rescales to the unit sphere
    let params = NntsParams::from_unnormalized(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.6, -0.3),
        Complex64::new(0.2, 0.1),
    ])?;
    println!("M = {}, real vector {:.4?}", params.m(), params.to_real());

    for k in 0..8 {
        let t = k as f64 * PI / 4.0;
        println!(
            "f({t:.3}) = {:.4}   F({t:.3}) = {:.4}",
            params.density(t),
            params.cdf(t)
        );
    }
    println!("F(2π) = {:.12}", params.cdf(TAU));

    let m1 = params.first_trig_moment();
    println!(
        "first moment {:.4} at {:.4} rad, circular variance {:.4}, mean direction {:.4} rad",
        m1.norm(),
        m1.arg(),
        params.circular_variance(),
        mean_direction(&params)?.radians()
    );

    let sample = params.sample(500, 42);
    let own = loglik(&vec![params.clone(); sample.len()], &sample)?;
    println!(
        "loglik of 500 draws: {:.3} (uniform: {:.3})",
        own.value,
        uniform_loglik(sample.len())
    );
    Ok(())
}
