//! Regression and time-series models for circular data built on
//! nonnegative trigonometric sums (NNTS).

pub mod cli;
pub mod error;
pub mod forecast;
pub mod gof;
pub mod linmod;
pub mod model;
pub mod nnts;
pub mod sim;
pub mod sphere;

pub use error::{Error, Result};
pub use nnts::{Angle, NntsParams};
