//! Linear models for the transformed variable `Y`.

mod ar;
mod elastic_net;
mod ols;

pub use ar::{acf_pacf, ar_predict, fit_ar, lag_design, ArFit, Correlogram};
pub use elastic_net::{
    cross_validate, elastic_net, kkt_violation, lambda_grid, CvResult, ElasticNetOptions, LambdaChoice, PathPoint,
};
pub use ols::{ols_no_intercept, squared_correlation, DesignMatrix, LinearFit, MAX_CONDITION};
