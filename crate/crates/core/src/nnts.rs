//! Nonnegative trigonometric sum (NNTS) densities on the circle.
//!
//! An NNTS density with `M` harmonics is the squared modulus of a complex
//! trigonometric polynomial,
//!
//! ```text
//! f(θ) = (1/2π) |Σ_{k=0}^{M} c_k e^{ikθ}|²,   Σ |c_k|² = 1,
//! ```
//!
//! so the parameter space is the unit sphere in `C^{M+1}`. Because a global
//! phase does not change the density, parameters are stored in canonical form
//! with `c_0` real and nonnegative. The real image used by the hypersphere
//! geometry is the `(2M+1)`-vector `(Re c_0, …, Re c_M, Im c_1, …, Im c_M)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters whose squared norm is off by more than this are rejected.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// An angle in radians, reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Self {
        Angle(reduce_angle(radians))
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Angle::new(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Canonical NNTS parameter vector `c* = (c_0, …, c_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NntsParams {
    coeffs: Vec<Complex64>,
}

impl NntsParams {
    /// Build from complex coefficients.
    ///
    /// The vector is phase-rotated so that `c_0` is real and nonnegative and
    /// then renormalized. Inputs whose squared norm differs from one by more
    /// than [`NORM_TOLERANCE`] are rejected.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParams("empty coefficient vector".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParams("non-finite coefficient".into()));
        }
        let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParams(format!("squared norm {norm2} differs from 1")));
        }
        Ok(Self::canonicalize(coeffs))
    }

    /// Build from an arbitrary nonzero complex vector by normalizing it.
    pub fn from_unnormalized(coeffs: Vec<Complex64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParams("zero or non-finite vector".into()));
        }
        Ok(Self::canonicalize(coeffs.into_iter().map(|c| c / norm).collect()))
    }

    /// Build from the real `(2M+1)`-vector layout `(Re c_0..c_M, Im c_1..c_M)`.
    pub fn from_real(real: &[f64]) -> Result<Self> {
        if real.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "real parameter vector must have odd length 2M+1, got {}",
                real.len()
            )));
        }
        let m = (real.len() - 1) / 2;
        let coeffs = (0..=m)
            .map(|k| {
                let im = if k == 0 { 0.0 } else { real[m + k] };
                Complex64::new(real[k], im)
            })
            .collect();
        Self::new(coeffs)
    }

    /// The uniform density (`M = 0`, `c_0 = 1`).
    pub fn uniform() -> Self {
        NntsParams {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    fn canonicalize(coeffs: Vec<Complex64>) -> Self {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let phase = if coeffs[0].norm() > 0.0 {
            coeffs[0].conj() / coeffs[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut coeffs: Vec<Complex64> = coeffs.into_iter().map(|c| c * phase / norm).collect();
        coeffs[0] = Complex64::new(coeffs[0].re.max(0.0), 0.0);
        NntsParams { coeffs }
    }

    /// Number of nonconstant harmonics `M`.
    pub fn m(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Real image `(Re c_0..c_M, Im c_1..c_M)` of length `2M+1`.
    pub fn to_real(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.coeffs.iter().map(|c| c.re).collect();
        out.extend(self.coeffs[1..].iter().map(|c| c.im));
        out
    }

    /// Density value `f(θ)` in 1/radians.
    pub fn density(&self, theta: f64) -> f64 {
        let step = Complex64::from_polar(1.0, theta);
        let mut w = Complex64::new(1.0, 0.0);
        let mut z = Complex64::new(0.0, 0.0);
        for c in &self.coeffs {
            z += c * w;
            w *= step;
        }
        z.norm_sqr() / TAU
    }

    /// Lag sums `g_j = Σ_k c_{k+j} conj(c_k)` for `j = 0..=M`.
    fn lag_sums(&self) -> Vec<Complex64> {
        let m = self.m();
        (0..=m)
            .map(|j| (0..=m - j).map(|k| self.coeffs[k + j] * self.coeffs[k].conj()).sum())
            .collect()
    }

    /// Cumulative distribution `F(θ) = ∫_0^θ f(u) du`.
    ///
    /// Arguments in `[0, 2π]` are used as given (so `F(2π) = 1`); anything
    /// else is first reduced modulo `2π`.
    pub fn cdf(&self, theta: f64) -> f64 {
        let t = if (0.0..=TAU).contains(&theta) {
            theta
        } else {
            reduce_angle(theta)
        };
        let g = self.lag_sums();
        let mut acc = g[0].re * t;
        let step = Complex64::from_polar(1.0, t);
        let mut w = step;
        for (j, gj) in g.iter().enumerate().skip(1) {
            // g_j (e^{ijt} - 1)/(ij) plus its conjugate
            let term = gj * (w - 1.0) / Complex64::new(0.0, j as f64);
            acc += 2.0 * term.re;
            w *= step;
        }
        (acc / TAU).clamp(0.0, 1.0)
    }

    /// First trigonometric moment `E[e^{iθ}] = Σ_{k=0}^{M-1} c_k conj(c_{k+1})`.
    ///
    /// Its modulus is the mean resultant length and its argument the mean
    /// direction.
    pub fn first_trig_moment(&self) -> Complex64 {
        self.coeffs.windows(2).map(|w| w[0] * w[1].conj()).sum()
    }

    /// `1 - |E[e^{iθ}]|`.
    pub fn circular_variance(&self) -> f64 {
        1.0 - self.first_trig_moment().norm()
    }

    /// Draw `n` i.i.d. angles in `[0, 2π)` with a seeded generator.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    /// Rejection sampling from a uniform proposal.
    ///
    /// The envelope `(Σ|c_k|)²/2π` bounds the density by the triangle
    /// inequality.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let bound = self.coeffs.iter().map(|c| c.norm()).sum::<f64>().powi(2) / TAU;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let theta = rng.random::<f64>() * TAU;
            let u = rng.random::<f64>() * bound;
            if u < self.density(theta) {
                out.push(theta);
            }
        }
        out
    }
}

/// Result of a log-likelihood evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLik {
    /// Sum of log densities; `-inf` when some density underflows to zero.
    pub value: f64,
    /// First observation whose density was zero, if any.
    pub zero_density_at: Option<usize>,
}

/// `Σ_k log f(θ_k; c_k)` with one parameter vector per observation.
pub fn loglik(params: &[NntsParams], thetas: &[f64]) -> Result<LogLik> {
    if params.len() != thetas.len() {
        return Err(Error::Dimension(format!(
            "{} parameter vectors for {} angles",
            params.len(),
            thetas.len()
        )));
    }
    let mut value = 0.0;
    for (i, (p, &t)) in params.iter().zip(thetas).enumerate() {
        let f = p.density(t);
        if f <= 0.0 {
            return Ok(LogLik {
                value: f64::NEG_INFINITY,
                zero_density_at: Some(i),
            });
        }
        value += f.ln();
    }
    Ok(LogLik {
        value,
        zero_density_at: None,
    })
}

/// Log-likelihood of `n` observations under the circular uniform density.
pub fn uniform_loglik(n: usize) -> f64 {
    -(n as f64) * (2.0 * PI).ln()
}
