//! Embedding of angles on the NNTS parameter hypersphere and best-fit great
//! and small circles.
//!
//! Each observed angle becomes a unit vector
//! `ê = (1, cos θ, …, cos Mθ, −sin θ, …, −sin Mθ)/√(M+1)` in `R^{2M+1}`.
//! The great circle `a cos φ + d sin φ` maximizing the sum of squared cosines
//! (SSC) to the data is spanned by the two leading eigenvectors of
//! `Ê = Σ ê êᵀ`; the small circle `cos α b + sin α (a cos φ + d sin φ)` uses
//! the three leading eigenvectors plus a one-dimensional fit of `α`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue gaps below `EIGEN_TIE_TOLERANCE * n` flag a degenerate fit.
pub const EIGEN_TIE_TOLERANCE: f64 = 1e-8;

/// Closed-form and searched `α` further apart than this trigger a diagnostic.
pub const ALPHA_AGREEMENT_TOLERANCE: f64 = 1e-6;

const SIGN_TOLERANCE: f64 = 1e-12;

/// An angle embedded as a unit vector of trigonometric moments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMomentVector {
    m: usize,
    coords: Vec<f64>,
}

impl TrigMomentVector {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.coords, other)
    }

    /// Wrap raw coordinates, normalizing them to unit length.
    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        if coords.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "embedding length must be odd, got {}",
                coords.len()
            )));
        }
        let norm = dot(&coords, &coords).sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        Ok(TrigMomentVector {
            m: (coords.len() - 1) / 2,
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }
}

/// Embed one angle with `m` harmonics.
pub fn embed(theta: f64, m: usize) -> TrigMomentVector {
    let scale = 1.0 / ((m + 1) as f64).sqrt();
    let mut coords = vec![0.0; 2 * m + 1];
    coords[0] = scale;
    for k in 1..=m {
        let (s, c) = (k as f64 * theta).sin_cos();
        coords[k] = c * scale;
        coords[m + k] = -s * scale;
    }
    TrigMomentVector { m, coords }
}

pub fn embed_all(thetas: &[f64], m: usize) -> Vec<TrigMomentVector> {
    thetas.iter().map(|&t| embed(t, m)).collect()
}

/// `Ê = Σ ê êᵀ`, a `(2M+1)×(2M+1)` symmetric positive semidefinite matrix.
pub fn moment_matrix(vectors: &[TrigMomentVector]) -> Result<DMatrix<f64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InsufficientData("no vectors".into()))?;
    let dim = first.coords.len();
    if let Some(bad) = vectors.iter().find(|v| v.m != first.m) {
        return Err(Error::Dimension(format!(
            "inconsistent harmonics: {} and {}",
            first.m, bad.m
        )));
    }
    let mut e = DMatrix::<f64>::zeros(dim, dim);
    for v in vectors {
        let col = DVector::from_column_slice(&v.coords);
        e.ger(1.0, &col, &col, 1.0);
    }
    // symmetrize away rounding
    let sym = (&e + e.transpose()) * 0.5;
    Ok(sym)
}

/// Eigen-pairs of a symmetric matrix in descending eigenvalue order, with
/// each eigenvector's first nonzero coordinate made positive.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn spectrum(matrix: &DMatrix<f64>) -> Result<Spectrum> {
    if !matrix.is_square() {
        return Err(Error::Dimension("matrix must be square".into()));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::try_new(matrix.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigen-solver did not converge".into()))?;
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, v)| (l, orient(v.iter().copied().collect())))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    Ok(Spectrum {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
    })
}

/// Flip `v` so that its first coordinate above the sign tolerance is positive.
pub fn orient(mut v: Vec<f64>) -> Vec<f64> {
    if let Some(&first) = v.iter().find(|x| x.abs() > SIGN_TOLERANCE) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

fn lexicographic_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > SIGN_TOLERANCE {
            return y.partial_cmp(x).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

/// Take the leading `k` eigenvectors.
///
/// Eigenvalues closer than `EIGEN_TIE_TOLERANCE * n` to the one after the
/// cut make the subspace ill-determined; such ties are broken by ordering the
/// tied eigenvectors lexicographically (largest first) and reported through
/// the returned flag.
fn leading(spec: &Spectrum, k: usize, n: f64) -> (Vec<Vec<f64>>, bool) {
    let tol = EIGEN_TIE_TOLERANCE * n.max(1.0);
    let vals = &spec.values;
    let mut vecs = spec.vectors.clone();
    // group consecutive near-equal eigenvalues and sort each group
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && (vals[end - 1] - vals[end]).abs() < tol {
            end += 1;
        }
        if end - start > 1 {
            vecs[start..end].sort_by(|a, b| lexicographic_desc(a, b));
        }
        start = end;
    }
    let degenerate = k < vals.len() && (vals[k - 1] - vals[k]).abs() < tol;
    (vecs.into_iter().take(k).collect(), degenerate)
}

/// Geometry of a great circle `a cos φ + d sin φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreatCircle {
    pub a: Vec<f64>,
    pub d: Vec<f64>,
}

impl GreatCircle {
    pub fn m(&self) -> usize {
        (self.a.len() - 1) / 2
    }

    pub fn point(&self, phi: f64) -> Vec<f64> {
        let (s, c) = phi.sin_cos();
        self.a.iter().zip(&self.d).map(|(a, d)| a * c + d * s).collect()
    }

    /// `Σ (êᵀa)² + (êᵀd)²`.
    pub fn ssc(&self, vectors: &[TrigMomentVector]) -> f64 {
        vectors
            .iter()
            .map(|v| v.dot(&self.a).powi(2) + v.dot(&self.d).powi(2))
            .sum()
    }
}

/// Geometry of a small circle `cos α b + sin α (a cos φ + d sin φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallCircle {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub alpha: f64,
}

impl SmallCircle {
    pub fn m(&self) -> usize {
        (self.a.len() - 1) / 2
    }

    pub fn point(&self, phi: f64) -> Vec<f64> {
        let (sa, ca) = self.alpha.sin_cos();
        let (s, c) = phi.sin_cos();
        self.b
            .iter()
            .zip(self.a.iter().zip(&self.d))
            .map(|(b, (a, d))| ca * b + sa * (a * c + d * s))
            .collect()
    }

    /// The great circle through `a` and `d`.
    pub fn great(&self) -> GreatCircle {
        GreatCircle {
            a: self.a.clone(),
            d: self.d.clone(),
        }
    }

    /// `Σ (êᵀb)² + (êᵀa)² + (êᵀd)²`, independent of `α`.
    pub fn ssc(&self, vectors: &[TrigMomentVector]) -> f64 {
        vectors
            .iter()
            .map(|v| v.dot(&self.b).powi(2) + v.dot(&self.a).powi(2) + v.dot(&self.d).powi(2))
            .sum()
    }
}

/// Either kind of circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Circle {
    Great(GreatCircle),
    Small(SmallCircle),
}

impl Circle {
    pub fn m(&self) -> usize {
        match self {
            Circle::Great(c) => c.m(),
            Circle::Small(c) => c.m(),
        }
    }

    pub fn a(&self) -> &[f64] {
        match self {
            Circle::Great(c) => &c.a,
            Circle::Small(c) => &c.a,
        }
    }

    pub fn d(&self) -> &[f64] {
        match self {
            Circle::Great(c) => &c.d,
            Circle::Small(c) => &c.d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleKind {
    Great,
    Small,
}

/// A great circle fitted to data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreatCircleFit {
    pub circle: GreatCircle,
    pub ssc: f64,
    pub r2cos: f64,
    pub n: usize,
    /// Eigenvalues of `Ê` in descending order.
    pub eigenvalues: Vec<f64>,
    pub degenerate: bool,
}

/// A small circle fitted to data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallCircleFit {
    pub circle: SmallCircle,
    pub ssc: f64,
    pub r2cos: f64,
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub degenerate: bool,
    /// Set when the closed-form `α` disagreed with the direct search; holds
    /// the closed-form value that was discarded.
    pub alpha_closed_form_rejected: Option<f64>,
}

/// Either kind of fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CircleFit {
    Great(GreatCircleFit),
    Small(SmallCircleFit),
}

impl CircleFit {
    pub fn circle(&self) -> Circle {
        match self {
            CircleFit::Great(f) => Circle::Great(f.circle.clone()),
            CircleFit::Small(f) => Circle::Small(f.circle.clone()),
        }
    }

    pub fn ssc(&self) -> f64 {
        match self {
            CircleFit::Great(f) => f.ssc,
            CircleFit::Small(f) => f.ssc,
        }
    }

    pub fn r2cos(&self) -> f64 {
        match self {
            CircleFit::Great(f) => f.r2cos,
            CircleFit::Small(f) => f.r2cos,
        }
    }

    pub fn degenerate(&self) -> bool {
        match self {
            CircleFit::Great(f) => f.degenerate,
            CircleFit::Small(f) => f.degenerate,
        }
    }
}

pub fn fit_circle(vectors: &[TrigMomentVector], kind: CircleKind) -> Result<CircleFit> {
    Ok(match kind {
        CircleKind::Great => CircleFit::Great(fit_great_circle(vectors)?),
        CircleKind::Small => CircleFit::Small(fit_small_circle(vectors)?),
    })
}

fn check_fit_input(vectors: &[TrigMomentVector], min_n: usize) -> Result<()> {
    if vectors.len() < min_n {
        return Err(Error::InsufficientData(format!(
            "need at least {min_n} observations, got {}",
            vectors.len()
        )));
    }
    if vectors[0].m == 0 {
        return Err(Error::InvalidInput("circle fits need M >= 1".into()));
    }
    Ok(())
}

pub fn fit_great_circle(vectors: &[TrigMomentVector]) -> Result<GreatCircleFit> {
    check_fit_input(vectors, 2)?;
    let n = vectors.len() as f64;
    let spec = spectrum(&moment_matrix(vectors)?)?;
    let (basis, degenerate) = leading(&spec, 2, n);
    if degenerate {
        warn!("great-circle plane is ill-determined (eigenvalue tie)");
    }
    let circle = GreatCircle {
        a: basis[0].clone(),
        d: basis[1].clone(),
    };
    let ssc = circle.ssc(vectors);
    Ok(GreatCircleFit {
        circle,
        ssc,
        r2cos: (ssc / n).clamp(0.0, 1.0),
        n: vectors.len(),
        eigenvalues: spec.values,
        degenerate,
    })
}

pub fn fit_small_circle(vectors: &[TrigMomentVector]) -> Result<SmallCircleFit> {
    check_fit_input(vectors, 3)?;
    let n = vectors.len() as f64;
    let spec = spectrum(&moment_matrix(vectors)?)?;
    let (basis, degenerate) = leading(&spec, 3, n);
    if degenerate {
        warn!("small-circle subspace is ill-determined (eigenvalue tie)");
    }
    let (b, a, d) = (basis[0].clone(), basis[1].clone(), basis[2].clone());
    let closed = alpha_closed_form(vectors, &b, &a, &d);
    let searched = alpha_by_search(vectors, &b, &a, &d);
    let (alpha, rejected) = if angular_gap(closed, searched) > ALPHA_AGREEMENT_TOLERANCE {
        warn!("closed-form alpha {closed} disagrees with direct search {searched}; using search");
        (searched, Some(closed))
    } else {
        (closed, None)
    };
    let circle = SmallCircle { b, a, d, alpha };
    let ssc = circle.ssc(vectors);
    Ok(SmallCircleFit {
        circle,
        ssc,
        r2cos: (ssc / n).clamp(0.0, 1.0),
        n: vectors.len(),
        eigenvalues: spec.values,
        degenerate,
        alpha_closed_form_rejected: rejected,
    })
}

fn angular_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Projections `(êᵀb, √((êᵀa)² + (êᵀd)²))` for every vector.
fn radial_parts<'a>(
    vectors: &'a [TrigMomentVector],
    b: &'a [f64],
    a: &'a [f64],
    d: &'a [f64],
) -> impl Iterator<Item = (f64, f64)> + 'a {
    vectors.iter().map(move |v| (v.dot(b), v.dot(a).hypot(v.dot(d))))
}

/// Sum of squared cosines to the nearest points of the small circle with
/// opening angle `alpha`: `Σ (cos α êᵀb + sin α ‖(êᵀa, êᵀd)‖)²`.
pub fn small_circle_ssc_at(vectors: &[TrigMomentVector], b: &[f64], a: &[f64], d: &[f64], alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    radial_parts(vectors, b, a, d)
        .map(|(pb, r)| (c * pb + s * r).powi(2))
        .sum()
}

/// Stationary point of the α-dependent SSC,
/// `α = ½ atan2(2 Σ (êᵀb) r, Σ {(êᵀb)² − r²})` with `r = ‖(êᵀa, êᵀd)‖`.
///
/// The SSC is `A + B cos 2α + C sin 2α`, so the quadrant-aware arctangent
/// selects its maximum.
pub fn alpha_closed_form(vectors: &[TrigMomentVector], b: &[f64], a: &[f64], d: &[f64]) -> f64 {
    let (num, den) = radial_parts(vectors, b, a, d).fold((0.0, 0.0), |(num, den), (pb, r)| {
        (num + 2.0 * pb * r, den + pb * pb - r * r)
    });
    0.5 * num.atan2(den)
}

/// Maximize the α-dependent SSC by grid search over `(−π/2, π/2]` followed
/// by golden-section refinement.
pub fn alpha_by_search(vectors: &[TrigMomentVector], b: &[f64], a: &[f64], d: &[f64]) -> f64 {
    let parts: Vec<(f64, f64)> = radial_parts(vectors, b, a, d).collect();
    let objective = |alpha: f64| {
        let (s, c) = alpha.sin_cos();
        parts.iter().map(|(pb, r)| (c * pb + s * r).powi(2)).sum::<f64>()
    };
    let grid = 720;
    let step = PI / grid as f64;
    let best = (0..=grid)
        .map(|i| -PI / 2.0 + i as f64 * step)
        .max_by(|x, y| objective(*x).partial_cmp(&objective(*y)).unwrap_or(Ordering::Equal))
        .unwrap_or(0.0);
    let (mut lo, mut hi) = (best - step, best + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        }
    }
    let alpha = 0.5 * (lo + hi);
    // SSC is π-periodic in α; report in (−π/2, π/2]
    if alpha <= -PI / 2.0 {
        alpha + PI
    } else if alpha > PI / 2.0 {
        alpha - PI
    } else {
        alpha
    }
}

/// Sign of `êᵀa`, which selects the small-circle forecast branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negative,
    Zero,
}

impl Branch {
    pub fn of(value: f64) -> Branch {
        if value > 0.0 {
            Branch::Positive
        } else if value < 0.0 {
            Branch::Negative
        } else {
            Branch::Zero
        }
    }
}

/// The transformed linear variable for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// `(êᵀd)/(êᵀa)`; `±inf` when `êᵀa` is exactly zero.
    pub y: f64,
    pub branch: Branch,
}

/// `y = (êᵀd)/(êᵀa)` relative to the `(a, d)` plane of either circle kind.
pub fn to_linear(vector: &TrigMomentVector, circle: &Circle) -> Result<Projection> {
    let (a, d) = (circle.a(), circle.d());
    if vector.coords.len() != a.len() {
        return Err(Error::Dimension(format!(
            "vector of length {} against circle of dimension {}",
            vector.coords.len(),
            a.len()
        )));
    }
    let pa = vector.dot(a);
    let pd = vector.dot(d);
    let branch = Branch::of(pa);
    let y = if branch == Branch::Zero {
        if pd >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        pd / pa
    };
    Ok(Projection { y, branch })
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
