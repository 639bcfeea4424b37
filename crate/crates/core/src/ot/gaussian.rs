//! Gaussian summaries of embedding sets and the Fréchet distance between
//! them (the quantity behind FID).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

/// Mean and population covariance of a set of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianSummary {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::Empty("Gaussian summary"));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Shape(format!(
                "covariance is {}x{}, mean has length {d}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let s = Self { mean, cov };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Checks symmetry and (approximate) positive semi-definiteness.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let scale = self.cov.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in 0..i {
                if (self.cov[(i, j)] - self.cov[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let trace = self.cov.trace();
        let min_eig = SymmetricEigen::new(symmetrize(&self.cov))
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if min_eig < -1e-8 * trace.abs().max(f64::MIN_POSITIVE) / d as f64 {
            return Err(Error::InvalidArgument(format!(
                "covariance has negative eigenvalue {min_eig}"
            )));
        }
        Ok(())
    }

    /// Copy with `rel·trace/d` added to the diagonal.
    pub fn regularized(&self, rel: f64) -> Self {
        let d = self.dim();
        let eps = rel * self.cov.trace() / d as f64;
        Self {
            mean: self.mean.clone(),
            cov: &self.cov + DMatrix::identity(d, d) * eps,
        }
    }
}

/// Sample mean and population (1/N) covariance of the rows of `m`.
pub fn gaussian_summary(m: &AttributeMatrix) -> Result<GaussianSummary> {
    if m.rows() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "Gaussian summary needs at least 2 rows, got {}",
            m.rows()
        )));
    }
    let n = m.rows() as f64;
    let d = m.cols();
    let mut mean = DVector::zeros(d);
    for row in m.iter_rows() {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean /= n;
    let mut cov = DMatrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in m.iter_rows() {
        for (c, (v, mu)) in centered.iter_mut().zip(row.iter().zip(mean.iter())) {
            *c = v - mu;
        }
        for i in 0..d {
            let ci = centered[i];
            for j in 0..=i {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / n;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(GaussianSummary { mean, cov })
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues
/// from round-off are clamped to zero.
pub fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let floor = noise_floor(eig.eigenvalues.as_slice());
    let roots = eig.eigenvalues.map(|l| clamped_sqrt(l, floor));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

// Eigenvalues this close to zero relative to the largest are rounding noise
// of a singular matrix; their square roots would be far larger than the
// noise itself.
fn noise_floor(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    max * 1e-12
}

fn clamped_sqrt(l: f64, floor: f64) -> f64 {
    if l <= floor {
        0.0
    } else {
        l.sqrt()
    }
}

/// `Tr((A^{1/2} B A^{1/2})^{1/2})` given `A^{1/2}`.
fn trace_sqrt_product(sqrt_a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let inner = sqrt_a * b * sqrt_a;
    let eig = symmetrize(&inner).symmetric_eigenvalues();
    let floor = noise_floor(eig.as_slice());
    eig.iter().map(|&l| clamped_sqrt(l, floor)).sum()
}

/// A fixed first argument of the Fréchet distance with its square root
/// precomputed, for repeated evaluation against many second arguments.
#[derive(Debug, Clone)]
pub struct FrechetReference {
    mean: DVector<f64>,
    sqrt_cov: DMatrix<f64>,
    trace: f64,
}

impl FrechetReference {
    pub fn new(g: &GaussianSummary) -> Self {
        Self {
            mean: g.mean.clone(),
            sqrt_cov: sqrt_psd(&g.cov),
            trace: g.cov.trace(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Distance to a Gaussian given by its parts; dimensions must match.
    pub fn distance_parts(&self, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
        let mean_term = (&self.mean - mean).norm_squared();
        let cross = trace_sqrt_product(&self.sqrt_cov, cov);
        (mean_term + self.trace + cov.trace() - 2.0 * cross).max(0.0)
    }

    pub fn distance(&self, other: &GaussianSummary) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.distance_parts(&other.mean, &other.cov))
    }
}

/// Squared Fréchet (2-Wasserstein) distance between two Gaussians:
/// `‖μ1−μ2‖² + Tr(Σ1 + Σ2 − 2(Σ1^{1/2} Σ2 Σ1^{1/2})^{1/2})`.
pub fn frechet_gaussian(g1: &GaussianSummary, g2: &GaussianSummary) -> Result<f64> {
    FrechetReference::new(g1).distance(g2)
}

/// [`frechet_gaussian`] on covariances regularized by `rel·trace/d`.
pub fn frechet_gaussian_regularized(
    g1: &GaussianSummary,
    g2: &GaussianSummary,
    rel: f64,
) -> Result<f64> {
    frechet_gaussian(&g1.regularized(rel), &g2.regularized(rel))
}
