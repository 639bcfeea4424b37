//! Synthetic labelled embeddings with planted label-dependent dimensions.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{AttributeMatrix, LabelVector};

/// Per-dimension scale of the label-independent dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleLaw {
    /// Every dimension has the same standard deviation.
    Uniform { scale: f64 },
    /// Standard deviations drawn log-uniformly from `[lo, hi]`.
    LogUniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub d: usize,
    /// Number of samples generated.
    pub n: usize,
    pub planted_dims: Vec<usize>,
    /// Separation between the two label means on each planted dimension.
    pub delta: f64,
    pub scale_law: ScaleLaw,
    /// When set to `m`, a random rotation mixes the first planted dimension
    /// with `m − 1` other dimensions.
    pub rotation: Option<usize>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::InvalidArgument(
                "synthetic data needs d >= 1 and n >= 1".into(),
            ));
        }
        if let Some(&bad) = self.planted_dims.iter().find(|&&c| c >= self.d) {
            return Err(Error::OutOfRange {
                index: bad,
                len: self.d,
            });
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "delta must be >= 0, got {}",
                self.delta
            )));
        }
        match self.scale_law {
            ScaleLaw::Uniform { scale } if !(scale > 0.0) => {
                return Err(Error::InvalidArgument(format!(
                    "scale must be positive, got {scale}"
                )))
            }
            ScaleLaw::LogUniform { lo, hi } if !(lo > 0.0 && hi >= lo) => {
                return Err(Error::InvalidArgument(format!(
                    "log-uniform range [{lo}, {hi}] is invalid"
                )))
            }
            _ => {}
        }
        if let Some(m) = self.rotation {
            if self.planted_dims.is_empty() || m < 1 || m > self.d {
                return Err(Error::InvalidArgument(format!(
                    "rotation over {m} dims needs a planted dimension and m <= d = {}",
                    self.d
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub matrix: AttributeMatrix,
    pub labels: LabelVector,
    /// Unit vector carrying each planted label signal in the output space.
    pub planted_directions: Vec<Vec<f64>>,
    /// Standard deviation of each dimension before rotation, label
    /// dependence aside.
    pub scales: Vec<f64>,
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
fn random_orthogonal(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Labels are Bernoulli(1/2). Planted dimensions are Normal(±delta/2, 1)
/// with the sign given by the label; the rest are Normal(0, s_c²) with `s_c`
/// from the scale law.
pub fn synth_generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut planted = vec![false; cfg.d];
    for &c in &cfg.planted_dims {
        planted[c] = true;
    }
    let scales: Vec<f64> = (0..cfg.d)
        .map(|c| {
            if planted[c] {
                return 1.0;
            }
            match cfg.scale_law {
                ScaleLaw::Uniform { scale } => scale,
                ScaleLaw::LogUniform { lo, hi } => (rng.random_range(lo.ln()..=hi.ln())).exp(),
            }
        })
        .collect();
    let labels: Vec<u8> = (0..cfg.n).map(|_| rng.random_bool(0.5) as u8).collect();
    let half = cfg.delta / 2.0;
    let mut values = Vec::with_capacity(cfg.n * cfg.d);
    for &l in &labels {
        let shift = if l == 1 { half } else { -half };
        for c in 0..cfg.d {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(if planted[c] { shift + z } else { scales[c] * z });
        }
    }

    let mut planted_directions: Vec<Vec<f64>> = cfg
        .planted_dims
        .iter()
        .map(|&c| {
            let mut v = vec![0.0; cfg.d];
            v[c] = 1.0;
            v
        })
        .collect();

    if let Some(m) = cfg.rotation {
        let head = cfg.planted_dims[0];
        let others: Vec<usize> = (0..cfg.d).filter(|&c| c != head).collect();
        let mut block = vec![head];
        block.extend(
            sample(&mut rng, others.len(), m - 1)
                .into_iter()
                .map(|i| others[i]),
        );
        let q = random_orthogonal(m, &mut rng);
        let mut old = vec![0.0; m];
        for row in values.chunks_exact_mut(cfg.d) {
            for (o, &c) in old.iter_mut().zip(&block) {
                *o = row[c];
            }
            for (a, &c) in block.iter().enumerate() {
                row[c] = (0..m).map(|b| q[(a, b)] * old[b]).sum();
            }
        }
        let dir = &mut planted_directions[0];
        dir.iter_mut().for_each(|v| *v = 0.0);
        for (a, &c) in block.iter().enumerate() {
            dir[c] = q[(a, 0)];
        }
    }

    Ok(SynthData {
        matrix: AttributeMatrix::new(cfg.n, cfg.d, values)?,
        labels: LabelVector::new(labels, "planted")?,
        planted_directions,
        scales,
    })
}
