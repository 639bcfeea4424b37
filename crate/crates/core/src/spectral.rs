//! PCA over the pooled attribute vectors of both datasets.
//!
//! Correlated attribute dimensions are merged into principal components so a
//! single attribute spread across several dimensions shows up as one
//! direction. Components are ordered by decreasing variance and signed so
//! their largest-magnitude entry is positive.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

pub const DEFAULT_PCA_THRESHOLD: f64 = 0.99999;
pub const ADPC_MAGIC: &[u8; 4] = b"ADPC";
const ADPC_VERSION: u32 = 1;

// Slack when comparing cumulative ratios with the threshold, so that a
// threshold of 1 is reachable despite round-off.
const CUMULATIVE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// Row-major k×d, rows orthonormal.
    components: Vec<f64>,
    explained_ratios: Vec<f64>,
    threshold: f64,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.explained_ratios.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn component(&self, j: usize) -> &[f64] {
        let d = self.input_dim();
        &self.components[j * d..(j + 1) * d]
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn explained_ratios(&self) -> &[f64] {
        &self.explained_ratios
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Maps component coordinates back to attribute space.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (j, &z) in coords.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.component(j)) {
                *o += z * c;
            }
        }
        out
    }
}

fn validate_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "PCA threshold must lie in (0, 1], got {threshold}"
        )));
    }
    Ok(())
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits PCA on the union of `a` and `b`, keeping the fewest components whose
/// cumulative explained variance reaches `threshold`.
pub fn fit_pca(a: &AttributeMatrix, b: &AttributeMatrix, threshold: f64) -> Result<PcaModel> {
    validate_threshold(threshold)?;
    let pooled = a.vstack(b)?;
    fit_pca_pooled(&pooled, threshold)
}

pub fn fit_pca_pooled(pooled: &AttributeMatrix, threshold: f64) -> Result<PcaModel> {
    validate_threshold(threshold)?;
    let n = pooled.rows();
    let d = pooled.cols();
    if n < 2 {
        return Err(Error::InsufficientSamples(format!(
            "PCA needs at least 2 pooled samples, got {n}"
        )));
    }
    let mut mean = vec![0.0; d];
    for row in pooled.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let x = DMatrix::from_fn(n, d, |i, j| pooled.get(i, j) - mean[j]);
    let total: f64 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "pooled data has zero variance; no principal directions exist".into(),
        ));
    }

    // (eigenvalue, unit direction in attribute space)
    let mut pairs: Vec<(f64, Vec<f64>)> = if d <= n {
        let cov = x.tr_mul(&x) / n as f64;
        let eig = SymmetricEigen::new(cov);
        (0..d)
            .map(|i| {
                (
                    eig.eigenvalues[i],
                    eig.eigenvectors.column(i).iter().copied().collect(),
                )
            })
            .collect()
    } else {
        let gram = &x * x.transpose() / n as f64;
        let eig = SymmetricEigen::new(gram);
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
        (0..n)
            .filter(|&i| eig.eigenvalues[i] > top * 1e-12)
            .map(|i| {
                let v = x.tr_mul(&eig.eigenvectors.column(i).into_owned());
                let norm = v.norm();
                (eig.eigenvalues[i], v.iter().map(|c| c / norm).collect())
            })
            .collect()
    };
    pairs.sort_by(|p, q| q.0.total_cmp(&p.0));

    let mut components = Vec::new();
    let mut ratios = Vec::new();
    let mut cumulative = 0.0;
    for (lambda, mut v) in pairs {
        if lambda <= 0.0 {
            break;
        }
        canonical_sign(&mut v);
        let r = lambda / total;
        components.extend(v);
        ratios.push(r);
        cumulative += r;
        if cumulative >= threshold - CUMULATIVE_SLACK {
            break;
        }
    }
    Ok(PcaModel {
        mean,
        components,
        explained_ratios: ratios,
        threshold,
    })
}

/// Projects centered rows onto the components: `(m − mean)·Cᵀ`, N×k.
pub fn transform(model: &PcaModel, m: &AttributeMatrix) -> Result<AttributeMatrix> {
    let d = model.input_dim();
    if m.cols() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: m.cols(),
        });
    }
    let k = model.n_components();
    let mut out = Vec::with_capacity(m.rows() * k);
    let mut centered = vec![0.0; d];
    for row in m.iter_rows() {
        for ((c, v), mu) in centered.iter_mut().zip(row).zip(&model.mean) {
            *c = v - mu;
        }
        for j in 0..k {
            out.push(
                model
                    .component(j)
                    .iter()
                    .zip(&centered)
                    .map(|(a, b)| a * b)
                    .sum(),
            );
        }
    }
    let t = AttributeMatrix::new(m.rows(), k, out)?;
    match m.sample_ids() {
        Some(ids) => t.with_sample_ids(ids.to_vec()),
        None => Ok(t),
    }
}

/// Attribute-space unit direction of component `dim`.
pub fn inverse_direction(model: &PcaModel, dim: usize) -> Result<Vec<f64>> {
    if dim >= model.n_components() {
        return Err(Error::OutOfRange {
            index: dim,
            len: model.n_components(),
        });
    }
    Ok(model.component(dim).to_vec())
}

/// The direction of raw dimension `dim` when no PCA is applied.
pub fn one_hot(d: usize, dim: usize) -> Result<Vec<f64>> {
    if dim >= d {
        return Err(Error::OutOfRange { index: dim, len: d });
    }
    let mut v = vec![0.0; d];
    v[dim] = 1.0;
    Ok(v)
}

/// ADPC container: magic, version `u32`, flags `u8` (bit 0 = f64, always
/// set), d `u64`, k `u64`, threshold `f64`, then mean (d), components
/// (k·d, row-major) and explained ratios (k), all little-endian f64.
pub fn encode_pca(model: &PcaModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(ADPC_MAGIC);
    out.extend_from_slice(&ADPC_VERSION.to_le_bytes());
    out.push(1);
    out.extend_from_slice(&(model.input_dim() as u64).to_le_bytes());
    out.extend_from_slice(&(model.n_components() as u64).to_le_bytes());
    out.extend_from_slice(&model.threshold.to_le_bytes());
    for v in model
        .mean
        .iter()
        .chain(&model.components)
        .chain(&model.explained_ratios)
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_pca(bytes: &[u8]) -> Result<PcaModel> {
    const HEADER: usize = 4 + 4 + 1 + 8 + 8 + 8;
    if bytes.len() < HEADER || &bytes[..4] != ADPC_MAGIC {
        return Err(Error::Format("not an ADPC file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != ADPC_VERSION || bytes[8] != 1 {
        return Err(Error::Format(format!(
            "unsupported ADPC version {version} / flags {:#04x}",
            bytes[8]
        )));
    }
    let d = u64::from_le_bytes(bytes[9..17].try_into().unwrap()) as usize;
    let k = u64::from_le_bytes(bytes[17..25].try_into().unwrap()) as usize;
    let threshold = f64::from_le_bytes(bytes[25..33].try_into().unwrap());
    let count = d
        .checked_mul(k)
        .and_then(|dk| dk.checked_add(d + k))
        .ok_or_else(|| Error::Format("ADPC shape overflows".into()))?;
    if d == 0 || k == 0 || k > d || bytes.len() - HEADER != count * 8 {
        return Err(Error::Format(format!(
            "ADPC payload size does not match d={d}, k={k}"
        )));
    }
    validate_threshold(threshold).map_err(|e| Error::Format(e.to_string()))?;
    let vals: Vec<f64> = bytes[HEADER..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("ADPC contains non-finite values".into()));
    }
    Ok(PcaModel {
        mean: vals[..d].to_vec(),
        components: vals[d..d + k * d].to_vec(),
        explained_ratios: vals[d + k * d..].to_vec(),
        threshold,
    })
}

pub fn save_pca(model: &PcaModel, path: &Path) -> Result<()> {
    fs::write(path, encode_pca(model))?;
    Ok(())
}

pub fn load_pca(path: &Path) -> Result<PcaModel> {
    decode_pca(&fs::read(path)?)
}
