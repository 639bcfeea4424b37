//! Attribute-wise comparison of two datasets.
//!
//! Every dimension gets an exact 1-D Wasserstein distance between the real
//! and development columns, plus the same distance divided by the pooled
//! standard deviation. Dimensions are ranked by one of the two scores; the
//! top of the ranking names the attributes whose distributions differ most.
//! Helpers here also pick representative samples along a dimension and bin
//! both datasets on shared histogram edges.

use std::borrow::Cow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pooled_column_stats, AttributeMatrix};
use crate::ot::wasserstein::{normalize, sorted, transport_cost_sorted, Order};
use crate::spectral::{fit_pca, inverse_direction, one_hot, transform, PcaModel};

pub const DEFAULT_TOP_K: usize = 3;
pub const DEFAULT_BINS: usize = 60;

// Columns extracted per pass over the rows in `compare`.
const COLUMN_CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub normalize: bool,
    pub pca_threshold: Option<f64>,
    pub top_k: usize,
    pub order: Order,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            normalize: true,
            pca_threshold: None,
            top_k: DEFAULT_TOP_K,
            order: Order::W2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Raw,
    Normalized,
}

/// Distances for one attribute dimension. `mean_x` belongs to the real
/// dataset and `mean_y` to the development dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionDiff {
    pub dim: usize,
    pub raw_w: f64,
    pub norm_w: f64,
    pub sigma: f64,
    pub mean_x: f64,
    pub mean_y: f64,
}

impl DimensionDiff {
    pub fn score(&self, kind: ScoreKind) -> f64 {
        match kind {
            ScoreKind::Raw => self.raw_w,
            ScoreKind::Normalized => self.norm_w,
        }
    }
}

/// Computes the [`DimensionDiff`] of one column pair.
pub fn dimension_diff(dim: usize, xs: &[f64], ys: &[f64], order: Order) -> DimensionDiff {
    let (mean_x, mean_y, _, sigma) = pooled_column_stats(xs, ys);
    let cost = transport_cost_sorted(&sorted(xs), &sorted(ys), order);
    let raw_w = match order {
        Order::W1 => cost,
        Order::W2 => cost.sqrt(),
    };
    DimensionDiff {
        dim,
        raw_w,
        norm_w: normalize(raw_w, sigma),
        sigma,
        mean_x,
        mean_y,
    }
}

/// Sorts by score descending; equal scores keep the lower dimension first.
pub fn rank_dimensions(diffs: &mut [DimensionDiff], kind: ScoreKind) {
    diffs.sort_by(|a, b| {
        b.score(kind)
            .total_cmp(&a.score(kind))
            .then(a.dim.cmp(&b.dim))
    });
}

/// Outcome of [`compare`]: every dimension ranked, plus the PCA model when
/// the comparison ran in component space.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub ranked: Vec<DimensionDiff>,
    pub top_k: usize,
    pub score_kind: ScoreKind,
    pub order: Order,
    pub pca: Option<PcaModel>,
}

impl Comparison {
    /// The selected dimensions `c*`, best first.
    pub fn selected(&self) -> &[DimensionDiff] {
        &self.ranked[..self.top_k]
    }

    pub fn pca_applied(&self) -> bool {
        self.pca.is_some()
    }

    /// Number of dimensions that were compared.
    pub fn dims(&self) -> usize {
        self.ranked.len()
    }

    /// Brings an input matrix into the space the dimensions index.
    pub fn project<'a>(&self, m: &'a AttributeMatrix) -> Result<Cow<'a, AttributeMatrix>> {
        match &self.pca {
            Some(model) => Ok(Cow::Owned(transform(model, m)?)),
            None => Ok(Cow::Borrowed(m)),
        }
    }

    /// Input-space direction of analysis dimension `dim`: a principal
    /// component under PCA, otherwise a one-hot vector.
    pub fn direction(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.pca {
            Some(model) => inverse_direction(model, dim),
            None => one_hot(self.ranked.len(), dim),
        }
    }

    /// Re-sorts the same distances by the other score.
    pub fn reranked(&self, kind: ScoreKind) -> Self {
        let mut out = self.clone();
        out.score_kind = kind;
        rank_dimensions(&mut out.ranked, kind);
        out
    }
}

/// Per-dimension distances between `real` and `dev` for every dimension,
/// ranked. Dimensions are processed in parallel; each result depends only on
/// its own columns, so the output does not depend on the thread count.
pub fn compare(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    opts: &CompareOptions,
) -> Result<Comparison> {
    if real.cols() != dev.cols() {
        return Err(Error::DimensionMismatch {
            left: real.cols(),
            right: dev.cols(),
        });
    }
    let pca = match opts.pca_threshold {
        Some(t) => Some(fit_pca(real, dev, t)?),
        None => None,
    };
    let (x, y) = match &pca {
        Some(model) => (
            Cow::Owned(transform(model, real)?),
            Cow::Owned(transform(model, dev)?),
        ),
        None => (Cow::Borrowed(real), Cow::Borrowed(dev)),
    };
    let d = x.cols();
    if opts.top_k == 0 || opts.top_k > d {
        return Err(Error::InvalidArgument(format!(
            "K must lie in 1..={d}, got {}",
            opts.top_k
        )));
    }
    let mut diffs = Vec::with_capacity(d);
    for start in (0..d).step_by(COLUMN_CHUNK) {
        let range = start..(start + COLUMN_CHUNK).min(d);
        let xs = x.columns(range.clone());
        let ys = y.columns(range.clone());
        let chunk: Vec<DimensionDiff> = xs
            .par_iter()
            .zip(ys.par_iter())
            .enumerate()
            .map(|(i, (cx, cy))| dimension_diff(start + i, cx, cy, opts.order))
            .collect();
        diffs.extend(chunk);
    }
    let score_kind = if opts.normalize {
        ScoreKind::Normalized
    } else {
        ScoreKind::Raw
    };
    rank_dimensions(&mut diffs, score_kind);
    Ok(Comparison {
        ranked: diffs,
        top_k: opts.top_k,
        score_kind,
        order: opts.order,
        pca,
    })
}

/// Which extreme of a dimension to draw samples from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    MinEnd,
    MaxEnd,
}

/// Picks the extreme on the real dataset's side of the development mean.
/// Equal means resolve to [`Endpoint::MaxEnd`].
pub fn endpoint_direction(diff: &DimensionDiff) -> Endpoint {
    if diff.mean_x < diff.mean_y {
        Endpoint::MinEnd
    } else {
        Endpoint::MaxEnd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Real,
    Dev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Endpoint,
    Window,
    Lof,
    Kcenter,
    FidGreedy,
    Random,
}

/// Ordered sample indices chosen from one dataset.
///
/// `values` holds the attribute value of each pick for endpoint and window
/// selections, and the method's score at pick time for the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub source: Source,
    pub mode: SelectionMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Endpoint>,
    pub requested: usize,
    /// Fewer than `requested` samples qualified.
    pub short: bool,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_ids: Option<Vec<String>>,
}

impl SelectionResult {
    pub(crate) fn new(
        m: &AttributeMatrix,
        source: Source,
        mode: SelectionMode,
        requested: usize,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let sample_ids = m
            .sample_ids()
            .map(|ids| indices.iter().map(|&i| ids[i].clone()).collect());
        Self {
            source,
            mode,
            dim: None,
            direction: None,
            requested,
            short: indices.len() < requested,
            indices,
            values,
            sample_ids,
        }
    }
}

/// The `k` most extreme samples of `m` along `dim`, most extreme first; ties
/// keep the lower index.
pub fn select_endpoint(
    m: &AttributeMatrix,
    dim: usize,
    direction: Endpoint,
    k: usize,
) -> Result<SelectionResult> {
    m.check_col(dim)?;
    if k > m.rows() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {k} samples from {}",
            m.rows()
        )));
    }
    let col = m.column(dim);
    let mut order: Vec<usize> = (0..m.rows()).collect();
    match direction {
        Endpoint::MaxEnd => order.sort_by(|&a, &b| col[b].total_cmp(&col[a])),
        Endpoint::MinEnd => order.sort_by(|&a, &b| col[a].total_cmp(&col[b])),
    }
    order.truncate(k);
    let values = order.iter().map(|&i| col[i]).collect();
    let mut out = SelectionResult::new(m, Source::Real, SelectionMode::Endpoint, k, order, values);
    out.dim = Some(dim);
    out.direction = Some(direction);
    Ok(out)
}

/// Uniformly samples up to `k` samples whose value on `dim` lies within
/// `[center − half_width, center + half_width]`. The result is flagged short
/// when fewer than `k` qualify (possibly none).
pub fn select_window(
    m: &AttributeMatrix,
    dim: usize,
    center: f64,
    half_width: f64,
    k: usize,
    seed: u64,
) -> Result<SelectionResult> {
    m.check_col(dim)?;
    if !(half_width > 0.0) || !half_width.is_finite() || !center.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "window needs a finite center and positive half width, got {center} ± {half_width}"
        )));
    }
    let col = m.column(dim);
    let (lo, hi) = (center - half_width, center + half_width);
    let mut inside: Vec<usize> = (0..m.rows())
        .filter(|&i| col[i] >= lo && col[i] <= hi)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let take = k.min(inside.len());
    inside.partial_shuffle(&mut rng, take);
    inside.truncate(take);
    let values = inside.iter().map(|&i| col[i]).collect();
    let mut out = SelectionResult::new(m, Source::Real, SelectionMode::Window, k, inside, values);
    out.dim = Some(dim);
    Ok(out)
}

/// Shared-edge histograms of one dimension in both datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPair {
    pub dim: usize,
    pub edges: Vec<f64>,
    pub counts_x: Vec<u64>,
    pub counts_y: Vec<u64>,
    /// Counts divided by `N·bin width`; empty when the range is degenerate.
    pub density_x: Vec<f64>,
    pub density_y: Vec<f64>,
}

fn bin_counts(values: &[f64], edges: &[f64]) -> Vec<u64> {
    let bins = edges.len() - 1;
    let interior = &edges[1..bins];
    let mut counts = vec![0u64; bins];
    for v in values {
        counts[interior.partition_point(|e| e <= v)] += 1;
    }
    counts
}

/// Equal-width histograms over the pooled range of `dim`. The right-most bin
/// is closed. A constant dimension yields a single bin holding everything.
pub fn histogram(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    dim: usize,
    bins: usize,
) -> Result<HistogramPair> {
    if real.cols() != dev.cols() {
        return Err(Error::DimensionMismatch {
            left: real.cols(),
            right: dev.cols(),
        });
    }
    real.check_col(dim)?;
    if bins == 0 {
        return Err(Error::InvalidArgument(
            "histogram needs at least one bin".into(),
        ));
    }
    let xs = real.column(dim);
    let ys = dev.column(dim);
    let (lo, hi) = xs
        .iter()
        .chain(&ys)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo == hi {
        return Ok(HistogramPair {
            dim,
            edges: vec![lo, hi],
            counts_x: vec![xs.len() as u64],
            counts_y: vec![ys.len() as u64],
            density_x: Vec::new(),
            density_y: Vec::new(),
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins)
        .map(|i| lo + (hi - lo) * (i as f64 / bins as f64))
        .collect();
    edges[bins] = hi;
    let counts_x = bin_counts(&xs, &edges);
    let counts_y = bin_counts(&ys, &edges);
    let density = |counts: &[u64], n: usize| -> Vec<f64> {
        counts
            .iter()
            .map(|&c| c as f64 / (n as f64 * width))
            .collect()
    };
    Ok(HistogramPair {
        dim,
        density_x: density(&counts_x, xs.len()),
        density_y: density(&counts_y, ys.len()),
        edges,
        counts_x,
        counts_y,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

/// Number of samples strictly above or below `threshold` on `dim`.
pub fn count_beyond(m: &AttributeMatrix, dim: usize, threshold: f64, side: Side) -> Result<usize> {
    m.check_col(dim)?;
    let col = m.column(dim);
    Ok(match side {
        Side::Above => col.iter().filter(|&&v| v > threshold).count(),
        Side::Below => col.iter().filter(|&&v| v < threshold).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::wasserstein_1d;

    fn col(v: &[f64]) -> AttributeMatrix {
        AttributeMatrix::from_column(v).unwrap()
    }

    #[test]
    fn identical_datasets_tie_by_index() {
        let m = AttributeMatrix::from_rows(&[[1.0, 5.0, -2.0], [3.0, 2.0, 0.0], [0.0, 1.0, 4.0]])
            .unwrap();
        let c = compare(&m, &m, &CompareOptions::default()).unwrap();
        assert!(c.ranked.iter().all(|d| d.raw_w == 0.0 && d.norm_w == 0.0));
        let dims: Vec<usize> = c.ranked.iter().map(|d| d.dim).collect();
        assert_eq!(dims, vec![0, 1, 2]);
    }

    #[test]
    fn raw_matches_direct_call() {
        let real = AttributeMatrix::from_rows(&[[1.0, 5.0], [3.0, 2.0], [0.0, 1.0]]).unwrap();
        let dev = AttributeMatrix::from_rows(&[[2.0, 0.0], [7.0, 3.5]]).unwrap();
        let c = compare(
            &real,
            &dev,
            &CompareOptions {
                top_k: 2,
                ..Default::default()
            },
        )
        .unwrap();
        for d in &c.ranked {
            let w = wasserstein_1d(&real.column(d.dim), &dev.column(d.dim), Order::W2).unwrap();
            assert_eq!(d.raw_w, w);
        }
    }

    #[test]
    fn compare_errors() {
        let a = AttributeMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let b = col(&[1.0]);
        assert!(matches!(
            compare(&a, &b, &CompareOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(compare(
            &a,
            &a,
            &CompareOptions {
                top_k: 3,
                ..Default::default()
            }
        )
        .is_err());
        assert!(compare(
            &a,
            &a,
            &CompareOptions {
                top_k: 0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn endpoint_rule() {
        let mk = |mx, my| DimensionDiff {
            dim: 0,
            raw_w: 0.0,
            norm_w: 0.0,
            sigma: 1.0,
            mean_x: mx,
            mean_y: my,
        };
        assert_eq!(endpoint_direction(&mk(1.0, 0.0)), Endpoint::MaxEnd);
        assert_eq!(endpoint_direction(&mk(-1.0, 0.0)), Endpoint::MinEnd);
        assert_eq!(endpoint_direction(&mk(0.0, 0.0)), Endpoint::MaxEnd);
    }

    #[test]
    fn endpoint_selection() {
        let s = select_endpoint(&col(&[3.0, 1.0, 2.0]), 0, Endpoint::MaxEnd, 2).unwrap();
        assert_eq!(s.indices, vec![0, 2]);
        assert_eq!(s.values, vec![3.0, 2.0]);
        let s = select_endpoint(&col(&[3.0, 1.0, 2.0]), 0, Endpoint::MinEnd, 2).unwrap();
        assert_eq!(s.indices, vec![1, 2]);
        let s = select_endpoint(&col(&[7.0; 4]), 0, Endpoint::MaxEnd, 2).unwrap();
        assert_eq!(s.indices, vec![0, 1]);
        assert!(select_endpoint(&col(&[1.0]), 0, Endpoint::MaxEnd, 2).is_err());
        assert!(select_endpoint(&col(&[1.0]), 1, Endpoint::MaxEnd, 1).is_err());
    }

    #[test]
    fn window_selection() {
        let m = col(&[-1500.2, -1499.8, 0.0]);
        let s = select_window(&m, 0, -1500.0, 1.0, 5, 7).unwrap();
        let mut idx = s.indices.clone();
        idx.sort();
        assert_eq!(idx, vec![0, 1]);
        assert!(s.short);
        let s2 = select_window(&m, 0, -1500.0, 1.0, 2, 7).unwrap();
        assert!(!s2.short);
        assert_eq!(s2.indices.len(), 2);
        assert_eq!(s2, select_window(&m, 0, -1500.0, 1.0, 2, 7).unwrap());
        let empty = select_window(&m, 0, 50.0, 1.0, 3, 7).unwrap();
        assert!(empty.indices.is_empty() && empty.short);
        assert!(select_window(&m, 0, 0.0, 0.0, 1, 0).is_err());
    }

    #[test]
    fn histogram_by_hand() {
        let h = histogram(&col(&[0.0, 1.0]), &col(&[2.0, 3.0]), 0, 2).unwrap();
        assert_eq!(h.edges, vec![0.0, 1.5, 3.0]);
        assert_eq!(h.counts_x, vec![2, 0]);
        assert_eq!(h.counts_y, vec![0, 2]);
        let h = histogram(&col(&[0.0, 2.0]), &col(&[1.0, 3.0]), 0, 2).unwrap();
        assert_eq!(h.counts_x, vec![1, 1]);
        assert_eq!(h.counts_y, vec![1, 1]);
        assert!((h.density_x.iter().sum::<f64>() * 1.5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_degenerate() {
        let h = histogram(&col(&[2.0, 2.0]), &col(&[2.0]), 0, 10).unwrap();
        assert_eq!(h.edges, vec![2.0, 2.0]);
        assert_eq!(h.counts_x, vec![2]);
        assert_eq!(h.counts_y, vec![1]);
        assert!(histogram(&col(&[2.0]), &col(&[2.0]), 0, 0).is_err());
    }

    #[test]
    fn counts_beyond_threshold() {
        let m = col(&[-3.0, 0.0, 2.0, 5.0]);
        assert_eq!(count_beyond(&m, 0, 0.0, Side::Above).unwrap(), 2);
        assert_eq!(count_beyond(&m, 0, 0.0, Side::Below).unwrap(), 1);
    }

    #[test]
    fn compare_symmetry_flips_endpoint() {
        let real = AttributeMatrix::from_rows(&[[1.0, 5.0], [3.0, 2.0], [0.5, 1.0]]).unwrap();
        let dev = AttributeMatrix::from_rows(&[[2.0, 0.0], [7.0, 3.5]]).unwrap();
        let opts = CompareOptions {
            top_k: 2,
            ..Default::default()
        };
        let ab = compare(&real, &dev, &opts).unwrap();
        let ba = compare(&dev, &real, &opts).unwrap();
        for d in &ab.ranked {
            let e = ba.ranked.iter().find(|e| e.dim == d.dim).unwrap();
            assert!((d.raw_w - e.raw_w).abs() < 1e-12);
            assert!((d.norm_w - e.norm_w).abs() < 1e-12);
            assert_ne!(endpoint_direction(d), endpoint_direction(e));
        }
    }
}
