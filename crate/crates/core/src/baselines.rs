//! Covering baselines: pick real samples that the development set fails to
//! represent, without looking at attribute dimensions.
//!
//! * LOF fits local densities on the development set and ranks real samples
//!   by how much sparser their neighbourhood is.
//! * k-center greedy repeatedly takes the real sample farthest from the
//!   development set and the picks made so far.
//! * FID greedy adds the real sample that most reduces the Fréchet distance
//!   between the real set and the development set plus the picks.
//!
//! All three are deterministic; ties go to the lower sample index.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diff::{SelectionMode, SelectionResult, Source};
use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;
use crate::ot::gaussian::{gaussian_summary, FrechetReference};

pub const DEFAULT_LOF_NEIGHBORS: usize = 20;

/// Added to mean reachability distances before inversion so duplicated
/// points give a large finite density instead of infinity.
pub const LRD_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LofParams {
    pub k_neighbors: usize,
}

impl Default for LofParams {
    fn default() -> Self {
        Self {
            k_neighbors: DEFAULT_LOF_NEIGHBORS,
        }
    }
}

fn check_cols(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<()> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            left: a.cols(),
            right: b.cols(),
        });
    }
    Ok(())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// k-distance and neighbourhood of a query given its distances to every
/// reference point (`skip` excludes the query itself when it is one).
fn neighbourhood(dists: &[f64], k: usize, skip: Option<usize>) -> (f64, Vec<usize>) {
    let mut sorted: Vec<f64> = dists
        .iter()
        .enumerate()
        .filter(|&(j, _)| Some(j) != skip)
        .map(|(_, &d)| d)
        .collect();
    sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
    let kdist = sorted[k - 1];
    let members = dists
        .iter()
        .enumerate()
        .filter(|&(j, &d)| Some(j) != skip && d <= kdist)
        .map(|(j, _)| j)
        .collect();
    (kdist, members)
}

fn local_reach_density(dists: &[f64], members: &[usize], ref_kdist: &[f64]) -> f64 {
    let total: f64 = members.iter().map(|&o| ref_kdist[o].max(dists[o])).sum();
    1.0 / (total / members.len() as f64 + LRD_GUARD)
}

/// LOF score of every real sample with respect to the development set.
pub fn lof_scores(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    params: &LofParams,
) -> Result<Vec<f64>> {
    check_cols(real, dev)?;
    let k = params.k_neighbors;
    if k == 0 || k >= dev.rows() {
        return Err(Error::InvalidArgument(format!(
            "LOF needs 1 <= k_neighbors < {} development samples, got {k}",
            dev.rows()
        )));
    }
    let dev_rows: Vec<&[f64]> = dev.iter_rows().collect();
    let dists_to_dev =
        |q: &[f64]| -> Vec<f64> { dev_rows.iter().map(|r| euclidean(q, r)).collect() };

    let dev_hoods: Vec<(Vec<f64>, f64, Vec<usize>)> = (0..dev.rows())
        .into_par_iter()
        .map(|p| {
            let d = dists_to_dev(dev_rows[p]);
            let (kd, members) = neighbourhood(&d, k, Some(p));
            (d, kd, members)
        })
        .collect();
    let kdist: Vec<f64> = dev_hoods.iter().map(|h| h.1).collect();
    let dev_lrd: Vec<f64> = dev_hoods
        .par_iter()
        .map(|(d, _, members)| local_reach_density(d, members, &kdist))
        .collect();
    drop(dev_hoods);

    let real_rows: Vec<&[f64]> = real.iter_rows().collect();
    Ok(real_rows
        .par_iter()
        .map(|q| {
            let d = dists_to_dev(q);
            let (_, members) = neighbourhood(&d, k, None);
            let lrd = local_reach_density(&d, &members, &kdist);
            members.iter().map(|&o| dev_lrd[o]).sum::<f64>() / members.len() as f64 / lrd
        })
        .collect())
}

/// Indices of the `k` largest scores, descending, ties to the lower index.
fn top_by_score(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order.truncate(k);
    order
}

fn check_k_out(real: &AttributeMatrix, k_out: usize) -> Result<()> {
    if k_out > real.rows() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {k_out} samples from {}",
            real.rows()
        )));
    }
    Ok(())
}

/// The `k_out` real samples with the highest LOF against the development set.
pub fn lof_select(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    params: &LofParams,
    k_out: usize,
) -> Result<SelectionResult> {
    check_k_out(real, k_out)?;
    let scores = lof_scores(real, dev, params)?;
    let picks = top_by_score(&scores, k_out);
    let values = picks.iter().map(|&i| scores[i]).collect();
    Ok(SelectionResult::new(
        real,
        Source::Real,
        SelectionMode::Lof,
        k_out,
        picks,
        values,
    ))
}

/// Greedy k-center with the development set as the initial centers. Each
/// value is the pick's distance to the nearest center at pick time.
pub fn kcenter_select(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    k_out: usize,
) -> Result<SelectionResult> {
    check_cols(real, dev)?;
    check_k_out(real, k_out)?;
    let dev_rows: Vec<&[f64]> = dev.iter_rows().collect();
    let mut min_dist: Vec<f64> = (0..real.rows())
        .into_par_iter()
        .map(|i| {
            let q = real.row(i);
            dev_rows
                .iter()
                .map(|r| euclidean(q, r))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut taken = vec![false; real.rows()];
    let mut picks = Vec::with_capacity(k_out);
    let mut values = Vec::with_capacity(k_out);
    for _ in 0..k_out {
        let mut best: Option<usize> = None;
        for i in 0..real.rows() {
            if !taken[i] && best.is_none_or(|b| min_dist[i] > min_dist[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("k_out <= rows leaves a candidate");
        taken[b] = true;
        picks.push(b);
        values.push(min_dist[b]);
        let center = real.row(b);
        min_dist.par_iter_mut().enumerate().for_each(|(i, md)| {
            *md = md.min(euclidean(real.row(i), center));
        });
    }
    Ok(SelectionResult::new(
        real,
        Source::Real,
        SelectionMode::Kcenter,
        k_out,
        picks,
        values,
    ))
}

/// Running mean and scatter matrix `Σ(x−μ)(x−μ)ᵀ` of a growing set.
#[derive(Debug, Clone)]
struct RunningMoments {
    n: f64,
    mean: DVector<f64>,
    scatter: DMatrix<f64>,
}

impl RunningMoments {
    fn from_matrix(m: &AttributeMatrix) -> Self {
        let d = m.cols();
        let mut s = Self {
            n: 0.0,
            mean: DVector::zeros(d),
            scatter: DMatrix::zeros(d, d),
        };
        for row in m.iter_rows() {
            s.push(row);
        }
        s
    }

    /// Moments after adding `x`, without mutating.
    fn with(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let delta = DVector::from_column_slice(x) - &self.mean;
        let n1 = self.n + 1.0;
        let mean = &self.mean + &delta / n1;
        let scatter = &self.scatter + (&delta * delta.transpose()) * (self.n / n1);
        (mean, scatter / n1)
    }

    fn push(&mut self, x: &[f64]) {
        let delta = DVector::from_column_slice(x) - &self.mean;
        let n1 = self.n + 1.0;
        self.mean += &delta / n1;
        self.scatter += (&delta * delta.transpose()) * (self.n / n1);
        self.n = n1;
    }
}

/// Greedily adds the real sample minimizing the Fréchet distance between the
/// real set and the development set plus the picks so far. Each value is the
/// distance after adding the pick.
pub fn fid_greedy_select(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    k_out: usize,
) -> Result<SelectionResult> {
    check_cols(real, dev)?;
    check_k_out(real, k_out)?;
    if dev.rows() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "FID greedy needs at least 2 development samples, got {}",
            dev.rows()
        )));
    }
    let reference = FrechetReference::new(&gaussian_summary(real)?);
    let mut union = RunningMoments::from_matrix(dev);
    let mut taken = vec![false; real.rows()];
    let mut picks = Vec::with_capacity(k_out);
    let mut values = Vec::with_capacity(k_out);
    for _ in 0..k_out {
        let scores: Vec<f64> = (0..real.rows())
            .into_par_iter()
            .map(|i| {
                if taken[i] {
                    f64::INFINITY
                } else {
                    let (mean, cov) = union.with(real.row(i));
                    reference.distance_parts(&mean, &cov)
                }
            })
            .collect();
        let mut best: Option<usize> = None;
        for (i, s) in scores.iter().enumerate() {
            if !taken[i] && best.is_none_or(|b| *s < scores[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("k_out <= rows leaves a candidate");
        taken[b] = true;
        picks.push(b);
        values.push(scores[b]);
        union.push(real.row(b));
    }
    Ok(SelectionResult::new(
        real,
        Source::Real,
        SelectionMode::FidGreedy,
        k_out,
        picks,
        values,
    ))
}

/// Uniform random selection without replacement; the null baseline.
pub fn random_select(real: &AttributeMatrix, k_out: usize, seed: u64) -> Result<SelectionResult> {
    check_k_out(real, k_out)?;
    let mut idx: Vec<usize> = (0..real.rows()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.partial_shuffle(&mut rng, k_out);
    idx.truncate(k_out);
    let values = vec![0.0; k_out];
    Ok(SelectionResult::new(
        real,
        Source::Real,
        SelectionMode::Random,
        k_out,
        idx,
        values,
    ))
}

/// Seeded subsample of `n` rows (all rows when `n >= rows`). Returns the
/// subsample and the original index of each of its rows.
pub fn subsample(
    m: &AttributeMatrix,
    n: usize,
    seed: u64,
) -> Result<(AttributeMatrix, Vec<usize>)> {
    if n >= m.rows() {
        return Ok((m.clone(), (0..m.rows()).collect()));
    }
    let mut idx: Vec<usize> = (0..m.rows()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.partial_shuffle(&mut rng, n);
    idx.truncate(n);
    idx.sort_unstable();
    Ok((m.select_rows(&idx)?, idx))
}
