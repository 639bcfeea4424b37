//! Multi-trial selection benchmark over the biased-split protocol.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use super::split::{
    aggregate_score, make_split, p_grid, score_selection, ScoreGrid, SplitSpec,
    DEFAULT_N_PER_DATASET,
};
use super::synth::{synth_generate, ScaleLaw, SynthConfig, SynthData};
use crate::baselines::{fid_greedy_select, kcenter_select, lof_select, random_select, LofParams};
use crate::diff::{compare, endpoint_direction, select_endpoint, CompareOptions, Comparison};
use crate::error::{Error, Result};
use crate::matrix::{AttributeMatrix, LabelVector};
use crate::ot::Order;

pub const DEFAULT_SELECTION_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Stylediff,
    StylediffNoNorm,
    Lof,
    Kcenter,
    FidGreedy,
    Random,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Stylediff,
        Method::StylediffNoNorm,
        Method::Lof,
        Method::Kcenter,
        Method::FidGreedy,
        Method::Random,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Stylediff => "stylediff",
            Method::StylediffNoNorm => "stylediff_no_norm",
            Method::Lof => "lof",
            Method::Kcenter => "kcenter",
            Method::FidGreedy => "fid_greedy",
            Method::Random => "random",
        }
    }

    /// Position in [`Method::ALL`]; seeds depend on it rather than on the
    /// configured method list, so adding a method leaves the others' scores
    /// unchanged.
    fn stable_index(self) -> u64 {
        Method::ALL.iter().position(|&m| m == self).unwrap() as u64
    }

    /// Baselines run in the baseline space when one is supplied.
    fn is_baseline(self) -> bool {
        matches!(self, Method::Lof | Method::Kcenter | Method::FidGreedy)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| {
                let ids: Vec<&str> = Method::ALL.iter().map(|m| m.id()).collect();
                Error::InvalidArgument(format!(
                    "unknown method '{s}' (expected one of {})",
                    ids.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub methods: Vec<Method>,
    pub trials: usize,
    pub base_seed: u64,
    pub n_per_dataset: usize,
    pub selection_size: usize,
    pub lof_neighbors: usize,
    /// PCA threshold for the stylediff methods.
    pub pca_threshold: Option<f64>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            trials: 10,
            base_seed: 0,
            n_per_dataset: DEFAULT_N_PER_DATASET,
            selection_size: DEFAULT_SELECTION_SIZE,
            lof_neighbors: LofParams::default().k_neighbors,
            pca_threshold: None,
        }
    }
}

/// Labelled pool a benchmark draws its splits from.
#[derive(Debug, Clone)]
pub enum BenchmarkSource {
    /// A fresh pool of `synth.n` samples per trial; `synth.seed` is replaced
    /// by the trial seed.
    Synthetic { name: String, synth: SynthConfig },
    /// A fixed pool. `baseline_space`, when present, holds a second embedding
    /// of the same samples used by lof, kcenter and fid_greedy.
    External {
        name: String,
        attrs: AttributeMatrix,
        labels: LabelVector,
        baseline_space: Option<AttributeMatrix>,
    },
}

impl BenchmarkSource {
    pub fn name(&self) -> &str {
        match self {
            BenchmarkSource::Synthetic { name, .. } | BenchmarkSource::External { name, .. } => {
                name
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BenchmarkSource::Synthetic { synth, .. } => synth.validate(),
            BenchmarkSource::External {
                attrs,
                labels,
                baseline_space,
                ..
            } => {
                labels.check_matches(attrs)?;
                if let Some(b) = baseline_space {
                    labels.check_matches(b)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub config: String,
    pub method: Method,
    pub trial_scores: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across trials; 0 for a single trial.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedConfig {
    pub config: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub trials: usize,
    pub base_seed: u64,
    pub trial_seeds: Vec<u64>,
    pub entries: Vec<BenchmarkEntry>,
    pub skipped: Vec<SkippedConfig>,
}

impl BenchmarkTable {
    pub fn entry(&self, config: &str, method: Method) -> Option<&BenchmarkEntry> {
        self.entries
            .iter()
            .find(|e| e.config == config && e.method == method)
    }

    pub fn mean(&self, config: &str, method: Method) -> Option<f64> {
        self.entry(config, method).map(|e| e.mean)
    }

    /// One row per (config, method): mean, std and every trial score.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,method,mean,std");
        for t in 0..self.trials {
            let _ = write!(out, ",trial_{t}");
        }
        out.push('\n');
        for e in &self.entries {
            let _ = write!(out, "{},{},{},{}", e.config, e.method, e.mean, e.std);
            for s in &e.trial_scores {
                let _ = write!(out, ",{s}");
            }
            out.push('\n');
        }
        out
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Indices of the selected real samples for one split.
fn select_with(
    method: Method,
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    real_b: &AttributeMatrix,
    dev_b: &AttributeMatrix,
    cfg: &BenchmarkConfig,
    seed: u64,
) -> Result<Vec<usize>> {
    let k = cfg.selection_size;
    let sel = match method {
        Method::Stylediff | Method::StylediffNoNorm => {
            let opts = CompareOptions {
                normalize: method == Method::Stylediff,
                pca_threshold: cfg.pca_threshold,
                top_k: 1,
                order: Order::W2,
            };
            let cmp = compare(real, dev, &opts)?;
            let top = &cmp.selected()[0];
            select_endpoint(&*cmp.project(real)?, top.dim, endpoint_direction(top), k)?
        }
        Method::Lof => lof_select(
            real_b,
            dev_b,
            &LofParams {
                k_neighbors: cfg.lof_neighbors,
            },
            k,
        )?,
        Method::Kcenter => kcenter_select(real_b, dev_b, k)?,
        Method::FidGreedy => fid_greedy_select(real_b, dev_b, k)?,
        Method::Random => random_select(real, k, seed)?,
    };
    Ok(sel.indices)
}

/// Aggregate score of every method for one trial pool.
fn run_trial(
    attrs: &AttributeMatrix,
    labels: &LabelVector,
    baseline_space: Option<&AttributeMatrix>,
    cfg: &BenchmarkConfig,
    trial_seed: u64,
) -> Result<Vec<f64>> {
    let mut grids = vec![ScoreGrid::new(); cfg.methods.len()];
    for l in 0..2u8 {
        for (pi, p) in p_grid().into_iter().enumerate() {
            let cell_seed = derive_seed(trial_seed, &[l as u64, pi as u64]);
            let spec = SplitSpec {
                p,
                n_per_dataset: cfg.n_per_dataset,
                target_label: l,
                seed: cell_seed,
            };
            let split = make_split(labels, &spec)?;
            let real = attrs.select_rows(&split.real)?;
            let dev = attrs.select_rows(&split.dev)?;
            let base = match baseline_space {
                Some(b) if cfg.methods.iter().any(|m| m.is_baseline()) => {
                    Some((b.select_rows(&split.real)?, b.select_rows(&split.dev)?))
                }
                _ => None,
            };
            let (real_b, dev_b) = base.as_ref().map_or((&real, &dev), |(r, d)| (r, d));
            for (mi, &method) in cfg.methods.iter().enumerate() {
                let picks = select_with(
                    method,
                    &real,
                    &dev,
                    real_b,
                    dev_b,
                    cfg,
                    derive_seed(cell_seed, &[method.stable_index()]),
                )?;
                let picked: Vec<u8> = picks
                    .iter()
                    .map(|&i| labels.labels[split.real[i]])
                    .collect();
                grids[mi].set(l, pi, score_selection(&picked, l)?);
            }
        }
    }
    grids.iter().map(aggregate_score).collect()
}

fn source_trial(
    source: &BenchmarkSource,
    cfg: &BenchmarkConfig,
    trial_seed: u64,
) -> Result<Vec<f64>> {
    match source {
        BenchmarkSource::Synthetic { synth, .. } => {
            let data = synth_generate(&SynthConfig {
                seed: derive_seed(trial_seed, &[u64::MAX]),
                ..synth.clone()
            })?;
            run_trial(&data.matrix, &data.labels, None, cfg, trial_seed)
        }
        BenchmarkSource::External {
            attrs,
            labels,
            baseline_space,
            ..
        } => run_trial(attrs, labels, baseline_space.as_ref(), cfg, trial_seed),
    }
}

/// Runs every method over `trials` seeded trials of each source. Sources
/// whose pool cannot fill a split are listed in `skipped`, not failed.
/// Trials run in parallel; the table does not depend on the thread count.
pub fn run_benchmark(sources: &[BenchmarkSource], cfg: &BenchmarkConfig) -> Result<BenchmarkTable> {
    if cfg.methods.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidArgument(
            "benchmark needs at least one method and one trial".into(),
        ));
    }
    if cfg.selection_size == 0 || cfg.selection_size > cfg.n_per_dataset {
        return Err(Error::InvalidArgument(format!(
            "selection size {} must lie in [1, {}]",
            cfg.selection_size, cfg.n_per_dataset
        )));
    }
    let trial_seeds: Vec<u64> = (0..cfg.trials as u64)
        .map(|t| derive_seed(cfg.base_seed, &[t]))
        .collect();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for source in sources {
        source.validate()?;
        let outcome: Result<Vec<Vec<f64>>> = trial_seeds
            .par_iter()
            .map(|&s| source_trial(source, cfg, s))
            .collect();
        let per_trial = match outcome {
            Ok(v) => v,
            Err(Error::InsufficientSamples(reason)) => {
                skipped.push(SkippedConfig {
                    config: source.name().to_string(),
                    reason,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let trial_scores: Vec<f64> = per_trial.iter().map(|t| t[mi]).collect();
            let (mean, std) = mean_std(&trial_scores);
            entries.push(BenchmarkEntry {
                config: source.name().to_string(),
                method,
                trial_scores,
                mean,
                std,
            });
        }
    }
    Ok(BenchmarkTable {
        trials: cfg.trials,
        base_seed: cfg.base_seed,
        trial_seeds,
        entries,
        skipped,
    })
}

/// Seed of the standard synthetic benchmark.
pub const STANDARD_SEED: u64 = 1729;

/// The standard desk-scale benchmark: one heterogeneous-scale synthetic
/// attribute (d = 16, scales log-uniform in [1, 100], one planted dimension
/// with delta = 2), pools of 1500, all six methods, 10 trials.
pub fn standard_benchmark() -> (Vec<BenchmarkSource>, BenchmarkConfig) {
    let source = BenchmarkSource::Synthetic {
        name: "synthetic_hetero".into(),
        synth: SynthConfig {
            d: 16,
            n: 1500,
            planted_dims: vec![5],
            delta: 2.0,
            scale_law: ScaleLaw::LogUniform { lo: 1.0, hi: 100.0 },
            rotation: None,
            seed: 0,
        },
    };
    (
        vec![source],
        BenchmarkConfig {
            base_seed: STANDARD_SEED,
            ..BenchmarkConfig::default()
        },
    )
}

/// One real/dev pair cut from a fresh synthetic pool.
pub fn planted_pair(
    synth: &SynthConfig,
    spec: &SplitSpec,
) -> Result<(AttributeMatrix, AttributeMatrix, SynthData)> {
    let data = synth_generate(synth)?;
    let split = make_split(&data.labels, spec)?;
    let real = data.matrix.select_rows(&split.real)?;
    let dev = data.matrix.select_rows(&split.dev)?;
    Ok((real, dev, data))
}

/// `|cos|` between the input-space direction of the top-ranked dimension and
/// `target`.
pub fn top1_alignment(cmp: &Comparison, target: &[f64]) -> Result<f64> {
    let dir = cmp.direction(cmp.ranked[0].dim)?;
    if dir.len() != target.len() {
        return Err(Error::DimensionMismatch {
            left: dir.len(),
            right: target.len(),
        });
    }
    let dot: f64 = dir.iter().zip(target).map(|(a, b)| a * b).sum();
    let na = dir.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb = target.iter().map(|b| b * b).sum::<f64>().sqrt();
    Ok((dot / (na * nb)).abs())
}
