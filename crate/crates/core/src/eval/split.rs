//! Biased dataset splits and the label-recall score.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::LabelVector;

/// Bias levels `p ∈ {0, 0.05, …, 0.5}`.
pub const P_GRID_LEN: usize = 11;

pub fn p_grid() -> [f64; P_GRID_LEN] {
    std::array::from_fn(|i| i as f64 / 20.0)
}

pub const DEFAULT_N_PER_DATASET: usize = 500;

/// Construction of one development/real pair from a labelled pool.
///
/// The development set holds a fraction `p` of `target_label` samples and the
/// real set the mirrored fraction `1 − p`, so the target label is
/// under-represented in development whenever `p < 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub p: f64,
    pub n_per_dataset: usize,
    pub target_label: u8,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub dev: Vec<usize>,
    pub real: Vec<usize>,
}

/// Target-label count of the development set, `round(p·n)`.
pub fn dev_target_count(p: f64, n: usize) -> usize {
    (p * n as f64).round() as usize
}

/// Target-label count of the real set, `round((1−p)·n)`.
pub fn real_target_count(p: f64, n: usize) -> usize {
    ((1.0 - p) * n as f64).round() as usize
}

/// Draws disjoint development and real index sets from the pool. Each set is
/// shuffled so sample position carries no label information.
pub fn make_split(labels: &LabelVector, spec: &SplitSpec) -> Result<Split> {
    if !(0.0..=0.5).contains(&spec.p) {
        return Err(Error::InvalidArgument(format!(
            "p must lie in [0, 0.5], got {}",
            spec.p
        )));
    }
    if spec.target_label > 1 {
        return Err(Error::InvalidArgument(format!(
            "target label must be 0 or 1, got {}",
            spec.target_label
        )));
    }
    let n = spec.n_per_dataset;
    if n == 0 {
        return Err(Error::InvalidArgument("datasets must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut target, mut other): (Vec<usize>, Vec<usize>) =
        (0..labels.len()).partition(|&i| labels.labels[i] == spec.target_label);
    let dev_t = dev_target_count(spec.p, n);
    let real_t = real_target_count(spec.p, n);
    let need_t = dev_t + real_t;
    let need_o = (n - dev_t) + (n - real_t);
    if target.len() < need_t || other.len() < need_o {
        return Err(Error::InsufficientSamples(format!(
            "split p={} needs {need_t} samples with label {} and {need_o} without; pool has {} and {}",
            spec.p,
            spec.target_label,
            target.len(),
            other.len()
        )));
    }
    target.shuffle(&mut rng);
    other.shuffle(&mut rng);
    let mut dev: Vec<usize> = target[..dev_t]
        .iter()
        .chain(&other[..n - dev_t])
        .copied()
        .collect();
    let mut real: Vec<usize> = target[dev_t..need_t]
        .iter()
        .chain(&other[n - dev_t..need_o])
        .copied()
        .collect();
    dev.shuffle(&mut rng);
    real.shuffle(&mut rng);
    Ok(Split { dev, real })
}

/// Fraction of `selected_labels` equal to `l`.
pub fn score_selection(selected_labels: &[u8], l: u8) -> Result<f64> {
    if selected_labels.is_empty() {
        return Err(Error::Empty("selection"));
    }
    let hits = selected_labels.iter().filter(|&&x| x == l).count();
    Ok(hits as f64 / selected_labels.len() as f64)
}

/// Scores `r_p^(l)` over both labels and the full p grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreGrid {
    cells: [[Option<f64>; P_GRID_LEN]; 2],
}

impl ScoreGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, label: u8, p_index: usize, r: f64) {
        self.cells[label as usize][p_index] = Some(r);
    }

    pub fn get(&self, label: u8, p_index: usize) -> Option<f64> {
        self.cells[label as usize][p_index]
    }

    /// Fills every cell from `f(label, p)`.
    pub fn from_fn(mut f: impl FnMut(u8, f64) -> f64) -> Self {
        let mut g = Self::new();
        for l in 0..2u8 {
            for (i, p) in p_grid().into_iter().enumerate() {
                g.set(l, i, f(l, p));
            }
        }
        g
    }
}

/// `(1/2) Σ_l (1/11) Σ_p r_p^(l)`; every cell must be present.
pub fn aggregate_score(grid: &ScoreGrid) -> Result<f64> {
    let mut total = 0.0;
    for l in 0..2u8 {
        let mut inner = 0.0;
        for i in 0..P_GRID_LEN {
            inner += grid.get(l, i).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "score grid is missing label {l}, p = {}",
                    p_grid()[i]
                ))
            })?;
        }
        total += inner / P_GRID_LEN as f64;
    }
    Ok(total / 2.0)
}
