//! From-definition reference implementations shared by the oracle tests and
//! the acceptance suite. Deliberately naive: full sorts, no caching.
#![allow(dead_code)]

use attrdiff::ot::{frechet_gaussian, gaussian_summary};
use attrdiff::AttributeMatrix;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// LOF of each query against `reference` (Breunig et al.): k-distance,
/// tie-inclusive k-neighbourhood, reachability distance, local reachability
/// density with the same 1e-10 guard as the library.
pub fn brute_lof(queries: &[Vec<f64>], reference: &[Vec<f64>], k: usize) -> Vec<f64> {
    let k_distance_and_hood = |p: &[f64], own: Option<usize>| -> (f64, Vec<usize>) {
        let mut ds: Vec<(f64, usize)> = reference
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != own)
            .map(|(j, o)| (dist(p, o), j))
            .collect();
        ds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let kd = ds[k - 1].0;
        (
            kd,
            ds.iter()
                .filter(|(d, _)| *d <= kd)
                .map(|(_, j)| *j)
                .collect(),
        )
    };
    let kdist: Vec<f64> = (0..reference.len())
        .map(|j| k_distance_and_hood(&reference[j], Some(j)).0)
        .collect();
    let lrd = |p: &[f64], own: Option<usize>| -> f64 {
        let (_, hood) = k_distance_and_hood(p, own);
        let mut total = 0.0;
        for &o in &hood {
            let reach = if kdist[o] > dist(p, &reference[o]) {
                kdist[o]
            } else {
                dist(p, &reference[o])
            };
            total += reach;
        }
        1.0 / (total / hood.len() as f64 + 1e-10)
    };
    let ref_lrd: Vec<f64> = (0..reference.len())
        .map(|j| lrd(&reference[j], Some(j)))
        .collect();
    queries
        .iter()
        .map(|q| {
            let (_, hood) = k_distance_and_hood(q, None);
            let mean_neighbour_lrd =
                hood.iter().map(|&o| ref_lrd[o]).sum::<f64>() / hood.len() as f64;
            mean_neighbour_lrd / lrd(q, None)
        })
        .collect()
}

pub fn rows(m: &AttributeMatrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(|r| r.to_vec()).collect()
}

/// For each greedy step: every candidate's min distance to dev plus the picks
/// so far, recomputed from scratch.
pub fn kcenter_step_scores(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    picks: &[usize],
) -> Vec<Option<f64>> {
    let mut centers = rows(dev);
    centers.extend(picks.iter().map(|&i| real.row(i).to_vec()));
    (0..real.rows())
        .map(|i| {
            (!picks.contains(&i)).then(|| {
                centers
                    .iter()
                    .map(|c| dist(real.row(i), c))
                    .fold(f64::INFINITY, f64::min)
            })
        })
        .collect()
}

/// Fréchet distance between the real set and dev ∪ picks ∪ {candidate}, from
/// scratch for every candidate.
pub fn fid_step_scores(
    real: &AttributeMatrix,
    dev: &AttributeMatrix,
    picks: &[usize],
) -> Vec<Option<f64>> {
    let g_real = gaussian_summary(real).unwrap();
    (0..real.rows())
        .map(|i| {
            (!picks.contains(&i)).then(|| {
                let mut set: Vec<usize> = picks.to_vec();
                set.push(i);
                let union = dev.vstack(&real.select_rows(&set).unwrap()).unwrap();
                frechet_gaussian(&g_real, &gaussian_summary(&union).unwrap()).unwrap()
            })
        })
        .collect()
}

/// Index of the best score (`max` or min), ties to the lower index.
pub fn arg_best(scores: &[Option<f64>], max: bool) -> usize {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        let Some(s) = s else { continue };
        let better = match best {
            None => true,
            Some(b) => {
                let sb = scores[b].unwrap();
                if max {
                    *s > sb
                } else {
                    *s < sb
                }
            }
        };
        if better {
            best = Some(i);
        }
    }
    best.unwrap()
}

/// Checks a greedy selection step by step against exhaustive scoring.
/// A pick that differs from the exhaustive argbest is accepted only when the
/// two candidates tie within `tol`. Returns the worst score deviation.
pub fn check_greedy(
    picks: &[usize],
    values: &[f64],
    tol: f64,
    max: bool,
    mut step_scores: impl FnMut(&[usize]) -> Vec<Option<f64>>,
) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for step in 0..picks.len() {
        let scores = step_scores(&picks[..step]);
        let best = arg_best(&scores, max);
        let got = picks[step];
        let got_score =
            scores[got].ok_or_else(|| format!("step {step}: pick {got} was already taken"))?;
        let best_score = scores[best].unwrap();
        if got != best && (got_score - best_score).abs() > tol * (1.0 + best_score.abs()) {
            return Err(format!(
                "step {step}: picked {got} ({got_score}) but best is {best} ({best_score})"
            ));
        }
        let dev = (values[step] - got_score).abs() / (1.0 + got_score.abs());
        if dev > tol {
            return Err(format!(
                "step {step}: reported {} vs recomputed {got_score}",
                values[step]
            ));
        }
        worst = worst.max(dev);
    }
    Ok(worst)
}
