//! Entropic optimal transport between point clouds (Sinkhorn iterations).
//!
//! Iterations run in the log domain so small `epsilon` values do not
//! underflow. The final plan is projected onto the exact transport polytope
//! before its cost is reported, which makes the reported cost an upper bound
//! on the exact OT cost.

use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;
use crate::ot::transport::{sq_euclidean_cost, TransportPlan};

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornResult {
    /// `⟨P, D⟩` of the rounded (feasible) plan.
    pub cost: f64,
    pub iterations: usize,
    /// Whether the L1 row-marginal violation dropped below `tol`.
    pub converged: bool,
    /// L1 row-marginal violation of the unrounded plan at exit.
    pub marginal_error: f64,
    pub plan: TransportPlan,
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Entropy-regularized transport cost between the rows of `a` and `b` under
/// squared Euclidean ground cost. Non-convergence within `max_iters` is
/// reported through [`SinkhornResult::converged`], not as an error.
pub fn sinkhorn_cost(
    a: &AttributeMatrix,
    b: &AttributeMatrix,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SinkhornResult> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let cost = sq_euclidean_cost(a, b)?;
    sinkhorn_with_cost(&cost, a.rows(), b.rows(), epsilon, max_iters, tol)
}

pub fn sinkhorn_with_cost(
    cost: &[f64],
    nx: usize,
    ny: usize,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SinkhornResult> {
    if cost.len() != nx * ny || nx == 0 || ny == 0 {
        return Err(Error::Shape(format!(
            "cost matrix has {} entries for a {nx}x{ny} plan",
            cost.len()
        )));
    }
    let log_a = -(nx as f64).ln();
    let log_b = -(ny as f64).ln();
    let mut f = vec![0.0; nx];
    let mut g = vec![0.0; ny];
    let mut iterations = 0;
    let mut marginal_error = f64::INFINITY;

    while iterations < max_iters {
        iterations += 1;
        for (i, fi) in f.iter_mut().enumerate() {
            let row = &cost[i * ny..(i + 1) * ny];
            let lse = log_sum_exp(g.iter().zip(row).map(|(gj, c)| (gj - c) / epsilon));
            *fi = epsilon * (log_a - lse);
        }
        for (j, gj) in g.iter_mut().enumerate() {
            let lse = log_sum_exp(
                f.iter()
                    .enumerate()
                    .map(|(i, fi)| (fi - cost[i * ny + j]) / epsilon),
            );
            *gj = epsilon * (log_b - lse);
        }
        // Columns are exact after the g-update; rows carry the residual.
        let target = 1.0 / nx as f64;
        marginal_error = (0..nx)
            .map(|i| {
                let s: f64 = (0..ny)
                    .map(|j| ((f[i] + g[j] - cost[i * ny + j]) / epsilon).exp())
                    .sum();
                (s - target).abs()
            })
            .sum();
        if marginal_error <= tol {
            break;
        }
    }

    let mut plan: Vec<f64> = (0..nx * ny)
        .map(|k| ((f[k / ny] + g[k % ny] - cost[k]) / epsilon).exp())
        .collect();
    round_to_polytope(&mut plan, nx, ny);
    let total = plan.iter().zip(cost).map(|(p, c)| p * c).sum();
    Ok(SinkhornResult {
        cost: total,
        iterations,
        converged: marginal_error <= tol,
        marginal_error,
        plan: TransportPlan {
            rows: nx,
            cols: ny,
            plan,
            cost: total,
        },
    })
}

/// Projects a nonnegative plan onto `U(1/N_x, 1/N_y)`: scale down
/// overfull rows, then overfull columns, then spread the remaining deficit
/// as a rank-one correction.
fn round_to_polytope(plan: &mut [f64], nx: usize, ny: usize) {
    let a = 1.0 / nx as f64;
    let b = 1.0 / ny as f64;
    for row in plan.chunks_exact_mut(ny) {
        let s: f64 = row.iter().sum();
        if s > a {
            let k = a / s;
            row.iter_mut().for_each(|v| *v *= k);
        }
    }
    let mut col = vec![0.0; ny];
    for row in plan.chunks_exact(ny) {
        for (c, v) in col.iter_mut().zip(row) {
            *c += v;
        }
    }
    let col_scale: Vec<f64> = col
        .iter()
        .map(|&s| if s > b { b / s } else { 1.0 })
        .collect();
    for row in plan.chunks_exact_mut(ny) {
        for (v, k) in row.iter_mut().zip(&col_scale) {
            *v *= k;
        }
    }
    let err_r: Vec<f64> = plan
        .chunks_exact(ny)
        .map(|r| (a - r.iter().sum::<f64>()).max(0.0))
        .collect();
    let mut err_c = vec![b; ny];
    for row in plan.chunks_exact(ny) {
        for (e, v) in err_c.iter_mut().zip(row) {
            *e -= v;
        }
    }
    err_c.iter_mut().for_each(|e| *e = e.max(0.0));
    let norm: f64 = err_c.iter().sum();
    if norm > 0.0 {
        for (row, er) in plan.chunks_exact_mut(ny).zip(&err_r) {
            for (v, ec) in row.iter_mut().zip(&err_c) {
                *v += er * ec / norm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_points_any_epsilon() {
        let a = AttributeMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let b = AttributeMatrix::from_rows(&[[4.0, -2.0]]).unwrap();
        for eps in [1e-3, 0.1, 10.0] {
            let r = sinkhorn_cost(&a, &b, eps, 100, 1e-12).unwrap();
            assert!((r.cost - 25.0).abs() < 1e-12);
        }
        let r = sinkhorn_cost(
            &AttributeMatrix::from_column(&[0.0]).unwrap(),
            &AttributeMatrix::from_column(&[2.0]).unwrap(),
            0.5,
            10,
            1e-9,
        )
        .unwrap();
        assert!((r.cost - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rounding_restores_marginals() {
        let mut plan = vec![0.4, 0.3, 0.1, 0.05];
        round_to_polytope(&mut plan, 2, 2);
        for s in [
            plan[0] + plan[1],
            plan[2] + plan[3],
            plan[0] + plan[2],
            plan[1] + plan[3],
        ] {
            assert!((s - 0.5).abs() < 1e-15);
        }
        assert!(plan.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let a = AttributeMatrix::from_column(&[0.0, 1.0, 5.0]).unwrap();
        let b = AttributeMatrix::from_column(&[0.5, 3.0]).unwrap();
        let r = sinkhorn_cost(&a, &b, 1e-3, 1, 1e-15).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.plan.marginal_violation() < 1e-12);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let a = AttributeMatrix::from_column(&[0.0]).unwrap();
        assert!(sinkhorn_cost(&a, &a, 0.0, 10, 1e-9).is_err());
        assert!(sinkhorn_cost(&a, &a, f64::NAN, 10, 1e-9).is_err());
    }
}
