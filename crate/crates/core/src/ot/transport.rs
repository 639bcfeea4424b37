//! Exact discrete optimal transport for small instances.
//!
//! The uniform-mass transport LP is solved as an integer min-cost flow:
//! after scaling by `N_x·N_y / gcd`, every source holds `N_y/g` units and
//! every sink demands `N_x/g`, so successive shortest paths (Dijkstra with
//! Johnson potentials on the dense bipartite residual graph) reach an exact
//! vertex of the transport polytope. Intended as a test oracle, not for
//! large inputs.

use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

/// Largest `N_x·N_y` accepted by the oracle.
pub const MAX_ORACLE_CELLS: usize = 1_000_000;

/// Transport plan with row sums `1/N_x` and column sums `1/N_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols` masses.
    pub plan: Vec<f64>,
    /// `Σ P_ij D_ij`.
    pub cost: f64,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.plan
            .chunks_exact(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in self.plan.chunks_exact(self.cols) {
            for (o, v) in out.iter_mut().zip(r) {
                *o += v;
            }
        }
        out
    }

    /// Largest absolute deviation of any row or column sum from its target.
    pub fn marginal_violation(&self) -> f64 {
        let mx = 1.0 / self.rows as f64;
        let my = 1.0 / self.cols as f64;
        let r = self.row_sums().into_iter().map(|s| (s - mx).abs());
        let c = self.col_sums().into_iter().map(|s| (s - my).abs());
        r.chain(c).fold(0.0, f64::max)
    }
}

/// Row-major squared Euclidean cost matrix between the rows of `a` and `b`.
pub fn sq_euclidean_cost(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<Vec<f64>> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            left: a.cols(),
            right: b.cols(),
        });
    }
    let mut cost = Vec::with_capacity(a.rows() * b.rows());
    for x in a.iter_rows() {
        for y in b.iter_rows() {
            cost.push(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum());
        }
    }
    Ok(cost)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact OT between uniform measures for an arbitrary row-major cost matrix.
pub fn exact_transport(cost: &[f64], nx: usize, ny: usize) -> Result<TransportPlan> {
    if nx == 0 || ny == 0 {
        return Err(Error::Empty("transport marginals"));
    }
    let cells = nx
        .checked_mul(ny)
        .filter(|&c| c <= MAX_ORACLE_CELLS)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "{nx}x{ny} plan exceeds the oracle limit of {MAX_ORACLE_CELLS} cells"
            ))
        })?;
    if cost.len() != cells {
        return Err(Error::Shape(format!(
            "cost matrix has {} entries, expected {cells}",
            cost.len()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("cost matrix must be finite".into()));
    }

    let g = gcd(nx, ny);
    let unit_supply = (ny / g) as u64;
    let unit_demand = (nx / g) as u64;
    let mut supply = vec![unit_supply; nx];
    let mut demand = vec![unit_demand; ny];
    let mut flow = vec![0u64; cells];

    // Nodes: 0 = source, 1..=nx rows, nx+1..=nx+ny columns, nx+ny+1 sink.
    let n_nodes = nx + ny + 2;
    let src = 0;
    let sink = n_nodes - 1;
    let row = |i: usize| 1 + i;
    let col = |j: usize| 1 + nx + j;
    let mut potential = vec![0.0f64; n_nodes];
    let mut dist = vec![f64::INFINITY; n_nodes];
    let mut prev = vec![usize::MAX; n_nodes];
    let mut done = vec![false; n_nodes];

    let mut remaining: u64 = unit_supply * nx as u64;
    while remaining > 0 {
        dist.fill(f64::INFINITY);
        prev.fill(usize::MAX);
        done.fill(false);
        dist[src] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (v, (&dv, &fin)) in dist.iter().zip(&done).enumerate() {
                if !fin && dv < best {
                    best = dv;
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            let relax = |v: usize, edge_cost: f64, dist: &mut [f64], prev: &mut [usize]| {
                let reduced = (edge_cost + potential[u] - potential[v]).max(0.0);
                let nd = best + reduced;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                }
            };
            if u == src {
                for i in 0..nx {
                    if supply[i] > 0 {
                        relax(row(i), 0.0, &mut dist, &mut prev);
                    }
                }
            } else if u == sink {
                for j in 0..ny {
                    if demand[j] < unit_demand {
                        relax(col(j), 0.0, &mut dist, &mut prev);
                    }
                }
            } else if u <= nx {
                let i = u - 1;
                for j in 0..ny {
                    relax(col(j), cost[i * ny + j], &mut dist, &mut prev);
                }
                if supply[i] < unit_supply {
                    relax(src, 0.0, &mut dist, &mut prev);
                }
            } else {
                let j = u - 1 - nx;
                for i in 0..nx {
                    if flow[i * ny + j] > 0 {
                        relax(row(i), -cost[i * ny + j], &mut dist, &mut prev);
                    }
                }
                if demand[j] > 0 {
                    relax(sink, 0.0, &mut dist, &mut prev);
                }
            }
        }
        let dt = dist[sink];
        debug_assert!(
            dt.is_finite(),
            "feasible transport always has an augmenting path"
        );
        for (p, &d) in potential.iter_mut().zip(&dist) {
            *p += d.min(dt);
        }

        // Bottleneck along the path.
        let mut push = remaining;
        let mut v = sink;
        while v != src {
            let u = prev[v];
            let cap = if u == src {
                supply[v - 1]
            } else if v == sink {
                demand[u - 1 - nx]
            } else if v == src {
                unit_supply - supply[u - 1]
            } else if u == sink {
                unit_demand - demand[v - 1 - nx]
            } else if u <= nx {
                u64::MAX
            } else {
                flow[(v - 1) * ny + (u - 1 - nx)]
            };
            push = push.min(cap);
            v = u;
        }
        let mut v = sink;
        while v != src {
            let u = prev[v];
            if u == src {
                supply[v - 1] -= push;
            } else if v == sink {
                demand[u - 1 - nx] -= push;
            } else if v == src {
                supply[u - 1] += push;
            } else if u == sink {
                demand[v - 1 - nx] += push;
            } else if u <= nx {
                flow[(u - 1) * ny + (v - 1 - nx)] += push;
            } else {
                flow[(v - 1) * ny + (u - 1 - nx)] -= push;
            }
            v = u;
        }
        remaining -= push;
    }

    let scale = (unit_supply * nx as u64) as f64;
    let plan: Vec<f64> = flow.iter().map(|&f| f as f64 / scale).collect();
    let cost = plan.iter().zip(cost).map(|(p, c)| p * c).sum();
    Ok(TransportPlan {
        rows: nx,
        cols: ny,
        plan,
        cost,
    })
}

/// Exact OT between the rows of `xs` and `ys` under squared Euclidean cost.
pub fn lp_transport_oracle(xs: &AttributeMatrix, ys: &AttributeMatrix) -> Result<TransportPlan> {
    let cells = xs.rows().saturating_mul(ys.rows());
    if cells > MAX_ORACLE_CELLS {
        return Err(Error::TooLarge(format!(
            "{}x{} plan exceeds the oracle limit of {MAX_ORACLE_CELLS} cells",
            xs.rows(),
            ys.rows()
        )));
    }
    exact_transport(&sq_euclidean_cost(xs, ys)?, xs.rows(), ys.rows())
}

/// Scalar convenience wrapper around [`lp_transport_oracle`].
pub fn lp_transport_oracle_1d(xs: &[f64], ys: &[f64]) -> Result<TransportPlan> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("transport marginals"));
    }
    lp_transport_oracle(
        &AttributeMatrix::from_column(xs)?,
        &AttributeMatrix::from_column(ys)?,
    )
}
