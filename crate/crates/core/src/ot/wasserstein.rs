//! Exact p-Wasserstein distances between 1-D empirical measures.
//!
//! For scalar samples the optimal plan is monotone, so the distance is the
//! L_p distance between the two quantile functions. Both quantile functions
//! are step functions with breakpoints at `i/N_x` and `j/N_y`; walking the
//! merged breakpoints gives the integral exactly in O(N_x + N_y) after
//! sorting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-cost exponent. `W2` squares distances and takes a square root of
/// the optimal cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Order {
    #[serde(rename = "1")]
    W1,
    #[default]
    #[serde(rename = "2")]
    W2,
}

impl Order {
    pub fn exponent(self) -> u32 {
        match self {
            Order::W1 => 1,
            Order::W2 => 2,
        }
    }

    pub fn from_exponent(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Order::W1),
            2 => Ok(Order::W2),
            _ => Err(Error::InvalidArgument(format!(
                "Wasserstein order must be 1 or 2, got {p}"
            ))),
        }
    }

    #[inline]
    fn ground(self, diff: f64) -> f64 {
        match self {
            Order::W1 => diff.abs(),
            Order::W2 => diff * diff,
        }
    }

    #[inline]
    fn root(self, cost: f64) -> f64 {
        match self {
            Order::W1 => cost,
            Order::W2 => cost.sqrt(),
        }
    }
}

pub(crate) fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn check_inputs(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("Wasserstein input"));
    }
    if let Some(i) = xs.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    if let Some(i) = ys.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 1 });
    }
    Ok(())
}

/// Optimal transport cost (the quantity under the outer root) between two
/// sorted samples, using the equal-size pairing when possible.
pub fn transport_cost_sorted(xs: &[f64], ys: &[f64], order: Order) -> f64 {
    if xs.len() == ys.len() {
        let n = xs.len() as f64;
        xs.iter()
            .zip(ys)
            .map(|(a, b)| order.ground(a - b))
            .sum::<f64>()
            / n
    } else {
        quantile_transport_cost(xs, ys, order)
    }
}

/// Quantile-integral route, valid for any sizes. Breakpoints are tracked on
/// the integer grid `N_x·N_y` so segment lengths are exact.
pub fn quantile_transport_cost(xs: &[f64], ys: &[f64], order: Order) -> f64 {
    let nx = xs.len() as u128;
    let ny = ys.len() as u128;
    let total = (nx * ny) as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos: u128 = 0;
    let mut acc = 0.0;
    while i < xs.len() && j < ys.len() {
        let next_x = (i as u128 + 1) * ny;
        let next_y = (j as u128 + 1) * nx;
        let next = next_x.min(next_y);
        acc += (next - pos) as f64 * order.ground(xs[i] - ys[j]);
        pos = next;
        if next_x == next {
            i += 1;
        }
        if next_y == next {
            j += 1;
        }
    }
    acc / total
}

/// Exact p-Wasserstein distance between the empirical measures of `xs` and
/// `ys`, each sample carrying uniform mass.
pub fn wasserstein_1d(xs: &[f64], ys: &[f64], order: Order) -> Result<f64> {
    check_inputs(xs, ys)?;
    Ok(order.root(transport_cost_sorted(&sorted(xs), &sorted(ys), order)))
}

/// Wasserstein distance measured in units of the pooled standard deviation.
/// A zero `sigma` means every pooled value is identical, so the distance is 0.
pub fn normalized_wasserstein_1d(xs: &[f64], ys: &[f64], sigma: f64, order: Order) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sigma must be finite and non-negative, got {sigma}"
        )));
    }
    let w = wasserstein_1d(xs, ys, order)?;
    Ok(normalize(w, sigma))
}

#[inline]
pub(crate) fn normalize(w: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        w / sigma
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert_eq!(
            wasserstein_1d(&[0.0, 2.0], &[1.0, 3.0], Order::W2).unwrap(),
            1.0
        );
        let w = wasserstein_1d(&[0.0], &[0.0, 2.0], Order::W2).unwrap();
        assert!((w - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            wasserstein_1d(&[3.0, 1.0, 2.0], &[2.0, 3.0, 1.0], Order::W2).unwrap(),
            0.0
        );
        // W1 between {0} and {0,2} is 0.5·0 + 0.5·2
        assert_eq!(wasserstein_1d(&[0.0], &[0.0, 2.0], Order::W1).unwrap(), 1.0);
    }

    #[test]
    fn unequal_sizes_three_vs_two() {
        // quantiles: x on [0,1/3),[1/3,2/3),[2/3,1) = 0,1,2 ; y on halves = 0,3
        // segments: [0,1/3) 0-0, [1/3,1/2) 1-0, [1/2,2/3) 1-3, [2/3,1) 2-3
        let expect = (1.0 / 6.0) * 1.0 + (1.0 / 6.0) * 4.0 + (1.0 / 3.0) * 1.0;
        let got = quantile_transport_cost(&[0.0, 1.0, 2.0], &[0.0, 3.0], Order::W2);
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn normalized_examples() {
        let pooled = [0.0, 1.0, 2.0, 3.0];
        let mean = 1.5;
        let sigma = (pooled.iter().map(|v: &f64| (v - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
        let w = normalized_wasserstein_1d(&[0.0, 2.0], &[1.0, 3.0], sigma, Order::W2).unwrap();
        assert!((w - 1.0 / 1.25f64.sqrt()).abs() < 1e-12);
        assert!((w - 0.89443).abs() < 1e-5);
        assert_eq!(
            normalized_wasserstein_1d(&[4.0, 4.0], &[4.0], 0.0, Order::W2).unwrap(),
            0.0
        );
        let scaled =
            normalized_wasserstein_1d(&[0.0, 20.0], &[10.0, 30.0], 10.0 * sigma, Order::W2)
                .unwrap();
        assert!((scaled - w).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(wasserstein_1d(&[], &[1.0], Order::W2).is_err());
        assert!(wasserstein_1d(&[1.0], &[f64::NAN], Order::W2).is_err());
        assert!(normalized_wasserstein_1d(&[1.0], &[1.0], -1.0, Order::W2).is_err());
        assert!(Order::from_exponent(3).is_err());
    }
}
