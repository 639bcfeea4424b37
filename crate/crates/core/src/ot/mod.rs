//! Optimal-transport distances: exact 1-D Wasserstein, an exact small
//! instance LP solver, entropic Sinkhorn transport and the Fréchet distance
//! between Gaussian fits.

pub mod gaussian;
pub mod sinkhorn;
pub mod transport;
pub mod wasserstein;

pub use gaussian::{
    frechet_gaussian, frechet_gaussian_regularized, gaussian_summary, sqrt_psd, FrechetReference,
    GaussianSummary,
};
pub use sinkhorn::{sinkhorn_cost, sinkhorn_with_cost, SinkhornResult};
pub use transport::{
    exact_transport, lp_transport_oracle, lp_transport_oracle_1d, sq_euclidean_cost, TransportPlan,
    MAX_ORACLE_CELLS,
};
pub use wasserstein::{
    normalized_wasserstein_1d, quantile_transport_cost, transport_cost_sorted, wasserstein_1d,
    Order,
};
