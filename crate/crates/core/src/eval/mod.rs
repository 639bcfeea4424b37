//! Quantitative evaluation against known binary labels: biased splits,
//! selection scores, synthetic planted-attribute data and multi-trial
//! benchmark tables.

pub mod benchmark;
pub mod split;
pub mod synth;

pub use benchmark::{
    planted_pair, run_benchmark, standard_benchmark, top1_alignment, BenchmarkConfig,
    BenchmarkEntry, BenchmarkSource, BenchmarkTable, Method,
};
pub use split::{
    aggregate_score, make_split, p_grid, score_selection, ScoreGrid, Split, SplitSpec,
};
pub use synth::{synth_generate, ScaleLaw, SynthConfig, SynthData};

/// Derives an independent child seed from `base` and a path of indices
/// (SplitMix64 finalizer applied per step).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter()
        .fold(mix(base), |acc, &p| mix(acc ^ mix(p.wrapping_add(1))))
}
