//! From simulation output to constants, exponents and test statistics.

pub mod blocks;
pub mod d4;
pub mod experiments;
pub mod fit;
pub mod ks;
pub mod stats;

pub use blocks::{kappa, sample_blocks, BlockSample, BlockSampleSet, ConstantEstimates};
pub use fit::{dimension_fit, FitModel, SeriesFit};
pub use ks::{ks_two_sample, scaling_limit_test, KsResult};
pub use stats::Estimate;
