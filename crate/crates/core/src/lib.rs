#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
//! Covariance estimation for stationary Gaussian signals from quantized,
//! sparsely sampled observations.
//!
//! Samples are taken only at the indices of a sparse ruler, passed through a
//! dithered uniform quantizer, and then averaged along diagonals to estimate
//! a symmetric Toeplitz covariance.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod estimate;
pub mod linalg;
pub mod quantize;
pub mod rng;
pub mod ruler;
pub mod sampling;
pub mod toeplitz;

pub use bounds::{BoundsInput, BoundsReport};
pub use error::{Error, Result};
pub use estimate::{
    banded_estimate, quantized_estimate, relative_error, ruler_estimate, threshold_estimate,
    CorrectionKind, EstimateResult, NormKind,
};
pub use linalg::{fro_norm, max_norm, op_norm, DenseSym, SquareMatrix};
pub use quantize::{Dither, QuantizerConfig};
pub use ruler::{coverage_coefficient, full_ruler, ruler_alpha, Ruler};
pub use sampling::{
    gen_banded, gen_toeplitz_vandermonde, observe, sample_gaussian, SampleBatch, SampleMatrix,
};
pub use toeplitz::{avg, toep, SymToeplitz};
