//! Experiment driver for ruler-based quantized Toeplitz covariance
//! estimation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod fit;
pub mod output;
pub mod plot;
pub mod sim;

pub use error::{CliError, Result};
