//! One simulated estimation trial, fully determined by its settings and a seed.
//!
//! Experiments and `estimate --simulate` both go through [`run_trial`], so
//! any row of an experiment CSV can be replayed on its own from its seed and
//! the covariance seed.

use toepquant_core::bounds::{big_k, threshold_zeta};
use toepquant_core::rng::{seeded, substream_seed};
use toepquant_core::sampling::{banded_factor, GaussianSampler, SampleBatch, VandermondeModel};
use toepquant_core::{
    banded_estimate, full_ruler, gen_banded, op_norm, quantized_estimate, ruler_alpha,
    threshold_estimate, CorrectionKind, Dither, EstimateResult, QuantizerConfig, Ruler,
    SymToeplitz,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// Random frequencies; rank `min(d, 2·freqs)`.
    Vandermonde { freqs: usize },
    /// Bartlett kernel of bandwidth `m` with random peak.
    Banded { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PostProcess {
    None,
    Threshold(f64),
    /// Threshold at `ζ = C K √((ln|R| + 4p ln d)/n)` with `K` from the true `‖T‖₂`.
    CalibratedThreshold {
        c: f64,
        p: f64,
    },
    Band(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub d: usize,
    pub generator: Generator,
    /// Ruler `R_α`; `1.0` is the full ruler.
    pub alpha: f64,
    pub delta: f64,
    pub dither: Dither,
    pub correction: CorrectionKind,
    pub n: usize,
    pub post: PostProcess,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub truth: SymToeplitz,
    pub estimate: EstimateResult,
    pub rel_error: f64,
    /// Threshold actually applied, if any.
    pub zeta: Option<f64>,
}

pub fn ruler_for(d: usize, alpha: f64) -> Result<Ruler> {
    if alpha == 1.0 {
        Ok(full_ruler(d)?)
    } else {
        Ok(ruler_alpha(d, alpha)?)
    }
}

/// A trial's true covariance with its sampling factor and operator norm.
#[derive(Debug, Clone)]
pub struct Truth {
    pub toeplitz: SymToeplitz,
    pub sampler: GaussianSampler,
    pub op_norm: f64,
}

impl Truth {
    /// Draw the covariance from `substream(seed, [0])`.
    pub fn draw(d: usize, generator: Generator, seed: u64) -> Result<Self> {
        let mut rng = seeded(substream_seed(seed, &[0]));
        let (toeplitz, sampler) = match generator {
            Generator::Vandermonde { freqs } => {
                if freqs == 0 || freqs > d {
                    return Err(CliError::Config(format!(
                        "frequency count {freqs} must lie in 1..={d}"
                    )));
                }
                let model = VandermondeModel::draw(freqs, &mut rng)?;
                (model.toeplitz(d)?, model.factor(d))
            }
            Generator::Banded { m } => {
                let t = gen_banded(d, m, &mut rng)?;
                let factor = banded_factor(d, m, t.generator()[0])?;
                (t, factor)
            }
        };
        let op_norm = op_norm(&toeplitz)?;
        if !(op_norm > 0.0) {
            return Err(CliError::Numeric("covariance has zero norm".into()));
        }
        Ok(Self {
            toeplitz,
            sampler,
            op_norm,
        })
    }
}

/// Post-processed estimate from an already quantized batch.
pub fn estimate_batch(
    batch: &SampleBatch,
    correction: CorrectionKind,
    post: PostProcess,
    truth_norm: Option<f64>,
) -> Result<(EstimateResult, Option<f64>)> {
    let est = quantized_estimate(batch, correction);
    Ok(match post {
        PostProcess::None => (est, None),
        PostProcess::Threshold(z) => (threshold_estimate(&est, z)?, Some(z)),
        PostProcess::CalibratedThreshold { c, p } => {
            let norm = truth_norm.ok_or_else(|| {
                CliError::Config("calibrated threshold needs the true norm".into())
            })?;
            let z = calibrated_zeta(norm, batch, c, p)?;
            (threshold_estimate(&est, z)?, Some(z))
        }
        PostProcess::Band(m) => (banded_estimate(&est, m)?, None),
    })
}

/// `ζ` for the batch's ruler, `n` and `Δ`.
pub fn calibrated_zeta(truth_norm: f64, batch: &SampleBatch, c: f64, p: f64) -> Result<f64> {
    let k = big_k(truth_norm, batch.quantizer().delta())?;
    let d = batch.ruler().dim();
    Ok(threshold_zeta(
        k,
        batch.ruler().len(),
        d as f64,
        p,
        batch.n(),
        c,
    )?)
}

/// Quantized ruler observations of `truth`; samples from
/// `substream(seed, [1, n])`, dither from `substream(seed, [2, n])`.
pub fn observe_truth(truth: &Truth, spec: &TrialSpec, seed: u64) -> Result<SampleBatch> {
    if truth.toeplitz.generator().len() != spec.d {
        return Err(CliError::Config(
            "covariance dimension differs from trial dimension".into(),
        ));
    }
    let ruler = ruler_for(spec.d, spec.alpha)?;
    let quantizer = QuantizerConfig::new(spec.delta, spec.dither)?;
    let n = spec.n as u64;
    let mut sample_rng = seeded(substream_seed(seed, &[1, n]));
    let mut dither_rng = seeded(substream_seed(seed, &[2, n]));
    let rows = truth
        .sampler
        .sample_rows(ruler.indices(), spec.n, &mut sample_rng)?;
    Ok(SampleBatch::quantize_restricted(ruler, quantizer, rows, &mut dither_rng)?.with_seed(seed))
}

pub fn run_trial(truth: &Truth, spec: &TrialSpec, seed: u64) -> Result<TrialOutcome> {
    let batch = observe_truth(truth, spec, seed)?;
    let (estimate, zeta) = estimate_batch(&batch, spec.correction, spec.post, Some(truth.op_norm))?;
    let diff = truth.toeplitz.sub(estimate.toeplitz())?;
    let rel_error = op_norm(&diff)? / truth.op_norm;
    if !rel_error.is_finite() {
        return Err(CliError::Numeric("non-finite relative error".into()));
    }
    Ok(TrialOutcome {
        truth: truth.toeplitz.clone(),
        estimate,
        rel_error,
        zeta,
    })
}

/// One trial from scratch: covariance from `truth_seed`, noise from `seed`.
pub fn simulate_trial(spec: &TrialSpec, truth_seed: u64, seed: u64) -> Result<TrialOutcome> {
    let truth = Truth::draw(spec.d, spec.generator, truth_seed)?;
    run_trial(&truth, spec, seed)
}
