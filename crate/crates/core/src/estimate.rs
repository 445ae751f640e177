//! Toeplitz covariance estimators built from ruler observations.
//!
//! Every estimator first forms the pair-product averages
//! `ȧ_s = (1/(n|R_s|)) Σ_l Σ_{(j,k) ∈ R_s} ẋ_j ẋ_k` over ordered pairs, then
//! optionally corrects the diagonal and post-processes the generating vector.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{fro_norm, max_norm, op_norm};
use crate::ruler::Ruler;
use crate::sampling::SampleBatch;
use crate::toeplitz::SymToeplitz;

/// Diagonal bias correction subtracted from `ȧ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrectionKind {
    /// `Δ²/4`, exact under triangular dither.
    TriangularQuarter,
    /// `Δ²/6`.
    UniformSixth,
    NoCorrection,
}

impl CorrectionKind {
    pub fn amount(self, delta: f64) -> f64 {
        match self {
            CorrectionKind::TriangularQuarter => delta * delta / 4.0,
            CorrectionKind::UniformSixth => delta * delta / 6.0,
            CorrectionKind::NoCorrection => 0.0,
        }
    }
}

impl fmt::Display for CorrectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrectionKind::TriangularQuarter => "quarter",
            CorrectionKind::UniformSixth => "sixth",
            CorrectionKind::NoCorrection => "none",
        })
    }
}

impl FromStr for CorrectionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quarter" | "triangular" => Ok(CorrectionKind::TriangularQuarter),
            "sixth" | "uniform" => Ok(CorrectionKind::UniformSixth),
            "none" => Ok(CorrectionKind::NoCorrection),
            _ => Err(Error::InvalidArgument(
                "correction must be quarter, sixth or none",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    toeplitz: SymToeplitz,
    ruler: Ruler,
    n: usize,
    delta: f64,
    correction: CorrectionKind,
}

impl EstimateResult {
    /// Estimated generating vector `â`.
    pub fn a_hat(&self) -> &[f64] {
        self.toeplitz.generator()
    }

    pub fn toeplitz(&self) -> &SymToeplitz {
        &self.toeplitz
    }

    pub fn ruler(&self) -> &Ruler {
        &self.ruler
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn correction(&self) -> CorrectionKind {
        self.correction
    }

    fn with_generator(&self, a: Vec<f64>) -> Self {
        Self {
            toeplitz: SymToeplitz::new(a).expect("length preserved"),
            ..self.clone()
        }
    }
}

/// `ȧ_s` for one offset, summed over ordered pairs.
pub fn dot_a(batch: &SampleBatch, s: usize) -> Result<f64> {
    let ruler = batch.ruler();
    let pairs = ruler.pairs_at_distance(s)?;
    let pos = positions(ruler);
    let mut sum = 0.0;
    for row in batch.rows().iter_rows() {
        for &(j, k) in &pairs {
            sum += row[pos[j]] * row[pos[k]];
        }
    }
    Ok(sum / (batch.n() as f64 * pairs.len() as f64))
}

/// Map from ambient index to column in the restricted rows.
fn positions(ruler: &Ruler) -> Vec<usize> {
    let mut pos = vec![usize::MAX; ruler.dim()];
    for (c, &i) in ruler.indices().iter().enumerate() {
        pos[i] = c;
    }
    pos
}

/// `ȧ_s` for all `s` in one pass over the batch.
///
/// Accumulates each unordered pair once; for `s ≥ 1` the ordered sum and
/// ordered count are both twice the unordered ones.
pub fn dot_a_all(batch: &SampleBatch) -> Vec<f64> {
    let ruler = batch.ruler();
    let idx = ruler.indices();
    let mut acc = vec![0.0; ruler.dim()];
    for row in batch.rows().iter_rows() {
        for (j, &xj) in row.iter().enumerate() {
            for (k, &xk) in row.iter().enumerate().skip(j) {
                acc[idx[k] - idx[j]] += xj * xk;
            }
        }
    }
    let n = batch.n() as f64;
    acc.iter()
        .enumerate()
        .map(|(s, &v)| {
            let unordered = if s == 0 {
                ruler.pair_count(0)
            } else {
                ruler.pair_count(s) / 2
            };
            v / (n * unordered as f64)
        })
        .collect()
}

/// `T̃ = Toep(ã)` from unquantized observations.
pub fn ruler_estimate(batch: &SampleBatch) -> Result<EstimateResult> {
    if !batch.quantizer().is_identity() {
        return Err(Error::Misuse(
            "ruler estimate needs unquantized observations",
        ));
    }
    Ok(EstimateResult {
        toeplitz: SymToeplitz::new(dot_a_all(batch))?,
        ruler: batch.ruler().clone(),
        n: batch.n(),
        delta: 0.0,
        correction: CorrectionKind::NoCorrection,
    })
}

/// `T̂ = Toep(ȧ) - c·I`, with `c` set by `correction` and the batch's `Δ`.
pub fn quantized_estimate(batch: &SampleBatch, correction: CorrectionKind) -> EstimateResult {
    let delta = batch.quantizer().delta();
    let mut a = dot_a_all(batch);
    a[0] -= correction.amount(delta);
    EstimateResult {
        toeplitz: SymToeplitz::new(a).expect("ruler dimension is positive"),
        ruler: batch.ruler().clone(),
        n: batch.n(),
        delta,
        correction,
    }
}

/// Zero every offset (including the diagonal) with `|â_s| < ζ`.
pub fn threshold_estimate(est: &EstimateResult, zeta: f64) -> Result<EstimateResult> {
    if !(zeta >= 0.0) {
        return Err(Error::InvalidArgument("threshold must be >= 0"));
    }
    let a = est
        .a_hat()
        .iter()
        .map(|&v| if v.abs() >= zeta { v } else { 0.0 })
        .collect();
    Ok(est.with_generator(a))
}

/// Keep offsets `s < m`, zero the rest.
pub fn banded_estimate(est: &EstimateResult, m: usize) -> Result<EstimateResult> {
    let d = est.a_hat().len();
    if m == 0 || m > d {
        return Err(Error::InvalidArgument("bandwidth must satisfy 1 <= m <= d"));
    }
    let a = est
        .a_hat()
        .iter()
        .enumerate()
        .map(|(s, &v)| if s < m { v } else { 0.0 })
        .collect();
    Ok(est.with_generator(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    Operator,
    Frobenius,
    Max,
}

/// `‖T - T̂‖ / ‖T‖`.
pub fn relative_error(t: &SymToeplitz, est: &EstimateResult, norm: NormKind) -> Result<f64> {
    let diff = t.sub(est.toeplitz())?;
    let (num, den) = match norm {
        NormKind::Operator => (op_norm(&diff)?, op_norm(t)?),
        NormKind::Frobenius => (fro_norm(&diff), fro_norm(t)),
        NormKind::Max => (max_norm(&diff), max_norm(t)),
    };
    if den == 0.0 {
        return Err(Error::DivideByZero);
    }
    Ok(num / den)
}
