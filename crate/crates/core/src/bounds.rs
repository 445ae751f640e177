//! Closed-form constants and sample-complexity predictions.
//!
//! Universal constants of unknown value are set to 1, so predictions are
//! only meaningful up to a constant factor. [`BoundsReport`] says so in
//! its `up_to_constant` field.

use crate::error::{Error, Result};
use crate::linalg::{fro_norm, op_norm};
use crate::ruler::{ruler_alpha, Ruler};
use crate::toeplitz::{best_rank_k, principal_submatrix, SymToeplitz};

fn nonneg(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidArgument(what))
    }
}

fn fourth(x: f64) -> f64 {
    let x2 = x * x;
    x2 * x2
}

/// `K = 2(‖T‖₂ + 2Δ²)`.
pub fn big_k(op_norm_t: f64, delta: f64) -> Result<f64> {
    nonneg(op_norm_t, "norm must be >= 0")?;
    nonneg(delta, "quantization level must be >= 0")?;
    Ok(2.0 * (op_norm_t + 2.0 * delta * delta))
}

/// `κ = ε²‖T‖₂² / ((‖T‖₂² + Δ⁴) φ)`.
pub fn kappa(eps: f64, op_norm_t: f64, delta: f64, phi: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument("accuracy must lie in (0, 1]"));
    }
    if !(op_norm_t > 0.0) || !(phi > 0.0) {
        return Err(Error::InvalidArgument(
            "norm and coverage coefficient must be positive",
        ));
    }
    nonneg(delta, "quantization level must be >= 0")?;
    let t2 = op_norm_t * op_norm_t;
    Ok(eps * eps * t2 / ((t2 + fourth(delta)) * phi))
}

/// `𝓛 = (‖T‖₂² + Δ⁴) / ‖T‖₂²`.
pub fn script_l(op_norm_t: f64, delta: f64) -> Result<f64> {
    if !(op_norm_t > 0.0) {
        return Err(Error::DivideByZero);
    }
    let t2 = op_norm_t * op_norm_t;
    Ok((t2 + fourth(delta)) / t2)
}

/// `𝓛′ = (λ‖T‖₂² + Δ⁴) / ‖T‖₂²` with `λ = k²/d`.
pub fn script_l_prime(op_norm_t: f64, delta: f64, k: usize, d: usize) -> Result<f64> {
    if !(op_norm_t > 0.0) {
        return Err(Error::DivideByZero);
    }
    if k == 0 || k > d {
        return Err(Error::InvalidArgument("rank must satisfy 1 <= k <= d"));
    }
    let lambda = (k * k) as f64 / d as f64;
    let t2 = op_norm_t * op_norm_t;
    Ok((lambda * t2 + fourth(delta)) / t2)
}

/// Predicted sample count for ruler `R_α`:
/// `𝓛 · ln(d/(εδ)) · max(d^{2-2α}, d^{1-α} ln d) / ε²`.
pub fn vsc_predict(
    d: usize,
    eps: f64,
    delta_prob: f64,
    alpha: f64,
    script_l_value: f64,
) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension {
            expected: 1,
            got: 0,
        });
    }
    if !(eps > 0.0 && eps < 1.0) || !(delta_prob > 0.0 && delta_prob < 1.0) {
        return Err(Error::InvalidArgument(
            "accuracy and failure probability must lie in (0, 1)",
        ));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument("alpha must lie in (0, 1]"));
    }
    let df = d as f64;
    let ln_d = libm::log(df);
    let growth = libm::pow(df, 2.0 - 2.0 * alpha).max(libm::pow(df, 1.0 - alpha) * ln_d);
    Ok(script_l_value * libm::log(df / (eps * delta_prob)) * growth / (eps * eps))
}

/// `ζ = C K √((ln|R| + 4p ln d) / n)`.
pub fn threshold_zeta(
    big_k: f64,
    ruler_size: usize,
    d: f64,
    p: f64,
    n: usize,
    c: f64,
) -> Result<f64> {
    nonneg(big_k, "K must be >= 0")?;
    if ruler_size == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "ruler size and sample count must be positive",
        ));
    }
    if !(d >= 1.0) || !(p > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidArgument("need d >= 1, p > 0 and C > 0"));
    }
    let num = libm::log(ruler_size as f64) + 4.0 * p * libm::log(d);
    Ok(c * big_k * libm::sqrt(num / n as f64))
}

/// `𝒦 = K √(ln(|R|/δ) / n)`.
pub fn script_k(big_k: f64, ruler_size: usize, delta_prob: f64, n: usize) -> Result<f64> {
    nonneg(big_k, "K must be >= 0")?;
    if ruler_size == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "ruler size and sample count must be positive",
        ));
    }
    if !(delta_prob > 0.0 && delta_prob < 1.0) {
        return Err(Error::InvalidArgument(
            "failure probability must lie in (0, 1)",
        ));
    }
    Ok(big_k * libm::sqrt(libm::log(ruler_size as f64 / delta_prob) / n as f64))
}

/// Both sides of the low-rank submatrix inequality
/// `‖T_R‖₂² ≤ (32k²/d^{2-2α}) ‖T‖₂² + 8 λ(k, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaDiag {
    /// `‖T_R‖₂²` for the principal submatrix on `R_α`.
    pub submatrix_norm_sq: f64,
    pub bound_value: f64,
    /// `λ(k, T) = min(‖T - T_k‖₂², (2/d^{1-α}) ‖T - T_k‖_F²)`.
    pub lambda: f64,
}

impl LambdaDiag {
    pub fn holds(&self) -> bool {
        self.submatrix_norm_sq <= self.bound_value
    }
}

pub fn lambda_diag(t: &SymToeplitz, k: usize, alpha: f64) -> Result<LambdaDiag> {
    let d = t.generator().len();
    if k == 0 || k > d {
        return Err(Error::InvalidArgument("rank must satisfy 1 <= k <= d"));
    }
    let ruler = ruler_alpha(d, alpha)?;
    lambda_diag_on(t, k, alpha, &ruler)
}

/// [`lambda_diag`] on an explicit ruler.
pub fn lambda_diag_on(t: &SymToeplitz, k: usize, alpha: f64, ruler: &Ruler) -> Result<LambdaDiag> {
    let d = t.generator().len();
    if k == 0 || k > d {
        return Err(Error::InvalidArgument("rank must satisfy 1 <= k <= d"));
    }
    let sub = principal_submatrix(t, ruler.indices())?;
    let sub_norm = op_norm(&sub)?;
    let t_norm = op_norm(t)?;
    let resid = t.to_dense().sub(&best_rank_k(t, k)?)?;
    let r_op = op_norm(&resid)?;
    let r_fro = fro_norm(&resid);
    let df = d as f64;
    let lambda = (r_op * r_op).min(2.0 / libm::pow(df, 1.0 - alpha) * r_fro * r_fro);
    let first = 32.0 * (k * k) as f64 / libm::pow(df, 2.0 - 2.0 * alpha) * t_norm * t_norm;
    Ok(LambdaDiag {
        submatrix_norm_sq: sub_norm * sub_norm,
        bound_value: first + 8.0 * lambda,
        lambda,
    })
}

/// Inputs to [`BoundsReport::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsInput {
    pub d: usize,
    pub alpha: f64,
    pub delta: f64,
    pub eps: f64,
    pub delta_prob: f64,
    /// Rank used for `𝓛′`.
    pub k: usize,
    pub m: usize,
    pub p: f64,
    pub c: f64,
    pub n: usize,
    pub op_norm_t: f64,
}

impl Default for BoundsInput {
    fn default() -> Self {
        Self {
            d: 16,
            alpha: 0.5,
            delta: 0.0,
            eps: 0.1,
            delta_prob: 0.1,
            k: 1,
            m: 1,
            p: 2.0,
            c: 1.0,
            n: 1000,
            op_norm_t: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub input: BoundsInput,
    pub ruler_size: usize,
    pub phi: f64,
    pub big_k: f64,
    pub kappa: f64,
    pub script_l: f64,
    pub script_l_prime: f64,
    /// `k²/d`.
    pub lambda: f64,
    pub zeta: f64,
    pub script_k: f64,
    pub vsc_pred: f64,
    pub vsc_pred_low_rank: f64,
    pub up_to_constant: bool,
}

impl BoundsReport {
    pub fn evaluate(input: BoundsInput) -> Result<Self> {
        let ruler = ruler_alpha(input.d, input.alpha)?;
        let phi = ruler.coverage_coefficient();
        let big_k = big_k(input.op_norm_t, input.delta)?;
        let sl = script_l(input.op_norm_t, input.delta)?;
        let slp = script_l_prime(input.op_norm_t, input.delta, input.k, input.d)?;
        // A one-point ruler has φ = 0; κ is then unbounded.
        let kappa = if phi > 0.0 {
            kappa(input.eps, input.op_norm_t, input.delta, phi)?
        } else {
            f64::INFINITY
        };
        Ok(Self {
            input,
            ruler_size: ruler.len(),
            phi,
            big_k,
            kappa,
            script_l: sl,
            script_l_prime: slp,
            lambda: (input.k * input.k) as f64 / input.d as f64,
            zeta: threshold_zeta(
                big_k,
                ruler.len(),
                input.d as f64,
                input.p,
                input.n,
                input.c,
            )?,
            script_k: script_k(big_k, ruler.len(), input.delta_prob, input.n)?,
            vsc_pred: vsc_predict(input.d, input.eps, input.delta_prob, input.alpha, sl)?,
            vsc_pred_low_rank: vsc_predict(input.d, input.eps, input.delta_prob, input.alpha, slp)?,
            up_to_constant: true,
        })
    }
}
