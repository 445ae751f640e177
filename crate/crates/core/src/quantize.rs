//! Memoryless dithered quantization `ẋ = Q_Δ(x + τ)` with
//! `Q_Δ(y) = Δ(⌊y/Δ⌋ + 1/2)`.
//!
//! The quantizer has unbounded range. `Δ = 0` is the identity: no
//! quantization and no dither.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::{symmetric_uniform, RngCore};

/// Law of the dither added before quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dither {
    None,
    /// `τ ~ U[-Δ/2, Δ/2]`.
    Uniform,
    /// Sum of two independent `U[-Δ/2, Δ/2]` draws.
    Triangular,
}

impl fmt::Display for Dither {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dither::None => "none",
            Dither::Uniform => "uniform",
            Dither::Triangular => "triangular",
        })
    }
}

impl FromStr for Dither {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Dither::None),
            "uniform" => Ok(Dither::Uniform),
            "triangular" => Ok(Dither::Triangular),
            _ => Err(Error::InvalidArgument(
                "dither must be none, uniform or triangular",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    delta: f64,
    dither: Dither,
}

impl QuantizerConfig {
    pub fn new(delta: f64, dither: Dither) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidArgument(
                "quantization level must be finite and >= 0",
            ));
        }
        Ok(Self { delta, dither })
    }

    /// No quantization.
    pub fn identity() -> Self {
        Self {
            delta: 0.0,
            dither: Dither::None,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dither(&self) -> Dither {
        self.dither
    }

    pub fn is_identity(&self) -> bool {
        self.delta == 0.0
    }
}

/// `Δ(⌊x/Δ⌋ + 1/2)`.
pub fn quantize_scalar(x: f64, delta: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Numeric("non-finite quantizer input"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(
            "quantization level must be positive",
        ));
    }
    Ok(cell_midpoint(x, delta))
}

#[inline]
fn cell_midpoint(x: f64, delta: f64) -> f64 {
    delta * (libm::floor(x / delta) + 0.5)
}

#[inline]
fn dither_sample<R: RngCore + ?Sized>(cfg: &QuantizerConfig, rng: &mut R) -> f64 {
    let h = 0.5 * cfg.delta;
    match cfg.dither {
        _ if cfg.delta == 0.0 => 0.0,
        Dither::None => 0.0,
        Dither::Uniform => symmetric_uniform(rng, h),
        Dither::Triangular => symmetric_uniform(rng, h) + symmetric_uniform(rng, h),
    }
}

/// `len` i.i.d. dither values. `Dither::None` (or `Δ = 0`) yields zeros and
/// consumes no randomness.
pub fn draw_dither<R: RngCore + ?Sized>(
    cfg: &QuantizerConfig,
    len: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..len).map(|_| dither_sample(cfg, rng)).collect()
}

/// Quantize `x` in place with fresh dither; the hot path used when building
/// sample batches.
pub fn quantize_in_place<R: RngCore + ?Sized>(x: &mut [f64], cfg: &QuantizerConfig, rng: &mut R) {
    if cfg.is_identity() {
        return;
    }
    for v in x {
        let tau = dither_sample(cfg, rng);
        *v = cell_midpoint(*v + tau, cfg.delta);
    }
}

/// Input, dither and output of one quantizer pass, with the derived
/// quantization error `ω = ẋ - (x + τ)` and noise `ξ = ẋ - x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationTrace {
    pub input: Vec<f64>,
    pub dither: Vec<f64>,
    pub output: Vec<f64>,
    pub error: Vec<f64>,
    pub noise: Vec<f64>,
}

impl QuantizationTrace {
    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }
}

pub fn quantize_vector<R: RngCore + ?Sized>(
    x: &[f64],
    cfg: &QuantizerConfig,
    rng: &mut R,
) -> Result<QuantizationTrace> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite quantizer input"));
    }
    if cfg.is_identity() {
        let zeros = vec![0.0; x.len()];
        return Ok(QuantizationTrace {
            input: x.to_vec(),
            dither: zeros.clone(),
            output: x.to_vec(),
            error: zeros.clone(),
            noise: zeros,
        });
    }
    let dither = draw_dither(cfg, x.len(), rng);
    let output: Vec<f64> = x
        .iter()
        .zip(&dither)
        .map(|(&v, &t)| cell_midpoint(v + t, cfg.delta))
        .collect();
    let error = output
        .iter()
        .zip(x.iter().zip(&dither))
        .map(|(&o, (&v, &t))| o - (v + t))
        .collect();
    let noise = output.iter().zip(x).map(|(&o, &v)| o - v).collect();
    Ok(QuantizationTrace {
        input: x.to_vec(),
        dither,
        output,
        error,
        noise,
    })
}

/// Empirical moments of quantization error and noise, pooled over every
/// entry of every trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMoments {
    pub count: usize,
    pub mean_omega: f64,
    pub var_omega: f64,
    pub mean_xi: f64,
    /// `Ê[ξ_i²]`.
    pub second_moment_xi: f64,
    /// `Ê[ξ_i ξ_j]` over pairs of distinct coordinates within a trace.
    pub cross_moment_xi: f64,
    /// Sample correlation between input and quantization error.
    pub corr_x_omega: f64,
}

pub fn noise_moment_report(traces: &[QuantizationTrace]) -> Result<NoiseMoments> {
    let count: usize = traces.iter().map(QuantizationTrace::len).sum();
    if count == 0 {
        return Err(Error::InvalidArgument(
            "moment report needs at least one entry",
        ));
    }
    let n = count as f64;
    let (mut s_w, mut s_ww, mut s_xi, mut s_xixi) = (0.0, 0.0, 0.0, 0.0);
    let (mut s_x, mut s_xx, mut s_xw) = (0.0, 0.0, 0.0);
    let (mut cross, mut cross_pairs) = (0.0, 0.0);
    for t in traces {
        let mut row_sum = 0.0;
        let mut row_sq = 0.0;
        for i in 0..t.len() {
            let (x, w, xi) = (t.input[i], t.error[i], t.noise[i]);
            s_w += w;
            s_ww += w * w;
            s_xi += xi;
            s_xixi += xi * xi;
            s_x += x;
            s_xx += x * x;
            s_xw += x * w;
            row_sum += xi;
            row_sq += xi * xi;
        }
        // Σ_{i<j} ξ_i ξ_j = ((Σ ξ)² − Σ ξ²) / 2.
        let m = t.len() as f64;
        cross += 0.5 * (row_sum * row_sum - row_sq);
        cross_pairs += 0.5 * m * (m - 1.0);
    }
    let mean_omega = s_w / n;
    let var_omega = s_ww / n - mean_omega * mean_omega;
    let mean_x = s_x / n;
    let var_x = s_xx / n - mean_x * mean_x;
    let cov = s_xw / n - mean_x * mean_omega;
    let corr_x_omega = if var_x > 0.0 && var_omega > 0.0 {
        cov / libm::sqrt(var_x * var_omega)
    } else {
        0.0
    };
    Ok(NoiseMoments {
        count,
        mean_omega,
        var_omega,
        mean_xi: s_xi / n,
        second_moment_xi: s_xixi / n,
        cross_moment_xi: if cross_pairs > 0.0 {
            cross / cross_pairs
        } else {
            0.0
        },
        corr_x_omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{fill_standard_normal, seeded};

    #[test]
    fn scalar_examples() {
        assert_eq!(quantize_scalar(0.5, 2.0).unwrap(), 1.0);
        assert_eq!(quantize_scalar(-0.5, 2.0).unwrap(), -1.0);
        assert_eq!(quantize_scalar(3.0, 2.0).unwrap(), 3.0);
        // Exact cell boundary maps up.
        assert_eq!(quantize_scalar(2.0, 2.0).unwrap(), 3.0);
        assert!(matches!(
            quantize_scalar(f64::NAN, 1.0),
            Err(Error::Numeric(_))
        ));
        assert!(quantize_scalar(1.0, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(QuantizerConfig::new(-1.0, Dither::None).is_err());
        assert!(QuantizerConfig::new(f64::INFINITY, Dither::None).is_err());
        assert!(QuantizerConfig::new(0.0, Dither::Triangular)
            .unwrap()
            .is_identity());
        assert_eq!("triangular".parse::<Dither>().unwrap(), Dither::Triangular);
        assert!("gauss".parse::<Dither>().is_err());
    }

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n)
    }

    #[test]
    fn dither_moments() {
        let mut rng = seeded(3);
        let tri = QuantizerConfig::new(2.0, Dither::Triangular).unwrap();
        let t = draw_dither(&tri, 1_000_000, &mut rng);
        assert!(t.iter().all(|x| x.abs() <= 2.0));
        let (m, v) = mean_var(&t);
        assert!(m.abs() < 0.005);
        assert!((v - 2.0 / 3.0).abs() < 0.01 * 2.0 / 3.0);

        let uni = QuantizerConfig::new(2.0, Dither::Uniform).unwrap();
        let (_, v) = mean_var(&draw_dither(&uni, 1_000_000, &mut rng));
        assert!((v - 1.0 / 3.0).abs() < 0.01 / 3.0);

        let none = QuantizerConfig::new(2.0, Dither::None).unwrap();
        assert!(draw_dither(&none, 10, &mut rng).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identity_passes_through() {
        let mut rng = seeded(0);
        let x = [0.3, -1.7, 4.0];
        let t = quantize_vector(&x, &QuantizerConfig::identity(), &mut rng).unwrap();
        assert_eq!(t.output, x);
        assert!(t
            .noise
            .iter()
            .chain(&t.error)
            .chain(&t.dither)
            .all(|&v| v == 0.0));
    }

    #[test]
    fn zero_input_uniform_dither_hits_two_levels() {
        let mut rng = seeded(9);
        let cfg = QuantizerConfig::new(1.0, Dither::Uniform).unwrap();
        let t = quantize_vector(&[0.0; 1000], &cfg, &mut rng).unwrap();
        assert!(t.output.iter().all(|&v| v == 0.5 || v == -0.5));
        assert!(t.output.contains(&0.5) && t.output.contains(&-0.5));
    }

    #[test]
    fn triangular_noise_moments() {
        let mut rng = seeded(11);
        let cfg = QuantizerConfig::new(2.0, Dither::Triangular).unwrap();
        let mut traces = Vec::new();
        let mut x = [0.0; 10];
        for _ in 0..100_000 {
            fill_standard_normal(&mut rng, &mut x);
            traces.push(quantize_vector(&x, &cfg, &mut rng).unwrap());
        }
        let r = noise_moment_report(&traces).unwrap();
        assert_eq!(r.count, 1_000_000);
        assert!((r.var_omega - 1.0 / 3.0).abs() < 0.01 / 3.0);
        assert!((r.second_moment_xi - 1.0).abs() < 0.01);
        assert!(r.cross_moment_xi.abs() < 0.01);
        assert!(r.corr_x_omega.abs() < 0.005);
    }

    #[test]
    fn uniform_noise_report_is_generated() {
        // Second moment of ξ is input dependent here; only check the report exists.
        let mut rng = seeded(12);
        let cfg = QuantizerConfig::new(2.0, Dither::Uniform).unwrap();
        let mut x = [0.0; 8];
        let traces: Vec<_> = (0..2000)
            .map(|_| {
                fill_standard_normal(&mut rng, &mut x);
                quantize_vector(&x, &cfg, &mut rng).unwrap()
            })
            .collect();
        let r = noise_moment_report(&traces).unwrap();
        assert!(r.second_moment_xi > 0.0 && r.var_omega > 0.0);
    }

    #[test]
    fn moment_report_edge_cases() {
        assert!(noise_moment_report(&[]).is_err());
        let mut rng = seeded(1);
        let t = quantize_vector(&[1.0, 2.0], &QuantizerConfig::identity(), &mut rng).unwrap();
        let r = noise_moment_report(&[t]).unwrap();
        assert_eq!(
            (
                r.mean_omega,
                r.var_omega,
                r.mean_xi,
                r.second_moment_xi,
                r.cross_moment_xi
            ),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    proptest::proptest! {
        #[test]
        fn trace_invariants(
            seed in proptest::num::u64::ANY,
            delta in 0.01f64..10.0,
            dither in proptest::sample::select(vec![Dither::None, Dither::Uniform, Dither::Triangular]),
            x in proptest::collection::vec(-50.0f64..50.0, 1..20),
        ) {
            let mut rng = seeded(seed);
            let cfg = QuantizerConfig::new(delta, dither).unwrap();
            let t = quantize_vector(&x, &cfg, &mut rng).unwrap();
            for i in 0..x.len() {
                let k = t.output[i] / delta - 0.5;
                proptest::prop_assert!((k - k.round()).abs() < 1e-9);
                proptest::prop_assert!(t.error[i].abs() <= delta / 2.0 * (1.0 + 1e-12));
                proptest::prop_assert!((t.noise[i] - (t.error[i] + t.dither[i])).abs() < 1e-12 * (1.0 + x[i].abs()));
            }
        }
    }
}
