//! Random Toeplitz covariances, Gaussian sampling, and ruler-restricted
//! quantized observation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, SquareMatrix};
use crate::quantize::{quantize_in_place, QuantizerConfig};
use crate::rng::{fill_standard_normal, standard_normal, unit_f64, RngCore};
use crate::ruler::Ruler;
use crate::toeplitz::SymToeplitz;

/// Frequencies closer than this (on the circle, up to reflection `f ↦ 1-f`)
/// count as a collision and are redrawn.
pub const FREQ_SEPARATION: f64 = 1e-6;

/// Spectral description of a Vandermonde-generated covariance:
/// `a_s = Σ_m p_m cos(2π s f_m)`, the real part of `F D F*`.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeModel {
    pub freqs: Vec<f64>,
    pub amps: Vec<f64>,
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let x = (a - b).abs();
    x.min(1.0 - x)
}

impl VandermondeModel {
    pub fn new(freqs: Vec<f64>, amps: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() || freqs.len() != amps.len() {
            return Err(Error::InvalidArgument(
                "need matching, non-empty frequencies and amplitudes",
            ));
        }
        if amps.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("amplitudes must be finite and >= 0"));
        }
        Ok(Self { freqs, amps })
    }

    /// Draw `k` distinct frequencies from `U[0, 1)` and amplitudes
    /// `|N(0, 1)|`.
    ///
    /// Frequencies within [`FREQ_SEPARATION`] of 0, 1/2, another frequency,
    /// or another frequency's reflection are redrawn, since each of those
    /// drops the rank of the real part below `min(d, 2k)`.
    pub fn draw<R: RngCore + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one frequency"));
        }
        let mut freqs: Vec<f64> = Vec::with_capacity(k);
        while freqs.len() < k {
            let f = unit_f64(rng);
            let degenerate = circle_dist(f, 0.0) < FREQ_SEPARATION
                || circle_dist(f, 0.5) < FREQ_SEPARATION
                || freqs.iter().any(|&g| {
                    circle_dist(f, g) < FREQ_SEPARATION || circle_dist(f, 1.0 - g) < FREQ_SEPARATION
                });
            if !degenerate {
                freqs.push(f);
            }
        }
        let amps = (0..k).map(|_| standard_normal(rng).abs()).collect();
        Ok(Self { freqs, amps })
    }

    pub fn toeplitz(&self, d: usize) -> Result<SymToeplitz> {
        let a = (0..d)
            .map(|s| {
                self.freqs
                    .iter()
                    .zip(&self.amps)
                    .map(|(&f, &p)| p * libm::cos(2.0 * PI * s as f64 * f))
                    .sum()
            })
            .collect();
        SymToeplitz::new(a)
    }

    /// A `d × 2k` factor `F` with `F Fᵀ = Toep(a)`: columns
    /// `√p_m cos(2π j f_m)` and `√p_m sin(2π j f_m)`.
    pub fn factor(&self, d: usize) -> GaussianSampler {
        let r = 2 * self.freqs.len();
        let mut data = vec![0.0; d * r];
        for j in 0..d {
            for (m, (&f, &p)) in self.freqs.iter().zip(&self.amps).enumerate() {
                let (sin, cos) = libm::sincos(2.0 * PI * j as f64 * f);
                let w = libm::sqrt(p);
                data[j * r + 2 * m] = w * cos;
                data[j * r + 2 * m + 1] = w * sin;
            }
        }
        GaussianSampler {
            d,
            rank: r,
            factor: data,
        }
    }
}

/// Random PSD Toeplitz matrix from `k` random frequencies; generically of
/// rank `min(d, 2k)`.
pub fn gen_toeplitz_vandermonde<R: RngCore + ?Sized>(
    d: usize,
    k: usize,
    rng: &mut R,
) -> Result<SymToeplitz> {
    if d == 0 {
        return Err(Error::InvalidDimension {
            expected: 1,
            got: 0,
        });
    }
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(
            "frequency count must satisfy 1 <= k <= d",
        ));
    }
    VandermondeModel::draw(k, rng)?.toeplitz(d)
}

/// Triangular (Bartlett) autocovariance `a_s = p · max(0, 1 - s/m)`.
pub fn banded_toeplitz(d: usize, m: usize, peak: f64) -> Result<SymToeplitz> {
    if m == 0 || m >= d {
        return Err(Error::InvalidArgument("bandwidth must satisfy 1 <= m < d"));
    }
    let a = (0..d)
        .map(|s| {
            if s < m {
                peak * (1.0 - s as f64 / m as f64)
            } else {
                0.0
            }
        })
        .collect();
    SymToeplitz::new(a)
}

/// Moving-average factor for [`banded_toeplitz`]: `x_j = √(p/m) Σ_{i<m} w_{j+i}`
/// has covariance `p · max(0, 1 - |j-k|/m)`.
pub fn banded_factor(d: usize, m: usize, peak: f64) -> Result<GaussianSampler> {
    if m == 0 || m >= d {
        return Err(Error::InvalidArgument("bandwidth must satisfy 1 <= m < d"));
    }
    if !(peak >= 0.0) || !peak.is_finite() {
        return Err(Error::InvalidArgument("peak must be finite and >= 0"));
    }
    let rank = d + m - 1;
    let w = libm::sqrt(peak / m as f64);
    let mut factor = vec![0.0; d * rank];
    for j in 0..d {
        for i in 0..m {
            factor[j * rank + j + i] = w;
        }
    }
    Ok(GaussianSampler { d, rank, factor })
}

/// Random banded PSD Toeplitz matrix of bandwidth `m`, with peak
/// `|N(0, 1)| + 1/2`.
pub fn gen_banded<R: RngCore + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<SymToeplitz> {
    if m == 0 || m >= d {
        return Err(Error::InvalidArgument("bandwidth must satisfy 1 <= m < d"));
    }
    let peak = standard_normal(rng).abs() + 0.5;
    banded_toeplitz(d, m, peak)
}

/// Row-major `n × width` real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    width: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(n: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * width {
            return Err(Error::InvalidDimension {
                expected: n * width,
                got: data.len(),
            });
        }
        Ok(Self { n, width, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * width);
        for r in rows {
            if r.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), width, data)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.data[l * self.width..(l + 1) * self.width]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.width.max(1)).take(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Draws `x = F z` with `z` standard normal, for a fixed factor `F`
/// (`d × rank`, row-major) with `F Fᵀ = T`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    d: usize,
    rank: usize,
    factor: Vec<f64>,
}

/// Eigenvalues below this fraction of the largest are dropped from the
/// sampling factor.
const FACTOR_CUTOFF: f64 = 1e-14;

/// Tolerance for calling a covariance PSD: `λ_min ≥ -PSD_TOL · ‖T‖₂`.
pub const PSD_TOL: f64 = 1e-8;

impl GaussianSampler {
    /// Factor `T = U Λ Uᵀ` as `U Λ₊^{1/2}`, clipping negative eigenvalues.
    pub fn from_covariance<M: SquareMatrix + ?Sized>(t: &M) -> Result<Self> {
        let d = t.dim();
        let eig = jacobi_eigen(t)?;
        let norm = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL * norm {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        let keep: Vec<usize> = (0..d)
            .filter(|&i| eig.values[i] > FACTOR_CUTOFF * norm)
            .collect();
        let rank = keep.len();
        let mut factor = vec![0.0; d * rank];
        for j in 0..d {
            for (c, &i) in keep.iter().enumerate() {
                factor[j * rank + c] = eig.vector_entry(j, i) * libm::sqrt(eig.values[i]);
            }
        }
        Ok(Self { d, rank, factor })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of latent normals per sample.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `n` samples restricted to `indices` (each `< d`).
    pub fn sample_rows<R: RngCore + ?Sized>(
        &self,
        indices: &[usize],
        n: usize,
        rng: &mut R,
    ) -> Result<SampleMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be positive"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.d) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                bound: self.d,
            });
        }
        let w = indices.len();
        let mut data = vec![0.0; n * w];
        let mut z = vec![0.0; self.rank];
        for row in data.chunks_exact_mut(w.max(1)).take(n) {
            fill_standard_normal(rng, &mut z);
            for (out, &j) in row.iter_mut().zip(indices) {
                let f = &self.factor[j * self.rank..(j + 1) * self.rank];
                *out = f.iter().zip(&z).map(|(a, b)| a * b).sum();
            }
        }
        SampleMatrix::new(n, w, data)
    }

    /// `n` full-length samples.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SampleMatrix> {
        let all: Vec<usize> = (0..self.d).collect();
        self.sample_rows(&all, n, rng)
    }
}

/// `n` i.i.d. draws from `N(0, T)`, one per row.
pub fn sample_gaussian<R: RngCore + ?Sized>(
    t: &SymToeplitz,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive"));
    }
    GaussianSampler::from_covariance(t)?.sample(n, rng)
}

/// Observations at ruler indices, possibly quantized: the estimator input.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    ruler: Ruler,
    quantizer: QuantizerConfig,
    rows: SampleMatrix,
    seed: Option<u64>,
}

impl SampleBatch {
    /// Wrap rows that are already restricted to `ruler` (and already
    /// quantized with `quantizer`). Rows must be `|R|` wide and, when
    /// `Δ > 0`, lie on the grid `Δ(ℤ + 1/2)`.
    pub fn from_observations(
        ruler: Ruler,
        quantizer: QuantizerConfig,
        rows: SampleMatrix,
    ) -> Result<Self> {
        if rows.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        if rows.width() != ruler.len() {
            return Err(Error::DimensionMismatch {
                expected: ruler.len(),
                got: rows.width(),
            });
        }
        if !quantizer.is_identity() {
            let delta = quantizer.delta();
            let off_grid = rows.as_slice().iter().any(|&v| {
                let k = v / delta - 0.5;
                (k - libm::round(k)).abs() > 1e-9
            });
            if off_grid {
                return Err(Error::InvalidArgument("observation off the quantizer grid"));
            }
        }
        Ok(Self {
            ruler,
            quantizer,
            rows,
            seed: None,
        })
    }

    /// Quantize ruler-restricted raw rows with a fresh dither per row.
    pub fn quantize_restricted<R: RngCore + ?Sized>(
        ruler: Ruler,
        quantizer: QuantizerConfig,
        mut rows: SampleMatrix,
        rng: &mut R,
    ) -> Result<Self> {
        if rows.width() != ruler.len() {
            return Err(Error::DimensionMismatch {
                expected: ruler.len(),
                got: rows.width(),
            });
        }
        if rows.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        let w = rows.width;
        for row in rows.data.chunks_exact_mut(w) {
            quantize_in_place(row, &quantizer, rng);
        }
        Ok(Self {
            ruler,
            quantizer,
            rows,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn ruler(&self) -> &Ruler {
        &self.ruler
    }

    pub fn quantizer(&self) -> &QuantizerConfig {
        &self.quantizer
    }

    pub fn rows(&self) -> &SampleMatrix {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.rows()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Restrict full samples to the ruler and quantize each row.
pub fn observe<R: RngCore + ?Sized>(
    samples: &SampleMatrix,
    ruler: &Ruler,
    quantizer: QuantizerConfig,
    rng: &mut R,
) -> Result<SampleBatch> {
    if samples.width() != ruler.dim() {
        return Err(Error::DimensionMismatch {
            expected: ruler.dim(),
            got: samples.width(),
        });
    }
    let idx = ruler.indices();
    let mut data = Vec::with_capacity(samples.rows() * idx.len());
    for row in samples.iter_rows() {
        data.extend(idx.iter().map(|&j| row[j]));
    }
    let restricted = SampleMatrix::new(samples.rows(), idx.len(), data)?;
    SampleBatch::quantize_restricted(ruler.clone(), quantizer, restricted, rng)
}
