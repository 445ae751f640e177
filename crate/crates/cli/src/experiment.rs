//! The five desk-scale experiments.
//!
//! Seeding: each experiment variant draws one covariance from
//! `substream(master, [id, variant])`, shared by all trials, sample counts
//! and (where the dimension allows) all `d`. Trial `t` at dimension `d` uses
//! noise seed `substream(master, [id, variant, d, t])`, from which samples
//! and dither are drawn on streams keyed by `n`.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use toepquant_core::rng::substream_seed;
use toepquant_core::{CorrectionKind, Dither};

use crate::error::{CliError, Result};
use crate::fit::{fit_loglog_slope, median, total_complexity, LineFit};
use crate::sim::{
    calibrated_zeta, estimate_batch, observe_truth, ruler_for, run_trial, Generator, PostProcess,
    TrialSpec, Truth,
};

/// One trial at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: u8,
    pub d: usize,
    pub alpha: f64,
    pub delta: f64,
    pub n: usize,
    pub tag: String,
    pub trial: usize,
    pub rel_error: f64,
    /// Wall time of the trial; zero unless timing was requested.
    pub seconds: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianRow {
    pub experiment: u8,
    pub d: usize,
    pub alpha: f64,
    pub delta: f64,
    pub n: usize,
    pub tag: String,
    pub median: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub experiment: u8,
    pub d: usize,
    pub alpha: f64,
    pub delta: f64,
    pub tag: String,
    pub fit: LineFit,
    pub points: usize,
}

/// Sample-complexity search result for one ruler and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub d: usize,
    pub alpha: f64,
    pub tag: String,
    /// Smallest sample count found whose median error is at most `ε`.
    pub vsc: u64,
    /// Entries observed per sample, `|R|`.
    pub esc: u64,
    pub total: u64,
    pub median_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedRow {
    pub d: usize,
    pub c: f64,
    pub zeta_median: f64,
    pub median_thresholded: f64,
    pub median_plain: f64,
    /// Fraction of trials with every offset `s ≥ m` thresholded to zero.
    pub zero_rate: f64,
    /// Fraction of trials keeping every offset `s < m`.
    pub keep_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKind {
    Low,
    Full,
}

impl RankKind {
    pub fn tag(self) -> &'static str {
        match self {
            RankKind::Low => "lowrank",
            RankKind::Full => "fullrank",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: u8,
    pub dims: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Vandermonde frequency count; `None` means `d`.
    pub freqs: Option<usize>,
    pub timing: bool,
    /// Target accuracy for the sample-complexity search.
    pub eps: f64,
    pub rank_kinds: Vec<RankKind>,
    pub low_rank_freqs: usize,
    /// Largest `d` searched for the full-rank case.
    pub full_rank_max_d: usize,
    pub bandwidth: usize,
    pub p: f64,
    /// Fixed threshold constant; calibrated when `None`.
    pub threshold_c: Option<f64>,
    pub calibration_trials: usize,
    pub calibration_quantile: f64,
}

pub const DEFAULT_TRIALS: usize = 20;

fn half_decades(lo: i32, hi: i32) -> Vec<usize> {
    (2 * lo..=2 * hi)
        .map(|k| 10f64.powf(k as f64 / 2.0).round() as usize)
        .collect()
}

impl ExperimentConfig {
    pub fn defaults(id: u8, seed: u64) -> Result<Self> {
        let base = Self {
            id,
            dims: vec![16],
            n_grid: half_decades(2, 4),
            deltas: vec![2.0, 5.0],
            alphas: vec![0.5, 1.0],
            trials: DEFAULT_TRIALS,
            seed,
            freqs: None,
            timing: false,
            eps: 0.1,
            rank_kinds: vec![RankKind::Low, RankKind::Full],
            low_rank_freqs: 5,
            full_rank_max_d: 128,
            bandwidth: 5,
            p: 2.0,
            threshold_c: None,
            calibration_trials: 200,
            calibration_quantile: 0.97,
        };
        Ok(match id {
            1 => Self {
                n_grid: half_decades(2, 5),
                deltas: vec![5.0],
                alphas: vec![0.5],
                freqs: Some(2),
                ..base
            },
            2 => base,
            3 => Self {
                n_grid: vec![1000],
                deltas: (0..=12).map(|i| i as f64 * 0.5).collect(),
                alphas: vec![0.5, 0.75, 1.0],
                ..base
            },
            4 => Self {
                dims: vec![16, 32, 64, 128, 256, 512],
                n_grid: vec![],
                deltas: vec![2.0],
                ..base
            },
            5 => Self {
                dims: vec![32, 64, 128],
                n_grid: vec![1000],
                deltas: vec![1.0],
                alphas: vec![0.5],
                ..base
            },
            _ => {
                return Err(CliError::Config(format!(
                    "experiment id must be 1..=5, got {id}"
                )))
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if !(1..=5).contains(&self.id) {
            return bad("experiment id must be 1..=5");
        }
        if self.trials == 0 {
            return bad("trials must be >= 1");
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return bad("dimensions must be >= 2");
        }
        if self.id != 4 {
            if self.n_grid.is_empty() || self.n_grid[0] == 0 {
                return bad("sample-count grid must be non-empty and positive");
            }
            if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
                return bad("sample-count grid must be strictly increasing");
            }
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return bad("quantization levels must be finite and >= 0");
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(0.5..=1.0).contains(a)) {
            return bad("alphas must lie in [0.5, 1]");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if self.id == 5
            && self
                .dims
                .iter()
                .any(|&d| self.bandwidth == 0 || self.bandwidth >= d)
        {
            return bad("bandwidth must satisfy 1 <= m < d");
        }
        if !(self.calibration_quantile > 0.0 && self.calibration_quantile < 1.0) {
            return bad("calibration quantile must lie in (0, 1)");
        }
        if matches!(self.threshold_c, Some(c) if !(c > 0.0)) {
            return bad("threshold constant must be positive");
        }
        Ok(())
    }

    pub fn truth_seed(&self, variant: u64) -> u64 {
        substream_seed(self.seed, &[self.id as u64, variant])
    }

    pub fn trial_seed(&self, variant: u64, d: usize, trial: usize) -> u64 {
        substream_seed(
            self.seed,
            &[self.id as u64, variant, d as u64, trial as u64],
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub medians: Vec<MedianRow>,
    pub fits: Vec<FitRow>,
    pub complexity: Vec<ComplexityRow>,
    pub banded: Vec<BandedRow>,
    /// `(variant tag, covariance seed)` for replaying rows.
    pub truth_seeds: Vec<(String, u64)>,
}

struct Estimator {
    tag: &'static str,
    dither: Dither,
    correction: CorrectionKind,
    /// Forces `Δ = 0`.
    unquantized: bool,
}

const EXP1_ESTIMATORS: [Estimator; 5] = [
    Estimator {
        tag: "hatT",
        dither: Dither::Triangular,
        correction: CorrectionKind::TriangularQuarter,
        unquantized: false,
    },
    Estimator {
        tag: "dotT",
        dither: Dither::Triangular,
        correction: CorrectionKind::NoCorrection,
        unquantized: false,
    },
    Estimator {
        tag: "hatTu",
        dither: Dither::Uniform,
        correction: CorrectionKind::UniformSixth,
        unquantized: false,
    },
    Estimator {
        tag: "hatTno",
        dither: Dither::None,
        correction: CorrectionKind::NoCorrection,
        unquantized: false,
    },
    Estimator {
        tag: "tildeT",
        dither: Dither::None,
        correction: CorrectionKind::NoCorrection,
        unquantized: true,
    },
];

const HAT_T: Estimator = Estimator {
    tag: "hatT",
    dither: Dither::Triangular,
    correction: CorrectionKind::TriangularQuarter,
    unquantized: false,
};

struct Job<'a> {
    truth: &'a Truth,
    spec: TrialSpec,
    tag: &'static str,
    trial: usize,
    seed: u64,
}

fn run_jobs(experiment: u8, jobs: &[Job<'_>], timing: bool) -> Result<Vec<ResultRow>> {
    jobs.par_iter()
        .map(|job| {
            let start = Instant::now();
            let out = run_trial(job.truth, &job.spec, job.seed)?;
            let seconds = if timing {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            };
            Ok(ResultRow {
                experiment,
                d: job.spec.d,
                alpha: job.spec.alpha,
                delta: job.spec.delta,
                n: job.spec.n,
                tag: job.tag.to_string(),
                trial: job.trial,
                rel_error: out.rel_error,
                seconds,
                seed: job.seed,
            })
        })
        .collect()
}

fn vandermonde_truths(cfg: &ExperimentConfig, variant: u64) -> Result<BTreeMap<usize, Truth>> {
    let seed = cfg.truth_seed(variant);
    cfg.dims
        .iter()
        .map(|&d| {
            Ok((
                d,
                Truth::draw(
                    d,
                    Generator::Vandermonde {
                        freqs: cfg.freqs.unwrap_or(d),
                    },
                    seed,
                )?,
            ))
        })
        .collect()
}

/// Grid sweep shared by experiments 1 to 3.
fn run_grid(cfg: &ExperimentConfig, estimators: &[Estimator]) -> Result<ExperimentOutput> {
    let truths = vandermonde_truths(cfg, 0)?;
    let mut jobs = Vec::new();
    for &d in &cfg.dims {
        for &alpha in &cfg.alphas {
            for &delta in &cfg.deltas {
                for &n in &cfg.n_grid {
                    for est in estimators {
                        for trial in 0..cfg.trials {
                            let delta = if est.unquantized { 0.0 } else { delta };
                            jobs.push(Job {
                                truth: &truths[&d],
                                spec: TrialSpec {
                                    d,
                                    generator: Generator::Vandermonde {
                                        freqs: cfg.freqs.unwrap_or(d),
                                    },
                                    alpha,
                                    delta,
                                    dither: if delta == 0.0 {
                                        Dither::None
                                    } else {
                                        est.dither
                                    },
                                    correction: est.correction,
                                    n,
                                    post: PostProcess::None,
                                },
                                tag: est.tag,
                                trial,
                                seed: cfg.trial_seed(0, d, trial),
                            });
                        }
                    }
                }
            }
        }
    }
    let rows = run_jobs(cfg.id, &jobs, cfg.timing)?;
    let medians = medians_of(&rows);
    let fits = if cfg.id == 3 {
        Vec::new()
    } else {
        fits_of(&medians)?
    };
    Ok(ExperimentOutput {
        rows,
        medians,
        fits,
        truth_seeds: vec![("vandermonde".into(), cfg.truth_seed(0))],
        ..Default::default()
    })
}

/// Median per grid point, in first-appearance order.
pub fn medians_of(rows: &[ResultRow]) -> Vec<MedianRow> {
    let mut order: Vec<(usize, u64, u64, usize, String)> = Vec::new();
    let mut groups: BTreeMap<(usize, u64, u64, usize, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = (
            r.d,
            r.alpha.to_bits(),
            r.delta.to_bits(),
            r.n,
            r.tag.clone(),
        );
        let g = groups.entry(key.clone()).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(r.rel_error);
    }
    let experiment = rows.first().map_or(0, |r| r.experiment);
    order
        .into_iter()
        .map(|key| {
            let errs = &groups[&key];
            MedianRow {
                experiment,
                d: key.0,
                alpha: f64::from_bits(key.1),
                delta: f64::from_bits(key.2),
                n: key.3,
                tag: key.4,
                median: median(errs).expect("group is non-empty"),
                trials: errs.len(),
            }
        })
        .collect()
}

/// Log-log slope of median error against `n` for each curve with at least
/// three sample counts.
pub fn fits_of(medians: &[MedianRow]) -> Result<Vec<FitRow>> {
    type Curve = (usize, u64, u64, String);
    let mut order: Vec<Curve> = Vec::new();
    let mut curves: BTreeMap<Curve, Vec<(f64, f64)>> = BTreeMap::new();
    for m in medians {
        let key = (m.d, m.alpha.to_bits(), m.delta.to_bits(), m.tag.clone());
        let c = curves.entry(key.clone()).or_default();
        if c.is_empty() {
            order.push(key);
        }
        c.push((m.n as f64, m.median));
    }
    let experiment = medians.first().map_or(0, |m| m.experiment);
    let mut fits = Vec::new();
    for key in order {
        let pts = &curves[&key];
        if pts.len() < 3 || pts.iter().any(|p| !(p.1 > 0.0)) {
            continue;
        }
        fits.push(FitRow {
            experiment,
            d: key.0,
            alpha: f64::from_bits(key.1),
            delta: f64::from_bits(key.2),
            tag: key.3,
            fit: fit_loglog_slope(pts)?,
            points: pts.len(),
        });
    }
    Ok(fits)
}

const MAX_SEARCH_N: usize = 1 << 22;

/// Smallest `n` (to within 5%) whose median error is at most `cfg.eps`:
/// doubling, then bisection. Every evaluated trial is returned as a row.
fn search_vsc(
    cfg: &ExperimentConfig,
    truth: &Truth,
    base: TrialSpec,
    variant: u64,
    tag: &'static str,
    rows: &mut Vec<ResultRow>,
) -> Result<(usize, f64)> {
    let mut eval = |n: usize| -> Result<f64> {
        let jobs: Vec<Job<'_>> = (0..cfg.trials)
            .map(|trial| Job {
                truth,
                spec: TrialSpec { n, ..base },
                tag,
                trial,
                seed: cfg.trial_seed(variant, base.d, trial),
            })
            .collect();
        let new = run_jobs(cfg.id, &jobs, cfg.timing)?;
        let errs: Vec<f64> = new.iter().map(|r| r.rel_error).collect();
        rows.extend(new);
        Ok(median(&errs).expect("trials >= 1"))
    };
    let mut lo = 0usize;
    let mut hi = 4usize;
    let mut hi_err = eval(hi)?;
    while hi_err > cfg.eps {
        lo = hi;
        hi *= 2;
        if hi > MAX_SEARCH_N {
            return Err(CliError::Numeric(format!(
                "no n up to {MAX_SEARCH_N} reaches eps at d={}",
                base.d
            )));
        }
        hi_err = eval(hi)?;
    }
    while hi - lo > (hi / 20).max(1) {
        let mid = lo + (hi - lo) / 2;
        let e = eval(mid)?;
        if e <= cfg.eps {
            hi = mid;
            hi_err = e;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hi_err))
}

fn run_exp4(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let delta = cfg.deltas[0];
    let mut out = ExperimentOutput::default();
    for &kind in &cfg.rank_kinds {
        let variant = match kind {
            RankKind::Low => 0,
            RankKind::Full => 1,
        };
        out.truth_seeds
            .push((kind.tag().into(), cfg.truth_seed(variant)));
        for &d in &cfg.dims {
            let freqs = match kind {
                RankKind::Low => cfg.low_rank_freqs,
                RankKind::Full if d > cfg.full_rank_max_d => continue,
                RankKind::Full => d / 2,
            };
            let generator = Generator::Vandermonde { freqs };
            let truth = Truth::draw(d, generator, cfg.truth_seed(variant))?;
            for &alpha in &cfg.alphas {
                let base = TrialSpec {
                    d,
                    generator,
                    alpha,
                    delta,
                    dither: if delta == 0.0 {
                        Dither::None
                    } else {
                        Dither::Triangular
                    },
                    correction: CorrectionKind::TriangularQuarter,
                    n: 1,
                    post: PostProcess::None,
                };
                let (vsc, err) = search_vsc(cfg, &truth, base, variant, kind.tag(), &mut out.rows)?;
                let esc = ruler_for(d, alpha)?.len();
                out.complexity.push(ComplexityRow {
                    d,
                    alpha,
                    tag: kind.tag().into(),
                    vsc: vsc as u64,
                    esc: esc as u64,
                    total: total_complexity(vsc as u64, esc as u64)?,
                    median_error: err,
                });
            }
        }
    }
    out.medians = medians_of(&out.rows);
    Ok(out)
}

/// Smallest `C` such that, at every `d`, at least the requested fraction of
/// calibration trials threshold all offsets `s ≥ m` to zero.
fn calibrate_c(
    cfg: &ExperimentConfig,
    truths: &BTreeMap<usize, Truth>,
    spec_for: impl Fn(usize) -> TrialSpec,
) -> Result<f64> {
    let m = cfg.bandwidth;
    let mut c = 0.0f64;
    for (&d, truth) in truths {
        let spec = spec_for(d);
        let mut needed: Vec<f64> = (0..cfg.calibration_trials)
            .into_par_iter()
            .map(|t| {
                // Calibration noise lives on its own branch of the seed tree.
                let seed =
                    substream_seed(cfg.seed, &[cfg.id as u64, 0, d as u64, u64::MAX, t as u64]);
                let batch = observe_truth(truth, &spec, seed)?;
                let (est, _) = estimate_batch(&batch, spec.correction, PostProcess::None, None)?;
                let unit = calibrated_zeta(truth.op_norm, &batch, 1.0, cfg.p)?;
                let worst = est.a_hat()[m..].iter().fold(0.0f64, |a, x| a.max(x.abs()));
                Ok(worst / unit)
            })
            .collect::<Result<_>>()?;
        needed.sort_by(f64::total_cmp);
        let k = ((cfg.calibration_quantile * needed.len() as f64).ceil() as usize)
            .clamp(1, needed.len());
        c = c.max(needed[k - 1]);
    }
    // Strictly above the quantile so those trials are zeroed, not kept.
    Ok((c * (1.0 + 1e-9)).max(f64::MIN_POSITIVE))
}

fn run_exp5(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let m = cfg.bandwidth;
    let delta = cfg.deltas[0];
    let alpha = cfg.alphas[0];
    let n = cfg.n_grid[0];
    let truth_seed = cfg.truth_seed(0);
    let truths: BTreeMap<usize, Truth> = cfg
        .dims
        .iter()
        .map(|&d| Ok((d, Truth::draw(d, Generator::Banded { m }, truth_seed)?)))
        .collect::<Result<_>>()?;
    let spec_for = |d: usize| TrialSpec {
        d,
        generator: Generator::Banded { m },
        alpha,
        delta,
        dither: if delta == 0.0 {
            Dither::None
        } else {
            Dither::Triangular
        },
        correction: CorrectionKind::TriangularQuarter,
        n,
        post: PostProcess::None,
    };
    let c = match cfg.threshold_c {
        Some(c) => c,
        None => calibrate_c(cfg, &truths, spec_for)?,
    };
    let post = PostProcess::CalibratedThreshold { c, p: cfg.p };

    let mut out = ExperimentOutput {
        truth_seeds: vec![("banded".into(), truth_seed)],
        ..Default::default()
    };
    for (&d, truth) in &truths {
        let spec = spec_for(d);
        struct Trial {
            plain: f64,
            thresholded: f64,
            zeta: f64,
            zeroed: bool,
            kept: bool,
            seconds: f64,
            seed: u64,
        }
        let trials: Vec<Trial> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let start = Instant::now();
                let seed = cfg.trial_seed(0, d, t);
                let batch = observe_truth(truth, &spec, seed)?;
                let (plain, _) = estimate_batch(&batch, spec.correction, PostProcess::None, None)?;
                let (thr, zeta) =
                    estimate_batch(&batch, spec.correction, post, Some(truth.op_norm))?;
                let err =
                    |e: &toepquant_core::EstimateResult| -> Result<f64> {
                        Ok(toepquant_core::op_norm(&truth.toeplitz.sub(e.toeplitz())?)?
                            / truth.op_norm)
                    };
                Ok(Trial {
                    plain: err(&plain)?,
                    thresholded: err(&thr)?,
                    zeta: zeta.unwrap_or(0.0),
                    zeroed: thr.a_hat()[m..].iter().all(|&x| x == 0.0),
                    kept: thr.a_hat()[..m].iter().all(|&x| x != 0.0),
                    seconds: if cfg.timing {
                        start.elapsed().as_secs_f64()
                    } else {
                        0.0
                    },
                    seed,
                })
            })
            .collect::<Result<_>>()?;
        for (tag, pick) in [("thresh", true), ("hatT", false)] {
            for (i, t) in trials.iter().enumerate() {
                out.rows.push(ResultRow {
                    experiment: cfg.id,
                    d,
                    alpha,
                    delta,
                    n,
                    tag: tag.into(),
                    trial: i,
                    rel_error: if pick { t.thresholded } else { t.plain },
                    seconds: t.seconds,
                    seed: t.seed,
                });
            }
        }
        let count = trials.len() as f64;
        let col = |f: fn(&Trial) -> f64| {
            median(&trials.iter().map(f).collect::<Vec<_>>()).expect("trials >= 1")
        };
        out.banded.push(BandedRow {
            d,
            c,
            zeta_median: col(|t| t.zeta),
            median_thresholded: col(|t| t.thresholded),
            median_plain: col(|t| t.plain),
            zero_rate: trials.iter().filter(|t| t.zeroed).count() as f64 / count,
            keep_rate: trials.iter().filter(|t| t.kept).count() as f64 / count,
        });
    }
    out.medians = medians_of(&out.rows);
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.id {
        1 => run_grid(cfg, &EXP1_ESTIMATORS),
        2 | 3 => run_grid(cfg, std::slice::from_ref(&HAT_T)),
        4 => run_exp4(cfg),
        5 => run_exp5(cfg),
        _ => unreachable!("validated"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: u8) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(id, 11).unwrap();
        c.trials = 3;
        c
    }

    #[test]
    fn grids() {
        assert_eq!(half_decades(2, 4), vec![100, 316, 1000, 3162, 10000]);
        assert_eq!(
            ExperimentConfig::defaults(1, 0).unwrap().n_grid.last(),
            Some(&100000)
        );
        assert!(ExperimentConfig::defaults(6, 0).is_err());
    }

    #[test]
    fn validation() {
        let mut c = small(2);
        c.n_grid = vec![100, 100];
        assert!(c.validate().is_err());
        let mut c = small(2);
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = small(5);
        c.bandwidth = 32;
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_and_keyed() {
        let mut c = small(2);
        c.n_grid = vec![100, 200, 400];
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 2 * 2 * 3 * 3);
        assert_eq!(a.fits.len(), 4);
        let mut keys: Vec<_> = a
            .rows
            .iter()
            .map(|r| {
                (
                    r.d,
                    r.alpha.to_bits(),
                    r.delta.to_bits(),
                    r.n,
                    r.tag.clone(),
                    r.trial,
                )
            })
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), a.rows.len());
        assert!(a
            .rows
            .iter()
            .all(|r| r.seconds == 0.0 && r.rel_error >= 0.0));
    }

    #[test]
    fn single_point_grid_has_no_fit() {
        let mut c = small(2);
        c.n_grid = vec![500];
        let out = run_experiment(&c).unwrap();
        assert!(out.fits.is_empty());
        assert_eq!(out.medians.len(), 4);
    }

    #[test]
    fn exp1_tags() {
        let mut c = small(1);
        c.n_grid = vec![200];
        let out = run_experiment(&c).unwrap();
        let tags: Vec<&str> = out.medians.iter().map(|m| m.tag.as_str()).collect();
        assert_eq!(tags, ["hatT", "dotT", "hatTu", "hatTno", "tildeT"]);
        assert!(out
            .rows
            .iter()
            .filter(|r| r.tag == "tildeT")
            .all(|r| r.delta == 0.0));
    }

    #[test]
    fn exp4_small_search() {
        let mut c = small(4);
        c.dims = vec![16];
        c.rank_kinds = vec![RankKind::Low];
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.complexity.len(), 2);
        for row in &out.complexity {
            assert!(row.median_error <= c.eps);
            assert_eq!(row.total, row.vsc * row.esc);
        }
    }

    #[test]
    fn exp5_small() {
        let mut c = small(5);
        c.dims = vec![32];
        c.calibration_trials = 20;
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.banded.len(), 1);
        assert!(out.banded[0].c > 0.0);
        assert_eq!(out.rows.len(), 6);
    }

    #[test]
    fn rows_replay_through_simulator() {
        let mut c = small(2);
        c.n_grid = vec![100, 300, 900];
        let out = run_experiment(&c).unwrap();
        let r = &out.rows[7];
        let spec = TrialSpec {
            d: r.d,
            generator: Generator::Vandermonde { freqs: r.d },
            alpha: r.alpha,
            delta: r.delta,
            dither: Dither::Triangular,
            correction: CorrectionKind::TriangularQuarter,
            n: r.n,
            post: PostProcess::None,
        };
        let again = crate::sim::simulate_trial(&spec, out.truth_seeds[0].1, r.seed).unwrap();
        assert_eq!(again.rel_error, r.rel_error);
    }
}
