use toepquant_core::quantize::{Dither, QuantizerConfig};
use toepquant_core::rng::{seeded, substream_seed};
use toepquant_core::sampling::{GaussianSampler, SampleBatch};
use toepquant_core::{
    full_ruler, gen_toeplitz_vandermonde, quantized_estimate, ruler_alpha, toep, CorrectionKind,
    SymToeplitz,
};

/// Mean and standard error of the trial means of `â`.
#[allow(clippy::too_many_arguments)]
fn trial_stats(
    t: &SymToeplitz,
    delta: f64,
    dither: Dither,
    corr: CorrectionKind,
    alpha: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let d = t.generator().len();
    let ruler = if alpha == 1.0 {
        full_ruler(d)
    } else {
        ruler_alpha(d, alpha)
    }
    .unwrap();
    let sampler = GaussianSampler::from_covariance(t).unwrap();
    let cfg = QuantizerConfig::new(delta, dither).unwrap();
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    for trial in 0..trials {
        let mut rng = seeded(substream_seed(seed, &[trial as u64]));
        let rows = sampler.sample_rows(ruler.indices(), n, &mut rng).unwrap();
        let b = SampleBatch::quantize_restricted(ruler.clone(), cfg, rows, &mut rng).unwrap();
        for (s, &a) in quantized_estimate(&b, corr).a_hat().iter().enumerate() {
            sum[s] += a;
            sq[s] += a * a;
        }
    }
    let m = trials as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se = sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| ((q / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt())
        .collect();
    (mean, se)
}

#[test]
fn scalar_triangular_is_unbiased() {
    let sigma2 = 1.7;
    let t = toep(vec![sigma2]).unwrap();
    let (mean, se) = trial_stats(
        &t,
        2.0,
        Dither::Triangular,
        CorrectionKind::TriangularQuarter,
        1.0,
        1,
        2000,
        3,
    );
    assert!(
        (mean[0] - sigma2).abs() <= 5.0 * se[0],
        "{} ± {}",
        mean[0],
        se[0]
    );

    let (mean, se) = trial_stats(
        &t,
        2.0,
        Dither::Triangular,
        CorrectionKind::NoCorrection,
        1.0,
        1,
        2000,
        3,
    );
    assert!(
        (mean[0] - sigma2 - 1.0).abs() <= 5.0 * se[0],
        "{} ± {}",
        mean[0],
        se[0]
    );
}

#[test]
fn vandermonde_offsets_are_unbiased() {
    let t = gen_toeplitz_vandermonde(8, 3, &mut seeded(101)).unwrap();
    for (i, delta) in [0.0, 2.0, 5.0].into_iter().enumerate() {
        let (mean, se) = trial_stats(
            &t,
            delta,
            Dither::Triangular,
            CorrectionKind::TriangularQuarter,
            0.5,
            50,
            2000,
            40 + i as u64,
        );
        for s in 0..8 {
            let a = t.generator()[s];
            assert!(
                (mean[s] - a).abs() <= 5.0 * se[s],
                "Δ={delta} s={s}: {} vs {a} (se {})",
                mean[s],
                se[s]
            );
        }
    }
}

#[test]
fn unquantized_full_ruler_converges() {
    let t = toep(vec![2.0, 1.0, 0.0]).unwrap();
    let (mean, se) = trial_stats(
        &t,
        0.0,
        Dither::None,
        CorrectionKind::NoCorrection,
        1.0,
        200,
        500,
        9,
    );
    for s in 0..3 {
        assert!((mean[s] - t.generator()[s]).abs() <= 5.0 * se[s].max(1e-12));
    }
}
