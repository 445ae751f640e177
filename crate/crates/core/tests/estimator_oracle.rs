use proptest::prelude::*;
use toepquant_core::quantize::{Dither, QuantizerConfig};
use toepquant_core::rng::{seeded, unit_f64};
use toepquant_core::ruler::is_ruler;
use toepquant_core::sampling::{SampleBatch, SampleMatrix};
use toepquant_core::{quantized_estimate, CorrectionKind, Ruler};

/// Straight triple loop over samples and all index pairs of the ruler.
fn brute_force(
    d: usize,
    idx: &[usize],
    rows: &[Vec<f64>],
    delta: f64,
    corr: CorrectionKind,
) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for (s, slot) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for row in rows {
            for (a, &j) in idx.iter().enumerate() {
                for (b, &k) in idx.iter().enumerate() {
                    if (j as i64 - k as i64).unsigned_abs() as usize == s {
                        sum += row[a] * row[b];
                        count += 1;
                    }
                }
            }
        }
        *slot = sum / count as f64;
    }
    out[0] -= match corr {
        CorrectionKind::TriangularQuarter => delta * delta / 4.0,
        CorrectionKind::UniformSixth => delta * delta / 6.0,
        CorrectionKind::NoCorrection => 0.0,
    };
    out
}

fn random_ruler(d: usize, mask: u32) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
    for must in [0, d - 1] {
        if !idx.contains(&must) {
            idx.push(must);
        }
    }
    idx.sort_unstable();
    idx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_brute_force(
        d in 1usize..=4,
        n in 1usize..=5,
        mask in 0u32..16,
        delta_choice in 0usize..4,
        dither in prop_oneof![Just(Dither::None), Just(Dither::Uniform), Just(Dither::Triangular)],
        corr in prop_oneof![
            Just(CorrectionKind::TriangularQuarter),
            Just(CorrectionKind::UniformSixth),
            Just(CorrectionKind::NoCorrection)
        ],
        seed in any::<u64>(),
    ) {
        let idx = random_ruler(d, mask);
        prop_assume!(is_ruler(&idx, d).valid);
        let delta = [0.0, 0.5, 2.0, 5.0][delta_choice];
        let cfg = QuantizerConfig::new(delta, dither).unwrap();
        let mut rng = seeded(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                idx.iter()
                    .map(|_| {
                        let v = 6.0 * unit_f64(&mut rng) - 3.0;
                        if delta > 0.0 { delta * ((v / delta).floor() + 0.5) } else { v }
                    })
                    .collect()
            })
            .collect();
        let ruler = Ruler::new(idx.clone(), d).unwrap();
        let batch = SampleBatch::from_observations(ruler, cfg, SampleMatrix::from_rows(&rows).unwrap()).unwrap();
        let got = quantized_estimate(&batch, corr);
        let want = brute_force(d, &idx, &rows, delta, corr);
        for (g, w) in got.a_hat().iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0), "{g} vs {w}");
        }
    }
}
